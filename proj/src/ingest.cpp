#include "lexd/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <tuple>

#include "lexd/csv.hpp"

namespace lexd {

std::string to_string(ChannelRole role) {
    switch (role) {
        case ChannelRole::movement: return "movement";
        case ChannelRole::speech: return "speech";
        case ChannelRole::other: return "other";
    }
    return "other";
}

ChannelRole parse_role(const std::string& text) {
    if (text == "movement") return ChannelRole::movement;
    if (text == "speech") return ChannelRole::speech;
    if (text == "other") return ChannelRole::other;
    throw InputError("unknown channel role '" + text + "'");
}

const Channel& RecordingGroup::channel(const std::string& channel_id) const {
    for (const auto& ch : channels) {
        if (ch.channel_id == channel_id) return ch;
    }
    throw InputError("recording '" + recording_id + "' has no channel '" + channel_id + "'");
}

std::vector<const Channel*> RecordingGroup::channels_with_role(ChannelRole role) const {
    std::vector<const Channel*> out;
    for (const auto& ch : channels) {
        auto it = channel_roles.find(ch.channel_id);
        if (it != channel_roles.end() && it->second == role) out.push_back(&ch);
    }
    return out;
}

std::size_t samples_for(double seconds, double sample_rate) {
    return static_cast<std::size_t>(std::llround(seconds * sample_rate));
}

namespace {

struct PendingChannel {
    ChannelRole role;
    double sample_rate;
    std::size_t first_line;
    std::map<long long, double> samples;
};

constexpr const char* kColumns[] = {"recording_id", "channel_id", "role", "sample_rate", "t_index", "value"};

}  // namespace

std::vector<RecordingGroup> load_recordings(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw InputError("empty input: header row required");
    }
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) {
        line.erase(0, 3);  // UTF-8 BOM
    }
    const auto header = csv::split_line(line);
    std::size_t col[6];
    for (std::size_t k = 0; k < 6; ++k) {
        auto it = std::find(header.begin(), header.end(), kColumns[k]);
        if (it == header.end()) {
            throw InputError(std::string("missing required column '") + kColumns[k] + "'");
        }
        col[k] = static_cast<std::size_t>(it - header.begin());
    }

    std::map<std::string, std::map<std::string, PendingChannel>> pending;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto fields = csv::split_line(line);
        if (fields.size() != header.size()) {
            throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                             " fields, got " + std::to_string(fields.size()));
        }
        const std::string& rec = fields[col[0]];
        const std::string& chan = fields[col[1]];
        if (rec.empty() || chan.empty()) {
            throw InputError("line " + std::to_string(line_no) + ": empty recording_id or channel_id");
        }
        const auto rate = csv::parse_double(fields[col[3]]);
        if (!rate || !std::isfinite(*rate) || *rate <= 0.0) {
            throw InputError("line " + std::to_string(line_no) + ": invalid sample_rate '" + fields[col[3]] + "'");
        }
        const auto index = csv::parse_int(fields[col[4]]);
        if (!index || *index < 0) {
            throw InputError("line " + std::to_string(line_no) + ": invalid t_index '" + fields[col[4]] + "'");
        }
        const auto value = csv::parse_double(fields[col[5]]);
        if (!value) {
            throw InputError("line " + std::to_string(line_no) + ": non-numeric value '" + fields[col[5]] + "'");
        }
        if (!std::isfinite(*value)) {
            throw InputError("line " + std::to_string(line_no) + ": non-finite value '" + fields[col[5]] + "'");
        }
        ChannelRole role;
        try {
            role = parse_role(fields[col[2]]);
        } catch (const InputError& e) {
            throw InputError("line " + std::to_string(line_no) + ": " + e.what());
        }

        auto& channels = pending[rec];
        auto [it, inserted] = channels.try_emplace(chan, PendingChannel{role, *rate, line_no, {}});
        PendingChannel& pc = it->second;
        if (!inserted && (pc.role != role || pc.sample_rate != *rate)) {
            throw InputError("line " + std::to_string(line_no) + ": role/sample_rate differ from line " +
                             std::to_string(pc.first_line) + " for channel '" + chan + "'");
        }
        if (!pc.samples.emplace(*index, *value).second) {
            throw InputError("line " + std::to_string(line_no) + ": duplicate row for (" + rec + ", " + chan + ", " +
                             std::to_string(*index) + ")");
        }
    }

    std::vector<RecordingGroup> groups;
    groups.reserve(pending.size());
    for (auto& [rec, channels] : pending) {
        RecordingGroup group;
        group.recording_id = rec;
        for (auto& [chan, pc] : channels) {
            if (pc.samples.empty()) {
                throw InputError("recording '" + rec + "' channel '" + chan + "' is empty");
            }
            const long long last = pc.samples.rbegin()->first;
            if (last + 1 != static_cast<long long>(pc.samples.size())) {
                throw InputError("recording '" + rec + "' channel '" + chan + "': t_index values are not contiguous from 0");
            }
            Channel ch;
            ch.channel_id = chan;
            ch.label = chan;
            ch.sample_rate = pc.sample_rate;
            ch.values.reserve(pc.samples.size());
            for (const auto& [idx, v] : pc.samples) ch.values.push_back(v);
            group.channel_roles.emplace(chan, pc.role);
            group.channels.push_back(std::move(ch));
        }
        groups.push_back(std::move(group));
    }
    return groups;
}

std::vector<RecordingGroup> load_recordings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open '" + path.string() + "'");
    }
    return load_recordings(in);
}

Channel resample_energy(const Channel& channel, double block_seconds) {
    if (!(block_seconds > 0.0)) {
        throw std::invalid_argument("block_seconds must be positive");
    }
    const double per_block = block_seconds * channel.sample_rate;
    if (per_block < 1.0) {
        throw std::invalid_argument("energy block shorter than one input sample");
    }
    const std::size_t block = samples_for(block_seconds, channel.sample_rate);
    Channel out;
    out.channel_id = channel.channel_id;
    out.label = channel.label;
    out.sample_rate = 1.0 / block_seconds;
    const std::size_t blocks = channel.values.size() / block;
    out.values.reserve(blocks);
    for (std::size_t k = 0; k < blocks; ++k) {
        double energy = 0.0;
        for (std::size_t i = k * block; i < (k + 1) * block; ++i) {
            energy += channel.values[i] * channel.values[i];
        }
        out.values.push_back(energy);
    }
    return out;
}

std::vector<Slice> slice_recording(const RecordingGroup& group, double duration) {
    if (!(duration > 0.0)) {
        throw std::invalid_argument("slice duration must be positive");
    }
    if (group.channels.empty()) {
        throw InputError("recording '" + group.recording_id + "' has no channels");
    }
    std::size_t count = std::numeric_limits<std::size_t>::max();
    for (const auto& ch : group.channels) {
        const std::size_t width = samples_for(duration, ch.sample_rate);
        if (width == 0) {
            throw InputError("slice of " + csv::format_double(duration) + " s is shorter than one sample of channel '" +
                             ch.channel_id + "'");
        }
        count = std::min(count, ch.values.size() / width);
    }
    if (count == 0) {
        throw InputError("slice duration " + csv::format_double(duration) + " s exceeds the shortest channel of recording '" +
                         group.recording_id + "'");
    }

    std::vector<Slice> slices(count);
    for (std::size_t k = 0; k < count; ++k) {
        Slice& s = slices[k];
        s.recording_id = group.recording_id;
        s.slice_index = k;
        s.start_time = static_cast<double>(k) * duration;
        s.duration = duration;
        for (const auto& ch : group.channels) {
            const std::size_t width = samples_for(duration, ch.sample_rate);
            const auto first = ch.values.begin() + static_cast<std::ptrdiff_t>(k * width);
            ChannelWindow w;
            w.sample_rate = ch.sample_rate;
            auto role = group.channel_roles.find(ch.channel_id);
            w.role = role == group.channel_roles.end() ? ChannelRole::other : role->second;
            w.values.assign(first, first + static_cast<std::ptrdiff_t>(width));
            s.windows.emplace(ch.channel_id, std::move(w));
        }
    }
    return slices;
}

}  // namespace lexd
