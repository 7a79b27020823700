#include "lexd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <set>

#include "lexd/csv.hpp"

namespace lexd::synth {

namespace {

enum class SliceKind { planted, still_decoy, step_decoy, normal };

std::vector<std::size_t> pick_planted(std::size_t slices, std::size_t count, std::size_t lag, std::mt19937_64& rng) {
    // planted slices and their lagged targets never overlap
    std::vector<std::size_t> chosen;
    const std::size_t last = slices > lag + 1 ? slices - lag - 1 : 0;
    for (std::size_t attempt = 0; attempt < 10000 && chosen.size() < count && last >= 1; ++attempt) {
        std::uniform_int_distribution<std::size_t> pick(1, last);
        const std::size_t i = pick(rng);
        const bool clear = std::none_of(chosen.begin(), chosen.end(), [&](std::size_t c) {
            return (c > i ? c - i : i - c) < lag + 2;
        });
        if (clear) chosen.push_back(i);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

void center(std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    for (double& x : v) x -= m;
}

/// Low plateau for most of the slice followed by a short high segment.
std::vector<double> step_up(std::size_t n, double scale, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> frac(0.85, 0.93);
    const auto at = static_cast<std::size_t>(frac(rng) * static_cast<double>(n));
    std::vector<double> v(n);
    for (std::size_t t = 0; t < n; ++t) v[t] = (t >= at ? scale : 0.0) + 0.03 * scale * gauss(rng);
    center(v);
    return v;
}

/// White noise, random walk or a step down, picked at random.
std::vector<double> other_shape(std::size_t n, double scale, bool allow_walk, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> v(n);
    const double pick = unit(rng);
    if (pick < 0.4) {
        for (double& x : v) x = scale * gauss(rng);
        return v;
    }
    if (pick < 0.8 && allow_walk) {
        double x = 0.0;
        const double step = scale / std::sqrt(static_cast<double>(n)) * 3.0;
        for (double& y : v) y = (x += step * gauss(rng));
        return v;
    }
    const auto at = static_cast<std::size_t>((0.75 + 0.15 * unit(rng)) * static_cast<double>(n));
    for (std::size_t t = 0; t < n; ++t) v[t] = (t < at ? scale : 0.0) + 0.03 * scale * gauss(rng);
    center(v);
    return v;
}

}  // namespace

PlantedCorpus make_planted_corpus(const PlantedCorpusSpec& spec) {
    PlantedCorpus out;
    const auto move_n = samples_for(spec.slice_seconds, spec.movement_rate);
    const auto seconds = static_cast<std::size_t>(std::llround(spec.slice_seconds)) * spec.slices_per_recording;
    const auto per_second = static_cast<std::size_t>(std::llround(spec.speech_rate));

    for (std::size_t rec = 0; rec < spec.recordings; ++rec) {
        std::mt19937_64 rng(spec.seed + 7919 * rec);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);

        char name[32];
        std::snprintf(name, sizeof(name), "rec%02zu", rec);
        RecordingGroup group;
        group.recording_id = name;

        const auto planted = pick_planted(spec.slices_per_recording, spec.planted_per_recording, spec.lag, rng);
        std::vector<SliceKind> kinds(spec.slices_per_recording, SliceKind::normal);
        std::vector<std::size_t> free;
        for (std::size_t s = 0; s < kinds.size(); ++s) {
            if (std::binary_search(planted.begin(), planted.end(), s)) {
                kinds[s] = SliceKind::planted;
                out.planted.push_back({group.recording_id, s});
            } else {
                free.push_back(s);
            }
        }
        std::shuffle(free.begin(), free.end(), rng);
        for (std::size_t i = 0; i < free.size(); ++i) {
            if (i < spec.still_decoys_per_recording) {
                kinds[free[i]] = SliceKind::still_decoy;
            } else if (i < spec.still_decoys_per_recording + spec.step_decoys_per_recording) {
                kinds[free[i]] = SliceKind::step_decoy;
            }
        }

        for (std::size_t c = 0; c < spec.movement_channels; ++c) {
            Channel ch;
            ch.channel_id = "member" + std::to_string(c + 1);
            ch.label = ch.channel_id;
            ch.sample_rate = spec.movement_rate;
            ch.values.reserve(move_n * kinds.size());
            for (SliceKind kind : kinds) {
                const bool still = kind == SliceKind::planted || kind == SliceKind::still_decoy;
                const bool stepped = kind == SliceKind::planted || kind == SliceKind::step_decoy;
                // a late step has variance of about 0.12 scale^2
                double scale = still ? 0.02 + 0.04 * unit(rng) : 0.5 + 1.5 * unit(rng);
                if (kind == SliceKind::step_decoy) scale *= 3.0;
                const auto values = stepped ? step_up(move_n, scale, rng) : other_shape(move_n, scale, kind == SliceKind::normal, rng);
                ch.values.insert(ch.values.end(), values.begin(), values.end());
            }
            group.channel_roles.emplace(ch.channel_id, ChannelRole::movement);
            group.channels.push_back(std::move(ch));
        }

        std::set<std::size_t> loud_slices;
        for (std::size_t p : planted) loud_slices.insert(p + spec.lag);
        Channel speech;
        speech.channel_id = "speech";
        speech.label = "speech";
        speech.sample_rate = spec.speech_rate;
        speech.values.reserve(seconds * per_second);
        const double phase = 2.0 * std::numbers::pi * unit(rng);
        for (std::size_t sec = 0; sec < seconds; ++sec) {
            const auto slice = static_cast<std::size_t>(static_cast<double>(sec) / spec.slice_seconds);
            double energy;
            if (loud_slices.contains(slice)) {
                energy = sec % 2 == 0 ? 8.0 + 2.0 * unit(rng) : 2.0 * unit(rng);
            } else {
                energy = 5.0 + 2.0 * std::sin(2.0 * std::numbers::pi * static_cast<double>(sec) / 97.0 + phase) +
                         0.05 * gauss(rng);
            }
            const double amplitude = std::sqrt(std::max(energy, 0.0) / static_cast<double>(per_second));
            for (std::size_t k = 0; k < per_second; ++k) speech.values.push_back(k % 2 == 0 ? amplitude : -amplitude);
        }
        group.channel_roles.emplace(speech.channel_id, ChannelRole::speech);
        group.channels.push_back(std::move(speech));
        out.groups.push_back(std::move(group));
    }
    return out;
}

void write_recordings_csv(std::ostream& out, const std::vector<RecordingGroup>& groups) {
    out << "recording_id,channel_id,role,sample_rate,t_index,value\n";
    for (const auto& g : groups) {
        for (const auto& ch : g.channels) {
            auto it = g.channel_roles.find(ch.channel_id);
            const std::string role = to_string(it == g.channel_roles.end() ? ChannelRole::other : it->second);
            const std::string prefix = csv::escape(g.recording_id) + "," + csv::escape(ch.channel_id) + "," + role + "," +
                                       csv::format_double(ch.sample_rate) + ",";
            for (std::size_t i = 0; i < ch.values.size(); ++i) {
                out << prefix << i << ',' << csv::format_double(ch.values[i]) << '\n';
            }
        }
    }
}

}  // namespace lexd::synth
