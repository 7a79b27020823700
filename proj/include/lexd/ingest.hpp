#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace lexd {

/// Raised for malformed input data (bad CSV rows, non-finite samples, ...).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ChannelRole { movement, speech, other };

std::string to_string(ChannelRole role);
ChannelRole parse_role(const std::string& text);

struct Channel {
    std::string channel_id;
    std::string label;
    double sample_rate = 1.0;
    std::vector<double> values;

    double duration_seconds() const { return static_cast<double>(values.size()) / sample_rate; }
};

struct RecordingGroup {
    std::string recording_id;
    std::vector<Channel> channels;
    std::map<std::string, ChannelRole> channel_roles;

    const Channel& channel(const std::string& channel_id) const;
    std::vector<const Channel*> channels_with_role(ChannelRole role) const;
};

/// One channel's samples inside a slice.
struct ChannelWindow {
    double sample_rate = 1.0;
    ChannelRole role = ChannelRole::other;
    std::vector<double> values;
};

struct Slice {
    std::string recording_id;
    std::size_t slice_index = 0;
    double start_time = 0.0;
    double duration = 0.0;
    std::map<std::string, ChannelWindow> windows;
};

/// Parses the long-format CSV
/// `recording_id,channel_id,role,sample_rate,t_index,value`.
/// Recordings are returned ordered by recording_id, channels by channel_id.
std::vector<RecordingGroup> load_recordings(std::istream& in);
std::vector<RecordingGroup> load_recordings(const std::filesystem::path& path);

/// Sum of squares over consecutive blocks of `block_seconds`; the trailing
/// partial block is dropped. Output rate is 1 / block_seconds.
Channel resample_energy(const Channel& channel, double block_seconds = 1.0);

/// Cuts a recording into floor(T / duration) consecutive slices, T being the
/// shortest channel duration. Windows are cut per channel by wall-clock time.
std::vector<Slice> slice_recording(const RecordingGroup& group, double duration);

/// Number of samples a window of `seconds` spans at `sample_rate`.
std::size_t samples_for(double seconds, double sample_rate);

}  // namespace lexd
