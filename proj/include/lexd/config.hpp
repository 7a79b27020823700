#pragma once

#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lexd/dyncomp.hpp"
#include "lexd/features.hpp"
#include "lexd/ingest.hpp"
#include "lexd/sd_engine.hpp"

namespace lexd {

/// Invalid configuration (unknown key, unparsable or out-of-range value).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PipelineConfig {
    std::string input;
    double slice_seconds = 60.0;
    double energy_block_seconds = 1.0;
    bool resample_target = true;
    std::vector<std::string> features;  // catalog families; empty selects all
    ChannelRole feature_role = ChannelRole::movement;
    std::vector<Aggregator> aggregators{Aggregator::mean, Aggregator::std};
    ChannelRole target_role = ChannelRole::speech;
    TargetKind target_kind = TargetKind::mean_z;
    DynCompConfig dyncomp;
    std::vector<std::size_t> lags{0, 1};
    SearchConfig search;
};

/// Keys accepted by set_config_value / parse_config, in canonical order.
const std::vector<std::string>& config_keys();

/// Sets one key from its text form. Lists use `[a, b]` or `a, b`.
void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value);

/// `key = value` lines; `#` starts a comment. Unknown keys are rejected.
PipelineConfig parse_config(std::istream& in, PipelineConfig base = {});
PipelineConfig load_config(const std::string& path, PipelineConfig base = {});

/// Canonical key -> text map. `threads` and `input` are runtime settings and
/// are only included when `include_runtime` is set.
std::map<std::string, std::string> config_entries(const PipelineConfig& cfg, bool include_runtime = true);
std::string render_config(const PipelineConfig& cfg, bool include_runtime = true);

/// Checks every stage precondition that does not need the input data.
void validate_config(const PipelineConfig& cfg);

}  // namespace lexd
