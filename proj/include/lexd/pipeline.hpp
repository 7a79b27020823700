#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lexd/config.hpp"
#include "lexd/discretize.hpp"
#include "lexd/dyncomp.hpp"
#include "lexd/features.hpp"
#include "lexd/ingest.hpp"
#include "lexd/sd_engine.hpp"

namespace lexd {

/// A pipeline stage failed; what() is `<stage>: <cause>`.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& cause)
        : std::runtime_error(stage + ": " + cause), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct PopulationStats {
    std::size_t instance_count = 0;
    double mean = 0.0;  // t_0
    double std = 0.0;

    bool operator==(const PopulationStats&) const = default;
};

struct LagResult {
    std::size_t lag = 0;
    PopulationStats population;
    std::vector<SubgroupResult> subgroups;
    std::vector<RowKey> instances;  // coverage indices refer to this list
    /// Attributes used by any subgroup, and per subgroup the mean label
    /// ordinal (low 0, medium 1, high 2) of each over its coverage.
    std::vector<std::string> selector_attributes;
    std::vector<std::vector<double>> selector_profiles;

    bool operator==(const LagResult&) const = default;
};

struct RunResult {
    std::string run_id;
    std::string input_digest;
    std::map<std::string, std::string> config;  // canonical entries, runtime keys excluded
    std::vector<LagResult> lags;
    std::vector<std::string> warnings;

    const LagResult* find_lag(std::size_t lag) const;
    bool operator==(const RunResult&) const = default;
};

struct SlicedCorpus {
    std::vector<RecordingGroup> groups;
    std::vector<Slice> slices;
    std::vector<SliceLayout> layouts;
    std::string input_digest;
};

std::string sha256_hex(const std::string& bytes);
std::string file_digest(const std::filesystem::path& path);
/// Content hash of the canonical config (runtime keys excluded) and input digest.
std::string compute_run_id(const PipelineConfig& cfg, const std::string& input_digest);

// Individual stages; each throws StageError naming itself.
SlicedCorpus ingest_stage(const PipelineConfig& cfg);
FeatureMatrix features_stage(const PipelineConfig& cfg, const SlicedCorpus& corpus);
std::vector<DcSeries> dyncomp_stage(const PipelineConfig& cfg, const SlicedCorpus& corpus,
                                    std::vector<std::string>& warnings);

/// ingest -> features -> discretize -> target -> lag -> discover, per lag.
RunResult run_pipeline(const PipelineConfig& cfg);

/// Structured result document (JSON). Serialization is deterministic and
/// parse_document(to_document(r)) == r.
std::string to_document(const RunResult& result);
RunResult parse_document(const std::string& text);

/// `pattern,size,subgroup_mean,population_mean,quality`
std::string subgroups_csv(const LagResult& lag);

enum class ExportFormat { document, csv };

/// Writes `result.json` or `subgroups_lag<L>.csv` files into `dir`;
/// returns the written paths.
std::vector<std::filesystem::path> export_run(const RunResult& result, ExportFormat format,
                                              const std::filesystem::path& dir);

}  // namespace lexd
