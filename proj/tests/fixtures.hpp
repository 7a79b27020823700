#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "lexd/config.hpp"
#include "lexd/synth.hpp"

namespace fixture {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("lexd_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline lexd::synth::PlantedCorpus write_corpus(const std::filesystem::path& file,
                                               const lexd::synth::PlantedCorpusSpec& spec = {}) {
    auto corpus = lexd::synth::make_planted_corpus(spec);
    std::ofstream out(file);
    lexd::synth::write_recordings_csv(out, corpus.groups);
    return corpus;
}

/// Short feature list that keeps the planted corpus quick to mine.
inline const std::vector<std::string>& small_features() {
    static const std::vector<std::string> f{"mean",          "variance",     "longest_strike_below_mean",
                                            "longest_strike_above_mean", "number_peaks", "autocorrelation",
                                            "binned_entropy", "lempel_ziv_complexity"};
    return f;
}

inline lexd::PipelineConfig small_config(const std::filesystem::path& input) {
    lexd::PipelineConfig cfg;
    cfg.input = input.string();
    cfg.features = small_features();
    return cfg;
}

}  // namespace fixture
