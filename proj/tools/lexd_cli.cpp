#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "lexd/config.hpp"
#include "lexd/csv.hpp"
#include "lexd/pipeline.hpp"
#include "lexd/service.hpp"
#include "lexd/synth.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

struct ConfigFlags {
    std::string config_file;
    std::map<std::string, std::string> overrides;
};

void add_config_flags(CLI::App* app, ConfigFlags& flags) {
    app->add_option("--config", flags.config_file, "key = value config file; flags override it");
    for (const auto& key : lexd::config_keys()) {
        app->add_option("--" + key, flags.overrides[key], "pipeline setting '" + key + "'");
    }
}

lexd::PipelineConfig resolve(const CLI::App* app, const ConfigFlags& flags) {
    lexd::PipelineConfig cfg;
    if (!flags.config_file.empty()) cfg = lexd::load_config(flags.config_file);
    for (const auto& [key, value] : flags.overrides) {
        if (app->count("--" + key) > 0) lexd::set_config_value(cfg, key, value);
    }
    lexd::validate_config(cfg);
    return cfg;
}

/// Opens `path` for writing, "-" meaning stdout.
class Output {
public:
    explicit Output(const std::string& path) {
        if (path != "-") {
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) throw std::runtime_error("cannot write '" + path + "'");
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

int run_extract(const CLI::App* app, const ConfigFlags& flags, const std::string& out, const std::string& nominal_out) {
    const auto cfg = resolve(app, flags);
    const auto corpus = lexd::ingest_stage(cfg);
    const auto matrix = lexd::features_stage(cfg, corpus);
    Output o(out);
    lexd::write_feature_csv(o.stream(), matrix);
    if (!nominal_out.empty()) {
        const auto disc = lexd::discretize(matrix);
        for (const auto& w : disc.warnings) std::cerr << "warning: " << w << '\n';
        Output n(nominal_out);
        lexd::write_nominal_csv(n.stream(), disc.table);
    }
    return kOk;
}

int run_target(const CLI::App* app, const ConfigFlags& flags, const std::string& out, const std::string& targets_out) {
    const auto cfg = resolve(app, flags);
    const auto corpus = lexd::ingest_stage(cfg);
    std::vector<std::string> warnings;
    const auto series = lexd::dyncomp_stage(cfg, corpus, warnings);
    Output o(out);
    lexd::write_dc_csv(o.stream(), series);
    if (!targets_out.empty()) {
        lexd::TargetVector target;
        try {
            target = lexd::slice_targets(series, corpus.layouts, cfg.target_kind);
        } catch (const std::exception& e) {
            throw lexd::StageError("target", e.what());
        }
        warnings.insert(warnings.end(), target.warnings.begin(), target.warnings.end());
        Output t(targets_out);
        t.stream() << "recording_id,slice_index,value\n";
        for (std::size_t i = 0; i < target.rows.size(); ++i) {
            t.stream() << lexd::csv::join({target.rows[i].recording_id, std::to_string(target.rows[i].slice_index),
                                           lexd::csv::format_double(target.values[i])})
                       << '\n';
        }
    }
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    return kOk;
}

int run_discover(const CLI::App* app, const ConfigFlags& flags, const std::string& out_dir) {
    const auto cfg = resolve(app, flags);
    const auto result = lexd::run_pipeline(cfg);
    lexd::export_run(result, lexd::ExportFormat::document, out_dir);
    lexd::export_run(result, lexd::ExportFormat::csv, out_dir);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "run " << result.run_id << " -> " << out_dir << '\n';
    for (const auto& l : result.lags) {
        std::cout << "lag " << l.lag << ": " << l.population.instance_count << " instances, t0 = " << l.population.mean
                  << ", " << l.subgroups.size() << " subgroups\n";
        std::size_t rank = 1;
        for (const auto& sg : l.subgroups) {
            if (rank > 5) break;
            std::cout << "  " << rank++ << ". q=" << sg.quality << " n=" << sg.size << " mean=" << sg.subgroup_mean
                      << "  " << sg.pattern.render() << '\n';
        }
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local exceptionality detection on multi-channel time series"};
    app.require_subcommand(1);

    ConfigFlags extract_flags;
    std::string extract_out = "-";
    std::string nominal_out;
    auto* extract = app.add_subcommand("extract", "ingest and feature extraction -> feature CSV");
    add_config_flags(extract, extract_flags);
    extract->add_option("--out", extract_out, "feature matrix CSV ('-' for stdout)");
    extract->add_option("--nominal-out", nominal_out, "also write the discretized table");

    ConfigFlags target_flags;
    std::string target_out = "-";
    std::string targets_out;
    auto* target = app.add_subcommand("target", "dynamic complexity series -> CSV");
    add_config_flags(target, target_flags);
    target->add_option("--out", target_out, "dc series CSV ('-' for stdout)");
    target->add_option("--targets-out", targets_out, "also write per-slice target values");

    ConfigFlags discover_flags;
    std::string out_dir = "lexd_out";
    auto* disc = app.add_subcommand("discover", "full pipeline -> result document and subgroup CSVs");
    add_config_flags(disc, discover_flags);
    disc->add_option("--out-dir", out_dir, "export directory");

    int port = 8080;
    std::string state_dir;
    std::string host = "127.0.0.1";
    auto* serve = app.add_subcommand("serve", "HTTP API for the explorer");
    serve->add_option("--port", port, "listen port")->check(CLI::Range(0, 65535));
    serve->add_option("--state", state_dir, "run store directory")->required();
    serve->add_option("--host", host, "listen address");

    lexd::synth::PlantedCorpusSpec synth_spec;
    std::string synth_out = "-";
    auto* synth = app.add_subcommand("synth", "write a synthetic corpus with a planted lag-1 pattern");
    synth->add_option("--out", synth_out, "CSV path ('-' for stdout)");
    synth->add_option("--seed", synth_spec.seed, "random seed");
    synth->add_option("--recordings", synth_spec.recordings, "number of recordings");
    synth->add_option("--slices", synth_spec.slices_per_recording, "slices per recording");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kValidation;
    }

    try {
        if (*extract) return run_extract(extract, extract_flags, extract_out, nominal_out);
        if (*target) return run_target(target, target_flags, target_out, targets_out);
        if (*disc) return run_discover(disc, discover_flags, out_dir);
        if (*serve) {
            std::cerr << "serving on http://" << host << ':' << port << " (state: " << state_dir << ")\n";
            lexd::serve(state_dir, port, host);
            return kOk;
        }
        if (*synth) {
            Output o(synth_out);
            lexd::synth::write_recordings_csv(o.stream(), lexd::synth::make_planted_corpus(synth_spec).groups);
            return kOk;
        }
    } catch (const lexd::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kOk;
}
