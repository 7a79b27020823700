#include "lexd/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"
#include "lexd/csv.hpp"

namespace lexd {

using json = nlohmann::json;

const LagResult* RunResult::find_lag(std::size_t lag) const {
    for (const auto& l : lags) {
        if (l.lag == lag) return &l;
    }
    return nullptr;
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return out.str();
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

std::string compute_run_id(const PipelineConfig& cfg, const std::string& input_digest) {
    return sha256_hex(render_config(cfg, false) + "input_digest = " + input_digest + "\n").substr(0, 16);
}

namespace {

template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

}  // namespace

SlicedCorpus ingest_stage(const PipelineConfig& cfg) {
    return stage("ingest", [&] {
        SlicedCorpus corpus;
        corpus.input_digest = file_digest(cfg.input);
        corpus.groups = load_recordings(std::filesystem::path(cfg.input));
        if (corpus.groups.empty()) throw InputError("input contains no recordings");
        for (const auto& g : corpus.groups) {
            auto slices = slice_recording(g, cfg.slice_seconds);
            corpus.layouts.push_back({g.recording_id, slices.size(), cfg.slice_seconds});
            for (auto& s : slices) corpus.slices.push_back(std::move(s));
        }
        return corpus;
    });
}

FeatureMatrix features_stage(const PipelineConfig& cfg, const SlicedCorpus& corpus) {
    return stage("features", [&] {
        for (const auto& g : corpus.groups) {
            if (g.channels_with_role(cfg.feature_role).empty()) {
                throw InputError("recording '" + g.recording_id + "' has no " + to_string(cfg.feature_role) + " channel");
            }
        }
        return extract_feature_matrix(corpus.slices, select_catalog(cfg.features), cfg.feature_role, cfg.aggregators,
                                      cfg.search.threads);
    });
}

std::vector<DcSeries> dyncomp_stage(const PipelineConfig& cfg, const SlicedCorpus& corpus,
                                    std::vector<std::string>& warnings) {
    return stage("target", [&] {
        std::vector<DcSeries> out;
        for (const auto& g : corpus.groups) {
            const auto channels = g.channels_with_role(cfg.target_role);
            if (channels.size() != 1) {
                throw InputError("recording '" + g.recording_id + "' needs exactly one " + to_string(cfg.target_role) +
                                 " channel, found " + std::to_string(channels.size()));
            }
            const Channel source = cfg.resample_target ? resample_energy(*channels.front(), cfg.energy_block_seconds)
                                                       : *channels.front();
            auto series = dynamic_complexity_series(source, cfg.dyncomp, g.recording_id);
            if (series.degenerate) {
                warnings.push_back("recording '" + g.recording_id +
                                   "': target channel has a zero-width domain; dynamic complexity is 0");
            }
            out.push_back(std::move(series));
        }
        return out;
    });
}

RunResult run_pipeline(const PipelineConfig& cfg) {
    stage("config", [&] {
        validate_config(cfg);
        return 0;
    });
    RunResult result;
    const SlicedCorpus corpus = ingest_stage(cfg);
    result.input_digest = corpus.input_digest;
    result.run_id = compute_run_id(cfg, corpus.input_digest);
    result.config = config_entries(cfg, false);

    const FeatureMatrix matrix = features_stage(cfg, corpus);
    const Discretization disc = stage("discretize", [&] { return discretize(matrix); });
    result.warnings.insert(result.warnings.end(), disc.warnings.begin(), disc.warnings.end());
    if (disc.table.attribute_count() == 0) throw StageError("discretize", "every feature column is constant");

    const auto series = dyncomp_stage(cfg, corpus, result.warnings);
    const TargetVector target = stage("target", [&] { return slice_targets(series, corpus.layouts, cfg.target_kind); });
    result.warnings.insert(result.warnings.end(), target.warnings.begin(), target.warnings.end());

    for (std::size_t lag : cfg.lags) {
        const LaggedInstances inst = stage("lag", [&] { return apply_lag(disc.table, target, lag); });
        LagResult lr;
        lr.lag = lag;
        lr.instances = inst.table.rows;
        lr.population.instance_count = inst.targets.size();
        if (!inst.targets.empty()) {
            lr.population.mean = features::mean(inst.targets);
            lr.population.std = features::standard_deviation(inst.targets);
        }
        lr.subgroups = stage("discover", [&] { return discover(inst.table, inst.targets, cfg.search); });

        std::set<std::string> attrs;
        for (const auto& sg : lr.subgroups) {
            for (const auto& sel : sg.pattern.selectors()) attrs.insert(sel.attribute);
        }
        lr.selector_attributes.assign(attrs.begin(), attrs.end());
        for (const auto& sg : lr.subgroups) {
            std::vector<double> profile;
            for (const auto& attr : lr.selector_attributes) {
                const std::size_t col = *inst.table.find_attribute(attr);
                double sum = 0.0;
                for (std::size_t r : sg.coverage) sum += static_cast<double>(inst.table.at(r, col));
                profile.push_back(sg.coverage.empty() ? 0.0 : sum / static_cast<double>(sg.coverage.size()));
            }
            lr.selector_profiles.push_back(std::move(profile));
        }
        result.lags.push_back(std::move(lr));
    }
    return result;
}

namespace {

json subgroup_to_json(const SubgroupResult& sg) {
    return json{{"pattern", sg.pattern.render()},
                {"size", sg.size},
                {"subgroup_mean", sg.subgroup_mean},
                {"population_mean", sg.population_mean},
                {"quality", sg.quality},
                {"coverage", sg.coverage}};
}

SubgroupResult subgroup_from_json(const json& j) {
    SubgroupResult sg;
    sg.pattern = Pattern::parse(j.at("pattern").get<std::string>());
    sg.size = j.at("size").get<std::size_t>();
    sg.subgroup_mean = j.at("subgroup_mean").get<double>();
    sg.population_mean = j.at("population_mean").get<double>();
    sg.quality = j.at("quality").get<double>();
    sg.coverage = j.at("coverage").get<std::vector<std::size_t>>();
    return sg;
}

}  // namespace

std::string to_document(const RunResult& result) {
    json lags = json::array();
    for (const auto& l : result.lags) {
        json subgroups = json::array();
        for (const auto& sg : l.subgroups) subgroups.push_back(subgroup_to_json(sg));
        json instances = json::array();
        for (const auto& k : l.instances) instances.push_back(json::array({k.recording_id, k.slice_index}));
        lags.push_back(json{{"lag", l.lag},
                            {"population",
                             {{"instance_count", l.population.instance_count},
                              {"mean", l.population.mean},
                              {"std", l.population.std}}},
                            {"subgroups", std::move(subgroups)},
                            {"instances", std::move(instances)},
                            {"selector_attributes", l.selector_attributes},
                            {"selector_profiles", l.selector_profiles}});
    }
    json doc{{"run_id", result.run_id},
             {"input_digest", result.input_digest},
             {"config", result.config},
             {"lags", std::move(lags)},
             {"warnings", result.warnings}};
    return doc.dump(2) + "\n";
}

RunResult parse_document(const std::string& text) {
    const json doc = json::parse(text);
    RunResult r;
    r.run_id = doc.at("run_id").get<std::string>();
    r.input_digest = doc.at("input_digest").get<std::string>();
    r.config = doc.at("config").get<std::map<std::string, std::string>>();
    r.warnings = doc.at("warnings").get<std::vector<std::string>>();
    for (const auto& jl : doc.at("lags")) {
        LagResult l;
        l.lag = jl.at("lag").get<std::size_t>();
        const auto& pop = jl.at("population");
        l.population.instance_count = pop.at("instance_count").get<std::size_t>();
        l.population.mean = pop.at("mean").get<double>();
        l.population.std = pop.at("std").get<double>();
        for (const auto& js : jl.at("subgroups")) l.subgroups.push_back(subgroup_from_json(js));
        for (const auto& ji : jl.at("instances")) {
            l.instances.push_back({ji.at(0).get<std::string>(), ji.at(1).get<std::size_t>()});
        }
        l.selector_attributes = jl.at("selector_attributes").get<std::vector<std::string>>();
        l.selector_profiles = jl.at("selector_profiles").get<std::vector<std::vector<double>>>();
        r.lags.push_back(std::move(l));
    }
    return r;
}

std::string subgroups_csv(const LagResult& lag) {
    std::string out = "pattern,size,subgroup_mean,population_mean,quality\n";
    for (const auto& sg : lag.subgroups) {
        out += csv::join({sg.pattern.render(), std::to_string(sg.size), csv::format_double(sg.subgroup_mean),
                          csv::format_double(sg.population_mean), csv::format_double(sg.quality)});
        out += '\n';
    }
    return out;
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace

std::vector<std::filesystem::path> export_run(const RunResult& result, ExportFormat format,
                                              const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
    std::vector<std::filesystem::path> written;
    if (format == ExportFormat::document) {
        written.push_back(dir / "result.json");
        write_file(written.back(), to_document(result));
    } else {
        for (const auto& l : result.lags) {
            written.push_back(dir / ("subgroups_lag" + std::to_string(l.lag) + ".csv"));
            write_file(written.back(), subgroups_csv(l));
        }
    }
    return written;
}

}  // namespace lexd
