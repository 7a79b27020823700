#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "lexd/config.hpp"
#include "lexd/discretize.hpp"
#include "lexd/dyncomp.hpp"
#include "lexd/features.hpp"
#include "lexd/ingest.hpp"
#include "lexd/pipeline.hpp"
#include "lexd/sd_engine.hpp"
#include "lexd/synth.hpp"

namespace py = pybind11;
using namespace lexd;

namespace {

PipelineConfig config_from_dict(const std::map<std::string, std::string>& entries) {
    PipelineConfig cfg;
    for (const auto& [key, value] : entries) set_config_value(cfg, key, value);
    validate_config(cfg);
    return cfg;
}

NominalTable table_from_columns(const std::vector<std::string>& attributes,
                                const std::vector<std::vector<std::string>>& columns) {
    if (attributes.size() != columns.size()) throw std::invalid_argument("one column per attribute expected");
    NominalTable table;
    const std::size_t n = columns.empty() ? 0 : columns.front().size();
    for (std::size_t i = 0; i < n; ++i) table.rows.push_back({"py", i});
    table.attributes = attributes;
    for (const auto& col : columns) {
        if (col.size() != n) throw std::invalid_argument("columns differ in length");
        for (const auto& label : col) table.cells.push_back(parse_label(label));
    }
    return table;
}

py::dict subgroup_dict(const SubgroupResult& r) {
    py::dict d;
    d["pattern"] = r.pattern.render();
    d["selectors"] = r.pattern.rendered_selectors();
    d["size"] = r.size;
    d["subgroup_mean"] = r.subgroup_mean;
    d["population_mean"] = r.population_mean;
    d["quality"] = r.quality;
    d["coverage"] = r.coverage;
    return d;
}

py::object optional_value(const FeatureValue& v) {
    return v ? py::object(py::float_(*v)) : py::object(py::none());
}

}  // namespace

PYBIND11_MODULE(_lexd, m) {
    m.doc() = "Local exceptionality detection core";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<StageError>(m, "StageError", PyExc_RuntimeError);

    m.def("load_recordings", [](const std::string& path) {
        py::list out;
        for (const auto& g : load_recordings(std::filesystem::path(path))) {
            py::dict rec;
            rec["recording_id"] = g.recording_id;
            py::list channels;
            for (const auto& ch : g.channels) {
                py::dict c;
                c["channel_id"] = ch.channel_id;
                c["role"] = to_string(g.channel_roles.at(ch.channel_id));
                c["sample_rate"] = ch.sample_rate;
                c["values"] = ch.values;
                channels.append(c);
            }
            rec["channels"] = channels;
            out.append(rec);
        }
        return out;
    }, py::arg("path"));

    m.def("resample_energy", [](const std::vector<double>& values, double sample_rate, double block_seconds) {
        Channel ch;
        ch.sample_rate = sample_rate;
        ch.values = values;
        const auto e = resample_energy(ch, block_seconds);
        return py::make_tuple(e.values, e.sample_rate);
    }, py::arg("values"), py::arg("sample_rate"), py::arg("block_seconds") = 1.0,
       "Per-block sum of squares; returns (values, sample_rate).");

    auto f = m.def_submodule("features", "Per-window feature functions");
    f.def("mean", [](const std::vector<double>& w) { return features::mean(w); });
    f.def("variance", [](const std::vector<double>& w) { return features::variance(w); });
    f.def("standard_deviation", [](const std::vector<double>& w) { return features::standard_deviation(w); });
    f.def("quantile", [](const std::vector<double>& w, double q) { return features::quantile(w, q); });
    f.def("root_mean_square", [](const std::vector<double>& w) { return features::root_mean_square(w); });
    f.def("mean_change", [](const std::vector<double>& w) { return features::mean_change(w); });
    f.def("mean_abs_change", [](const std::vector<double>& w) { return features::mean_abs_change(w); });
    f.def("longest_strike_below_mean", [](const std::vector<double>& w) { return features::longest_strike_below_mean(w); });
    f.def("longest_strike_above_mean", [](const std::vector<double>& w) { return features::longest_strike_above_mean(w); });
    f.def("number_peaks", [](const std::vector<double>& w, std::size_t n) { return features::number_peaks(w, n); });
    f.def("ratio_beyond_r_sigma", [](const std::vector<double>& w, double r) { return features::ratio_beyond_r_sigma(w, r); });
    f.def("binned_entropy", [](const std::vector<double>& w, std::size_t b) { return features::binned_entropy(w, b); });
    f.def("sample_entropy", [](const std::vector<double>& w) { return optional_value(features::sample_entropy(w)); });
    f.def("lempel_ziv_complexity", [](const std::vector<double>& w, std::size_t b) { return features::lempel_ziv_complexity(w, b); });
    f.def("cid_ce", [](const std::vector<double>& w, bool normalize) { return features::cid_ce(w, normalize); });
    f.def("autocorrelation", [](const std::vector<double>& w, std::size_t lag) { return optional_value(features::autocorrelation(w, lag)); });
    f.def("periodogram", [](const std::vector<double>& w) { return features::periodogram(w); });
    f.def("band_power", [](const std::vector<double>& w, double fs, double lo, double hi) { return features::band_power(w, fs, lo, hi); });
    f.def("fourier_entropy", [](const std::vector<double>& w) { return features::fourier_entropy(w); });
    f.def("change_quantiles", [](const std::vector<double>& w, double ql, double qh, bool isabs, const std::string& agg) {
        if (agg != "mean" && agg != "var") throw std::invalid_argument("f_agg must be 'mean' or 'var'");
        return optional_value(features::change_quantiles(w, ql, qh, isabs,
                                                         agg == "mean" ? features::ChangeAggregate::mean : features::ChangeAggregate::var));
    }, py::arg("window"), py::arg("ql"), py::arg("qh"), py::arg("isabs"), py::arg("f_agg"));
    f.def("linear_trend", [](const std::vector<double>& w) {
        const auto t = features::linear_trend(w);
        return py::make_tuple(t.slope, t.intercept, t.r_squared);
    });
    f.def("catalog_families", &catalog_families);

    m.def("fit_bins", [](const std::vector<double>& values) {
        const auto s = fit_bins(values);
        return py::make_tuple(s.e1, s.e2, s.dropped);
    }, py::arg("values"), "Tercile edges (e1, e2, dropped).");
    m.def("apply_bins", [](double e1, double e2, double value) {
        BinScheme s;
        s.e1 = e1;
        s.e2 = e2;
        return to_string(apply_bins(s, value));
    }, py::arg("e1"), py::arg("e2"), py::arg("value"));

    m.def("points_of_return", [](const std::vector<double>& w) { return points_of_return(w); });
    m.def("fluctuation", [](const std::vector<double>& w, double lo, double hi) { return fluctuation(w, {lo, hi}).value; },
          py::arg("window"), py::arg("lo"), py::arg("hi"));
    m.def("distribution", [](const std::vector<double>& w, double lo, double hi) { return distribution(w, {lo, hi}).value; },
          py::arg("window"), py::arg("lo"), py::arg("hi"));
    m.def("dynamic_complexity", [](const std::vector<double>& values, double sample_rate, std::size_t window_m,
                                   std::size_t step, std::optional<std::pair<double, double>> domain) {
        Channel ch;
        ch.sample_rate = sample_rate;
        ch.values = values;
        DynCompConfig cfg;
        cfg.window_m = window_m;
        cfg.step = step;
        if (domain) cfg.domain = ValueDomain{domain->first, domain->second};
        const auto series = dynamic_complexity_series(ch, cfg);
        py::dict d;
        std::vector<double> start, fl, di, dc;
        for (const auto& p : series.points) {
            start.push_back(p.start_seconds);
            fl.push_back(p.fluctuation);
            di.push_back(p.distribution);
            dc.push_back(p.complexity);
        }
        d["start_seconds"] = start;
        d["F"] = fl;
        d["D"] = di;
        d["complexity"] = dc;
        d["domain"] = py::make_tuple(series.domain.lo, series.domain.hi);
        d["degenerate"] = series.degenerate;
        return d;
    }, py::arg("values"), py::arg("sample_rate"), py::arg("window_m") = 30, py::arg("step") = 1,
       py::arg("domain") = py::none());

    m.def("quality", [](std::size_t n, double tp, double t0, double a, const std::string& direction) {
        return quality(n, tp, t0, QualitySpec{a}, parse_direction(direction));
    }, py::arg("n"), py::arg("subgroup_mean"), py::arg("population_mean"), py::arg("a") = 0.5,
       py::arg("direction") = "high");

    m.def("discover", [](const std::vector<std::string>& attributes, const std::vector<std::vector<std::string>>& columns,
                         const std::vector<double>& targets, std::size_t min_size, std::size_t max_depth, std::size_t top_k,
                         double a, bool pruning, const std::string& direction, unsigned threads) {
        const auto table = table_from_columns(attributes, columns);
        SearchConfig cfg;
        cfg.min_size = min_size;
        cfg.max_depth = max_depth;
        cfg.top_k = top_k;
        cfg.quality.a = a;
        cfg.pruning = pruning;
        cfg.direction = parse_direction(direction);
        cfg.threads = threads;
        std::vector<SubgroupResult> found;
        {
            py::gil_scoped_release release;
            found = discover(table, targets, cfg);
        }
        py::list out;
        for (const auto& r : found) out.append(subgroup_dict(r));
        return out;
    }, py::arg("attributes"), py::arg("columns"), py::arg("targets"), py::arg("min_size") = 20,
       py::arg("max_depth") = 3, py::arg("top_k") = 20, py::arg("a") = 0.5, py::arg("pruning") = true,
       py::arg("direction") = "high", py::arg("threads") = 1,
       "Top-k subgroups over nominal columns (labels low/medium/high).");

    m.def("config_keys", &config_keys);
    m.def("render_config", [](const std::map<std::string, std::string>& entries) {
        return render_config(config_from_dict(entries));
    }, py::arg("entries"));
    m.def("run_pipeline", [](const std::map<std::string, std::string>& entries) {
        const auto cfg = config_from_dict(entries);
        py::gil_scoped_release release;
        return to_document(run_pipeline(cfg));
    }, py::arg("config"), "Runs the full pipeline; returns the JSON result document.");

    m.def("write_planted_corpus", [](const std::string& path, std::uint64_t seed, std::size_t recordings,
                                     std::size_t slices) {
        synth::PlantedCorpusSpec spec;
        spec.seed = seed;
        spec.recordings = recordings;
        spec.slices_per_recording = slices;
        const auto corpus = synth::make_planted_corpus(spec);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
        synth::write_recordings_csv(out, corpus.groups);
        py::list planted;
        for (const auto& k : corpus.planted) planted.append(py::make_tuple(k.recording_id, k.slice_index));
        return planted;
    }, py::arg("path"), py::arg("seed") = 20240517, py::arg("recordings") = 10, py::arg("slices") = 35,
       "Writes the synthetic corpus; returns the planted (recording_id, slice_index) keys.");
}
