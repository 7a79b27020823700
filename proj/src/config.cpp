#include "lexd/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lexd/csv.hpp"

namespace lexd {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& key, std::string text) {
    text = trim(text);
    if (!text.empty() && text.front() == '[') {
        if (text.back() != ']') throw ConfigError(key + ": unterminated list '" + text + "'");
        text = text.substr(1, text.size() - 2);
    }
    std::vector<std::string> items;
    if (trim(text).empty()) return items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.size() >= 2 && item.front() == '"' && item.back() == '"') item = item.substr(1, item.size() - 2);
        if (item.empty()) throw ConfigError(key + ": empty list element");
        items.push_back(item);
    }
    return items;
}

double as_double(const std::string& key, const std::string& text) {
    const auto v = csv::parse_double(trim(text));
    if (!v || !std::isfinite(*v)) throw ConfigError(key + ": expected a number, got '" + text + "'");
    return *v;
}

std::size_t as_count(const std::string& key, const std::string& text) {
    const auto v = csv::parse_int(trim(text));
    if (!v || *v < 0) throw ConfigError(key + ": expected a non-negative integer, got '" + text + "'");
    return static_cast<std::size_t>(*v);
}

bool as_bool(const std::string& key, const std::string& text) {
    std::string t = trim(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "true" || t == "1" || t == "on" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "off" || t == "no") return false;
    throw ConfigError(key + ": expected a boolean, got '" + text + "'");
}

template <typename Fn>
auto wrap(const std::string& key, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

std::string join_list(const std::vector<std::string>& items) {
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += items[i];
    }
    return out + "]";
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{
        "input",       "slice_seconds", "energy_block_seconds", "resample_target", "features", "feature_role",
        "aggregators", "target_role",   "target_kind",          "dc_window_m",     "dc_step",  "dc_domain",
        "lags",        "min_size",      "max_depth",            "top_k",           "quality_a", "pruning",
        "direction",   "threads"};
    return keys;
}

void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "input") {
        cfg.input = trim(value);
    } else if (key == "slice_seconds") {
        cfg.slice_seconds = as_double(key, value);
    } else if (key == "energy_block_seconds") {
        cfg.energy_block_seconds = as_double(key, value);
    } else if (key == "resample_target") {
        cfg.resample_target = as_bool(key, value);
    } else if (key == "features") {
        auto items = split_list(key, value);
        if (items.size() == 1 && items[0] == "all") items.clear();
        cfg.features = std::move(items);
    } else if (key == "feature_role") {
        cfg.feature_role = wrap(key, [&] { return parse_role(trim(value)); });
    } else if (key == "aggregators") {
        std::vector<Aggregator> aggs;
        for (const auto& item : split_list(key, value)) aggs.push_back(wrap(key, [&] { return parse_aggregator(item); }));
        cfg.aggregators = std::move(aggs);
    } else if (key == "target_role") {
        cfg.target_role = wrap(key, [&] { return parse_role(trim(value)); });
    } else if (key == "target_kind") {
        cfg.target_kind = wrap(key, [&] { return parse_target_kind(trim(value)); });
    } else if (key == "dc_window_m") {
        cfg.dyncomp.window_m = as_count(key, value);
    } else if (key == "dc_step") {
        cfg.dyncomp.step = as_count(key, value);
    } else if (key == "dc_domain") {
        if (trim(value) == "auto") {
            cfg.dyncomp.domain.reset();
        } else {
            const auto items = split_list(key, value);
            if (items.size() != 2) throw ConfigError(key + ": expected 'auto' or [lo, hi]");
            cfg.dyncomp.domain = ValueDomain{as_double(key, items[0]), as_double(key, items[1])};
        }
    } else if (key == "lags") {
        std::vector<std::size_t> lags;
        for (const auto& item : split_list(key, value)) lags.push_back(as_count(key, item));
        cfg.lags = std::move(lags);
    } else if (key == "min_size") {
        cfg.search.min_size = as_count(key, value);
    } else if (key == "max_depth") {
        cfg.search.max_depth = as_count(key, value);
    } else if (key == "top_k") {
        cfg.search.top_k = as_count(key, value);
    } else if (key == "quality_a") {
        cfg.search.quality.a = as_double(key, value);
    } else if (key == "pruning") {
        cfg.search.pruning = as_bool(key, value);
    } else if (key == "direction") {
        cfg.search.direction = wrap(key, [&] { return parse_direction(trim(value)); });
    } else if (key == "threads") {
        cfg.search.threads = static_cast<unsigned>(as_count(key, value));
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

PipelineConfig parse_config(std::istream& in, PipelineConfig base) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        set_config_value(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return base;
}

PipelineConfig load_config(const std::string& path, PipelineConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(in, std::move(base));
}

std::map<std::string, std::string> config_entries(const PipelineConfig& cfg, bool include_runtime) {
    std::map<std::string, std::string> e;
    if (include_runtime) {
        e["input"] = cfg.input;
        e["threads"] = std::to_string(cfg.search.threads);
    }
    e["slice_seconds"] = csv::format_double(cfg.slice_seconds);
    e["energy_block_seconds"] = csv::format_double(cfg.energy_block_seconds);
    e["resample_target"] = cfg.resample_target ? "true" : "false";
    e["features"] = cfg.features.empty() ? "all" : join_list(cfg.features);
    e["feature_role"] = to_string(cfg.feature_role);
    std::vector<std::string> aggs;
    for (auto a : cfg.aggregators) aggs.push_back(to_string(a));
    e["aggregators"] = join_list(aggs);
    e["target_role"] = to_string(cfg.target_role);
    e["target_kind"] = to_string(cfg.target_kind);
    e["dc_window_m"] = std::to_string(cfg.dyncomp.window_m);
    e["dc_step"] = std::to_string(cfg.dyncomp.step);
    e["dc_domain"] = cfg.dyncomp.domain ? join_list({csv::format_double(cfg.dyncomp.domain->lo),
                                                     csv::format_double(cfg.dyncomp.domain->hi)})
                                        : "auto";
    std::vector<std::string> lags;
    for (auto l : cfg.lags) lags.push_back(std::to_string(l));
    e["lags"] = join_list(lags);
    e["min_size"] = std::to_string(cfg.search.min_size);
    e["max_depth"] = std::to_string(cfg.search.max_depth);
    e["top_k"] = std::to_string(cfg.search.top_k);
    e["quality_a"] = csv::format_double(cfg.search.quality.a);
    e["pruning"] = cfg.search.pruning ? "true" : "false";
    e["direction"] = to_string(cfg.search.direction);
    return e;
}

std::string render_config(const PipelineConfig& cfg, bool include_runtime) {
    const auto entries = config_entries(cfg, include_runtime);
    std::string out;
    for (const auto& key : config_keys()) {
        auto it = entries.find(key);
        if (it != entries.end()) out += key + " = " + it->second + "\n";
    }
    return out;
}

void validate_config(const PipelineConfig& cfg) {
    if (cfg.input.empty()) throw ConfigError("input: path required");
    if (!(cfg.slice_seconds > 0.0)) throw ConfigError("slice_seconds: must be > 0");
    if (!(cfg.energy_block_seconds > 0.0)) throw ConfigError("energy_block_seconds: must be > 0");
    if (cfg.aggregators.empty()) throw ConfigError("aggregators: at least one required");
    wrap("features", [&] { return select_catalog(cfg.features); });
    if (cfg.dyncomp.window_m < 4) throw ConfigError("dc_window_m: must be >= 4");
    if (cfg.dyncomp.step < 1) throw ConfigError("dc_step: must be >= 1");
    if (cfg.dyncomp.domain && !(cfg.dyncomp.domain->lo < cfg.dyncomp.domain->hi)) {
        throw ConfigError("dc_domain: lo must be < hi");
    }
    if (cfg.lags.empty()) throw ConfigError("lags: at least one lag required");
    {
        auto sorted = cfg.lags;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw ConfigError("lags: duplicate lag");
    }
    if (cfg.search.min_size < 1) throw ConfigError("min_size: must be >= 1");
    if (cfg.search.max_depth < 1) throw ConfigError("max_depth: must be >= 1");
    if (cfg.search.top_k < 1) throw ConfigError("top_k: must be >= 1");
    if (!(cfg.search.quality.a >= 0.0 && cfg.search.quality.a <= 1.0)) throw ConfigError("quality_a: must lie in [0, 1]");
    if (cfg.search.threads < 1) throw ConfigError("threads: must be >= 1");
}

}  // namespace lexd
