#include "lexd/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <stdexcept>

#include "lexd/csv.hpp"
#include "lexd/parallel.hpp"

namespace lexd {
namespace features {

double mean(Window w) {
    if (w.empty()) return 0.0;
    return std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
}

double variance(Window w) {
    if (w.empty()) return 0.0;
    const double mu = mean(w);
    double acc = 0.0;
    for (double x : w) acc += (x - mu) * (x - mu);
    return acc / static_cast<double>(w.size());
}

double standard_deviation(Window w) { return std::sqrt(variance(w)); }

double quantile(Window w, double q) {
    if (w.empty()) return 0.0;
    std::vector<double> sorted(w.begin(), w.end());
    std::sort(sorted.begin(), sorted.end());
    const double h = static_cast<double>(sorted.size() - 1) * std::clamp(q, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double root_mean_square(Window w) {
    if (w.empty()) return 0.0;
    double acc = 0.0;
    for (double x : w) acc += x * x;
    return std::sqrt(acc / static_cast<double>(w.size()));
}

double mean_change(Window w) {
    if (w.size() < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 1; i < w.size(); ++i) acc += w[i] - w[i - 1];
    return acc / static_cast<double>(w.size() - 1);
}

double mean_abs_change(Window w) {
    if (w.size() < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 1; i < w.size(); ++i) acc += std::abs(w[i] - w[i - 1]);
    return acc / static_cast<double>(w.size() - 1);
}

namespace {

template <typename Pred>
std::size_t longest_run(Window w, Pred pred) {
    std::size_t best = 0;
    std::size_t run = 0;
    for (double x : w) {
        run = pred(x) ? run + 1 : 0;
        best = std::max(best, run);
    }
    return best;
}

}  // namespace

std::size_t longest_strike_below_mean(Window w) {
    const double mu = mean(w);
    return longest_run(w, [mu](double x) { return x < mu; });
}

std::size_t longest_strike_above_mean(Window w) {
    const double mu = mean(w);
    return longest_run(w, [mu](double x) { return x > mu; });
}

std::size_t number_peaks(Window w, std::size_t support) {
    if (support == 0 || w.size() < 2 * support + 1) return 0;
    std::size_t count = 0;
    for (std::size_t i = support; i + support < w.size(); ++i) {
        bool peak = true;
        for (std::size_t j = 1; j <= support && peak; ++j) {
            peak = w[i] > w[i - j] && w[i] > w[i + j];
        }
        if (peak) ++count;
    }
    return count;
}

double ratio_beyond_r_sigma(Window w, double r) {
    if (w.empty()) return 0.0;
    const double sd = standard_deviation(w);
    if (sd == 0.0) return 0.0;
    const double mu = mean(w);
    const auto beyond = std::count_if(w.begin(), w.end(), [&](double x) { return std::abs(x - mu) > r * sd; });
    return static_cast<double>(beyond) / static_cast<double>(w.size());
}

std::vector<int> quantize(Window w, std::size_t bins) {
    std::vector<int> out(w.size(), 0);
    if (w.empty() || bins == 0) return out;
    const auto [lo_it, hi_it] = std::minmax_element(w.begin(), w.end());
    const double lo = *lo_it;
    const double width = (*hi_it - lo) / static_cast<double>(bins);
    if (!(width > 0.0)) return out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const auto b = static_cast<std::size_t>(std::floor((w[i] - lo) / width));
        out[i] = static_cast<int>(std::min(b, bins - 1));
    }
    return out;
}

double binned_entropy(Window w, std::size_t max_bins) {
    if (w.empty() || max_bins == 0) return 0.0;
    const auto symbols = quantize(w, max_bins);
    std::vector<std::size_t> counts(max_bins, 0);
    for (int s : symbols) ++counts[static_cast<std::size_t>(s)];
    double h = 0.0;
    const double n = static_cast<double>(w.size());
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log(p);
    }
    return h;
}

FeatureValue sample_entropy(Window w, std::size_t m, double r_frac) {
    const std::size_t n = w.size();
    if (m == 0 || n <= m + 1) return std::nullopt;
    const double tol = r_frac * standard_deviation(w);
    const std::size_t templates = n - m;
    std::size_t b = 0;
    std::size_t a = 0;
    for (std::size_t i = 0; i < templates; ++i) {
        for (std::size_t j = i + 1; j < templates; ++j) {
            bool match = true;
            for (std::size_t k = 0; k < m && match; ++k) {
                match = std::abs(w[i + k] - w[j + k]) <= tol;
            }
            if (!match) continue;
            ++b;
            if (std::abs(w[i + m] - w[j + m]) <= tol) ++a;
        }
    }
    if (a == 0 || b == 0) return std::nullopt;
    return -std::log(static_cast<double>(a) / static_cast<double>(b));
}

std::size_t lz76_phrase_count(std::span<const int> s) {
    const std::size_t n = s.size();
    if (n == 0) return 0;
    if (n == 1) return 1;
    std::size_t c = 1;
    std::size_t l = 1;
    std::size_t i = 0;
    std::size_t k = 1;
    std::size_t k_max = 1;
    for (;;) {
        if (s[i + k - 1] == s[l + k - 1]) {
            ++k;
            if (l + k > n) {
                ++c;
                break;
            }
        } else {
            k_max = std::max(k, k_max);
            ++i;
            if (i == l) {
                ++c;
                l += k_max;
                if (l + 1 > n) break;
                i = 0;
                k = 1;
                k_max = 1;
            } else {
                k = 1;
            }
        }
    }
    return c;
}

double lempel_ziv_complexity(Window w, std::size_t bins) {
    if (w.empty()) return 0.0;
    const auto symbols = quantize(w, bins);
    return static_cast<double>(lz76_phrase_count(symbols)) / static_cast<double>(w.size());
}

double cid_ce(Window w, bool normalize) {
    if (w.size() < 2) return 0.0;
    double mu = 0.0;
    double sd = 1.0;
    if (normalize) {
        sd = standard_deviation(w);
        if (sd == 0.0) return 0.0;
        mu = mean(w);
    }
    double acc = 0.0;
    for (std::size_t i = 1; i < w.size(); ++i) {
        const double d = ((w[i] - mu) - (w[i - 1] - mu)) / sd;
        acc += d * d;
    }
    return std::sqrt(acc);
}

FeatureValue autocorrelation(Window w, std::size_t lag) {
    const std::size_t n = w.size();
    if (lag == 0 || lag >= n) return std::nullopt;
    const double var = variance(w);
    if (var == 0.0) return std::nullopt;
    const double mu = mean(w);
    double acc = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) acc += (w[t] - mu) * (w[t + lag] - mu);
    return acc / (static_cast<double>(n - lag) * var);
}

std::vector<double> periodogram(Window w) {
    const std::size_t n = w.size();
    if (n == 0) return {};
    const double mu = mean(w);
    std::vector<double> centered(n);
    for (std::size_t t = 0; t < n; ++t) centered[t] = w[t] - mu;
    std::vector<double> cos_table(n);
    std::vector<double> sin_table(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
        cos_table[j] = std::cos(angle);
        sin_table[j] = std::sin(angle);
    }
    std::vector<double> power(n / 2 + 1, 0.0);
    for (std::size_t k = 0; k < power.size(); ++k) {
        double re = 0.0;
        double im = 0.0;
        std::size_t phase = 0;
        for (std::size_t t = 0; t < n; ++t) {
            re += centered[t] * cos_table[phase];
            im -= centered[t] * sin_table[phase];
            phase += k;
            if (phase >= n) phase -= n;
        }
        power[k] = (re * re + im * im) / static_cast<double>(n);
    }
    return power;
}

double periodogram_coeff(Window w, std::size_t k) {
    const auto p = periodogram(w);
    return k < p.size() ? p[k] : 0.0;
}

double band_power(Window w, double sample_rate, double f_lo, double f_hi) {
    const auto p = periodogram(w);
    const double n = static_cast<double>(w.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double f = static_cast<double>(k) * sample_rate / n;
        if (f >= f_lo && f < f_hi) acc += p[k];
    }
    return acc;
}

double fourier_entropy(Window w) {
    const auto p = periodogram(w);
    double total = 0.0;
    for (std::size_t k = 1; k < p.size(); ++k) total += p[k];
    if (!(total > 0.0)) return 0.0;
    double h = 0.0;
    for (std::size_t k = 1; k < p.size(); ++k) {
        if (p[k] <= 0.0) continue;
        const double prob = p[k] / total;
        h -= prob * std::log(prob);
    }
    return h;
}

FeatureValue change_quantiles(Window w, double ql, double qh, bool isabs, ChangeAggregate agg) {
    if (!(ql < qh) || w.size() < 2) return std::nullopt;
    const double lo = quantile(w, ql);
    const double hi = quantile(w, qh);
    auto inside = [&](double x) { return x >= lo && x <= hi; };
    std::vector<double> diffs;
    for (std::size_t t = 1; t < w.size(); ++t) {
        if (inside(w[t - 1]) && inside(w[t])) {
            const double d = w[t] - w[t - 1];
            diffs.push_back(isabs ? std::abs(d) : d);
        }
    }
    if (diffs.empty()) return std::nullopt;
    return agg == ChangeAggregate::mean ? mean(diffs) : variance(diffs);
}

LinearTrend linear_trend(Window w) {
    LinearTrend out;
    const std::size_t n = w.size();
    if (n < 2) {
        out.intercept = n ? w[0] : 0.0;
        return out;
    }
    const double x_mean = static_cast<double>(n - 1) / 2.0;
    const double y_mean = mean(w);
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = static_cast<double>(i) - x_mean;
        const double dy = w[i] - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    out.slope = sxy / sxx;
    out.intercept = y_mean - out.slope * x_mean;
    out.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 0.0;
    return out;
}

}  // namespace features

std::string to_string(Aggregator agg) {
    switch (agg) {
        case Aggregator::mean: return "mean";
        case Aggregator::std: return "std";
        case Aggregator::none: return "none";
    }
    return "none";
}

Aggregator parse_aggregator(const std::string& text) {
    if (text == "mean") return Aggregator::mean;
    if (text == "std") return Aggregator::std;
    if (text == "none") return Aggregator::none;
    throw std::invalid_argument("unknown aggregator '" + text + "'");
}

namespace {

std::string render_params(const std::string& base, const std::vector<FeatureParam>& params) {
    std::string out = base;
    for (const auto& p : params) {
        out += "__" + p.name + "_" + p.value;
    }
    return out;
}

std::string num(double v) { return csv::format_double(v); }
std::string flag(bool v) { return v ? "True" : "False"; }
std::string quoted(const std::string& v) { return "\"" + v + "\""; }

using namespace features;

FeatureValue finite_or_missing(double v) {
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

FeatureSpec plain(std::string name, std::function<double(Window)> fn, std::size_t min_len = 1) {
    return {std::move(name), {}, [fn = std::move(fn), min_len](Window w, double) -> FeatureValue {
                if (w.size() < min_len) return std::nullopt;
                return finite_or_missing(fn(w));
            }};
}

}  // namespace

std::string FeatureSpec::render() const { return render_params(base_name, params); }

std::string FeatureId::render() const {
    const std::string body = render_params(base_name, params);
    if (aggregator == Aggregator::none) return body;
    return to_string(aggregator) + "__" + body;
}

std::vector<FeatureSpec> default_catalog() {
    std::vector<FeatureSpec> cat;
    cat.push_back(plain("mean", features::mean));
    cat.push_back(plain("variance", features::variance));
    cat.push_back(plain("standard_deviation", standard_deviation));
    cat.push_back(plain("root_mean_square", root_mean_square));
    cat.push_back(plain("mean_change", mean_change, 2));
    cat.push_back(plain("mean_abs_change", mean_abs_change, 2));
    cat.push_back(plain("longest_strike_below_mean", [](Window w) { return double(longest_strike_below_mean(w)); }, 2));
    cat.push_back(plain("longest_strike_above_mean", [](Window w) { return double(longest_strike_above_mean(w)); }, 2));

    for (int i = 1; i <= 9; ++i) {
        const double q = i / 10.0;
        cat.push_back({"quantile", {{"q", num(q)}}, [q](Window w, double) -> FeatureValue {
                           if (w.empty()) return std::nullopt;
                           return finite_or_missing(quantile(w, q));
                       }});
    }
    for (std::size_t n : {1, 3, 5}) {
        cat.push_back({"number_peaks", {{"n", std::to_string(n)}}, [n](Window w, double) -> FeatureValue {
                           if (w.size() < 2 * n + 1) return std::nullopt;
                           return double(number_peaks(w, n));
                       }});
    }
    for (double r : {0.5, 1.0, 1.5, 2.0, 3.0}) {
        cat.push_back({"ratio_beyond_r_sigma", {{"r", num(r)}}, [r](Window w, double) -> FeatureValue {
                           if (w.size() < 2) return std::nullopt;
                           return ratio_beyond_r_sigma(w, r);
                       }});
    }
    cat.push_back({"binned_entropy", {{"max_bins", "10"}}, [](Window w, double) -> FeatureValue {
                       if (w.size() < 4) return std::nullopt;
                       return finite_or_missing(binned_entropy(w, 10));
                   }});
    cat.push_back({"sample_entropy", {}, [](Window w, double) -> FeatureValue {
                       if (w.size() < 4) return std::nullopt;
                       return sample_entropy(w);
                   }});
    for (std::size_t bins : {2, 10, 100}) {
        cat.push_back({"lempel_ziv_complexity", {{"bins", std::to_string(bins)}}, [bins](Window w, double) -> FeatureValue {
                           if (w.size() < 4) return std::nullopt;
                           return lempel_ziv_complexity(w, bins);
                       }});
    }
    for (bool normalize : {true, false}) {
        cat.push_back({"cid_ce", {{"normalize", flag(normalize)}}, [normalize](Window w, double) -> FeatureValue {
                           if (w.size() < 4) return std::nullopt;
                           return finite_or_missing(cid_ce(w, normalize));
                       }});
    }
    for (std::size_t lag : {1, 2, 3, 5, 10}) {
        cat.push_back({"autocorrelation", {{"lag", std::to_string(lag)}}, [lag](Window w, double) -> FeatureValue {
                           auto v = autocorrelation(w, lag);
                           return v ? finite_or_missing(*v) : v;
                       }});
    }
    const std::pair<double, double> bands[] = {{0.0, 0.25}, {0.25, 0.5}, {0.5, 0.75}, {0.75, 1.0}};
    for (auto [lo, hi] : bands) {
        cat.push_back({"band_power", {{"f_lo", num(lo)}, {"f_hi", num(hi)}}, [lo, hi](Window w, double fs) -> FeatureValue {
                           if (w.size() < 8) return std::nullopt;
                           return finite_or_missing(band_power(w, fs, lo, hi));
                       }});
    }
    for (std::size_t k : {1, 2, 3}) {
        cat.push_back({"periodogram_coeff", {{"k", std::to_string(k)}}, [k](Window w, double) -> FeatureValue {
                           if (w.size() < 8) return std::nullopt;
                           return finite_or_missing(periodogram_coeff(w, k));
                       }});
    }
    cat.push_back({"fourier_entropy", {}, [](Window w, double) -> FeatureValue {
                       if (w.size() < 8) return std::nullopt;
                       return finite_or_missing(fourier_entropy(w));
                   }});
    const std::pair<double, double> corridors[] = {{0.2, 0.6}, {0.2, 0.8}, {0.4, 0.6}};
    for (auto [ql, qh] : corridors) {
        for (bool isabs : {false, true}) {
            for (auto agg : {ChangeAggregate::mean, ChangeAggregate::var}) {
                const std::string agg_name = agg == ChangeAggregate::mean ? "mean" : "var";
                cat.push_back({"change_quantiles",
                               {{"f_agg", quoted(agg_name)}, {"isabs", flag(isabs)}, {"qh", num(qh)}, {"ql", num(ql)}},
                               [=](Window w, double) -> FeatureValue {
                                   auto v = change_quantiles(w, ql, qh, isabs, agg);
                                   return v ? finite_or_missing(*v) : v;
                               }});
            }
        }
    }
    cat.push_back({"linear_trend", {{"attr", quoted("slope")}}, [](Window w, double) -> FeatureValue {
                       if (w.size() < 2) return std::nullopt;
                       return finite_or_missing(linear_trend(w).slope);
                   }});
    cat.push_back({"linear_trend", {{"attr", quoted("intercept")}}, [](Window w, double) -> FeatureValue {
                       if (w.size() < 2) return std::nullopt;
                       return finite_or_missing(linear_trend(w).intercept);
                   }});
    cat.push_back({"linear_trend", {{"attr", quoted("r_squared")}}, [](Window w, double) -> FeatureValue {
                       if (w.size() < 2) return std::nullopt;
                       return finite_or_missing(linear_trend(w).r_squared);
                   }});
    return cat;
}

std::vector<std::string> catalog_families() {
    std::vector<std::string> names;
    for (const auto& spec : default_catalog()) {
        if (std::find(names.begin(), names.end(), spec.base_name) == names.end()) names.push_back(spec.base_name);
    }
    return names;
}

std::vector<FeatureSpec> select_catalog(const std::vector<std::string>& families) {
    if (families.empty()) return default_catalog();
    const auto known = catalog_families();
    for (const auto& f : families) {
        if (std::find(known.begin(), known.end(), f) == known.end()) {
            throw std::invalid_argument("unknown feature family '" + f + "'");
        }
    }
    std::vector<FeatureSpec> out;
    for (auto& spec : default_catalog()) {
        if (std::find(families.begin(), families.end(), spec.base_name) != families.end()) {
            out.push_back(std::move(spec));
        }
    }
    return out;
}

FeatureValue aggregate_across_channels(std::span<const FeatureValue> per_channel, Aggregator aggregator) {
    std::vector<double> present;
    for (const auto& v : per_channel) {
        if (v) present.push_back(*v);
    }
    if (present.empty()) return std::nullopt;
    switch (aggregator) {
        case Aggregator::mean: return finite_or_missing(features::mean(present));
        case Aggregator::std:
            if (present.size() < 2) return std::nullopt;
            return finite_or_missing(standard_deviation(present));
        case Aggregator::none:
            if (present.size() != 1 || per_channel.size() != 1) {
                throw std::invalid_argument("aggregator 'none' requires exactly one channel");
            }
            return present.front();
    }
    return std::nullopt;
}

FeatureMatrix extract_feature_matrix(const std::vector<Slice>& slices, const std::vector<FeatureSpec>& catalog,
                                     ChannelRole role, const std::vector<Aggregator>& aggregators, unsigned threads) {
    if (catalog.empty()) throw std::invalid_argument("empty feature catalog selection");
    if (aggregators.empty()) throw std::invalid_argument("no aggregators selected");

    struct Column {
        FeatureId id;
        std::size_t spec;
        Aggregator agg;
    };
    std::vector<Column> cols;
    std::set<std::string> seen;
    for (std::size_t s = 0; s < catalog.size(); ++s) {
        for (Aggregator agg : aggregators) {
            FeatureId id{agg, catalog[s].base_name, catalog[s].params};
            if (!seen.insert(id.render()).second) continue;
            cols.push_back({std::move(id), s, agg});
        }
    }
    std::sort(cols.begin(), cols.end(), [](const Column& a, const Column& b) { return a.id.render() < b.id.render(); });

    std::vector<std::size_t> order(slices.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return RowKey{slices[a].recording_id, slices[a].slice_index} < RowKey{slices[b].recording_id, slices[b].slice_index};
    });

    FeatureMatrix fm;
    fm.rows.reserve(slices.size());
    for (std::size_t i : order) {
        RowKey key{slices[i].recording_id, slices[i].slice_index};
        if (!fm.rows.empty() && fm.rows.back() == key) {
            throw std::invalid_argument("duplicate slice (" + key.recording_id + ", " + std::to_string(key.slice_index) + ")");
        }
        fm.rows.push_back(std::move(key));
    }
    for (const auto& c : cols) fm.columns.push_back(c.id);
    fm.cells.assign(fm.rows.size() * fm.columns.size(), std::nullopt);

    parallel_for(order.size(), threads, [&](std::size_t r) {
        const Slice& slice = slices[order[r]];
        std::vector<const ChannelWindow*> windows;
        for (const auto& [id, w] : slice.windows) {
            if (w.role == role) windows.push_back(&w);
        }
        if (windows.empty()) {
            throw std::invalid_argument("recording '" + slice.recording_id + "' has no " + to_string(role) + " channel");
        }
        std::vector<std::vector<FeatureValue>> per_spec(catalog.size());
        for (std::size_t s = 0; s < catalog.size(); ++s) {
            per_spec[s].reserve(windows.size());
            for (const auto* w : windows) per_spec[s].push_back(catalog[s].compute(w->values, w->sample_rate));
        }
        for (std::size_t c = 0; c < cols.size(); ++c) {
            fm.at(r, c) = aggregate_across_channels(per_spec[cols[c].spec], cols[c].agg);
        }
    });
    return fm;
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& matrix) {
    std::vector<std::string> header{"recording_id", "slice_index"};
    for (const auto& c : matrix.columns) header.push_back(c.render());
    out << csv::join(header) << '\n';
    for (std::size_t r = 0; r < matrix.row_count(); ++r) {
        std::vector<std::string> fields{matrix.rows[r].recording_id, std::to_string(matrix.rows[r].slice_index)};
        for (std::size_t c = 0; c < matrix.column_count(); ++c) {
            const auto& v = matrix.at(r, c);
            fields.push_back(v ? csv::format_double(*v) : std::string());
        }
        out << csv::join(fields) << '\n';
    }
}

}  // namespace lexd
