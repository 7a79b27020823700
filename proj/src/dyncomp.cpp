#include "lexd/dyncomp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lexd/csv.hpp"
#include "lexd/features.hpp"

namespace lexd {

namespace {

int step_sign(double a, double b) {
    if (b > a) return 1;
    if (b < a) return -1;
    return 0;
}

std::vector<double> clamped(std::span<const double> window, ValueDomain domain) {
    std::vector<double> out(window.begin(), window.end());
    for (double& x : out) x = std::clamp(x, domain.lo, domain.hi);
    return out;
}

}  // namespace

std::vector<std::size_t> points_of_return(std::span<const double> window) {
    const std::size_t m = window.size();
    if (m == 0) return {};
    std::vector<std::size_t> points{0};
    for (std::size_t j = 1; j + 1 < m; ++j) {
        if (step_sign(window[j - 1], window[j]) != step_sign(window[j], window[j + 1])) points.push_back(j);
    }
    if (m > 1) points.push_back(m - 1);
    return points;
}

ComplexityComponent fluctuation(std::span<const double> window, ValueDomain domain) {
    if (window.size() < 2) throw std::invalid_argument("fluctuation needs a window of at least 2 values");
    const double d = domain.width();
    if (!(d > 0.0)) return {0.0, true};
    const auto x = clamped(window, domain);
    const auto p = points_of_return(x);
    double sum = 0.0;
    for (std::size_t k = 0; k + 1 < p.size(); ++k) {
        sum += std::abs(x[p[k + 1]] - x[p[k]]) / static_cast<double>(p[k + 1] - p[k]);
    }
    const double f = sum / (d * static_cast<double>(x.size() - 1));
    return {std::clamp(f, 0.0, 1.0), false};
}

ComplexityComponent distribution(std::span<const double> window, ValueDomain domain) {
    const std::size_t m = window.size();
    if (m < 2) throw std::invalid_argument("distribution needs a window of at least 2 values");
    const double d = domain.width();
    if (!(d > 0.0)) return {0.0, true};
    auto s = clamped(window, domain);
    std::sort(s.begin(), s.end());
    const double spacing = d / static_cast<double>(m - 1);

    // Pair (a, b), a < b, appears once for every sub-window [c, e] with
    // c <= a and e >= b: (a + 1) * (m - b) times with 0-based indices.
    double positive = 0.0;
    double terms = 0.0;
    for (std::size_t a = 0; a + 1 < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            const double multiplicity = static_cast<double>(a + 1) * static_cast<double>(m - b);
            const double ideal = spacing * static_cast<double>(b - a);
            const double disparity = ideal - (s[b] - s[a]);
            if (disparity > 0.0) positive += multiplicity * disparity / ideal;
            terms += multiplicity;
        }
    }
    return {std::clamp(1.0 - positive / terms, 0.0, 1.0), false};
}

DcSeries dynamic_complexity_series(const Channel& channel, const DynCompConfig& cfg, const std::string& recording_id) {
    if (cfg.window_m < 4) throw std::invalid_argument("dynamic complexity window must span at least 4 samples");
    if (cfg.step < 1) throw std::invalid_argument("dynamic complexity step must be >= 1");
    const auto& x = channel.values;
    if (x.size() < cfg.window_m) {
        throw std::invalid_argument("channel '" + channel.channel_id + "' has " + std::to_string(x.size()) +
                                    " samples, shorter than one window of " + std::to_string(cfg.window_m));
    }
    DcSeries out;
    out.recording_id = recording_id;
    out.sample_rate = channel.sample_rate;
    if (cfg.domain) {
        out.domain = *cfg.domain;
    } else {
        const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
        out.domain = {*lo, *hi};
    }
    out.degenerate = !(out.domain.width() > 0.0);
    const std::size_t count = (x.size() - cfg.window_m) / cfg.step + 1;
    out.points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t start = i * cfg.step;
        const std::span<const double> w(x.data() + start, cfg.window_m);
        const auto f = fluctuation(w, out.domain);
        const auto d = distribution(w, out.domain);
        out.points.push_back({start, static_cast<double>(start) / channel.sample_rate, f.value, d.value, f.value * d.value});
    }
    return out;
}

std::string to_string(TargetKind kind) {
    switch (kind) {
        case TargetKind::mean_z: return "mean_z";
        case TargetKind::slope: return "slope";
        case TargetKind::delta: return "delta";
    }
    return "mean_z";
}

TargetKind parse_target_kind(const std::string& text) {
    if (text == "mean_z") return TargetKind::mean_z;
    if (text == "slope") return TargetKind::slope;
    if (text == "delta") return TargetKind::delta;
    throw std::invalid_argument("unknown target kind '" + text + "'");
}

TargetVector slice_targets(std::span<const DcSeries> series, std::span<const SliceLayout> layouts, TargetKind kind) {
    TargetVector out;
    out.kind = kind;
    std::vector<std::size_t> order(layouts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return layouts[a].recording_id < layouts[b].recording_id; });

    for (std::size_t li : order) {
        const SliceLayout& layout = layouts[li];
        auto it = std::find_if(series.begin(), series.end(),
                               [&](const DcSeries& s) { return s.recording_id == layout.recording_id; });
        if (it == series.end()) {
            throw std::invalid_argument("no dynamic complexity series for recording '" + layout.recording_id + "'");
        }
        if (!out.slice_counts.emplace(layout.recording_id, layout.slice_count).second) {
            throw std::invalid_argument("duplicate slice layout for recording '" + layout.recording_id + "'");
        }
        std::vector<std::vector<const DcPoint*>> buckets(layout.slice_count);
        for (const auto& p : it->points) {
            const auto k = static_cast<std::size_t>(std::floor(p.start_seconds / layout.slice_seconds + 1e-9));
            if (k < layout.slice_count) buckets[k].push_back(&p);
        }
        const std::size_t needed = kind == TargetKind::slope ? 2 : 1;
        std::vector<double> means(layout.slice_count);
        for (std::size_t k = 0; k < layout.slice_count; ++k) {
            if (buckets[k].size() < needed) {
                throw std::invalid_argument("slice " + std::to_string(k) + " of recording '" + layout.recording_id +
                                            "' overlaps " + std::to_string(buckets[k].size()) +
                                            " dynamic complexity values (needs " + std::to_string(needed) + ")");
            }
            double sum = 0.0;
            for (const auto* p : buckets[k]) sum += p->complexity;
            means[k] = sum / static_cast<double>(buckets[k].size());
        }
        for (std::size_t k = 0; k < layout.slice_count; ++k) {
            switch (kind) {
                case TargetKind::mean_z:
                    out.values.push_back(means[k]);
                    break;
                case TargetKind::slope: {
                    const auto& b = buckets[k];
                    double t_mean = 0.0;
                    double y_mean = 0.0;
                    for (const auto* p : b) {
                        t_mean += p->start_seconds;
                        y_mean += p->complexity;
                    }
                    t_mean /= static_cast<double>(b.size());
                    y_mean /= static_cast<double>(b.size());
                    double stt = 0.0;
                    double sty = 0.0;
                    for (const auto* p : b) {
                        stt += (p->start_seconds - t_mean) * (p->start_seconds - t_mean);
                        sty += (p->start_seconds - t_mean) * (p->complexity - y_mean);
                    }
                    out.values.push_back(stt > 0.0 ? sty / stt : 0.0);
                    break;
                }
                case TargetKind::delta:
                    if (k == 0) continue;
                    out.values.push_back(means[k] - means[k - 1]);
                    break;
            }
            out.rows.push_back({layout.recording_id, k});
        }
    }

    if (kind == TargetKind::mean_z && !out.values.empty()) {
        const double mu = features::mean(out.values);
        const double sd = features::standard_deviation(out.values);
        if (!(sd > 1e-12 * std::max(1.0, std::abs(mu)))) {
            out.degenerate = true;
            out.warnings.push_back("target has zero variance; z-scores set to 0");
            std::fill(out.values.begin(), out.values.end(), 0.0);
        } else {
            for (double& v : out.values) v = (v - mu) / sd;
        }
    }
    return out;
}

LaggedInstances apply_lag(const NominalTable& features, const TargetVector& target, std::size_t lag) {
    for (const auto& [rec, count] : target.slice_counts) {
        if (lag >= count) {
            throw std::invalid_argument("lag " + std::to_string(lag) + " is not below the slice count " +
                                        std::to_string(count) + " of recording '" + rec + "'");
        }
    }
    std::map<RowKey, std::size_t> target_index;
    for (std::size_t i = 0; i < target.rows.size(); ++i) target_index.emplace(target.rows[i], i);

    LaggedInstances out;
    out.lag = lag;
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < features.row_count(); ++r) {
        const RowKey& key = features.rows[r];
        if (!target.slice_counts.contains(key.recording_id)) {
            throw std::invalid_argument("feature row recording '" + key.recording_id + "' has no target");
        }
        auto it = target_index.find(RowKey{key.recording_id, key.slice_index + lag});
        if (it == target_index.end()) continue;
        keep.push_back(r);
        out.targets.push_back(target.values[it->second]);
        out.target_rows.push_back(it->first);
    }
    out.table = features.select_rows(keep);
    return out;
}

void write_dc_csv(std::ostream& out, std::span<const DcSeries> series) {
    out << "recording_id,window_start_s,F,D,complexity\n";
    for (const auto& s : series) {
        for (const auto& p : s.points) {
            out << csv::join({s.recording_id, csv::format_double(p.start_seconds), csv::format_double(p.fluctuation),
                              csv::format_double(p.distribution), csv::format_double(p.complexity)})
                << '\n';
        }
    }
}

}  // namespace lexd
