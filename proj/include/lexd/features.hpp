#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lexd/ingest.hpp"

namespace lexd {

/// A feature value; std::nullopt marks MISSING (feature undefined on the window).
using FeatureValue = std::optional<double>;
using Window = std::span<const double>;

namespace features {

// Descriptive statistics. Variance and std use population (1/n) normalization.
double mean(Window w);
double variance(Window w);
double standard_deviation(Window w);
/// Linear interpolation between order statistics at position (n-1)q.
double quantile(Window w, double q);
double root_mean_square(Window w);
double mean_change(Window w);
double mean_abs_change(Window w);

std::size_t longest_strike_below_mean(Window w);
std::size_t longest_strike_above_mean(Window w);
/// Indices whose value strictly exceeds the `support` neighbours on each side.
std::size_t number_peaks(Window w, std::size_t support);
/// Fraction of values with |x - mean| > r * std; 0 for constant windows.
double ratio_beyond_r_sigma(Window w, double r);

/// Natural-log Shannon entropy over `max_bins` equal-width bins on [min, max].
double binned_entropy(Window w, std::size_t max_bins);
/// -ln(A/B) with Chebyshev tolerance r_frac * std; MISSING when A or B is 0.
FeatureValue sample_entropy(Window w, std::size_t m = 2, double r_frac = 0.2);
/// LZ76 phrase count of the window quantized into `bins` levels, over length.
double lempel_ziv_complexity(Window w, std::size_t bins);
/// Phrase count of the LZ76 (Kaspar-Schuster) parse of a symbol sequence.
std::size_t lz76_phrase_count(std::span<const int> symbols);
/// Equal-width quantization into [0, bins); constant windows map to 0.
std::vector<int> quantize(Window w, std::size_t bins);
double cid_ce(Window w, bool normalize);

/// r(lag) = sum (x_t - mu)(x_{t+lag} - mu) / ((n - lag) sigma^2).
FeatureValue autocorrelation(Window w, std::size_t lag);

/// One-sided periodogram |X_k|^2 / n of the mean-removed window, k = 0..n/2.
std::vector<double> periodogram(Window w);
double periodogram_coeff(Window w, std::size_t k);
/// Sum of periodogram bins with frequency k * fs / n in [f_lo, f_hi).
double band_power(Window w, double sample_rate, double f_lo, double f_hi);
/// Shannon entropy of the normalized periodogram (k >= 1); 0 when flat-zero.
double fourier_entropy(Window w);

enum class ChangeAggregate { mean, var };
FeatureValue change_quantiles(Window w, double ql, double qh, bool isabs, ChangeAggregate agg);

struct LinearTrend {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};
LinearTrend linear_trend(Window w);

}  // namespace features

enum class Aggregator { mean, std, none };

std::string to_string(Aggregator agg);
Aggregator parse_aggregator(const std::string& text);

struct FeatureParam {
    std::string name;
    std::string value;  // already rendered, e.g. `0.6`, `True`, `"mean"`

    bool operator==(const FeatureParam&) const = default;
};

/// A catalog entry: base feature plus fixed parameters.
struct FeatureSpec {
    std::string base_name;
    std::vector<FeatureParam> params;
    std::function<FeatureValue(Window, double sample_rate)> compute;

    /// `base[__param_value...]`
    std::string render() const;
};

struct FeatureId {
    Aggregator aggregator = Aggregator::none;
    std::string base_name;
    std::vector<FeatureParam> params;

    /// `<aggregator>__<base>[__<param>_<value>...]`; no prefix for `none`.
    std::string render() const;
    bool operator==(const FeatureId&) const = default;
};

/// Every catalog entry with its default parameter grid.
std::vector<FeatureSpec> default_catalog();
/// Entries of the default catalog whose base family is listed. Families are
/// base names (`quantile`, `autocorrelation`, `change_quantiles`, ...).
/// An empty list selects the whole catalog. Throws std::invalid_argument on
/// an unknown family.
std::vector<FeatureSpec> select_catalog(const std::vector<std::string>& families);
std::vector<std::string> catalog_families();

/// Mean or population std of the present values; MISSING when nothing is
/// present, or for std when fewer than two values are present.
FeatureValue aggregate_across_channels(std::span<const FeatureValue> per_channel, Aggregator aggregator);

struct RowKey {
    std::string recording_id;
    std::size_t slice_index = 0;

    auto operator<=>(const RowKey&) const = default;
    bool operator==(const RowKey&) const = default;
};

struct FeatureMatrix {
    std::vector<RowKey> rows;
    std::vector<FeatureId> columns;
    std::vector<FeatureValue> cells;  // row-major

    std::size_t row_count() const { return rows.size(); }
    std::size_t column_count() const { return columns.size(); }
    const FeatureValue& at(std::size_t row, std::size_t col) const { return cells[row * columns.size() + col]; }
    FeatureValue& at(std::size_t row, std::size_t col) { return cells[row * columns.size() + col]; }
};

/// One row per slice, one column per (aggregator x catalog entry), columns in
/// lexicographic order of their rendered ids. Per-channel values are taken
/// from every window of `role`. `Aggregator::none` requires exactly one
/// channel of that role.
FeatureMatrix extract_feature_matrix(const std::vector<Slice>& slices, const std::vector<FeatureSpec>& catalog,
                                     ChannelRole role,
                                     const std::vector<Aggregator>& aggregators = {Aggregator::mean, Aggregator::std},
                                     unsigned threads = 1);

/// `recording_id,slice_index,<feature...>`, MISSING as an empty cell.
void write_feature_csv(std::ostream& out, const FeatureMatrix& matrix);

}  // namespace lexd
