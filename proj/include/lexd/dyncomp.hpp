#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lexd/discretize.hpp"
#include "lexd/ingest.hpp"

namespace lexd {

/// Measurement scale [lo, hi] of a signal.
struct ValueDomain {
    double lo = 0.0;
    double hi = 1.0;

    double width() const { return hi - lo; }
    bool operator==(const ValueDomain&) const = default;
};

struct DynCompConfig {
    std::size_t window_m = 30;
    std::size_t step = 1;
    std::optional<ValueDomain> domain;  // nullopt: observed min/max of the whole channel
};

/// A fluctuation or distribution value. `degenerate` is set when the domain
/// has zero width; the value is then 0.
struct ComplexityComponent {
    double value = 0.0;
    bool degenerate = false;
};

/// 0-based indices of the points of return: both endpoints plus every
/// interior index where the sign (-, 0, +) of the step changes.
std::vector<std::size_t> points_of_return(std::span<const double> window);

/// Amplitude per step between successive points of return, summed and
/// normalized by d (m - 1). Values are clamped to the domain first.
ComplexityComponent fluctuation(std::span<const double> window, ValueDomain domain);

/// One minus the mean positive spacing disparity between the sorted window
/// and an equidistant scan of the domain, averaged over every
/// (sub-window, index pair) term. Values are clamped to the domain first.
ComplexityComponent distribution(std::span<const double> window, ValueDomain domain);

struct DcPoint {
    std::size_t window_start = 0;
    double start_seconds = 0.0;
    double fluctuation = 0.0;
    double distribution = 0.0;
    double complexity = 0.0;
};

struct DcSeries {
    std::string recording_id;
    double sample_rate = 1.0;
    ValueDomain domain;
    bool degenerate = false;
    std::vector<DcPoint> points;
};

/// F * D over rolling windows of cfg.window_m samples at stride cfg.step.
DcSeries dynamic_complexity_series(const Channel& channel, const DynCompConfig& cfg,
                                   const std::string& recording_id = {});

enum class TargetKind { mean_z, slope, delta };

std::string to_string(TargetKind kind);
TargetKind parse_target_kind(const std::string& text);

struct TargetVector {
    std::vector<RowKey> rows;
    std::vector<double> values;
    TargetKind kind = TargetKind::mean_z;
    std::size_t lag = 0;
    std::map<std::string, std::size_t> slice_counts;
    bool degenerate = false;
    std::vector<std::string> warnings;
};

struct SliceLayout {
    std::string recording_id;
    std::size_t slice_count = 0;
    double slice_seconds = 60.0;
};

/// Per-slice target values. A dc value belongs to the slice containing its
/// window start time. mean_z is z-scored across all recordings together;
/// a zero-variance input yields all zeros and a warning.
TargetVector slice_targets(std::span<const DcSeries> series, std::span<const SliceLayout> layouts, TargetKind kind);

/// Instances pairing features of slice i with the target of slice i + lag.
struct LaggedInstances {
    NominalTable table;
    std::vector<double> targets;
    std::vector<RowKey> target_rows;
    std::size_t lag = 0;
};

LaggedInstances apply_lag(const NominalTable& features, const TargetVector& target, std::size_t lag);

/// `recording_id,window_start_s,F,D,complexity`
void write_dc_csv(std::ostream& out, std::span<const DcSeries> series);

}  // namespace lexd
