#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "lexd/features.hpp"

namespace lexd {

enum class BinLabel : std::uint8_t { low = 0, medium = 1, high = 2 };

std::string to_string(BinLabel label);
BinLabel parse_label(const std::string& text);

struct BinScheme {
    std::string feature;  // rendered FeatureId
    double e1 = 0.0;      // 1/3 quantile
    double e2 = 0.0;      // 2/3 quantile
    bool dropped = false;
};

/// Tercile edges of the values (linear interpolation). Requires >= 3 values;
/// a column of identical values is marked dropped.
BinScheme fit_bins(std::span<const double> values, std::string feature = {});

/// low if v <= e1, medium if e1 < v <= e2, high otherwise.
BinLabel apply_bins(const BinScheme& scheme, double value);

/// Nominal attributes over instances; cells are stored column-major.
struct NominalTable {
    std::vector<RowKey> rows;
    std::vector<std::string> attributes;
    std::vector<BinLabel> cells;  // cells[col * rows.size() + row]

    std::size_t row_count() const { return rows.size(); }
    std::size_t attribute_count() const { return attributes.size(); }
    BinLabel at(std::size_t row, std::size_t col) const { return cells[col * rows.size() + row]; }
    std::span<const BinLabel> column(std::size_t col) const {
        return {cells.data() + col * rows.size(), rows.size()};
    }
    std::optional<std::size_t> find_attribute(const std::string& name) const;
    NominalTable select_rows(std::span<const std::size_t> row_indices) const;
};

struct Discretization {
    NominalTable table;
    std::vector<BinScheme> schemes;  // fitted columns, constant ones included
    std::vector<std::string> warnings;
    std::size_t excluded_rows = 0;
};

/// Drops columns with fewer than 3 present values, excludes rows with a
/// MISSING cell in any remaining column, fits tercile bins per column and
/// drops constant columns from the attribute vocabulary. `schemes` holds
/// one entry per column that was fitted.
Discretization discretize(const FeatureMatrix& matrix);

void write_nominal_csv(std::ostream& out, const NominalTable& table);

}  // namespace lexd
