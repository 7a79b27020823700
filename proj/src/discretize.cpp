#include "lexd/discretize.hpp"

#include <algorithm>
#include <stdexcept>

#include "lexd/csv.hpp"

namespace lexd {

std::string to_string(BinLabel label) {
    switch (label) {
        case BinLabel::low: return "low";
        case BinLabel::medium: return "medium";
        case BinLabel::high: return "high";
    }
    return "low";
}

BinLabel parse_label(const std::string& text) {
    if (text == "low") return BinLabel::low;
    if (text == "medium") return BinLabel::medium;
    if (text == "high") return BinLabel::high;
    throw std::invalid_argument("unknown bin label '" + text + "'");
}

BinScheme fit_bins(std::span<const double> values, std::string feature) {
    if (values.size() < 3) {
        throw std::invalid_argument("fit_bins needs at least 3 values, got " + std::to_string(values.size()));
    }
    BinScheme scheme;
    scheme.feature = std::move(feature);
    scheme.e1 = features::quantile(values, 1.0 / 3.0);
    scheme.e2 = features::quantile(values, 2.0 / 3.0);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    scheme.dropped = *lo == *hi;
    return scheme;
}

BinLabel apply_bins(const BinScheme& scheme, double value) {
    if (scheme.dropped) {
        throw std::invalid_argument("bin scheme for '" + scheme.feature + "' is dropped (constant column)");
    }
    if (value <= scheme.e1) return BinLabel::low;
    if (value <= scheme.e2) return BinLabel::medium;
    return BinLabel::high;
}

std::optional<std::size_t> NominalTable::find_attribute(const std::string& name) const {
    auto it = std::find(attributes.begin(), attributes.end(), name);
    if (it == attributes.end()) return std::nullopt;
    return static_cast<std::size_t>(it - attributes.begin());
}

NominalTable NominalTable::select_rows(std::span<const std::size_t> row_indices) const {
    NominalTable out;
    out.attributes = attributes;
    out.rows.reserve(row_indices.size());
    for (std::size_t r : row_indices) out.rows.push_back(rows.at(r));
    out.cells.reserve(row_indices.size() * attributes.size());
    for (std::size_t c = 0; c < attributes.size(); ++c) {
        for (std::size_t r : row_indices) out.cells.push_back(at(r, c));
    }
    return out;
}

Discretization discretize(const FeatureMatrix& matrix) {
    Discretization out;
    std::vector<std::size_t> usable;
    for (std::size_t c = 0; c < matrix.column_count(); ++c) {
        std::size_t present = 0;
        for (std::size_t r = 0; r < matrix.row_count(); ++r) present += matrix.at(r, c).has_value();
        if (present >= 3) {
            usable.push_back(c);
        } else {
            out.warnings.push_back("column '" + matrix.columns[c].render() + "' has " + std::to_string(present) +
                                   " values and was dropped");
        }
    }
    std::vector<std::size_t> kept;
    for (std::size_t r = 0; r < matrix.row_count(); ++r) {
        bool complete = true;
        for (std::size_t c : usable) complete = complete && matrix.at(r, c).has_value();
        if (complete) kept.push_back(r);
    }
    out.excluded_rows = matrix.row_count() - kept.size();
    if (out.excluded_rows > 0) {
        out.warnings.push_back(std::to_string(out.excluded_rows) + " of " + std::to_string(matrix.row_count()) +
                               " rows excluded because of MISSING feature values");
    }
    if (kept.size() < 3) {
        throw std::invalid_argument("fewer than 3 complete rows remain for discretization");
    }

    NominalTable& table = out.table;
    for (std::size_t r : kept) table.rows.push_back(matrix.rows[r]);
    std::vector<double> column(kept.size());
    for (std::size_t c : usable) {
        for (std::size_t i = 0; i < kept.size(); ++i) column[i] = *matrix.at(kept[i], c);
        BinScheme scheme = fit_bins(column, matrix.columns[c].render());
        if (scheme.dropped) {
            out.warnings.push_back("column '" + scheme.feature + "' is constant and was dropped");
        } else {
            table.attributes.push_back(scheme.feature);
            for (double v : column) table.cells.push_back(apply_bins(scheme, v));
        }
        out.schemes.push_back(std::move(scheme));
    }
    return out;
}

void write_nominal_csv(std::ostream& out, const NominalTable& table) {
    std::vector<std::string> header{"recording_id", "slice_index"};
    header.insert(header.end(), table.attributes.begin(), table.attributes.end());
    out << csv::join(header) << '\n';
    for (std::size_t r = 0; r < table.row_count(); ++r) {
        std::vector<std::string> fields{table.rows[r].recording_id, std::to_string(table.rows[r].slice_index)};
        for (std::size_t c = 0; c < table.attribute_count(); ++c) fields.push_back(to_string(table.at(r, c)));
        out << csv::join(fields) << '\n';
    }
}

}  // namespace lexd
