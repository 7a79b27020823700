#include <algorithm>
#include <random>
#include <sstream>

#include "doctest.h"
#include "lexd/discretize.hpp"
#include "oracles.hpp"

using namespace lexd;

namespace {

FeatureMatrix matrix_of(const std::vector<std::vector<FeatureValue>>& columns) {
    FeatureMatrix m;
    const std::size_t rows = columns.front().size();
    for (std::size_t r = 0; r < rows; ++r) m.rows.push_back({"r", r});
    for (std::size_t c = 0; c < columns.size(); ++c) m.columns.push_back({Aggregator::mean, "f" + std::to_string(c), {}});
    for (std::size_t r = 0; r < rows; ++r) {
        for (const auto& col : columns) m.cells.push_back(col[r]);
    }
    return m;
}

}  // namespace

TEST_CASE("tercile edges for 1..9") {
    const std::vector<double> v{1, 2, 3, 4, 5, 6, 7, 8, 9};
    const auto s = fit_bins(v, "x");
    CHECK(s.e1 == doctest::Approx(oracle::quantile(v, 1.0 / 3.0)).epsilon(1e-15));
    CHECK(s.e2 == doctest::Approx(oracle::quantile(v, 2.0 / 3.0)).epsilon(1e-15));
    CHECK(s.e1 == doctest::Approx(11.0 / 3.0));
    CHECK(s.e2 == doctest::Approx(19.0 / 3.0));
    CHECK_FALSE(s.dropped);
    for (double x : {1.0, 2.0, 3.0}) CHECK(apply_bins(s, x) == BinLabel::low);
    for (double x : {4.0, 5.0, 6.0}) CHECK(apply_bins(s, x) == BinLabel::medium);
    for (double x : {7.0, 8.0, 9.0}) CHECK(apply_bins(s, x) == BinLabel::high);
}

TEST_CASE("boundary rule") {
    BinScheme s{"x", 1.0, 2.0, false};
    CHECK(apply_bins(s, 1.0) == BinLabel::low);
    CHECK(apply_bins(s, 2.0) == BinLabel::medium);
    CHECK(apply_bins(s, 2.0000001) == BinLabel::high);
    s.dropped = true;
    CHECK_THROWS_AS(apply_bins(s, 1.0), std::invalid_argument);
}

TEST_CASE("degenerate and heavily tied columns") {
    CHECK(fit_bins(std::vector<double>{4, 4, 4, 4}).dropped);
    CHECK_THROWS_AS(fit_bins(std::vector<double>{1, 2}), std::invalid_argument);

    // {0,0,0,1,1,1}: e1 = Q(1/3) = 0 (position 5/3 between two zeros), e2 = Q(2/3) = 1
    const std::vector<double> ties{0, 0, 0, 1, 1, 1};
    const auto s = fit_bins(ties);
    CHECK(s.e1 == 0.0);
    CHECK(s.e2 == 1.0);
    CHECK(apply_bins(s, 0.0) == BinLabel::low);
    CHECK(apply_bins(s, 1.0) == BinLabel::medium);
    CHECK(!s.dropped);
}

TEST_CASE("labels are monotone and balanced for distinct values") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g(0.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 3 * (1 + rng() % 40);
        std::vector<double> v(n);
        for (auto& x : v) x = g(rng);
        const auto s = fit_bins(v);
        CHECK(s.e1 <= s.e2);
        std::vector<double> sorted(v);
        std::sort(sorted.begin(), sorted.end());
        std::size_t counts[3] = {0, 0, 0};
        BinLabel prev = BinLabel::low;
        for (double x : sorted) {
            const auto l = apply_bins(s, x);
            CHECK(l >= prev);
            prev = l;
            ++counts[static_cast<int>(l)];
        }
        CHECK(counts[0] == n / 3);
        CHECK(counts[1] == n / 3);
        CHECK(counts[2] == n / 3);
        const auto again = fit_bins(v);
        CHECK(again.e1 == s.e1);
        CHECK(again.e2 == s.e2);
    }
}

TEST_CASE("discretize a feature matrix") {
    const auto m = matrix_of({
        {1.0, 2.0, 3.0, 4.0, 5.0, 6.0},
        {7.0, 7.0, 7.0, 7.0, 7.0, 7.0},
        {6.0, std::nullopt, 4.0, 3.0, 2.0, 1.0},
    });
    const auto d = discretize(m);
    CHECK(d.excluded_rows == 1);
    CHECK(d.table.row_count() == 5);
    CHECK(d.table.attributes == std::vector<std::string>{"mean__f0", "mean__f2"});
    CHECK(d.schemes.size() == 3);
    CHECK(d.schemes[1].dropped);
    CHECK(d.warnings.size() == 2);
    CHECK(d.table.rows[1] == RowKey{"r", 2});
    for (std::size_t c = 0; c < d.table.attribute_count(); ++c) {
        for (std::size_t r = 0; r < d.table.row_count(); ++r) {
            const auto l = d.table.at(r, c);
            CHECK((l == BinLabel::low || l == BinLabel::medium || l == BinLabel::high));
        }
    }
    CHECK(d.table.at(0, 0) == BinLabel::low);
    CHECK(d.table.at(0, 1) == BinLabel::high);
}

TEST_CASE("mostly missing columns are dropped instead of emptying the table") {
    const auto m = matrix_of({
        {1.0, 2.0, 3.0, 4.0},
        {std::nullopt, std::nullopt, 1.0, std::nullopt},
    });
    const auto d = discretize(m);
    CHECK(d.excluded_rows == 0);
    CHECK(d.table.attributes == std::vector<std::string>{"mean__f0"});
}

TEST_CASE("too few complete rows") {
    CHECK_THROWS_AS(discretize(matrix_of({{1.0, 2.0}})), std::invalid_argument);
}

TEST_CASE("table helpers and csv") {
    NominalTable t;
    t.rows = {{"a", 0}, {"a", 1}, {"b", 0}};
    t.attributes = {"x", "y"};
    t.cells = {BinLabel::low, BinLabel::medium, BinLabel::high, BinLabel::high, BinLabel::high, BinLabel::low};
    CHECK(t.find_attribute("y") == 1u);
    CHECK_FALSE(t.find_attribute("z").has_value());
    const std::vector<std::size_t> pick{2, 0};
    const auto sub = t.select_rows(pick);
    CHECK(sub.rows == std::vector<RowKey>{{"b", 0}, {"a", 0}});
    CHECK(sub.at(0, 0) == BinLabel::high);
    CHECK(sub.at(1, 1) == BinLabel::high);
    CHECK(sub.at(0, 1) == BinLabel::low);

    std::ostringstream out;
    write_nominal_csv(out, t);
    CHECK(out.str() == "recording_id,slice_index,x,y\na,0,low,high\na,1,medium,high\nb,0,high,low\n");
    CHECK(parse_label("medium") == BinLabel::medium);
    CHECK_THROWS(parse_label("mid"));
}
