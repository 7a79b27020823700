#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lexd/discretize.hpp"
#include "lexd/dyncomp.hpp"

namespace lexd {

/// Fixed-size bitset over instance indices.
class Bitset {
public:
    Bitset() = default;
    explicit Bitset(std::size_t size, bool value = false);

    std::size_t size() const { return size_; }
    std::size_t count() const;
    bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(std::size_t i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
    Bitset& operator&=(const Bitset& other);
    bool operator==(const Bitset&) const = default;

    /// Calls fn(index) for every set bit in increasing order.
    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            std::uint64_t bits = words_[w];
            while (bits) {
                const int b = __builtin_ctzll(bits);
                fn(w * 64 + static_cast<std::size_t>(b));
                bits &= bits - 1;
            }
        }
    }

    std::vector<std::size_t> indices() const;
    static void intersect(const Bitset& a, const Bitset& b, Bitset& out);

private:
    std::size_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

struct Selector {
    std::string attribute;
    BinLabel label = BinLabel::low;

    std::string render() const { return attribute + "=" + to_string(label); }
    bool operator==(const Selector&) const = default;
};

/// Conjunction of selectors, at most one per attribute, kept sorted by
/// rendered form.
class Pattern {
public:
    Pattern() = default;
    /// Throws std::invalid_argument when two selectors share an attribute.
    explicit Pattern(std::vector<Selector> selectors);

    const std::vector<Selector>& selectors() const { return selectors_; }
    std::size_t depth() const { return selectors_.size(); }
    bool empty() const { return selectors_.empty(); }
    /// `a=low AND b=high`; the empty pattern renders as an empty string.
    std::string render() const;
    std::vector<std::string> rendered_selectors() const;
    /// Inverse of render().
    static Pattern parse(const std::string& text);

    bool operator==(const Pattern&) const = default;

private:
    std::vector<Selector> selectors_;
};

struct QualitySpec {
    double a = 0.5;
};

enum class Direction { high, low };

std::string to_string(Direction d);
Direction parse_direction(const std::string& text);

struct SearchConfig {
    std::size_t min_size = 20;
    std::size_t max_depth = 3;
    std::size_t top_k = 20;
    QualitySpec quality;
    bool pruning = true;
    Direction direction = Direction::high;
    unsigned threads = 1;
};

struct SubgroupResult {
    Pattern pattern;
    std::size_t size = 0;
    double subgroup_mean = 0.0;
    double population_mean = 0.0;
    double quality = 0.0;
    std::vector<std::size_t> coverage;

    bool operator==(const SubgroupResult&) const = default;
};

/// Rows where every selector matches; the empty pattern covers all rows.
Bitset coverage(const Pattern& pattern, const NominalTable& table);

/// n^a (t_P - t_0), mirrored to n^a (t_0 - t_P) for Direction::low.
double quality(std::size_t n, double subgroup_mean, double population_mean, QualitySpec spec,
               Direction direction = Direction::high);

/// Upper bound on the quality of every refinement of a coverage:
/// n^a (max - t_0) for a non-negative best deviation. When even the best
/// target lies below t_0 the bound is the deviation itself (a size-1
/// refinement is then the least penalized).
double optimistic_estimate(const Bitset& cover, std::span<const double> targets, double population_mean,
                           QualitySpec spec, Direction direction = Direction::high);

/// Strict ranking used for top-k: quality desc, size desc, fewer selectors,
/// then lexicographic order of the rendered selector lists.
bool ranks_before(const SubgroupResult& a, const SubgroupResult& b);

/// Top-k subgroups of depth <= max_depth and size >= min_size. `targets` is
/// aligned with the table rows. Output is identical with or without pruning
/// and for any thread count.
std::vector<SubgroupResult> discover(const NominalTable& table, std::span<const double> targets, const SearchConfig& cfg);

/// Same, pairing table rows and target rows by key.
std::vector<SubgroupResult> discover(const NominalTable& table, const TargetVector& target, const SearchConfig& cfg);

}  // namespace lexd
