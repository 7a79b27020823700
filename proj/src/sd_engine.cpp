#include "lexd/sd_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <thread>

namespace lexd {

Bitset::Bitset(std::size_t size, bool value) : size_(size), words_((size + 63) / 64, value ? ~std::uint64_t{0} : 0) {
    if (value && size % 64 != 0) {
        words_.back() = (std::uint64_t{1} << (size % 64)) - 1;
    }
}

std::size_t Bitset::count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(__builtin_popcountll(w));
    return c;
}

Bitset& Bitset::operator&=(const Bitset& other) {
    if (other.size_ != size_) throw std::invalid_argument("bitset size mismatch");
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
    return *this;
}

std::vector<std::size_t> Bitset::indices() const {
    std::vector<std::size_t> out;
    out.reserve(count());
    for_each([&](std::size_t i) { out.push_back(i); });
    return out;
}

void Bitset::intersect(const Bitset& a, const Bitset& b, Bitset& out) {
    out.size_ = a.size_;
    out.words_.resize(a.words_.size());
    for (std::size_t i = 0; i < a.words_.size(); ++i) out.words_[i] = a.words_[i] & b.words_[i];
}

Pattern::Pattern(std::vector<Selector> selectors) : selectors_(std::move(selectors)) {
    std::sort(selectors_.begin(), selectors_.end(),
              [](const Selector& x, const Selector& y) { return x.render() < y.render(); });
    for (std::size_t i = 0; i < selectors_.size(); ++i) {
        for (std::size_t j = i + 1; j < selectors_.size(); ++j) {
            if (selectors_[i].attribute == selectors_[j].attribute) {
                throw std::invalid_argument("pattern has two selectors on attribute '" + selectors_[i].attribute + "'");
            }
        }
    }
}

std::string Pattern::render() const {
    std::string out;
    for (std::size_t i = 0; i < selectors_.size(); ++i) {
        if (i) out += " AND ";
        out += selectors_[i].render();
    }
    return out;
}

std::vector<std::string> Pattern::rendered_selectors() const {
    std::vector<std::string> out;
    out.reserve(selectors_.size());
    for (const auto& s : selectors_) out.push_back(s.render());
    return out;
}

Pattern Pattern::parse(const std::string& text) {
    std::vector<Selector> sels;
    if (text.empty()) return Pattern{};
    static const std::string sep = " AND ";
    std::size_t pos = 0;
    for (;;) {
        const std::size_t next = text.find(sep, pos);
        const std::string part = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        const std::size_t eq = part.rfind('=');
        if (eq == std::string::npos || eq == 0) throw std::invalid_argument("malformed selector '" + part + "'");
        sels.push_back({part.substr(0, eq), parse_label(part.substr(eq + 1))});
        if (next == std::string::npos) break;
        pos = next + sep.size();
    }
    return Pattern(std::move(sels));
}

std::string to_string(Direction d) { return d == Direction::high ? "high" : "low"; }

Direction parse_direction(const std::string& text) {
    if (text == "high") return Direction::high;
    if (text == "low") return Direction::low;
    throw std::invalid_argument("unknown direction '" + text + "'");
}

Bitset coverage(const Pattern& pattern, const NominalTable& table) {
    Bitset out(table.row_count(), true);
    for (const auto& sel : pattern.selectors()) {
        const auto col = table.find_attribute(sel.attribute);
        if (!col) throw std::invalid_argument("unknown attribute '" + sel.attribute + "'");
        const auto column = table.column(*col);
        Bitset match(table.row_count());
        for (std::size_t r = 0; r < column.size(); ++r) {
            if (column[r] == sel.label) match.set(r);
        }
        out &= match;
    }
    return out;
}

double quality(std::size_t n, double subgroup_mean, double population_mean, QualitySpec spec, Direction direction) {
    const double deviation =
        direction == Direction::high ? subgroup_mean - population_mean : population_mean - subgroup_mean;
    return std::pow(static_cast<double>(n), spec.a) * deviation;
}

namespace {

/// Best achievable deviation within a coverage, sign-adjusted for direction.
double best_deviation(const Bitset& cover, std::span<const double> targets, double t0, Direction direction) {
    double best = -std::numeric_limits<double>::infinity();
    cover.for_each([&](std::size_t i) {
        const double dev = direction == Direction::high ? targets[i] - t0 : t0 - targets[i];
        best = std::max(best, dev);
    });
    return best;
}

}  // namespace

double optimistic_estimate(const Bitset& cover, std::span<const double> targets, double population_mean,
                           QualitySpec spec, Direction direction) {
    const std::size_t n = cover.count();
    if (n == 0) throw std::invalid_argument("optimistic estimate of an empty coverage");
    const double dev = best_deviation(cover, targets, population_mean, direction);
    return dev >= 0.0 ? std::pow(static_cast<double>(n), spec.a) * dev : dev;
}

bool ranks_before(const SubgroupResult& a, const SubgroupResult& b) {
    if (a.quality != b.quality) return a.quality > b.quality;
    if (a.size != b.size) return a.size > b.size;
    if (a.pattern.depth() != b.pattern.depth()) return a.pattern.depth() < b.pattern.depth();
    return a.pattern.rendered_selectors() < b.pattern.rendered_selectors();
}

namespace {

struct VocabEntry {
    std::size_t attribute;
    BinLabel label;
    Bitset cover;
};

struct Candidate {
    std::vector<std::size_t> path;  // vocabulary indices
    std::vector<std::string> key;   // rendered selectors, sorted
    std::size_t size = 0;
    double mean = 0.0;
    double quality = 0.0;
};

bool candidate_before(const Candidate& a, const Candidate& b) {
    if (a.quality != b.quality) return a.quality > b.quality;
    if (a.size != b.size) return a.size > b.size;
    if (a.key.size() != b.key.size()) return a.key.size() < b.key.size();
    return a.key < b.key;
}

class TopK {
public:
    explicit TopK(std::size_t k) : k_(k) {}

    bool full() const { return items_.size() >= k_; }
    double worst_quality() const { return items_.back().quality; }

    /// Cheap pre-check before the rendered key is built.
    bool may_enter(double q, std::size_t n) const {
        if (!full()) return true;
        const Candidate& w = items_.back();
        return q > w.quality || (q == w.quality && n >= w.size);
    }

    void offer(Candidate c) {
        if (full() && !candidate_before(c, items_.back())) return;
        auto pos = std::upper_bound(items_.begin(), items_.end(), c, candidate_before);
        items_.insert(pos, std::move(c));
        if (items_.size() > k_) items_.pop_back();
    }

    std::vector<Candidate>& items() { return items_; }

private:
    std::size_t k_;
    std::vector<Candidate> items_;
};

class Search {
public:
    Search(const NominalTable& table, std::span<const double> targets, const SearchConfig& cfg)
        : table_(table), targets_(targets), cfg_(cfg) {
        double sum = 0.0;
        for (double t : targets) sum += t;
        t0_ = sum / static_cast<double>(targets.size());
        min_size_factor_ = std::pow(static_cast<double>(std::max<std::size_t>(cfg.min_size, 1)), cfg.quality.a);
        for (std::size_t c = 0; c < table.attribute_count(); ++c) {
            for (BinLabel label : {BinLabel::low, BinLabel::medium, BinLabel::high}) {
                Bitset b(table.row_count());
                const auto column = table.column(c);
                for (std::size_t r = 0; r < column.size(); ++r) {
                    if (column[r] == label) b.set(r);
                }
                if (b.count() >= cfg.min_size && b.count() > 0) vocab_.push_back({c, label, std::move(b)});
            }
        }
    }

    double population_mean() const { return t0_; }

    std::vector<Candidate> run() {
        const unsigned workers = std::max(1u, std::min<unsigned>(cfg_.threads, static_cast<unsigned>(vocab_.size())));
        std::vector<TopK> locals(workers, TopK(cfg_.top_k));
        std::atomic<std::size_t> next{0};
        auto body = [&](unsigned w) {
            std::vector<Bitset> scratch(cfg_.max_depth + 1);
            std::vector<std::size_t> path;
            for (;;) {
                const std::size_t root = next.fetch_add(1);
                if (root >= vocab_.size()) return;
                path.assign(1, root);
                visit(vocab_[root].cover, path, scratch, locals[w]);
            }
        };
        if (workers == 1) {
            body(0);
        } else {
            std::vector<std::thread> pool;
            for (unsigned w = 1; w < workers; ++w) pool.emplace_back(body, w);
            body(0);
            for (auto& t : pool) t.join();
        }
        TopK merged(cfg_.top_k);
        for (auto& local : locals) {
            for (auto& c : local.items()) merged.offer(std::move(c));
        }
        return std::move(merged.items());
    }

    SubgroupResult materialize(const Candidate& c) const {
        std::vector<Selector> sels;
        Bitset cover(table_.row_count(), true);
        for (std::size_t v : c.path) {
            sels.push_back({table_.attributes[vocab_[v].attribute], vocab_[v].label});
            cover &= vocab_[v].cover;
        }
        return {Pattern(std::move(sels)), c.size, c.mean, t0_, c.quality, cover.indices()};
    }

private:
    void visit(const Bitset& cover, std::vector<std::size_t>& path, std::vector<Bitset>& scratch, TopK& top) {
        const std::size_t n = cover.count();
        if (n < cfg_.min_size || n == 0) return;
        double sum = 0.0;
        double best = -std::numeric_limits<double>::infinity();
        const bool high = cfg_.direction == Direction::high;
        cover.for_each([&](std::size_t i) {
            sum += targets_[i];
            best = std::max(best, high ? targets_[i] - t0_ : t0_ - targets_[i]);
        });
        const double mean = sum / static_cast<double>(n);
        const double q = quality(n, mean, t0_, cfg_.quality, cfg_.direction);
        if (top.may_enter(q, n)) {
            Candidate c;
            c.path = path;
            for (std::size_t v : path) c.key.push_back(Selector{table_.attributes[vocab_[v].attribute], vocab_[v].label}.render());
            std::sort(c.key.begin(), c.key.end());
            c.size = n;
            c.mean = mean;
            c.quality = q;
            top.offer(std::move(c));
        }
        if (path.size() >= cfg_.max_depth) return;
        if (cfg_.pruning && top.full()) {
            const double bound = best >= 0.0 ? std::pow(static_cast<double>(n), cfg_.quality.a) * best
                                             : min_size_factor_ * best;
            const double worst = top.worst_quality();
            if (bound + 1e-9 * (1.0 + std::abs(bound)) < worst) return;
        }
        Bitset& child = scratch[path.size()];
        const std::size_t last_attr = vocab_[path.back()].attribute;
        for (std::size_t v = path.back() + 1; v < vocab_.size(); ++v) {
            if (vocab_[v].attribute == last_attr) continue;
            Bitset::intersect(cover, vocab_[v].cover, child);
            path.push_back(v);
            visit(child, path, scratch, top);
            path.pop_back();
        }
    }

    const NominalTable& table_;
    std::span<const double> targets_;
    const SearchConfig& cfg_;
    double t0_ = 0.0;
    double min_size_factor_ = 1.0;
    std::vector<VocabEntry> vocab_;
};

void validate(const SearchConfig& cfg) {
    if (cfg.min_size < 1) throw std::invalid_argument("min_size must be >= 1");
    if (cfg.max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
    if (cfg.top_k < 1) throw std::invalid_argument("top_k must be >= 1");
    if (!(cfg.quality.a >= 0.0 && cfg.quality.a <= 1.0)) throw std::invalid_argument("quality exponent must lie in [0, 1]");
}

}  // namespace

std::vector<SubgroupResult> discover(const NominalTable& table, std::span<const double> targets, const SearchConfig& cfg) {
    validate(cfg);
    if (table.attribute_count() == 0) throw std::invalid_argument("empty attribute vocabulary");
    if (targets.size() != table.row_count()) {
        throw std::invalid_argument("target has " + std::to_string(targets.size()) + " values for " +
                                    std::to_string(table.row_count()) + " rows");
    }
    if (targets.empty()) return {};
    Search search(table, targets, cfg);
    const auto best = search.run();
    std::vector<SubgroupResult> out;
    out.reserve(best.size());
    for (const auto& c : best) out.push_back(search.materialize(c));
    return out;
}

std::vector<SubgroupResult> discover(const NominalTable& table, const TargetVector& target, const SearchConfig& cfg) {
    std::map<RowKey, double> by_key;
    for (std::size_t i = 0; i < target.rows.size(); ++i) by_key.emplace(target.rows[i], target.values[i]);
    if (by_key.size() != table.row_count()) {
        throw std::invalid_argument("mismatched row keys: table has " + std::to_string(table.row_count()) +
                                    " rows, target has " + std::to_string(by_key.size()));
    }
    std::vector<double> aligned;
    aligned.reserve(table.row_count());
    for (const auto& key : table.rows) {
        auto it = by_key.find(key);
        if (it == by_key.end()) {
            throw std::invalid_argument("mismatched row keys: no target for (" + key.recording_id + ", " +
                                        std::to_string(key.slice_index) + ")");
        }
        aligned.push_back(it->second);
    }
    return discover(table, aligned, cfg);
}

}  // namespace lexd
