// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "lexd/dyncomp.hpp"
#include "lexd/pipeline.hpp"
#include "lexd/sd_engine.hpp"
#include "oracles.hpp"

using namespace lexd;

namespace {

// tolerances and budgets
constexpr double kAnchorTol = 1e-12;
constexpr double kProductTol = 1e-12;
constexpr double kQualityTol = 1e-3;
constexpr double kAffineRelTol = 1e-9;
constexpr double kZTol = 1e-9;
constexpr double kPlantedMinMean = 0.8;
constexpr std::size_t kPlantedMinSize = 20;
constexpr std::size_t kRandomWindows = 10000;
constexpr std::size_t kRandomTables = 120;
constexpr double kBudget1 = 1.0;
constexpr double kBudget2 = 10.0;
constexpr double kBudget5 = 60.0;
constexpr double kBudget6 = 120.0;
const char* const kPlantedPattern = "mean__longest_strike_below_mean=high AND mean__variance=low";

/// Collects failures for one criterion.
struct Check {
    std::vector<std::string> failures;

    void expect(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    void near(double got, double want, double tol, const std::string& what) {
        if (!(std::abs(got - want) <= tol)) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s: got %.17g want %.17g", what.c_str(), got, want);
            failures.push_back(buf);
        }
    }
};

using Clock = std::chrono::steady_clock;

bool report(int id, const std::string& title, double budget_s, const std::function<std::string(Check&)>& body) {
    Check c;
    const auto t0 = Clock::now();
    std::string summary;
    try {
        summary = body(c);
    } catch (const std::exception& e) {
        c.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (budget_s > 0 && secs >= budget_s) {
        c.failures.push_back("runtime " + std::to_string(secs) + " s over budget " + std::to_string(budget_s) + " s");
    }
    const bool ok = c.failures.empty();
    std::printf("%s criterion %d: %s (%.3f s)%s%s\n", ok ? "PASS" : "FAIL", id, title.c_str(), secs,
                summary.empty() ? "" : "; ", summary.c_str());
    for (std::size_t i = 0; i < c.failures.size() && i < 10; ++i) std::printf("    %s\n", c.failures[i].c_str());
    if (c.failures.size() > 10) std::printf("    ... %zu more\n", c.failures.size() - 10);
    std::fflush(stdout);
    return ok;
}

std::vector<double> alternating(std::size_t m, double lo, double hi) {
    std::vector<double> w(m);
    for (std::size_t i = 0; i < m; ++i) w[i] = i % 2 ? hi : lo;
    return w;
}

std::vector<double> random_window(std::mt19937_64& rng, std::size_t m, double lo, double hi) {
    std::vector<double> w(m);
    const int style = static_cast<int>(rng() % 3);
    std::uniform_real_distribution<double> u(lo - 0.2 * (hi - lo), hi + 0.2 * (hi - lo));
    std::uniform_int_distribution<int> level(0, 4);
    for (auto& x : w) {
        if (style == 0) x = u(rng);
        else if (style == 1) x = lo + (hi - lo) * level(rng) / 4.0;  // ties and exact extremes
        else x = std::clamp(u(rng), lo, hi);
    }
    return w;
}

NominalTable to_table(const oracle::Table& t) {
    NominalTable out;
    for (std::size_t r = 0; r < t.targets.size(); ++r) out.rows.push_back({"t", r});
    out.attributes = t.attributes;
    for (const auto& col : t.columns) {
        for (int l : col) out.cells.push_back(static_cast<BinLabel>(l));
    }
    return out;
}

std::string criterion1(Check& c) {
    const ValueDomain d{0.0, 4.0};
    for (std::size_t m : {2u, 3u, 10u, 30u}) {
        const auto f = fluctuation(std::vector<double>(m, 2.5), d);
        c.expect(f.value == 0.0, "F(constant, m=" + std::to_string(m) + ") = " + std::to_string(f.value));
        const auto a = fluctuation(alternating(m, 0.0, 4.0), d);
        c.expect(a.value == 1.0, "F(alternating, m=" + std::to_string(m) + ") = " + std::to_string(a.value));
    }
    const std::vector<double> w{0, 4, 2};
    const double got = fluctuation(w, d).value;
    c.near(got, oracle::fluctuation(w, 0.0, 4.0), kAnchorTol, "F([0,4,2]) vs literal oracle");
    c.near(got, 0.75, kAnchorTol, "F([0,4,2])");
    char buf[64];
    std::snprintf(buf, sizeof buf, "F([0,4,2]) = %.15g", got);
    return buf;
}

std::string criterion2(Check& c) {
    const ValueDomain d{0.0, 4.0};
    for (std::size_t m : {2u, 3u, 5u, 9u, 30u}) {
        std::vector<double> eq(m);
        for (std::size_t i = 0; i < m; ++i) eq[i] = 4.0 * static_cast<double>(i) / static_cast<double>(m - 1);
        const double de = distribution(eq, d).value;
        c.near(de, 1.0, kAnchorTol, "D(equidistant, m=" + std::to_string(m) + ")");
        const double dc = distribution(std::vector<double>(m, 1.3), d).value;
        c.expect(dc == 0.0, "D(constant, m=" + std::to_string(m) + ") = " + std::to_string(dc));
    }
    const std::vector<double> w{0, 0, 4};
    const double got = distribution(w, d).value;
    c.near(got, oracle::distribution(w, 0.0, 4.0), kAnchorTol, "D([0,0,4]) vs quadruple-sum oracle");
    c.near(got, 0.6, kAnchorTol, "D([0,0,4])");

    std::mt19937_64 rng(2002);
    std::size_t oracle_checked = 0;
    for (std::size_t i = 0; i < kRandomWindows; ++i) {
        const std::size_t m = 2 + rng() % 39;
        const double lo = std::uniform_real_distribution<double>(-50, 50)(rng);
        const double hi = lo + std::uniform_real_distribution<double>(0.01, 100)(rng);
        const auto x = random_window(rng, m, lo, hi);
        const double v = distribution(x, {lo, hi}).value;
        c.expect(v >= 0.0 && v <= 1.0, "D out of [0,1]: " + std::to_string(v));
        if (m <= 12) {
            c.near(v, oracle::distribution(x, lo, hi), kAnchorTol, "random D vs oracle");
            ++oracle_checked;
        }
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "D([0,0,4]) = %.15g; %zu random windows, %zu also vs oracle", got, kRandomWindows,
                  oracle_checked);
    return buf;
}

std::string criterion3(Check& c) {
    std::mt19937_64 rng(3003);
    std::size_t windows = 0;
    double worst = 0.0;
    while (windows < kRandomWindows) {
        const std::size_t m = 4 + rng() % 9;
        const std::size_t len = m + rng() % 6;
        const double lo = std::uniform_real_distribution<double>(-5, 5)(rng);
        const double hi = lo + std::uniform_real_distribution<double>(0.5, 10)(rng);
        Channel ch;
        ch.channel_id = "x";
        ch.sample_rate = 1.0;
        ch.values = random_window(rng, len, lo, hi);
        DynCompConfig cfg;
        cfg.window_m = m;
        cfg.step = 1;
        cfg.domain = ValueDomain{lo, hi};
        const auto series = dynamic_complexity_series(ch, cfg, "r");
        c.expect(series.points.size() == len - m + 1, "window count");
        for (const auto& p : series.points) {
            const std::vector<double> w(ch.values.begin() + static_cast<long>(p.window_start),
                                        ch.values.begin() + static_cast<long>(p.window_start + m));
            const double want = oracle::fluctuation(w, lo, hi) * oracle::distribution(w, lo, hi);
            worst = std::max(worst, std::abs(p.complexity - want));
            c.near(p.complexity, want, kProductTol, "complexity vs oracle F*D");
            c.expect(p.complexity == p.fluctuation * p.distribution, "complexity != F*D of its own parts");
            c.expect(p.complexity >= 0.0 && p.complexity <= 1.0, "complexity out of [0,1]");
            ++windows;
        }
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu windows, max |C - F*D| = %.3g", windows, worst);
    return buf;
}

std::string criterion4(Check& c) {
    std::mt19937_64 rng(4004);
    for (int i = 0; i < 1000; ++i) {
        const std::size_t n = 1 + rng() % 500;
        const double t0 = std::normal_distribution<double>(0, 10)(rng);
        const double a = std::uniform_real_distribution<double>(0, 1)(rng);
        c.expect(quality(n, t0, t0, {a}) == 0.0, "q(population) != 0");
        c.expect(quality(n, t0, t0, {a}, Direction::low) == 0.0, "q_low(population) != 0");
    }
    const double q = quality(21, 1.137, 0.0, {0.5});
    c.near(q, 5.2102, kQualityTol, "q_0.5(21, 1.137, 0)");

    std::size_t tables = 0;
    std::size_t swaps = 0;
    for (int trial = 0; trial < 40; ++trial) {
        auto ot = oracle::random_table(rng, 8, 150);
        SearchConfig cfg;
        cfg.min_size = 1 + rng() % 8;
        cfg.max_depth = 1 + rng() % 3;
        cfg.quality.a = (rng() % 5) / 4.0;
        const auto base = discover(to_table(ot), ot.targets, cfg);
        const double scale = std::uniform_real_distribution<double>(0.1, 20)(rng);
        const double shift = std::uniform_real_distribution<double>(-50, 50)(rng);
        const auto original = ot.targets;
        double t0 = 0.0;
        for (double v : original) t0 += v;
        t0 /= static_cast<double>(original.size());
        for (auto& v : ot.targets) v = scale * v + shift;
        const auto moved = discover(to_table(ot), ot.targets, cfg);
        c.expect(base.size() == moved.size(), "result count changed under affine transform");
        for (std::size_t i = 0; i < std::min(base.size(), moved.size()); ++i) {
            const double want = scale * base[i].quality;
            c.expect(std::abs(moved[i].quality - want) <= kAffineRelTol * (1.0 + std::abs(want)),
                     "quality not scaled by the affine factor at rank " + std::to_string(i));
            if (base[i].pattern == moved[i].pattern) {
                c.expect(base[i].coverage == moved[i].coverage, "coverage changed at rank " + std::to_string(i));
                continue;
            }
            // swaps are allowed only between subgroups with tied original quality
            double sum = 0.0;
            for (std::size_t r : moved[i].coverage) sum += original[r];
            const double q = quality(moved[i].size, sum / static_cast<double>(moved[i].size), t0, cfg.quality);
            c.expect(std::abs(q - base[i].quality) <= kAffineRelTol * (1.0 + std::abs(base[i].quality)),
                     "rank " + std::to_string(i) + " changed under affine transform without a tie");
            ++swaps;
        }
        ++tables;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "q = %.6f; ranking invariant on %zu tables (%zu swaps among exact ties)", q, tables,
                  swaps);
    return buf;
}

bool identical(const std::vector<SubgroupResult>& got, const std::vector<oracle::Found>& ref) {
    if (got.size() != ref.size()) return false;
    for (std::size_t i = 0; i < got.size(); ++i) {
        if (got[i].pattern.rendered_selectors() != ref[i].selectors || got[i].size != ref[i].size ||
            got[i].coverage != ref[i].rows || got[i].quality != ref[i].quality ||
            got[i].subgroup_mean != ref[i].mean) {
            return false;
        }
    }
    return true;
}

std::string criterion5(Check& c) {
    std::mt19937_64 rng(5005);
    std::size_t results = 0;
    for (std::size_t trial = 0; trial < kRandomTables; ++trial) {
        const auto ot = oracle::random_table(rng, 12, 200);
        const auto table = to_table(ot);
        SearchConfig cfg;
        cfg.min_size = 1 + rng() % 15;
        cfg.max_depth = 1 + rng() % 3;
        cfg.top_k = 1 + rng() % 40;
        cfg.quality.a = (rng() % 5) / 4.0;
        cfg.direction = rng() % 4 == 0 ? Direction::low : Direction::high;
        const auto ref = oracle::enumerate(ot, cfg.min_size, cfg.max_depth, cfg.top_k, cfg.quality.a,
                                           cfg.direction == Direction::high);
        cfg.pruning = true;
        cfg.threads = 1;
        const auto pruned = discover(table, ot.targets, cfg);
        cfg.pruning = false;
        const auto full = discover(table, ot.targets, cfg);
        cfg.pruning = true;
        cfg.threads = 4;
        const auto threaded = discover(table, ot.targets, cfg);
        const std::string tag = "table " + std::to_string(trial);
        c.expect(identical(pruned, ref), tag + ": differs from exhaustive enumeration");
        c.expect(full == pruned, tag + ": pruning changed the result");
        c.expect(threaded == pruned, tag + ": 4 threads differ from 1");
        results += ref.size();
    }
    return std::to_string(kRandomTables) + " tables, " + std::to_string(results) + " ranked subgroups compared";
}

std::string criterion6(Check& c) {
    fixture::TempDir dir("accept6");
    fixture::write_corpus(dir / "corpus.csv");
    auto cfg = fixture::small_config(dir / "corpus.csv");
    cfg.lags = {1};
    cfg.search.min_size = kPlantedMinSize;
    const auto result = run_pipeline(cfg);
    const auto* lag = result.find_lag(1);
    c.expect(lag != nullptr && !lag->subgroups.empty(), "no lag-1 subgroups");
    if (!lag || lag->subgroups.empty()) return {};
    const auto& top = lag->subgroups.front();
    c.expect(top.pattern.render() == kPlantedPattern, "top-1 is '" + top.pattern.render() + "'");
    c.expect(top.size >= kPlantedMinSize, "size " + std::to_string(top.size));
    c.expect(top.subgroup_mean >= kPlantedMinMean, "subgroup mean z " + std::to_string(top.subgroup_mean));
    char buf[256];
    std::snprintf(buf, sizeof buf, "top-1 '%s', n=%zu of %zu, mean z=%.3f, q=%.3f", top.pattern.render().c_str(),
                  top.size, lag->population.instance_count, top.subgroup_mean, top.quality);
    return buf;
}

std::string criterion7(Check& c) {
    std::mt19937_64 rng(7007);
    std::size_t runs = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<DcSeries> series;
        std::vector<SliceLayout> layouts;
        NominalTable table;
        table.attributes = {"x"};
        std::map<std::string, std::size_t> counts;
        const std::size_t recs = 1 + rng() % 5;
        std::size_t min_count = 1000;
        for (std::size_t r = 0; r < recs; ++r) {
            const std::string id = "rec" + std::to_string(r);
            const std::size_t slices = 2 + rng() % 12;
            min_count = std::min(min_count, slices);
            counts[id] = slices;
            const double slice_seconds = 5.0 + static_cast<double>(rng() % 20);
            DcSeries s;
            s.recording_id = id;
            s.sample_rate = 1.0;
            const auto total = static_cast<std::size_t>(slice_seconds) * slices;
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (std::size_t i = 0; i < total; ++i) {
                const double v = u(rng);
                s.points.push_back({i, static_cast<double>(i), v, 1.0, v});
            }
            series.push_back(std::move(s));
            layouts.push_back({id, slices, slice_seconds});
            for (std::size_t i = 0; i < slices; ++i) {
                table.rows.push_back({id, i});
                table.cells.push_back(static_cast<BinLabel>(rng() % 3));
            }
        }
        const auto t = slice_targets(series, layouts, TargetKind::mean_z);
        c.expect(!t.degenerate, "random input flagged degenerate");
        double mu = 0.0;
        for (double v : t.values) mu += v;
        mu /= static_cast<double>(t.values.size());
        double ss = 0.0;
        for (double v : t.values) ss += (v - mu) * (v - mu);
        const double sigma = std::sqrt(ss / static_cast<double>(t.values.size()));
        c.expect(std::abs(mu) <= kZTol, "|mu| = " + std::to_string(std::abs(mu)));
        c.expect(std::abs(sigma - 1.0) <= kZTol, "|sigma - 1| = " + std::to_string(std::abs(sigma - 1.0)));

        for (std::size_t lag = 0; lag < min_count; ++lag) {
            const auto li = apply_lag(table, t, lag);
            std::map<std::string, std::size_t> kept;
            for (const auto& row : li.table.rows) ++kept[row.recording_id];
            for (const auto& [id, n] : counts) {
                c.expect(kept[id] == n - lag, id + ": lag " + std::to_string(lag) + " kept " +
                                                  std::to_string(kept[id]) + " of " + std::to_string(n));
            }
            for (std::size_t i = 0; i < li.table.row_count(); ++i) {
                c.expect(li.target_rows[i].recording_id == li.table.rows[i].recording_id &&
                             li.target_rows[i].slice_index == li.table.rows[i].slice_index + lag,
                         "misaligned lag row");
            }
            ++runs;
        }
    }
    return "200 corpora, " + std::to_string(runs) + " lag alignments";
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string criterion8(Check& c) {
    fixture::TempDir dir("accept8");
    fixture::write_corpus(dir / "corpus.csv");
    auto cfg = fixture::small_config(dir / "corpus.csv");
    const auto a = run_pipeline(cfg);
    cfg.search.threads = 3;
    const auto b = run_pipeline(cfg);
    c.expect(a.run_id == b.run_id, "run ids differ");
    export_run(a, ExportFormat::document, dir / "a");
    export_run(b, ExportFormat::document, dir / "b");
    const auto da = read_file(dir / "a" / "result.json");
    const auto db = read_file(dir / "b" / "result.json");
    c.expect(!da.empty() && da == db, "result documents differ");
    return "run " + a.run_id.substr(0, 12) + ", " + std::to_string(da.size()) + " identical bytes";
}

}  // namespace

int main() {
    bool ok = true;
    ok &= report(1, "fluctuation bounds and anchors", kBudget1, criterion1);
    ok &= report(2, "distribution bounds and anchors", kBudget2, criterion2);
    ok &= report(3, "dynamic complexity equals F*D", 0, criterion3);
    ok &= report(4, "quality function", 0, criterion4);
    ok &= report(5, "search equals exhaustive enumeration", kBudget5, criterion5);
    ok &= report(6, "planted lag-1 pattern end to end", kBudget6, criterion6);
    ok &= report(7, "z-target normalization and lag alignment", 0, criterion7);
    ok &= report(8, "reproducible result documents", 0, criterion8);
    std::printf("%s\n", ok ? "ALL PASS" : "SOME CRITERIA FAILED");
    return ok ? 0 : 1;
}
