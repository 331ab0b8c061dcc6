// Acceptance suite: one PASS/FAIL line per criterion.
//
// Calibration tables (20,000 null runs each) are cached under --table-cache,
// so only the first run pays for building them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli/cli.hpp"
#include "mtest/calibration.hpp"
#include "mtest/estimator.hpp"
#include "mtest/experiments.hpp"
#include "mtest/reference_tests.hpp"
#include "oracles.hpp"

using namespace mtest;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kTableRuns = 20000;
constexpr std::uint64_t kTableSeed = 1;
constexpr std::size_t kPowerReps = 5000;
constexpr std::uint64_t kPowerSeed = 2;
constexpr std::uint64_t kNullSeed = 3;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

struct Context {
    fs::path cache;
    unsigned workers = 0;
    std::unique_ptr<TableStore> tables;
    std::optional<PowerGrid> t_grid, welch_grid, main_grid, h1_grid, h2_grid;

    const CalibrationTable& table(std::size_t n, PriorVariant v, AlternativeSet a = AlternativeSet::both()) {
        return *tables->get({n, n, v, a, 1500});
    }

    PowerGrid& grid(std::optional<PowerGrid>& slot, const TestDescriptor& d) {
        if (!slot) {
            PowerScenario s;
            s.reps = kPowerReps;
            s.seed = kPowerSeed;
            slot = run_power(s, d, *tables, {.workers = workers});
        }
        return *slot;
    }
};

bool within(double value, double target, double rel) { return std::fabs(value - target) <= rel * target; }

// 1. Main thresholds at N1 = N2 in {3, 5, 10, 50}.
Outcome table1_thresholds(Context& c) {
    const std::map<std::size_t, double> reference{{3, 19.8}, {5, 13.7}, {10, 10.2}, {50, 7.8}};
    Outcome o{true, ""};
    for (auto [n, target] : reference) {
        const double th = threshold(c.table(n, PriorVariant::Main), 0.05);
        const bool ok = within(th, target, 0.15);
        o.pass = o.pass && ok;
        o.detail += "N=" + std::to_string(n) + " " + fmt("%.2f", th) + " (" + fmt("%.1f", target) + "±15%)" +
                    (ok ? "" : " X") + "  ";
    }
    return o;
}

// 2. Jeffreys Type I at N = 10.
Outcome table1_jeffreys(Context& c) {
    const auto j = jeffreys_type1(c.table(10, PriorVariant::Main));
    const std::map<int, double> reference{{3, 0.16}, {10, 0.05}, {30, 0.02}};
    Outcome o{true, ""};
    for (auto [k, target] : reference) {
        const bool ok = std::fabs(j.at(k) - target) <= 0.015;
        o.pass = o.pass && ok;
        o.detail += "m>" + std::to_string(k) + " " + fmt("%.4f", j.at(k)) + " (" + fmt("%.2f", target) + "±0.015)" +
                    (ok ? "" : " X") + "  ";
    }
    return o;
}

// 3. Thresholds of the alternative prior variants.
Outcome table2_thresholds(Context& c) {
    struct Case {
        PriorVariant v;
        std::size_t n;
        double target;
        double rel;
    };
    const Case cases[] = {{PriorVariant::Informative, 3, 66.2, 0.20},
                          {PriorVariant::NonInformative, 3, 7.7, 0.15},
                          {PriorVariant::NonInformative, 50, 1.6, 0.20}};
    Outcome o{true, ""};
    for (const auto& k : cases) {
        const double th = threshold(c.table(k.n, k.v), 0.05);
        const bool ok = within(th, k.target, k.rel);
        o.pass = o.pass && ok;
        o.detail += std::string(to_string(k.v)) + " N=" + std::to_string(k.n) + " " + fmt("%.2f", th) + " (" +
                    fmt("%.1f", k.target) + "±" + fmt("%.0f", k.rel * 100) + "%)" + (ok ? "" : " X") + "  ";
    }
    return o;
}

// 4. Largest t minus m Type II difference, at some sigma2 != 1.
Outcome improvement(Context& c) {
    const auto& t = c.grid(c.t_grid, TestDescriptor::student_t());
    const auto& m = c.grid(c.main_grid, TestDescriptor::m_test());
    const auto d = diff_grid(t, m);
    double best = -1.0;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < d.size(); ++i)
        for (std::size_t j = 0; j < d[i].size(); ++j)
            if (t.scenario.sigma2_grid[j] != 1.0 && d[i][j] > best) {
                best = d[i][j];
                bi = i;
                bj = j;
            }
    return {best >= 0.10, "max (t - m) at sigma2 != 1: " + fmt("%.4f", best) + " at n=" +
                              std::to_string(t.scenario.n_grid[bi]) + " sigma2=" + fmt("%g", t.scenario.sigma2_grid[bj]) +
                              " (need >= 0.10)"};
}

// 5. At equal variances m loses at most 0.02 against t.
Outcome equal_variance_penalty(Context& c) {
    const auto& t = c.grid(c.t_grid, TestDescriptor::student_t());
    const auto& m = c.grid(c.main_grid, TestDescriptor::m_test());
    std::size_t j1 = 0;
    while (t.scenario.sigma2_grid[j1] != 1.0) ++j1;
    double worst = -1.0;
    std::size_t wi = 0;
    for (std::size_t i = 0; i < t.scenario.n_grid.size(); ++i) {
        const double excess = m.type2[i][j1] - t.type2[i][j1];
        if (excess > worst) {
            worst = excess;
            wi = i;
        }
    }
    return {worst <= 0.02, "max (m - t) at sigma2 = 1: " + fmt("%.4f", worst) + " at n=" +
                               std::to_string(t.scenario.n_grid[wi]) + " (need <= 0.02)"};
}

// 6. Averaged t minus Welch difference in [-0.05, 0] at every sigma2.
Outcome welch(Context& c) {
    const auto& t = c.grid(c.t_grid, TestDescriptor::student_t());
    const auto& w = c.grid(c.welch_grid, TestDescriptor::welch());
    const auto avg = averaged_difference(t, w);
    Outcome o{true, "avg (t - welch):"};
    for (std::size_t j = 0; j < avg.size(); ++j) {
        const bool ok = avg[j] <= 0.0 && avg[j] >= -0.05;
        o.pass = o.pass && ok;
        o.detail += " " + fmt("%g", t.scenario.sigma2_grid[j]) + ":" + fmt("%.4f", avg[j]) + (ok ? "" : " X");
    }
    return o;
}

// 7. Ablation orderings.
Outcome ablation(Context& c) {
    const auto& t = c.grid(c.t_grid, TestDescriptor::student_t());
    const auto& both = c.grid(c.main_grid, TestDescriptor::m_test());
    const auto& h1 = c.grid(c.h1_grid, TestDescriptor::m_test(PriorVariant::Main, AlternativeSet::only_h1()));
    const auto& h2 = c.grid(c.h2_grid, TestDescriptor::m_test(PriorVariant::Main, AlternativeSet::only_h2()));
    const auto ab = averaged_difference(t, both);
    const auto a1 = averaged_difference(t, h1);
    const auto a2 = averaged_difference(t, h2);
    const auto& sg = t.scenario.sigma2_grid;
    auto at = [&](double s) {
        for (std::size_t j = 0; j < sg.size(); ++j)
            if (sg[j] == s) return j;
        throw std::logic_error("sigma2 not in grid");
    };
    Outcome o{true, ""};
    auto check = [&](bool ok, const std::string& what) {
        o.pass = o.pass && ok;
        o.detail += what + (ok ? " ok  " : " X  ");
    };
    const std::size_t j1 = at(1.0), jlo = at(0.25), jhi = at(2.0);
    check(a1[j1] > a2[j1], "H1>H2@1 (" + fmt("%.4f", a1[j1]) + " vs " + fmt("%.4f", a2[j1]) + ")");
    check(a2[jlo] > a1[jlo], "H2>H1@0.25 (" + fmt("%.4f", a2[jlo]) + " vs " + fmt("%.4f", a1[jlo]) + ")");
    check(a2[jhi] > a1[jhi], "H2>H1@2 (" + fmt("%.4f", a2[jhi]) + " vs " + fmt("%.4f", a1[jhi]) + ")");
    double worst = 1e9;
    for (std::size_t j = 0; j < sg.size(); ++j) worst = std::min(worst, ab[j] - (std::min(a1[j], a2[j]) - 0.02));
    check(worst >= 0.0, "both>=min-0.02 (slack " + fmt("%.4f", worst) + ")");
    return o;
}

// 8. Null rejection rate of every descriptor on fresh null data.
Outcome type1(Context& c) {
    const std::vector<TestDescriptor> tests{TestDescriptor::m_test(),
                                            TestDescriptor::m_test(PriorVariant::Main, AlternativeSet::only_h1()),
                                            TestDescriptor::m_test(PriorVariant::Main, AlternativeSet::only_h2()),
                                            TestDescriptor::m_test(PriorVariant::Informative),
                                            TestDescriptor::m_test(PriorVariant::NonInformative),
                                            TestDescriptor::student_t(),
                                            TestDescriptor::welch()};
    const double tol = 3.0 * std::sqrt(0.05 * 0.95 / kPowerReps);
    Outcome o{true, "tol ±" + fmt("%.4f", tol) + ":"};
    double worst = 0.0;
    std::string worst_at;
    for (std::size_t n : {5, 10, 20}) {
        for (const auto& d : tests) {
            const double rate = rejection_rate(d, n, 0.0, 1.0, kPowerReps, 0.05, kNullSeed, 1500, *c.tables,
                                               {.workers = c.workers});
            const double dev = std::fabs(rate - 0.05);
            if (dev > tol) {
                o.pass = false;
                o.detail += " " + d.id() + "@" + std::to_string(n) + "=" + fmt("%.4f", rate) + " X";
            }
            if (dev >= worst) {
                worst = dev;
                worst_at = d.id() + "@" + std::to_string(n) + "=" + fmt("%.4f", rate);
            }
        }
    }
    o.detail += " worst " + worst_at;
    return o;
}

// 9. PriorMC against grid quadrature, harmonic mean against PriorMC.
Outcome estimator_oracle(Context&) {
    const std::vector<NormalizedSamplePair> suite{normalize(SamplePair({-0.5, 0.5}, {-0.5, 0.5})),
                                                  normalize(SamplePair({0.0, 2.0, 1.0}, {4.0, 6.0, 3.0}))};
    double mc_err = 0.0, hm_err = 0.0;
    std::string hm_worst;
    for (const auto& d : suite) {
        for (auto v : {PriorVariant::Main, PriorVariant::Informative, PriorVariant::NonInformative}) {
            for (auto h : {HypothesisId::H0, HypothesisId::H1, HypothesisId::H2}) {
                const auto spec = build_prior(h, v, d);
                auto mp = [&](int k) { return oracle::MeanPrior{spec.means[k].center, spec.means[k].variance}; };
                auto sp = [&](int k) { return oracle::SigmaPrior{spec.sigmas[k].lo, spec.sigmas[k].hi}; };
                const auto pooled = d.pooled();
                const double truth = h == HypothesisId::H0   ? oracle::marginal_h0(pooled, mp(0), sp(0))
                                     : h == HypothesisId::H1 ? oracle::marginal_h1(d.y1(), d.y2(), mp(0), mp(1), sp(0))
                                                             : oracle::marginal_h2(d.y1(), d.y2(), mp(0), mp(1), sp(0), sp(1));
                EstimatorSettings s;
                s.n_samples = 50000;
                s.seed = 9;
                const double mc = std::exp(log_marginal(h, spec, d, s));
                s.method = EstimatorMethod::PosteriorHarmonicMean;
                const double hm = std::exp(log_marginal_harmonic(h, spec, d, s));
                mc_err = std::max(mc_err, std::fabs(mc / truth - 1.0));
                const double e = std::fabs(hm / mc - 1.0);
                if (e > hm_err) {
                    hm_err = e;
                    hm_worst = std::string(to_string(v)) + "/" + std::string(to_string(h));
                }
            }
        }
    }
    return {mc_err <= 0.02 && hm_err <= 0.10, "PriorMC vs grid max rel err " + fmt("%.4f", mc_err) +
                                                  " (need <= 0.02); harmonic vs PriorMC max rel err " +
                                                  fmt("%.4f", hm_err) + " at " + hm_worst + " (need <= 0.10)"};
}

// 10. Student-t CDF against quadrature on 50 points.
Outcome t_cdf(Context&) {
    const double dfs[] = {1.0, 2.0, 10.0, 100.0, 4.5};
    const double xs[] = {-12.0, -3.3, -1.7, -0.6, -0.05, 0.2, 0.95, 2.0, 4.4, 25.0};
    double worst = 0.0;
    for (double df : dfs)
        for (double x : xs) worst = std::max(worst, std::fabs(student_t_cdf(x, df) - oracle::t_cdf_quadrature(x, df)));
    return {worst < 1e-8, "50 (x, df) pairs, max abs err " + fmt("%.3g", worst) + " (need < 1e-8)"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// 11. calibrate and power outputs identical under 1, 4 and 8 workers.
Outcome determinism(Context& c) {
    const fs::path root = c.cache / "determinism";
    fs::remove_all(root);
    fs::create_directories(root);
    {
        std::ofstream(root / "scenario.conf") << "n_grid = 3, 5\nsigma2_grid = 0.5, 1\nreps = 300\nseed = 11\n"
                                                 "average_n_lo = 3\naverage_n_hi = 5\n";
    }
    std::map<std::string, std::set<std::string>> variants;
    bool all_ok = true;
    // Same paths every time, so printed paths match; directories are wiped between runs.
    const fs::path dir = root / "run";
    for (const char* w : {"1", "4", "8"}) {
        fs::remove_all(dir);
        fs::create_directories(dir);
        std::ostringstream out, err;
        int code = cli::run({"calibrate", "--n1", "4", "--n2", "4", "--runs", "1000", "--seed", "5", "--workers", w,
                             "--out", (dir / "table.json").string()},
                            out, err);
        variants["calibrate stdout"].insert(out.str());
        variants["table.json"].insert(slurp(dir / "table.json"));
        all_ok = all_ok && code == 0;

        std::ostringstream pout, perr;
        code = cli::run({"power", "--scenario", (root / "scenario.conf").string(), "--tests", "t,welch,mtest:main",
                         "--table-dir", (dir / "tables").string(), "--auto-calibrate", "--calibration-runs", "1000",
                         "--workers", w, "--out", (dir / "power").string()},
                        pout, perr);
        all_ok = all_ok && code == 0;
        variants["power stdout"].insert(pout.str());
        for (const char* f : {"power.csv", "diff.csv", "averages.csv"}) variants[f].insert(slurp(dir / "power" / f));
        for (const auto& [path, table] : list_tables(dir / "tables")) {
            variants["auto-built " + path.filename().string()].insert(slurp(path));
        }
    }
    Outcome o{all_ok, all_ok ? "" : "a command failed; "};
    for (const auto& [name, set] : variants) {
        o.pass = o.pass && set.size() == 1;
        o.detail += name + (set.size() == 1 ? " identical  " : " DIFFERS  ");
    }
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"m-test acceptance suite"};
    std::string cache = "acceptance_tables";
    unsigned workers = 0;
    std::vector<int> only;
    app.add_option("--table-cache", cache, "Directory for cached calibration tables");
    app.add_option("--workers", workers, "Worker threads (0 = all cores)");
    app.add_option("--only", only, "Run only these criteria")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    Context ctx;
    ctx.cache = fs::path(cache);
    ctx.workers = workers;
    // The subdirectory pins run count and seed so stale tables are never reused.
    ctx.tables = std::make_unique<TableStore>(TableStore::Options{
        .directory = ctx.cache / ("runs" + std::to_string(kTableRuns) + "_seed" + std::to_string(kTableSeed)),
        .auto_calibrate = true,
        .auto_runs = kTableRuns,
        .auto_seed = kTableSeed,
        .workers = workers});

    const std::vector<std::pair<std::string, std::function<Outcome(Context&)>>> criteria{
        {"Main thresholds at alpha = 0.05", table1_thresholds},
        {"Jeffreys-scale Type I at N = 10", table1_jeffreys},
        {"Informative / NonInformative thresholds", table2_thresholds},
        {"m-test improvement over t-test", improvement},
        {"equal-variance penalty", equal_variance_penalty},
        {"Welch averaged difference", welch},
        {"ablation orderings", ablation},
        {"Type I exactness", type1},
        {"estimator oracle equivalence", estimator_oracle},
        {"Student-t CDF accuracy", t_cdf},
        {"determinism across worker counts", determinism},
    };

    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const int id = static_cast<int>(k + 1);
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[k].second(ctx);
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << criteria[k].first << ": " << o.detail
                  << " [" << fmt("%.0f", secs) << "s]" << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << '\n';
    return failures == 0 ? 0 : 1;
}
