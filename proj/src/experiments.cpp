#include "mtest/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "mtest/error.hpp"
#include "mtest/parallel.hpp"
#include "mtest/random.hpp"
#include "mtest/reference_tests.hpp"

namespace mtest {

namespace {

std::uint64_t bits(double x) noexcept { return std::bit_cast<std::uint64_t>(x); }

std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

std::string format_grid_value(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

std::string variant_column(const PowerGrid& g) {
    const auto d = parse_test_descriptor(g.test_id);
    if (!d || d->kind != TestDescriptor::Kind::MTest) return "none";
    return std::string(to_string(d->variant));
}

}  // namespace

void PowerScenario::validate() const {
    if (n_grid.empty() || sigma2_grid.empty()) throw std::invalid_argument("scenario grids must be nonempty");
    if (!std::is_sorted(n_grid.begin(), n_grid.end()) ||
        std::adjacent_find(n_grid.begin(), n_grid.end()) != n_grid.end()) {
        throw std::invalid_argument("n_grid must be strictly ascending");
    }
    if (n_grid.front() < 2) throw std::invalid_argument("n_grid entries must be at least 2");
    for (double s : sigma2_grid) {
        if (!(s > 0.0)) throw std::invalid_argument("sigma2_grid entries must be positive");
    }
    if (reps < 100) throw std::invalid_argument("reps must be at least 100");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
    if (average_n_lo >= average_n_hi) throw std::invalid_argument("average_n_lo must be below average_n_hi");
}

std::string TestDescriptor::id() const {
    switch (kind) {
        case Kind::StudentT: return "t";
        case Kind::Welch: return "welch";
        case Kind::MTest: break;
    }
    if (variant == PriorVariant::Main) {
        if (alternatives == AlternativeSet::only_h1()) return "mtest:h1";
        if (alternatives == AlternativeSet::only_h2()) return "mtest:h2";
        return "mtest:main";
    }
    std::string id = "mtest:" + std::string(to_string(variant));
    if (alternatives == AlternativeSet::only_h1()) id += ":h1";
    if (alternatives == AlternativeSet::only_h2()) id += ":h2";
    return id;
}

CalibrationKey TestDescriptor::calibration_key(std::size_t n, std::size_t n_mc_samples) const {
    return {n, n, variant, alternatives, n_mc_samples};
}

std::optional<TestDescriptor> parse_test_descriptor(std::string_view id) {
    if (id == "t") return TestDescriptor::student_t();
    if (id == "welch") return TestDescriptor::welch();
    if (!id.starts_with("mtest:")) return std::nullopt;
    id.remove_prefix(6);

    if (id == "h1") return TestDescriptor::m_test(PriorVariant::Main, AlternativeSet::only_h1());
    if (id == "h2") return TestDescriptor::m_test(PriorVariant::Main, AlternativeSet::only_h2());

    AlternativeSet alternatives = AlternativeSet::both();
    if (id.ends_with(":h1")) {
        alternatives = AlternativeSet::only_h1();
        id.remove_suffix(3);
    } else if (id.ends_with(":h2")) {
        alternatives = AlternativeSet::only_h2();
        id.remove_suffix(3);
    }
    const auto variant = parse_variant(id);
    if (!variant) return std::nullopt;
    return TestDescriptor::m_test(*variant, alternatives);
}

double rejection_rate(const TestDescriptor& test, std::size_t n, double mean_shift, double sigma2, std::size_t reps,
                      double alpha, std::uint64_t seed, std::size_t n_mc_samples, TableStore& tables,
                      const RunOptions& options) {
    double m_threshold = 0.0;
    EstimatorSettings settings;
    if (test.kind == TestDescriptor::Kind::MTest) {
        m_threshold = threshold(*tables.get(test.calibration_key(n, n_mc_samples)), alpha);
        settings.n_samples = n_mc_samples;
        settings.seed = derive_seed(seed, {tag(StreamTag::PowerEstimator), n, bits(sigma2), bits(mean_shift)});
    }

    std::vector<unsigned char> rejected(reps, 0);
    parallel_for(reps, options.workers, [&](std::size_t r) {
        RandomStream rng(derive_seed(seed, {tag(StreamTag::PowerData), n, bits(sigma2), bits(mean_shift), r}));
        std::vector<double> y1(n);
        std::vector<double> y2(n);
        for (double& v : y1) v = rng.normal();
        for (double& v : y2) v = rng.normal(mean_shift, sigma2);
        const SamplePair pair(std::move(y1), std::move(y2));

        bool reject = false;
        switch (test.kind) {
            case TestDescriptor::Kind::StudentT:
                reject = t_test(pair, alpha).reject;
                break;
            case TestDescriptor::Kind::Welch:
                reject = welch_test(pair, alpha).reject;
                break;
            case TestDescriptor::Kind::MTest:
                reject = m_statistic(pair, test.variant, settings, test.alternatives, r).m > m_threshold;
                break;
        }
        rejected[r] = reject ? 1 : 0;
    });

    std::size_t count = 0;
    for (unsigned char x : rejected) count += x;
    return static_cast<double>(count) / static_cast<double>(reps);
}

PowerGrid run_power(const PowerScenario& scenario, const TestDescriptor& test, TableStore& tables,
                    const RunOptions& options) {
    scenario.validate();
    if (test.kind == TestDescriptor::Kind::MTest) {
        // Resolve every table before simulating so a missing one fails fast.
        for (std::size_t n : scenario.n_grid) (void)tables.get(test.calibration_key(n, scenario.n_mc_samples));
    }

    PowerGrid grid;
    grid.scenario = scenario;
    grid.test_id = test.id();
    grid.type2.assign(scenario.n_grid.size(), std::vector<double>(scenario.sigma2_grid.size(), 0.0));
    for (std::size_t i = 0; i < scenario.n_grid.size(); ++i) {
        for (std::size_t j = 0; j < scenario.sigma2_grid.size(); ++j) {
            const double power = rejection_rate(test, scenario.n_grid[i], scenario.mean_shift, scenario.sigma2_grid[j],
                                                scenario.reps, scenario.alpha, scenario.seed, scenario.n_mc_samples,
                                                tables, options);
            grid.type2[i][j] = 1.0 - power;
        }
    }
    return grid;
}

Matrix diff_grid(const PowerGrid& a, const PowerGrid& b) {
    if (!(a.scenario == b.scenario)) throw ScenarioMismatch("power grids come from different scenarios");
    Matrix out = a.type2;
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t j = 0; j < out[i].size(); ++j) out[i][j] -= b.type2[i][j];
    }
    return out;
}

double trapezoid_average(const std::map<std::size_t, double>& curve, std::size_t n_lo, std::size_t n_hi) {
    if (n_lo >= n_hi) throw std::invalid_argument("trapezoid_average needs n_lo < n_hi");
    std::size_t inside = 0;
    for (const auto& [n, v] : curve) inside += (n >= n_lo && n <= n_hi) ? 1 : 0;
    if (inside < 2 || curve.empty() || curve.begin()->first > n_lo || curve.rbegin()->first < n_hi) {
        throw GridTooSparse("curve does not cover [" + std::to_string(n_lo) + ", " + std::to_string(n_hi) +
                            "] with at least two points");
    }

    auto value_at = [&](double x) {
        auto hi = curve.lower_bound(static_cast<std::size_t>(std::ceil(x)));
        if (hi->first == x || hi == curve.begin()) return hi->second;
        auto lo = std::prev(hi);
        const double t = (x - static_cast<double>(lo->first)) / static_cast<double>(hi->first - lo->first);
        return lo->second + t * (hi->second - lo->second);
    };

    // Breakpoints: the interval ends plus every grid point strictly inside.
    std::vector<std::pair<double, double>> pts;
    pts.emplace_back(static_cast<double>(n_lo), value_at(static_cast<double>(n_lo)));
    for (const auto& [n, v] : curve) {
        if (n > n_lo && n < n_hi) pts.emplace_back(static_cast<double>(n), v);
    }
    pts.emplace_back(static_cast<double>(n_hi), value_at(static_cast<double>(n_hi)));

    double integral = 0.0;
    for (std::size_t k = 1; k < pts.size(); ++k) {
        integral += 0.5 * (pts[k].second + pts[k - 1].second) * (pts[k].first - pts[k - 1].first);
    }
    return integral / static_cast<double>(n_hi - n_lo);
}

std::vector<double> averaged_difference(const PowerGrid& baseline, const PowerGrid& other) {
    const Matrix d = diff_grid(baseline, other);
    const PowerScenario& s = baseline.scenario;
    std::vector<double> out(s.sigma2_grid.size());
    for (std::size_t j = 0; j < s.sigma2_grid.size(); ++j) {
        std::map<std::size_t, double> curve;
        for (std::size_t i = 0; i < s.n_grid.size(); ++i) curve[s.n_grid[i]] = d[i][j];
        out[j] = trapezoid_average(curve, s.average_n_lo, s.average_n_hi);
    }
    return out;
}

StudyResult compare_to_t_test(const PowerScenario& scenario, const std::vector<TestDescriptor>& tests,
                              TableStore& tables, const RunOptions& options) {
    StudyResult result;
    result.baseline = run_power(scenario, TestDescriptor::student_t(), tables, options);
    for (const auto& test : tests) {
        result.grids.push_back(run_power(scenario, test, tables, options));
        result.averaged.push_back(averaged_difference(result.baseline, result.grids.back()));
    }
    return result;
}

StudyResult ablation_study(const PowerScenario& scenario, TableStore& tables, const RunOptions& options) {
    return compare_to_t_test(scenario,
                             {TestDescriptor::m_test(PriorVariant::Main, AlternativeSet::both()),
                              TestDescriptor::m_test(PriorVariant::Main, AlternativeSet::only_h1()),
                              TestDescriptor::m_test(PriorVariant::Main, AlternativeSet::only_h2())},
                             tables, options);
}

StudyResult prior_variant_study(const PowerScenario& scenario, TableStore& tables, const RunOptions& options) {
    return compare_to_t_test(scenario,
                             {TestDescriptor::m_test(PriorVariant::Main), TestDescriptor::m_test(PriorVariant::Informative),
                              TestDescriptor::m_test(PriorVariant::NonInformative)},
                             tables, options);
}

void write_power_csv(const std::filesystem::path& path, const std::vector<PowerGrid>& grids) {
    auto out = open_csv(path);
    out << "test,variant,n,sigma2,type2,reps,seed\n";
    for (const auto& g : grids) {
        const PowerScenario& s = g.scenario;
        for (std::size_t i = 0; i < s.n_grid.size(); ++i) {
            for (std::size_t j = 0; j < s.sigma2_grid.size(); ++j) {
                out << g.test_id << ',' << variant_column(g) << ',' << s.n_grid[i] << ','
                    << format_grid_value(s.sigma2_grid[j]) << ',' << format_double(g.type2[i][j]) << ',' << s.reps
                    << ',' << s.seed << '\n';
            }
        }
    }
    if (!out) throw IoError("failed writing " + path.string());
}

void write_diff_csv(const std::filesystem::path& path, const PowerGrid& baseline, const std::vector<PowerGrid>& grids) {
    auto out = open_csv(path);
    out << "baseline,test,n,sigma2,diff\n";
    for (const auto& g : grids) {
        if (g.test_id == baseline.test_id) continue;
        const Matrix d = diff_grid(baseline, g);
        const PowerScenario& s = g.scenario;
        for (std::size_t i = 0; i < s.n_grid.size(); ++i) {
            for (std::size_t j = 0; j < s.sigma2_grid.size(); ++j) {
                out << baseline.test_id << ',' << g.test_id << ',' << s.n_grid[i] << ','
                    << format_grid_value(s.sigma2_grid[j]) << ',' << format_double(d[i][j]) << '\n';
            }
        }
    }
    if (!out) throw IoError("failed writing " + path.string());
}

void write_averages_csv(const std::filesystem::path& path, const PowerGrid& baseline,
                        const std::vector<PowerGrid>& grids) {
    auto out = open_csv(path);
    // grid_points records how many n values entered each average; the n grid
    // is a subsample of the full integer range, which limits precision.
    out << "baseline,test,sigma2,avg_diff,n_lo,n_hi,grid_points\n";
    const PowerScenario& s = baseline.scenario;
    const auto grid_points = std::count_if(s.n_grid.begin(), s.n_grid.end(), [&](std::size_t n) {
        return n >= s.average_n_lo && n <= s.average_n_hi;
    });
    for (const auto& g : grids) {
        if (g.test_id == baseline.test_id) continue;
        const std::vector<double> avg = averaged_difference(baseline, g);
        for (std::size_t j = 0; j < s.sigma2_grid.size(); ++j) {
            out << baseline.test_id << ',' << g.test_id << ',' << format_grid_value(s.sigma2_grid[j]) << ','
                << format_double(avg[j]) << ',' << s.average_n_lo << ',' << s.average_n_hi << ',' << grid_points
                << '\n';
        }
    }
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace mtest
