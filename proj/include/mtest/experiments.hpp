#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtest/calibration.hpp"
#include "mtest/estimator.hpp"

namespace mtest {

/// Grid of equal-size two-group experiments: group 1 ~ Normal(0, 1),
/// group 2 ~ Normal(mean_shift, sigma2^2), n points each.
struct PowerScenario {
    std::vector<std::size_t> n_grid{3, 4, 5, 10, 20, 50, 100};
    std::vector<double> sigma2_grid{0.25, 0.5, 1.0, 1.5, 2.0};
    double mean_shift = 1.0;
    std::size_t reps = 5000;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    std::size_t n_mc_samples = 1500;
    /// Range of n for trapezoid averages.
    std::size_t average_n_lo = 3;
    std::size_t average_n_hi = 50;

    /// Throws std::invalid_argument on empty or unsorted grids, reps < 100, alpha outside (0, 1).
    void validate() const;
    friend bool operator==(const PowerScenario&, const PowerScenario&) = default;
};

/// A test applied in power experiments.
struct TestDescriptor {
    enum class Kind { StudentT, Welch, MTest };

    Kind kind = Kind::StudentT;
    PriorVariant variant = PriorVariant::Main;
    AlternativeSet alternatives = AlternativeSet::both();

    /// t, welch, mtest:main, mtest:h1, mtest:h2, mtest:informative, mtest:noninformative
    [[nodiscard]] std::string id() const;
    [[nodiscard]] CalibrationKey calibration_key(std::size_t n, std::size_t n_mc_samples) const;

    static TestDescriptor student_t() { return {Kind::StudentT, PriorVariant::Main, AlternativeSet::both()}; }
    static TestDescriptor welch() { return {Kind::Welch, PriorVariant::Main, AlternativeSet::both()}; }
    static TestDescriptor m_test(PriorVariant v = PriorVariant::Main, AlternativeSet a = AlternativeSet::both()) {
        return {Kind::MTest, v, a};
    }
};

[[nodiscard]] std::optional<TestDescriptor> parse_test_descriptor(std::string_view id);

using Matrix = std::vector<std::vector<double>>;

struct PowerGrid {
    PowerScenario scenario;
    std::string test_id;
    Matrix type2;  ///< type2[i][j] for n_grid[i], sigma2_grid[j]
};

struct RunOptions {
    unsigned workers = 0;
};

/// Fraction of `reps` replicates in which the test rejects H0 for one grid
/// cell. Replicate data depends only on (seed, n, sigma2, mean_shift, r), so
/// every test sees the same datasets.
[[nodiscard]] double rejection_rate(const TestDescriptor& test, std::size_t n, double mean_shift, double sigma2,
                                    std::size_t reps, double alpha, std::uint64_t seed, std::size_t n_mc_samples,
                                    TableStore& tables, const RunOptions& options = {});

/// Type II error over the scenario grid. m-test descriptors need a table for
/// every (n, n) in n_grid; throws MissingCalibration otherwise.
[[nodiscard]] PowerGrid run_power(const PowerScenario& scenario, const TestDescriptor& test, TableStore& tables,
                                  const RunOptions& options = {});

/// Elementwise a.type2 - b.type2. Positive entries mean b is more powerful.
/// Throws ScenarioMismatch when the grids differ.
[[nodiscard]] Matrix diff_grid(const PowerGrid& a, const PowerGrid& b);

/// Trapezoid integral of the piecewise-linear interpolant of `curve` over
/// [n_lo, n_hi], divided by the interval length. Throws GridTooSparse when
/// fewer than two points fall in the range or the range is not covered.
[[nodiscard]] double trapezoid_average(const std::map<std::size_t, double>& curve, std::size_t n_lo,
                                       std::size_t n_hi);

/// Per-sigma2 trapezoid average of (baseline - other) over n.
[[nodiscard]] std::vector<double> averaged_difference(const PowerGrid& baseline, const PowerGrid& other);

struct StudyResult {
    PowerGrid baseline;               ///< t-test
    std::vector<PowerGrid> grids;     ///< one per compared test
    Matrix averaged;                  ///< averaged[k][j]: grids[k] vs baseline at sigma2_grid[j]
};

/// Compare a set of tests against the t-test.
[[nodiscard]] StudyResult compare_to_t_test(const PowerScenario& scenario, const std::vector<TestDescriptor>& tests,
                                            TableStore& tables, const RunOptions& options = {});

/// m-test with both alternatives, H1 only and H2 only (Main priors).
[[nodiscard]] StudyResult ablation_study(const PowerScenario& scenario, TableStore& tables,
                                         const RunOptions& options = {});

/// m-test with Main, Informative and NonInformative priors, each at its own threshold.
[[nodiscard]] StudyResult prior_variant_study(const PowerScenario& scenario, TableStore& tables,
                                              const RunOptions& options = {});

/// Tidy CSV outputs.
void write_power_csv(const std::filesystem::path& path, const std::vector<PowerGrid>& grids);
void write_diff_csv(const std::filesystem::path& path, const PowerGrid& baseline, const std::vector<PowerGrid>& grids);
void write_averages_csv(const std::filesystem::path& path, const PowerGrid& baseline,
                        const std::vector<PowerGrid>& grids);

}  // namespace mtest
