#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mtest/estimator.hpp"
#include "mtest/models.hpp"

namespace mtest {

/// Everything that determines the null distribution of m.
struct CalibrationKey {
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    PriorVariant variant = PriorVariant::Main;
    AlternativeSet alternatives = AlternativeSet::both();
    std::size_t n_mc_samples = 1500;

    friend bool operator==(const CalibrationKey&, const CalibrationKey&) = default;
};

/// Human-readable form, e.g. "n1=10 n2=10 variant=main alternatives=H1,H2 mc=1500".
[[nodiscard]] std::string describe(const CalibrationKey& key);
/// File name used by TableStore, e.g. "table_n1-10_n2-10_main_H1H2_mc1500.json".
[[nodiscard]] std::string table_file_name(const CalibrationKey& key);

inline constexpr int kTableFormatVersion = 1;

struct CalibrationTable {
    CalibrationKey key;
    std::size_t runs = 0;
    std::vector<double> sorted_m;  ///< ascending, size == runs
    std::uint64_t generator_seed = 0;
    int format_version = kTableFormatVersion;
};

struct BuildOptions {
    unsigned workers = 0;  ///< 0 = hardware concurrency
    /// Generating distribution of the null data. m is computed on normalized
    /// data, so these only matter for invariance checks.
    double null_mean = 0.0;
    double null_sd = 1.0;
};

/// Simulate `runs` null datasets (n1 + n2 draws from one normal), compute m
/// for each and sort. Run r uses substreams derived from (seed, r), so the
/// table does not depend on the number of workers. Requires runs >= 1000.
[[nodiscard]] CalibrationTable build_table(const CalibrationKey& key, std::size_t runs, std::uint64_t seed,
                                           const BuildOptions& options = {});

/// The ceil((1 - alpha) * runs)-th order statistic. Reject H0 iff m > threshold.
[[nodiscard]] double threshold(const CalibrationTable& table, double alpha);

/// (#{m_i >= m_obs} + 1) / (runs + 1).
[[nodiscard]] double p_value(const CalibrationTable& table, double m_obs);

/// Fraction of null m values strictly above 3, 10 and 30.
[[nodiscard]] std::map<int, double> jeffreys_type1(const CalibrationTable& table);

/// Throws IoError on write failure.
void save_table(const CalibrationTable& table, const std::filesystem::path& path);
/// Throws IoError, FormatVersionMismatch or CorruptTable.
[[nodiscard]] CalibrationTable load_table(const std::filesystem::path& path);

/**
 * Directory of calibration tables with optional on-demand building.
 *
 * Thread-safe. When auto-calibration is enabled, a missing table is built
 * with `auto_runs` runs and a seed derived from `auto_seed` and the key,
 * then written to the directory (if one is set).
 */
class TableStore {
public:
    struct Options {
        std::optional<std::filesystem::path> directory;
        bool auto_calibrate = false;
        std::size_t auto_runs = 20000;
        std::uint64_t auto_seed = 1;
        unsigned workers = 0;
    };

    explicit TableStore(Options options);

    /// Throws MissingCalibration naming the key when no table is available.
    [[nodiscard]] std::shared_ptr<const CalibrationTable> get(const CalibrationKey& key);

    /// Register a table directly (for example one loaded from an explicit path).
    void add(CalibrationTable table);

    [[nodiscard]] std::uint64_t seed_for(const CalibrationKey& key) const noexcept;
    [[nodiscard]] const Options& options() const noexcept { return options_; }

private:
    Options options_;
    std::mutex mutex_;
    std::vector<std::shared_ptr<const CalibrationTable>> tables_;
};

/// Every loadable table file in a directory, sorted by file name.
[[nodiscard]] std::vector<std::pair<std::filesystem::path, CalibrationTable>> list_tables(
    const std::filesystem::path& directory);

}  // namespace mtest
