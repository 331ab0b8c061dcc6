#pragma once

#include <string>

#include "mtest/calibration.hpp"
#include "mtest/core.hpp"
#include "mtest/estimator.hpp"

namespace mtest::cli {

/// Outcome of `mtest test` on one dataset.
struct TestReport {
    SummaryStats group1;  ///< before normalization
    SummaryStats group2;
    MTestResult result;
    double alpha = 0.05;
    double threshold = 0.0;
    double p_value = 1.0;
    bool reject = false;  ///< always result.m > threshold
    CalibrationKey table_key;
    std::size_t table_runs = 0;
    std::uint64_t table_seed = 0;
    std::string tool_version;
};

/// Compute m for the data and compare it against the table at level alpha.
[[nodiscard]] TestReport make_test_report(const SamplePair& data, const MTestResult& result,
                                          const CalibrationTable& table, double alpha);

[[nodiscard]] std::string format_report(const TestReport& report);
/// Versioned JSON document.
[[nodiscard]] std::string report_to_json(const TestReport& report);

}  // namespace mtest::cli
