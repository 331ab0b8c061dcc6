#include "report.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "mtest/version.hpp"

namespace mtest::cli {

using ordered_json = nlohmann::ordered_json;

TestReport make_test_report(const SamplePair& data, const MTestResult& result, const CalibrationTable& table,
                            double alpha) {
    TestReport r;
    r.group1 = summary(data.y1());
    r.group2 = summary(data.y2());
    r.result = result;
    r.alpha = alpha;
    r.threshold = threshold(table, alpha);
    r.p_value = p_value(table, result.m);
    r.reject = result.m > r.threshold;
    r.table_key = table.key;
    r.table_runs = table.runs;
    r.table_seed = table.generator_seed;
    r.tool_version = kVersion;
    return r;
}

std::string format_report(const TestReport& r) {
    std::ostringstream os;
    os.precision(6);
    os << "m-test report (mtest " << r.tool_version << ")\n"
       << "  group 1: n=" << r.group1.n << " mean=" << r.group1.mean << " sd=" << r.group1.sd << '\n'
       << "  group 2: n=" << r.group2.n << " mean=" << r.group2.mean << " sd=" << r.group2.sd << '\n'
       << "  prior variant: " << to_string(r.result.prior_variant)
       << "  alternatives: " << to_string(r.result.alternatives) << '\n';
    for (const auto& [h, lm] : r.result.log_marginals) {
        os << "  log P(y|" << to_string(h) << ") = " << lm << '\n';
    }
    for (const auto& [h, bf] : r.result.bayes_factors) {
        os << "  Bayes factor " << to_string(h) << "/H0 = " << bf << '\n';
    }
    os << "  m = " << r.result.m << " (log m = " << r.result.log_m << ")\n"
       << "  threshold(alpha=" << r.alpha << ") = " << r.threshold << '\n'
       << "  p-value = " << r.p_value << '\n'
       << "  decision: " << (r.reject ? "reject H0" : "do not reject H0") << '\n'
       << "  table: " << describe(r.table_key) << " runs=" << r.table_runs << " seed=" << r.table_seed << '\n';
    return os.str();
}

std::string report_to_json(const TestReport& r) {
    auto group = [](const SummaryStats& s) {
        ordered_json j;
        j["n"] = s.n;
        j["mean"] = s.mean;
        j["sd"] = s.sd;
        return j;
    };

    ordered_json j;
    j["format"] = "mtest-report";
    j["format_version"] = 1;
    j["tool_version"] = r.tool_version;
    j["input"] = {{"group1", group(r.group1)}, {"group2", group(r.group2)}};

    ordered_json result;
    result["prior_variant"] = std::string(to_string(r.result.prior_variant));
    result["alternatives"] = to_string(r.result.alternatives);
    for (const auto& [h, lm] : r.result.log_marginals) result["log_marginals"][std::string(to_string(h))] = lm;
    for (const auto& [h, bf] : r.result.bayes_factors) {
        result["bayes_factors"][std::string(to_string(h))] = std::isfinite(bf) ? ordered_json(bf) : ordered_json("inf");
    }
    result["log_m"] = r.result.log_m;
    result["m"] = std::isfinite(r.result.m) ? ordered_json(r.result.m) : ordered_json("inf");
    result["settings"] = {{"method", std::string(to_string(r.result.settings.method))},
                          {"n_samples", r.result.settings.n_samples},
                          {"seed", r.result.settings.seed}};
    j["result"] = result;

    j["alpha"] = r.alpha;
    j["threshold"] = r.threshold;
    j["p_value"] = r.p_value;
    j["decision"] = r.reject ? "reject" : "do_not_reject";
    j["table"] = {{"key", describe(r.table_key)}, {"runs", r.table_runs}, {"generator_seed", r.table_seed}};
    return j.dump(2) + "\n";
}

}  // namespace mtest::cli
