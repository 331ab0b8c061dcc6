#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "config.hpp"
#include "data_io.hpp"
#include "mtest/calibration.hpp"
#include "mtest/error.hpp"
#include "mtest/experiments.hpp"
#include "mtest/reference_tests.hpp"
#include "mtest/version.hpp"
#include "report.hpp"

namespace mtest::cli {

namespace {

namespace fs = std::filesystem;

/// Raised for invalid flag values detected after CLI11 parsing.
class UsageError : public Error {
public:
    using Error::Error;
};

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const UsageError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
        dynamic_cast<const ParseError*>(&e) || dynamic_cast<const TooFewSamples*>(&e) ||
        dynamic_cast<const InvalidSample*>(&e) || dynamic_cast<const InvalidSettings*>(&e) ||
        dynamic_cast<const InvalidAlpha*>(&e) || dynamic_cast<const GridTooSparse*>(&e) ||
        dynamic_cast<const std::invalid_argument*>(&e)) {
        return kUsageError;
    }
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const CorruptTable*>(&e) ||
        dynamic_cast<const FormatVersionMismatch*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e)) {
        return kIoError;
    }
    if (dynamic_cast<const MissingCalibration*>(&e)) return kMissingTable;
    if (dynamic_cast<const DegenerateData*>(&e) || dynamic_cast<const InvalidPrior*>(&e)) return kDegenerateData;
    return kInternalError;
}

PriorVariant variant_from(const std::string& name) {
    const auto v = parse_variant(name);
    if (!v) throw UsageError("unknown prior variant '" + name + "' (expected main, informative or noninformative)");
    return *v;
}

AlternativeSet alternatives_from(const std::string& text) {
    const auto a = parse_alternatives(text);
    if (!a) throw UsageError("alternatives must be H1, H2 or H1,H2");
    return *a;
}

/// Fail before any expensive work if `path` cannot be written.
void ensure_writable(const fs::path& path) {
    const bool existed = fs::exists(path);
    std::ofstream probe(path, std::ios::binary | std::ios::app);
    if (!probe) throw IoError("cannot write to " + path.string());
    probe.close();
    if (!existed) fs::remove(path);
}

// Flags shared by several subcommands. Values given on the command line
// override the config file, which overrides built-in defaults.
struct CommonFlags {
    std::string config_path;
    std::string variant;
    std::string alternatives;
    std::uint64_t seed = 0;
    std::size_t mc_samples = 0;
    unsigned workers = 0;
    std::string table_dir;
    bool auto_calibrate = false;
    bool no_auto_calibrate = false;
    std::size_t calibration_runs = 0;
    std::uint64_t calibration_seed = 0;
    double alpha = 0.05;

    CLI::Option* variant_opt = nullptr;
    CLI::Option* alternatives_opt = nullptr;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* mc_opt = nullptr;
    CLI::Option* workers_opt = nullptr;
    CLI::Option* table_dir_opt = nullptr;
    CLI::Option* runs_opt = nullptr;
    CLI::Option* cal_seed_opt = nullptr;
    CLI::Option* alpha_opt = nullptr;

    void add_config(CLI::App* app) {
        app->add_option("--config", config_path, "Key-value configuration file");
    }
    void add_model(CLI::App* app) {
        variant_opt = app->add_option("--variant", variant, "Prior variant: main, informative, noninformative");
        alternatives_opt = app->add_option("--alternatives", alternatives, "Alternative hypotheses: H1,H2 | H1 | H2");
        mc_opt = app->add_option("--mc-samples", mc_samples, "Monte Carlo samples per hypothesis");
    }
    void add_seed(CLI::App* app) { seed_opt = app->add_option("--seed", seed, "Random seed"); }
    void add_workers(CLI::App* app) {
        workers_opt = app->add_option("--workers", workers, "Worker threads (0 = all cores)");
    }
    void add_alpha(CLI::App* app) { alpha_opt = app->add_option("--alpha", alpha, "Significance level"); }
    void add_tables(CLI::App* app) {
        table_dir_opt = app->add_option("--table-dir", table_dir, "Directory of calibration tables");
        auto* on = app->add_flag("--auto-calibrate", auto_calibrate, "Build missing tables on demand");
        auto* off = app->add_flag("--no-auto-calibrate", no_auto_calibrate, "Never build missing tables (default)");
        on->excludes(off);
        runs_opt = app->add_option("--calibration-runs", calibration_runs, "Runs per auto-built table");
        cal_seed_opt = app->add_option("--calibration-seed", calibration_seed, "Seed for auto-built tables");
    }

    Config resolve() const {
        Config c = config_path.empty() ? Config{} : load_config(config_path);
        if (variant_opt && variant_opt->count()) c.variant = variant_from(variant);
        if (alternatives_opt && alternatives_opt->count()) c.alternatives = alternatives_from(alternatives);
        if (mc_opt && mc_opt->count()) c.estimator.n_samples = mc_samples;
        if (seed_opt && seed_opt->count()) c.estimator.seed = seed;
        if (workers_opt && workers_opt->count()) c.workers = workers;
        if (table_dir_opt && table_dir_opt->count()) c.table_dir = table_dir;
        if (auto_calibrate) c.auto_calibrate = true;
        if (no_auto_calibrate) c.auto_calibrate = false;
        if (runs_opt && runs_opt->count()) c.calibration_runs = calibration_runs;
        if (cal_seed_opt && cal_seed_opt->count()) c.calibration_seed = calibration_seed;
        if (alpha_opt && alpha_opt->count()) c.alpha = alpha;
        if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
        c.estimator.validate();
        return c;
    }

    TableStore::Options store_options(const Config& c) const {
        TableStore::Options o;
        o.directory = c.table_dir;
        o.auto_calibrate = c.auto_calibrate;
        o.auto_runs = c.calibration_runs;
        o.auto_seed = c.calibration_seed;
        o.workers = c.workers;
        return o;
    }
};

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
    CommonFlags common;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    std::size_t runs = 0;
    std::string out_path;
    CLI::Option* runs_opt = nullptr;
};

int cmd_calibrate(const CalibrateArgs& a, std::ostream& out) {
    const Config c = a.common.resolve();
    const std::size_t runs = (a.runs_opt && a.runs_opt->count()) ? a.runs : c.calibration_runs;
    if (runs < 1000) throw UsageError("--runs must be at least 1000");
    if (a.n1 < 2 || a.n2 < 2) throw UsageError("--n1 and --n2 must be at least 2");

    const CalibrationKey key{a.n1, a.n2, c.variant, c.alternatives, c.estimator.n_samples};
    ensure_writable(a.out_path);

    BuildOptions options;
    options.workers = c.workers;
    const CalibrationTable table = build_table(key, runs, c.estimator.seed, options);
    save_table(table, a.out_path);

    const auto jeffreys = jeffreys_type1(table);
    out << std::setprecision(6);
    out << "wrote " << a.out_path << '\n'
        << "key: " << describe(key) << '\n'
        << "runs: " << table.runs << " seed: " << table.generator_seed << '\n'
        << "threshold alpha=0.05: " << threshold(table, 0.05) << '\n'
        << "threshold alpha=0.01: " << threshold(table, 0.01) << '\n'
        << "Jeffreys Type I: m>3: " << jeffreys.at(3) << "  m>10: " << jeffreys.at(10)
        << "  m>30: " << jeffreys.at(30) << '\n';
    return kOk;
}

// --------------------------------------------------------------------- test

struct TestArgs {
    CommonFlags common;
    std::string data_path;
    std::string table_path;
    std::string report_path;
};

int cmd_test(const TestArgs& a, std::ostream& out) {
    const Config c = a.common.resolve();
    const SamplePair data = load_samples(a.data_path);
    const MTestResult result = m_statistic(data, c.variant, c.estimator, c.alternatives);

    const CalibrationKey key{data.n1(), data.n2(), c.variant, c.alternatives, c.estimator.n_samples};
    std::shared_ptr<const CalibrationTable> table;
    if (!a.table_path.empty()) {
        table = std::make_shared<const CalibrationTable>(load_table(a.table_path));
        if (!(table->key == key)) {
            throw MissingCalibration("table " + a.table_path + " is for " + describe(table->key) +
                                     "; this test needs " + describe(key));
        }
    } else {
        if (!c.table_dir && !c.auto_calibrate) {
            throw MissingCalibration("no calibration table for " + describe(key) +
                                     " (pass --table, --table-dir or --auto-calibrate)");
        }
        TableStore store(a.common.store_options(c));
        table = store.get(key);
    }

    const TestReport report = make_test_report(data, result, *table, c.alpha);
    out << format_report(report);
    if (!a.report_path.empty()) {
        std::ofstream f(a.report_path, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write " + a.report_path);
        f << report_to_json(report);
    }
    return kOk;
}

// ------------------------------------------------------------------ classic

struct ClassicArgs {
    std::string test = "t";
    std::string data_path;
    double alpha = 0.05;
};

int cmd_classic(const ClassicArgs& a, std::ostream& out) {
    if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
    const SamplePair data = load_samples(a.data_path);
    const ClassicalDecision d = a.test == "welch" ? welch_test(data, a.alpha) : t_test(data, a.alpha);
    out << std::setprecision(10);
    out << "test: " << to_string(d.result.test) << '\n'
        << "statistic: " << d.result.statistic << '\n'
        << "df: " << d.result.df << '\n'
        << "p: " << d.result.p_value << '\n'
        << "decision: " << (d.reject ? "reject H0" : "do not reject H0") << '\n';
    return kOk;
}

// -------------------------------------------------------------------- power

struct PowerArgs {
    CommonFlags common;
    std::string scenario = "default";
    std::string tests = "t,welch,mtest:main";
    std::string out_dir;
};

int cmd_power(const PowerArgs& a, std::ostream& out) {
    const Config c = a.common.resolve();
    const PowerScenario scenario = a.scenario == "default" ? PowerScenario{} : load_scenario(a.scenario);
    scenario.validate();
    if (scenario.n_grid.front() > scenario.average_n_lo || scenario.n_grid.back() < scenario.average_n_hi) {
        throw UsageError("n_grid must cover [average_n_lo, average_n_hi]");
    }

    std::vector<TestDescriptor> tests;
    std::istringstream is(a.tests);
    std::string id;
    while (std::getline(is, id, ',')) {
        const auto d = parse_test_descriptor(id);
        if (!d) throw UsageError("unknown test '" + id + "'");
        if (d->kind == TestDescriptor::Kind::StudentT) continue;  // always run as the baseline
        if (std::none_of(tests.begin(), tests.end(), [&](const auto& t) { return t.id() == d->id(); })) {
            tests.push_back(*d);
        }
    }

    TableStore store(a.common.store_options(c));
    for (const auto& t : tests) {
        if (t.kind != TestDescriptor::Kind::MTest) continue;
        for (std::size_t n : scenario.n_grid) (void)store.get(t.calibration_key(n, scenario.n_mc_samples));
    }

    fs::create_directories(a.out_dir);
    const fs::path dir(a.out_dir);
    ensure_writable(dir / "power.csv");

    RunOptions options;
    options.workers = c.workers;
    const StudyResult study = compare_to_t_test(scenario, tests, store, options);

    std::vector<PowerGrid> all{study.baseline};
    all.insert(all.end(), study.grids.begin(), study.grids.end());
    write_power_csv(dir / "power.csv", all);
    write_diff_csv(dir / "diff.csv", study.baseline, study.grids);
    write_averages_csv(dir / "averages.csv", study.baseline, study.grids);

    out << "wrote " << (dir / "power.csv").string() << ", " << (dir / "diff.csv").string() << ", "
        << (dir / "averages.csv").string() << '\n';
    return kOk;
}

// ------------------------------------------------------------------- tables

int cmd_tables(const std::string& dir, std::ostream& out) {
    const auto tables = list_tables(dir);
    out << std::setprecision(6);
    for (const auto& [path, table] : tables) {
        out << path.filename().string() << "  " << describe(table.key) << "  runs=" << table.runs
            << "  seed=" << table.generator_seed << "  threshold(0.05)=" << threshold(table, 0.05) << '\n';
    }
    if (tables.empty()) out << "no calibration tables in " << dir << '\n';
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"m-test: two-sample testing with the maximum Bayes factor statistic", "mtest"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CalibrateArgs cal;
    auto* calibrate = app.add_subcommand("calibrate", "Build a calibration table from null simulations");
    calibrate->add_option("--n1", cal.n1, "Size of group 1")->required();
    calibrate->add_option("--n2", cal.n2, "Size of group 2")->required();
    cal.runs_opt = calibrate->add_option("--runs", cal.runs, "Number of null runs (default 20000)");
    calibrate->add_option("--out", cal.out_path, "Output table file")->required();
    cal.common.add_config(calibrate);
    cal.common.add_model(calibrate);
    cal.common.add_seed(calibrate);
    cal.common.add_workers(calibrate);

    TestArgs test;
    auto* test_cmd = app.add_subcommand("test", "Run the m-test on one dataset");
    test_cmd->add_option("--data", test.data_path, "CSV (group,value) or two-row text file")
        ->required();
    test_cmd->add_option("--table", test.table_path, "Calibration table file");
    test_cmd->add_option("--report", test.report_path, "Write the JSON report here");
    test.common.add_config(test_cmd);
    test.common.add_model(test_cmd);
    test.common.add_seed(test_cmd);
    test.common.add_workers(test_cmd);
    test.common.add_alpha(test_cmd);
    test.common.add_tables(test_cmd);

    ClassicArgs classic;
    auto* classic_cmd = app.add_subcommand("classic", "Pooled-variance t-test or Welch's test");
    classic_cmd->add_option("--test", classic.test, "t or welch")->check(CLI::IsMember({"t", "welch"}));
    classic_cmd->add_option("--data", classic.data_path, "CSV (group,value) or two-row text file")
        ->required();
    classic_cmd->add_option("--alpha", classic.alpha, "Significance level");

    PowerArgs power;
    auto* power_cmd = app.add_subcommand("power", "Type II error sweep over a scenario grid");
    power_cmd->add_option("--scenario", power.scenario, "Scenario file or 'default'");
    power_cmd->add_option("--tests", power.tests, "Comma-separated test ids");
    power_cmd->add_option("--out", power.out_dir, "Output directory")->required();
    power.common.add_config(power_cmd);
    power.common.add_workers(power_cmd);
    power.common.add_tables(power_cmd);

    std::string tables_dir;
    auto* tables_cmd = app.add_subcommand("tables", "List calibration tables in a directory");
    tables_cmd->add_option("--dir", tables_dir, "Table directory")->required();

    std::vector<const char*> argv{"mtest"};
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsageError;
    }

    try {
        if (calibrate->parsed()) return cmd_calibrate(cal, out);
        if (test_cmd->parsed()) return cmd_test(test, out);
        if (classic_cmd->parsed()) return cmd_classic(classic, out);
        if (power_cmd->parsed()) return cmd_power(power, out);
        if (tables_cmd->parsed()) return cmd_tables(tables_dir, out);
    } catch (const std::exception& e) {
        err << "mtest: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return kUsageError;
}

}  // namespace mtest::cli
