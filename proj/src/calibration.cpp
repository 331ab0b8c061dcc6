#include "mtest/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mtest/error.hpp"
#include "mtest/parallel.hpp"
#include "mtest/random.hpp"

namespace mtest {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kFormatName = "mtest-calibration-table";

std::string compact_alternatives(const AlternativeSet& a) {
    std::string s = to_string(a);
    s.erase(std::remove(s.begin(), s.end(), ','), s.end());
    return s;
}

ordered_json key_to_json(const CalibrationKey& key) {
    ordered_json j;
    j["n1"] = key.n1;
    j["n2"] = key.n2;
    j["variant"] = std::string(to_string(key.variant));
    j["alternatives"] = to_string(key.alternatives);
    j["n_mc_samples"] = key.n_mc_samples;
    return j;
}

CalibrationKey key_from_json(const ordered_json& j) {
    CalibrationKey key;
    key.n1 = j.at("n1").get<std::size_t>();
    key.n2 = j.at("n2").get<std::size_t>();
    const auto variant = parse_variant(j.at("variant").get<std::string>());
    const auto alternatives = parse_alternatives(j.at("alternatives").get<std::string>());
    if (!variant || !alternatives) throw CorruptTable("unrecognized variant or alternatives in table key");
    key.variant = *variant;
    key.alternatives = *alternatives;
    key.n_mc_samples = j.at("n_mc_samples").get<std::size_t>();
    return key;
}

}  // namespace

std::string describe(const CalibrationKey& key) {
    std::ostringstream os;
    os << "n1=" << key.n1 << " n2=" << key.n2 << " variant=" << to_string(key.variant)
       << " alternatives=" << to_string(key.alternatives) << " mc=" << key.n_mc_samples;
    return os.str();
}

std::string table_file_name(const CalibrationKey& key) {
    std::ostringstream os;
    os << "table_n1-" << key.n1 << "_n2-" << key.n2 << '_' << to_string(key.variant) << '_'
       << compact_alternatives(key.alternatives) << "_mc" << key.n_mc_samples << ".json";
    return os.str();
}

CalibrationTable build_table(const CalibrationKey& key, std::size_t runs, std::uint64_t seed,
                             const BuildOptions& options) {
    if (runs < 1000) throw std::invalid_argument("a calibration table needs at least 1000 runs");
    if (key.n1 < 2 || key.n2 < 2) throw TooFewSamples("calibration needs n1, n2 >= 2");

    EstimatorSettings settings;
    settings.n_samples = key.n_mc_samples;
    settings.seed = seed;
    settings.validate();

    std::vector<double> m_values(runs);
    parallel_for(runs, options.workers, [&](std::size_t r) {
        RandomStream rng(derive_seed(seed, {tag(StreamTag::NullData), r}));
        std::vector<double> y1(key.n1);
        std::vector<double> y2(key.n2);
        for (double& v : y1) v = rng.normal(options.null_mean, options.null_sd);
        for (double& v : y2) v = rng.normal(options.null_mean, options.null_sd);
        m_values[r] = m_statistic(SamplePair(std::move(y1), std::move(y2)), key.variant, settings,
                                  key.alternatives, r)
                          .m;
    });
    std::sort(m_values.begin(), m_values.end());

    CalibrationTable table;
    table.key = key;
    table.runs = runs;
    table.sorted_m = std::move(m_values);
    table.generator_seed = seed;
    return table;
}

double threshold(const CalibrationTable& table, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidAlpha("alpha must lie in (0, 1)");
    if (table.sorted_m.empty()) throw CorruptTable("calibration table is empty");
    const auto runs = static_cast<double>(table.sorted_m.size());
    // The small slack keeps exact products such as 0.95 * 20000 from rounding up.
    auto rank = static_cast<std::size_t>(std::ceil((1.0 - alpha) * runs - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, table.sorted_m.size());
    return table.sorted_m[rank - 1];
}

double p_value(const CalibrationTable& table, double m_obs) {
    const auto first = std::lower_bound(table.sorted_m.begin(), table.sorted_m.end(), m_obs);
    const auto at_least = static_cast<double>(table.sorted_m.end() - first);
    return (at_least + 1.0) / (static_cast<double>(table.sorted_m.size()) + 1.0);
}

std::map<int, double> jeffreys_type1(const CalibrationTable& table) {
    std::map<int, double> out;
    const auto runs = static_cast<double>(table.sorted_m.size());
    for (int level : {3, 10, 30}) {
        const auto above = std::upper_bound(table.sorted_m.begin(), table.sorted_m.end(), static_cast<double>(level));
        out[level] = runs > 0 ? static_cast<double>(table.sorted_m.end() - above) / runs : 0.0;
    }
    return out;
}

void save_table(const CalibrationTable& table, const std::filesystem::path& path) {
    ordered_json j;
    j["format"] = kFormatName;
    j["format_version"] = table.format_version;
    j["key"] = key_to_json(table.key);
    j["runs"] = table.runs;
    j["generator_seed"] = table.generator_seed;
    j["sorted_m"] = table.sorted_m;

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(1) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

CalibrationTable load_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());

    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptTable(path.string() + ": " + e.what());
    }

    try {
        if (j.at("format").get<std::string>() != kFormatName) {
            throw CorruptTable(path.string() + " is not a calibration table");
        }
        const int version = j.at("format_version").get<int>();
        if (version != kTableFormatVersion) {
            throw FormatVersionMismatch(path.string() + " has format_version " + std::to_string(version) +
                                        ", expected " + std::to_string(kTableFormatVersion));
        }

        CalibrationTable table;
        table.format_version = version;
        table.key = key_from_json(j.at("key"));
        table.runs = j.at("runs").get<std::size_t>();
        table.generator_seed = j.at("generator_seed").get<std::uint64_t>();
        table.sorted_m = j.at("sorted_m").get<std::vector<double>>();

        if (table.sorted_m.size() != table.runs) {
            throw CorruptTable(path.string() + ": runs does not match the number of entries");
        }
        if (!std::is_sorted(table.sorted_m.begin(), table.sorted_m.end())) {
            throw CorruptTable(path.string() + ": entries are not in ascending order");
        }
        return table;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptTable(path.string() + ": " + e.what());
    }
}

TableStore::TableStore(Options options) : options_(std::move(options)) {}

std::uint64_t TableStore::seed_for(const CalibrationKey& key) const noexcept {
    return derive_seed(options_.auto_seed,
                       {key.n1, key.n2, static_cast<std::uint64_t>(key.variant),
                        static_cast<std::uint64_t>(key.alternatives.h1) * 2 + key.alternatives.h2,
                        key.n_mc_samples});
}

void TableStore::add(CalibrationTable table) {
    std::lock_guard lock(mutex_);
    tables_.push_back(std::make_shared<const CalibrationTable>(std::move(table)));
}

std::shared_ptr<const CalibrationTable> TableStore::get(const CalibrationKey& key) {
    std::lock_guard lock(mutex_);
    for (const auto& t : tables_) {
        if (t->key == key) return t;
    }

    if (options_.directory) {
        const auto path = *options_.directory / table_file_name(key);
        if (std::filesystem::exists(path)) {
            auto table = std::make_shared<const CalibrationTable>(load_table(path));
            if (!(table->key == key)) throw CorruptTable(path.string() + " holds a table for a different key");
            tables_.push_back(table);
            return table;
        }
    }

    if (!options_.auto_calibrate) {
        throw MissingCalibration("no calibration table for " + describe(key));
    }

    BuildOptions build;
    build.workers = options_.workers;
    auto table = std::make_shared<const CalibrationTable>(build_table(key, options_.auto_runs, seed_for(key), build));
    if (options_.directory) {
        std::filesystem::create_directories(*options_.directory);
        save_table(*table, *options_.directory / table_file_name(key));
    }
    tables_.push_back(table);
    return table;
}

std::vector<std::pair<std::filesystem::path, CalibrationTable>> list_tables(const std::filesystem::path& directory) {
    std::vector<std::pair<std::filesystem::path, CalibrationTable>> out;
    if (!std::filesystem::is_directory(directory)) throw IoError(directory.string() + " is not a directory");
    for (const auto& entry : std::filesystem::directory_iterator(directory)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        try {
            out.emplace_back(entry.path(), load_table(entry.path()));
        } catch (const Error&) {
            // not a table, or unreadable; skip it
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    return out;
}

}  // namespace mtest
