#include "config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "mtest/error.hpp"

namespace mtest::cli {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double to_double(const std::string& key, const std::string& value) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(value.c_str(), &end);
    if (value.empty() || *end != '\0' || errno == ERANGE) {
        throw ConfigError("'" + key + "': '" + value + "' is not a number");
    }
    return v;
}

std::uint64_t to_unsigned(const std::string& key, const std::string& value) {
    char* end = nullptr;
    errno = 0;
    if (value.empty() || value.front() == '-') throw ConfigError("'" + key + "' must be a nonnegative integer");
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (*end != '\0' || errno == ERANGE) throw ConfigError("'" + key + "': '" + value + "' is not an integer");
    return v;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("'" + key + "': expected true or false");
}

template <typename T, typename Parse>
std::vector<T> to_list(const std::string& value, Parse parse) {
    std::vector<T> out;
    std::string item;
    std::istringstream is(value);
    while (std::getline(is, item, ',')) out.push_back(parse(std::string(trim(item))));
    return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

Config parse_config(std::string_view text) {
    Config c;
    for (const auto& [key, value] : parse_key_values(text)) {
        if (key == "method") {
            const auto m = parse_method(value);
            if (!m) throw ConfigError("method must be prior_mc or harmonic_mean");
            c.estimator.method = *m;
        } else if (key == "n_samples") {
            c.estimator.n_samples = to_unsigned(key, value);
        } else if (key == "burn_in") {
            c.estimator.burn_in = to_unsigned(key, value);
        } else if (key == "thinning") {
            c.estimator.thinning = to_unsigned(key, value);
        } else if (key == "proposal_scale") {
            c.estimator.proposal_scale = to_double(key, value);
        } else if (key == "seed") {
            c.estimator.seed = to_unsigned(key, value);
        } else if (key == "variant") {
            const auto v = parse_variant(value);
            if (!v) throw ConfigError("variant must be main, informative or noninformative");
            c.variant = *v;
        } else if (key == "alternatives") {
            const auto a = parse_alternatives(value);
            if (!a) throw ConfigError("alternatives must be H1, H2 or H1,H2");
            c.alternatives = *a;
        } else if (key == "alpha") {
            c.alpha = to_double(key, value);
        } else if (key == "table_dir") {
            c.table_dir = value;
        } else if (key == "workers") {
            c.workers = static_cast<unsigned>(to_unsigned(key, value));
        } else if (key == "auto_calibrate") {
            c.auto_calibrate = to_bool(key, value);
        } else if (key == "calibration_runs") {
            c.calibration_runs = to_unsigned(key, value);
        } else if (key == "calibration_seed") {
            c.calibration_seed = to_unsigned(key, value);
        } else {
            throw ConfigError("unknown configuration key '" + key + "'");
        }
    }
    c.estimator.validate();
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    return c;
}

PowerScenario parse_scenario(std::string_view text) {
    PowerScenario s;
    for (const auto& [key, value] : parse_key_values(text)) {
        if (key == "n_grid") {
            s.n_grid = to_list<std::size_t>(value, [&](const std::string& v) { return to_unsigned(key, v); });
        } else if (key == "sigma2_grid") {
            s.sigma2_grid = to_list<double>(value, [&](const std::string& v) { return to_double(key, v); });
        } else if (key == "mean_shift") {
            s.mean_shift = to_double(key, value);
        } else if (key == "reps") {
            s.reps = to_unsigned(key, value);
        } else if (key == "alpha") {
            s.alpha = to_double(key, value);
        } else if (key == "seed") {
            s.seed = to_unsigned(key, value);
        } else if (key == "n_mc_samples") {
            s.n_mc_samples = to_unsigned(key, value);
        } else if (key == "average_n_lo") {
            s.average_n_lo = to_unsigned(key, value);
        } else if (key == "average_n_hi") {
            s.average_n_hi = to_unsigned(key, value);
        } else {
            throw ConfigError("unknown scenario key '" + key + "'");
        }
    }
    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return s;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Config load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

PowerScenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_file(path)); }

}  // namespace mtest::cli
