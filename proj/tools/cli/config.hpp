#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mtest/estimator.hpp"
#include "mtest/experiments.hpp"
#include "mtest/models.hpp"

namespace mtest::cli {

/// `key = value` lines; `#` starts a comment; blank lines are ignored.
/// Throws ConfigError on malformed lines and duplicate keys.
[[nodiscard]] std::vector<std::pair<std::string, std::string>> parse_key_values(std::string_view text);

/// Run configuration shared by the subcommands. Defaults are listed in the README.
struct Config {
    EstimatorSettings estimator;
    PriorVariant variant = PriorVariant::Main;
    AlternativeSet alternatives = AlternativeSet::both();
    double alpha = 0.05;
    std::optional<std::filesystem::path> table_dir;
    unsigned workers = 0;
    bool auto_calibrate = false;
    std::size_t calibration_runs = 20000;
    std::uint64_t calibration_seed = 1;
};

/// Unknown keys and unparsable values raise ConfigError.
[[nodiscard]] Config parse_config(std::string_view text);
[[nodiscard]] Config load_config(const std::filesystem::path& path);

/// Scenario files use the same syntax with the PowerScenario keys.
[[nodiscard]] PowerScenario parse_scenario(std::string_view text);
[[nodiscard]] PowerScenario load_scenario(const std::filesystem::path& path);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);

}  // namespace mtest::cli
