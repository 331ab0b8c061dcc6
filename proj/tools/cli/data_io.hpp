#pragma once

#include <filesystem>
#include <string_view>

#include "mtest/core.hpp"

namespace mtest::cli {

/// Parse two samples from either
///   - CSV with header `group,value` and group in {1, 2}, or
///   - plain text with exactly two rows of whitespace-separated numbers.
/// Throws ParseError on malformed input, TooFewSamples / InvalidSample from SamplePair.
[[nodiscard]] SamplePair parse_samples(std::string_view text);
[[nodiscard]] SamplePair load_samples(const std::filesystem::path& path);

}  // namespace mtest::cli
