#include "data_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "mtest/error.hpp"

namespace mtest::cli {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_number(const std::string& token, std::size_t line_no) {
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(token.c_str(), &end);
    if (token.empty() || *end != '\0' || errno == ERANGE) {
        throw ParseError("line " + std::to_string(line_no) + ": '" + token + "' is not a number");
    }
    return v;
}

std::vector<std::pair<std::size_t, std::string>> content_lines(std::string_view text) {
    std::vector<std::pair<std::size_t, std::string>> lines;
    std::istringstream is{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        line = trim(line);
        if (!line.empty()) lines.emplace_back(line_no, line);
    }
    return lines;
}

SamplePair parse_csv(const std::vector<std::pair<std::size_t, std::string>>& lines) {
    std::vector<double> y1;
    std::vector<double> y2;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& [line_no, line] = lines[i];
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
            throw ParseError("line " + std::to_string(line_no) + ": expected 'group,value'");
        }
        const std::string group = trim(line.substr(0, comma));
        const double value = parse_number(trim(line.substr(comma + 1)), line_no);
        if (group == "1") {
            y1.push_back(value);
        } else if (group == "2") {
            y2.push_back(value);
        } else {
            throw ParseError("line " + std::to_string(line_no) + ": group must be 1 or 2, got '" + group + "'");
        }
    }
    return SamplePair(std::move(y1), std::move(y2));
}

SamplePair parse_rows(const std::vector<std::pair<std::size_t, std::string>>& lines) {
    if (lines.size() != 2) {
        throw ParseError("plain-text input needs exactly two rows, found " + std::to_string(lines.size()));
    }
    std::vector<double> groups[2];
    for (int g = 0; g < 2; ++g) {
        std::istringstream is(lines[g].second);
        std::string token;
        while (is >> token) groups[g].push_back(parse_number(token, lines[g].first));
    }
    return SamplePair(std::move(groups[0]), std::move(groups[1]));
}

}  // namespace

SamplePair parse_samples(std::string_view text) {
    const auto lines = content_lines(text);
    if (lines.empty()) throw ParseError("input is empty");
    std::string header = lines.front().second;
    header.erase(std::remove(header.begin(), header.end(), ' '), header.end());
    if (header == "group,value") return parse_csv(lines);
    if (lines.front().second.find(',') != std::string::npos) {
        throw ParseError("CSV input must start with the header 'group,value'");
    }
    return parse_rows(lines);
}

SamplePair load_samples(const std::filesystem::path& path) { return parse_samples(read_file(path)); }

}  // namespace mtest::cli
