#include "mtest/core.hpp"

#include <cmath>
#include <string>

#include "mtest/error.hpp"

namespace mtest {

namespace {

void validate_group(const std::vector<double>& y, int group) {
    if (y.size() < 2) {
        throw TooFewSamples("group " + std::to_string(group) + " has " + std::to_string(y.size()) +
                            " observations; at least 2 are required");
    }
    for (double v : y) {
        if (!std::isfinite(v)) {
            throw InvalidSample("group " + std::to_string(group) + " contains a non-finite value");
        }
    }
}

double mean_of(std::span<const double> y) {
    double sum = 0.0;
    for (double v : y) sum += v;
    return sum / static_cast<double>(y.size());
}

}  // namespace

SamplePair::SamplePair(std::vector<double> y1, std::vector<double> y2)
    : y1_(std::move(y1)), y2_(std::move(y2)) {
    validate_group(y1_, 1);
    validate_group(y2_, 2);
}

std::vector<double> SamplePair::pooled() const {
    std::vector<double> all;
    all.reserve(size());
    all.insert(all.end(), y1_.begin(), y1_.end());
    all.insert(all.end(), y2_.begin(), y2_.end());
    return all;
}

SamplePair NormalizedSamplePair::denormalize() const {
    auto restore = [this](std::span<const double> y) {
        std::vector<double> out;
        out.reserve(y.size());
        for (double v : y) out.push_back(v * scale_ + shift_);
        return out;
    };
    return SamplePair(restore(y1()), restore(y2()));
}

NormalizedSamplePair normalize(const SamplePair& pair) {
    const std::vector<double> all = pair.pooled();
    const double shift = mean_of(all);
    double ss = 0.0;
    for (double v : all) ss += (v - shift) * (v - shift);
    const double scale = std::sqrt(ss / static_cast<double>(all.size()));
    if (!(scale > 0.0) || !std::isfinite(scale)) {
        throw DegenerateData("all pooled observations are equal; the data cannot be rescaled");
    }

    auto transform = [shift, scale](std::span<const double> y) {
        std::vector<double> out;
        out.reserve(y.size());
        for (double v : y) out.push_back((v - shift) / scale);
        return out;
    };
    return NormalizedSamplePair(SamplePair(transform(pair.y1()), transform(pair.y2())), shift, scale);
}

SummaryStats summary(std::span<const double> y) {
    if (y.size() < 2) throw TooFewSamples("summary statistics need at least 2 observations");
    const double m = mean_of(y);
    double ss = 0.0;
    for (double v : y) ss += (v - m) * (v - m);
    const auto n = static_cast<double>(y.size());
    const double sd = std::sqrt(ss / (n - 1.0));
    return {m, sd, sd / std::sqrt(n), y.size()};
}

double sigma_3sem(std::span<const double> y) {
    const SummaryStats s = summary(y);
    const double center = s.mean + 3.0 * s.sem;
    double ss = 0.0;
    for (double v : y) ss += (v - center) * (v - center);
    return std::sqrt(ss / static_cast<double>(y.size() - 1));
}

}  // namespace mtest
