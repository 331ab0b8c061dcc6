#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mtest {

/// Two independent samples y(1), y(2) in the same units.
///
/// Each group holds at least two finite values; the constructor throws
/// TooFewSamples or InvalidSample otherwise.
class SamplePair {
public:
    SamplePair(std::vector<double> y1, std::vector<double> y2);

    [[nodiscard]] std::span<const double> y1() const noexcept { return y1_; }
    [[nodiscard]] std::span<const double> y2() const noexcept { return y2_; }
    [[nodiscard]] std::span<const double> group(int k) const noexcept { return k == 1 ? y1() : y2(); }
    [[nodiscard]] std::size_t n1() const noexcept { return y1_.size(); }
    [[nodiscard]] std::size_t n2() const noexcept { return y2_.size(); }
    [[nodiscard]] std::size_t size() const noexcept { return y1_.size() + y2_.size(); }

    /// Both groups concatenated, group 1 first.
    [[nodiscard]] std::vector<double> pooled() const;

private:
    std::vector<double> y1_;
    std::vector<double> y2_;
};

/// A SamplePair after the affine map y -> (y - shift) / scale that gives the
/// pooled values zero mean and unit empirical variance.
class NormalizedSamplePair {
public:
    [[nodiscard]] const SamplePair& samples() const noexcept { return samples_; }
    [[nodiscard]] std::span<const double> y1() const noexcept { return samples_.y1(); }
    [[nodiscard]] std::span<const double> y2() const noexcept { return samples_.y2(); }
    [[nodiscard]] std::span<const double> group(int k) const noexcept { return samples_.group(k); }
    [[nodiscard]] std::size_t n1() const noexcept { return samples_.n1(); }
    [[nodiscard]] std::size_t n2() const noexcept { return samples_.n2(); }
    [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }
    [[nodiscard]] std::vector<double> pooled() const { return samples_.pooled(); }

    [[nodiscard]] double shift() const noexcept { return shift_; }
    [[nodiscard]] double scale() const noexcept { return scale_; }

    /// Undo the transform, recovering the original observations.
    [[nodiscard]] SamplePair denormalize() const;

private:
    NormalizedSamplePair(SamplePair samples, double shift, double scale)
        : samples_(std::move(samples)), shift_(shift), scale_(scale) {}

    friend NormalizedSamplePair normalize(const SamplePair& pair);

    SamplePair samples_;
    double shift_;
    double scale_;
};

struct SummaryStats {
    double mean;
    double sd;   ///< N-1 denominator
    double sem;  ///< sd / sqrt(n)
    std::size_t n;
};

/// Shift and rescale so the pooled data has mean 0 and empirical variance 1.
///
/// The pooled variance uses the N denominator (the empirical variance of the
/// pooled observations). Throws DegenerateData when every value is equal.
[[nodiscard]] NormalizedSamplePair normalize(const SamplePair& pair);

/// Mean, N-1 standard deviation and standard error. Throws TooFewSamples
/// for fewer than two values.
[[nodiscard]] SummaryStats summary(std::span<const double> y);

/// Standard deviation of y about a center displaced from the sample mean by
/// three standard errors: sqrt(sum_i (y_i - (mean + 3 sem))^2 / (N - 1)).
[[nodiscard]] double sigma_3sem(std::span<const double> y);

}  // namespace mtest
