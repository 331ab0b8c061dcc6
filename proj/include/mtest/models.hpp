#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "mtest/core.hpp"
#include "mtest/random.hpp"

namespace mtest {

/// H0: one normal for both groups. H1: separate means, shared variance.
/// H2: separate means and variances.
enum class HypothesisId { H0 = 0, H1 = 1, H2 = 2 };

enum class PriorVariant { Main, Informative, NonInformative };

[[nodiscard]] std::string_view to_string(HypothesisId h) noexcept;
[[nodiscard]] std::string_view to_string(PriorVariant v) noexcept;
[[nodiscard]] std::optional<HypothesisId> parse_hypothesis(std::string_view name) noexcept;
/// Accepts `main`, `informative`, `noninformative`.
[[nodiscard]] std::optional<PriorVariant> parse_variant(std::string_view name) noexcept;

/// Number of mean and standard-deviation parameters of a hypothesis.
[[nodiscard]] constexpr std::size_t mean_count(HypothesisId h) noexcept {
    return h == HypothesisId::H0 ? 1 : 2;
}
[[nodiscard]] constexpr std::size_t sigma_count(HypothesisId h) noexcept {
    return h == HypothesisId::H2 ? 2 : 1;
}

/// Parameters of one hypothesis. Unused slots are zero.
///   H0: means = {mu0}, sigmas = {sigma0}
///   H1: means = {mu1, mu2}, sigmas = {sigma12}
///   H2: means = {mu1, mu2}, sigmas = {sigma1, sigma2}
struct ParamVector {
    HypothesisId hypothesis = HypothesisId::H0;
    std::array<double, 2> means{};
    std::array<double, 2> sigmas{};

    static ParamVector h0(double mu0, double sigma0) { return {HypothesisId::H0, {mu0, 0.0}, {sigma0, 0.0}}; }
    static ParamVector h1(double mu1, double mu2, double sigma12) {
        return {HypothesisId::H1, {mu1, mu2}, {sigma12, 0.0}};
    }
    static ParamVector h2(double mu1, double mu2, double sigma1, double sigma2) {
        return {HypothesisId::H2, {mu1, mu2}, {sigma1, sigma2}};
    }

    /// Mean and standard deviation of the normal that generates group k (1 or 2).
    [[nodiscard]] double mean_of_group(int k) const noexcept {
        return hypothesis == HypothesisId::H0 ? means[0] : means[k - 1];
    }
    [[nodiscard]] double sigma_of_group(int k) const noexcept {
        return hypothesis == HypothesisId::H2 ? sigmas[k - 1] : sigmas[0];
    }
};

struct NormalPrior {
    double center;
    double variance;
};

/// Uniform on the open interval (lo, hi).
struct UniformPrior {
    double lo;
    double hi;
};

inline constexpr double kSigmaEpsilon = 1e-3;

struct PriorSpec {
    HypothesisId hypothesis = HypothesisId::H0;
    PriorVariant variant = PriorVariant::Main;
    std::array<NormalPrior, 2> means{};
    std::array<UniformPrior, 2> sigmas{};
    double epsilon = kSigmaEpsilon;
};

/// Centered moments of one set of observations; enough to evaluate a normal
/// log-likelihood in O(1).
struct GroupMoments {
    std::size_t n = 0;
    double mean = 0.0;
    double centered_ss = 0.0;  ///< sum_i (y_i - mean)^2
};

struct DataMoments {
    GroupMoments pooled;
    GroupMoments group1;
    GroupMoments group2;
};

[[nodiscard]] GroupMoments moments(std::span<const double> y);
[[nodiscard]] DataMoments moments(const NormalizedSamplePair& data);

/// Prior family for hypothesis h under variant v, built from normalized data.
/// Throws InvalidPrior when an upper sigma bound is not above epsilon or a
/// mean-prior variance is not positive.
[[nodiscard]] PriorSpec build_prior(HypothesisId h, PriorVariant v, const NormalizedSamplePair& data);

/// One independent draw from the prior.
[[nodiscard]] ParamVector sample_prior(const PriorSpec& spec, RandomStream& rng);

/// Log of the product of normal densities of all observations.
[[nodiscard]] double log_likelihood(HypothesisId h, const ParamVector& params, const NormalizedSamplePair& data);
[[nodiscard]] double log_likelihood(const ParamVector& params, const DataMoments& m) noexcept;

/// Prior log-density; -infinity when a sigma lies outside its support.
[[nodiscard]] double log_prior_density(const PriorSpec& spec, const ParamVector& params);

/// Gaussian log-likelihood of a group with the given moments under N(mu, sigma^2).
[[nodiscard]] double normal_group_log_likelihood(const GroupMoments& g, double mu, double sigma) noexcept;

}  // namespace mtest
