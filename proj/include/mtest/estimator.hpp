#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtest/core.hpp"
#include "mtest/models.hpp"

namespace mtest {

enum class EstimatorMethod { PriorMC, PosteriorHarmonicMean };

[[nodiscard]] std::string_view to_string(EstimatorMethod m) noexcept;
/// Accepts `prior_mc` and `harmonic_mean`.
[[nodiscard]] std::optional<EstimatorMethod> parse_method(std::string_view name) noexcept;

struct EstimatorSettings {
    EstimatorMethod method = EstimatorMethod::PriorMC;
    std::size_t n_samples = 1500;  ///< per hypothesis
    std::size_t burn_in = 500;     ///< harmonic mean only
    std::size_t thinning = 5;      ///< harmonic mean only
    double proposal_scale = 0.2;   ///< harmonic mean only
    std::uint64_t seed = 0;

    /// Throws InvalidSettings (n_samples < 100, thinning 0, non-positive scale).
    void validate() const;
};

/// Subset of the alternative hypotheses {H1, H2} entering the max.
struct AlternativeSet {
    bool h1 = true;
    bool h2 = true;

    [[nodiscard]] bool empty() const noexcept { return !h1 && !h2; }
    [[nodiscard]] bool contains(HypothesisId h) const noexcept {
        return (h == HypothesisId::H1 && h1) || (h == HypothesisId::H2 && h2);
    }
    [[nodiscard]] std::vector<HypothesisId> members() const;
    friend bool operator==(const AlternativeSet&, const AlternativeSet&) = default;

    static AlternativeSet both() { return {true, true}; }
    static AlternativeSet only_h1() { return {true, false}; }
    static AlternativeSet only_h2() { return {false, true}; }
};

/// "H1,H2", "H1" or "H2".
[[nodiscard]] std::string to_string(const AlternativeSet& a);
[[nodiscard]] std::optional<AlternativeSet> parse_alternatives(std::string_view text);

struct MTestResult {
    std::map<HypothesisId, double> log_marginals;
    std::map<HypothesisId, double> bayes_factors;  ///< only the selected alternatives
    double log_m = 0.0;
    double m = 1.0;  ///< exp(log_m); may overflow to +inf for overwhelming evidence
    PriorVariant prior_variant = PriorVariant::Main;
    AlternativeSet alternatives;
    EstimatorSettings settings;
};

/// log(mean(exp(values))), stable for values spanning hundreds of nats.
[[nodiscard]] double log_mean_exp(std::span<const double> values);

/// Seed of the substream used for hypothesis h at a given replicate.
[[nodiscard]] std::uint64_t estimator_stream_seed(std::uint64_t seed, HypothesisId h, std::uint64_t replicate) noexcept;

/**
 * Prior-sampling Monte Carlo estimate of log P(y | H):
 * log of the average likelihood over n_samples independent prior draws.
 *
 * Throws NumericalUnderflow if every sampled log-likelihood is -inf or NaN.
 */
[[nodiscard]] double log_marginal(HypothesisId h, const PriorSpec& spec, const NormalizedSamplePair& data,
                                  const EstimatorSettings& settings, std::uint64_t replicate = 0);
[[nodiscard]] double log_marginal(HypothesisId h, const PriorSpec& spec, const DataMoments& data,
                                  const EstimatorSettings& settings, std::uint64_t replicate = 0);

/// Output of a random-walk Metropolis run on the posterior of one hypothesis.
struct PosteriorChain {
    std::vector<ParamVector> samples;       ///< retained after burn-in and thinning
    std::vector<double> log_likelihoods;    ///< aligned with samples
    double acceptance_rate = 0.0;           ///< over the whole run, burn-in included
};

/// Gaussian random-walk Metropolis chain on (means, sigmas). Out-of-support
/// proposals are rejected. Throws ChainDegenerate when the acceptance rate is
/// below 1% or above 99%.
[[nodiscard]] PosteriorChain run_posterior_chain(HypothesisId h, const PriorSpec& spec,
                                                 const NormalizedSamplePair& data,
                                                 const EstimatorSettings& settings, std::uint64_t replicate = 0);

/// Harmonic-mean estimate: -log(mean over posterior draws of 1 / P(y | theta)).
[[nodiscard]] double log_marginal_harmonic(HypothesisId h, const PriorSpec& spec, const NormalizedSamplePair& data,
                                           const EstimatorSettings& settings, std::uint64_t replicate = 0);

/// The m statistic: the largest Bayes factor of the selected alternatives
/// against H0, computed on the normalized data. Each hypothesis uses its own
/// substream derived from (settings.seed, hypothesis, replicate).
[[nodiscard]] MTestResult m_statistic(const SamplePair& data, PriorVariant variant, const EstimatorSettings& settings,
                                      AlternativeSet alternatives = AlternativeSet::both(),
                                      std::uint64_t replicate = 0);

}  // namespace mtest
