#include "mtest/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mtest/error.hpp"

namespace mtest {

std::string_view to_string(EstimatorMethod m) noexcept {
    return m == EstimatorMethod::PriorMC ? "prior_mc" : "harmonic_mean";
}

std::optional<EstimatorMethod> parse_method(std::string_view name) noexcept {
    if (name == "prior_mc") return EstimatorMethod::PriorMC;
    if (name == "harmonic_mean") return EstimatorMethod::PosteriorHarmonicMean;
    return std::nullopt;
}

void EstimatorSettings::validate() const {
    if (n_samples < 100) throw InvalidSettings("n_samples must be at least 100");
    if (thinning == 0) throw InvalidSettings("thinning must be positive");
    if (!(proposal_scale > 0.0) || !std::isfinite(proposal_scale)) {
        throw InvalidSettings("proposal_scale must be a positive number");
    }
}

std::vector<HypothesisId> AlternativeSet::members() const {
    std::vector<HypothesisId> out;
    if (h1) out.push_back(HypothesisId::H1);
    if (h2) out.push_back(HypothesisId::H2);
    return out;
}

std::string to_string(const AlternativeSet& a) {
    if (a.h1 && a.h2) return "H1,H2";
    if (a.h1) return "H1";
    if (a.h2) return "H2";
    return "";
}

std::optional<AlternativeSet> parse_alternatives(std::string_view text) {
    AlternativeSet a{false, false};
    while (!text.empty()) {
        const auto comma = text.find(',');
        const std::string_view item = text.substr(0, comma);
        const auto h = parse_hypothesis(item);
        if (!h || *h == HypothesisId::H0) return std::nullopt;
        (*h == HypothesisId::H1 ? a.h1 : a.h2) = true;
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    if (a.empty()) return std::nullopt;
    return a;
}

double log_mean_exp(std::span<const double> values) {
    double peak = -std::numeric_limits<double>::infinity();
    for (double v : values) {
        if (v > peak) peak = v;  // NaN never compares greater
    }
    if (!std::isfinite(peak)) {
        throw NumericalUnderflow("every sampled log-likelihood is -inf or NaN");
    }
    double sum = 0.0;
    for (double v : values) {
        if (!std::isnan(v)) sum += std::exp(v - peak);
    }
    return peak + std::log(sum) - std::log(static_cast<double>(values.size()));
}

std::uint64_t estimator_stream_seed(std::uint64_t seed, HypothesisId h, std::uint64_t replicate) noexcept {
    return derive_seed(seed, {tag(StreamTag::Estimator), static_cast<std::uint64_t>(h), replicate});
}

double log_marginal(HypothesisId h, const PriorSpec& spec, const DataMoments& data,
                    const EstimatorSettings& settings, std::uint64_t replicate) {
    settings.validate();
    if (spec.hypothesis != h) throw std::invalid_argument("prior does not belong to the requested hypothesis");

    RandomStream rng(estimator_stream_seed(settings.seed, h, replicate));
    std::vector<double> log_liks(settings.n_samples);
    for (double& ll : log_liks) {
        ll = log_likelihood(sample_prior(spec, rng), data);
    }
    return log_mean_exp(log_liks);
}

double log_marginal(HypothesisId h, const PriorSpec& spec, const NormalizedSamplePair& data,
                    const EstimatorSettings& settings, std::uint64_t replicate) {
    return log_marginal(h, spec, moments(data), settings, replicate);
}

namespace {

ParamVector chain_start(const PriorSpec& spec, const DataMoments& m) {
    auto interior = [](double s, const UniformPrior& u) {
        const double margin = 0.01 * (u.hi - u.lo);
        return std::clamp(s, u.lo + margin, u.hi - margin);
    };
    auto group_sd = [](const GroupMoments& g) { return std::sqrt(g.centered_ss / static_cast<double>(g.n)); };

    ParamVector p;
    p.hypothesis = spec.hypothesis;
    for (std::size_t i = 0; i < mean_count(spec.hypothesis); ++i) p.means[i] = spec.means[i].center;
    switch (spec.hypothesis) {
        case HypothesisId::H0:
            p.sigmas[0] = interior(group_sd(m.pooled), spec.sigmas[0]);
            break;
        case HypothesisId::H1:
            p.sigmas[0] = interior(0.5 * (group_sd(m.group1) + group_sd(m.group2)), spec.sigmas[0]);
            break;
        case HypothesisId::H2:
            p.sigmas[0] = interior(group_sd(m.group1), spec.sigmas[0]);
            p.sigmas[1] = interior(group_sd(m.group2), spec.sigmas[1]);
            break;
    }
    return p;
}

}  // namespace

PosteriorChain run_posterior_chain(HypothesisId h, const PriorSpec& spec, const NormalizedSamplePair& data,
                                   const EstimatorSettings& settings, std::uint64_t replicate) {
    settings.validate();
    if (spec.hypothesis != h) throw std::invalid_argument("prior does not belong to the requested hypothesis");

    const DataMoments m = moments(data);
    RandomStream rng(estimator_stream_seed(settings.seed, h, replicate));

    ParamVector current = chain_start(spec, m);
    double current_ll = log_likelihood(current, m);
    double current_lp = log_prior_density(spec, current);

    const std::size_t total = settings.burn_in + settings.n_samples * settings.thinning;
    PosteriorChain chain;
    chain.samples.reserve(settings.n_samples);
    chain.log_likelihoods.reserve(settings.n_samples);
    std::size_t accepted = 0;

    for (std::size_t step = 0; step < total; ++step) {
        ParamVector proposal = current;
        for (std::size_t i = 0; i < mean_count(h); ++i) proposal.means[i] += settings.proposal_scale * rng.normal();
        for (std::size_t i = 0; i < sigma_count(h); ++i) proposal.sigmas[i] += settings.proposal_scale * rng.normal();

        const double lp = log_prior_density(spec, proposal);
        if (std::isfinite(lp)) {
            const double ll = log_likelihood(proposal, m);
            const double log_ratio = (ll + lp) - (current_ll + current_lp);
            if (log_ratio >= 0.0 || std::log(rng.uniform()) < log_ratio) {
                current = proposal;
                current_ll = ll;
                current_lp = lp;
                ++accepted;
            }
        }

        if (step >= settings.burn_in && (step - settings.burn_in) % settings.thinning == settings.thinning - 1) {
            chain.samples.push_back(current);
            chain.log_likelihoods.push_back(current_ll);
        }
    }

    chain.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(total);
    if (chain.acceptance_rate < 0.01 || chain.acceptance_rate > 0.99) {
        throw ChainDegenerate("Metropolis acceptance rate " + std::to_string(chain.acceptance_rate) +
                              " is outside [0.01, 0.99]; adjust proposal_scale");
    }
    return chain;
}

double log_marginal_harmonic(HypothesisId h, const PriorSpec& spec, const NormalizedSamplePair& data,
                             const EstimatorSettings& settings, std::uint64_t replicate) {
    const PosteriorChain chain = run_posterior_chain(h, spec, data, settings, replicate);
    std::vector<double> neg(chain.log_likelihoods.size());
    std::transform(chain.log_likelihoods.begin(), chain.log_likelihoods.end(), neg.begin(),
                   [](double ll) { return -ll; });
    return -log_mean_exp(neg);
}

MTestResult m_statistic(const SamplePair& data, PriorVariant variant, const EstimatorSettings& settings,
                        AlternativeSet alternatives, std::uint64_t replicate) {
    if (alternatives.empty()) throw std::invalid_argument("at least one alternative hypothesis is required");
    settings.validate();

    const NormalizedSamplePair normalized = normalize(data);
    const DataMoments m = moments(normalized);

    auto estimate = [&](HypothesisId h) {
        const PriorSpec spec = build_prior(h, variant, normalized);
        if (settings.method == EstimatorMethod::PriorMC) return log_marginal(h, spec, m, settings, replicate);
        return log_marginal_harmonic(h, spec, normalized, settings, replicate);
    };

    MTestResult result;
    result.prior_variant = variant;
    result.alternatives = alternatives;
    result.settings = settings;

    const double log_m0 = estimate(HypothesisId::H0);
    result.log_marginals[HypothesisId::H0] = log_m0;
    result.log_m = -std::numeric_limits<double>::infinity();
    for (HypothesisId h : alternatives.members()) {
        const double lm = estimate(h);
        result.log_marginals[h] = lm;
        result.bayes_factors[h] = std::exp(lm - log_m0);
        result.log_m = std::max(result.log_m, lm - log_m0);
    }
    result.m = std::exp(result.log_m);
    return result;
}

}  // namespace mtest
