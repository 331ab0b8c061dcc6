#include "mtest/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mtest/error.hpp"

namespace mtest {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;  // ln(2 pi)

double normal_log_density(double x, const NormalPrior& p) noexcept {
    const double d = x - p.center;
    return -0.5 * (kLogTwoPi + std::log(p.variance)) - 0.5 * d * d / p.variance;
}

UniformPrior sigma_prior(double hi) {
    if (!(hi > kSigmaEpsilon) || !std::isfinite(hi)) {
        throw InvalidPrior("sigma prior upper bound " + std::to_string(hi) + " does not exceed epsilon");
    }
    return {kSigmaEpsilon, hi};
}

NormalPrior mean_prior(double center, double variance) {
    if (!(variance > 0.0) || !std::isfinite(variance)) {
        throw InvalidPrior("mean prior variance must be positive, got " + std::to_string(variance));
    }
    return {center, variance};
}

/// Mean prior and sigma upper bound for one set of observations.
struct GroupPrior {
    NormalPrior mean;
    double sigma_hi;
};

GroupPrior group_prior(std::span<const double> y, PriorVariant v, double main_sigma_hi) {
    const SummaryStats s = summary(y);
    switch (v) {
        case PriorVariant::Main:
            return {mean_prior(s.mean, 1.0 / static_cast<double>(s.n)), main_sigma_hi};
        case PriorVariant::Informative:
            return {mean_prior(s.mean, s.sem * s.sem), sigma_3sem(y)};
        case PriorVariant::NonInformative:
            return {mean_prior(s.mean, 1.0), 3.0};
    }
    throw std::logic_error("unknown prior variant");
}

}  // namespace

std::string_view to_string(HypothesisId h) noexcept {
    switch (h) {
        case HypothesisId::H0: return "H0";
        case HypothesisId::H1: return "H1";
        case HypothesisId::H2: return "H2";
    }
    return "?";
}

std::string_view to_string(PriorVariant v) noexcept {
    switch (v) {
        case PriorVariant::Main: return "main";
        case PriorVariant::Informative: return "informative";
        case PriorVariant::NonInformative: return "noninformative";
    }
    return "?";
}

std::optional<HypothesisId> parse_hypothesis(std::string_view name) noexcept {
    if (name == "H0" || name == "h0") return HypothesisId::H0;
    if (name == "H1" || name == "h1") return HypothesisId::H1;
    if (name == "H2" || name == "h2") return HypothesisId::H2;
    return std::nullopt;
}

std::optional<PriorVariant> parse_variant(std::string_view name) noexcept {
    if (name == "main") return PriorVariant::Main;
    if (name == "informative") return PriorVariant::Informative;
    if (name == "noninformative") return PriorVariant::NonInformative;
    return std::nullopt;
}

GroupMoments moments(std::span<const double> y) {
    GroupMoments g;
    g.n = y.size();
    if (g.n == 0) return g;
    double sum = 0.0;
    for (double v : y) sum += v;
    g.mean = sum / static_cast<double>(g.n);
    for (double v : y) g.centered_ss += (v - g.mean) * (v - g.mean);
    return g;
}

DataMoments moments(const NormalizedSamplePair& data) {
    const std::vector<double> all = data.pooled();
    return {moments(all), moments(data.y1()), moments(data.y2())};
}

PriorSpec build_prior(HypothesisId h, PriorVariant v, const NormalizedSamplePair& data) {
    PriorSpec spec;
    spec.hypothesis = h;
    spec.variant = v;

    if (h == HypothesisId::H0) {
        const std::vector<double> all = data.pooled();
        const GroupPrior p = group_prior(all, v, 3.0);
        spec.means[0] = p.mean;
        spec.sigmas[0] = sigma_prior(p.sigma_hi);
        return spec;
    }

    const GroupPrior g1 = group_prior(data.y1(), v, 1.0);
    const GroupPrior g2 = group_prior(data.y2(), v, 1.0);
    spec.means = {g1.mean, g2.mean};
    if (h == HypothesisId::H1) {
        spec.sigmas[0] = sigma_prior(std::max(g1.sigma_hi, g2.sigma_hi));
    } else {
        spec.sigmas = {sigma_prior(g1.sigma_hi), sigma_prior(g2.sigma_hi)};
    }
    return spec;
}

ParamVector sample_prior(const PriorSpec& spec, RandomStream& rng) {
    ParamVector p;
    p.hypothesis = spec.hypothesis;
    for (std::size_t i = 0; i < mean_count(spec.hypothesis); ++i) {
        p.means[i] = rng.normal(spec.means[i].center, std::sqrt(spec.means[i].variance));
    }
    for (std::size_t i = 0; i < sigma_count(spec.hypothesis); ++i) {
        p.sigmas[i] = rng.uniform_open(spec.sigmas[i].lo, spec.sigmas[i].hi);
    }
    return p;
}

double normal_group_log_likelihood(const GroupMoments& g, double mu, double sigma) noexcept {
    const auto n = static_cast<double>(g.n);
    const double d = g.mean - mu;
    return -0.5 * n * kLogTwoPi - n * std::log(sigma) - (g.centered_ss + n * d * d) / (2.0 * sigma * sigma);
}

double log_likelihood(const ParamVector& p, const DataMoments& m) noexcept {
    switch (p.hypothesis) {
        case HypothesisId::H0:
            return normal_group_log_likelihood(m.pooled, p.means[0], p.sigmas[0]);
        case HypothesisId::H1:
            return normal_group_log_likelihood(m.group1, p.means[0], p.sigmas[0]) +
                   normal_group_log_likelihood(m.group2, p.means[1], p.sigmas[0]);
        case HypothesisId::H2:
            return normal_group_log_likelihood(m.group1, p.means[0], p.sigmas[0]) +
                   normal_group_log_likelihood(m.group2, p.means[1], p.sigmas[1]);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double log_likelihood(HypothesisId h, const ParamVector& params, const NormalizedSamplePair& data) {
    if (params.hypothesis != h) {
        throw std::invalid_argument("parameter vector belongs to " + std::string(to_string(params.hypothesis)) +
                                    ", not " + std::string(to_string(h)));
    }
    return log_likelihood(params, moments(data));
}

double log_prior_density(const PriorSpec& spec, const ParamVector& params) {
    if (params.hypothesis != spec.hypothesis) {
        throw std::invalid_argument("parameter vector and prior belong to different hypotheses");
    }
    double lp = 0.0;
    for (std::size_t i = 0; i < sigma_count(spec.hypothesis); ++i) {
        const UniformPrior& u = spec.sigmas[i];
        const double s = params.sigmas[i];
        if (!(s > u.lo && s < u.hi)) return -std::numeric_limits<double>::infinity();
        lp -= std::log(u.hi - u.lo);
    }
    for (std::size_t i = 0; i < mean_count(spec.hypothesis); ++i) {
        lp += normal_log_density(params.means[i], spec.means[i]);
    }
    return lp;
}

}  // namespace mtest
