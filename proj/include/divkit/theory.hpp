#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "divkit/metrics.hpp"

namespace divkit {

// Finite distribution over an abstract symbol set.
struct Categorical {
    std::vector<double> probs;
};

void validate(const Categorical& c);

// sum_i p_i * ln(p_i / q_i), with 0 * ln(0/q) = 0. Nats.
double kl_divergence(const Categorical& p, const Categorical& q);

// delta_KL = KL(P || Qp) - KL(Q || Qp): human-vs-source divergence minus
// detector-vs-source divergence. Negative values mean the detector is worse
// than chance in this regime.
double effective_kl(const Categorical& P, const Categorical& Q, const Categorical& Qp);

// Gaussian model of the entropy score: human scores ~ N(mu_P, sigma_P^2),
// machine scores ~ N(mu_Q, sigma_Qp^2). The mean gap mu_P - mu_Q plays the
// role of delta_KL; the entropy terms of the two distributions are assumed
// equal and drop out.
struct GaussianDetectorModel {
    double mu_P = 0.0;
    double sigma_P = 1.0;
    double mu_Q = 0.0;
    double sigma_Qp = 1.0;
};

void validate(const GaussianDetectorModel& model);

// Standard normal CDF, absolute error well under 1e-10.
double std_normal_cdf(double z);

// Phi((mu_P - mu_Q) / sqrt(sigma_P^2 + sigma_Qp^2)).
double closed_form_auroc(const GaussianDetectorModel& model);

// Seedable standard-normal sampler: mt19937_64 driving the Marsaglia polar
// method. Same seed, same platform => same stream.
class PolarGaussian {
public:
    explicit PolarGaussian(std::uint64_t seed) : rng_(seed) {}

    double next();

private:
    double uniform01() {
        return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    }

    std::mt19937_64 rng_;
    std::optional<double> spare_;
};

// Empirical AUROC of the Gaussian model: n_per_class draws per label, scored
// lower_is_machine. Deterministic for a fixed seed.
double simulate_auroc(const GaussianDetectorModel& model, std::size_t n_per_class,
                      std::uint64_t seed);

// Strictly monotone score transform; decreasing maps flip the orientation.
struct MonotoneMap {
    std::string name;
    std::function<double(double)> apply;
    bool increasing = true;
};

// affine-up, exp, affine-down, negation.
std::vector<MonotoneMap> default_monotone_family();

struct MonotoneMapResult {
    std::string map_name;
    bool increasing = true;
    double auroc_before = 0.0;
    double auroc_after = 0.0;
    double tpr_before = 0.0;
    double tpr_after = 0.0;
    bool identical = false;  // both metrics bit-identical across the map
};

// Executable form of the ranking-preservation argument: AUROC and TPR@FPR
// must not move under any strictly monotone re-scoring.
std::vector<MonotoneMapResult> monotone_transform_suite(
    std::span<const LabeledScore> scores, std::span<const MonotoneMap> family,
    double target_fpr = 0.001);

}  // namespace divkit
