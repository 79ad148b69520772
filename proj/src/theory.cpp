#include "divkit/theory.hpp"

#include <cmath>

namespace divkit {

void validate(const Categorical& c) {
    if (c.probs.empty()) {
        throw InvariantViolation("probs", "distribution must be nonempty");
    }
    double sum = 0.0;
    double max_p = 0.0;
    for (double p : c.probs) {
        if (p < 0.0 || !std::isfinite(p)) {
            throw InvariantViolation("probs", "entries must be finite and >= 0");
        }
        sum += p;
        max_p = std::max(max_p, p);
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw InvariantViolation("probs", "must sum to 1 within 1e-12, got " +
                                              std::to_string(sum));
    }
    if (max_p == 0.0) {
        throw InvariantViolation("probs", "at least one entry must be > 0");
    }
}

double kl_divergence(const Categorical& p, const Categorical& q) {
    if (p.probs.size() != q.probs.size()) {
        throw SupportMismatch(p.probs.size(), q.probs.size());
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < p.probs.size(); ++i) {
        const double pi = p.probs[i];
        if (pi == 0.0) continue;
        if (q.probs[i] == 0.0) throw AbsoluteContinuityViolation(i);
        sum += pi * std::log(pi / q.probs[i]);
    }
    return sum;
}

double effective_kl(const Categorical& P, const Categorical& Q, const Categorical& Qp) {
    return kl_divergence(P, Qp) - kl_divergence(Q, Qp);
}

void validate(const GaussianDetectorModel& model) {
    if (!(model.sigma_P > 0.0) || !(model.sigma_Qp > 0.0)) {
        throw InvariantViolation("sigma", "standard deviations must be > 0");
    }
    if (!std::isfinite(model.mu_P) || !std::isfinite(model.mu_Q)) {
        throw InvariantViolation("mu", "means must be finite");
    }
}

double std_normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

double closed_form_auroc(const GaussianDetectorModel& model) {
    validate(model);
    const double spread =
        std::sqrt(model.sigma_P * model.sigma_P + model.sigma_Qp * model.sigma_Qp);
    return std_normal_cdf((model.mu_P - model.mu_Q) / spread);
}

double PolarGaussian::next() {
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    for (;;) {
        const double u = 2.0 * uniform01() - 1.0;
        const double v = 2.0 * uniform01() - 1.0;
        const double s = u * u + v * v;
        if (s > 0.0 && s < 1.0) {
            const double mult = std::sqrt(-2.0 * std::log(s) / s);
            spare_ = v * mult;
            return u * mult;
        }
    }
}

double simulate_auroc(const GaussianDetectorModel& model, std::size_t n_per_class,
                      std::uint64_t seed) {
    validate(model);
    PolarGaussian gaussian(seed);
    std::vector<LabeledScore> scores;
    scores.reserve(2 * n_per_class);
    for (std::size_t i = 0; i < n_per_class; ++i) {
        LabeledScore s;
        s.doc_id = "sim-machine-" + std::to_string(i);
        s.score = model.mu_Q + model.sigma_Qp * gaussian.next();
        s.label = Label::machine;
        s.method = Method::entropy;
        s.orientation = Orientation::lower_is_machine;
        scores.push_back(std::move(s));
    }
    for (std::size_t i = 0; i < n_per_class; ++i) {
        LabeledScore s;
        s.doc_id = "sim-human-" + std::to_string(i);
        s.score = model.mu_P + model.sigma_P * gaussian.next();
        s.label = Label::human;
        s.method = Method::entropy;
        s.orientation = Orientation::lower_is_machine;
        scores.push_back(std::move(s));
    }
    return auroc(scores);
}

std::vector<MonotoneMap> default_monotone_family() {
    return {
        {"affine_up", [](double x) { return 2.0 * x + 3.0; }, true},
        {"exp", [](double x) { return std::exp(x); }, true},
        {"affine_down", [](double x) { return -2.0 * x + 1.0; }, false},
        {"negation", [](double x) { return -x; }, false},
    };
}

std::vector<MonotoneMapResult> monotone_transform_suite(
    std::span<const LabeledScore> scores, std::span<const MonotoneMap> family,
    double target_fpr) {
    const double base_auroc = auroc(scores);
    const double base_tpr = tpr_at_fpr(scores, target_fpr).tpr;

    std::vector<MonotoneMapResult> results;
    results.reserve(family.size());
    for (const MonotoneMap& map : family) {
        std::vector<LabeledScore> mapped(scores.begin(), scores.end());
        for (LabeledScore& s : mapped) {
            s.score = map.apply(s.score);
            if (!map.increasing) {
                s.orientation = s.orientation == Orientation::lower_is_machine
                                    ? Orientation::higher_is_machine
                                    : Orientation::lower_is_machine;
            }
        }
        MonotoneMapResult r;
        r.map_name = map.name;
        r.increasing = map.increasing;
        r.auroc_before = base_auroc;
        r.auroc_after = auroc(mapped);
        r.tpr_before = base_tpr;
        r.tpr_after = tpr_at_fpr(mapped, target_fpr).tpr;
        r.identical = r.auroc_after == r.auroc_before && r.tpr_after == r.tpr_before;
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace divkit
