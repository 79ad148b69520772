#include "divkit/scoring.hpp"

#include <cmath>
#include <functional>
#include <span>
#include <vector>

namespace divkit {

namespace {

// Pairwise (tree) summation keeps long accumulations order-stable; blocks up
// to this size are summed sequentially.
constexpr std::size_t kPairwiseBlock = 1024;

double pairwise_sum(std::span<const double> terms) {
    if (terms.size() <= kPairwiseBlock) {
        double acc = 0.0;
        for (double t : terms) acc += t;
        return acc;
    }
    const std::size_t half = terms.size() / 2;
    return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

double mean_over_steps(const TokenTrace& trace,
                       const std::function<double(const TokenStep&, std::size_t)>& term) {
    if (trace.steps.empty()) throw EmptyTrace();
    std::vector<double> terms;
    terms.reserve(trace.steps.size());
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
        terms.push_back(term(trace.steps[i], i));
    }
    return pairwise_sum(terms) / static_cast<double>(terms.size());
}

void require_aligned(const PairedTrace& pair) {
    if (pair.general.steps.size() != pair.adapted.steps.size()) {
        throw AlignmentError("trace lengths differ: general " +
                             std::to_string(pair.general.steps.size()) + " vs adapted " +
                             std::to_string(pair.adapted.steps.size()));
    }
    for (std::size_t i = 0; i < pair.general.steps.size(); ++i) {
        if (pair.general.steps[i].token_text != pair.adapted.steps[i].token_text) {
            throw AlignmentError("token sequences diverge at step " + std::to_string(i));
        }
    }
}

}  // namespace

double mean_token_entropy(const TokenTrace& trace) {
    return mean_over_steps(trace, [](const TokenStep& s, std::size_t) {
        return -std::exp(s.logprob) * s.logprob;
    });
}

double mean_token_cross_entropy(const PairedTrace& pair) {
    require_aligned(pair);
    if (pair.adapted.steps.empty()) throw EmptyTrace();
    std::vector<double> terms;
    terms.reserve(pair.adapted.steps.size());
    for (std::size_t i = 0; i < pair.adapted.steps.size(); ++i) {
        terms.push_back(-std::exp(pair.general.steps[i].logprob) *
                        pair.adapted.steps[i].logprob);
    }
    return pairwise_sum(terms) / static_cast<double>(terms.size());
}

double mean_logprob(const TokenTrace& trace) {
    return mean_over_steps(trace,
                           [](const TokenStep& s, std::size_t) { return s.logprob; });
}

double mean_negative_logprob(const TokenTrace& trace) { return -mean_logprob(trace); }

DetectorScore divscore_from_components(double entropy, double cross_entropy) {
    if (cross_entropy <= kDegenerateCrossEntropyFloor) {
        throw DegenerateCrossEntropy(cross_entropy);
    }
    DetectorScore score;
    score.method = Method::divscore;
    score.value = entropy / cross_entropy;
    score.components = ScoreComponents{entropy, cross_entropy};
    score.orientation = default_orientation(Method::divscore);
    return score;
}

DetectorScore divscore(const PairedTrace& pair) {
    const double cross_entropy = mean_token_cross_entropy(pair);
    const double entropy = mean_token_entropy(pair.adapted);
    return divscore_from_components(entropy, cross_entropy);
}

DetectorScore baseline_entropy(const TokenTrace& trace) {
    return DetectorScore{Method::entropy, mean_token_entropy(trace), std::nullopt,
                         default_orientation(Method::entropy)};
}

DetectorScore baseline_log_likelihood(const TokenTrace& trace) {
    return DetectorScore{Method::log_likelihood, mean_logprob(trace), std::nullopt,
                         default_orientation(Method::log_likelihood)};
}

DetectorScore baseline_rank(const TokenTrace& trace) {
    const double value = mean_over_steps(trace, [](const TokenStep& s, std::size_t i) {
        if (!s.rank) throw RankUnavailable(i);
        return static_cast<double>(*s.rank);
    });
    return DetectorScore{Method::rank, value, std::nullopt,
                         default_orientation(Method::rank)};
}

DetectorScore baseline_log_rank(const TokenTrace& trace) {
    const double value = mean_over_steps(trace, [](const TokenStep& s, std::size_t i) {
        if (!s.rank) throw RankUnavailable(i);
        return std::log(static_cast<double>(*s.rank));
    });
    return DetectorScore{Method::log_rank, value, std::nullopt,
                         default_orientation(Method::log_rank)};
}

DetectorScore baseline_ppl_ratio(const PairedTrace& pair) {
    const double denominator = mean_token_cross_entropy(pair);
    if (denominator <= kDegenerateCrossEntropyFloor) {
        throw DegenerateCrossEntropy(denominator);
    }
    const double numerator = mean_negative_logprob(pair.general);
    return DetectorScore{Method::ppl_ratio, numerator / denominator, std::nullopt,
                         default_orientation(Method::ppl_ratio)};
}

}  // namespace divkit
