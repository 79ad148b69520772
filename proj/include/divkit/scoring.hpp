#pragma once

#include <cstddef>

#include "divkit/trace.hpp"

namespace divkit {

// Cross-entropy at or below this floor raises DegenerateCrossEntropy instead
// of producing an unbounded ratio.
inline constexpr double kDegenerateCrossEntropyFloor = 1e-9;

// Traces shorter than this score normally but are tagged `short_text` by the
// evaluation layer; nothing is silently excluded.
inline constexpr std::size_t kShortTraceLength = 8;

// Mean realized-token entropy under the trace's model, in nats:
//   -(1/L) * sum_i exp(logprob_i) * logprob_i
// Each per-token term lies in [0, 1/e], so the mean does too.
double mean_token_entropy(const TokenTrace& trace);

// Mean realized-token cross-entropy between the general and adapted models:
//   -(1/L) * sum_i exp(general.logprob_i) * adapted.logprob_i
double mean_token_cross_entropy(const PairedTrace& pair);

// (1/L) * sum_i logprob_i  (always <= 0).
double mean_logprob(const TokenTrace& trace);

// -(1/L) * sum_i logprob_i, the per-token log-perplexity.
double mean_negative_logprob(const TokenTrace& trace);

// Normalized-entropy detector score: entropy / cross-entropy, lower means
// machine-generated. Components are always populated.
DetectorScore divscore(const PairedTrace& pair);

// Same ratio from already-known components; used for golden case studies
// where the component values are the recorded ground truth.
DetectorScore divscore_from_components(double entropy, double cross_entropy);

DetectorScore baseline_entropy(const TokenTrace& trace);
DetectorScore baseline_log_likelihood(const TokenTrace& trace);
DetectorScore baseline_rank(const TokenTrace& trace);
DetectorScore baseline_log_rank(const TokenTrace& trace);

// Ratio of the general model's log-perplexity to the paired cross-entropy,
// the realized-token analogue of a two-model perplexity-ratio detector.
DetectorScore baseline_ppl_ratio(const PairedTrace& pair);

}  // namespace divkit
