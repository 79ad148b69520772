#include "divkit/trace.hpp"

#include <cctype>

namespace divkit {

std::string_view method_name(Method m) {
    switch (m) {
        case Method::divscore: return "divscore";
        case Method::entropy: return "entropy";
        case Method::log_likelihood: return "log_likelihood";
        case Method::rank: return "rank";
        case Method::log_rank: return "log_rank";
        case Method::ppl_ratio: return "ppl_ratio";
    }
    return "unknown";
}

std::optional<Method> method_from_name(std::string_view name) {
    if (name == "divscore") return Method::divscore;
    if (name == "entropy") return Method::entropy;
    if (name == "log_likelihood") return Method::log_likelihood;
    if (name == "rank") return Method::rank;
    if (name == "log_rank") return Method::log_rank;
    if (name == "ppl_ratio") return Method::ppl_ratio;
    return std::nullopt;
}

std::string_view orientation_name(Orientation o) {
    return o == Orientation::lower_is_machine ? "lower_is_machine" : "higher_is_machine";
}

std::optional<Orientation> orientation_from_name(std::string_view name) {
    if (name == "lower_is_machine") return Orientation::lower_is_machine;
    if (name == "higher_is_machine") return Orientation::higher_is_machine;
    return std::nullopt;
}

Orientation default_orientation(Method m) {
    switch (m) {
        case Method::divscore: return Orientation::lower_is_machine;
        case Method::entropy: return Orientation::lower_is_machine;
        case Method::ppl_ratio: return Orientation::lower_is_machine;
        case Method::log_likelihood: return Orientation::higher_is_machine;
        // Mean rank and mean log-rank grow with machine likelihood here;
        // runs can override this direction (see RunConfig::rank_orientation).
        case Method::rank: return Orientation::higher_is_machine;
        case Method::log_rank: return Orientation::higher_is_machine;
    }
    return Orientation::lower_is_machine;
}

bool is_hex_sha256(std::string_view s) {
    if (s.size() != 64) return false;
    for (char c : s) {
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    }
    return true;
}

void validate(const TokenStep& step) {
    if (!(step.logprob <= 0.0)) {
        throw InvariantViolation("logprob", "must be <= 0 (nats), got " +
                                                std::to_string(step.logprob));
    }
    if (step.rank && *step.rank < 1) {
        throw InvariantViolation("rank", "must be >= 1 when known, got " +
                                             std::to_string(*step.rank));
    }
}

void validate(const TokenTrace& trace) {
    if (trace.steps.empty()) {
        throw InvariantViolation("steps", "trace must contain at least one step");
    }
    if (trace.model_id.empty()) {
        throw InvariantViolation("model_id", "must be nonempty");
    }
    for (const TokenStep& step : trace.steps) validate(step);
}

void validate(const PairedTrace& pair) {
    validate(pair.general);
    validate(pair.adapted);
    if (pair.general.steps.size() != pair.adapted.steps.size()) {
        throw AlignmentError("trace lengths differ: general " +
                             std::to_string(pair.general.steps.size()) + " vs adapted " +
                             std::to_string(pair.adapted.steps.size()));
    }
    for (std::size_t i = 0; i < pair.general.steps.size(); ++i) {
        if (pair.general.steps[i].token_text != pair.adapted.steps[i].token_text) {
            throw AlignmentError("token sequences diverge at step " + std::to_string(i) +
                                 ": '" + pair.general.steps[i].token_text + "' vs '" +
                                 pair.adapted.steps[i].token_text + "'");
        }
    }
}

}  // namespace divkit
