#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "divkit/errors.hpp"

namespace divkit {

// One scored position: the realized token's surface form, its natural-log
// probability under the model, and the token's rank among the model's
// candidates when the backend exposed it (1 = argmax).
struct TokenStep {
    std::string token_text;
    double logprob = 0.0;                 // nats, <= 0
    std::optional<std::int64_t> rank;     // >= 1 when known
};

// Per-token record of one text under one model.
struct TokenTrace {
    std::string model_id;
    std::vector<TokenStep> steps;
    std::string text_hash;                // lowercase hex sha256 of the scored text
};

// Traces of the same token sequence under the general model M and the
// domain-adapted model M*. Both models must share a tokenizer.
struct PairedTrace {
    TokenTrace general;
    TokenTrace adapted;
};

enum class Method { divscore, entropy, log_likelihood, rank, log_rank, ppl_ratio };

// Which end of the score axis means "machine-generated".
enum class Orientation { lower_is_machine, higher_is_machine };

struct ScoreComponents {
    double entropy = 0.0;
    double cross_entropy = 0.0;
};

struct DetectorScore {
    Method method = Method::divscore;
    double value = 0.0;
    std::optional<ScoreComponents> components;
    Orientation orientation = Orientation::lower_is_machine;
};

std::string_view method_name(Method m);
std::optional<Method> method_from_name(std::string_view name);
std::string_view orientation_name(Orientation o);
std::optional<Orientation> orientation_from_name(std::string_view name);

// Fixed per-method score direction.
Orientation default_orientation(Method m);

bool is_hex_sha256(std::string_view s);

// Contract checks; throw InvariantViolation / AlignmentError.
void validate(const TokenStep& step);
void validate(const TokenTrace& trace);
void validate(const PairedTrace& pair);

}  // namespace divkit
