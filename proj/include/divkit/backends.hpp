#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>

#include "divkit/trace.hpp"
#include "divkit/trace_io.hpp"

namespace divkit {

// Connection settings for one OpenAI-compatible completions endpoint that
// supports echoed prompts with per-token logprobs.
struct BackendConfig {
    std::string endpoint_url;
    std::string model_name;
    int top_k_logprobs = 5;  // [0, 20]
    std::chrono::milliseconds request_timeout{30000};
    int max_parallel_requests = 4;
    std::string auth_token_env;  // name of the env var holding the credential
};

void validate(const BackendConfig& cfg);

// Hash of the scoring-relevant parameters (endpoint, model, top_k). Timeouts,
// parallelism and credentials never enter the key.
std::string backend_params_hash(const BackendConfig& cfg);

// POST {endpoint_url}/v1/completions with
// {"model","prompt","max_tokens":0,"echo":true,"logprobs":k}; parses token
// strings, realized-token logprobs and ranks. Positions without a defined
// logprob (typically position 0) are dropped; rank is unknown when the
// realized token is absent from the returned top-k.
TokenTrace fetch_trace(const std::string& text, const BackendConfig& cfg);

// Fetches the general and adapted traces and checks token alignment; the two
// models must share a tokenizer.
PairedTrace fetch_paired(const std::string& text, const BackendConfig& general_cfg,
                         const BackendConfig& adapted_cfg);

struct CacheKey {
    std::string text_hash;
    std::string model_id;
    std::string backend_params_hash;
};

// Content-addressed trace store; puts are atomic (temp file + rename).
class TraceCache {
public:
    explicit TraceCache(std::filesystem::path dir);

    // DIVKIT_CACHE_DIR when set, else .divkit-cache in the working directory.
    static std::filesystem::path default_dir();

    std::optional<TraceRecord> get(const CacheKey& key) const;
    void put(const TraceRecord& record);

    const std::filesystem::path& dir() const { return dir_; }
    std::filesystem::path path_for(const CacheKey& key) const;

private:
    std::filesystem::path dir_;
};

}  // namespace divkit
