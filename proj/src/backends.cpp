#include "divkit/backends.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>

#include "httplib.h"
#include "json.hpp"

#include "divkit/sha256.hpp"

namespace divkit {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct SplitUrl {
    std::string base;    // scheme://host[:port]
    std::string prefix;  // optional path prefix, no trailing slash
};

SplitUrl split_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos || scheme_end + 3 >= url.size()) {
        throw ConfigError("endpoint_url must look like http://host[:port][/prefix]: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path_start), prefix};
}

// Rank of the realized token inside the returned top-k map: 1-based position
// after sorting alternatives by logprob descending (token text breaks ties).
std::optional<std::int64_t> rank_in_top_k(const ordered_json& top_logprobs,
                                          const std::string& token) {
    if (!top_logprobs.is_object()) return std::nullopt;
    std::vector<std::pair<double, std::string>> alternatives;
    alternatives.reserve(top_logprobs.size());
    for (const auto& [alt_token, lp] : top_logprobs.items()) {
        if (!lp.is_number()) return std::nullopt;
        alternatives.emplace_back(lp.get<double>(), alt_token);
    }
    std::sort(alternatives.begin(), alternatives.end(),
              [](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first > b.first;
                  return a.second < b.second;
              });
    for (std::size_t i = 0; i < alternatives.size(); ++i) {
        if (alternatives[i].second == token) return static_cast<std::int64_t>(i + 1);
    }
    return std::nullopt;
}

TokenTrace parse_completions_response(const std::string& body, const std::string& text,
                                      const BackendConfig& cfg) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw ProtocolError(std::string("response is not JSON: ") + e.what());
    }

    if (!doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
        throw ProtocolError("response has no choices");
    }
    const auto& choice = doc["choices"][0];
    if (!choice.contains("logprobs") || !choice["logprobs"].is_object()) {
        throw ProtocolError("response lacks logprob fields");
    }
    const auto& logprobs = choice["logprobs"];
    if (!logprobs.contains("tokens") || !logprobs["tokens"].is_array() ||
        !logprobs.contains("token_logprobs") || !logprobs["token_logprobs"].is_array()) {
        throw ProtocolError("response lacks tokens/token_logprobs arrays");
    }
    const auto& tokens = logprobs["tokens"];
    const auto& token_logprobs = logprobs["token_logprobs"];
    if (tokens.size() != token_logprobs.size()) {
        throw ProtocolError("tokens and token_logprobs lengths differ");
    }
    const bool has_top = logprobs.contains("top_logprobs") &&
                         logprobs["top_logprobs"].is_array() &&
                         logprobs["top_logprobs"].size() == tokens.size();

    TokenTrace trace;
    trace.model_id = cfg.model_name;
    trace.text_hash = sha256_hex(text);
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (!tokens[i].is_string()) throw ProtocolError("token entries must be strings");
        if (token_logprobs[i].is_null()) continue;  // undefined logprob, not scored
        if (!token_logprobs[i].is_number()) {
            throw ProtocolError("token_logprobs entries must be numbers or null");
        }
        TokenStep step;
        step.token_text = tokens[i].get<std::string>();
        step.logprob = token_logprobs[i].get<double>();
        if (has_top) step.rank = rank_in_top_k(logprobs["top_logprobs"][i], step.token_text);
        trace.steps.push_back(std::move(step));
    }
    if (trace.steps.empty()) {
        throw ProtocolError("response contained no scored positions");
    }
    try {
        validate(trace);
    } catch (const InvariantViolation& e) {
        throw ProtocolError(std::string("backend emitted an invalid trace: ") + e.what());
    }
    return trace;
}

}  // namespace

void validate(const BackendConfig& cfg) {
    split_url(cfg.endpoint_url);
    if (cfg.model_name.empty()) throw ConfigError("model_name must be nonempty");
    if (cfg.top_k_logprobs < 0 || cfg.top_k_logprobs > 20) {
        throw ConfigError("top_k_logprobs must be in [0, 20]");
    }
    if (cfg.max_parallel_requests < 1) {
        throw ConfigError("max_parallel_requests must be >= 1");
    }
}

std::string backend_params_hash(const BackendConfig& cfg) {
    return sha256_hex("endpoint_url=" + cfg.endpoint_url + "\nmodel_name=" +
                      cfg.model_name + "\ntop_k_logprobs=" +
                      std::to_string(cfg.top_k_logprobs) + "\n");
}

TokenTrace fetch_trace(const std::string& text, const BackendConfig& cfg) {
    validate(cfg);
    if (text.empty()) throw InvariantViolation("text", "must be nonempty");

    const SplitUrl url = split_url(cfg.endpoint_url);
    httplib::Client client(url.base);
    const auto timeout = cfg.request_timeout;
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    httplib::Headers headers;
    if (!cfg.auth_token_env.empty()) {
        if (const char* token = std::getenv(cfg.auth_token_env.c_str());
            token && *token) {
            headers.emplace("Authorization", std::string("Bearer ") + token);
        }
    }

    ordered_json body;
    body["model"] = cfg.model_name;
    body["prompt"] = text;
    body["max_tokens"] = 0;
    body["echo"] = true;
    body["logprobs"] = cfg.top_k_logprobs;

    auto res = client.Post(url.prefix + "/v1/completions", headers, body.dump(),
                           "application/json");
    if (!res) {
        throw TransportError("request to " + cfg.endpoint_url +
                             " failed: " + httplib::to_string(res.error()));
    }
    if (res->status == 401 || res->status == 403) {
        throw AuthError("endpoint " + cfg.endpoint_url + " returned HTTP " +
                        std::to_string(res->status));
    }
    if (res->status < 200 || res->status >= 300) {
        throw ProtocolError("endpoint " + cfg.endpoint_url + " returned HTTP " +
                            std::to_string(res->status));
    }
    return parse_completions_response(res->body, text, cfg);
}

PairedTrace fetch_paired(const std::string& text, const BackendConfig& general_cfg,
                         const BackendConfig& adapted_cfg) {
    PairedTrace pair;
    pair.general = fetch_trace(text, general_cfg);
    pair.adapted = fetch_trace(text, adapted_cfg);
    if (pair.general.steps.size() != pair.adapted.steps.size()) {
        throw TokenizerMismatch("models tokenize the text into " +
                                std::to_string(pair.general.steps.size()) + " vs " +
                                std::to_string(pair.adapted.steps.size()) + " steps");
    }
    for (std::size_t i = 0; i < pair.general.steps.size(); ++i) {
        if (pair.general.steps[i].token_text != pair.adapted.steps[i].token_text) {
            throw TokenizerMismatch("token sequences diverge at step " +
                                    std::to_string(i) + ": '" +
                                    pair.general.steps[i].token_text + "' vs '" +
                                    pair.adapted.steps[i].token_text + "'");
        }
    }
    return pair;
}

TraceCache::TraceCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw StorageError("cannot create cache dir " + dir_.string() + ": " +
                               ec.message());
}

fs::path TraceCache::default_dir() {
    if (const char* env = std::getenv("DIVKIT_CACHE_DIR"); env && *env) {
        return fs::path(env);
    }
    return fs::path(".divkit-cache");
}

fs::path TraceCache::path_for(const CacheKey& key) const {
    return dir_ / (sha256_hex(key.text_hash + "\n" + key.model_id + "\n" +
                              key.backend_params_hash) +
                   ".json");
}

std::optional<TraceRecord> TraceCache::get(const CacheKey& key) const {
    const fs::path path = path_for(key);
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::string line;
    if (!std::getline(in, line) || line.empty()) {
        throw StorageError("cache entry is empty: " + path.string());
    }
    try {
        return trace_record_from_json_line(line);
    } catch (const Error& e) {
        throw StorageError("cache entry is corrupt: " + path.string() + ": " + e.what());
    }
}

void TraceCache::put(const TraceRecord& record) {
    validate(record);
    const fs::path path =
        path_for({record.text_hash, record.model_id, record.backend_params_hash});

    static std::atomic<std::uint64_t> temp_counter{0};
    const fs::path temp = path.string() + ".tmp" +
                          std::to_string(temp_counter.fetch_add(1)) + "-" +
                          std::to_string(::getpid());
    {
        std::ofstream out(temp, std::ios::trunc);
        if (!out) throw StorageError("cannot write " + temp.string());
        out << trace_record_to_json_line(record) << '\n';
        if (!out) throw StorageError("short write to " + temp.string());
    }
    std::error_code ec;
    fs::rename(temp, path, ec);
    if (ec) {
        fs::remove(temp);
        throw StorageError("cannot commit cache entry " + path.string() + ": " +
                           ec.message());
    }
}

}  // namespace divkit
