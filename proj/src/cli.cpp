#include "divkit/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "divkit/scoring.hpp"
#include "divkit/sha256.hpp"
#include "divkit/theory.hpp"
#include "divkit/trace_io.hpp"

namespace divkit::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// Record-level miss that is reported and skipped, unlike transport failures
// which abort the run.
class TraceUnavailable final : public Error {
public:
    explicit TraceUnavailable(const std::string& what) : Error(what) {}
};

int exit_code_for(const Error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitUsage;
    if (dynamic_cast<const TransportError*>(&e) || dynamic_cast<const AuthError*>(&e) ||
        dynamic_cast<const ProtocolError*>(&e)) {
        return kExitTransport;
    }
    return kExitData;
}

const char* error_label(const Error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
    if (dynamic_cast<const TransportError*>(&e)) return "TransportError";
    if (dynamic_cast<const AuthError*>(&e)) return "AuthError";
    if (dynamic_cast<const ProtocolError*>(&e)) return "ProtocolError";
    if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
    if (dynamic_cast<const SchemaViolation*>(&e)) return "SchemaViolation";
    if (dynamic_cast<const InvariantViolation*>(&e)) return "InvariantViolation";
    if (dynamic_cast<const DanglingPair*>(&e)) return "DanglingPair";
    if (dynamic_cast<const StorageError*>(&e)) return "StorageError";
    if (dynamic_cast<const MixedMethods*>(&e)) return "MixedMethods";
    if (dynamic_cast<const DegenerateLabels*>(&e)) return "DegenerateLabels";
    if (dynamic_cast<const EmptyInput*>(&e)) return "EmptyInput";
    return "error";
}

template <typename F>
int guarded(F&& body, std::ostream& diag) {
    try {
        return body();
    } catch (const Error& e) {
        diag << error_label(e) << ": " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        diag << "error: " << e.what() << "\n";
        return kExitData;
    }
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string current;
    for (char c : s) {
        if (c == sep) {
            parts.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    parts.push_back(current);
    return parts;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t consumed = 0;
        const double parsed = std::stod(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not a number: '" + value + "'");
    }
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t consumed = 0;
        const std::int64_t parsed = std::stoll(value, &consumed);
        if (consumed != value.size()) throw std::invalid_argument(value);
        return parsed;
    } catch (const std::exception&) {
        throw ConfigError(key + ": not an integer: '" + value + "'");
    }
}

bool apply_backend_entry(BackendConfig& backend, const std::string& key,
                         const std::string& field, const std::string& value) {
    if (field == "endpoint_url") {
        backend.endpoint_url = value;
    } else if (field == "model_name") {
        backend.model_name = value;
    } else if (field == "top_k_logprobs") {
        backend.top_k_logprobs = static_cast<int>(parse_int(key, value));
    } else if (field == "timeout_ms") {
        backend.request_timeout = std::chrono::milliseconds(parse_int(key, value));
    } else if (field == "max_parallel_requests") {
        backend.max_parallel_requests = static_cast<int>(parse_int(key, value));
    } else if (field == "auth_token_env") {
        backend.auth_token_env = value;
    } else {
        return false;
    }
    return true;
}

std::string render17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out) throw StorageError("cannot write " + path);
    out << content;
    if (!out) throw StorageError("short write to " + path);
}

std::string sanitize_for_filename(const std::string& s) {
    std::string out;
    for (char c : s) {
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '-');
    }
    return out.empty() ? std::string("-") : out;
}

// ---- trace resolution: replay file, then cache, then live endpoint ----

class TraceResolver {
public:
    TraceResolver(const RunConfig& config, bool needs_general, bool needs_adapted)
        : config_(config) {
        if (!config.replay_path.empty()) {
            for (TraceRecord& record : replay_load(config.replay_path)) {
                replay_[{record.text_hash, record.model_id}] = std::move(record);
            }
        }
        if (!config.cache_dir.empty()) cache_.emplace(fs::path(config.cache_dir));
        if (needs_general) require_model(config.general, "general");
        if (needs_adapted) require_model(config.adapted, "adapted");
    }

    TokenTrace resolve(const std::string& text, const BackendConfig& backend) const {
        const std::string text_hash = sha256_hex(text);
        if (const auto it = replay_.find({text_hash, backend.model_name});
            it != replay_.end()) {
            return it->second.trace;
        }
        const CacheKey key{text_hash, backend.model_name, backend_params_hash(backend)};
        if (cache_) {
            if (auto hit = cache_->get(key)) return hit->trace;
        }
        if (backend.endpoint_url.empty()) {
            throw TraceUnavailable("no recorded trace for model '" + backend.model_name +
                                   "' and no endpoint configured (text_hash " +
                                   text_hash + ")");
        }
        TokenTrace trace = fetch_trace(text, backend);
        if (cache_) {
            TraceRecord record;
            record.text_hash = text_hash;
            record.model_id = backend.model_name;
            record.backend_params_hash = key.backend_params_hash;
            record.created_at = current_utc_timestamp();
            record.trace = trace;
            cache_->put(record);
        }
        return trace;
    }

    PairedTrace resolve_pair(const std::string& text) const {
        PairedTrace pair;
        pair.general = resolve(text, config_.general);
        pair.adapted = resolve(text, config_.adapted);
        if (pair.general.steps.size() != pair.adapted.steps.size()) {
            throw TokenizerMismatch("general and adapted traces have " +
                                    std::to_string(pair.general.steps.size()) + " vs " +
                                    std::to_string(pair.adapted.steps.size()) + " steps");
        }
        for (std::size_t i = 0; i < pair.general.steps.size(); ++i) {
            if (pair.general.steps[i].token_text != pair.adapted.steps[i].token_text) {
                throw TokenizerMismatch("token sequences diverge at step " +
                                        std::to_string(i));
            }
        }
        return pair;
    }

private:
    static void require_model(const BackendConfig& backend, const char* which) {
        if (backend.model_name.empty()) {
            throw ConfigError(std::string(which) +
                              ".model_name is required by the selected methods");
        }
        if (!backend.endpoint_url.empty()) validate(backend);
    }

    static std::string current_utc_timestamp() {
        const std::time_t now = std::time(nullptr);
        std::tm utc{};
        gmtime_r(&now, &utc);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &utc);
        return buf;
    }

    const RunConfig& config_;
    std::map<std::pair<std::string, std::string>, TraceRecord> replay_;
    mutable std::optional<TraceCache> cache_;
};

bool needs_paired(Method m) { return m == Method::divscore || m == Method::ppl_ratio; }

struct RecordOutcome {
    std::vector<ScoreRow> rows;
    std::vector<std::string> diagnostics;
    std::exception_ptr fatal;
};

}  // namespace

void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value) {
    if (key == "corpus_path") {
        config.corpus_path = value;
    } else if (key == "replay_path") {
        config.replay_path = value;
    } else if (key == "cache_dir") {
        config.cache_dir = value;
    } else if (key == "scores_out") {
        config.scores_out = value;
    } else if (key == "report_out") {
        config.report_out = value;
    } else if (key == "roc_dir") {
        config.roc_dir = value;
    } else if (key == "target_fpr") {
        config.target_fpr = parse_double(key, value);
        if (!(config.target_fpr > 0.0 && config.target_fpr < 1.0)) {
            throw ConfigError("target_fpr must lie in (0, 1)");
        }
    } else if (key == "seed") {
        config.seed = static_cast<std::uint64_t>(parse_int(key, value));
    } else if (key == "methods") {
        config.methods.clear();
        for (const std::string& part : split(value, ',')) {
            const std::string name = trim(part);
            if (name.empty()) continue;
            const auto method = method_from_name(name);
            if (!method) throw ConfigError("methods: unknown method '" + name + "'");
            if (std::find(config.methods.begin(), config.methods.end(), *method) ==
                config.methods.end()) {
                config.methods.push_back(*method);
            }
        }
    } else if (key == "baseline_trace") {
        if (value != "adapted" && value != "general") {
            throw ConfigError("baseline_trace must be adapted|general");
        }
        config.baseline_trace = value;
    } else if (key == "rank_orientation") {
        const auto orientation = orientation_from_name(value);
        if (!orientation) {
            throw ConfigError("rank_orientation must be lower_is_machine|higher_is_machine");
        }
        config.rank_orientation = *orientation;
    } else if (key == "entropy_mode") {
        if (value == "full_vocab") {
            throw ConfigError(
                "entropy_mode full_vocab is reserved for a future extension; "
                "only 'realized' is implemented");
        }
        if (value != "realized") {
            throw ConfigError("entropy_mode must be 'realized'");
        }
        config.entropy_mode = value;
    } else if (key.rfind("general.", 0) == 0) {
        if (!apply_backend_entry(config.general, key, key.substr(8), value)) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    } else if (key.rfind("adapted.", 0) == 0) {
        if (!apply_backend_entry(config.adapted, key, key.substr(8), value)) {
            throw ConfigError("unknown config key '" + key + "'");
        }
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

RunConfig parse_config_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());

    RunConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        try {
            apply_config_entry(config, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return config;
}

std::string score_row_to_json_line(const ScoreRow& row) {
    ordered_json doc;
    doc["doc_id"] = row.doc_id;
    doc["pair_id"] = row.pair_id;
    doc["method"] = std::string(method_name(row.method));
    doc["value"] = row.value;
    doc["orientation"] = std::string(orientation_name(row.orientation));
    doc["label"] = std::string(label_name(row.label));
    doc["domain"] = row.domain;
    doc["dataset"] = row.dataset;
    doc["source_model"] =
        row.source_model ? ordered_json(*row.source_model) : ordered_json(nullptr);
    doc["attack"] = std::string(attack_name(row.attack));
    doc["flags"] = row.flags;
    return doc.dump();
}

ScoreRow score_row_from_json_line(const std::string& line, std::size_t line_no) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }
    auto require_string = [&](const char* key) -> std::string {
        if (!doc.contains(key) || !doc[key].is_string()) {
            throw SchemaViolation(line_no, key, "missing or non-string");
        }
        return doc[key].get<std::string>();
    };

    ScoreRow row;
    row.doc_id = require_string("doc_id");
    row.pair_id = require_string("pair_id");

    const auto method = method_from_name(require_string("method"));
    if (!method) throw SchemaViolation(line_no, "method", "unknown method");
    row.method = *method;

    if (!doc.contains("value") || !doc["value"].is_number()) {
        throw SchemaViolation(line_no, "value", "missing or non-numeric");
    }
    row.value = doc["value"].get<double>();
    if (!std::isfinite(row.value)) {
        throw SchemaViolation(line_no, "value", "must be finite");
    }

    const auto orientation = orientation_from_name(require_string("orientation"));
    if (!orientation) throw SchemaViolation(line_no, "orientation", "unknown direction");
    row.orientation = *orientation;

    const auto label = label_from_name(require_string("label"));
    if (!label) throw SchemaViolation(line_no, "label", "must be human|machine");
    row.label = *label;

    row.domain = require_string("domain");
    row.dataset = require_string("dataset");
    if (doc.contains("source_model") && !doc["source_model"].is_null()) {
        if (!doc["source_model"].is_string()) {
            throw SchemaViolation(line_no, "source_model", "must be string or null");
        }
        row.source_model = doc["source_model"].get<std::string>();
    }
    const auto attack = attack_from_name(require_string("attack"));
    if (!attack) throw SchemaViolation(line_no, "attack", "unknown attack");
    row.attack = *attack;

    if (doc.contains("flags")) {
        if (!doc["flags"].is_array()) throw SchemaViolation(line_no, "flags", "must be array");
        for (const auto& f : doc["flags"]) {
            if (!f.is_string()) throw SchemaViolation(line_no, "flags", "must be strings");
            row.flags.push_back(f.get<std::string>());
        }
    }
    return row;
}

std::vector<ScoreRow> load_scores(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw StorageError("cannot open scores: " + path.string());
    std::vector<ScoreRow> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        rows.push_back(score_row_from_json_line(line, line_no));
    }
    return rows;
}

LabeledScore to_labeled_score(const ScoreRow& row) {
    LabeledScore s;
    s.doc_id = row.doc_id;
    s.score = row.value;
    s.label = row.label;
    s.method = row.method;
    s.orientation = row.orientation;
    s.domain = row.domain;
    s.source_model = row.source_model;
    s.attack = row.attack;
    return s;
}

namespace {

RecordOutcome score_record(const CorpusRecord& record, const RunConfig& config,
                           const TraceResolver& resolver, bool use_general_baseline) {
    RecordOutcome outcome;

    auto base_row = [&](Method method, const DetectorScore& score) {
        ScoreRow row;
        row.doc_id = record.id;
        row.pair_id = record.pair_id;
        row.method = method;
        row.value = score.value;
        row.orientation = score.orientation;
        row.label = record.label;
        row.domain = record.domain;
        row.dataset = record.dataset;
        row.source_model = record.source_model;
        row.attack = record.attack;
        return row;
    };

    // Shared trace lookups; a record-level failure here skips the record's
    // affected methods with a diagnostic instead of aborting the run.
    std::optional<PairedTrace> pair;
    std::optional<TokenTrace> baseline;

    for (Method method : config.methods) {
        try {
            DetectorScore score;
            std::size_t scored_length = 0;
            if (needs_paired(method)) {
                if (!pair) pair = resolver.resolve_pair(record.text);
                score = method == Method::divscore ? divscore(*pair)
                                                   : baseline_ppl_ratio(*pair);
                scored_length = pair->adapted.steps.size();
            } else {
                if (!baseline) {
                    baseline = resolver.resolve(
                        record.text, use_general_baseline ? config.general : config.adapted);
                }
                switch (method) {
                    case Method::entropy: score = baseline_entropy(*baseline); break;
                    case Method::log_likelihood:
                        score = baseline_log_likelihood(*baseline);
                        break;
                    case Method::rank: score = baseline_rank(*baseline); break;
                    case Method::log_rank: score = baseline_log_rank(*baseline); break;
                    default: break;
                }
                if (method == Method::rank || method == Method::log_rank) {
                    score.orientation = config.rank_orientation;
                }
                scored_length = baseline->steps.size();
            }
            ScoreRow row = base_row(method, score);
            if (scored_length < kShortTraceLength) row.flags.push_back("short_text");
            outcome.rows.push_back(std::move(row));
        } catch (const DegenerateCrossEntropy& e) {
            outcome.diagnostics.push_back(record.id + " " +
                                          std::string(method_name(method)) +
                                          ": degenerate_cross_entropy: " + e.what());
        } catch (const RankUnavailable& e) {
            outcome.diagnostics.push_back(record.id + " " +
                                          std::string(method_name(method)) +
                                          ": rank_unavailable: " + e.what());
        } catch (const TokenizerMismatch& e) {
            outcome.diagnostics.push_back(record.id + " " +
                                          std::string(method_name(method)) +
                                          ": tokenizer_mismatch: " + e.what());
        } catch (const TraceUnavailable& e) {
            outcome.diagnostics.push_back(record.id + " " +
                                          std::string(method_name(method)) +
                                          ": trace_missing: " + e.what());
        } catch (...) {
            outcome.fatal = std::current_exception();
            return outcome;
        }
    }
    return outcome;
}

}  // namespace

int cmd_score(const RunConfig& config, std::ostream& diag) {
    return guarded(
        [&]() -> int {
            if (config.methods.empty()) {
                throw ConfigError("methods must name at least one detector");
            }
            if (config.corpus_path.empty()) throw ConfigError("corpus_path is required");
            if (config.scores_out.empty()) throw ConfigError("scores_out is required");

            const bool paired = std::any_of(config.methods.begin(), config.methods.end(),
                                            needs_paired);
            const bool use_general_baseline = config.baseline_trace == "general";
            const bool single = std::any_of(config.methods.begin(), config.methods.end(),
                                            [](Method m) { return !needs_paired(m); });
            const bool needs_general = paired || (single && use_general_baseline);
            const bool needs_adapted = paired || (single && !use_general_baseline);

            const std::vector<CorpusRecord> corpus = load_corpus(config.corpus_path);
            const TraceResolver resolver(config, needs_general, needs_adapted);

            if (corpus.empty()) {
                diag << "warning: corpus " << config.corpus_path << " is empty\n";
                write_text_file(config.scores_out, "");
                return kExitOk;
            }

            // Fan out per record; the pool is bounded by the configured
            // backend parallelism. Output stays in corpus order.
            int bound = 1;
            if (needs_general && needs_adapted) {
                bound = std::min(config.general.max_parallel_requests,
                                 config.adapted.max_parallel_requests);
            } else if (needs_general) {
                bound = config.general.max_parallel_requests;
            } else {
                bound = config.adapted.max_parallel_requests;
            }
            const std::size_t workers =
                std::min<std::size_t>(std::max(bound, 1), corpus.size());

            std::vector<RecordOutcome> outcomes(corpus.size());
            std::atomic<std::size_t> next{0};
            auto work = [&]() {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= corpus.size()) return;
                    outcomes[i] =
                        score_record(corpus[i], config, resolver, use_general_baseline);
                }
            };
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
            for (std::thread& t : pool) t.join();

            for (const RecordOutcome& outcome : outcomes) {
                if (outcome.fatal) std::rethrow_exception(outcome.fatal);
            }

            std::string payload;
            for (const RecordOutcome& outcome : outcomes) {
                for (const ScoreRow& row : outcome.rows) {
                    payload += score_row_to_json_line(row);
                    payload += '\n';
                }
                for (const std::string& d : outcome.diagnostics) {
                    diag << "skip: " << d << "\n";
                }
            }
            write_text_file(config.scores_out, payload);
            return kExitOk;
        },
        diag);
}

int cmd_evaluate(const EvaluateOptions& options, std::ostream& diag) {
    return guarded(
        [&]() -> int {
            const std::vector<ScoreRow> rows = load_scores(options.scores_path);
            std::vector<LabeledScore> scores;
            scores.reserve(rows.size());
            for (const ScoreRow& row : rows) scores.push_back(to_labeled_score(row));

            const EvalReport report = evaluate(scores, options.target_fpr, options.axes);
            write_text_file(options.report_out, to_json(report));

            if (!options.roc_dir.empty()) {
                fs::create_directories(options.roc_dir);
                for (const ScoreGroup& group : group_scores(scores, options.axes)) {
                    if (group.n_human == 0 || group.n_machine == 0) continue;
                    const std::string name =
                        "roc_" + sanitize_for_filename(group.method) + "_" +
                        sanitize_for_filename(group.domain) + "_" +
                        sanitize_for_filename(group.source_model.value_or("none")) + "_" +
                        sanitize_for_filename(group.attack) + ".csv";
                    write_text_file((fs::path(options.roc_dir) / name).string(),
                                    to_csv(roc_curve(group.members)));
                }
            }
            return kExitOk;
        },
        diag);
}

int cmd_calibrate(const CalibrateOptions& options, std::ostream& out,
                  std::ostream& diag) {
    return guarded(
        [&]() -> int {
            const std::vector<ScoreRow> rows = load_scores(options.scores_path);

            const bool method_given = options.method.has_value();
            std::optional<Method> method = options.method;
            std::optional<Orientation> orientation;
            std::vector<double> human_scores;
            for (const ScoreRow& row : rows) {
                if (row.label != Label::human) continue;
                if (method_given && row.method != *method) continue;
                if (!method) method = row.method;
                if (row.method != *method) {
                    throw MixedMethods(
                        "scores mix methods; pass --method to pick one");
                }
                if (orientation && row.orientation != *orientation) {
                    throw MixedMethods("scores carry conflicting orientations");
                }
                orientation = row.orientation;
                human_scores.push_back(row.value);
            }
            if (human_scores.empty()) {
                throw EmptyInput("no human-labeled scores" +
                                 (options.method ? " for method " +
                                                       std::string(method_name(
                                                           *options.method))
                                                 : std::string()));
            }

            const CalibrationResult result =
                calibrate_threshold(human_scores, options.target_fpr, *orientation);

            ordered_json doc;
            doc["method"] = std::string(method_name(*method));
            doc["orientation"] = std::string(orientation_name(*orientation));
            doc["threshold"] = std::isfinite(result.threshold)
                                   ? ordered_json(result.threshold)
                                   : ordered_json(nullptr);
            doc["achieved_fpr"] = result.achieved_fpr;
            doc["target_fpr"] = result.target_fpr;
            doc["n_negatives"] = result.n_negatives;
            const std::string payload = doc.dump(2) + "\n";
            if (options.out_path.empty()) {
                out << payload;
            } else {
                write_text_file(options.out_path, payload);
            }
            return kExitOk;
        },
        diag);
}

int cmd_simulate(const SimulateOptions& options, std::ostream& out, std::ostream& diag) {
    return guarded(
        [&]() -> int {
            if (options.n_per_class < 2) throw ConfigError("n must be >= 2");
            if (options.deltas.empty() || options.sigma_pairs.empty()) {
                throw ConfigError("simulation grid must be nonempty");
            }

            std::string csv = "delta,sigma_p,sigma_qp,n,closed_form,empirical,abs_err\n";
            std::uint64_t cell = 0;
            for (double delta : options.deltas) {
                for (const auto& [sigma_p, sigma_qp] : options.sigma_pairs) {
                    GaussianDetectorModel model;
                    model.mu_P = delta;  // delta_KL enters through the mean gap
                    model.mu_Q = 0.0;
                    model.sigma_P = sigma_p;
                    model.sigma_Qp = sigma_qp;
                    const double closed = closed_form_auroc(model);
                    const double empirical =
                        simulate_auroc(model, options.n_per_class, options.seed + cell);
                    csv += render17(delta);
                    csv += ',';
                    csv += render17(sigma_p);
                    csv += ',';
                    csv += render17(sigma_qp);
                    csv += ',';
                    csv += std::to_string(options.n_per_class);
                    csv += ',';
                    csv += render17(closed);
                    csv += ',';
                    csv += render17(empirical);
                    csv += ',';
                    csv += render17(std::abs(empirical - closed));
                    csv += '\n';
                    ++cell;
                }
            }
            if (options.out_path.empty()) {
                out << csv;
            } else {
                write_text_file(options.out_path, csv);
            }
            return kExitOk;
        },
        diag);
}

int cmd_export_roc(const ExportRocOptions& options, std::ostream& out,
                   std::ostream& diag) {
    return guarded(
        [&]() -> int {
            const std::vector<ScoreRow> rows = load_scores(options.scores_path);

            // Machine rows must match every filter; human rows share the
            // method/domain stratum regardless of source model and attack.
            std::vector<LabeledScore> members;
            for (const ScoreRow& row : rows) {
                if (row.method != options.method) continue;
                if (options.domain && row.domain != *options.domain) continue;
                if (row.label == Label::machine) {
                    if (options.source_model &&
                        (!row.source_model ||
                         *row.source_model != *options.source_model)) {
                        continue;
                    }
                    if (options.attack && row.attack != *options.attack) continue;
                }
                members.push_back(to_labeled_score(row));
            }

            const std::string csv = to_csv(roc_curve(members));
            if (options.out_path.empty()) {
                out << csv;
            } else {
                write_text_file(options.out_path, csv);
            }
            return kExitOk;
        },
        diag);
}

}  // namespace divkit::cli
