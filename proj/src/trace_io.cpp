#include "divkit/trace_io.hpp"

#include <fstream>

#include "json.hpp"

namespace divkit {

namespace {

using nlohmann::ordered_json;

}  // namespace

void validate(const TraceRecord& record) {
    if (!is_hex_sha256(record.text_hash)) {
        throw InvariantViolation("text_hash", "must be 64 lowercase hex chars");
    }
    if (record.model_id.empty()) {
        throw InvariantViolation("model_id", "must be nonempty");
    }
    if (record.trace.model_id != record.model_id) {
        throw InvariantViolation("model_id", "trace.model_id must equal record model_id");
    }
    if (record.trace.text_hash != record.text_hash) {
        throw InvariantViolation("text_hash", "trace.text_hash must equal record text_hash");
    }
    validate(record.trace);
}

std::string trace_record_to_json_line(const TraceRecord& record) {
    ordered_json doc;
    doc["text_hash"] = record.text_hash;
    doc["model_id"] = record.model_id;
    doc["backend_params_hash"] = record.backend_params_hash;
    doc["created_at"] = record.created_at;
    doc["steps"] = ordered_json::array();
    for (const TokenStep& step : record.trace.steps) {
        ordered_json s;
        s["t"] = step.token_text;
        s["lp"] = step.logprob;
        s["r"] = step.rank ? ordered_json(*step.rank) : ordered_json(nullptr);
        doc["steps"].push_back(std::move(s));
    }
    return doc.dump();
}

TraceRecord trace_record_from_json_line(const std::string& line, std::size_t line_no) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
    }

    auto require_string = [&](const char* key) -> std::string {
        if (!doc.contains(key) || !doc[key].is_string()) {
            throw ParseError(line_no, std::string("missing string field '") + key + "'");
        }
        return doc[key].get<std::string>();
    };

    TraceRecord record;
    record.text_hash = require_string("text_hash");
    record.model_id = require_string("model_id");
    record.backend_params_hash = require_string("backend_params_hash");
    record.created_at = require_string("created_at");
    record.trace.model_id = record.model_id;
    record.trace.text_hash = record.text_hash;

    if (!doc.contains("steps") || !doc["steps"].is_array()) {
        throw ParseError(line_no, "missing array field 'steps'");
    }
    for (const auto& s : doc["steps"]) {
        if (!s.is_object() || !s.contains("t") || !s["t"].is_string() ||
            !s.contains("lp") || !s["lp"].is_number()) {
            throw ParseError(line_no, "step must be {\"t\":string,\"lp\":number,\"r\":int|null}");
        }
        TokenStep step;
        step.token_text = s["t"].get<std::string>();
        step.logprob = s["lp"].get<double>();
        if (s.contains("r") && !s["r"].is_null()) {
            if (!s["r"].is_number_integer()) {
                throw ParseError(line_no, "step rank 'r' must be an integer or null");
            }
            step.rank = s["r"].get<std::int64_t>();
        }
        record.trace.steps.push_back(std::move(step));
    }

    try {
        validate(record);
    } catch (const InvariantViolation& e) {
        throw InvariantViolation(e.field(), e.message(), line_no);
    }
    return record;
}

std::vector<TraceRecord> replay_load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw StorageError("cannot open trace file: " + path.string());

    std::vector<TraceRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        records.push_back(trace_record_from_json_line(line, line_no));
    }
    return records;
}

void replay_save(const std::filesystem::path& path, std::span<const TraceRecord> records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw StorageError("cannot write trace file: " + path.string());
    for (const TraceRecord& record : records) {
        out << trace_record_to_json_line(record) << '\n';
    }
    if (!out) throw StorageError("short write to " + path.string());
}

}  // namespace divkit
