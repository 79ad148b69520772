#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "divkit/trace.hpp"

namespace divkit {

// One recorded trace, addressable by (text_hash, model_id, backend params).
struct TraceRecord {
    std::string text_hash;            // lowercase hex sha256 of the source text
    std::string model_id;
    std::string backend_params_hash;  // hash of the normalized backend params
    std::string created_at;           // ISO-8601 UTC
    TokenTrace trace;
};

void validate(const TraceRecord& record);

// Single normalized JSON line (no trailing newline):
// {"text_hash","model_id","backend_params_hash","created_at","steps":[{"t","lp","r"}...]}
std::string trace_record_to_json_line(const TraceRecord& record);

// Parses and validates one line; line_no only labels diagnostics.
TraceRecord trace_record_from_json_line(const std::string& line, std::size_t line_no = 0);

// Loads a JSONL trace file, rejecting invalid rows with line-numbered
// diagnostics. Blank lines are ignored.
std::vector<TraceRecord> replay_load(const std::filesystem::path& path);

// Writes records in normalized field order, one per line.
void replay_save(const std::filesystem::path& path, std::span<const TraceRecord> records);

}  // namespace divkit
