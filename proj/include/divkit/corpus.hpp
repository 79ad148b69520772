#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "divkit/metrics.hpp"

namespace divkit {

// One text in a human/LLM paired benchmark. Attacked variants are first-class
// records with their own id, sharing pair_id with the original.
struct CorpusRecord {
    std::string id;
    std::string pair_id;
    Label label = Label::human;
    std::optional<std::string> source_model;  // required iff label == machine
    std::string domain;                       // e.g. "medical", "legal"
    std::string dataset;                      // e.g. "MIMIC", "PubMedQA"
    Attack attack = Attack::none;
    std::string text;                         // scored bytes, stored verbatim
};

// Loads and validates a JSONL corpus. Duplicate ids and machine records whose
// pair_id does not resolve to exactly one human record in the same dataset
// are hard errors.
std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path);

// One record per line, lowercase snake_case keys, nulls for absent optionals.
void save_corpus(const std::filesystem::path& path, std::span<const CorpusRecord> records);

struct CorpusFilter {
    std::optional<std::string> domain;
    std::optional<std::string> dataset;
    std::optional<std::string> source_model;
    std::optional<Attack> attack;
};

// Order-stable subset; the empty filter returns everything.
std::vector<CorpusRecord> select(std::span<const CorpusRecord> corpus,
                                 const CorpusFilter& filter);

}  // namespace divkit
