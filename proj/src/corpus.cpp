#include "divkit/corpus.hpp"

#include <fstream>
#include <map>
#include <set>

#include "json.hpp"

namespace divkit {

namespace {

using nlohmann::ordered_json;

CorpusRecord record_from_json(const ordered_json& doc, std::size_t line_no) {
    auto require_string = [&](const char* key) -> std::string {
        if (!doc.contains(key) || !doc[key].is_string()) {
            throw SchemaViolation(line_no, key, "missing or non-string");
        }
        return doc[key].get<std::string>();
    };

    CorpusRecord record;
    record.id = require_string("id");
    record.pair_id = require_string("pair_id");

    const std::string label = require_string("label");
    const auto parsed_label = label_from_name(label);
    if (!parsed_label) throw SchemaViolation(line_no, "label", "must be human|machine");
    record.label = *parsed_label;

    if (doc.contains("source_model") && !doc["source_model"].is_null()) {
        if (!doc["source_model"].is_string()) {
            throw SchemaViolation(line_no, "source_model", "must be a string or null");
        }
        record.source_model = doc["source_model"].get<std::string>();
    }

    record.domain = require_string("domain");
    record.dataset = require_string("dataset");

    const std::string attack = require_string("attack");
    const auto parsed_attack = attack_from_name(attack);
    if (!parsed_attack) {
        throw SchemaViolation(line_no, "attack", "must be none|paraphrase|substitution");
    }
    record.attack = *parsed_attack;

    record.text = require_string("text");
    if (record.text.empty()) throw SchemaViolation(line_no, "text", "must be nonempty");
    if (record.id.empty()) throw SchemaViolation(line_no, "id", "must be nonempty");
    if (record.pair_id.empty()) throw SchemaViolation(line_no, "pair_id", "must be nonempty");

    if (record.label == Label::human) {
        if (record.source_model) {
            throw SchemaViolation(line_no, "source_model",
                                  "must be absent on human records");
        }
        if (record.attack != Attack::none) {
            throw SchemaViolation(line_no, "attack", "must be none on human records");
        }
    } else if (!record.source_model) {
        throw SchemaViolation(line_no, "source_model",
                              "required on machine records");
    }
    return record;
}

ordered_json record_to_json(const CorpusRecord& record) {
    ordered_json doc;
    doc["id"] = record.id;
    doc["pair_id"] = record.pair_id;
    doc["label"] = std::string(label_name(record.label));
    doc["source_model"] = record.source_model ? ordered_json(*record.source_model)
                                              : ordered_json(nullptr);
    doc["domain"] = record.domain;
    doc["dataset"] = record.dataset;
    doc["attack"] = std::string(attack_name(record.attack));
    doc["text"] = record.text;
    return doc;
}

}  // namespace

std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw StorageError("cannot open corpus: " + path.string());

    std::vector<CorpusRecord> records;
    std::set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json doc;
        try {
            doc = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
        }
        CorpusRecord record = record_from_json(doc, line_no);
        if (!seen_ids.insert(record.id).second) {
            throw SchemaViolation(line_no, "id", "duplicate id '" + record.id + "'");
        }
        records.push_back(std::move(record));
    }

    // Pairing check: machine records must resolve to exactly one human record
    // with the same pair_id in the same dataset.
    std::map<std::pair<std::string, std::string>, std::size_t> human_pairs;
    for (const CorpusRecord& r : records) {
        if (r.label == Label::human) ++human_pairs[{r.dataset, r.pair_id}];
    }
    for (const CorpusRecord& r : records) {
        if (r.label != Label::machine) continue;
        const auto it = human_pairs.find({r.dataset, r.pair_id});
        if (it == human_pairs.end()) {
            throw DanglingPair(r.pair_id, "machine record '" + r.id +
                                              "' has no human counterpart in dataset '" +
                                              r.dataset + "'");
        }
        if (it->second != 1) {
            throw DanglingPair(r.pair_id, "machine record '" + r.id + "' matches " +
                                              std::to_string(it->second) +
                                              " human records in dataset '" + r.dataset +
                                              "'");
        }
    }
    return records;
}

void save_corpus(const std::filesystem::path& path,
                 std::span<const CorpusRecord> records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw StorageError("cannot write corpus: " + path.string());
    for (const CorpusRecord& record : records) {
        out << record_to_json(record).dump() << '\n';
    }
    if (!out) throw StorageError("short write to " + path.string());
}

std::vector<CorpusRecord> select(std::span<const CorpusRecord> corpus,
                                 const CorpusFilter& filter) {
    std::vector<CorpusRecord> out;
    for (const CorpusRecord& r : corpus) {
        if (filter.domain && r.domain != *filter.domain) continue;
        if (filter.dataset && r.dataset != *filter.dataset) continue;
        if (filter.source_model &&
            (!r.source_model || *r.source_model != *filter.source_model)) {
            continue;
        }
        if (filter.attack && r.attack != *filter.attack) continue;
        out.push_back(r);
    }
    return out;
}

}  // namespace divkit
