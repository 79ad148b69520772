#pragma once

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "divkit/backends.hpp"
#include "divkit/corpus.hpp"
#include "divkit/metrics.hpp"

namespace divkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;      // usage / config errors
inline constexpr int kExitData = 2;       // corpus / scores / fixture errors
inline constexpr int kExitTransport = 3;  // endpoint unreachable, auth, protocol

// Scoring-run settings; mirrored one-to-one by the flat config file keys and
// the same-named CLI flags. Credentials never appear here, only the names of
// the environment variables that hold them.
struct RunConfig {
    std::string corpus_path;
    BackendConfig general;
    BackendConfig adapted;
    std::vector<Method> methods;
    double target_fpr = 0.001;
    std::string cache_dir;
    std::string replay_path;
    std::string scores_out = "scores.jsonl";
    std::string report_out = "report.json";
    std::string roc_dir;
    std::uint64_t seed = 0;
    std::string baseline_trace = "adapted";  // or "general"
    Orientation rank_orientation = Orientation::higher_is_machine;
    std::string entropy_mode = "realized";   // "full_vocab" is reserved
};

// `key = value` lines, '#' comments. Unknown keys and reserved values are
// rejected here, not at run time.
RunConfig parse_config_file(const std::filesystem::path& path);
void apply_config_entry(RunConfig& config, const std::string& key,
                        const std::string& value);

// One line of the scores JSONL stream.
struct ScoreRow {
    std::string doc_id;
    std::string pair_id;
    Method method = Method::divscore;
    double value = 0.0;
    Orientation orientation = Orientation::lower_is_machine;
    Label label = Label::human;
    std::string domain;
    std::string dataset;
    std::optional<std::string> source_model;
    Attack attack = Attack::none;
    std::vector<std::string> flags;
};

std::string score_row_to_json_line(const ScoreRow& row);
ScoreRow score_row_from_json_line(const std::string& line, std::size_t line_no = 0);
std::vector<ScoreRow> load_scores(const std::filesystem::path& path);
LabeledScore to_labeled_score(const ScoreRow& row);

struct EvaluateOptions {
    std::string scores_path;
    double target_fpr = 0.001;
    GroupAxes axes;
    std::string report_out = "report.json";
    std::string roc_dir;  // empty: no ROC export
};

struct CalibrateOptions {
    std::string scores_path;
    double target_fpr = 0.001;
    std::optional<Method> method;  // required when the file mixes methods
    std::string out_path;          // empty: stdout
};

struct SimulateOptions {
    std::vector<double> deltas{0.0, 1.0, 2.0};
    std::vector<std::pair<double, double>> sigma_pairs{{1.0, 1.0}, {1.0, 2.0}, {2.0, 2.0}};
    std::size_t n_per_class = 200000;
    std::uint64_t seed = 0;
    std::string out_path;  // empty: stdout
};

struct ExportRocOptions {
    std::string scores_path;
    Method method = Method::divscore;
    std::optional<std::string> domain;
    std::optional<std::string> source_model;
    std::optional<Attack> attack;
    std::string out_path;  // empty: stdout
};

// Commands return the exit codes above and never throw.
int cmd_score(const RunConfig& config, std::ostream& diag = std::cerr);
int cmd_evaluate(const EvaluateOptions& options, std::ostream& diag = std::cerr);
int cmd_calibrate(const CalibrateOptions& options, std::ostream& out = std::cout,
                  std::ostream& diag = std::cerr);
int cmd_simulate(const SimulateOptions& options, std::ostream& out = std::cout,
                 std::ostream& diag = std::cerr);
int cmd_export_roc(const ExportRocOptions& options, std::ostream& out = std::cout,
                   std::ostream& diag = std::cerr);

}  // namespace divkit::cli
