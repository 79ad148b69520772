#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "divkit/trace.hpp"

namespace divkit {

enum class Label { human, machine };
enum class Attack { none, paraphrase, substitution };

std::string_view label_name(Label l);
std::optional<Label> label_from_name(std::string_view name);
std::string_view attack_name(Attack a);
std::optional<Attack> attack_from_name(std::string_view name);

// One detector score with its ground-truth label; the unit of evaluation.
struct LabeledScore {
    std::string doc_id;
    double score = 0.0;
    Label label = Label::human;
    Method method = Method::divscore;
    Orientation orientation = Orientation::lower_is_machine;
    std::string domain;
    std::optional<std::string> source_model;
    Attack attack = Attack::none;
};

struct RocPoint {
    double threshold = 0.0;
    double fpr = 0.0;
    double tpr = 0.0;
};

// Threshold sweep from (0,0) to (1,1); fpr/tpr non-decreasing.
struct RocCurve {
    std::vector<RocPoint> points;
    Orientation orientation = Orientation::lower_is_machine;
};

struct CalibrationResult {
    double threshold = 0.0;
    double achieved_fpr = 0.0;
    double target_fpr = 0.0;
    std::size_t n_negatives = 0;
};

struct TprResult {
    double tpr = 0.0;
    CalibrationResult calibration;
};

// Decision rule shared by every threshold consumer: the boundary value itself
// is classified machine.
bool classify_machine(double score, double threshold, Orientation orientation);

// Mann-Whitney AUROC (ties half-credited), computed by rank sums in
// O(n log n); matches the pairwise-count definition exactly.
double auroc(std::span<const LabeledScore> scores);

// Threshold sweep over the distinct observed scores plus sentinels.
RocCurve roc_curve(std::span<const LabeledScore> scores);

double trapezoid_area(const RocCurve& curve);

// Highest TPR whose false-positive count stays within floor(target * n_neg);
// thresholds are drawn from observed values (sentinel when none qualifies).
TprResult tpr_at_fpr(std::span<const LabeledScore> scores, double target_fpr);

// Zero-shot calibration from human scores alone.
CalibrationResult calibrate_threshold(std::span<const double> human_scores,
                                      double target_fpr, Orientation orientation);

// Grouped evaluation report, one row per detector/group.
struct EvalGroup {
    std::string method;
    std::string domain;
    std::optional<std::string> source_model;
    std::string attack;
    std::size_t n_human = 0;
    std::size_t n_machine = 0;
    std::optional<double> auroc;
    std::optional<double> tpr_at_target;
    double target_fpr = 0.0;
    std::optional<double> threshold;
    std::vector<std::string> flags;
};

struct EvalReport {
    std::vector<EvalGroup> groups;
};

// Which axes split machine scores into groups; method always does. Human
// scores attach to every machine group sharing the method/domain axes, the
// way paired human/LLM benchmarks are scored per source model and attack.
struct GroupAxes {
    bool domain = true;
    bool source_model = true;
    bool attack = true;
};

// One evaluation slice: the machine scores of a (source_model, attack) cell
// plus the human scores shared across its stratum.
struct ScoreGroup {
    std::string method;
    std::string domain;
    std::optional<std::string> source_model;
    std::string attack;
    std::size_t n_human = 0;
    std::size_t n_machine = 0;
    std::vector<LabeledScore> members;  // humans first, then machines
};

// Deterministic grouping, sorted by (method, domain, source_model, attack).
std::vector<ScoreGroup> group_scores(std::span<const LabeledScore> scores,
                                     const GroupAxes& axes = {});

// Per-group failures become row flags; other groups are unaffected.
EvalReport evaluate(std::span<const LabeledScore> scores, double target_fpr,
                    const GroupAxes& axes = {});

// Single deterministic JSON document.
std::string to_json(const EvalReport& report);

// CSV with header `threshold,fpr,tpr`, one row per sweep point, 17
// significant digits.
std::string to_csv(const RocCurve& curve);

}  // namespace divkit
