#include "divkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <tuple>

#include "json.hpp"

namespace divkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Machineness: larger always means more machine-like, independent of the
// method's native orientation. Negation is exact, so ties are preserved.
double machineness(double score, Orientation o) {
    return o == Orientation::lower_is_machine ? -score : score;
}

double threshold_from_machineness(double m, Orientation o) {
    return o == Orientation::lower_is_machine ? -m : m;
}

struct SplitScores {
    std::vector<double> machine;  // machineness, sorted ascending
    std::vector<double> human;    // machineness, sorted ascending
    Orientation orientation = Orientation::lower_is_machine;
};

SplitScores split_and_check(std::span<const LabeledScore> scores) {
    if (scores.empty()) throw DegenerateLabels("no scores");
    const Method method = scores.front().method;
    const Orientation orientation = scores.front().orientation;
    SplitScores out;
    out.orientation = orientation;
    for (const LabeledScore& s : scores) {
        if (s.method != method) {
            throw MixedMethods(std::string("expected method ") +
                               std::string(method_name(method)) + ", found " +
                               std::string(method_name(s.method)));
        }
        if (s.orientation != orientation) {
            throw MixedMethods("scores carry conflicting orientations");
        }
        (s.label == Label::machine ? out.machine : out.human)
            .push_back(machineness(s.score, orientation));
    }
    if (out.machine.empty()) throw DegenerateLabels("no machine-labeled scores");
    if (out.human.empty()) throw DegenerateLabels("no human-labeled scores");
    std::sort(out.machine.begin(), out.machine.end());
    std::sort(out.human.begin(), out.human.end());
    return out;
}

std::size_t count_at_or_above(const std::vector<double>& sorted, double cutoff) {
    return sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), cutoff);
}

std::size_t fp_budget(double target_fpr, std::size_t n_negatives) {
    return static_cast<std::size_t>(
        std::floor(target_fpr * static_cast<double>(n_negatives)));
}

// Smallest machineness cutoff among the candidates whose false-positive count
// fits the budget; the +inf sentinel when none does. Smaller cutoffs admit
// more machine verdicts, so this maximizes TPR at fixed budget.
double pick_cutoff(const std::vector<double>& candidates_ascending,
                   const std::vector<double>& human_sorted, std::size_t budget) {
    for (double cutoff : candidates_ascending) {
        if (count_at_or_above(human_sorted, cutoff) <= budget) return cutoff;
    }
    return kInf;
}

std::vector<double> distinct_sorted(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

std::string render17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string_view label_name(Label l) {
    return l == Label::human ? "human" : "machine";
}

std::optional<Label> label_from_name(std::string_view name) {
    if (name == "human") return Label::human;
    if (name == "machine") return Label::machine;
    return std::nullopt;
}

std::string_view attack_name(Attack a) {
    switch (a) {
        case Attack::none: return "none";
        case Attack::paraphrase: return "paraphrase";
        case Attack::substitution: return "substitution";
    }
    return "none";
}

std::optional<Attack> attack_from_name(std::string_view name) {
    if (name == "none") return Attack::none;
    if (name == "paraphrase") return Attack::paraphrase;
    if (name == "substitution") return Attack::substitution;
    return std::nullopt;
}

bool classify_machine(double score, double threshold, Orientation orientation) {
    return machineness(score, orientation) >= machineness(threshold, orientation);
}

double auroc(std::span<const LabeledScore> scores) {
    const SplitScores split = split_and_check(scores);

    struct Entry {
        double value;
        bool machine;
    };
    std::vector<Entry> entries;
    entries.reserve(split.machine.size() + split.human.size());
    for (double v : split.machine) entries.push_back({v, true});
    for (double v : split.human) entries.push_back({v, false});
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.value < b.value; });

    // Rank sum over machine items with average ranks on ties. Every average
    // rank is a multiple of 0.5 and the totals stay far below 2^53, so the
    // sum is exact and matches the pairwise oracle bit for bit.
    double machine_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < entries.size()) {
        std::size_t j = i;
        while (j < entries.size() && entries[j].value == entries[i].value) ++j;
        const double avg_rank = static_cast<double>(i + j + 1) / 2.0;  // 1-based
        for (std::size_t k = i; k < j; ++k) {
            if (entries[k].machine) machine_rank_sum += avg_rank;
        }
        i = j;
    }
    const double n_machine = static_cast<double>(split.machine.size());
    const double n_human = static_cast<double>(split.human.size());
    const double u_statistic = machine_rank_sum - n_machine * (n_machine + 1.0) / 2.0;
    return u_statistic / (n_machine * n_human);
}

RocCurve roc_curve(std::span<const LabeledScore> scores) {
    const SplitScores split = split_and_check(scores);

    std::vector<double> all;
    all.reserve(split.machine.size() + split.human.size());
    all.insert(all.end(), split.machine.begin(), split.machine.end());
    all.insert(all.end(), split.human.begin(), split.human.end());
    all = distinct_sorted(all);

    RocCurve curve;
    curve.orientation = split.orientation;

    auto add_point = [&](double cutoff) {
        const double fpr = static_cast<double>(count_at_or_above(split.human, cutoff)) /
                           static_cast<double>(split.human.size());
        const double tpr = static_cast<double>(count_at_or_above(split.machine, cutoff)) /
                           static_cast<double>(split.machine.size());
        if (!curve.points.empty() && curve.points.back().fpr == fpr &&
            curve.points.back().tpr == tpr) {
            return;
        }
        curve.points.push_back({threshold_from_machineness(cutoff, split.orientation),
                                fpr, tpr});
    };

    add_point(kInf);  // nothing classified machine -> (0, 0)
    for (auto it = all.rbegin(); it != all.rend(); ++it) add_point(*it);
    add_point(-kInf);  // everything classified machine -> (1, 1)
    return curve;
}

double trapezoid_area(const RocCurve& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const RocPoint& a = curve.points[i - 1];
        const RocPoint& b = curve.points[i];
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
    }
    return area;
}

TprResult tpr_at_fpr(std::span<const LabeledScore> scores, double target_fpr) {
    const SplitScores split = split_and_check(scores);

    std::vector<double> candidates;
    candidates.reserve(split.machine.size() + split.human.size());
    candidates.insert(candidates.end(), split.machine.begin(), split.machine.end());
    candidates.insert(candidates.end(), split.human.begin(), split.human.end());
    candidates = distinct_sorted(candidates);

    const std::size_t budget = fp_budget(target_fpr, split.human.size());
    const double cutoff = pick_cutoff(candidates, split.human, budget);

    TprResult result;
    result.tpr = static_cast<double>(count_at_or_above(split.machine, cutoff)) /
                 static_cast<double>(split.machine.size());
    result.calibration.threshold = threshold_from_machineness(cutoff, split.orientation);
    result.calibration.achieved_fpr =
        static_cast<double>(count_at_or_above(split.human, cutoff)) /
        static_cast<double>(split.human.size());
    result.calibration.target_fpr = target_fpr;
    result.calibration.n_negatives = split.human.size();
    return result;
}

CalibrationResult calibrate_threshold(std::span<const double> human_scores,
                                      double target_fpr, Orientation orientation) {
    if (human_scores.empty()) throw EmptyInput("no human scores to calibrate on");

    std::vector<double> human;
    human.reserve(human_scores.size());
    for (double s : human_scores) human.push_back(machineness(s, orientation));
    std::sort(human.begin(), human.end());

    const std::size_t budget = fp_budget(target_fpr, human.size());
    const double cutoff = pick_cutoff(distinct_sorted(human), human, budget);

    CalibrationResult result;
    result.threshold = threshold_from_machineness(cutoff, orientation);
    result.achieved_fpr = static_cast<double>(count_at_or_above(human, cutoff)) /
                          static_cast<double>(human.size());
    result.target_fpr = target_fpr;
    result.n_negatives = human.size();
    return result;
}

std::vector<ScoreGroup> group_scores(std::span<const LabeledScore> scores,
                                     const GroupAxes& axes) {
    // Strata share human scores across machine groups: a stratum is keyed by
    // (method, domain-axis); within it machine scores split further by the
    // source-model and attack axes. That mirrors paired benchmarks, where the
    // same human texts stand against every source model and attack variant.
    using StratumKey = std::tuple<std::string, std::string>;
    using MachineKey = std::tuple<std::optional<std::string>, std::string>;

    struct Stratum {
        std::vector<const LabeledScore*> humans;
        std::map<MachineKey, std::vector<const LabeledScore*>> machine_groups;
    };
    std::map<StratumKey, Stratum> strata;

    for (const LabeledScore& s : scores) {
        const StratumKey key{std::string(method_name(s.method)),
                             axes.domain ? s.domain : "*"};
        Stratum& stratum = strata[key];
        if (s.label == Label::human) {
            stratum.humans.push_back(&s);
        } else {
            const MachineKey mkey{
                axes.source_model ? s.source_model : std::optional<std::string>("*"),
                axes.attack ? std::string(attack_name(s.attack)) : "*"};
            stratum.machine_groups[mkey].push_back(&s);
        }
    }

    std::vector<ScoreGroup> groups;
    for (const auto& [skey, stratum] : strata) {
        auto emit = [&](const MachineKey& mkey,
                        const std::vector<const LabeledScore*>& machines) {
            ScoreGroup group;
            group.method = std::get<0>(skey);
            group.domain = std::get<1>(skey);
            group.source_model = std::get<0>(mkey);
            group.attack = std::get<1>(mkey);
            group.n_human = stratum.humans.size();
            group.n_machine = machines.size();
            group.members.reserve(stratum.humans.size() + machines.size());
            for (const LabeledScore* p : stratum.humans) group.members.push_back(*p);
            for (const LabeledScore* p : machines) group.members.push_back(*p);
            groups.push_back(std::move(group));
        };

        for (const auto& [mkey, machines] : stratum.machine_groups) {
            emit(mkey, machines);
        }
        if (stratum.machine_groups.empty()) {
            // Human-only stratum: keep the slice so the gap is visible.
            emit(MachineKey{std::nullopt, axes.attack ? "none" : "*"}, {});
        }
    }

    std::sort(groups.begin(), groups.end(), [](const ScoreGroup& a, const ScoreGroup& b) {
        return std::tie(a.method, a.domain, a.source_model, a.attack) <
               std::tie(b.method, b.domain, b.source_model, b.attack);
    });
    return groups;
}

EvalReport evaluate(std::span<const LabeledScore> scores, double target_fpr,
                    const GroupAxes& axes) {
    EvalReport report;
    for (const ScoreGroup& slice : group_scores(scores, axes)) {
        EvalGroup group;
        group.method = slice.method;
        group.domain = slice.domain;
        group.source_model = slice.source_model;
        group.attack = slice.attack;
        group.n_human = slice.n_human;
        group.n_machine = slice.n_machine;
        group.target_fpr = target_fpr;

        try {
            group.auroc = auroc(slice.members);
            const TprResult tpr = tpr_at_fpr(slice.members, target_fpr);
            group.tpr_at_target = tpr.tpr;
            group.threshold = tpr.calibration.threshold;
            if (std::isinf(*group.threshold)) {
                group.flags.push_back("unattainable_fpr_target");
            }
        } catch (const DegenerateLabels&) {
            group.flags.push_back("degenerate_labels");
        } catch (const MixedMethods&) {
            group.flags.push_back("mixed_methods");
        }
        report.groups.push_back(std::move(group));
    }
    return report;
}

std::string to_json(const EvalReport& report) {
    nlohmann::ordered_json doc;
    doc["groups"] = nlohmann::ordered_json::array();
    for (const EvalGroup& g : report.groups) {
        nlohmann::ordered_json row;
        row["method"] = g.method;
        row["domain"] = g.domain;
        if (g.source_model) {
            row["source_model"] = *g.source_model;
        } else {
            row["source_model"] = nullptr;
        }
        row["attack"] = g.attack;
        row["n_human"] = g.n_human;
        row["n_machine"] = g.n_machine;
        row["auroc"] = g.auroc ? nlohmann::ordered_json(*g.auroc)
                               : nlohmann::ordered_json(nullptr);
        row["tpr_at_target"] = g.tpr_at_target ? nlohmann::ordered_json(*g.tpr_at_target)
                                               : nlohmann::ordered_json(nullptr);
        row["target_fpr"] = g.target_fpr;
        row["threshold"] = (g.threshold && std::isfinite(*g.threshold))
                               ? nlohmann::ordered_json(*g.threshold)
                               : nlohmann::ordered_json(nullptr);
        row["flags"] = g.flags;
        doc["groups"].push_back(std::move(row));
    }
    return doc.dump(2) + "\n";
}

std::string to_csv(const RocCurve& curve) {
    std::string out = "threshold,fpr,tpr\n";
    for (const RocPoint& p : curve.points) {
        out += render17(p.threshold);
        out += ',';
        out += render17(p.fpr);
        out += ',';
        out += render17(p.tpr);
        out += '\n';
    }
    return out;
}

}  // namespace divkit
