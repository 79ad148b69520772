#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"

#include "divkit/cli.hpp"

namespace {

using divkit::cli::RunConfig;

const std::vector<std::string>& mirror_keys() {
    static const std::vector<std::string> keys = {
        "corpus_path", "replay_path", "cache_dir", "scores_out", "report_out",
        "roc_dir", "methods", "target_fpr", "seed", "baseline_trace",
        "rank_orientation", "entropy_mode",
        "general.endpoint_url", "general.model_name", "general.top_k_logprobs",
        "general.timeout_ms", "general.max_parallel_requests", "general.auth_token_env",
        "adapted.endpoint_url", "adapted.model_name", "adapted.top_k_logprobs",
        "adapted.timeout_ms", "adapted.max_parallel_requests", "adapted.auth_token_env"};
    return keys;
}

std::vector<double> parse_csv_doubles(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string part =
            text.substr(start, comma == std::string::npos ? std::string::npos
                                                          : comma - start);
        if (!part.empty()) out.push_back(std::stod(part));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw divkit::ConfigError("expected a comma-separated list");
    return out;
}

std::vector<std::pair<double, double>> parse_sigma_pairs(const std::string& text) {
    std::vector<std::pair<double, double>> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string part =
            text.substr(start, comma == std::string::npos ? std::string::npos
                                                          : comma - start);
        if (!part.empty()) {
            const auto colon = part.find(':');
            if (colon == std::string::npos) {
                throw divkit::ConfigError("sigma pairs look like '1:2,2:2'");
            }
            out.emplace_back(std::stod(part.substr(0, colon)),
                             std::stod(part.substr(colon + 1)));
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) throw divkit::ConfigError("expected at least one sigma pair");
    return out;
}

divkit::GroupAxes parse_group_by(const std::string& text) {
    divkit::GroupAxes axes{false, false, false};
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const std::string part =
            text.substr(start, comma == std::string::npos ? std::string::npos
                                                          : comma - start);
        if (part == "domain") {
            axes.domain = true;
        } else if (part == "source_model") {
            axes.source_model = true;
        } else if (part == "attack") {
            axes.attack = true;
        } else if (!part.empty()) {
            throw divkit::ConfigError("--group-by accepts domain,source_model,attack");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return axes;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"divkit: normalized-entropy machine-text detection toolkit"};
    app.require_subcommand(1);

    int rc = divkit::cli::kExitOk;

    // ---- score ----
    auto* score = app.add_subcommand(
        "score", "Score a corpus into labeled detector scores (JSONL)");
    std::string score_config;
    score->add_option("--config", score_config, "flat key=value run config");
    auto score_overrides =
        std::make_shared<std::vector<std::pair<std::string, std::string>>>();
    for (const std::string& key : mirror_keys()) {
        score->add_option_function<std::string>(
            "--" + key,
            [score_overrides, key](const std::string& value) {
                score_overrides->emplace_back(key, value);
            },
            "override config key " + key);
    }
    score->callback([&]() {
        RunConfig config;
        if (!score_config.empty()) {
            config = divkit::cli::parse_config_file(score_config);
        }
        for (const auto& [key, value] : *score_overrides) {
            divkit::cli::apply_config_entry(config, key, value);
        }
        rc = divkit::cli::cmd_score(config);
    });

    // ---- evaluate ----
    auto* evaluate = app.add_subcommand(
        "evaluate", "Aggregate scores into an AUROC / TPR@FPR report");
    divkit::cli::EvaluateOptions eval_options;
    std::string group_by = "domain,source_model,attack";
    evaluate->add_option("--scores", eval_options.scores_path, "scores JSONL")
        ->required();
    evaluate->add_option("--target-fpr", eval_options.target_fpr,
                         "false positive budget (default 0.001)");
    evaluate->add_option("--group-by", group_by,
                         "axes: any of domain,source_model,attack");
    evaluate->add_option("--report-out", eval_options.report_out, "report JSON path");
    evaluate->add_option("--roc-dir", eval_options.roc_dir,
                         "also write one ROC CSV per group");
    evaluate->callback([&]() {
        eval_options.axes = parse_group_by(group_by);
        rc = divkit::cli::cmd_evaluate(eval_options);
    });

    // ---- calibrate ----
    auto* calibrate = app.add_subcommand(
        "calibrate", "Pick a decision threshold from human scores only");
    divkit::cli::CalibrateOptions cal_options;
    std::string cal_method;
    calibrate->add_option("--scores", cal_options.scores_path, "scores JSONL")
        ->required();
    calibrate->add_option("--method", cal_method, "detector method to calibrate");
    calibrate->add_option("--target-fpr", cal_options.target_fpr,
                          "false positive budget (default 0.001)");
    calibrate->add_option("--out", cal_options.out_path, "output JSON (default stdout)");
    calibrate->callback([&]() {
        if (!cal_method.empty()) {
            const auto method = divkit::method_from_name(cal_method);
            if (!method) throw divkit::ConfigError("unknown method '" + cal_method + "'");
            cal_options.method = *method;
        }
        rc = divkit::cli::cmd_calibrate(cal_options);
    });

    // ---- simulate ----
    auto* simulate = app.add_subcommand(
        "simulate", "Gaussian detector model: closed-form vs Monte Carlo AUROC");
    divkit::cli::SimulateOptions sim_options;
    std::string deltas = "0,1,2";
    std::string sigma_pairs = "1:1,1:2,2:2";
    simulate->add_option("--deltas", deltas, "mean gaps, comma separated");
    simulate->add_option("--sigma-pairs", sigma_pairs, "sigma_p:sigma_qp pairs");
    simulate->add_option("--n", sim_options.n_per_class, "samples per class");
    simulate->add_option("--seed", sim_options.seed, "base RNG seed");
    simulate->add_option("--out", sim_options.out_path, "grid CSV (default stdout)");
    simulate->callback([&]() {
        sim_options.deltas = parse_csv_doubles(deltas);
        sim_options.sigma_pairs = parse_sigma_pairs(sigma_pairs);
        rc = divkit::cli::cmd_simulate(sim_options);
    });

    // ---- export-roc ----
    auto* export_roc = app.add_subcommand("export-roc", "Write one ROC sweep as CSV");
    divkit::cli::ExportRocOptions roc_options;
    std::string roc_method;
    std::string roc_domain, roc_source, roc_attack;
    export_roc->add_option("--scores", roc_options.scores_path, "scores JSONL")
        ->required();
    export_roc->add_option("--method", roc_method, "detector method")->required();
    export_roc->add_option("--domain", roc_domain, "restrict to one domain");
    export_roc->add_option("--source-model", roc_source, "restrict machine rows");
    export_roc->add_option("--attack", roc_attack, "restrict machine rows");
    export_roc->add_option("--out", roc_options.out_path, "CSV path (default stdout)");
    export_roc->callback([&]() {
        const auto method = divkit::method_from_name(roc_method);
        if (!method) throw divkit::ConfigError("unknown method '" + roc_method + "'");
        roc_options.method = *method;
        if (!roc_domain.empty()) roc_options.domain = roc_domain;
        if (!roc_source.empty()) roc_options.source_model = roc_source;
        if (!roc_attack.empty()) {
            const auto attack = divkit::attack_from_name(roc_attack);
            if (!attack) throw divkit::ConfigError("unknown attack '" + roc_attack + "'");
            roc_options.attack = *attack;
        }
        rc = divkit::cli::cmd_export_roc(roc_options);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return divkit::cli::kExitUsage;
    } catch (const divkit::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return divkit::cli::kExitUsage;
    } catch (const divkit::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return divkit::cli::kExitData;
    }
    return rc;
}
