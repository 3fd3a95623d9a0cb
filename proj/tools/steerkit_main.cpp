// steerkit CLI: experiment runner and utilities around the core library.
//
// Exit codes: 0 success, 1 usage/config error, 2 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "steerkit/decomposition.hpp"
#include "steerkit/extraction.hpp"
#include "steerkit/harness.hpp"

namespace fs = std::filesystem;
using namespace steerkit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

struct RunFlags {
    std::string config_path;
    std::optional<uint64_t> seed;
    bool baseline = false;
    std::string out_dir;
    std::string scorer;
    std::string policy_path;
};

void add_run_flags(CLI::App* cmd, RunFlags& flags) {
    cmd->add_option("--config", flags.config_path, "run config JSON")->required();
    cmd->add_option("--seed", flags.seed, "override run_seed");
    cmd->add_flag("--baseline", flags.baseline, "also run the equal-budget unsteered sweep");
    cmd->add_option("--out", flags.out_dir, "override output directory");
    cmd->add_option("--scorer", flags.scorer, "oracle | heuristic | remote:URL");
}

RunConfig load_config_for(const RunFlags& flags, const std::string& mode) {
    RunConfig cfg = load_run_config(flags.config_path);
    cfg.mode = mode;
    if (flags.seed) cfg.run_seed = *flags.seed;
    if (flags.baseline) cfg.baseline = true;
    if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
    if (!flags.scorer.empty()) cfg.scorer = flags.scorer;
    if (!flags.policy_path.empty()) cfg.policy = load_policy(flags.policy_path);
    if (flags.seed) cfg.schedule.seed = *flags.seed; // keep one schedule per run
    return cfg;
}

void print_condition(const char* name, const ConditionStats& stats) {
    std::printf("  %-9s accuracy %.4f (%d/%d)\n", name, stats.accuracy, stats.correct,
                stats.total);
}

int run_mode_command(const RunFlags& flags, const std::string& mode) {
    RunConfig cfg;
    try {
        cfg = load_config_for(flags, mode);
    } catch (const Error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        ResultsSummary summary = run_experiment(cfg);
        std::printf("%s run over %d items -> %s\n", mode.c_str(), summary.items_total,
                    cfg.out_dir.c_str());
        print_condition("steered", summary.steered);
        if (summary.has_baseline) print_condition("baseline", summary.baseline);
        if (summary.items_failed > 0) {
            std::printf("  %d item(s) failed; see aggregates for status codes\n",
                        summary.items_failed);
            return kExitRuntime;
        }
        return kExitOk;
    } catch (const Error& e) {
        std::cerr << "run failed: " << e.what() << "\n";
        return kExitRuntime;
    }
}

Model model_for(const RunConfig& cfg, const Vocab& vocab) {
    ModelConfig mc = cfg.model;
    if (mc.vocab_size == 0) mc.vocab_size = vocab.size();
    return cfg.weights_path.empty() ? Model(mc) : Model::load_weights(cfg.weights_path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"latent-steering toy transformer and test-time-compute harness"};
    app.require_subcommand(1);

    // extract-vector
    auto* ev = app.add_subcommand("extract-vector",
                                  "extract the contrastive steering vector from a dataset");
    std::string ev_dataset, ev_out = "vec.bin", ev_config;
    RunConfig ev_defaults;
    std::string ev_pos = ev_defaults.pos_prompt, ev_neg = ev_defaults.neg_prompt;
    uint64_t ev_seed = 42;
    int ev_cap = 0;
    ev->add_option("--dataset", ev_dataset, "task JSONL file")->required();
    ev->add_option("--pos", ev_pos, "positive prompt");
    ev->add_option("--neg", ev_neg, "negative prompt");
    ev->add_option("--out", ev_out, "output vector file");
    ev->add_option("--config", ev_config, "run config JSON for model settings");
    ev->add_option("--seed", ev_seed, "model seed when no config is given");
    ev->add_option("--m", ev_cap, "cap on number of extraction queries (0 = all)");

    // decompose-check
    auto* dc = app.add_subcommand("decompose-check",
                                  "verify the attention prompt-shift identity numerically");
    int dc_cases = 100;
    uint64_t dc_seed = 1;
    double dc_tol = 1e-6;
    dc->add_option("--cases", dc_cases, "number of randomized cases");
    dc->add_option("--seed", dc_seed, "case generator seed");
    dc->add_option("--tol", dc_tol, "max |lhs - rhs| tolerance");

    // sweep / reflect / stepwise
    RunFlags sweep_flags, reflect_flags, stepwise_flags;
    auto* sw = app.add_subcommand("sweep", "alpha-sweep run with CoT steering");
    add_run_flags(sw, sweep_flags);
    auto* rf = app.add_subcommand("reflect", "alpha-sweep run with reflection steering");
    add_run_flags(rf, reflect_flags);
    auto* st = app.add_subcommand("stepwise", "sentence-level dynamic reflection run");
    add_run_flags(st, stepwise_flags);
    st->add_option("--policy", stepwise_flags.policy_path, "controller policy JSON");

    // aggregate
    auto* ag = app.add_subcommand("aggregate", "re-aggregate persisted records");
    std::string ag_records, ag_dataset, ag_method = "majority", ag_scorer = "oracle";
    std::string ag_out, ag_condition = "steered";
    ag->add_option("--records", ag_records, "records JSONL")->required();
    ag->add_option("--dataset", ag_dataset, "task JSONL file")->required();
    ag->add_option("--method", ag_method, "majority | best_of_n");
    ag->add_option("--scorer", ag_scorer, "oracle | heuristic | remote:URL");
    ag->add_option("--out", ag_out, "output directory")->required();
    ag->add_option("--condition", ag_condition, "condition label for the output lines");

    // report
    auto* rp = app.add_subcommand("report", "recount a run from its persisted artifacts");
    std::string rp_run, rp_dataset;
    rp->add_option("--run", rp_run, "run output directory")->required();
    rp->add_option("--dataset", rp_dataset, "task JSONL file")->required();

    // emit-curve
    auto* ec = app.add_subcommand("emit-curve", "per-alpha length statistics CSV");
    std::string ec_records, ec_out;
    ec->add_option("--records", ec_records, "records JSONL")->required();
    ec->add_option("--out", ec_out, "output CSV path (stdout when omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    if (ev->parsed()) {
        RunConfig cfg;
        Vocab vocab = Vocab::builtin();
        std::vector<TaskItem> items;
        try {
            if (!ev_config.empty()) {
                cfg = load_run_config(ev_config);
            } else {
                cfg.model.seed = ev_seed;
            }
            if (!cfg.vocab_path.empty()) vocab = Vocab::load(cfg.vocab_path);
            items = load_dataset(ev_dataset);
        } catch (const Error& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitUsage;
        }
        try {
            Model model = model_for(cfg, vocab);
            std::vector<std::string> queries;
            for (const auto& item : items) queries.push_back(item.query);
            if (ev_cap > 0 && static_cast<int>(queries.size()) > ev_cap)
                queries.resize(static_cast<size_t>(ev_cap));
            SteeringVector vec =
                extract_steering_vector(model, vocab, queries, ev_pos, ev_neg);
            save_steering_vector(vec, ev_out);
            std::printf("extracted steering vector from %zu queries -> %s (L=%d d=%d)\n",
                        queries.size(), ev_out.c_str(), vec.n_layers, vec.dim);
            return kExitOk;
        } catch (const Error& e) {
            std::cerr << "extraction failed: " << e.what() << "\n";
            return kExitRuntime;
        }
    }

    if (dc->parsed()) {
        if (dc_cases < 1 || dc_tol <= 0.0) {
            std::cerr << "decompose-check: cases must be >= 1 and tol > 0\n";
            return kExitUsage;
        }
        IdentityCaseSummary s = run_identity_cases(dc_cases, dc_seed, dc_tol);
        std::printf("identity check: %d cases, max |lhs-rhs| = %.3e, tol = %.1e -> %s\n",
                    s.cases, s.max_abs_residual, dc_tol,
                    s.failures == 0 ? "PASS" : "FAIL");
        if (s.failures > 0) {
            std::printf("  %d case(s) exceeded tolerance\n", s.failures);
            return kExitRuntime;
        }
        return kExitOk;
    }

    if (sw->parsed()) return run_mode_command(sweep_flags, "cot");
    if (rf->parsed()) return run_mode_command(reflect_flags, "reflection");
    if (st->parsed()) return run_mode_command(stepwise_flags, "stepwise");

    if (ag->parsed()) {
        std::vector<GenerationRecord> records;
        std::vector<TaskItem> items;
        RunConfig cfg;
        cfg.aggregation = ag_method;
        cfg.scorer = ag_scorer;
        try {
            if (ag_method != "majority" && ag_method != "best_of_n")
                throw Error(ErrorCode::ConfigError, "unknown method '" + ag_method + "'");
            records = read_records(ag_records);
            items = load_dataset(ag_dataset);
        } catch (const Error& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitUsage;
        }
        try {
            auto scorer = make_scorer(cfg);
            std::map<std::string, std::vector<GenerationRecord>> by_id;
            for (auto& rec : records) by_id[rec.query_id].push_back(std::move(rec));

            fs::create_directories(ag_out);
            std::ofstream out(fs::path(ag_out) / "aggregates.jsonl");
            int correct = 0, total = 0, failed = 0;
            for (const auto& item : items) {
                auto it = by_id.find(item.id);
                if (it == by_id.end()) continue;
                AggregateLine line;
                line.query_id = item.id;
                line.condition = ag_condition;
                try {
                    line.result = ag_method == "majority"
                                      ? majority_vote(it->second)
                                      : best_of_n(item, it->second, *scorer);
                    auto gold = canonicalize_span(item.kind, item.gold_answer);
                    line.correct = gold && line.result.chosen_answer &&
                                   *line.result.chosen_answer == *gold;
                } catch (const Error& e) {
                    line.status = error_code_name(e.code());
                    ++failed;
                }
                out << aggregate_to_jsonl(line) << "\n";
                ++total;
                correct += line.correct ? 1 : 0;
            }
            std::printf("aggregated %d item(s): accuracy %.4f (%d/%d)\n", total,
                        total ? static_cast<double>(correct) / total : 0.0, correct, total);
            return failed == 0 ? kExitOk : kExitRuntime;
        } catch (const Error& e) {
            std::cerr << "aggregation failed: " << e.what() << "\n";
            return kExitRuntime;
        }
    }

    if (rp->parsed()) {
        try {
            std::string aggregates = (fs::path(rp_run) / "aggregates.jsonl").string();
            std::string summary_path = (fs::path(rp_run) / "summary.json").string();
            RecountResult recount = recount_run(aggregates, rp_dataset);
            ResultsSummary stored = read_summary(summary_path);

            std::printf("recount of %s\n", rp_run.c_str());
            print_condition("steered", recount.steered);
            if (recount.has_baseline) print_condition("baseline", recount.baseline);

            bool ok = recount.mismatched_correct_flags == 0 &&
                      recount.steered.correct == stored.steered.correct &&
                      recount.steered.total == stored.steered.total &&
                      (!recount.has_baseline ||
                       (recount.baseline.correct == stored.baseline.correct &&
                        recount.baseline.total == stored.baseline.total));
            if (!ok) {
                std::printf("MISMATCH: stored summary disagrees with recount (%d flag(s))\n",
                            recount.mismatched_correct_flags);
                return kExitRuntime;
            }
            std::printf("summary matches recount\n");
            return kExitOk;
        } catch (const Error& e) {
            std::cerr << "report failed: " << e.what() << "\n";
            return kExitRuntime;
        }
    }

    if (ec->parsed()) {
        std::vector<GenerationRecord> records;
        try {
            records = read_records(ec_records);
        } catch (const Error& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return kExitUsage;
        }
        try {
            std::string csv = emit_length_curve(records);
            if (ec_out.empty()) {
                std::cout << csv;
            } else {
                std::ofstream out(ec_out);
                if (!out) throw Error(ErrorCode::IoError, "cannot write " + ec_out);
                out << csv;
            }
            return kExitOk;
        } catch (const Error& e) {
            std::cerr << "emit-curve failed: " << e.what() << "\n";
            return kExitRuntime;
        }
    }

    return kExitUsage;
}
