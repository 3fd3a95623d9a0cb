#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "steerkit/aggregation.hpp"
#include "steerkit/controller.hpp"
#include "steerkit/generation.hpp"
#include "steerkit/task.hpp"

namespace steerkit {

// Full experiment configuration. JSON schema version 1; environment
// variables STEERKIT_OUT_DIR and STEERKIT_SCORER_URL override out_dir and
// a remote scorer endpoint.
struct RunConfig {
    int schema_version = 1;

    ModelConfig model;        // model.vocab_size 0 = use the active vocab
    std::string weights_path; // optional: load instead of seeded init
    std::string vocab_path;   // optional: newline-delimited vocab file

    std::string mode = "cot"; // cot | reflection | stepwise
    std::string pos_prompt =
        "Solve the mathematics problem with step-by-step detailed reasoning";
    std::string neg_prompt = "Solve the mathematics problem with direct answering";
    std::string reflection_prompt =
        "Review the solution carefully , check each step and correct any errors , "
        "then give the final answer .";

    AlphaSchedule schedule;
    DecodeParams decode;
    ControllerPolicy policy; // stepwise mode

    std::string aggregation = "majority"; // majority | best_of_n
    std::string scorer = "oracle";        // oracle | heuristic | remote:URL
    int scorer_timeout_ms = 2000;
    int scorer_retries = 2;

    std::string dataset_path;
    std::string out_dir;
    uint64_t run_seed = 0;
    bool baseline = false;
    int workers = 1;
    int extraction_query_cap = 0; // 0 = use every query for vector extraction
};

RunConfig load_run_config(const std::string& path);
RunConfig run_config_from_json_text(const std::string& text, const std::string& origin);

std::unique_ptr<Scorer> make_scorer(const RunConfig& cfg);

ControllerPolicy load_policy(const std::string& path);

// --- JSONL persistence -------------------------------------------------

std::string record_to_jsonl(const GenerationRecord& rec);
GenerationRecord record_from_jsonl(const std::string& line);

// One aggregation outcome for (item, condition). status is "ok" or the error
// code name when aggregation failed for the item.
struct AggregateLine {
    std::string query_id;
    std::string condition; // steered | baseline
    std::string status = "ok";
    AggregateResult result;
    bool correct = false;

    bool operator==(const AggregateLine& o) const;
};

std::string aggregate_to_jsonl(const AggregateLine& line);
AggregateLine aggregate_from_jsonl(const std::string& line);

// --- experiment runner ---------------------------------------------------

struct ConditionStats {
    int correct = 0;
    int total = 0;
    double accuracy = 0.0;
};

struct ResultsSummary {
    int items_total = 0;
    int items_failed = 0; // items whose generation or aggregation errored
    ConditionStats steered;
    ConditionStats baseline;
    bool has_baseline = false;
    std::string records_path;
    std::string baseline_records_path;
    std::string aggregates_path;
    std::string summary_path;
};

// Runs the configured protocol over the dataset: per item one steered sweep
// (and an equal-budget unsteered sweep when baseline is set), answer
// extraction, aggregation, and persistence of records/aggregates/summary.
// Byte-identical outputs for identical configs regardless of worker count.
ResultsSummary run_experiment(const RunConfig& cfg);

// Per-alpha CSV: alpha,mean_length,q25,q75,n with nearest-rank quartiles,
// rows ascending in alpha.
std::string emit_length_curve(const std::vector<GenerationRecord>& records);

// Independent recount: recomputes per-condition accuracy by re-reading the
// persisted aggregates and the dataset, trusting no in-memory state. Also
// re-derives each line's correctness from its chosen answer and the gold.
struct RecountResult {
    ConditionStats steered;
    ConditionStats baseline;
    bool has_baseline = false;
    int mismatched_correct_flags = 0; // stored `correct` disagreeing with recount
};

RecountResult recount_run(const std::string& aggregates_path,
                          const std::string& dataset_path);

// Parses summary.json back into ResultsSummary (paths left empty).
ResultsSummary read_summary(const std::string& summary_path);

std::vector<GenerationRecord> read_records(const std::string& path);
std::vector<AggregateLine> read_aggregates(const std::string& path);

} // namespace steerkit
