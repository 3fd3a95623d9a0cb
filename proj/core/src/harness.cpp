#include "steerkit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "steerkit/extraction.hpp"
#include "steerkit/remote_scorer.hpp"

namespace steerkit {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json parse_json(const std::string& text, const std::string& origin) {
    json obj = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded())
        throw Error(ErrorCode::ParseError, origin + ": invalid JSON");
    return obj;
}

template <typename T>
void take(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) out = obj.at(key).get<T>();
}

} // namespace

ControllerPolicy policy_from_json(const json& obj) {
    ControllerPolicy p;
    take(obj, "alpha_min", p.alpha_min);
    take(obj, "alpha_max", p.alpha_max);
    take(obj, "k_probes", p.k_probes);
    take(obj, "threshold", p.threshold);
    take(obj, "probe_max_tokens", p.probe_max_tokens);
    if (obj.contains("kind"))
        p.probe_kind = answer_kind_from_name(obj.at("kind").get<std::string>());
    return p;
}

ControllerPolicy load_policy(const std::string& path) {
    return policy_from_json(parse_json(read_file(path), path));
}

RunConfig run_config_from_json_text(const std::string& text, const std::string& origin) {
    json obj = parse_json(text, origin);

    RunConfig cfg;
    take(obj, "schema_version", cfg.schema_version);
    if (cfg.schema_version != 1)
        throw Error(ErrorCode::ConfigError,
                    origin + ": unsupported schema_version " +
                        std::to_string(cfg.schema_version));

    if (obj.contains("model")) {
        const json& m = obj["model"];
        take(m, "n_layers", cfg.model.n_layers);
        take(m, "hidden_dim", cfg.model.hidden_dim);
        take(m, "n_heads", cfg.model.n_heads);
        take(m, "vocab_size", cfg.model.vocab_size);
        take(m, "max_seq_len", cfg.model.max_seq_len);
        take(m, "seed", cfg.model.seed);
    }
    take(obj, "weights_path", cfg.weights_path);
    take(obj, "vocab_path", cfg.vocab_path);
    take(obj, "mode", cfg.mode);
    take(obj, "pos_prompt", cfg.pos_prompt);
    take(obj, "neg_prompt", cfg.neg_prompt);
    take(obj, "reflection_prompt", cfg.reflection_prompt);
    take(obj, "run_seed", cfg.run_seed);

    bool schedule_seed_given = false;
    if (obj.contains("schedule")) {
        const json& s = obj["schedule"];
        take(s, "low", cfg.schedule.low);
        take(s, "high", cfg.schedule.high);
        take(s, "n_alphas", cfg.schedule.n_alphas);
        take(s, "samples_per_alpha", cfg.schedule.samples_per_alpha);
        if (s.contains("seed")) {
            cfg.schedule.seed = s.at("seed").get<uint64_t>();
            schedule_seed_given = true;
        }
    }
    if (!schedule_seed_given) cfg.schedule.seed = cfg.run_seed;

    if (obj.contains("decode")) {
        const json& d = obj["decode"];
        take(d, "temperature", cfg.decode.temperature);
        take(d, "top_k", cfg.decode.top_k);
        take(d, "top_p", cfg.decode.top_p);
        take(d, "max_new_tokens", cfg.decode.max_new_tokens);
    }
    if (obj.contains("policy")) cfg.policy = policy_from_json(obj["policy"]);

    take(obj, "aggregation", cfg.aggregation);
    take(obj, "scorer", cfg.scorer);
    take(obj, "scorer_timeout_ms", cfg.scorer_timeout_ms);
    take(obj, "scorer_retries", cfg.scorer_retries);
    take(obj, "dataset", cfg.dataset_path);
    take(obj, "out_dir", cfg.out_dir);
    take(obj, "baseline", cfg.baseline);
    take(obj, "workers", cfg.workers);
    take(obj, "extraction_query_cap", cfg.extraction_query_cap);

    if (const char* env_out = std::getenv("STEERKIT_OUT_DIR"); env_out && *env_out)
        cfg.out_dir = env_out;
    if (const char* env_url = std::getenv("STEERKIT_SCORER_URL"); env_url && *env_url)
        cfg.scorer = std::string("remote:") + env_url;

    if (cfg.mode != "cot" && cfg.mode != "reflection" && cfg.mode != "stepwise")
        throw Error(ErrorCode::ConfigError, origin + ": unknown mode '" + cfg.mode + "'");
    if (cfg.aggregation != "majority" && cfg.aggregation != "best_of_n")
        throw Error(ErrorCode::ConfigError,
                    origin + ": unknown aggregation '" + cfg.aggregation + "'");
    if (cfg.workers < 1)
        throw Error(ErrorCode::ConfigError, origin + ": workers must be >= 1");
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    return run_config_from_json_text(read_file(path), path);
}

std::unique_ptr<Scorer> make_scorer(const RunConfig& cfg) {
    if (cfg.scorer == "oracle") return std::make_unique<OracleScorer>();
    if (cfg.scorer == "heuristic") return std::make_unique<HeuristicScorer>();
    if (cfg.scorer.rfind("remote:", 0) == 0) {
        RemoteScorerConfig rc;
        rc.base_url = cfg.scorer.substr(7);
        rc.timeout_ms = cfg.scorer_timeout_ms;
        rc.max_retries = cfg.scorer_retries;
        return std::make_unique<RemoteScorer>(rc);
    }
    throw Error(ErrorCode::ConfigError, "unknown scorer '" + cfg.scorer + "'");
}

// --- JSONL persistence ----------------------------------------------------

std::string record_to_jsonl(const GenerationRecord& rec) {
    json obj;
    obj["schema"] = 1;
    obj["query_id"] = rec.query_id;
    obj["alpha"] = rec.alpha;
    obj["alpha_index"] = rec.alpha_index;
    obj["sample_idx"] = rec.sample_idx;
    obj["tokens"] = rec.tokens.ids;
    obj["text"] = rec.text;
    if (rec.answer)
        obj["answer"] = *rec.answer;
    else
        obj["answer"] = nullptr;
    obj["length"] = rec.length;
    obj["seed_used"] = rec.seed_used;
    return obj.dump();
}

GenerationRecord record_from_jsonl(const std::string& line) {
    json obj = parse_json(line, "record");
    GenerationRecord rec;
    rec.query_id = obj.at("query_id").get<std::string>();
    rec.alpha = obj.at("alpha").get<double>();
    rec.alpha_index = obj.at("alpha_index").get<int>();
    rec.sample_idx = obj.at("sample_idx").get<int>();
    rec.tokens.ids = obj.at("tokens").get<std::vector<int32_t>>();
    rec.text = obj.at("text").get<std::string>();
    if (!obj.at("answer").is_null()) rec.answer = obj.at("answer").get<std::string>();
    rec.length = obj.at("length").get<int>();
    rec.seed_used = obj.at("seed_used").get<uint64_t>();
    return rec;
}

bool AggregateLine::operator==(const AggregateLine& o) const {
    return query_id == o.query_id && condition == o.condition && status == o.status &&
           correct == o.correct && result == o.result;
}

std::string aggregate_to_jsonl(const AggregateLine& line) {
    json obj;
    obj["schema"] = 1;
    obj["query_id"] = line.query_id;
    obj["condition"] = line.condition;
    obj["status"] = line.status;
    obj["method"] = line.result.method;
    if (line.result.chosen_answer)
        obj["chosen"] = *line.result.chosen_answer;
    else
        obj["chosen"] = nullptr;
    obj["correct"] = line.correct;
    obj["support"] = line.result.vote_support;
    json scores = json::array();
    for (const auto& entry : line.result.score_table) {
        json e;
        e["alpha_index"] = entry.key.alpha_index;
        e["sample_idx"] = entry.key.sample_idx;
        if (entry.score)
            e["score"] = *entry.score;
        else
            e["score"] = nullptr;
        scores.push_back(std::move(e));
    }
    obj["scores"] = std::move(scores);
    obj["winner"] = {{"alpha_index", line.result.winner.alpha_index},
                     {"sample_idx", line.result.winner.sample_idx}};
    obj["excluded"] = line.result.excluded;
    return obj.dump();
}

AggregateLine aggregate_from_jsonl(const std::string& text) {
    json obj = parse_json(text, "aggregate");
    AggregateLine line;
    line.query_id = obj.at("query_id").get<std::string>();
    line.condition = obj.at("condition").get<std::string>();
    line.status = obj.at("status").get<std::string>();
    line.result.method = obj.at("method").get<std::string>();
    if (!obj.at("chosen").is_null())
        line.result.chosen_answer = obj.at("chosen").get<std::string>();
    line.correct = obj.at("correct").get<bool>();
    line.result.vote_support = obj.at("support").get<std::map<std::string, int>>();
    for (const auto& e : obj.at("scores")) {
        ScoreEntry entry;
        entry.key.alpha_index = e.at("alpha_index").get<int>();
        entry.key.sample_idx = e.at("sample_idx").get<int>();
        if (!e.at("score").is_null()) entry.score = e.at("score").get<double>();
        line.result.score_table.push_back(entry);
    }
    line.result.winner.alpha_index = obj.at("winner").at("alpha_index").get<int>();
    line.result.winner.sample_idx = obj.at("winner").at("sample_idx").get<int>();
    line.result.excluded = obj.at("excluded").get<int>();
    return line;
}

std::vector<GenerationRecord> read_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open records file: " + path);
    std::vector<GenerationRecord> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(record_from_jsonl(line));
    return out;
}

std::vector<AggregateLine> read_aggregates(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open aggregates file: " + path);
    std::vector<AggregateLine> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(aggregate_from_jsonl(line));
    return out;
}

// --- experiment runner ------------------------------------------------------

namespace {

struct ItemOutcome {
    std::vector<GenerationRecord> steered;
    std::vector<GenerationRecord> baseline;
    std::vector<StepTrace> traces; // stepwise mode, parallel to steered
    AggregateLine agg_steered;
    AggregateLine agg_baseline;
    bool failed = false;
    std::string fail_message;
};

std::optional<std::string> gold_canonical(const TaskItem& item) {
    return canonicalize_span(item.kind, item.gold_answer);
}

void fill_answers(std::vector<GenerationRecord>& records, const std::string& prefix_text,
                  AnswerKind kind) {
    for (auto& rec : records) {
        auto ans = normalize_answer(prefix_text + " " + rec.text, kind);
        rec.answer = ans ? std::optional<std::string>(ans->canonical) : std::nullopt;
    }
}

AggregateLine aggregate_records(const RunConfig& cfg, const TaskItem& item,
                                const std::vector<GenerationRecord>& records,
                                Scorer& scorer, const std::string& condition) {
    AggregateLine line;
    line.query_id = item.id;
    line.condition = condition;
    try {
        line.result = cfg.aggregation == "majority"
                          ? majority_vote(records)
                          : best_of_n(item, records, scorer, cfg.workers);
        auto gold = gold_canonical(item);
        line.correct = gold && line.result.chosen_answer &&
                       *line.result.chosen_answer == *gold;
    } catch (const Error& e) {
        line.status = error_code_name(e.code());
        line.correct = false;
    }
    return line;
}

json trace_to_json(const std::string& query_id, int alpha_index, int sample_idx,
                   const StepTrace& trace) {
    json steps = json::array();
    for (const auto& entry : trace) {
        json e;
        e["sentence"] = entry.sentence_text;
        e["score"] = entry.consistency_score;
        e["alpha"] = entry.alpha_applied;
        steps.push_back(std::move(e));
    }
    json obj;
    obj["schema"] = 1;
    obj["query_id"] = query_id;
    obj["alpha_index"] = alpha_index;
    obj["sample_idx"] = sample_idx;
    obj["steps"] = std::move(steps);
    return obj;
}

} // namespace

ResultsSummary run_experiment(const RunConfig& cfg) {
    if (cfg.dataset_path.empty())
        throw Error(ErrorCode::ConfigError, "dataset path is required");
    if (cfg.out_dir.empty()) throw Error(ErrorCode::ConfigError, "out_dir is required");

    Vocab vocab = cfg.vocab_path.empty() ? Vocab::builtin() : Vocab::load(cfg.vocab_path);

    ModelConfig mc = cfg.model;
    if (mc.vocab_size == 0) mc.vocab_size = vocab.size();
    if (mc.vocab_size != vocab.size())
        throw Error(ErrorCode::ConfigError, "model vocab_size does not match vocab");
    Model model = cfg.weights_path.empty() ? Model(mc) : Model::load_weights(cfg.weights_path);
    if (!cfg.weights_path.empty() && model.config().vocab_size != vocab.size())
        throw Error(ErrorCode::ConfigError, "weight file vocab_size does not match vocab");

    validate(cfg.decode);
    std::vector<TaskItem> items = load_dataset(cfg.dataset_path);
    if (items.empty()) throw Error(ErrorCode::ConfigError, "dataset is empty");

    if (cfg.mode != "cot") {
        std::string missing;
        for (const auto& item : items)
            if (!item.init_generation) missing += (missing.empty() ? "" : ", ") + item.id;
        if (!missing.empty())
            throw Error(ErrorCode::ConfigError,
                        cfg.mode + " mode requires init_generation for: " + missing);
    }
    if (cfg.mode == "stepwise") validate(cfg.policy);

    DecodeParams decode = cfg.decode;
    decode.seed = cfg.run_seed;

    // CoT steering vector, extracted once per run from the dataset queries.
    SteeringVector steer;
    if (cfg.mode == "cot") {
        std::vector<std::string> queries;
        for (const auto& item : items) queries.push_back(item.query);
        if (cfg.extraction_query_cap > 0 &&
            static_cast<int>(queries.size()) > cfg.extraction_query_cap)
            queries.resize(static_cast<size_t>(cfg.extraction_query_cap));
        steer = extract_steering_vector(model, vocab, queries, cfg.pos_prompt, cfg.neg_prompt);
    }

    auto scorer = make_scorer(cfg);

    std::vector<ItemOutcome> outcomes(items.size());
    std::atomic<size_t> cursor{0};

    auto run_item = [&](size_t idx) {
        const TaskItem& item = items[idx];
        ItemOutcome& out = outcomes[idx];
        try {
            std::string prefix_text;
            TokenSeq baseline_prefix;

            if (cfg.mode == "cot") {
                TokenSeq prefix = vocab.tokenize(item.query);
                out.steered = sweep(model, vocab, prefix, &steer, cfg.schedule, decode, item.id);
                prefix_text = item.query;
                baseline_prefix = prefix;
            } else {
                ReflectionContext ctx = prepare_reflection_context(
                    model, vocab, cfg.reflection_prompt, item.query, *item.init_generation);
                prefix_text = cfg.reflection_prompt + " " + item.query + " " +
                              *item.init_generation;
                baseline_prefix = ctx.wp_tokens;
                if (cfg.mode == "reflection") {
                    out.steered =
                        reflect_sweep(model, vocab, ctx, cfg.schedule, decode, item.id);
                } else { // stepwise
                    for (int ai = 0; ai < cfg.schedule.n_alphas; ++ai) {
                        for (int si = 0; si < cfg.schedule.samples_per_alpha; ++si) {
                            DecodeParams p = decode;
                            p.seed = derive_seed(decode.seed, static_cast<uint64_t>(ai),
                                                 static_cast<uint64_t>(si));
                            StepwiseResult sr = stepwise_generate(
                                model, vocab, cfg.reflection_prompt, item.query,
                                *item.init_generation, cfg.policy, p);
                            sr.record.query_id = item.id;
                            sr.record.alpha_index = ai;
                            sr.record.sample_idx = si;
                            out.steered.push_back(std::move(sr.record));
                            out.traces.push_back(std::move(sr.trace));
                        }
                    }
                }
            }

            fill_answers(out.steered, prefix_text, item.kind);
            out.agg_steered = aggregate_records(cfg, item, out.steered, *scorer, "steered");

            if (cfg.baseline) {
                out.baseline = sweep(model, vocab, baseline_prefix, nullptr, cfg.schedule,
                                     decode, item.id);
                fill_answers(out.baseline, prefix_text, item.kind);
                out.agg_baseline =
                    aggregate_records(cfg, item, out.baseline, *scorer, "baseline");
            }
        } catch (const Error& e) {
            out.failed = true;
            out.fail_message = e.what();
            out.agg_steered.query_id = item.id;
            out.agg_steered.condition = "steered";
            out.agg_steered.status = error_code_name(e.code());
            if (cfg.baseline) {
                out.agg_baseline.query_id = item.id;
                out.agg_baseline.condition = "baseline";
                out.agg_baseline.status = error_code_name(e.code());
            }
        }
    };

    if (cfg.workers <= 1) {
        for (size_t i = 0; i < items.size(); ++i) run_item(i);
    } else {
        auto worker = [&] {
            for (;;) {
                size_t i = cursor.fetch_add(1);
                if (i >= items.size()) return;
                run_item(i);
            }
        };
        std::vector<std::thread> pool;
        int n = std::min<int>(cfg.workers, static_cast<int>(items.size()));
        for (int i = 0; i < n; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    namespace fs = std::filesystem;
    fs::create_directories(cfg.out_dir);

    ResultsSummary summary;
    summary.items_total = static_cast<int>(items.size());
    summary.has_baseline = cfg.baseline;
    summary.records_path = (fs::path(cfg.out_dir) / "records.jsonl").string();
    summary.baseline_records_path =
        (fs::path(cfg.out_dir) / "baseline_records.jsonl").string();
    summary.aggregates_path = (fs::path(cfg.out_dir) / "aggregates.jsonl").string();
    summary.summary_path = (fs::path(cfg.out_dir) / "summary.json").string();

    std::ofstream records_out(summary.records_path);
    std::ofstream aggregates_out(summary.aggregates_path);
    std::ofstream baseline_out;
    if (cfg.baseline) baseline_out.open(summary.baseline_records_path);
    std::ofstream traces_out;
    if (cfg.mode == "stepwise")
        traces_out.open((fs::path(cfg.out_dir) / "traces.jsonl").string());

    for (size_t i = 0; i < items.size(); ++i) {
        const ItemOutcome& out = outcomes[i];
        if (out.failed) ++summary.items_failed;
        for (const auto& rec : out.steered) records_out << record_to_jsonl(rec) << "\n";
        for (const auto& rec : out.baseline) baseline_out << record_to_jsonl(rec) << "\n";
        if (cfg.mode == "stepwise")
            for (size_t r = 0; r < out.traces.size(); ++r)
                traces_out << trace_to_json(items[i].id, out.steered[r].alpha_index,
                                            out.steered[r].sample_idx, out.traces[r])
                                  .dump()
                           << "\n";
        aggregates_out << aggregate_to_jsonl(out.agg_steered) << "\n";
        if (cfg.baseline) aggregates_out << aggregate_to_jsonl(out.agg_baseline) << "\n";

        summary.steered.total += 1;
        summary.steered.correct += out.agg_steered.correct ? 1 : 0;
        if (cfg.baseline) {
            summary.baseline.total += 1;
            summary.baseline.correct += out.agg_baseline.correct ? 1 : 0;
        }
    }
    summary.steered.accuracy =
        summary.steered.total ? static_cast<double>(summary.steered.correct) /
                                    summary.steered.total
                              : 0.0;
    summary.baseline.accuracy =
        summary.baseline.total ? static_cast<double>(summary.baseline.correct) /
                                     summary.baseline.total
                               : 0.0;

    json sj;
    sj["schema"] = 1;
    sj["mode"] = cfg.mode;
    sj["aggregation"] = cfg.aggregation;
    sj["dataset"] = cfg.dataset_path;
    sj["run_seed"] = cfg.run_seed;
    sj["items"] = summary.items_total;
    sj["failed_items"] = summary.items_failed;
    json conds;
    conds["steered"] = {{"correct", summary.steered.correct},
                        {"total", summary.steered.total},
                        {"accuracy", summary.steered.accuracy}};
    if (cfg.baseline)
        conds["baseline"] = {{"correct", summary.baseline.correct},
                             {"total", summary.baseline.total},
                             {"accuracy", summary.baseline.accuracy}};
    sj["conditions"] = std::move(conds);
    std::ofstream summary_out(summary.summary_path);
    summary_out << sj.dump(2) << "\n";

    return summary;
}

// --- length curve -----------------------------------------------------------

std::string emit_length_curve(const std::vector<GenerationRecord>& records) {
    if (records.empty()) throw Error(ErrorCode::EmptyInput, "no records for curve");

    std::map<double, std::vector<int>> groups;
    for (const auto& rec : records) groups[rec.alpha].push_back(rec.length);

    auto nearest_rank = [](const std::vector<int>& sorted, double p) {
        size_t n = sorted.size();
        size_t rank = static_cast<size_t>(std::ceil(p * static_cast<double>(n)));
        if (rank < 1) rank = 1;
        return sorted[rank - 1];
    };

    std::ostringstream out;
    out << "alpha,mean_length,q25,q75,n\n";
    for (auto& [alpha, lengths] : groups) {
        std::sort(lengths.begin(), lengths.end());
        double mean = 0.0;
        for (int len : lengths) mean += len;
        mean /= static_cast<double>(lengths.size());
        out << json(alpha).dump() << ',' << json(mean).dump() << ','
            << nearest_rank(lengths, 0.25) << ',' << nearest_rank(lengths, 0.75) << ','
            << lengths.size() << "\n";
    }
    return out.str();
}

// --- independent recount ------------------------------------------------------

RecountResult recount_run(const std::string& aggregates_path,
                          const std::string& dataset_path) {
    std::vector<TaskItem> items = load_dataset(dataset_path);
    std::map<std::string, std::optional<std::string>> golds;
    for (const auto& item : items) golds[item.id] = canonicalize_span(item.kind, item.gold_answer);

    std::ifstream in(aggregates_path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open aggregates: " + aggregates_path);

    RecountResult result;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj = parse_json(line, aggregates_path + ":" + std::to_string(line_no));
        std::string id = obj.at("query_id").get<std::string>();
        auto it = golds.find(id);
        if (it == golds.end())
            throw Error(ErrorCode::ParseError, aggregates_path + ":" +
                                                   std::to_string(line_no) +
                                                   ": unknown query_id '" + id + "'");
        bool ok = obj.at("status").get<std::string>() == "ok";
        bool correct = false;
        if (ok && !obj.at("chosen").is_null() && it->second)
            correct = obj.at("chosen").get<std::string>() == *it->second;

        std::string condition = obj.at("condition").get<std::string>();
        ConditionStats& stats =
            condition == "baseline" ? result.baseline : result.steered;
        if (condition == "baseline") result.has_baseline = true;
        stats.total += 1;
        stats.correct += correct ? 1 : 0;
        if (obj.at("correct").get<bool>() != correct) ++result.mismatched_correct_flags;
    }
    result.steered.accuracy =
        result.steered.total
            ? static_cast<double>(result.steered.correct) / result.steered.total
            : 0.0;
    result.baseline.accuracy =
        result.baseline.total
            ? static_cast<double>(result.baseline.correct) / result.baseline.total
            : 0.0;
    return result;
}

ResultsSummary read_summary(const std::string& summary_path) {
    json obj = parse_json(read_file(summary_path), summary_path);
    ResultsSummary s;
    s.items_total = obj.at("items").get<int>();
    s.items_failed = obj.at("failed_items").get<int>();
    const json& conds = obj.at("conditions");
    s.steered.correct = conds.at("steered").at("correct").get<int>();
    s.steered.total = conds.at("steered").at("total").get<int>();
    s.steered.accuracy = conds.at("steered").at("accuracy").get<double>();
    if (conds.contains("baseline")) {
        s.has_baseline = true;
        s.baseline.correct = conds.at("baseline").at("correct").get<int>();
        s.baseline.total = conds.at("baseline").at("total").get<int>();
        s.baseline.accuracy = conds.at("baseline").at("accuracy").get<double>();
    }
    return s;
}

} // namespace steerkit
