#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "steerkit/generation.hpp"
#include "steerkit/task.hpp"

namespace steerkit {

// Intrinsic record identity used for deterministic tie-breaking; input order
// never matters.
struct RecordKey {
    int alpha_index = 0;
    int sample_idx = 0;

    bool operator==(const RecordKey& o) const = default;
    bool operator<(const RecordKey& o) const {
        if (alpha_index != o.alpha_index) return alpha_index < o.alpha_index;
        return sample_idx < o.sample_idx;
    }
};

struct ScoreEntry {
    RecordKey key;
    std::optional<double> score; // nullopt = scoring failed for this record

    bool operator==(const ScoreEntry& o) const = default;
};

struct AggregateResult {
    std::string method; // "majority" | "best_of_n"
    std::optional<std::string> chosen_answer;
    std::map<std::string, int> vote_support; // majority: canonical -> count
    std::vector<ScoreEntry> score_table;     // best_of_n, in key order
    RecordKey winner;
    int excluded = 0; // records without an answer (majority only)

    bool operator==(const AggregateResult& o) const = default;
};

// Scoring interface behind which the oracle, the heuristic and the remote
// judge all sit. nullopt marks a per-record failure (remote only).
class Scorer {
public:
    virtual ~Scorer() = default;
    virtual std::optional<double> score(const TaskItem& item, const GenerationRecord& rec) = 0;
    virtual std::string name() const = 0;
};

// 1.0 when the record's answer matches the gold answer, else 0.0.
class OracleScorer : public Scorer {
public:
    std::optional<double> score(const TaskItem& item, const GenerationRecord& rec) override;
    std::string name() const override { return "oracle"; }
};

// Deterministic stand-in judge: 1.0 for a parseable answer plus a small
// bonus for longer generations, capped at 50 tokens.
class HeuristicScorer : public Scorer {
public:
    std::optional<double> score(const TaskItem& item, const GenerationRecord& rec) override;
    std::string name() const override { return "heuristic"; }
};

// Most frequent canonical answer wins; ties go to the answer whose earliest
// supporting record has the lowest (alpha_index, sample_idx). Records without
// answers are excluded from counting but reported. Throws NoValidAnswers when
// nothing is countable.
AggregateResult majority_vote(const std::vector<GenerationRecord>& records);

// Highest-scoring record wins, same tie-break. Scoring may run on up to
// n_workers threads; results do not depend on scheduling. Throws
// ScorerFailure when every record is unscored.
AggregateResult best_of_n(const TaskItem& item, const std::vector<GenerationRecord>& records,
                          Scorer& scorer, int n_workers = 1);

} // namespace steerkit
