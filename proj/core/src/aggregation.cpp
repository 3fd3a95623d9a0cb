#include "steerkit/aggregation.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

namespace steerkit {

namespace {

RecordKey key_of(const GenerationRecord& rec) { return {rec.alpha_index, rec.sample_idx}; }

} // namespace

std::optional<double> OracleScorer::score(const TaskItem& item, const GenerationRecord& rec) {
    if (!rec.answer) return 0.0;
    auto gold = canonicalize_span(item.kind, item.gold_answer);
    return (gold && *rec.answer == *gold) ? 1.0 : 0.0;
}

std::optional<double> HeuristicScorer::score(const TaskItem&, const GenerationRecord& rec) {
    double s = rec.answer ? 1.0 : 0.0;
    s += 0.1 * (std::min(rec.length, 50) / 50.0);
    return s;
}

AggregateResult majority_vote(const std::vector<GenerationRecord>& records) {
    if (records.empty()) throw Error(ErrorCode::EmptyInput, "no records to aggregate");

    AggregateResult result;
    result.method = "majority";

    std::map<std::string, int> counts;
    std::map<std::string, RecordKey> earliest;
    for (const auto& rec : records) {
        if (!rec.answer) {
            ++result.excluded;
            continue;
        }
        RecordKey key = key_of(rec);
        auto [it, inserted] = earliest.emplace(*rec.answer, key);
        if (!inserted && key < it->second) it->second = key;
        ++counts[*rec.answer];
    }
    if (counts.empty())
        throw Error(ErrorCode::NoValidAnswers, "no record carries an extractable answer");

    const std::string* best = nullptr;
    for (const auto& [answer, count] : counts) {
        if (!best) {
            best = &answer;
            continue;
        }
        int best_count = counts[*best];
        if (count > best_count ||
            (count == best_count && earliest[answer] < earliest[*best]))
            best = &answer;
    }

    result.chosen_answer = *best;
    result.vote_support = counts;
    result.winner = earliest[*best];
    return result;
}

AggregateResult best_of_n(const TaskItem& item, const std::vector<GenerationRecord>& records,
                          Scorer& scorer, int n_workers) {
    if (records.empty()) throw Error(ErrorCode::EmptyInput, "no records to aggregate");

    std::vector<std::optional<double>> scores(records.size());
    if (n_workers <= 1) {
        for (size_t i = 0; i < records.size(); ++i) scores[i] = scorer.score(item, records[i]);
    } else {
        std::atomic<size_t> cursor{0};
        auto run = [&] {
            for (;;) {
                size_t i = cursor.fetch_add(1);
                if (i >= records.size()) return;
                scores[i] = scorer.score(item, records[i]);
            }
        };
        std::vector<std::thread> pool;
        int n = std::min<int>(n_workers, static_cast<int>(records.size()));
        pool.reserve(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) pool.emplace_back(run);
        for (auto& t : pool) t.join();
    }

    AggregateResult result;
    result.method = "best_of_n";

    size_t best = records.size();
    for (size_t i = 0; i < records.size(); ++i) {
        if (!scores[i]) continue;
        if (best == records.size()) {
            best = i;
            continue;
        }
        double si = *scores[i], sb = *scores[best];
        if (si > sb || (si == sb && key_of(records[i]) < key_of(records[best]))) best = i;
    }
    if (best == records.size())
        throw Error(ErrorCode::ScorerFailure, "scorer '" + scorer.name() +
                                                  "' failed on every record");

    result.chosen_answer = records[best].answer;
    result.winner = key_of(records[best]);
    result.score_table.reserve(records.size());
    for (size_t i = 0; i < records.size(); ++i)
        result.score_table.push_back({key_of(records[i]), scores[i]});
    std::sort(result.score_table.begin(), result.score_table.end(),
              [](const ScoreEntry& a, const ScoreEntry& b) { return a.key < b.key; });
    return result;
}

} // namespace steerkit
