#include <doctest.h>

#include <algorithm>
#include <random>

#include "steerkit/aggregation.hpp"
#include "steerkit/rng.hpp"

using namespace steerkit;

namespace {

GenerationRecord rec(int alpha_index, int sample_idx, std::optional<std::string> answer,
                     int length = 4) {
    GenerationRecord r;
    r.query_id = "q";
    r.alpha_index = alpha_index;
    r.sample_idx = sample_idx;
    r.answer = std::move(answer);
    r.length = length;
    return r;
}

TaskItem item_integer(const std::string& gold) {
    TaskItem item;
    item.id = "q";
    item.query = "some question";
    item.gold_answer = gold;
    item.kind = AnswerKind::Integer;
    return item;
}

// fixed-table scorer for argmax tests
class TableScorer : public Scorer {
public:
    explicit TableScorer(std::vector<std::optional<double>> scores)
        : scores_(std::move(scores)) {}
    std::optional<double> score(const TaskItem&, const GenerationRecord& r) override {
        return scores_[static_cast<size_t>(r.sample_idx)];
    }
    std::string name() const override { return "table"; }

private:
    std::vector<std::optional<double>> scores_;
};

} // namespace

TEST_CASE("integer answers strip commas and leading zeros") {
    auto a = normalize_answer("reasoning ... Answer: 1,234", AnswerKind::Integer);
    REQUIRE(a.has_value());
    CHECK(a->canonical == "1234");

    auto b = normalize_answer("Answer : 007", AnswerKind::Integer);
    REQUIRE(b.has_value());
    CHECK(b->canonical == "7");

    auto c = normalize_answer("Answer: -42", AnswerKind::Integer);
    REQUIRE(c.has_value());
    CHECK(c->canonical == "-42");

    auto d = normalize_answer("Answer : - 5 .", AnswerKind::Integer);
    REQUIRE(d.has_value());
    CHECK(d->canonical == "-5");
}

TEST_CASE("choice answers accept a single letter") {
    auto a = normalize_answer("thinking ... Answer: B", AnswerKind::ChoiceLetter);
    REQUIRE(a.has_value());
    CHECK(a->canonical == "B");

    auto lower = normalize_answer("Answer: c", AnswerKind::ChoiceLetter);
    REQUIRE(lower.has_value());
    CHECK(lower->canonical == "C");

    CHECK_FALSE(normalize_answer("Answer: Apple", AnswerKind::ChoiceLetter).has_value());
    CHECK_FALSE(normalize_answer("Answer: E", AnswerKind::ChoiceLetter).has_value());
}

TEST_CASE("boxed answers prefer the last boxed span") {
    auto a = normalize_answer("so \\boxed{x+1} then \\boxed{ 2y }", AnswerKind::BoxedExpression);
    REQUIRE(a.has_value());
    CHECK(a->canonical == "2y");

    auto nested = normalize_answer("\\boxed{\\frac{1}{2}}", AnswerKind::BoxedExpression);
    REQUIRE(nested.has_value());
    CHECK(nested->canonical == "\\frac{1}{2}");

    // falls back to the marker span when no \boxed exists
    auto fallback = normalize_answer("Answer: 3x + 1\nand more", AnswerKind::BoxedExpression);
    REQUIRE(fallback.has_value());
    CHECK(fallback->canonical == "3x + 1");
}

TEST_CASE("missing markers give no answer") {
    CHECK_FALSE(normalize_answer("no marker here", AnswerKind::Integer).has_value());
    CHECK_FALSE(normalize_answer("Answer without colon 5", AnswerKind::Integer).has_value());
    CHECK_FALSE(normalize_answer("Answer :", AnswerKind::Integer).has_value());
}

TEST_CASE("the last marker wins") {
    auto a = normalize_answer("Answer: 5 ... later Answer : 9", AnswerKind::Integer);
    REQUIRE(a.has_value());
    CHECK(a->canonical == "9");
}

TEST_CASE("canonicalization is idempotent") {
    for (auto kind : {AnswerKind::Integer, AnswerKind::ChoiceLetter, AnswerKind::BoxedExpression}) {
        for (const std::string span : {" 1,234", " B ", " x + 1", "-7", " 0"}) {
            auto once = canonicalize_span(kind, span);
            if (!once) continue;
            auto twice = canonicalize_span(kind, *once);
            REQUIRE(twice.has_value());
            CHECK(*twice == *once);
        }
    }
}

TEST_CASE("majority vote picks the most frequent answer") {
    auto result = majority_vote({rec(0, 0, "A"), rec(0, 1, "A"), rec(1, 0, "B")});
    CHECK(result.chosen_answer == "A");
    CHECK(result.vote_support.at("A") == 2);
    CHECK(result.vote_support.at("B") == 1);
    CHECK(result.excluded == 0);
}

TEST_CASE("majority tie breaks toward the earliest record key") {
    auto result = majority_vote({rec(1, 0, "B"), rec(0, 1, "A")});
    CHECK(result.chosen_answer == "A"); // (0,1) earlier than (1,0)
    auto flipped = majority_vote({rec(0, 1, "A"), rec(1, 0, "B")});
    CHECK(flipped.chosen_answer == "A"); // input order irrelevant
}

TEST_CASE("records without answers are excluded but reported") {
    auto result = majority_vote({rec(0, 0, std::nullopt), rec(0, 1, "C"), rec(1, 0, std::nullopt)});
    CHECK(result.chosen_answer == "C");
    CHECK(result.excluded == 2);
    int total = 0;
    for (const auto& [ans, count] : result.vote_support) total += count;
    CHECK(total == 1); // vote-count conservation
}

TEST_CASE("majority vote with nothing countable fails") {
    CHECK_THROWS_AS(majority_vote({rec(0, 0, std::nullopt)}), Error);
    CHECK_THROWS_AS(majority_vote({}), Error);
}

TEST_CASE("majority vote matches a brute-force counter on random multisets") {
    Rng rng(404);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 1 + static_cast<int>(rng.next_u64() % 12);
        std::vector<GenerationRecord> records;
        for (int i = 0; i < n; ++i) {
            int ai = static_cast<int>(rng.next_u64() % 4);
            int si = i; // unique keys
            bool none = rng.next_u64() % 5 == 0;
            std::optional<std::string> ans;
            if (!none) ans = std::string(1, static_cast<char>('A' + rng.next_u64() % 3));
            records.push_back(rec(ai, si, ans));
        }
        bool any = std::any_of(records.begin(), records.end(),
                               [](const auto& r) { return r.answer.has_value(); });
        if (!any) {
            CHECK_THROWS_AS(majority_vote(records), Error);
            continue;
        }
        auto result = majority_vote(records);

        // brute force: count every candidate answer, then scan for the best
        // (count, earliest-key) pair
        int best_count = -1;
        RecordKey best_key{1 << 30, 1 << 30};
        std::string best_answer;
        for (const auto& r : records) {
            if (!r.answer) continue;
            int count = 0;
            RecordKey earliest{1 << 30, 1 << 30};
            for (const auto& r2 : records) {
                if (r2.answer && *r2.answer == *r.answer) {
                    ++count;
                    RecordKey k{r2.alpha_index, r2.sample_idx};
                    if (k < earliest) earliest = k;
                }
            }
            if (count > best_count || (count == best_count && earliest < best_key)) {
                best_count = count;
                best_key = earliest;
                best_answer = *r.answer;
            }
        }
        CHECK(result.chosen_answer == best_answer);

        // permutation invariance, 10 shuffles
        std::mt19937 shuffler(trial);
        for (int s = 0; s < 10; ++s) {
            std::shuffle(records.begin(), records.end(), shuffler);
            CHECK(majority_vote(records).chosen_answer == best_answer);
        }
    }
}

TEST_CASE("best_of_n: the oracle scorer promotes the only correct record") {
    OracleScorer scorer;
    TaskItem item = item_integer("7");
    auto result = best_of_n(item, {rec(0, 0, "5"), rec(0, 1, "7"), rec(1, 0, std::nullopt)},
                            scorer);
    CHECK(result.chosen_answer == "7");
    CHECK(result.winner == RecordKey{0, 1});
    CHECK(result.score_table.size() == 3);
}

TEST_CASE("best_of_n: equal scores fall back to the earliest key") {
    HeuristicScorer scorer;
    TaskItem item = item_integer("1");
    auto result = best_of_n(item, {rec(2, 0, "9", 4), rec(0, 1, "8", 4), rec(1, 0, "7", 4)},
                            scorer);
    CHECK(result.winner == RecordKey{0, 1});
    CHECK(result.chosen_answer == "8");
}

TEST_CASE("best_of_n matches brute-force argmax on random score tables") {
    Rng rng(505);
    for (int trial = 0; trial < 100; ++trial) {
        int n = 1 + static_cast<int>(rng.next_u64() % 10);
        std::vector<GenerationRecord> records;
        std::vector<std::optional<double>> scores;
        for (int i = 0; i < n; ++i) {
            records.push_back(rec(static_cast<int>(rng.next_u64() % 3), i, "X"));
            scores.push_back(static_cast<double>(rng.next_u64() % 5));
        }
        TableScorer scorer(scores);
        TaskItem item = item_integer("X");
        auto result = best_of_n(item, records, scorer);

        size_t best = 0;
        for (size_t i = 1; i < records.size(); ++i) {
            double si = *scores[static_cast<size_t>(records[i].sample_idx)];
            double sb = *scores[static_cast<size_t>(records[best].sample_idx)];
            RecordKey ki{records[i].alpha_index, records[i].sample_idx};
            RecordKey kb{records[best].alpha_index, records[best].sample_idx};
            if (si > sb || (si == sb && ki < kb)) best = i;
        }
        CHECK(result.winner == RecordKey{records[best].alpha_index, records[best].sample_idx});

        // argmax stability: raising the winner's score never changes the winner
        scores[static_cast<size_t>(records[best].sample_idx)] =
            *scores[static_cast<size_t>(records[best].sample_idx)] + 1.0;
        TableScorer raised(scores);
        CHECK(best_of_n(item, records, raised).winner ==
              RecordKey{records[best].alpha_index, records[best].sample_idx});
    }
}

TEST_CASE("best_of_n fails only when every record is unscored") {
    TableScorer all_failed({std::nullopt, std::nullopt});
    TaskItem item = item_integer("1");
    CHECK_THROWS_AS(best_of_n(item, {rec(0, 0, "1"), rec(0, 1, "2")}, all_failed), Error);

    TableScorer partial({std::nullopt, 1.0});
    auto result = best_of_n(item, {rec(0, 0, "1"), rec(0, 1, "2")}, partial);
    CHECK(result.winner == RecordKey{0, 1});
    CHECK_FALSE(result.score_table[0].score.has_value());
}

TEST_CASE("best_of_n parallel scoring matches the sequential result") {
    HeuristicScorer scorer;
    TaskItem item = item_integer("3");
    std::vector<GenerationRecord> records;
    for (int i = 0; i < 17; ++i)
        records.push_back(rec(i % 5, i, i % 3 ? std::optional<std::string>("3") : std::nullopt,
                              i));
    auto seq = best_of_n(item, records, scorer, 1);
    auto par = best_of_n(item, records, scorer, 8);
    CHECK(seq.winner == par.winner);
    CHECK(seq.score_table == par.score_table);
}
