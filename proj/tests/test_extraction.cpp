#include <doctest.h>

#include <cmath>

#include "steerkit/extraction.hpp"
#include "steerkit/rng.hpp"

#include "test_util.hpp"

using namespace steerkit;

namespace {

DifferenceSet make_set(std::vector<Vec> diffs, int n_layers, int dim) {
    DifferenceSet set;
    set.diffs = std::move(diffs);
    set.n_layers = n_layers;
    set.dim = dim;
    return set;
}

double cosine(const Vec& a, const Vec& b) {
    return dot(a.data(), b.data(), static_cast<int>(a.size())) / (norm2(a) * norm2(b));
}

double objective(const DifferenceSet& set, const Vec& v) {
    double acc = 0.0;
    for (const auto& diff : set.diffs) {
        double p = dot(v.data(), diff.data(), static_cast<int>(v.size()));
        acc += p * p;
    }
    return acc / static_cast<double>(set.m());
}

} // namespace

TEST_CASE("contrastive set pairs every query with both prompts") {
    Vocab vocab = Vocab::builtin();
    auto pairs = build_contrastive_set(vocab, {"Tom has 3 apples", "Ann has 4 books",
                                               "Sam has 5 coins"},
                                       "with step-by-step detailed reasoning",
                                       "with direct answering", 64);
    REQUIRE(pairs.size() == 3);
    TokenSeq pos_prompt = vocab.tokenize("with step-by-step detailed reasoning");
    for (const auto& pair : pairs) {
        CHECK(pair.pos.length() > pos_prompt.length());
        // both share the query suffix
        TokenSeq q1(pair.pos), q2(pair.neg);
        q1.ids.erase(q1.ids.begin(), q1.ids.begin() + pos_prompt.length());
        TokenSeq neg_prompt = vocab.tokenize("with direct answering");
        q2.ids.erase(q2.ids.begin(), q2.ids.begin() + neg_prompt.length());
        CHECK(q1 == q2);
    }
}

TEST_CASE("identical prompts are rejected") {
    Vocab vocab = Vocab::builtin();
    CHECK_THROWS_AS(build_contrastive_set(vocab, {"a"}, "same prompt", "same prompt", 64),
                    Error);
}

TEST_CASE("overlong queries are listed in the error") {
    Vocab vocab = Vocab::builtin();
    std::string long_query;
    for (int i = 0; i < 40; ++i) long_query += "apples ";
    try {
        build_contrastive_set(vocab, {"short one", long_query}, "step-by-step reasoning",
                              "direct answering", 16);
        FAIL("expected QueryTooLong");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::QueryTooLong);
        CHECK(std::string(e.what()).find("q1") != std::string::npos);
    }
}

TEST_CASE("empty query set is rejected") {
    Vocab vocab = Vocab::builtin();
    CHECK_THROWS_AS(build_contrastive_set(vocab, {}, "a", "b", 64), Error);
}

TEST_CASE("last_token_states slices the full capture") {
    Model model(testutil::tiny_config(41));
    TokenSeq input = testutil::ids({5, 9, 13});
    Matrix lts = last_token_states(model, input);

    ForwardResult fr = model.forward_capture(input, Intervention::none());
    for (int l = 0; l < 2; ++l)
        for (int j = 0; j < 16; ++j) CHECK(lts.at(l, j) == fr.states.states.at(l, 2, j));

    // single token input equals position 0
    Matrix single = last_token_states(model, testutil::ids({5}));
    ForwardResult fr1 = model.forward_capture(testutil::ids({5}), Intervention::none());
    for (int l = 0; l < 2; ++l)
        for (int j = 0; j < 16; ++j) CHECK(single.at(l, j) == fr1.states.states.at(l, 0, j));

    // appending a token moves the slice
    Matrix extended = last_token_states(model, testutil::ids({5, 9, 13, 2}));
    CHECK(extended.data != lts.data);
}

TEST_CASE("single difference vector is its own principal direction") {
    Vec diff = {3.0, 4.0, 0.0, 0.0};
    auto result = principal_direction(make_set({diff}, 1, 4));
    CHECK(result.vector.v[0] == doctest::Approx(0.6).epsilon(1e-9));
    CHECK(result.vector.v[1] == doctest::Approx(0.8).epsilon(1e-9));
    CHECK(result.vector.v[2] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::abs(norm2(result.vector.v) - 1.0) < 1e-9);
}

TEST_CASE("axis-aligned diffs orient along the positive mean projection") {
    auto result = principal_direction(make_set({{2.0, 0.0}, {-2.0, 0.0}, {4.0, 0.0}}, 1, 2));
    // mean projection (2 - 2 + 4)/3 > 0 picks +e1
    CHECK(result.vector.v[0] == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(result.vector.v[1] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("power iteration agrees with the dense eigen oracle") {
    Rng rng(90);
    for (int trial = 0; trial < 8; ++trial) {
        std::vector<Vec> diffs;
        int m = 3 + static_cast<int>(rng.next_u64() % 6);
        for (int i = 0; i < m; ++i) {
            Vec d(6);
            for (double& x : d) x = rng.normal();
            diffs.push_back(std::move(d));
        }
        DifferenceSet set = make_set(std::move(diffs), 2, 3);
        auto power = principal_direction(set);
        auto oracle = eigen_oracle(set);
        CHECK(std::abs(cosine(power.vector.v, oracle.vector.v)) >= 0.999);
        CHECK(power.eigenvalue == doctest::Approx(oracle.eigenvalue).epsilon(1e-6));
    }
}

TEST_CASE("eigen oracle solves a diagonal covariance exactly") {
    // diffs giving C = diag(5, 1, 1): rows sqrt(15)e1, sqrt(3)e2, sqrt(3)e3, m=3
    std::vector<Vec> diffs = {{std::sqrt(15.0), 0, 0}, {0, std::sqrt(3.0), 0},
                              {0, 0, std::sqrt(3.0)}};
    auto result = eigen_oracle(make_set(std::move(diffs), 1, 3));
    CHECK(std::abs(result.vector.v[0]) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(result.vector.v[1] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(result.vector.v[2] == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(result.eigenvalue == doctest::Approx(5.0).epsilon(1e-9));
}

TEST_CASE("rank-1 spectrum: eigenvalue is the mean squared diff norm") {
    Vec base = {1.0, 2.0, -1.0, 0.5};
    std::vector<Vec> diffs;
    double mean_sq = 0.0;
    for (double c : {1.0, -2.0, 3.0}) {
        Vec d(base.size());
        for (size_t i = 0; i < base.size(); ++i) d[i] = c * base[i];
        mean_sq += norm2(d) * norm2(d);
        diffs.push_back(std::move(d));
    }
    mean_sq /= 3.0;
    auto result = eigen_oracle(make_set(std::move(diffs), 1, 4));
    CHECK(result.eigenvalue == doctest::Approx(mean_sq).epsilon(1e-9));
}

TEST_CASE("objective beats random unit vectors") {
    Rng rng(91);
    std::vector<Vec> diffs;
    for (int i = 0; i < 10; ++i) {
        Vec d(8);
        for (double& x : d) x = rng.normal();
        diffs.push_back(std::move(d));
    }
    DifferenceSet set = make_set(std::move(diffs), 2, 4);
    auto result = principal_direction(set);
    double best = objective(set, result.vector.v);
    for (int i = 0; i < 1000; ++i) {
        Vec v(8);
        for (double& x : v) x = rng.normal();
        double n = norm2(v);
        for (double& x : v) x /= n;
        CHECK(objective(set, v) <= best + 1e-9);
    }
}

TEST_CASE("scaling all diffs leaves the direction unchanged") {
    Rng rng(92);
    std::vector<Vec> diffs, scaled;
    for (int i = 0; i < 5; ++i) {
        Vec d(6);
        for (double& x : d) x = rng.normal();
        Vec s(6);
        for (size_t j = 0; j < 6; ++j) s[j] = 3.5 * d[j];
        diffs.push_back(std::move(d));
        scaled.push_back(std::move(s));
    }
    auto a = principal_direction(make_set(std::move(diffs), 1, 6));
    auto b = principal_direction(make_set(std::move(scaled), 1, 6));
    CHECK(testutil::max_abs_diff(a.vector.v, b.vector.v) < 1e-8);
}

TEST_CASE("degenerate sets and oversized dims are rejected") {
    CHECK_THROWS_AS(principal_direction(make_set({{0.0, 0.0}}, 1, 2)), Error);
    CHECK_THROWS_AS(principal_direction(make_set({}, 1, 2)), Error);
    CHECK_THROWS_AS(eigen_oracle(make_set({{0.0, 0.0}}, 1, 2)), Error);

    std::vector<Vec> big = {Vec(600, 1.0)};
    CHECK_THROWS_AS(eigen_oracle(make_set(std::move(big), 1, 600)), Error);
}

TEST_CASE("iteration cap with a tiny eigengap reports NoConvergence") {
    // two nearly-equal eigenvalues converge very slowly
    std::vector<Vec> diffs = {{1.0, 0.0}, {0.0, 0.999999}};
    CHECK_THROWS_AS(principal_direction(make_set(std::move(diffs), 1, 2), 2, 1e-14), Error);
}

TEST_CASE("steering vector file round-trips") {
    SteeringVector v = testutil::unit_vector(3, 5, 7);
    v.orientation_sign = -1;
    std::string path = testutil::temp_path("steerkit_vec_rt.bin");
    save_steering_vector(v, path);
    SteeringVector loaded = load_steering_vector(path);
    CHECK(loaded.n_layers == 3);
    CHECK(loaded.dim == 5);
    CHECK(loaded.orientation_sign == -1);
    CHECK(loaded.v == v.v);
}

TEST_CASE("end-to-end extraction is deterministic and unit norm") {
    Vocab vocab = Vocab::builtin();
    ModelConfig cfg = testutil::tiny_config(51);
    cfg.vocab_size = vocab.size();
    cfg.max_seq_len = 64;
    Model model(cfg);

    std::vector<std::string> queries = {"Tom has 3 apples", "Ann has 4 books"};
    SteeringVector a = extract_steering_vector(model, vocab, queries,
                                               "with step-by-step detailed reasoning",
                                               "with direct answering");
    SteeringVector b = extract_steering_vector(model, vocab, queries,
                                               "with step-by-step detailed reasoning",
                                               "with direct answering");
    CHECK(a.v == b.v);
    CHECK(std::abs(norm2(a.v) - 1.0) < 1e-9);

    // orientation: mean projection onto the diffs is non-negative
    DifferenceSet set = collect_differences(model, vocab, queries,
                                            "with step-by-step detailed reasoning",
                                            "with direct answering");
    double mean_proj = 0.0;
    for (const auto& diff : set.diffs)
        mean_proj += dot(a.v.data(), diff.data(), set.flat_dim());
    CHECK(mean_proj >= 0.0);
}
