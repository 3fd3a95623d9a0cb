#include <doctest.h>

#include <cmath>

#include "steerkit/attention.hpp"
#include "steerkit/model.hpp"

#include "test_util.hpp"

using namespace steerkit;

namespace {

// Straight-line reference forward pass, written independently of the model's
// layer loop: no hooks, no caching, naive per-head attention.
Matrix reference_logits(const Model& model, const TokenSeq& tokens) {
    const ModelConfig& cfg = model.config();
    const Weights& w = model.weights();
    const int T = tokens.length();
    const int d = cfg.hidden_dim;
    const int hd = d / cfg.n_heads;
    const int hidden = 4 * d;

    auto ln = [&](const std::vector<double>& x, const Vec& g, const Vec& b) {
        double mean = 0, var = 0;
        for (double v : x) mean += v;
        mean /= d;
        for (double v : x) var += (v - mean) * (v - mean);
        var /= d;
        std::vector<double> y(static_cast<size_t>(d));
        for (int i = 0; i < d; ++i)
            y[static_cast<size_t>(i)] =
                (x[static_cast<size_t>(i)] - mean) / std::sqrt(var + 1e-5) *
                    g[static_cast<size_t>(i)] +
                b[static_cast<size_t>(i)];
        return y;
    };

    std::vector<std::vector<double>> x(static_cast<size_t>(T),
                                       std::vector<double>(static_cast<size_t>(d)));
    for (int t = 0; t < T; ++t)
        for (int j = 0; j < d; ++j)
            x[static_cast<size_t>(t)][static_cast<size_t>(j)] =
                w.tok_emb.at(tokens.ids[static_cast<size_t>(t)], j) + w.pos_emb.at(t, j);

    for (const auto& lw : w.layers) {
        std::vector<std::vector<double>> a(static_cast<size_t>(T));
        for (int t = 0; t < T; ++t) a[static_cast<size_t>(t)] = ln(x[static_cast<size_t>(t)], lw.ln1_gain, lw.ln1_bias);

        auto proj = [&](const std::vector<double>& row, const Matrix& m) {
            std::vector<double> out(static_cast<size_t>(m.cols), 0.0);
            for (int i = 0; i < m.rows; ++i)
                for (int j = 0; j < m.cols; ++j)
                    out[static_cast<size_t>(j)] += row[static_cast<size_t>(i)] * m.at(i, j);
            return out;
        };

        std::vector<std::vector<double>> q(static_cast<size_t>(T)), k(static_cast<size_t>(T)),
            v(static_cast<size_t>(T));
        for (int t = 0; t < T; ++t) {
            q[static_cast<size_t>(t)] = proj(a[static_cast<size_t>(t)], lw.wq);
            k[static_cast<size_t>(t)] = proj(a[static_cast<size_t>(t)], lw.wk);
            v[static_cast<size_t>(t)] = proj(a[static_cast<size_t>(t)], lw.wv);
        }

        for (int t = 0; t < T; ++t) {
            std::vector<double> attn(static_cast<size_t>(d), 0.0);
            for (int h = 0; h < cfg.n_heads; ++h) {
                int off = h * hd;
                std::vector<double> scores(static_cast<size_t>(t + 1));
                double mx = -1e300;
                for (int j = 0; j <= t; ++j) {
                    double s = 0;
                    for (int c = 0; c < hd; ++c)
                        s += q[static_cast<size_t>(t)][static_cast<size_t>(off + c)] *
                             k[static_cast<size_t>(j)][static_cast<size_t>(off + c)];
                    s /= std::sqrt(static_cast<double>(hd));
                    scores[static_cast<size_t>(j)] = s;
                    mx = std::max(mx, s);
                }
                double z = 0;
                for (int j = 0; j <= t; ++j) {
                    scores[static_cast<size_t>(j)] = std::exp(scores[static_cast<size_t>(j)] - mx);
                    z += scores[static_cast<size_t>(j)];
                }
                for (int j = 0; j <= t; ++j)
                    for (int c = 0; c < hd; ++c)
                        attn[static_cast<size_t>(off + c)] +=
                            scores[static_cast<size_t>(j)] / z *
                            v[static_cast<size_t>(j)][static_cast<size_t>(off + c)];
            }
            std::vector<double> o = proj(attn, lw.wo);
            for (int j = 0; j < d; ++j) x[static_cast<size_t>(t)][static_cast<size_t>(j)] += o[static_cast<size_t>(j)];
        }

        for (int t = 0; t < T; ++t) {
            std::vector<double> b = ln(x[static_cast<size_t>(t)], lw.ln2_gain, lw.ln2_bias);
            std::vector<double> hvec(static_cast<size_t>(hidden), 0.0);
            for (int hh = 0; hh < hidden; ++hh) {
                double acc = lw.b_up[static_cast<size_t>(hh)];
                for (int j = 0; j < d; ++j) acc += b[static_cast<size_t>(j)] * lw.w_up.at(j, hh);
                hvec[static_cast<size_t>(hh)] = 0.5 * acc * (1.0 + std::erf(acc / std::sqrt(2.0)));
            }
            for (int j = 0; j < d; ++j) {
                double acc = lw.b_down[static_cast<size_t>(j)];
                for (int hh = 0; hh < hidden; ++hh)
                    acc += hvec[static_cast<size_t>(hh)] * lw.w_down.at(hh, j);
                x[static_cast<size_t>(t)][static_cast<size_t>(j)] += acc;
            }
        }
    }

    Matrix logits(T, cfg.vocab_size);
    for (int t = 0; t < T; ++t) {
        std::vector<double> f = ln(x[static_cast<size_t>(t)], w.lnf_gain, w.lnf_bias);
        for (int vtok = 0; vtok < cfg.vocab_size; ++vtok) {
            double acc = 0;
            for (int j = 0; j < d; ++j) acc += f[static_cast<size_t>(j)] * w.unembed.at(j, vtok);
            logits.at(t, vtok) = acc;
        }
    }
    return logits;
}

} // namespace

TEST_CASE("config invariants are enforced") {
    ModelConfig bad = testutil::tiny_config();
    bad.hidden_dim = 15; // not divisible by 2 heads
    CHECK_THROWS_AS(Model{bad}, Error);
    bad = testutil::tiny_config();
    bad.n_layers = 0;
    CHECK_THROWS_AS(Model{bad}, Error);
    bad = testutil::tiny_config();
    bad.vocab_size = 1;
    CHECK_THROWS_AS(Model{bad}, Error);
    bad = testutil::tiny_config();
    bad.max_seq_len = 1;
    CHECK_THROWS_AS(Model{bad}, Error);
}

TEST_CASE("same config and seed give bit-identical logits") {
    Model m1(testutil::tiny_config(11));
    Model m2(testutil::tiny_config(11));
    TokenSeq input = testutil::ids({1, 5, 9, 2});
    Matrix l1 = m1.forward_capture(input, Intervention::none()).logits;
    Matrix l2 = m2.forward_capture(input, Intervention::none()).logits;
    CHECK(l1.data == l2.data);
}

TEST_CASE("different seeds give different logits") {
    Model m1(testutil::tiny_config(11));
    Model m2(testutil::tiny_config(12));
    TokenSeq input = testutil::ids({1, 5, 9, 2});
    Matrix l1 = m1.forward_capture(input, Intervention::none()).logits;
    Matrix l2 = m2.forward_capture(input, Intervention::none()).logits;
    CHECK(l1.data != l2.data);
}

TEST_CASE("minimal config forwards fine") {
    ModelConfig cfg;
    cfg.n_layers = 1;
    cfg.hidden_dim = 8;
    cfg.n_heads = 2;
    cfg.vocab_size = 16;
    cfg.max_seq_len = 8;
    cfg.seed = 3;
    Model m(cfg);
    ForwardResult fr = m.forward_capture(testutil::ids({0, 15, 7}), Intervention::none());
    CHECK(fr.logits.rows == 3);
    CHECK(fr.logits.cols == 16);
    CHECK(all_finite(fr.logits.data));
}

TEST_CASE("attention op: single key/value returns the value row") {
    Rng rng(5);
    HeadParams head{testutil::random_matrix(6, 3, rng), testutil::random_matrix(6, 3, rng),
                    testutil::random_matrix(6, 6, rng)};
    Matrix q = testutil::random_matrix(1, 6, rng);
    Matrix kv = testutil::random_matrix(1, 6, rng);
    Matrix out = attention(q, kv, head);
    Matrix value = matmul(kv, head.wv);
    for (int j = 0; j < out.cols; ++j)
        CHECK(out.at(0, j) == doctest::Approx(value.at(0, j)).epsilon(1e-12));
}

TEST_CASE("attention op: identical key rows return that value regardless of query") {
    Rng rng(6);
    HeadParams head{testutil::random_matrix(4, 4, rng), testutil::random_matrix(4, 4, rng),
                    testutil::random_matrix(4, 4, rng)};
    Matrix kv(2, 4);
    Matrix row = testutil::random_matrix(1, 4, rng);
    for (int j = 0; j < 4; ++j) {
        kv.at(0, j) = row.at(0, j);
        kv.at(1, j) = row.at(0, j);
    }
    Matrix q = testutil::random_matrix(3, 4, rng);
    Matrix out = attention(q, kv, head);
    Matrix value = matmul(kv, head.wv);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 4; ++j)
            CHECK(out.at(i, j) == doctest::Approx(value.at(0, j)).epsilon(1e-12));
}

TEST_CASE("attention op matches brute-force softmax(QK^T)V") {
    Rng rng(7);
    HeadParams head{testutil::random_matrix(3, 3, rng), testutil::random_matrix(3, 3, rng),
                    testutil::random_matrix(3, 3, rng)};
    Matrix qs = testutil::random_matrix(3, 3, rng);
    Matrix kvs = testutil::random_matrix(3, 3, rng);
    Matrix out = attention(qs, kvs, head);

    Matrix q = matmul(qs, head.wq), k = matmul(kvs, head.wk), v = matmul(kvs, head.wv);
    for (int i = 0; i < 3; ++i) {
        double denom = 0.0;
        std::vector<double> e(3);
        for (int j = 0; j < 3; ++j) {
            double s = 0;
            for (int c = 0; c < 3; ++c) s += q.at(i, c) * k.at(j, c);
            e[static_cast<size_t>(j)] = std::exp(s / std::sqrt(3.0));
            denom += e[static_cast<size_t>(j)];
        }
        for (int c = 0; c < 3; ++c) {
            double expect = 0;
            for (int j = 0; j < 3; ++j) expect += e[static_cast<size_t>(j)] / denom * v.at(j, c);
            CHECK(std::abs(out.at(i, c) - expect) < 1e-9);
        }
    }
}

TEST_CASE("attention op rejects inconsistent shapes") {
    Rng rng(8);
    HeadParams head{testutil::random_matrix(4, 2, rng), testutil::random_matrix(4, 3, rng),
                    testutil::random_matrix(4, 4, rng)};
    Matrix q = testutil::random_matrix(2, 4, rng);
    CHECK_THROWS_AS(attention(q, q, head), Error);
}

TEST_CASE("forward matches the straight-line reference pass") {
    Model model(testutil::tiny_config(21));
    TokenSeq input = testutil::ids({3, 17, 30, 9});
    Matrix got = model.forward_capture(input, Intervention::none()).logits;
    Matrix want = reference_logits(model, input);
    double max_diff = 0;
    for (size_t i = 0; i < got.data.size(); ++i)
        max_diff = std::max(max_diff, std::abs(got.data[i] - want.data[i]));
    CHECK(max_diff < 1e-6);
}

TEST_CASE("causality: appending a suffix never changes earlier logits") {
    Model model(testutil::tiny_config(13));
    TokenSeq base = testutil::ids({4, 8, 15});
    TokenSeq extended = base;
    extended.ids.push_back(16);
    extended.ids.push_back(23);

    Matrix lb = model.forward_capture(base, Intervention::none()).logits;
    Matrix le = model.forward_capture(extended, Intervention::none()).logits;
    for (int t = 0; t < base.length(); ++t)
        for (int j = 0; j < lb.cols; ++j) CHECK(lb.at(t, j) == le.at(t, j));
}

TEST_CASE("cot steering with alpha 0 is exactly the unsteered pass") {
    Model model(testutil::tiny_config(17));
    TokenSeq input = testutil::ids({1, 2, 3, 4, 5});
    SteeringVector v = testutil::unit_vector(2, 16);
    ForwardResult plain = model.forward_capture(input, Intervention::none());
    ForwardResult steered = model.forward_capture(input, Intervention::cot({v, 0.0}));
    CHECK(plain.logits.data == steered.logits.data);
    CHECK(plain.states.states.data == steered.states.states.data);
}

TEST_CASE("forward rejects overlong input and bad interventions") {
    Model model(testutil::tiny_config(3));
    TokenSeq too_long;
    too_long.ids.assign(49, 1);
    CHECK_THROWS_AS(model.forward_capture(too_long, Intervention::none()), Error);

    SteeringVector wrong = testutil::unit_vector(3, 16); // model has 2 layers
    CHECK_THROWS_AS(model.forward_capture(testutil::ids({1, 2}), Intervention::cot({wrong, 0.1})),
                    Error);
}

TEST_CASE("logits and states stay finite on random inputs") {
    Model model(testutil::tiny_config(23));
    Rng rng(55);
    for (int trial = 0; trial < 20; ++trial) {
        int len = 1 + static_cast<int>(rng.next_u64() % 20);
        TokenSeq input;
        for (int i = 0; i < len; ++i)
            input.ids.push_back(static_cast<int32_t>(rng.next_u64() % 32));
        ForwardResult fr = model.forward_capture(input, Intervention::none());
        CHECK(all_finite(fr.logits.data));
        CHECK(all_finite(fr.states.states.data));
    }
}

TEST_CASE("weight file round-trips bit-exactly") {
    Model model(testutil::tiny_config(29));
    std::string path = testutil::temp_path("steerkit_weights_rt.bin");
    model.save_weights(path);
    Model loaded = Model::load_weights(path);

    TokenSeq input = testutil::ids({9, 1, 27});
    Matrix a = model.forward_capture(input, Intervention::none()).logits;
    Matrix b = loaded.forward_capture(input, Intervention::none()).logits;
    CHECK(a.data == b.data);
    CHECK(loaded.config().seed == model.config().seed);
}

TEST_CASE("incremental decode session matches the batch forward bit-exactly") {
    Model model(testutil::tiny_config(31));
    TokenSeq input = testutil::ids({2, 7, 19, 4, 11, 30});

    SteeringVector v = testutil::unit_vector(2, 16, 123);
    ForwardResult wp = model.forward_capture(testutil::ids({5, 6, 7, 8}), Intervention::none());
    ReflectionPin pin{wp.states.states, 0.4};

    std::vector<Intervention> cases;
    cases.push_back(Intervention::none());
    cases.push_back(Intervention::cot({v, 0.15}));
    cases.push_back(Intervention::cot({v, -0.15}));
    cases.push_back(Intervention::reflection(pin));

    for (const auto& iv : cases) {
        Matrix batch = model.forward_capture(input, iv).logits;
        DecodeSession session(model, iv);
        for (int t = 0; t < input.length(); ++t) {
            session.append(input.ids[static_cast<size_t>(t)]);
            Vec logits = session.logits();
            for (int j = 0; j < batch.cols; ++j)
                CHECK(logits[static_cast<size_t>(j)] == batch.at(t, j));
        }
    }
}
