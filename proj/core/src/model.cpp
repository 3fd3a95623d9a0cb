#include "steerkit/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "steerkit/rng.hpp"

namespace steerkit {

namespace {

constexpr double kInitStd = 0.08;
constexpr double kLnEps = 1e-5;
constexpr char kMagic[8] = {'S', 'T', 'E', 'E', 'R', 'M', 'D', 'L'};
constexpr uint32_t kWeightFileVersion = 1;

void fill_normal(Rng& rng, Vec& v, double std_dev) {
    for (double& x : v) x = rng.normal() * std_dev;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x * 0.7071067811865475244)); }

// y = layer_norm(x) * gain + bias, population variance, eps 1e-5
void layer_norm_row(const double* x, int d, const Vec& gain, const Vec& bias, double* y) {
    double mean = 0.0;
    for (int i = 0; i < d; ++i) mean += x[i];
    mean /= d;
    double var = 0.0;
    for (int i = 0; i < d; ++i) {
        double c = x[i] - mean;
        var += c * c;
    }
    var /= d;
    double inv = 1.0 / std::sqrt(var + kLnEps);
    for (int i = 0; i < d; ++i) y[i] = (x[i] - mean) * inv * gain[i] + bias[i];
}

// out = a * w for one row; the incremental and batch paths must run this
// exact loop so their results stay bit-identical.
void row_project(const double* a, const Matrix& w, double* out) {
    std::fill(out, out + w.cols, 0.0);
    for (int k = 0; k < w.rows; ++k) {
        double av = a[k];
        if (av == 0.0) continue;
        axpy(av, w.row(k), out, w.cols);
    }
}

// causal single-position attention for one head slice: softmax over keys
// 0..t then weighted sum of values, accumulated into out + off.
void attend_position(const double* q_off, const Matrix& k_rows, const Matrix& v_rows, int t,
                     int off, int head_dim, double inv_sqrt_hd, Vec& scores, double* out_off) {
    for (int j = 0; j <= t; ++j)
        scores[static_cast<size_t>(j)] = dot(q_off, k_rows.row(j) + off, head_dim) * inv_sqrt_hd;
    softmax_inplace(scores.data(), t + 1);
    for (int j = 0; j <= t; ++j)
        axpy(scores[static_cast<size_t>(j)], v_rows.row(j) + off, out_off, head_dim);
}

// x_row += mlp(ln2(x_row)); normed_row is the pre-computed LN2 output.
void mlp_update_row(const LayerWeights& lw, const double* normed_row, double* x_row, int d,
                    int hidden, Vec& scratch) {
    for (int h = 0; h < hidden; ++h) scratch[static_cast<size_t>(h)] = lw.b_up[static_cast<size_t>(h)];
    for (int j = 0; j < d; ++j) {
        double nv = normed_row[j];
        if (nv == 0.0) continue;
        axpy(nv, lw.w_up.row(j), scratch.data(), hidden);
    }
    for (int h = 0; h < hidden; ++h)
        scratch[static_cast<size_t>(h)] = gelu(scratch[static_cast<size_t>(h)]);
    for (int j = 0; j < d; ++j) {
        double acc = lw.b_down[static_cast<size_t>(j)];
        for (int h = 0; h < hidden; ++h)
            acc += scratch[static_cast<size_t>(h)] * lw.w_down.at(h, j);
        x_row[j] += acc;
    }
}

void check_intervention(const Intervention& iv, int n_layers, int d) {
    if (iv.mode == Intervention::Mode::CotSteer) {
        const auto& sv = iv.cot_spec.vector;
        if (sv.n_layers != n_layers || sv.dim != d ||
            static_cast<int>(sv.v.size()) != n_layers * d)
            throw Error(ErrorCode::ShapeMismatch, "steering vector shape mismatch");
        if (!std::isfinite(iv.cot_spec.alpha))
            throw Error(ErrorCode::ShapeMismatch, "alpha must be finite");
    } else if (iv.mode == Intervention::Mode::ReflectionSteer) {
        const auto& pin = iv.reflection_pin.pinned;
        if (pin.n0 != n_layers || pin.n2 != d)
            throw Error(ErrorCode::ShapeMismatch, "reflection pin shape mismatch");
    }
}

// Applies the intervention to one post-layer residual row. Returns false on
// a degenerate zero-norm rescale (row kept unchanged).
bool apply_intervention_row(const Intervention& iv, int layer, int t, double* x_row, int d) {
    if (iv.mode == Intervention::Mode::CotSteer)
        return steer_cot_row(x_row, iv.cot_spec.vector.layer(layer), d, iv.cot_spec.alpha);
    if (iv.mode == Intervention::Mode::ReflectionSteer &&
        t < iv.reflection_pin.pinned.n1)
        std::memcpy(x_row, iv.reflection_pin.pinned.row(layer, t),
                    sizeof(double) * static_cast<size_t>(d));
    return true;
}

} // namespace

void validate(const ModelConfig& cfg) {
    if (cfg.n_layers < 1) throw Error(ErrorCode::InvalidConfig, "n_layers must be >= 1");
    if (cfg.hidden_dim < 1 || cfg.n_heads < 1 || cfg.hidden_dim % cfg.n_heads != 0)
        throw Error(ErrorCode::InvalidConfig, "hidden_dim must be divisible by n_heads");
    if (cfg.vocab_size < 2) throw Error(ErrorCode::InvalidConfig, "vocab_size must be >= 2");
    if (cfg.max_seq_len < 2) throw Error(ErrorCode::InvalidConfig, "max_seq_len must be >= 2");
}

Model::Model(const ModelConfig& cfg) {
    validate(cfg);
    cfg_ = cfg;

    const int d = cfg.hidden_dim;
    const int hidden = 4 * d;
    Rng rng(cfg.seed);

    w_.tok_emb = Matrix(cfg.vocab_size, d);
    fill_normal(rng, w_.tok_emb.data, kInitStd);
    w_.pos_emb = Matrix(cfg.max_seq_len, d);
    fill_normal(rng, w_.pos_emb.data, kInitStd);

    w_.layers.resize(static_cast<size_t>(cfg.n_layers));
    for (auto& lw : w_.layers) {
        lw.ln1_gain.assign(static_cast<size_t>(d), 1.0);
        lw.ln1_bias.assign(static_cast<size_t>(d), 0.0);
        lw.ln2_gain.assign(static_cast<size_t>(d), 1.0);
        lw.ln2_bias.assign(static_cast<size_t>(d), 0.0);
        lw.wq = Matrix(d, d);
        lw.wk = Matrix(d, d);
        lw.wv = Matrix(d, d);
        lw.wo = Matrix(d, d);
        fill_normal(rng, lw.wq.data, kInitStd);
        fill_normal(rng, lw.wk.data, kInitStd);
        fill_normal(rng, lw.wv.data, kInitStd);
        fill_normal(rng, lw.wo.data, kInitStd);
        lw.w_up = Matrix(d, hidden);
        lw.w_down = Matrix(hidden, d);
        fill_normal(rng, lw.w_up.data, kInitStd);
        fill_normal(rng, lw.w_down.data, kInitStd);
        lw.b_up.assign(static_cast<size_t>(hidden), 0.0);
        lw.b_down.assign(static_cast<size_t>(d), 0.0);
    }

    w_.lnf_gain.assign(static_cast<size_t>(d), 1.0);
    w_.lnf_bias.assign(static_cast<size_t>(d), 0.0);
    w_.unembed = Matrix(d, cfg.vocab_size);
    fill_normal(rng, w_.unembed.data, kInitStd);
}

ForwardResult Model::forward_capture(const TokenSeq& tokens, const Intervention& iv) const {
    const int T = tokens.length();
    const int L = cfg_.n_layers;
    const int d = cfg_.hidden_dim;
    const int n_heads = cfg_.n_heads;
    const int head_dim = d / n_heads;
    const int hidden = 4 * d;

    if (T < 1) throw Error(ErrorCode::EmptyInput, "token sequence is empty");
    if (T > cfg_.max_seq_len)
        throw Error(ErrorCode::SeqTooLong, "sequence length " + std::to_string(T) +
                                               " exceeds max_seq_len " +
                                               std::to_string(cfg_.max_seq_len));
    for (int32_t id : tokens.ids)
        if (id < 0 || id >= cfg_.vocab_size)
            throw Error(ErrorCode::ShapeMismatch, "token id out of vocab range");
    check_intervention(iv, L, d);

    ForwardResult result;
    result.states.states = Tensor3(L, T, d);
    result.states.pre_norms = Matrix(L, T);

    Matrix x(T, d);
    for (int t = 0; t < T; ++t) {
        const double* emb = w_.tok_emb.row(tokens.ids[static_cast<size_t>(t)]);
        const double* pos = w_.pos_emb.row(t);
        double* row = x.row(t);
        for (int j = 0; j < d; ++j) row[j] = emb[j] + pos[j];
    }

    Matrix normed(T, d), q(T, d), k(T, d), v(T, d), attn_out(T, d), proj(T, d);
    Vec scores(static_cast<size_t>(T));
    Vec mlp_scratch(static_cast<size_t>(hidden));
    const double inv_sqrt_hd = 1.0 / std::sqrt(static_cast<double>(head_dim));

    for (int l = 0; l < L; ++l) {
        const LayerWeights& lw = w_.layers[static_cast<size_t>(l)];

        for (int t = 0; t < T; ++t)
            layer_norm_row(x.row(t), d, lw.ln1_gain, lw.ln1_bias, normed.row(t));
        for (int t = 0; t < T; ++t) {
            row_project(normed.row(t), lw.wq, q.row(t));
            row_project(normed.row(t), lw.wk, k.row(t));
            row_project(normed.row(t), lw.wv, v.row(t));
        }

        std::fill(attn_out.data.begin(), attn_out.data.end(), 0.0);
        for (int h = 0; h < n_heads; ++h) {
            const int off = h * head_dim;
            for (int t = 0; t < T; ++t)
                attend_position(q.row(t) + off, k, v, t, off, head_dim, inv_sqrt_hd, scores,
                                attn_out.row(t) + off);
        }

        for (int t = 0; t < T; ++t) {
            row_project(attn_out.row(t), lw.wo, proj.row(t));
            double* xrow = x.row(t);
            const double* prow = proj.row(t);
            for (int j = 0; j < d; ++j) xrow[j] += prow[j];
        }

        for (int t = 0; t < T; ++t)
            layer_norm_row(x.row(t), d, lw.ln2_gain, lw.ln2_bias, normed.row(t));
        for (int t = 0; t < T; ++t)
            mlp_update_row(lw, normed.row(t), x.row(t), d, hidden, mlp_scratch);

        // capture pre-intervention norms, apply the intervention, record states
        for (int t = 0; t < T; ++t) {
            double* xrow = x.row(t);
            result.states.pre_norms.at(l, t) = norm2(xrow, d);
            if (!apply_intervention_row(iv, l, t, xrow, d)) ++result.zero_norm_events;
            std::memcpy(result.states.states.row(l, t), xrow,
                        sizeof(double) * static_cast<size_t>(d));
        }
    }

    result.logits = Matrix(T, cfg_.vocab_size);
    Vec final_row(static_cast<size_t>(d));
    for (int t = 0; t < T; ++t) {
        layer_norm_row(x.row(t), d, w_.lnf_gain, w_.lnf_bias, final_row.data());
        row_project(final_row.data(), w_.unembed, result.logits.row(t));
    }
    return result;
}

Matrix last_token_states(const Model& model, const TokenSeq& tokens) {
    ForwardResult fr = model.forward_capture(tokens, Intervention::none());
    const int L = model.config().n_layers;
    const int d = model.config().hidden_dim;
    const int t_last = tokens.length() - 1;
    Matrix out(L, d);
    for (int l = 0; l < L; ++l)
        std::memcpy(out.row(l), fr.states.states.row(l, t_last),
                    sizeof(double) * static_cast<size_t>(d));
    return out;
}

// --- incremental decoding ---------------------------------------------------

DecodeSession::DecodeSession(const Model& model, Intervention iv)
    : model_(&model), iv_(std::move(iv)) {
    const ModelConfig& cfg = model.config();
    check_intervention(iv_, cfg.n_layers, cfg.hidden_dim);
    k_cache_.assign(static_cast<size_t>(cfg.n_layers), Matrix(cfg.max_seq_len, cfg.hidden_dim));
    v_cache_.assign(static_cast<size_t>(cfg.n_layers), Matrix(cfg.max_seq_len, cfg.hidden_dim));
    last_x_.assign(static_cast<size_t>(cfg.hidden_dim), 0.0);
}

void DecodeSession::append(int32_t id) {
    const ModelConfig& cfg = model_->config();
    const Weights& w = model_->weights();
    const int d = cfg.hidden_dim;
    const int n_heads = cfg.n_heads;
    const int head_dim = d / n_heads;
    const int hidden = 4 * d;

    if (t_ >= cfg.max_seq_len)
        throw Error(ErrorCode::SeqTooLong, "decode session is at max_seq_len");
    if (id < 0 || id >= cfg.vocab_size)
        throw Error(ErrorCode::ShapeMismatch, "token id out of vocab range");

    Vec x(static_cast<size_t>(d));
    {
        const double* emb = w.tok_emb.row(id);
        const double* pos = w.pos_emb.row(t_);
        for (int j = 0; j < d; ++j) x[static_cast<size_t>(j)] = emb[j] + pos[j];
    }

    Vec normed(static_cast<size_t>(d)), qrow(static_cast<size_t>(d));
    Vec attn_row(static_cast<size_t>(d)), proj_row(static_cast<size_t>(d));
    Vec scores(static_cast<size_t>(t_ + 1));
    Vec mlp_scratch(static_cast<size_t>(hidden));
    const double inv_sqrt_hd = 1.0 / std::sqrt(static_cast<double>(head_dim));

    for (int l = 0; l < cfg.n_layers; ++l) {
        const LayerWeights& lw = w.layers[static_cast<size_t>(l)];
        Matrix& kc = k_cache_[static_cast<size_t>(l)];
        Matrix& vc = v_cache_[static_cast<size_t>(l)];

        layer_norm_row(x.data(), d, lw.ln1_gain, lw.ln1_bias, normed.data());
        row_project(normed.data(), lw.wq, qrow.data());
        row_project(normed.data(), lw.wk, kc.row(t_));
        row_project(normed.data(), lw.wv, vc.row(t_));

        std::fill(attn_row.begin(), attn_row.end(), 0.0);
        for (int h = 0; h < n_heads; ++h) {
            const int off = h * head_dim;
            attend_position(qrow.data() + off, kc, vc, t_, off, head_dim, inv_sqrt_hd, scores,
                            attn_row.data() + off);
        }
        row_project(attn_row.data(), lw.wo, proj_row.data());
        for (int j = 0; j < d; ++j) x[static_cast<size_t>(j)] += proj_row[static_cast<size_t>(j)];

        layer_norm_row(x.data(), d, lw.ln2_gain, lw.ln2_bias, normed.data());
        mlp_update_row(lw, normed.data(), x.data(), d, hidden, mlp_scratch);

        if (!apply_intervention_row(iv_, l, t_, x.data(), d)) ++zero_norm_events_;
    }

    last_x_ = std::move(x);
    ++t_;
}

void DecodeSession::append(const TokenSeq& tokens) {
    for (int32_t id : tokens.ids) append(id);
}

Vec DecodeSession::logits() const {
    if (t_ < 1) throw Error(ErrorCode::EmptyInput, "decode session is empty");
    const ModelConfig& cfg = model_->config();
    const Weights& w = model_->weights();
    Vec final_row(static_cast<size_t>(cfg.hidden_dim));
    layer_norm_row(last_x_.data(), cfg.hidden_dim, w.lnf_gain, w.lnf_bias, final_row.data());
    Vec out(static_cast<size_t>(cfg.vocab_size));
    row_project(final_row.data(), w.unembed, out.data());
    return out;
}

// --- weight file --------------------------------------------------------------

namespace {

void write_bytes(std::ofstream& out, const void* p, size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void write_u32(std::ofstream& out, uint32_t v) { write_bytes(out, &v, 4); }
void write_u64(std::ofstream& out, uint64_t v) { write_bytes(out, &v, 8); }
void write_vec(std::ofstream& out, const Vec& v) {
    write_bytes(out, v.data(), v.size() * sizeof(double));
}

void read_bytes(std::ifstream& in, void* p, size_t n) {
    if (!in.read(static_cast<char*>(p), static_cast<std::streamsize>(n)))
        throw Error(ErrorCode::IoError, "weight file truncated");
}

uint32_t read_u32(std::ifstream& in) {
    uint32_t v = 0;
    read_bytes(in, &v, 4);
    return v;
}

uint64_t read_u64(std::ifstream& in) {
    uint64_t v = 0;
    read_bytes(in, &v, 8);
    return v;
}

void read_vec(std::ifstream& in, Vec& v) {
    read_bytes(in, v.data(), v.size() * sizeof(double));
}

} // namespace

void Model::save_weights(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write weight file: " + path);
    write_bytes(out, kMagic, sizeof(kMagic));
    write_u32(out, kWeightFileVersion);
    write_u32(out, static_cast<uint32_t>(cfg_.n_layers));
    write_u32(out, static_cast<uint32_t>(cfg_.hidden_dim));
    write_u32(out, static_cast<uint32_t>(cfg_.n_heads));
    write_u32(out, static_cast<uint32_t>(cfg_.vocab_size));
    write_u32(out, static_cast<uint32_t>(cfg_.max_seq_len));
    write_u64(out, cfg_.seed);
    write_vec(out, w_.tok_emb.data);
    write_vec(out, w_.pos_emb.data);
    for (const auto& lw : w_.layers) {
        write_vec(out, lw.ln1_gain);
        write_vec(out, lw.ln1_bias);
        write_vec(out, lw.wq.data);
        write_vec(out, lw.wk.data);
        write_vec(out, lw.wv.data);
        write_vec(out, lw.wo.data);
        write_vec(out, lw.ln2_gain);
        write_vec(out, lw.ln2_bias);
        write_vec(out, lw.w_up.data);
        write_vec(out, lw.b_up);
        write_vec(out, lw.w_down.data);
        write_vec(out, lw.b_down);
    }
    write_vec(out, w_.lnf_gain);
    write_vec(out, w_.lnf_bias);
    write_vec(out, w_.unembed.data);
}

Model Model::load_weights(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open weight file: " + path);
    char magic[8];
    read_bytes(in, magic, sizeof(magic));
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw Error(ErrorCode::ParseError, "bad weight file magic");
    uint32_t version = read_u32(in);
    if (version != kWeightFileVersion)
        throw Error(ErrorCode::ParseError, "unsupported weight file version");

    ModelConfig cfg;
    cfg.n_layers = static_cast<int>(read_u32(in));
    cfg.hidden_dim = static_cast<int>(read_u32(in));
    cfg.n_heads = static_cast<int>(read_u32(in));
    cfg.vocab_size = static_cast<int>(read_u32(in));
    cfg.max_seq_len = static_cast<int>(read_u32(in));
    cfg.seed = read_u64(in);
    validate(cfg);

    Model m(cfg); // allocates correctly shaped tensors, then overwrite
    read_vec(in, m.w_.tok_emb.data);
    read_vec(in, m.w_.pos_emb.data);
    for (auto& lw : m.w_.layers) {
        read_vec(in, lw.ln1_gain);
        read_vec(in, lw.ln1_bias);
        read_vec(in, lw.wq.data);
        read_vec(in, lw.wk.data);
        read_vec(in, lw.wv.data);
        read_vec(in, lw.wo.data);
        read_vec(in, lw.ln2_gain);
        read_vec(in, lw.ln2_bias);
        read_vec(in, lw.w_up.data);
        read_vec(in, lw.b_up);
        read_vec(in, lw.w_down.data);
        read_vec(in, lw.b_down);
    }
    read_vec(in, m.w_.lnf_gain);
    read_vec(in, m.w_.lnf_bias);
    read_vec(in, m.w_.unembed.data);
    return m;
}

} // namespace steerkit
