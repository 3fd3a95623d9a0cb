#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "steerkit/linalg.hpp"
#include "steerkit/steering.hpp"
#include "steerkit/vocab.hpp"

namespace steerkit {

struct ModelConfig {
    int n_layers = 4;
    int hidden_dim = 64;
    int n_heads = 4;
    int vocab_size = 0;
    int max_seq_len = 256;
    uint64_t seed = 42;
};

// Throws InvalidConfig when an invariant is violated (d % heads, L >= 1,
// V >= 2, max_seq_len >= 2).
void validate(const ModelConfig& cfg);

// Per-layer, per-token residual states captured by a forward pass.
// states[l][t] is the post-layer-l residual row AFTER any intervention;
// pre_norms[l][t] is the row norm BEFORE the intervention touched it,
// which is what norm-preserving rescale must restore.
struct LayerStates {
    Tensor3 states;   // L x T x d
    Matrix pre_norms; // L x T
};

// Precomputed interpolated states pinned onto the prefix during reflection
// decoding; see steer_reflection.
struct ReflectionPin {
    Tensor3 pinned; // L x T_wp x d
    double alpha = 0.0;
};

struct Intervention {
    enum class Mode { None, CotSteer, ReflectionSteer };

    Mode mode = Mode::None;
    CotSteerSpec cot_spec;
    ReflectionPin reflection_pin;

    static Intervention none() { return {}; }
    static Intervention cot(CotSteerSpec spec) {
        Intervention iv;
        iv.mode = Mode::CotSteer;
        iv.cot_spec = std::move(spec);
        return iv;
    }
    static Intervention reflection(ReflectionPin pin) {
        Intervention iv;
        iv.mode = Mode::ReflectionSteer;
        iv.reflection_pin = std::move(pin);
        return iv;
    }
};

struct ForwardResult {
    Matrix logits;       // T x V
    LayerStates states;
    int zero_norm_events = 0; // layer rows left unshifted by a degenerate rescale
};

struct LayerWeights {
    Vec ln1_gain, ln1_bias;
    Matrix wq, wk, wv, wo;   // d x d
    Vec ln2_gain, ln2_bias;
    Matrix w_up, w_down;     // d x 4d, 4d x d
    Vec b_up, b_down;
};

struct Weights {
    Matrix tok_emb; // V x d
    Matrix pos_emb; // max_seq_len x d
    std::vector<LayerWeights> layers;
    Vec lnf_gain, lnf_bias;
    Matrix unembed; // d x V
};

// Deterministic miniature decoder-only transformer: learned positions,
// pre-norm, GELU MLP, causal attention. Weights come from a single
// splitmix64 stream seeded with config.seed; every entry is N(0, 0.08^2)
// drawn in declaration order (tok_emb, pos_emb, per layer wq wk wv wo
// w_up w_down, unembed), biases zero, norm gains one. Immutable after
// construction; forward passes may run concurrently.
class Model {
public:
    explicit Model(const ModelConfig& cfg);

    // Little-endian weight file: "STEERMDL", u32 version, u32 L/d/heads/V/
    // max_seq_len, u64 seed, then float64 tensors in the init draw order
    // with norm params and biases included.
    static Model load_weights(const std::string& path);
    void save_weights(const std::string& path) const;

    const ModelConfig& config() const { return cfg_; }
    const Weights& weights() const { return w_; }

    // Full causal forward pass with per-layer state capture. The
    // intervention rewrites each token's post-layer residual row (CoT
    // steering) or pins prefix rows to precomputed states (reflection).
    ForwardResult forward_capture(const TokenSeq& tokens, const Intervention& iv) const;

private:
    Model() = default;

    ModelConfig cfg_;
    Weights w_;
};

inline Model init_model(const ModelConfig& cfg) { return Model(cfg); }

// States of the last token at each layer (L x d) from an uninterfered pass.
Matrix last_token_states(const Model& model, const TokenSeq& tokens);

// Incremental decoding with per-layer key/value caching. Appending tokens
// one at a time produces bit-identical states and logits to a full
// forward_capture over the same sequence (the inner loops are shared), while
// only paying for the new position. The intervention is fixed per session.
class DecodeSession {
public:
    DecodeSession(const Model& model, Intervention iv);

    void append(int32_t id);
    void append(const TokenSeq& tokens);

    int length() const { return t_; }
    // logits row of the last appended position
    Vec logits() const;
    int zero_norm_events() const { return zero_norm_events_; }

private:
    const Model* model_;
    Intervention iv_;
    int t_ = 0;
    int zero_norm_events_ = 0;
    std::vector<Matrix> k_cache_; // per layer, max_seq_len x d, rows [0, t)
    std::vector<Matrix> v_cache_;
    Vec last_x_; // post-final-layer residual of the last position
};

} // namespace steerkit
