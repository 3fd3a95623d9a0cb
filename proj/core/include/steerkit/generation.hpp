#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "steerkit/model.hpp"
#include "steerkit/rng.hpp"

namespace steerkit {

struct DecodeParams {
    double temperature = 0.7; // 0 = greedy (argmax, lowest id wins ties)
    int top_k = 0;            // 0 disables
    double top_p = 0.0;       // 0 disables, else in (0, 1]
    int max_new_tokens = 24;
    uint64_t seed = 0;
};

void validate(const DecodeParams& params);

struct AlphaSchedule {
    double low = -0.15;
    double high = 0.15;
    int n_alphas = 20;
    int samples_per_alpha = 5;
    uint64_t seed = 0;
};

// n_alphas values drawn i.i.d. uniform on the open interval (low, high) from
// the schedule seed, returned sorted ascending. Deterministic.
std::vector<double> sample_alphas(const AlphaSchedule& schedule);

struct GenerationRecord {
    std::string query_id;
    double alpha = 0.0; // steering strength actually applied (0 for baseline)
    int alpha_index = 0;
    int sample_idx = 0;
    TokenSeq tokens; // generated suffix, end token excluded
    std::string text;
    std::optional<std::string> answer; // canonical answer, filled by the harness
    int length = 0;
    uint64_t seed_used = 0;

    bool operator==(const GenerationRecord& o) const = default;
};

// One sampling step over a logit row: greedy argmax (lowest id on ties) at
// temperature 0, otherwise temperature/top-k/top-p sampling driven by rng.
int32_t sample_next_token(const double* logits, int vocab_size, const DecodeParams& params,
                          Rng& rng);

// Autoregressive decode from prefix with the intervention applied at every
// step. Stops on <eos>, max_new_tokens, or a full context window.
GenerationRecord generate(const Model& model, const Vocab& vocab, const TokenSeq& prefix,
                          const DecodeParams& params, const Intervention& iv);

// Alpha sweep: n_alphas x samples_per_alpha records. Record (ai, si) uses
// seed derive_seed(params.seed, ai, si), so any record can be regenerated in
// isolation and execution order cannot matter. Passing no steering vector
// produces the equal-budget unsteered baseline (same derived seeds).
std::vector<GenerationRecord> sweep(const Model& model, const Vocab& vocab,
                                    const TokenSeq& prefix,
                                    const SteeringVector* steer,
                                    const AlphaSchedule& schedule,
                                    const DecodeParams& params,
                                    const std::string& query_id);

// Clean forward passes for reflection decoding: with-prompt tokens plus the
// state tensors interpolated by steer_reflection.
struct ReflectionContext {
    TokenSeq wp_tokens;  // reflection_prompt ++ query ++ init_generation
    Tensor3 states_wp;   // L x T_wp x d
    Tensor3 states_wo;   // L x T_wo x d
    int pad_len = 0;     // reflection prompt length
};

ReflectionContext prepare_reflection_context(const Model& model, const Vocab& vocab,
                                             const std::string& reflection_prompt,
                                             const std::string& query,
                                             const std::string& init_generation);

Intervention make_reflection_intervention(const ReflectionContext& ctx, double alpha);

// Reflection-mode sweep over the schedule's alphas (same seed derivation).
std::vector<GenerationRecord> reflect_sweep(const Model& model, const Vocab& vocab,
                                            const ReflectionContext& ctx,
                                            const AlphaSchedule& schedule,
                                            const DecodeParams& params,
                                            const std::string& query_id);

} // namespace steerkit
