#pragma once

#include <vector>

#include "steerkit/linalg.hpp"

namespace steerkit {

// Unit direction in the stacked layer-by-dim space; v[l*d + j] addresses
// layer l, dimension j. orientation_sign records the sign applied to the
// raw principal direction so that positive alpha points toward the
// positive-prompt side (mean projection onto the diffs >= 0).
struct SteeringVector {
    Vec v;
    int n_layers = 0;
    int dim = 0;
    int orientation_sign = 1;

    const double* layer(int l) const { return v.data() + static_cast<size_t>(l) * dim; }
};

struct CotSteerSpec {
    SteeringVector vector;
    double alpha = 0.0;
};

// prompt_states holds the clean forward pass of [reflection_prompt, query,
// init_generation], layer-major (L x T_wp x d). pad_len is the reflection
// prompt length in tokens.
struct ReflectionSteerSpec {
    Tensor3 prompt_states;
    double alpha = 0.0;
    int pad_len = 0;
};

struct CotSteerResult {
    Matrix states;                     // L x d, rescaled
    bool zero_norm_flagged = false;    // some layer had a zero-norm shifted row
    std::vector<int> zero_norm_layers; // those layers kept their original row
};

inline double reflection_beta(double alpha) { return alpha / (1.0 + alpha); }

// Shift one per-layer row in place: row <- (row + alpha*v_row) * |row| / |row + alpha*v_row|.
// Returns false when the shifted row has zero norm; the row is left unchanged.
bool steer_cot_row(double* row, const double* v_row, int dim, double alpha);

// Shift a token's stacked states (L x d) along the steering vector, restoring
// each layer row to its original norm.
CotSteerResult steer_cot(const Matrix& token_states, const CotSteerSpec& spec);

// Zero-pad the no-prompt states to the with-prompt length and blend:
// out = (padded + alpha * prompt_states) / (1 + alpha)
//     = (1 - beta) * padded + beta * prompt_states,  beta = alpha / (1 + alpha).
// states_wo_prompt is (L x T_wo x d); the result is (L x T_wp x d) and is
// meant to replace key/value source states during subsequent decoding.
Tensor3 steer_reflection(const Tensor3& states_wo_prompt, const ReflectionSteerSpec& spec);

} // namespace steerkit
