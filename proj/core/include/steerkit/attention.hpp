#pragma once

#include "steerkit/linalg.hpp"

namespace steerkit {

// Projection weights for one attention computation: queries from m*wq,
// keys/values from n*wk, n*wv.
struct HeadParams {
    Matrix wq; // d_in x d_k
    Matrix wk; // d_in x d_k
    Matrix wv; // d_in x d_v
};

// Single unmasked attention: softmax(q k^T / sqrt(d_k)) v, where
// q = q_states*wq, k = kv_states*wk, v = kv_states*wv. Attention weights
// are row-stochastic. Throws ShapeMismatch on inconsistent shapes.
Matrix attention(const Matrix& q_states, const Matrix& kv_states, const HeadParams& head);

} // namespace steerkit
