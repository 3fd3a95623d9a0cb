#include "steerkit/steering.hpp"

#include <cmath>

#include "steerkit/error.hpp"

namespace steerkit {

bool steer_cot_row(double* row, const double* v_row, int dim, double alpha) {
    if (alpha == 0.0) return true;
    double base_norm = norm2(row, dim);
    Vec shifted(static_cast<size_t>(dim));
    for (int j = 0; j < dim; ++j) shifted[j] = row[j] + alpha * v_row[j];
    double shifted_norm = norm2(shifted.data(), dim);
    if (shifted_norm == 0.0) return false;
    double scale = base_norm / shifted_norm;
    for (int j = 0; j < dim; ++j) row[j] = shifted[j] * scale;
    return true;
}

CotSteerResult steer_cot(const Matrix& token_states, const CotSteerSpec& spec) {
    if (spec.vector.n_layers != token_states.rows || spec.vector.dim != token_states.cols)
        throw Error(ErrorCode::ShapeMismatch, "steering vector does not match state shape");
    if (!std::isfinite(spec.alpha))
        throw Error(ErrorCode::ShapeMismatch, "alpha must be finite");

    CotSteerResult result;
    result.states = token_states;
    for (int l = 0; l < token_states.rows; ++l) {
        if (!steer_cot_row(result.states.row(l), spec.vector.layer(l), token_states.cols,
                           spec.alpha)) {
            result.zero_norm_flagged = true;
            result.zero_norm_layers.push_back(l);
        }
    }
    return result;
}

Tensor3 steer_reflection(const Tensor3& states_wo_prompt, const ReflectionSteerSpec& spec) {
    if (spec.alpha < 0.0 || !std::isfinite(spec.alpha))
        throw Error(ErrorCode::NegativeAlpha, "reflection alpha must be finite and >= 0");
    const Tensor3& prompt = spec.prompt_states;
    if (prompt.n0 != states_wo_prompt.n0 || prompt.n2 != states_wo_prompt.n2)
        throw Error(ErrorCode::ShapeMismatch, "layer/dim mismatch between state tensors");
    if (prompt.n1 != spec.pad_len + states_wo_prompt.n1)
        throw Error(ErrorCode::ShapeMismatch,
                    "with-prompt length must equal pad_len + no-prompt length");

    const int L = prompt.n0;
    const int t_wp = prompt.n1;
    const int d = prompt.n2;
    const double inv = 1.0 / (1.0 + spec.alpha);

    Tensor3 out(L, t_wp, d);
    for (int l = 0; l < L; ++l) {
        for (int t = 0; t < t_wp; ++t) {
            const double* p = prompt.row(l, t);
            double* o = out.row(l, t);
            if (t < spec.pad_len) {
                for (int j = 0; j < d; ++j) o[j] = spec.alpha * p[j] * inv;
            } else {
                const double* w = states_wo_prompt.row(l, t - spec.pad_len);
                for (int j = 0; j < d; ++j) o[j] = (w[j] + spec.alpha * p[j]) * inv;
            }
        }
    }
    return out;
}

} // namespace steerkit
