#include "steerkit/attention.hpp"

#include <cmath>

namespace steerkit {

Matrix attention(const Matrix& q_states, const Matrix& kv_states, const HeadParams& head) {
    if (q_states.cols != head.wq.rows || kv_states.cols != head.wk.rows ||
        kv_states.cols != head.wv.rows)
        throw Error(ErrorCode::ShapeMismatch, "state width does not match projections");
    if (head.wq.cols != head.wk.cols)
        throw Error(ErrorCode::ShapeMismatch, "wq and wk must share the key dimension");
    if (q_states.rows < 1 || kv_states.rows < 1)
        throw Error(ErrorCode::ShapeMismatch, "empty state matrix");

    Matrix q = matmul(q_states, head.wq);
    Matrix k = matmul(kv_states, head.wk);
    Matrix v = matmul(kv_states, head.wv);

    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(head.wq.cols));
    Matrix out(q.rows, v.cols);
    Vec scores(static_cast<size_t>(k.rows));
    for (int i = 0; i < q.rows; ++i) {
        for (int j = 0; j < k.rows; ++j)
            scores[static_cast<size_t>(j)] = dot(q.row(i), k.row(j), q.cols) * inv_sqrt_dk;
        softmax_inplace(scores.data(), k.rows);
        double* orow = out.row(i);
        for (int j = 0; j < k.rows; ++j)
            axpy(scores[static_cast<size_t>(j)], v.row(j), orow, v.cols);
    }
    return out;
}

} // namespace steerkit
