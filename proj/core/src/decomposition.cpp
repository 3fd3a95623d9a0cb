#include "steerkit/decomposition.hpp"

#include <cmath>

#include "steerkit/rng.hpp"

namespace steerkit {

std::vector<double> shift_weight(const Matrix& query_emb, const Matrix& prompt_emb,
                                 const HeadParams& head) {
    if (query_emb.rows < 1) throw Error(ErrorCode::ShapeMismatch, "query must be non-empty");
    if (query_emb.cols != head.wq.rows)
        throw Error(ErrorCode::ShapeMismatch, "query width does not match wq");
    if (prompt_emb.rows > 0 && prompt_emb.cols != head.wk.rows)
        throw Error(ErrorCode::ShapeMismatch, "prompt width does not match wk");

    Matrix q = matmul(query_emb, head.wq);
    Matrix kq = matmul(query_emb, head.wk);
    Matrix kp = prompt_emb.rows > 0 ? matmul(prompt_emb, head.wk) : Matrix();

    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(head.wq.cols));
    std::vector<double> w(static_cast<size_t>(q.rows));
    Vec lq(static_cast<size_t>(kq.rows)), lp(static_cast<size_t>(kp.rows));
    for (int i = 0; i < q.rows; ++i) {
        double m = -HUGE_VAL;
        for (int j = 0; j < kq.rows; ++j) {
            lq[static_cast<size_t>(j)] = dot(q.row(i), kq.row(j), q.cols) * inv_sqrt_dk;
            m = std::max(m, lq[static_cast<size_t>(j)]);
        }
        for (int j = 0; j < kp.rows; ++j) {
            lp[static_cast<size_t>(j)] = dot(q.row(i), kp.row(j), q.cols) * inv_sqrt_dk;
            m = std::max(m, lp[static_cast<size_t>(j)]);
        }
        double sum_q = 0.0, sum_p = 0.0;
        for (int j = 0; j < kq.rows; ++j) sum_q += std::exp(lq[static_cast<size_t>(j)] - m);
        for (int j = 0; j < kp.rows; ++j) sum_p += std::exp(lp[static_cast<size_t>(j)] - m);
        w[static_cast<size_t>(i)] = sum_q / (sum_q + sum_p);
    }
    return w;
}

ShiftReport check_shift_identity(const Matrix& query_emb, const Matrix& prompt_emb,
                                 const HeadParams& head, double tol) {
    if (tol <= 0.0) throw Error(ErrorCode::InvalidConfig, "tol must be > 0");

    ShiftReport report;
    report.tol = tol;
    report.w_per_query_row = shift_weight(query_emb, prompt_emb, head);

    // lhs: keys/values from concat[prompt, query]
    Matrix concat_emb(prompt_emb.rows + query_emb.rows, query_emb.cols);
    for (int i = 0; i < prompt_emb.rows; ++i)
        std::copy(prompt_emb.row(i), prompt_emb.row(i) + prompt_emb.cols, concat_emb.row(i));
    for (int i = 0; i < query_emb.rows; ++i)
        std::copy(query_emb.row(i), query_emb.row(i) + query_emb.cols,
                  concat_emb.row(prompt_emb.rows + i));
    report.lhs = attention(query_emb, concat_emb, head);

    Matrix self_attn = attention(query_emb, query_emb, head);
    Matrix prompt_attn =
        prompt_emb.rows > 0 ? attention(query_emb, prompt_emb, head) : Matrix();

    report.rhs = Matrix(report.lhs.rows, report.lhs.cols);
    for (int i = 0; i < report.rhs.rows; ++i) {
        double w = report.w_per_query_row[static_cast<size_t>(i)];
        for (int j = 0; j < report.rhs.cols; ++j) {
            double blended = w * self_attn.at(i, j);
            if (prompt_attn.rows > 0) blended += (1.0 - w) * prompt_attn.at(i, j);
            report.rhs.at(i, j) = blended;
        }
    }

    double max_resid = 0.0;
    for (size_t i = 0; i < report.lhs.data.size(); ++i)
        max_resid = std::max(max_resid, std::abs(report.lhs.data[i] - report.rhs.data[i]));
    report.max_abs_residual = max_resid;
    report.passed = max_resid < tol;
    return report;
}

IdentityCaseSummary run_identity_cases(int cases, uint64_t seed, double tol) {
    IdentityCaseSummary summary;
    Rng rng(seed);
    for (int c = 0; c < cases; ++c) {
        int d = 2 + static_cast<int>(rng.next_u64() % 31);  // <= 32
        int dk = 1 + static_cast<int>(rng.next_u64() % static_cast<uint64_t>(d));
        int tq = 1 + static_cast<int>(rng.next_u64() % 8);
        int tp = 1 + static_cast<int>(rng.next_u64() % 8);

        auto randmat = [&](int r, int cc) {
            Matrix m(r, cc);
            for (double& x : m.data) x = rng.normal();
            return m;
        };
        HeadParams head{randmat(d, dk), randmat(d, dk), randmat(d, d)};
        Matrix query = randmat(tq, d);
        Matrix prompt = randmat(tp, d);

        ShiftReport report = check_shift_identity(query, prompt, head, tol);
        summary.max_abs_residual = std::max(summary.max_abs_residual, report.max_abs_residual);
        if (!report.passed) ++summary.failures;
        ++summary.cases;
    }
    return summary;
}

} // namespace steerkit
