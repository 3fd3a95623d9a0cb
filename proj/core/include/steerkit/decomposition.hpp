#pragma once

#include <cstdint>
#include <vector>

#include "steerkit/attention.hpp"
#include "steerkit/linalg.hpp"

namespace steerkit {

// Result of checking the prompt-as-shift identity
//   attn(q, [prompt; q]) = (1 - w) * attn(q, prompt) + w * attn(q, q)
// where w is the softmax mass the query keys receive, computed per query row.
struct ShiftReport {
    std::vector<double> w_per_query_row; // each in (0, 1]
    Matrix lhs;                          // Tq x d_v
    Matrix rhs;                          // Tq x d_v
    double max_abs_residual = 0.0;
    double tol = 0.0;
    bool passed = false;
};

// w_row = sum_i exp(q . k_query_i) / (sum_i exp(q . k_query_i) + sum_j exp(q . k_prompt_j)),
// with one shared max subtracted from both logit sets for stability. An empty
// prompt contributes no mass, so w = 1.
std::vector<double> shift_weight(const Matrix& query_emb, const Matrix& prompt_emb,
                                 const HeadParams& head);

ShiftReport check_shift_identity(const Matrix& query_emb, const Matrix& prompt_emb,
                                 const HeadParams& head, double tol);

// Randomized identity sweep used by the CLI and the acceptance suite:
// `cases` draws with Tq,Tp <= 8 and d <= 32. Returns the reports.
struct IdentityCaseSummary {
    int cases = 0;
    int failures = 0;
    double max_abs_residual = 0.0;
};

IdentityCaseSummary run_identity_cases(int cases, uint64_t seed, double tol);

} // namespace steerkit
