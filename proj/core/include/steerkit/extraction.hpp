#pragma once

#include <string>
#include <vector>

#include "steerkit/model.hpp"
#include "steerkit/steering.hpp"

namespace steerkit {

// Same query prefixed with the positive and the negative prompt.
struct ContrastivePair {
    TokenSeq pos;
    TokenSeq neg;
    std::string query_id;
};

// Flattened last-token state differences, one vector of length L*d per pair.
struct DifferenceSet {
    std::vector<Vec> diffs;
    int n_layers = 0;
    int dim = 0;

    int m() const { return static_cast<int>(diffs.size()); }
    int flat_dim() const { return n_layers * dim; }
};

std::vector<ContrastivePair> build_contrastive_set(const Vocab& vocab,
                                                   const std::vector<std::string>& queries,
                                                   const std::string& pos_prompt,
                                                   const std::string& neg_prompt,
                                                   int max_seq_len);

DifferenceSet collect_differences(const Model& model, const Vocab& vocab,
                                  const std::vector<std::string>& queries,
                                  const std::string& pos_prompt,
                                  const std::string& neg_prompt);

struct PrincipalResult {
    SteeringVector vector;
    double eigenvalue = 0.0;
    int iterations = 0;
};

// Dominant eigenvector of (1/m) sum diff_i diff_i^T by power iteration with a
// fixed seeded start; diffs are not mean-centered. The result is unit norm and
// oriented so the mean projection onto the diffs is >= 0.
PrincipalResult principal_direction(const DifferenceSet& diff_set, int max_iters = 1000,
                                    double conv_tol = 1e-10);

// Same dominant eigenvector via full dense Jacobi eigendecomposition; kept as
// an independent route for cross-checking. Dense path only, flat dim <= 512.
PrincipalResult eigen_oracle(const DifferenceSet& diff_set);

// End-to-end: contrastive pairs -> last-token state diffs -> first principal
// direction.
SteeringVector extract_steering_vector(const Model& model, const Vocab& vocab,
                                       const std::vector<std::string>& queries,
                                       const std::string& pos_prompt,
                                       const std::string& neg_prompt);

// Vector file: "STEERVEC", u32 version, u32 L, u32 d, i32 orientation_sign,
// then L*d float64, little-endian.
void save_steering_vector(const SteeringVector& v, const std::string& path);
SteeringVector load_steering_vector(const std::string& path);

} // namespace steerkit
