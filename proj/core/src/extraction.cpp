#include "steerkit/extraction.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "steerkit/rng.hpp"

namespace steerkit {

namespace {

constexpr char kVecMagic[8] = {'S', 'T', 'E', 'E', 'R', 'V', 'E', 'C'};
constexpr uint32_t kVecFileVersion = 1;
constexpr uint64_t kPowerIterSeed = 0x5EEDD1Au; // fixed start for determinism
constexpr int kMaxDenseDim = 512;

double mean_projection(const Vec& v, const DifferenceSet& set) {
    double acc = 0.0;
    for (const auto& diff : set.diffs)
        acc += dot(v.data(), diff.data(), static_cast<int>(v.size()));
    return acc / static_cast<double>(set.m());
}

SteeringVector orient(Vec v, const DifferenceSet& set) {
    SteeringVector out;
    out.n_layers = set.n_layers;
    out.dim = set.dim;
    out.orientation_sign = 1;
    if (mean_projection(v, set) < 0.0) {
        for (double& x : v) x = -x;
        out.orientation_sign = -1;
    }
    out.v = std::move(v);
    return out;
}

void check_not_degenerate(const DifferenceSet& set) {
    if (set.m() < 1) throw Error(ErrorCode::DegenerateSet, "difference set is empty");
    double mean_sq = 0.0;
    for (const auto& diff : set.diffs) {
        double n = norm2(diff);
        mean_sq += n * n;
    }
    mean_sq /= static_cast<double>(set.m());
    if (mean_sq < 1e-24)
        throw Error(ErrorCode::DegenerateSet, "all difference vectors are (near-)zero");
}

} // namespace

std::vector<ContrastivePair> build_contrastive_set(const Vocab& vocab,
                                                   const std::vector<std::string>& queries,
                                                   const std::string& pos_prompt,
                                                   const std::string& neg_prompt,
                                                   int max_seq_len) {
    if (queries.empty()) throw Error(ErrorCode::EmptyQuerySet, "no queries supplied");
    if (pos_prompt.empty() || neg_prompt.empty())
        throw Error(ErrorCode::InvalidPromptPair, "prompts must be non-empty");
    if (pos_prompt == neg_prompt)
        throw Error(ErrorCode::InvalidPromptPair, "positive and negative prompts are identical");

    TokenSeq pos_ids = vocab.tokenize(pos_prompt);
    TokenSeq neg_ids = vocab.tokenize(neg_prompt);
    if (pos_ids == neg_ids)
        throw Error(ErrorCode::InvalidPromptPair, "prompts tokenize identically");

    std::vector<ContrastivePair> pairs;
    pairs.reserve(queries.size());
    std::ostringstream too_long;
    int n_too_long = 0;
    for (size_t i = 0; i < queries.size(); ++i) {
        TokenSeq q = vocab.tokenize(queries[i]);
        ContrastivePair pair;
        pair.pos = concat(pos_ids, q);
        pair.neg = concat(neg_ids, q);
        pair.query_id = "q" + std::to_string(i);
        if (pair.pos.length() > max_seq_len || pair.neg.length() > max_seq_len) {
            if (n_too_long++) too_long << ", ";
            too_long << pair.query_id;
            continue;
        }
        pairs.push_back(std::move(pair));
    }
    if (n_too_long > 0)
        throw Error(ErrorCode::QueryTooLong,
                    "queries exceed max_seq_len after prepending: " + too_long.str());
    return pairs;
}

DifferenceSet collect_differences(const Model& model, const Vocab& vocab,
                                  const std::vector<std::string>& queries,
                                  const std::string& pos_prompt,
                                  const std::string& neg_prompt) {
    auto pairs = build_contrastive_set(vocab, queries, pos_prompt, neg_prompt,
                                       model.config().max_seq_len);
    DifferenceSet set;
    set.n_layers = model.config().n_layers;
    set.dim = model.config().hidden_dim;
    set.diffs.reserve(pairs.size());
    for (const auto& pair : pairs) {
        Matrix pos_states = last_token_states(model, pair.pos);
        Matrix neg_states = last_token_states(model, pair.neg);
        Vec diff(pos_states.data.size());
        for (size_t i = 0; i < diff.size(); ++i)
            diff[i] = pos_states.data[i] - neg_states.data[i];
        set.diffs.push_back(std::move(diff));
    }
    return set;
}

PrincipalResult principal_direction(const DifferenceSet& diff_set, int max_iters,
                                    double conv_tol) {
    check_not_degenerate(diff_set);
    const int n = diff_set.flat_dim();
    const int m = diff_set.m();

    // u = C v without forming C: C v = (1/m) sum_i (diff_i . v) diff_i
    auto apply_cov = [&](const Vec& v, Vec& u) {
        std::fill(u.begin(), u.end(), 0.0);
        for (const auto& diff : diff_set.diffs) {
            double proj = dot(diff.data(), v.data(), n);
            axpy(proj / m, diff.data(), u.data(), n);
        }
    };

    Vec v(static_cast<size_t>(n));
    Vec u(static_cast<size_t>(n));
    double eigenvalue = 0.0;
    int iters_used = 0;
    bool converged = false;

    for (int restart = 0; restart < 3 && !converged; ++restart) {
        Rng rng(kPowerIterSeed + static_cast<uint64_t>(restart));
        for (double& x : v) x = rng.normal();
        double nv = norm2(v);
        for (double& x : v) x /= nv;

        for (int it = 0; it < max_iters; ++it) {
            apply_cov(v, u);
            eigenvalue = norm2(u);
            if (eigenvalue < 1e-30) break; // start vector orthogonal to span; restart
            double delta_sq = 0.0;
            for (int i = 0; i < n; ++i) {
                double next = u[static_cast<size_t>(i)] / eigenvalue;
                double c = next - v[static_cast<size_t>(i)];
                delta_sq += c * c;
                v[static_cast<size_t>(i)] = next;
            }
            iters_used = it + 1;
            if (std::sqrt(delta_sq) < conv_tol) {
                converged = true;
                break;
            }
        }
    }
    if (!converged)
        throw Error(ErrorCode::NoConvergence,
                    "power iteration hit " + std::to_string(max_iters) +
                        " iterations without meeting tol (eigengap too small); last "
                        "eigenvalue estimate " +
                        std::to_string(eigenvalue));

    PrincipalResult result;
    result.vector = orient(std::move(v), diff_set);
    result.eigenvalue = eigenvalue;
    result.iterations = iters_used;
    return result;
}

PrincipalResult eigen_oracle(const DifferenceSet& diff_set) {
    check_not_degenerate(diff_set);
    const int n = diff_set.flat_dim();
    if (n > kMaxDenseDim)
        throw Error(ErrorCode::DimensionTooLarge,
                    "dense path limited to " + std::to_string(kMaxDenseDim) + " dims");

    // C = (1/m) sum diff diff^T
    Matrix c(n, n);
    for (const auto& diff : diff_set.diffs)
        for (int i = 0; i < n; ++i) {
            double di = diff[static_cast<size_t>(i)] / diff_set.m();
            if (di == 0.0) continue;
            axpy(di, diff.data(), c.row(i), n);
        }

    // Cyclic Jacobi on the symmetric matrix; eigenvectors accumulate in vmat.
    Matrix vmat(n, n);
    for (int i = 0; i < n; ++i) vmat.at(i, i) = 1.0;

    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += c.at(p, q) * c.at(p, q);
        if (std::sqrt(off) < 1e-14) break;

        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = c.at(p, q);
                if (std::abs(apq) < 1e-300) continue;
                double app = c.at(p, p), aqq = c.at(q, q);
                double theta = 0.5 * (aqq - app) / apq;
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double cs = 1.0 / std::sqrt(t * t + 1.0);
                double sn = t * cs;
                for (int i = 0; i < n; ++i) {
                    double cip = c.at(i, p), ciq = c.at(i, q);
                    c.at(i, p) = cs * cip - sn * ciq;
                    c.at(i, q) = sn * cip + cs * ciq;
                }
                for (int i = 0; i < n; ++i) {
                    double cpi = c.at(p, i), cqi = c.at(q, i);
                    c.at(p, i) = cs * cpi - sn * cqi;
                    c.at(q, i) = sn * cpi + cs * cqi;
                }
                for (int i = 0; i < n; ++i) {
                    double vip = vmat.at(i, p), viq = vmat.at(i, q);
                    vmat.at(i, p) = cs * vip - sn * viq;
                    vmat.at(i, q) = sn * vip + cs * viq;
                }
            }
        }
    }

    int best = 0;
    for (int i = 1; i < n; ++i)
        if (c.at(i, i) > c.at(best, best)) best = i;

    Vec v(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<size_t>(i)] = vmat.at(i, best);
    double nv = norm2(v);
    for (double& x : v) x /= nv;

    PrincipalResult result;
    result.vector = orient(std::move(v), diff_set);
    result.eigenvalue = c.at(best, best);
    return result;
}

SteeringVector extract_steering_vector(const Model& model, const Vocab& vocab,
                                       const std::vector<std::string>& queries,
                                       const std::string& pos_prompt,
                                       const std::string& neg_prompt) {
    DifferenceSet set = collect_differences(model, vocab, queries, pos_prompt, neg_prompt);
    return principal_direction(set).vector;
}

void save_steering_vector(const SteeringVector& v, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write vector file: " + path);
    out.write(kVecMagic, sizeof(kVecMagic));
    uint32_t version = kVecFileVersion;
    uint32_t layers = static_cast<uint32_t>(v.n_layers);
    uint32_t dim = static_cast<uint32_t>(v.dim);
    int32_t sign = v.orientation_sign;
    out.write(reinterpret_cast<const char*>(&version), 4);
    out.write(reinterpret_cast<const char*>(&layers), 4);
    out.write(reinterpret_cast<const char*>(&dim), 4);
    out.write(reinterpret_cast<const char*>(&sign), 4);
    out.write(reinterpret_cast<const char*>(v.v.data()),
              static_cast<std::streamsize>(v.v.size() * sizeof(double)));
}

SteeringVector load_steering_vector(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open vector file: " + path);
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kVecMagic, 8) != 0)
        throw Error(ErrorCode::ParseError, "bad vector file magic");
    uint32_t version = 0, layers = 0, dim = 0;
    int32_t sign = 0;
    in.read(reinterpret_cast<char*>(&version), 4);
    in.read(reinterpret_cast<char*>(&layers), 4);
    in.read(reinterpret_cast<char*>(&dim), 4);
    in.read(reinterpret_cast<char*>(&sign), 4);
    if (!in || version != kVecFileVersion)
        throw Error(ErrorCode::ParseError, "unsupported vector file version");

    SteeringVector v;
    v.n_layers = static_cast<int>(layers);
    v.dim = static_cast<int>(dim);
    v.orientation_sign = sign;
    v.v.resize(static_cast<size_t>(layers) * dim);
    if (!in.read(reinterpret_cast<char*>(v.v.data()),
                 static_cast<std::streamsize>(v.v.size() * sizeof(double))))
        throw Error(ErrorCode::ParseError, "vector file truncated");
    return v;
}

} // namespace steerkit
