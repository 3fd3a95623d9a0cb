#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "steerkit/error.hpp"

namespace steerkit {

using Vec = std::vector<double>;

// Row-major dense matrix. Everything in the library runs on float64.
struct Matrix {
    int rows = 0;
    int cols = 0;
    Vec data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    double* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
    const double* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
};

// Dense rank-3 tensor, shape (n0, n1, n2), innermost contiguous.
struct Tensor3 {
    int n0 = 0, n1 = 0, n2 = 0;
    Vec data;

    Tensor3() = default;
    Tensor3(int a, int b, int c)
        : n0(a), n1(b), n2(c), data(static_cast<size_t>(a) * b * c, 0.0) {}

    double& at(int i, int j, int k) {
        return data[(static_cast<size_t>(i) * n1 + j) * n2 + k];
    }
    double at(int i, int j, int k) const {
        return data[(static_cast<size_t>(i) * n1 + j) * n2 + k];
    }

    double* row(int i, int j) { return data.data() + (static_cast<size_t>(i) * n1 + j) * n2; }
    const double* row(int i, int j) const {
        return data.data() + (static_cast<size_t>(i) * n1 + j) * n2;
    }

    bool same_shape(const Tensor3& o) const {
        return n0 == o.n0 && n1 == o.n1 && n2 == o.n2;
    }
};

inline double dot(const double* a, const double* b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(const double* a, int n) { return std::sqrt(dot(a, a, n)); }

inline double norm2(const Vec& a) { return norm2(a.data(), static_cast<int>(a.size())); }

// y += c * x
inline void axpy(double c, const double* x, double* y, int n) {
    for (int i = 0; i < n; ++i) y[i] += c * x[i];
}

// out = a (rows x inner) * b (inner x cols)
inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw Error(ErrorCode::ShapeMismatch, "matmul inner dims differ");
    Matrix out(a.rows, b.cols);
    for (int i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* orow = out.row(i);
        for (int k = 0; k < a.cols; ++k) {
            double av = arow[k];
            if (av == 0.0) continue;
            const double* brow = b.row(k);
            for (int j = 0; j < b.cols; ++j) orow[j] += av * brow[j];
        }
    }
    return out;
}

// In-place softmax with max subtraction.
inline void softmax_inplace(double* x, int n) {
    double m = x[0];
    for (int i = 1; i < n; ++i) m = std::max(m, x[i]);
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        x[i] = std::exp(x[i] - m);
        s += x[i];
    }
    for (int i = 0; i < n; ++i) x[i] /= s;
}

inline bool all_finite(const Vec& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

} // namespace steerkit
