#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace debie {

// Dense row-major matrix of doubles. Deliberately dumb: shape + storage,
// plus the handful of kernels the rest of the toolkit needs.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const Matrix& o) const = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

// Cosine similarity with norms clamped at 1e-12 so degenerate inputs yield a
// finite value instead of NaN. Callers that care can set *clamped.
inline double cosine(std::span<const double> a, std::span<const double> b, bool* clamped = nullptr) {
    double na = norm2(a), nb = norm2(b);
    if (na < 1e-12 || nb < 1e-12) {
        if (clamped) *clamped = true;
        na = std::max(na, 1e-12);
        nb = std::max(nb, 1e-12);
    }
    return dot(a, b) / (na * nb);
}

inline double euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// C = A * B. Row-block (i,k,j) order keeps accesses sequential; summation
// order per output row is fixed, so results do not depend on call context.
Matrix matmul(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);

// out = x * M for a row vector x (length M.rows()).
std::vector<double> row_times_matrix(std::span<const double> x, const Matrix& m);

double frobenius_norm(const Matrix& m);
double max_abs_diff(const Matrix& a, const Matrix& b);

} // namespace debie
