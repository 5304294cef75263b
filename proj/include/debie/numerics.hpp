#pragma once

#include <optional>
#include <vector>

#include "debie/matrix.hpp"

namespace debie {

// Compact SVD m = u * diag(s) * v^T with k = min(rows, cols) columns in u
// and v. Singular values are non-negative and sorted descending. Sign
// convention: the largest-magnitude entry of each u column is positive
// (v flipped in tandem), so factors are reproducible run-to-run.
struct SvdResult {
    Matrix u;
    std::vector<double> singular_values;
    Matrix v;
    int sweeps = 0;
};

// One-sided Jacobi. Adequate for the dense d x d (d <= 1024) problems this
// toolkit produces. Throws on non-finite input or if 100 sweeps do not
// converge.
SvdResult svd(const Matrix& m);

struct TopSingularResult {
    std::vector<double> vec;   // unit right singular vector, sign-normalized
    double sigma = 0.0;        // top singular value estimate
    double sigma_second = 0.0; // deflated second estimate (tie diagnostics)
    bool degenerate = false;   // top two singular values indistinguishable
    bool converged = true;
    int iterations = 0;
};

// Power iteration on m^T m with a fixed-seed start vector (tolerance 1e-10,
// cap 10000 iterations). Cheaper than a full SVD when m has many rows.
// Throws if m is (numerically) zero.
TopSingularResult top_right_singular_vector(const Matrix& m);

// Orthogonal w minimizing ||xs * w - xt||_F via w = u * v^T with
// (u, s, v) = svd(xs^T * xt). Rows are paired observations.
Matrix procrustes(const Matrix& xs, const Matrix& xt);

// Spearman rank correlation with average-rank (fractional) tie handling.
// Returns nullopt when either input is constant (correlation undefined).
std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b);

struct Pca2dResult {
    Matrix coords;              // n x 2, mean-centered projection
    bool rank_deficient = false; // second component had no variance
};

// Projection onto the two leading right singular vectors of the centered
// point matrix. Component signs follow the positive-largest-entry rule.
Pca2dResult pca_2d(const Matrix& points);

} // namespace debie
