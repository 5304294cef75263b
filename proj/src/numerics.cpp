#include "debie/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace debie {

namespace {

constexpr int kMaxSweeps = 100;
constexpr double kJacobiTol = 1e-14;          // relative off-diagonal threshold
constexpr double kRankTol = 1e-12;            // sigma_j / sigma_max below this => rank-null column
constexpr std::uint64_t kPowerSeed = 0x5eedu; // fixed start vector for power iteration

// One-sided Jacobi on a tall (rows >= cols) matrix: rotate column pairs of a
// working copy until all pairs are orthogonal, accumulating the rotations
// into v. Column norms of the work matrix are the singular values.
SvdResult svd_tall(const Matrix& m) {
    const std::size_t rows = m.rows(), cols = m.cols();
    Matrix w = m;
    Matrix v = Matrix::identity(cols);

    int sweep = 0;
    bool converged = cols < 2;
    for (; sweep < kMaxSweeps && !converged; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < cols; ++p) {
            for (std::size_t q = p + 1; q < cols; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < rows; ++i) {
                    const double wp = w(i, p), wq = w(i, q);
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if (alpha == 0.0 || beta == 0.0) continue; // exactly null column
                if (std::abs(gamma) <= kJacobiTol * std::sqrt(alpha * beta)) continue;

                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < rows; ++i) {
                    const double wp = w(i, p), wq = w(i, q);
                    w(i, p) = c * wp - s * wq;
                    w(i, q) = s * wp + c * wq;
                }
                for (std::size_t i = 0; i < cols; ++i) {
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
                rotated = true;
            }
        }
        if (!rotated) converged = true;
    }
    if (!converged) throw std::runtime_error("svd: Jacobi sweeps did not converge within 100 sweeps");

    std::vector<double> sigma(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < rows; ++i) s += w(i, j) * w(i, j);
        sigma[j] = std::sqrt(s);
    }

    // Stable descending order keeps equal singular values in input order.
    std::vector<std::size_t> order(cols);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

    SvdResult out;
    out.sweeps = sweep;
    out.singular_values.resize(cols);
    out.u = Matrix(rows, cols);
    out.v = Matrix(cols, cols);
    const double sigma_max = sigma.empty() ? 0.0 : sigma[order[0]];

    for (std::size_t jj = 0; jj < cols; ++jj) {
        const std::size_t j = order[jj];
        out.singular_values[jj] = sigma[j];
        for (std::size_t i = 0; i < cols; ++i) out.v(i, jj) = v(i, j);
        if (sigma[j] > kRankTol * sigma_max && sigma[j] > 0.0) {
            for (std::size_t i = 0; i < rows; ++i) out.u(i, jj) = w(i, j) / sigma[j];
        }
        // null columns of u filled below
    }

    // Complete null u columns to an orthonormal set: for each, Gram-Schmidt
    // every standard basis vector against the columns already placed and keep
    // the one with the largest residual (first index wins ties).
    auto orthogonalize = [&](std::vector<double>& cand, std::size_t skip) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (c == skip) continue;
            double proj = 0.0;
            for (std::size_t i = 0; i < rows; ++i) proj += out.u(i, c) * cand[i];
            for (std::size_t i = 0; i < rows; ++i) cand[i] -= proj * out.u(i, c);
        }
    };
    for (std::size_t jj = 0; jj < cols; ++jj) {
        if (out.singular_values[jj] > kRankTol * sigma_max && out.singular_values[jj] > 0.0) continue;
        out.singular_values[jj] = std::max(out.singular_values[jj], 0.0);
        std::vector<double> best_cand;
        double best_nrm = 0.0;
        std::vector<double> cand(rows, 0.0);
        for (std::size_t e = 0; e < rows; ++e) {
            std::fill(cand.begin(), cand.end(), 0.0);
            cand[e] = 1.0;
            orthogonalize(cand, jj);
            double nrm = 0.0;
            for (double x : cand) nrm += x * x;
            nrm = std::sqrt(nrm);
            if (nrm > best_nrm) {
                best_nrm = nrm;
                best_cand = cand;
            }
        }
        if (best_nrm < 1e-6) throw std::runtime_error("svd: failed to complete orthonormal basis");
        orthogonalize(best_cand, jj); // second pass tightens orthogonality
        double nrm = 0.0;
        for (double x : best_cand) nrm += x * x;
        nrm = std::sqrt(nrm);
        for (std::size_t i = 0; i < rows; ++i) out.u(i, jj) = best_cand[i] / nrm;
    }

    // Sign convention: largest-magnitude entry of each u column positive.
    for (std::size_t j = 0; j < cols; ++j) {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < rows; ++i) {
            const double a = std::abs(out.u(i, j));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (out.u(arg, j) < 0.0) {
            for (std::size_t i = 0; i < rows; ++i) out.u(i, j) = -out.u(i, j);
            for (std::size_t i = 0; i < cols; ++i) out.v(i, j) = -out.v(i, j);
        }
    }
    return out;
}

} // namespace

SvdResult svd(const Matrix& m) {
    if (m.empty()) throw std::invalid_argument("svd: empty matrix");
    if (!m.all_finite()) throw std::invalid_argument("svd: non-finite entries");
    if (m.rows() >= m.cols()) return svd_tall(m);
    SvdResult t = svd_tall(transpose(m));
    SvdResult out;
    out.u = std::move(t.v);
    out.v = std::move(t.u);
    out.singular_values = std::move(t.singular_values);
    out.sweeps = t.sweeps;
    // Re-anchor the sign convention on u after the swap.
    for (std::size_t j = 0; j < out.u.cols(); ++j) {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < out.u.rows(); ++i) {
            const double a = std::abs(out.u(i, j));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (out.u(arg, j) < 0.0) {
            for (std::size_t i = 0; i < out.u.rows(); ++i) out.u(i, j) = -out.u(i, j);
            for (std::size_t i = 0; i < out.v.rows(); ++i) out.v(i, j) = -out.v(i, j);
        }
    }
    return out;
}

TopSingularResult top_right_singular_vector(const Matrix& m) {
    if (m.rows() < 1 || m.cols() < 1) throw std::invalid_argument("top_right_singular_vector: empty matrix");
    if (!m.all_finite()) throw std::invalid_argument("top_right_singular_vector: non-finite entries");
    const std::size_t d = m.cols();

    // Gram matrix g = m^T m (d x d); iterate on it so cost per step is O(d^2)
    // regardless of the number of rows.
    Matrix g(d, d);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double* row = m.data() + r * d;
        for (std::size_t i = 0; i < d; ++i) {
            const double ri = row[i];
            if (ri == 0.0) continue;
            double* grow = g.data() + i * d;
            for (std::size_t j = 0; j < d; ++j) grow[j] += ri * row[j];
        }
    }

    double gmax = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) gmax = std::max(gmax, std::abs(g(i, j)));
    if (gmax == 0.0) throw std::runtime_error("top_right_singular_vector: zero matrix");

    std::mt19937_64 rng(kPowerSeed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto seeded_unit = [&] {
        std::vector<double> v(d);
        double n = 0.0;
        for (double& x : v) {
            x = unif(rng);
            n += x * x;
        }
        n = std::sqrt(n);
        for (double& x : v) x /= n;
        return v;
    };

    constexpr double kTol = 1e-10;
    constexpr int kCap = 10000;

    auto power = [&](const std::vector<double>* deflate_against, double deflate_lambda,
                     bool& converged, int& iters) {
        std::vector<double> v = seeded_unit();
        std::vector<double> w(d);
        double lambda = 0.0;
        converged = false;
        for (iters = 0; iters < kCap; ++iters) {
            for (std::size_t i = 0; i < d; ++i) {
                double s = 0.0;
                const double* grow = g.data() + i * d;
                for (std::size_t j = 0; j < d; ++j) s += grow[j] * v[j];
                w[i] = s;
            }
            if (deflate_against) {
                double proj = 0.0;
                for (std::size_t i = 0; i < d; ++i) proj += (*deflate_against)[i] * w[i];
                for (std::size_t i = 0; i < d; ++i) w[i] -= proj * (*deflate_against)[i];
            }
            double n = 0.0;
            for (double x : w) n += x * x;
            n = std::sqrt(n);
            if (n < 1e-300) { // iterate collapsed (deflated space empty)
                lambda = 0.0;
                converged = true;
                break;
            }
            double delta = 0.0;
            for (std::size_t i = 0; i < d; ++i) {
                const double nv = w[i] / n;
                delta = std::max(delta, std::abs(nv - v[i]));
                v[i] = nv;
            }
            lambda = n;
            if (delta < kTol) {
                converged = true;
                break;
            }
        }
        (void)deflate_lambda;
        return std::pair<std::vector<double>, double>{v, lambda};
    };

    TopSingularResult out;
    bool conv1 = false;
    int it1 = 0;
    auto [v1, lambda1] = power(nullptr, 0.0, conv1, it1);
    out.vec = v1;
    out.sigma = std::sqrt(std::max(lambda1, 0.0));
    out.converged = conv1;
    out.iterations = it1;

    // Deflated second pass to detect a (near-)tied top pair.
    bool conv2 = false;
    int it2 = 0;
    auto [v2, lambda2] = power(&v1, lambda1, conv2, it2);
    (void)v2;
    out.sigma_second = std::sqrt(std::max(lambda2, 0.0));
    out.degenerate = (out.sigma - out.sigma_second) <= 1e-12 * std::max(1.0, out.sigma);

    // Sign convention as in svd().
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < d; ++i) {
        if (std::abs(out.vec[i]) > best) {
            best = std::abs(out.vec[i]);
            arg = i;
        }
    }
    if (out.vec[arg] < 0.0)
        for (double& x : out.vec) x = -x;
    return out;
}

Matrix procrustes(const Matrix& xs, const Matrix& xt) {
    if (xs.rows() != xt.rows() || xs.cols() != xt.cols())
        throw std::invalid_argument("procrustes: paired matrices must share shape");
    if (xs.rows() < 1) throw std::invalid_argument("procrustes: need at least one pair");
    const std::size_t d = xs.cols();
    Matrix cross(d, d);
    for (std::size_t r = 0; r < xs.rows(); ++r) {
        const double* srow = xs.data() + r * d;
        const double* trow = xt.data() + r * d;
        for (std::size_t i = 0; i < d; ++i) {
            const double si = srow[i];
            if (si == 0.0) continue;
            double* crow = cross.data() + i * d;
            for (std::size_t j = 0; j < d; ++j) crow[j] += si * trow[j];
        }
    }
    SvdResult f = svd(cross);
    return matmul(f.u, transpose(f.v));
}

std::optional<double> spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("spearman: length mismatch");
    if (a.size() < 2) throw std::invalid_argument("spearman: need at least 2 observations");

    auto ranks = [](const std::vector<double>& x) {
        const std::size_t n = x.size();
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
        std::vector<double> r(n);
        std::size_t i = 0;
        while (i < n) {
            std::size_t j = i;
            while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
            const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
            for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };

    const std::vector<double> ra = ranks(a), rb = ranks(b);
    const double n = static_cast<double>(a.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= n;
    mb /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = ra[i] - ma, db = rb[i] - mb;
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt; // constant input, undefined
    return sxy / std::sqrt(sxx * syy);
}

Pca2dResult pca_2d(const Matrix& points) {
    if (points.rows() < 2) throw std::invalid_argument("pca_2d: need at least 2 points");
    const std::size_t n = points.rows(), d = points.cols();
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += points(i, j);
    for (double& x : mean) x /= static_cast<double>(n);
    Matrix centered(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) centered(i, j) = points(i, j) - mean[j];

    SvdResult f = svd(centered);
    const std::size_t k = f.singular_values.size();

    Pca2dResult out;
    out.coords = Matrix(n, 2);
    const double s0 = k > 0 ? f.singular_values[0] : 0.0;
    const double s1 = k > 1 ? f.singular_values[1] : 0.0;
    out.rank_deficient = (s1 <= 1e-12 * std::max(1.0, s0));

    for (int comp = 0; comp < 2; ++comp) {
        if (comp == 1 && out.rank_deficient) break; // leave zeros
        if (static_cast<std::size_t>(comp) >= k) break;
        std::vector<double> dir(d);
        for (std::size_t j = 0; j < d; ++j) dir[j] = f.v(j, comp);
        // Component sign: largest-magnitude entry of the direction positive.
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (std::abs(dir[j]) > best) {
                best = std::abs(dir[j]);
                arg = j;
            }
        }
        if (dir[arg] < 0.0)
            for (double& x : dir) x = -x;
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) s += centered(i, j) * dir[j];
            out.coords(i, comp) = s;
        }
    }
    return out;
}

} // namespace debie
