#include "debie/ml_prims.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace debie {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// Inverse-CDF draw over non-negative weights; hand-rolled so the sampling
// sequence is identical across standard libraries.
std::size_t weighted_draw(const std::vector<double>& weights, double total, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unif(0.0, total);
    const double r = unif(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (r < acc) return i;
    }
    // r landed on the tail of accumulated rounding; last positive weight wins.
    for (std::size_t i = weights.size(); i-- > 0;)
        if (weights[i] > 0.0) return i;
    return weights.size() - 1;
}

} // namespace

ClusterResult kmeans2(const Matrix& points, std::uint64_t seed) {
    const std::size_t n = points.rows(), d = points.cols();
    if (n < 2) throw std::invalid_argument("kmeans2: need at least 2 points");

    std::mt19937_64 rng(seed);
    constexpr int kMaxAttempts = 5;
    constexpr int kMaxIters = 300;

    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        // kmeans++ seeding: first center uniform, second by D^2 sampling.
        std::uniform_int_distribution<std::size_t> uniform_idx(0, n - 1);
        const std::size_t c0 = uniform_idx(rng);
        std::vector<double> dist2(n);
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dist2[i] = sq_dist(points.row(i), points.row(c0));
            total += dist2[i];
        }
        if (total <= 0.0) continue; // all points identical to the first center
        const std::size_t c1 = weighted_draw(dist2, total, rng);

        Matrix centroids(2, d);
        for (std::size_t j = 0; j < d; ++j) {
            centroids(0, j) = points(c0, j);
            centroids(1, j) = points(c1, j);
        }

        std::vector<int> assign(n, -1);
        int iters = 0;
        bool empty_cluster = false;
        for (; iters < kMaxIters; ++iters) {
            bool changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                const double d0 = sq_dist(points.row(i), centroids.row(0));
                const double d1 = sq_dist(points.row(i), centroids.row(1));
                const int a = d1 < d0 ? 1 : 0; // tie goes to cluster 0
                if (a != assign[i]) {
                    assign[i] = a;
                    changed = true;
                }
            }
            if (!changed) break;
            std::size_t count0 = 0, count1 = 0;
            Matrix next(2, d);
            for (std::size_t i = 0; i < n; ++i) {
                (assign[i] == 0 ? count0 : count1)++;
                for (std::size_t j = 0; j < d; ++j) next(assign[i], j) += points(i, j);
            }
            if (count0 == 0 || count1 == 0) {
                empty_cluster = true;
                break;
            }
            for (std::size_t j = 0; j < d; ++j) {
                next(0, j) /= static_cast<double>(count0);
                next(1, j) /= static_cast<double>(count1);
            }
            centroids = std::move(next);
        }
        if (empty_cluster) continue;

        ClusterResult res;
        res.assignments = std::move(assign);
        res.centroids = std::move(centroids);
        res.iterations = iters;
        res.attempts = attempt + 1;
        for (std::size_t i = 0; i < n; ++i)
            res.inertia += sq_dist(points.row(i), res.centroids.row(res.assignments[i]));
        return res;
    }
    throw std::runtime_error("kmeans2: could not seed two distinct clusters after 5 attempts "
                             "(points may all be identical)");
}

double cluster_accuracy(const std::vector<int>& assignments, const std::vector<int>& labels) {
    if (assignments.size() != labels.size())
        throw std::invalid_argument("cluster_accuracy: length mismatch");
    if (assignments.empty()) throw std::invalid_argument("cluster_accuracy: empty input");
    std::size_t match = 0;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if ((assignments[i] != 0) == (labels[i] != 0)) ++match;
    const double frac = static_cast<double>(std::max(match, assignments.size() - match)) /
                        static_cast<double>(assignments.size());
    return frac * 100.0;
}

SvmModel svm_fit(const Matrix& points, const std::vector<int>& labels, double c, double gamma) {
    const std::size_t n = points.rows();
    if (labels.size() != n) throw std::invalid_argument("svm_fit: label count mismatch");
    if (c <= 0.0 || gamma <= 0.0) throw std::invalid_argument("svm_fit: C and gamma must be positive");
    bool has_pos = false, has_neg = false;
    for (int y : labels) {
        if (y == 1) has_pos = true;
        else if (y == -1) has_neg = true;
        else throw std::invalid_argument("svm_fit: labels must be +1 or -1");
    }
    if (!has_pos || !has_neg) throw std::invalid_argument("svm_fit: both classes must be present");

    // Dense kernel cache; the implicit-bias term sets are small.
    Matrix kernel(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        kernel(i, i) = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double k = std::exp(-gamma * sq_dist(points.row(i), points.row(j)));
            kernel(i, j) = k;
            kernel(j, i) = k;
        }
    }

    std::vector<double> alpha(n, 0.0);
    std::vector<double> g(n, 0.0); // g_i = sum_t alpha_t y_t K_it
    const std::vector<int>& y = labels;

    constexpr double kTol = 1e-3;
    const std::size_t max_updates = std::max<std::size_t>(10000, 1000 * n);
    bool converged = false;

    // Exact violation ties (guaranteed at initialization) are broken by the
    // point coordinates, not the index, so the optimization trajectory does
    // not depend on the order training points were supplied in.
    auto point_less = [&](std::size_t a, std::size_t b) {
        for (std::size_t jcol = 0; jcol < points.cols(); ++jcol) {
            if (points(a, jcol) != points(b, jcol)) return points(a, jcol) < points(b, jcol);
        }
        return false;
    };

    for (std::size_t update = 0; update < max_updates; ++update) {
        // Most-violating pair on y_i - g_i over the feasible index sets.
        double up_best = -std::numeric_limits<double>::infinity();
        double low_best = std::numeric_limits<double>::infinity();
        std::size_t i_up = n, i_low = n;
        for (std::size_t t = 0; t < n; ++t) {
            const double v = static_cast<double>(y[t]) - g[t];
            const bool in_up = (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0);
            const bool in_low = (y[t] == -1 && alpha[t] < c) || (y[t] == 1 && alpha[t] > 0.0);
            if (in_up && (v > up_best || (v == up_best && i_up != n && point_less(t, i_up)))) {
                up_best = v;
                i_up = t;
            }
            if (in_low && (v < low_best || (v == low_best && i_low != n && point_less(t, i_low)))) {
                low_best = v;
                i_low = t;
            }
        }
        if (i_up == n || i_low == n || up_best - low_best < kTol) {
            converged = true; // no violating pair left
            break;
        }
        const std::size_t i = i_up, j = i_low;
        const double eta = kernel(i, i) + kernel(j, j) - 2.0 * kernel(i, j);
        if (eta < 1e-12) {
            // Degenerate pair (duplicate points); nudging is impossible, stop.
            converged = false;
            break;
        }
        // Two-variable solve in Platt's form; b cancels in E_i - E_j.
        const double ei = g[i] - static_cast<double>(y[i]);
        const double ej = g[j] - static_cast<double>(y[j]);
        double lo, hi;
        const double ai_old = alpha[i], aj_old = alpha[j];
        if (y[i] != y[j]) {
            lo = std::max(0.0, aj_old - ai_old);
            hi = std::min(c, c + aj_old - ai_old);
        } else {
            lo = std::max(0.0, ai_old + aj_old - c);
            hi = std::min(c, ai_old + aj_old);
        }
        double aj = aj_old + static_cast<double>(y[j]) * (ei - ej) / eta;
        aj = std::clamp(aj, lo, hi);
        const double ai = ai_old + static_cast<double>(y[i] * y[j]) * (aj_old - aj);
        if (std::abs(aj - aj_old) < 1e-14) {
            converged = up_best - low_best < kTol;
            break; // no usable progress
        }
        alpha[i] = ai;
        alpha[j] = aj;
        const double di = static_cast<double>(y[i]) * (ai - ai_old);
        const double dj = static_cast<double>(y[j]) * (aj - aj_old);
        for (std::size_t t = 0; t < n; ++t) g[t] += di * kernel(i, t) + dj * kernel(j, t);
    }

    // Bias from free support vectors, or the violation midpoint if none.
    double b = 0.0;
    std::size_t free_count = 0;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 1e-12 && alpha[t] < c - 1e-12) {
            b += static_cast<double>(y[t]) - g[t];
            ++free_count;
        }
    }
    if (free_count > 0) {
        b /= static_cast<double>(free_count);
    } else {
        double up_best = -std::numeric_limits<double>::infinity();
        double low_best = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double v = static_cast<double>(y[t]) - g[t];
            const bool in_up = (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0);
            const bool in_low = (y[t] == -1 && alpha[t] < c) || (y[t] == 1 && alpha[t] > 0.0);
            if (in_up) up_best = std::max(up_best, v);
            if (in_low) low_best = std::min(low_best, v);
        }
        if (std::isfinite(up_best) && std::isfinite(low_best)) b = 0.5 * (up_best + low_best);
    }

    SvmModel model;
    model.gamma = gamma;
    model.c = c;
    model.bias = b;
    model.converged = converged;
    std::vector<std::size_t> sv;
    for (std::size_t t = 0; t < n; ++t)
        if (alpha[t] > 1e-12) sv.push_back(t);
    model.support_vectors = Matrix(sv.size(), points.cols());
    model.dual_coefs.resize(sv.size());
    for (std::size_t s = 0; s < sv.size(); ++s) {
        for (std::size_t jcol = 0; jcol < points.cols(); ++jcol)
            model.support_vectors(s, jcol) = points(sv[s], jcol);
        model.dual_coefs[s] = alpha[sv[s]] * static_cast<double>(y[sv[s]]);
    }
    return model;
}

double svm_decision(const SvmModel& model, std::span<const double> point) {
    double s = model.bias;
    for (std::size_t i = 0; i < model.support_vectors.rows(); ++i)
        s += model.dual_coefs[i] * std::exp(-model.gamma * sq_dist(model.support_vectors.row(i), point));
    return s;
}

int svm_predict(const SvmModel& model, std::span<const double> point) {
    return svm_decision(model, point) >= 0.0 ? 1 : -1;
}

} // namespace debie
