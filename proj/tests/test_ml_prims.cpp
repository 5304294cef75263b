#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "debie/ml_prims.hpp"

using namespace debie;

namespace {

Matrix two_blobs(std::size_t per_blob, double gap, double sigma, std::mt19937_64& rng,
                 std::vector<int>* labels = nullptr) {
    std::normal_distribution<double> noise(0.0, sigma);
    Matrix m(2 * per_blob, 2);
    for (std::size_t i = 0; i < 2 * per_blob; ++i) {
        const int blob = i < per_blob ? 0 : 1;
        m(i, 0) = (blob == 0 ? -gap / 2 : gap / 2) + noise(rng);
        m(i, 1) = noise(rng);
        if (labels) labels->push_back(blob);
    }
    return m;
}

} // namespace

TEST_CASE("kmeans separates well-separated blobs exactly") {
    std::mt19937_64 rng(301);
    std::vector<int> labels;
    Matrix pts = two_blobs(20, 10.0, 0.2, rng, &labels);
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 42ull}) {
        auto res = kmeans2(pts, seed);
        CHECK(cluster_accuracy(res.assignments, labels) == 100.0);
    }
}

TEST_CASE("kmeans on square corners reaches the analytic optimum inertia") {
    // Unit square: any 2-cluster split into opposite edges has inertia
    // 4 * (1/2)^2 = 1.0; diagonal splits cost 2.0. Lloyd converges to an
    // edge split from any seeding.
    Matrix pts(4, 2);
    pts(0, 0) = 0;
    pts(0, 1) = 0;
    pts(1, 0) = 1;
    pts(1, 1) = 0;
    pts(2, 0) = 0;
    pts(2, 1) = 1;
    pts(3, 0) = 1;
    pts(3, 1) = 1;
    // Oracle: enumerate all 2^4 assignments, keep the best balanced cost.
    double best = 1e300;
    for (int mask = 1; mask < 15; ++mask) {
        double cx[2] = {0, 0}, cy[2] = {0, 0};
        int cnt[2] = {0, 0};
        for (int i = 0; i < 4; ++i) {
            const int c = (mask >> i) & 1;
            cx[c] += pts(i, 0);
            cy[c] += pts(i, 1);
            cnt[c]++;
        }
        if (!cnt[0] || !cnt[1]) continue;
        for (int c = 0; c < 2; ++c) {
            cx[c] /= cnt[c];
            cy[c] /= cnt[c];
        }
        double cost = 0;
        for (int i = 0; i < 4; ++i) {
            const int c = (mask >> i) & 1;
            cost += (pts(i, 0) - cx[c]) * (pts(i, 0) - cx[c]) + (pts(i, 1) - cy[c]) * (pts(i, 1) - cy[c]);
        }
        best = std::min(best, cost);
    }
    CHECK(best == doctest::Approx(1.0));
    // A single seeded run can settle in the 3-1 diagonal-split fixpoint
    // (inertia 4/3), so check every run lands on a valid fixpoint at or
    // above the optimum, and that the optimum is reached across seeds.
    double best_seen = 1e300;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto res = kmeans2(pts, seed);
        CHECK(res.inertia >= best - 1e-12);
        best_seen = std::min(best_seen, res.inertia);
    }
    CHECK(best_seen == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("kmeans on a single blob scores near chance against arbitrary labels") {
    std::mt19937_64 rng(307);
    std::normal_distribution<double> noise(0.0, 1.0);
    const std::size_t n = 200;
    Matrix pts(n, 3);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < 3; ++j) pts(i, j) = noise(rng);
        labels[i] = static_cast<int>(i % 2); // arbitrary labels, no structure
    }
    double acc = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) acc += cluster_accuracy(kmeans2(pts, seed).assignments, labels);
    acc /= 20.0;
    CHECK(acc >= 50.0);
    CHECK(acc < 62.0);
}

TEST_CASE("kmeans assigns every point to its nearest centroid") {
    std::mt19937_64 rng(311);
    std::vector<int> labels;
    Matrix pts = two_blobs(15, 3.0, 1.0, rng, &labels);
    auto res = kmeans2(pts, 9);
    for (std::size_t i = 0; i < pts.rows(); ++i) {
        const double d_own = euclidean(pts.row(i), res.centroids.row(res.assignments[i]));
        const double d_other = euclidean(pts.row(i), res.centroids.row(1 - res.assignments[i]));
        CHECK(d_own <= d_other + 1e-9);
    }
}

TEST_CASE("kmeans inertia is non-increasing in Lloyd iterations (fixpoint check)") {
    // The returned result sits at an assignment fixpoint: reassigning points
    // to the returned centroids changes nothing and recomputing centroids
    // from the assignments cannot raise inertia.
    std::mt19937_64 rng(313);
    std::vector<int> labels;
    Matrix pts = two_blobs(25, 2.0, 1.2, rng, &labels);
    auto res = kmeans2(pts, 4);
    Matrix recomputed(2, pts.cols());
    std::size_t counts[2] = {0, 0};
    for (std::size_t i = 0; i < pts.rows(); ++i) {
        counts[res.assignments[i]]++;
        for (std::size_t j = 0; j < pts.cols(); ++j) recomputed(res.assignments[i], j) += pts(i, j);
    }
    for (int c = 0; c < 2; ++c)
        for (std::size_t j = 0; j < pts.cols(); ++j) recomputed(c, j) /= static_cast<double>(counts[c]);
    double recomputed_inertia = 0.0;
    for (std::size_t i = 0; i < pts.rows(); ++i) {
        const double d = euclidean(pts.row(i), recomputed.row(res.assignments[i]));
        recomputed_inertia += d * d;
    }
    CHECK(recomputed_inertia <= res.inertia + 1e-9);
}

TEST_CASE("kmeans rejects identical points after reseeding") {
    Matrix pts(5, 2);
    for (std::size_t i = 0; i < 5; ++i) {
        pts(i, 0) = 3.0;
        pts(i, 1) = -1.0;
    }
    CHECK_THROWS(kmeans2(pts, 1));
    CHECK_THROWS(kmeans2(Matrix(1, 2), 1));
}

TEST_CASE("cluster_accuracy takes the best of both label mappings") {
    std::vector<int> labels = {0, 0, 1, 1};
    CHECK(cluster_accuracy({0, 0, 1, 1}, labels) == 100.0);
    CHECK(cluster_accuracy({1, 1, 0, 0}, labels) == 100.0);
    CHECK(cluster_accuracy({0, 1, 0, 1}, labels) == 50.0);
    CHECK(cluster_accuracy({0, 0, 1, 1}, labels) ==
          cluster_accuracy({1, 1, 0, 0}, labels));
    CHECK_THROWS(cluster_accuracy({0, 1}, {0, 1, 1}));
}

TEST_CASE("random assignments on 1000 points land near 50") {
    std::mt19937_64 rng(317);
    std::vector<int> labels(1000), assign(1000);
    std::uniform_int_distribution<int> coin(0, 1);
    for (std::size_t i = 0; i < 1000; ++i) {
        labels[i] = coin(rng);
        assign[i] = coin(rng);
    }
    const double acc = cluster_accuracy(assign, labels);
    CHECK(acc >= 50.0);
    CHECK(acc <= 54.0); // 50 + 4 binomial bound
}

TEST_CASE("svm separates a trivially separable two-point problem") {
    Matrix pts(2, 2);
    pts(0, 0) = -1.0;
    pts(1, 0) = 1.0;
    auto model = svm_fit(pts, {-1, 1}, 1.0, 0.5);
    CHECK(model.converged);
    CHECK(svm_predict(model, pts.row(0)) == -1);
    CHECK(svm_predict(model, pts.row(1)) == 1);
}

TEST_CASE("rbf svm solves xor") {
    Matrix pts(4, 2);
    pts(0, 0) = 0;
    pts(0, 1) = 0;
    pts(1, 0) = 1;
    pts(1, 1) = 1;
    pts(2, 0) = 0;
    pts(2, 1) = 1;
    pts(3, 0) = 1;
    pts(3, 1) = 0;
    std::vector<int> labels = {1, 1, -1, -1};
    auto model = svm_fit(pts, labels, 10.0, 2.0);
    for (std::size_t i = 0; i < 4; ++i) CHECK(svm_predict(model, pts.row(i)) == labels[i]);
}

TEST_CASE("svm reaches full training accuracy on a linearly separable set") {
    std::mt19937_64 rng(331);
    std::vector<int> labels01;
    Matrix pts = two_blobs(10, 6.0, 0.5, rng, &labels01);
    std::vector<int> labels(pts.rows());
    for (std::size_t i = 0; i < pts.rows(); ++i) labels[i] = labels01[i] == 0 ? -1 : 1;

    // Oracle: the set really is linearly separable by the x-axis threshold.
    for (std::size_t i = 0; i < pts.rows(); ++i)
        CHECK((pts(i, 0) > 0) == (labels[i] == 1));

    auto model = svm_fit(pts, labels, 1.0, 0.5);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pts.rows(); ++i)
        if (svm_predict(model, pts.row(i)) == labels[i]) ++correct;
    CHECK(correct == pts.rows());
}

TEST_CASE("svm decision function is invariant to training-point permutation") {
    std::mt19937_64 rng(337);
    std::vector<int> labels01;
    Matrix pts = two_blobs(12, 3.0, 0.9, rng, &labels01);
    std::vector<int> labels(pts.rows());
    for (std::size_t i = 0; i < pts.rows(); ++i) labels[i] = labels01[i] == 0 ? -1 : 1;

    std::vector<std::size_t> perm(pts.rows());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix shuffled(pts.rows(), 2);
    std::vector<int> shuffled_labels(pts.rows());
    for (std::size_t i = 0; i < pts.rows(); ++i) {
        shuffled(i, 0) = pts(perm[i], 0);
        shuffled(i, 1) = pts(perm[i], 1);
        shuffled_labels[i] = labels[perm[i]];
    }
    auto a = svm_fit(pts, labels, 1.0, 0.7);
    auto b = svm_fit(shuffled, shuffled_labels, 1.0, 0.7);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    for (int probe = 0; probe < 50; ++probe) {
        std::vector<double> x = {unif(rng), unif(rng)};
        CHECK(svm_decision(a, x) == doctest::Approx(svm_decision(b, x)).epsilon(1e-9));
    }
}

TEST_CASE("svm input validation") {
    Matrix pts(2, 2);
    pts(1, 0) = 1.0;
    CHECK_THROWS(svm_fit(pts, {1, 1}, 1.0, 1.0));   // single class
    CHECK_THROWS(svm_fit(pts, {1, -1}, -1.0, 1.0)); // bad C
    CHECK_THROWS(svm_fit(pts, {1, -1}, 1.0, 0.0));  // bad gamma
    CHECK_THROWS(svm_fit(pts, {1, 0}, 1.0, 1.0));   // bad label value
    CHECK_THROWS(svm_fit(pts, {1}, 1.0, 1.0));      // length mismatch
}
