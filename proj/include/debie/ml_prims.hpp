#pragma once

#include <cstdint>
#include <vector>

#include "debie/matrix.hpp"

namespace debie {

struct ClusterResult {
    std::vector<int> assignments; // 0 or 1 per point
    Matrix centroids;             // 2 x d
    double inertia = 0.0;
    int iterations = 0;
    int attempts = 1; // reseeds consumed (empty-cluster recovery)
};

// Two-means with D^2 (kmeans++) seeding and Lloyd iterations until the
// assignment fixpoint or 300 iterations. An attempt that produces an empty
// cluster is retried with fresh seeding, up to 5 attempts.
ClusterResult kmeans2(const Matrix& points, std::uint64_t seed);

// Best label<->cluster matching accuracy on the paper-style 0..100 scale.
double cluster_accuracy(const std::vector<int>& assignments, const std::vector<int>& labels);

struct SvmModel {
    Matrix support_vectors;
    std::vector<double> dual_coefs; // alpha_i * y_i per support vector
    double bias = 0.0;
    double gamma = 0.0;
    double c = 0.0;
    bool converged = true;
};

// RBF-kernel C-SVM trained with SMO on the most-violating pair; stops when
// the max KKT violation drops below 1e-3 or the pass cap is reached (the
// model is then flagged unconverged). Labels are +1/-1.
SvmModel svm_fit(const Matrix& points, const std::vector<int>& labels, double c, double gamma);

double svm_decision(const SvmModel& model, std::span<const double> point);
int svm_predict(const SvmModel& model, std::span<const double> point);

} // namespace debie
