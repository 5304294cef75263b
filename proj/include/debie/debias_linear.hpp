#pragma once

#include <string>
#include <variant>
#include <vector>

#include "debie/bias_spec.hpp"
#include "debie/embedding.hpp"
#include "debie/matrix.hpp"

namespace debie {

struct FitInfo {
    std::string spec_name;
    std::size_t t1_used = 0, t2_used = 0;
    std::size_t t1_missing = 0, t2_missing = 0;
    std::size_t pairs = 0;
};

// Projection removal of one global direction: x' = x - <x,b> b.
struct GbddDebiaser {
    std::vector<double> direction; // unit length
    FitInfo fitted_on;
    bool degenerate = false; // top singular pair was (near-)tied when fitted
};

// Orthogonal self-map alignment: X' = (X + X W) / 2.
struct BamDebiaser {
    Matrix map; // d x d orthogonal
    FitInfo fitted_on;
};

using LinearDebiaser = std::variant<GbddDebiaser, BamDebiaser>;

// Stacks difference vectors for every in-vocabulary cross pair
// (t1_i, t2_j) and takes the dominant right singular direction.
// The space must be normalized. Throws when no usable pair exists or
// when all difference rows are zero.
GbddDebiaser fit_gbdd(const EmbeddingSpace& space, const BiasSpec& spec);

std::vector<double> apply_gbdd(const GbddDebiaser& deb, std::span<const double> x);

// Row-wise application to a whole space. Rows are unit-normalized before
// projecting (the transform is defined on unit vectors); output rows are
// left unnormalized unless renormalize is set.
EmbeddingSpace apply_gbdd_space(const GbddDebiaser& deb, const EmbeddingSpace& space,
                                bool renormalize = false);

// Procrustes-aligns the stacked cross-pair target matrices; same pairing
// and OOV handling as fit_gbdd.
BamDebiaser fit_bam(const EmbeddingSpace& space, const BiasSpec& spec);

EmbeddingSpace apply_bam(const BamDebiaser& deb, const EmbeddingSpace& space);

// Transform files: JSON with a hex-encoded float payload; round-trips are
// bit-exact.
std::string write_transform(const LinearDebiaser& deb);
LinearDebiaser read_transform(const std::string& json_text);

std::size_t debiaser_dim(const LinearDebiaser& deb);

} // namespace debie
