#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "debie/bias_spec.hpp"
#include "debie/embedding.hpp"

namespace debie {

struct TermLookup {
    bool lowercase_fallback = false;
};

struct WeatOptions {
    enum class Permutations { auto_mode, exact, monte_carlo };
    Permutations mode = Permutations::auto_mode;
    std::size_t max_exact = 200000; // bipartition budget for auto mode
    std::size_t samples = 100000;
    std::uint64_t seed = 42;
    TermLookup lookup;
};

struct WeatResult {
    double statistic = 0.0;
    std::optional<double> effect_size; // undefined when the s-values are constant
    double p_value = 1.0;              // one-sided, strict inequality
    bool exact = false;
    std::size_t permutations = 0;
    bool odd_union = false; // |T1 u T2| odd; partition sizes floor/ceil
    std::size_t oov = 0;
    std::size_t n_targets = 0;
};

// Differential association of the target sets against the paired attribute
// sets, with a normalized effect size (population standard deviation) and a
// permutation p-value over equal-size bipartitions of the target union.
WeatResult weat(const EmbeddingSpace& space, const BiasSpec& spec, const WeatOptions& options = {});

struct EctResult {
    std::optional<double> value; // Spearman x100; nullopt when undefined
    std::size_t oov = 0;
    std::size_t attributes_used = 0;
};

// Spearman correlation between the attribute-similarity rankings of the two
// target-set mean vectors. Requires the single-attribute form.
EctResult ect(const EmbeddingSpace& space, const BiasSpec& spec, const TermLookup& lookup = {});

struct BatResult {
    double value = 0.0; // percentage of analogy comparisons won
    std::size_t comparisons = 0;
    std::size_t oov = 0;
};

// Analogy-query ranking test on Euclidean distance; ties count as failures.
BatResult bat(const EmbeddingSpace& space, const BiasSpec& spec, const TermLookup& lookup = {});

struct ImplicitResult {
    double km = 0.0;  // mean clustering accuracy x100
    double svm = 0.0; // mean classification accuracy x100
    std::size_t runs = 0;
    std::size_t test_terms = 0;
    std::size_t train_terms = 0;
    std::size_t test_oov = 0;
    std::size_t train_oov = 0;
    bool svm_converged = true;
};

struct ImplicitOptions {
    std::vector<std::uint64_t> seeds; // one run per seed
    double svm_c = 1.0;
    double svm_gamma = 0.0; // 0 = 1/dim
    TermLookup lookup;
};

// Clusters the initial target terms with kmeans2 and classifies them with an
// RBF SVM trained on the augmentation terms; scores averaged over the runs.
ImplicitResult implicit_tests(const EmbeddingSpace& space, const AugmentedSpec& aug,
                              const ImplicitOptions& options);

std::vector<std::uint64_t> make_seed_list(std::uint64_t base, std::size_t runs);

struct BenchmarkPair {
    std::string w1, w2;
    double gold = 0.0;
};

// Two-word-plus-score files, tab or space separated; a SimLex-style header
// switches the score to its named column.
std::vector<BenchmarkPair> load_benchmark(const std::filesystem::path& path);

struct SemanticQualityResult {
    std::optional<double> value; // Spearman x100
    std::size_t covered = 0;
    std::size_t total = 0;
};

SemanticQualityResult semantic_quality(const EmbeddingSpace& space,
                                       const std::vector<BenchmarkPair>& benchmark,
                                       const TermLookup& lookup = {});

// CSV (word,set,pc1,pc2) of the spec terms' 2d projection.
std::string topology_export_csv(const EmbeddingSpace& space, const BiasSpec& spec,
                                const TermLookup& lookup = {});

} // namespace debie
