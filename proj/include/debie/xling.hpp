#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "debie/embedding.hpp"
#include "debie/matrix.hpp"
#include "debie/pipeline.hpp"

namespace debie {

struct TranslationDictionary {
    std::vector<std::pair<std::string, std::string>> pairs; // (source, target)
    std::size_t duplicates_dropped = 0;
};

// Two-column TSV, one pair per line; exact duplicate pairs are dropped
// keeping the first. A source word may map to several targets.
TranslationDictionary load_dictionary(const std::filesystem::path& path);

struct ProjectionFit {
    Matrix w;                       // d x d orthogonal, maps target rows into the source space
    std::size_t pairs_used = 0;
    std::size_t pairs_dropped = 0; // either side out of vocabulary
    bool low_coverage = false;     // fewer than 100 usable pairs
};

// Procrustes fit on the dictionary pairs. Paired vectors are unit-normalized
// before the solve; the spaces themselves are left untouched.
ProjectionFit fit_projection(const EmbeddingSpace& src_space, const EmbeddingSpace& tgt_space,
                             const TranslationDictionary& dict);

// Projects every target row through w, then applies the source-fitted
// pipeline (empty pipeline = plain projection).
EmbeddingSpace transfer_debias(const EmbeddingSpace& tgt_space, const Matrix& w,
                               const DebiasPipeline& pipeline, bool renormalize_output = false);

} // namespace debie
