#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "debie/matrix.hpp"

namespace debie {

enum class VectorFormat { auto_detect, word2vec_text, glove_text };

struct LoadReport {
    std::size_t lines = 0;      // non-blank body lines parsed
    std::size_t duplicates = 0; // dropped (first occurrence kept)
    VectorFormat detected = VectorFormat::auto_detect;
};

// Immutable vocabulary-indexed dense vector space. One row per word; rows
// are unit length iff normalized() is true. Default-constructed spaces are
// empty placeholders.
class EmbeddingSpace {
public:
    EmbeddingSpace() = default;

    static EmbeddingSpace load(const std::filesystem::path& path,
                               VectorFormat hint = VectorFormat::auto_detect,
                               LoadReport* report = nullptr);

    static EmbeddingSpace from_data(std::vector<std::string> vocab, Matrix vectors,
                                    bool normalized = false);

    // word2vec_text writes the "<count> <dim>" header; glove_text is headerless.
    // Floats are emitted with shortest round-trip precision, so a save/load
    // cycle reproduces vectors bit-exactly.
    void save(const std::filesystem::path& path, VectorFormat format) const;

    std::size_t size() const { return vocab_.size(); }
    std::size_t dim() const { return vectors_.cols(); }
    bool normalized() const { return normalized_; }
    const std::vector<std::string>& vocab() const { return vocab_; }
    const Matrix& matrix() const { return vectors_; }

    std::optional<std::size_t> index_of(std::string_view word) const;
    // Exact match first, then the lowercased form when fallback is requested.
    std::optional<std::size_t> index_of(std::string_view word, bool lowercase_fallback) const;
    std::span<const double> vector_at(std::size_t idx) const { return vectors_.row(idx); }
    std::optional<std::span<const double>> lookup(std::string_view word) const;

    // Cosine of stored rows (uses the unit-norm fast path when normalized).
    double row_cosine(std::size_t i, std::size_t j) const;

    // Top-k most cosine-similar words, query excluded, ties broken by
    // vocabulary index ascending. k is capped at size()-1.
    std::vector<std::pair<std::string, double>> neighbors(std::string_view word, std::size_t k) const;

    // Replaces the coordinate matrix, keeping the vocabulary. Shape-checked.
    EmbeddingSpace with_matrix(Matrix vectors, bool normalized) const;

private:
    std::vector<std::string> vocab_;
    std::unordered_map<std::string, std::size_t> index_;
    Matrix vectors_;
    bool normalized_ = false;
};

// Unit-normalizes every row. Throws naming the offending word if a row has
// zero norm.
EmbeddingSpace normalize(const EmbeddingSpace& space);

std::string lowercase_ascii(std::string_view s);

} // namespace debie
