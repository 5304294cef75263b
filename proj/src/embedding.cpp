#include "debie/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace debie {

namespace {

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool is_blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

// Splits off the leading token (the word); returns the remainder pointer.
std::string_view first_token(std::string_view line, std::size_t& after) {
    std::size_t start = 0;
    while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) ++start;
    std::size_t end = start;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    after = end;
    return line.substr(start, end - start);
}

bool parse_floats(std::string_view text, std::vector<double>& out) {
    out.clear();
    const char* p = text.data();
    const char* const last = text.data() + text.size();
    while (p < last) {
        while (p < last && (*p == ' ' || *p == '\t')) ++p;
        if (p >= last) break;
        double value = 0.0;
        auto [next, ec] = std::from_chars(p, last, value);
        if (ec != std::errc() || next == p) return false;
        out.push_back(value);
        p = next;
    }
    return true;
}

bool parse_size(std::string_view tok, std::size_t& out) {
    if (tok.empty()) return false;
    auto [next, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && next == tok.data() + tok.size();
}

void append_double(std::string& buf, double v) {
    char tmp[64];
    auto [end, ec] = std::to_chars(tmp, tmp + sizeof(tmp), v);
    if (ec != std::errc()) throw std::runtime_error("float formatting failed");
    buf.append(tmp, end);
}

} // namespace

std::string lowercase_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

EmbeddingSpace EmbeddingSpace::load(const std::filesystem::path& path, VectorFormat hint,
                                    LoadReport* report) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vector file: " + path.string());

    std::string line;
    std::size_t line_no = 0;
    bool first_content = true;
    bool has_header = false;
    std::size_t header_count = 0, header_dim = 0;

    EmbeddingSpace space;
    std::size_t dim = 0, duplicates = 0, body_lines = 0;
    std::vector<double> row;
    std::vector<double> staging;

    while (std::getline(in, line)) {
        ++line_no;
        strip_cr(line);
        if (is_blank(line)) continue;

        if (first_content) {
            first_content = false;
            // Header sniffing: a first line of exactly two unsigned integers.
            std::size_t after = 0;
            std::string_view tok1 = first_token(line, after);
            std::size_t after2 = 0;
            std::string_view rest(line.data() + after, line.size() - after);
            std::string_view tok2 = first_token(rest, after2);
            std::string_view tail(rest.data() + after2, rest.size() - after2);
            const bool two_ints = parse_size(tok1, header_count) && parse_size(tok2, header_dim) &&
                                  is_blank(std::string(tail));
            switch (hint) {
                case VectorFormat::word2vec_text:
                    if (!two_ints)
                        throw std::runtime_error("word2vec_text: first line is not '<count> <dim>'");
                    has_header = true;
                    break;
                case VectorFormat::glove_text:
                    has_header = false;
                    break;
                case VectorFormat::auto_detect:
                    has_header = two_ints;
                    break;
            }
            if (has_header) {
                if (header_dim == 0) throw std::runtime_error("header declares dim 0");
                continue; // header consumed
            }
        }

        ++body_lines;
        std::size_t after = 0;
        std::string_view word = first_token(line, after);
        if (word.empty()) throw std::runtime_error("missing word on line " + std::to_string(line_no));
        if (!parse_floats(std::string_view(line).substr(after), row))
            throw std::runtime_error("unparsable float on line " + std::to_string(line_no));
        if (dim == 0) {
            dim = row.size();
            if (dim == 0) throw std::runtime_error("zero-dimensional vector on line " + std::to_string(line_no));
            if (has_header && dim != header_dim)
                throw std::runtime_error("header dim " + std::to_string(header_dim) +
                                         " does not match vector width " + std::to_string(dim));
        } else if (row.size() != dim) {
            throw std::runtime_error("inconsistent dimensionality on line " + std::to_string(line_no) +
                                     ": got " + std::to_string(row.size()) + ", expected " + std::to_string(dim));
        }
        for (double v : row)
            if (!std::isfinite(v)) throw std::runtime_error("non-finite value on line " + std::to_string(line_no));

        auto [it, inserted] = space.index_.try_emplace(std::string(word), space.vocab_.size());
        if (!inserted) {
            ++duplicates; // first occurrence wins
            continue;
        }
        space.vocab_.emplace_back(word);
        staging.insert(staging.end(), row.begin(), row.end());
    }

    if (first_content) throw std::runtime_error("empty vector file: " + path.string());
    if (body_lines == 0) throw std::runtime_error("vector file has a header but no vectors");
    if (has_header && body_lines != header_count) {
        std::ostringstream msg;
        msg << "header count " << header_count << " does not match " << body_lines << " body lines";
        throw std::runtime_error(msg.str());
    }

    Matrix m(space.vocab_.size(), dim);
    std::copy(staging.begin(), staging.end(), m.data());
    space.vectors_ = std::move(m);
    space.normalized_ = false;

    if (report) {
        report->lines = body_lines;
        report->duplicates = duplicates;
        report->detected = has_header ? VectorFormat::word2vec_text : VectorFormat::glove_text;
    }
    return space;
}

EmbeddingSpace EmbeddingSpace::from_data(std::vector<std::string> vocab, Matrix vectors, bool normalized) {
    if (vocab.size() != vectors.rows()) throw std::invalid_argument("vocab/matrix row mismatch");
    if (!vectors.empty() && vectors.cols() == 0) throw std::invalid_argument("zero-dimensional vectors");
    if (!vectors.all_finite()) throw std::invalid_argument("non-finite vector entries");
    EmbeddingSpace s;
    s.index_.reserve(vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        auto [it, inserted] = s.index_.try_emplace(vocab[i], i);
        if (!inserted) throw std::invalid_argument("duplicate word in vocabulary: " + vocab[i]);
    }
    if (normalized) {
        for (std::size_t i = 0; i < vectors.rows(); ++i) {
            const double n = norm2(vectors.row(i));
            if (std::abs(n - 1.0) > 1e-6)
                throw std::invalid_argument("normalized flag set but row for '" + vocab[i] + "' has norm " +
                                            std::to_string(n));
        }
    }
    s.vocab_ = std::move(vocab);
    s.vectors_ = std::move(vectors);
    s.normalized_ = normalized;
    return s;
}

void EmbeddingSpace::save(const std::filesystem::path& path, VectorFormat format) const {
    if (format == VectorFormat::auto_detect) format = VectorFormat::word2vec_text;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write vector file: " + path.string());
    std::string buf;
    if (format == VectorFormat::word2vec_text) {
        buf += std::to_string(size());
        buf += ' ';
        buf += std::to_string(dim());
        buf += '\n';
    }
    for (std::size_t i = 0; i < size(); ++i) {
        buf += vocab_[i];
        for (double v : vectors_.row(i)) {
            buf += ' ';
            append_double(buf, v);
        }
        buf += '\n';
        if (buf.size() > (1u << 20)) {
            out << buf;
            buf.clear();
        }
    }
    out << buf;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::optional<std::size_t> EmbeddingSpace::index_of(std::string_view word) const {
    auto it = index_.find(std::string(word));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> EmbeddingSpace::index_of(std::string_view word, bool lowercase_fallback) const {
    if (auto idx = index_of(word)) return idx;
    if (lowercase_fallback) {
        const std::string lower = lowercase_ascii(word);
        if (lower != word) return index_of(lower);
    }
    return std::nullopt;
}

std::optional<std::span<const double>> EmbeddingSpace::lookup(std::string_view word) const {
    auto idx = index_of(word);
    if (!idx) return std::nullopt;
    return vectors_.row(*idx);
}

double EmbeddingSpace::row_cosine(std::size_t i, std::size_t j) const {
    if (normalized_) return dot(vectors_.row(i), vectors_.row(j));
    return cosine(vectors_.row(i), vectors_.row(j));
}

std::vector<std::pair<std::string, double>> EmbeddingSpace::neighbors(std::string_view word,
                                                                      std::size_t k) const {
    if (k < 1) throw std::invalid_argument("neighbors: k must be >= 1");
    auto idx = index_of(word);
    if (!idx) throw std::runtime_error("neighbors: word not in vocabulary: " + std::string(word));
    std::vector<std::size_t> order;
    order.reserve(size() - 1);
    std::vector<double> sims(size());
    for (std::size_t i = 0; i < size(); ++i) {
        if (i == *idx) continue;
        sims[i] = row_cosine(*idx, i);
        order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (sims[a] != sims[b]) return sims[a] > sims[b];
        return a < b;
    });
    if (k < order.size()) order.resize(k);
    std::vector<std::pair<std::string, double>> out;
    out.reserve(order.size());
    for (std::size_t i : order) out.emplace_back(vocab_[i], sims[i]);
    return out;
}

EmbeddingSpace EmbeddingSpace::with_matrix(Matrix vectors, bool normalized) const {
    if (vectors.rows() != size() || vectors.cols() != dim())
        throw std::invalid_argument("with_matrix: shape mismatch");
    return from_data(vocab_, std::move(vectors), normalized);
}

EmbeddingSpace normalize(const EmbeddingSpace& space) {
    Matrix m = space.matrix();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto row = m.row(i);
        const double n = norm2(row);
        if (n < 1e-12)
            throw std::runtime_error("normalize: zero-norm vector for word '" + space.vocab()[i] + "'");
        for (double& v : row) v /= n;
    }
    return space.with_matrix(std::move(m), true);
}

} // namespace debie
