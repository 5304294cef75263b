#include "debie/xling.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "debie/numerics.hpp"

namespace debie {

TranslationDictionary load_dictionary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dictionary: " + path.string());
    TranslationDictionary dict;
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string src, tgt, extra;
        if (!(ss >> src >> tgt))
            throw std::runtime_error("dictionary line " + std::to_string(line_no) + ": expected two columns");
        if (ss >> extra)
            throw std::runtime_error("dictionary line " + std::to_string(line_no) + ": more than two columns");
        if (!seen.insert({src, tgt}).second) {
            ++dict.duplicates_dropped;
            continue;
        }
        dict.pairs.emplace_back(std::move(src), std::move(tgt));
    }
    if (dict.pairs.empty()) throw std::runtime_error("dictionary has no pairs: " + path.string());
    return dict;
}

ProjectionFit fit_projection(const EmbeddingSpace& src_space, const EmbeddingSpace& tgt_space,
                             const TranslationDictionary& dict) {
    if (src_space.dim() != tgt_space.dim())
        throw std::invalid_argument("fit_projection: spaces disagree on dimension");
    if (dict.pairs.empty()) throw std::invalid_argument("fit_projection: empty dictionary");
    const std::size_t d = src_space.dim();

    std::vector<std::pair<std::size_t, std::size_t>> rows; // (src idx, tgt idx)
    for (const auto& [src, tgt] : dict.pairs) {
        const auto si = src_space.index_of(src);
        const auto ti = tgt_space.index_of(tgt);
        if (si && ti) rows.emplace_back(*si, *ti);
    }
    ProjectionFit fit;
    fit.pairs_used = rows.size();
    fit.pairs_dropped = dict.pairs.size() - rows.size();
    if (rows.empty()) throw std::runtime_error("fit_projection: no usable pairs after vocabulary filtering");
    fit.low_coverage = rows.size() < 100;

    // Unit-normalize the paired vectors; solve tgt -> src.
    Matrix xs(rows.size(), d), xt(rows.size(), d);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        auto svec = src_space.vector_at(rows[r].first);
        auto tvec = tgt_space.vector_at(rows[r].second);
        const double sn = norm2(svec), tn = norm2(tvec);
        if (sn < 1e-12 || tn < 1e-12)
            throw std::runtime_error("fit_projection: zero vector in a dictionary pair");
        for (std::size_t c = 0; c < d; ++c) {
            xt(r, c) = tvec[c] / tn;
            xs(r, c) = svec[c] / sn;
        }
    }
    fit.w = procrustes(xt, xs);
    return fit;
}

EmbeddingSpace transfer_debias(const EmbeddingSpace& tgt_space, const Matrix& w,
                               const DebiasPipeline& pipeline, bool renormalize_output) {
    if (w.rows() != tgt_space.dim() || w.cols() != tgt_space.dim())
        throw std::invalid_argument("transfer_debias: projection shape mismatch");
    EmbeddingSpace projected = tgt_space.with_matrix(matmul(tgt_space.matrix(), w),
                                                     /*normalized=*/false);
    if (pipeline.stages.empty())
        return renormalize_output ? normalize(projected) : projected;
    return apply_pipeline(pipeline, projected, renormalize_output);
}

} // namespace debie
