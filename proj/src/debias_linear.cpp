#include "debie/debias_linear.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "debie/numerics.hpp"
#include "debie/serialize.hpp"

namespace debie {

using nlohmann::json;

namespace {

struct PairStack {
    std::vector<std::size_t> t1_idx, t2_idx;
    FitInfo info;
};

PairStack resolve_targets(const EmbeddingSpace& space, const BiasSpec& spec) {
    PairStack out;
    out.info.spec_name = spec.name;
    for (const auto& t : spec.t1) {
        if (auto idx = space.index_of(t))
            out.t1_idx.push_back(*idx);
        else
            ++out.info.t1_missing;
    }
    for (const auto& t : spec.t2) {
        if (auto idx = space.index_of(t))
            out.t2_idx.push_back(*idx);
        else
            ++out.info.t2_missing;
    }
    out.info.t1_used = out.t1_idx.size();
    out.info.t2_used = out.t2_idx.size();
    out.info.pairs = out.t1_idx.size() * out.t2_idx.size();
    if (out.info.pairs == 0)
        throw std::runtime_error("no usable target pairs: t1 has " + std::to_string(out.t1_idx.size()) +
                                 " and t2 has " + std::to_string(out.t2_idx.size()) +
                                 " in-vocabulary terms");
    return out;
}

json fit_info_to_json(const FitInfo& info) {
    return json{{"spec", info.spec_name}, {"t1_used", info.t1_used},       {"t2_used", info.t2_used},
                {"t1_missing", info.t1_missing}, {"t2_missing", info.t2_missing}, {"pairs", info.pairs}};
}

FitInfo fit_info_from_json(const json& j) {
    FitInfo info;
    info.spec_name = j.value("spec", "");
    info.t1_used = j.value("t1_used", 0u);
    info.t2_used = j.value("t2_used", 0u);
    info.t1_missing = j.value("t1_missing", 0u);
    info.t2_missing = j.value("t2_missing", 0u);
    info.pairs = j.value("pairs", 0u);
    return info;
}

} // namespace

GbddDebiaser fit_gbdd(const EmbeddingSpace& space, const BiasSpec& spec) {
    if (!space.normalized()) throw std::invalid_argument("fit_gbdd: space must be normalized");
    PairStack pairs = resolve_targets(space, spec);
    const std::size_t d = space.dim();

    Matrix b(pairs.info.pairs, d);
    std::size_t row = 0;
    bool any_nonzero = false;
    for (std::size_t i : pairs.t1_idx) {
        auto vi = space.vector_at(i);
        for (std::size_t j : pairs.t2_idx) {
            auto vj = space.vector_at(j);
            for (std::size_t c = 0; c < d; ++c) {
                const double diff = vi[c] - vj[c];
                b(row, c) = diff;
                if (diff != 0.0) any_nonzero = true;
            }
            ++row;
        }
    }
    if (!any_nonzero)
        throw std::runtime_error("fit_gbdd: all difference vectors are zero (t1 and t2 vectors identical)");

    TopSingularResult top = top_right_singular_vector(b);
    GbddDebiaser deb;
    deb.direction = std::move(top.vec);
    deb.fitted_on = pairs.info;
    deb.degenerate = top.degenerate;
    return deb;
}

std::vector<double> apply_gbdd(const GbddDebiaser& deb, std::span<const double> x) {
    if (x.size() != deb.direction.size()) throw std::invalid_argument("apply_gbdd: dimension mismatch");
    const double proj = dot(x, deb.direction);
    std::vector<double> out(x.begin(), x.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= proj * deb.direction[i];
    return out;
}

EmbeddingSpace apply_gbdd_space(const GbddDebiaser& deb, const EmbeddingSpace& space, bool renormalize) {
    if (space.dim() != deb.direction.size())
        throw std::invalid_argument("apply_gbdd_space: dimension mismatch");
    Matrix out(space.size(), space.dim());
    for (std::size_t r = 0; r < space.size(); ++r) {
        auto x = space.vector_at(r);
        double n = norm2(x);
        if (n < 1e-12) continue; // zero row passes through as zero
        double proj = 0.0;
        for (std::size_t c = 0; c < space.dim(); ++c) proj += (x[c] / n) * deb.direction[c];
        auto orow = out.row(r);
        for (std::size_t c = 0; c < space.dim(); ++c) orow[c] = x[c] / n - proj * deb.direction[c];
        if (renormalize) {
            const double on = norm2(orow);
            if (on > 1e-12)
                for (double& v : orow) v /= on;
        }
    }
    return space.with_matrix(std::move(out), false);
}

BamDebiaser fit_bam(const EmbeddingSpace& space, const BiasSpec& spec) {
    if (!space.normalized()) throw std::invalid_argument("fit_bam: space must be normalized");
    PairStack pairs = resolve_targets(space, spec);
    const std::size_t d = space.dim();

    // Positional pairing (i-th with i-th, longer set truncated). Stacking
    // the full cross product collapses the cross matrix to the rank-1
    // centroid outer product, leaving W arbitrary off the centroid
    // direction; positional pairs keep the alignment problem full rank.
    const std::size_t pair_count = std::min(pairs.t1_idx.size(), pairs.t2_idx.size());
    pairs.info.pairs = pair_count;
    Matrix x1(pair_count, d), x2(pair_count, d);
    for (std::size_t r = 0; r < pair_count; ++r) {
        auto vi = space.vector_at(pairs.t1_idx[r]);
        auto vj = space.vector_at(pairs.t2_idx[r]);
        for (std::size_t c = 0; c < d; ++c) {
            x1(r, c) = vi[c];
            x2(r, c) = vj[c];
        }
    }
    BamDebiaser deb;
    deb.map = procrustes(x1, x2);
    deb.fitted_on = pairs.info;
    return deb;
}

EmbeddingSpace apply_bam(const BamDebiaser& deb, const EmbeddingSpace& space) {
    if (space.dim() != deb.map.rows()) throw std::invalid_argument("apply_bam: dimension mismatch");
    Matrix projected = matmul(space.matrix(), deb.map);
    Matrix out(space.size(), space.dim());
    for (std::size_t i = 0; i < space.size(); ++i)
        for (std::size_t j = 0; j < space.dim(); ++j)
            out(i, j) = 0.5 * (space.matrix()(i, j) + projected(i, j));
    return space.with_matrix(std::move(out), false);
}

std::string write_transform(const LinearDebiaser& deb) {
    json j;
    if (const auto* g = std::get_if<GbddDebiaser>(&deb)) {
        j["kind"] = "gbdd";
        j["dim"] = g->direction.size();
        j["fitted_on"] = fit_info_to_json(g->fitted_on);
        j["degenerate"] = g->degenerate;
        j["payload_hex"] = doubles_to_hex(g->direction);
    } else {
        const auto& b = std::get<BamDebiaser>(deb);
        j["kind"] = "bam";
        j["dim"] = b.map.rows();
        j["fitted_on"] = fit_info_to_json(b.fitted_on);
        j["payload_hex"] = doubles_to_hex(std::span<const double>(b.map.data(), b.map.rows() * b.map.cols()));
    }
    return j.dump(2) + "\n";
}

LinearDebiaser read_transform(const std::string& json_text) {
    json j = json::parse(json_text);
    const std::string kind = j.at("kind").get<std::string>();
    const std::size_t dim = j.at("dim").get<std::size_t>();
    std::vector<double> payload = hex_to_doubles(j.at("payload_hex").get<std::string>());
    if (kind == "gbdd") {
        if (payload.size() != dim) throw std::runtime_error("gbdd payload size mismatch");
        GbddDebiaser g;
        g.direction = std::move(payload);
        g.fitted_on = fit_info_from_json(j.value("fitted_on", json::object()));
        g.degenerate = j.value("degenerate", false);
        const double n = norm2(g.direction);
        if (std::abs(n - 1.0) > 1e-9)
            throw std::runtime_error("gbdd direction is not unit length: " + std::to_string(n));
        return g;
    }
    if (kind == "bam") {
        if (payload.size() != dim * dim) throw std::runtime_error("bam payload size mismatch");
        BamDebiaser b;
        b.map = Matrix(dim, dim);
        std::copy(payload.begin(), payload.end(), b.map.data());
        b.fitted_on = fit_info_from_json(j.value("fitted_on", json::object()));
        Matrix gram = matmul(transpose(b.map), b.map);
        if (max_abs_diff(gram, Matrix::identity(dim)) > 1e-8)
            throw std::runtime_error("bam map is not orthogonal");
        return b;
    }
    throw std::runtime_error("unknown transform kind: " + kind);
}

std::size_t debiaser_dim(const LinearDebiaser& deb) {
    if (const auto* g = std::get_if<GbddDebiaser>(&deb)) return g->direction.size();
    return std::get<BamDebiaser>(deb).map.rows();
}

} // namespace debie
