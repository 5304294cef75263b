#include "debie/pipeline.hpp"

#include <stdexcept>

namespace debie {

std::size_t stage_dim(const Stage& stage) {
    if (const auto* g = std::get_if<GbddDebiaser>(&stage)) return g->direction.size();
    if (const auto* b = std::get_if<BamDebiaser>(&stage)) return b->map.rows();
    return std::get<DebiasNetwork>(stage).dim();
}

std::string stage_kind(const Stage& stage) {
    if (std::holds_alternative<GbddDebiaser>(stage)) return "gbdd";
    if (std::holds_alternative<BamDebiaser>(stage)) return "bam";
    return "dbn";
}

DebiasPipeline compose(std::vector<Stage> stages) {
    if (stages.empty()) throw std::invalid_argument("compose: empty pipeline");
    const std::size_t d = stage_dim(stages.front());
    for (const auto& s : stages)
        if (stage_dim(s) != d) throw std::invalid_argument("compose: stages disagree on dimension");
    return DebiasPipeline{std::move(stages)};
}

namespace {

// Lenient row normalization for intermediate pipeline stages: zero rows pass
// through (apply_gbdd_space treats them the same way).
EmbeddingSpace unit_rows(const EmbeddingSpace& space) {
    Matrix m = space.matrix();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        auto row = m.row(i);
        const double n = norm2(row);
        if (n < 1e-12) continue;
        for (double& v : row) v /= n;
    }
    return space.with_matrix(std::move(m), false);
}

} // namespace

EmbeddingSpace apply_pipeline(const DebiasPipeline& pipeline, const EmbeddingSpace& space,
                              bool renormalize_output) {
    if (pipeline.stages.empty()) throw std::invalid_argument("apply_pipeline: empty pipeline");
    if (stage_dim(pipeline.stages.front()) != space.dim())
        throw std::invalid_argument("apply_pipeline: dimension mismatch with space");

    EmbeddingSpace current = space;
    for (auto it = pipeline.stages.rbegin(); it != pipeline.stages.rend(); ++it) {
        const bool last = std::next(it) == pipeline.stages.rend();
        const bool renorm_here = last && renormalize_output;
        if (const auto* g = std::get_if<GbddDebiaser>(&*it)) {
            current = apply_gbdd_space(*g, current, renorm_here);
        } else if (const auto* b = std::get_if<BamDebiaser>(&*it)) {
            current = apply_bam(*b, current);
            if (renorm_here) current = normalize(current);
        } else {
            const auto& net = std::get<DebiasNetwork>(*it);
            current = apply_net(net, unit_rows(current));
            if (renorm_here) current = normalize(current);
        }
    }
    return current;
}

std::vector<std::string> parse_chain(const std::string& text) {
    // Accepts both the ring-operator codepoint (UTF-8 e2 88 98) and a comma.
    std::vector<std::string> out;
    std::string token;
    auto flush = [&] {
        std::size_t b = token.find_first_not_of(" \t");
        std::size_t e = token.find_last_not_of(" \t");
        if (b == std::string::npos) throw std::invalid_argument("empty stage in chain: " + text);
        out.push_back(token.substr(b, e - b + 1));
        token.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == ',') {
            flush();
            continue;
        }
        if (i + 2 < text.size() && static_cast<unsigned char>(text[i]) == 0xE2 &&
            static_cast<unsigned char>(text[i + 1]) == 0x88 &&
            static_cast<unsigned char>(text[i + 2]) == 0x98) {
            flush();
            i += 2;
            continue;
        }
        token.push_back(text[i]);
    }
    flush();
    for (const auto& stage : out)
        if (stage != "gbdd" && stage != "bam" && stage != "dbn")
            throw std::invalid_argument("unknown stage '" + stage + "' (expected gbdd, bam, or dbn)");
    return out;
}

} // namespace debie
