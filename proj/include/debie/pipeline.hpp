#pragma once

#include <string>
#include <variant>
#include <vector>

#include "debie/debias_linear.hpp"
#include "debie/debias_net.hpp"

namespace debie {

using Stage = std::variant<GbddDebiaser, BamDebiaser, DebiasNetwork>;

// Stages are stored in composition-notation order and applied right to
// left: {gbdd, bam} applies bam first, then gbdd. Rows are unit-normalized
// before gbdd and dbn stages (both are defined on unit vectors); bam is a
// plain linear map.
struct DebiasPipeline {
    std::vector<Stage> stages;
};

DebiasPipeline compose(std::vector<Stage> stages);

EmbeddingSpace apply_pipeline(const DebiasPipeline& pipeline, const EmbeddingSpace& space,
                              bool renormalize_output = false);

std::size_t stage_dim(const Stage& stage);
std::string stage_kind(const Stage& stage);

// "gbdd∘bam" or "gbdd,bam" -> {"gbdd", "bam"} (notation order, rightmost
// applied first).
std::vector<std::string> parse_chain(const std::string& text);

} // namespace debie
