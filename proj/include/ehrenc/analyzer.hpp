#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ehrenc/planner.hpp"

namespace ehrenc {

enum class AttentionVariant { Full, Linear };

std::string_view to_string(AttentionVariant a);
AttentionVariant attention_from_string(std::string_view s);

struct CostModel {
    int kernel = 5;          ///< 1-D convolution width; 1 gives the pointwise variant
    int heads = 4;           ///< recorded only: head count does not change dense FLOPs/params
    int ffn_multiplier = 4;
    AttentionVariant attention = AttentionVariant::Full;

    void validate() const;
};

struct TraceStep {
    std::size_t index = 0;  ///< 1-based layer number
    LayerOp op;
    Shape shape;            ///< after the op
};

struct ShapeTrace {
    Shape input;
    std::vector<TraceStep> steps;

    Shape final_shape() const { return steps.empty() ? input : steps.back().shape; }
    /// [input, after layer 1, ...]
    std::vector<Shape> shapes() const;
};

/// Applies each op's factor to (n, d). Throws Error naming the layer when a
/// halving meets an odd dim or a divisor does not divide.
ShapeTrace propagate_shapes(const LayerPlan& plan, Shape input);

/// CNN layer: k*c_in*c_out + c_out. Transformer layer at width d_in:
/// 4*d_in^2 + d_in*d_out + 2*ffn*d_in^2 plus biases. Cross-attention blocks
/// add a second attention; placeholders count n*d embeddings.
std::int64_t count_params(const LayerPlan& plan, const CostModel& model);

/// CNN layer: 2*k*c_in*c_out*n_out. Transformer layer at length n:
/// 8*n*d^2 + attention + 4*n*d*(ffn*d) + 2*n*d_in*d_out, where attention is
/// 4*n^2*d (full) or 4*n*d^2 (linear).
std::int64_t count_flops(const LayerPlan& plan, Shape input, const CostModel& model);

struct PlanDefect {
    std::optional<std::size_t> layer;  ///< 1-based; empty for plan-level defects
    std::string message;
};

/// Empty when the plan propagates cleanly from its input to its declared output.
std::vector<PlanDefect> validate_plan(const LayerPlan& plan);

struct PlanCost {
    std::int64_t params = 0;
    std::int64_t flops = 0;
};

PlanCost analyze(const LayerPlan& plan, const CostModel& model);

/// Text-encoder parameters are shared across events; its FLOPs run n_e times.
PlanCost analyze(const HierarchicalPlan& plan, const CostModel& model);

}  // namespace ehrenc
