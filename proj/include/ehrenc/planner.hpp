#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "ehrenc/common.hpp"

namespace ehrenc {

/// (sequence length, channel width) of an activation.
struct Shape {
    std::int64_t n = 0;
    std::int64_t d = 0;
    bool operator==(const Shape&) const = default;
};

std::string to_string(const Shape& s);  ///< "(n,d)"
Shape parse_shape(std::string_view text);  ///< "NxD"

enum class OpKind {
    Ln,            ///< temporal / 2
    Ld,            ///< channel / 2
    Lnd,           ///< both / 2
    Ld1,           ///< channel / factor (2^(q+1))
    Ld2,           ///< channel / factor (2^q)
    AdaptivePool,  ///< temporal -> target
    Un,            ///< temporal * 2
    Ud,            ///< channel * 2
    Und,           ///< both * 2
    CrossAttention,  ///< channel * 2, attends to the latent
    Placeholder,   ///< learnable placeholder of length target at the latent width
};

struct LayerOp {
    OpKind kind = OpKind::Ln;
    std::int64_t factor = 1;  ///< Ld1 / Ld2
    std::int64_t target = 0;  ///< AdaptivePool / Placeholder

    static LayerOp ln() { return {OpKind::Ln}; }
    static LayerOp ld() { return {OpKind::Ld}; }
    static LayerOp lnd() { return {OpKind::Lnd}; }
    static LayerOp ld1(std::int64_t f) { return {OpKind::Ld1, f}; }
    static LayerOp ld2(std::int64_t f) { return {OpKind::Ld2, f}; }
    static LayerOp pool(std::int64_t target) { return {OpKind::AdaptivePool, 1, target}; }

    bool operator==(const LayerOp&) const = default;
};

std::string_view op_name(OpKind kind);
OpKind op_kind_from_name(std::string_view name);

/// Table-style label: "Lnd", "Ld1(/4)", "Pool(64)", ...
std::string describe(const LayerOp& op);

enum class Backbone { CNN, Transformer };
enum class Direction { Encode, Decode };

std::string_view to_string(Backbone b);
std::string_view to_string(Direction d);
Backbone backbone_from_string(std::string_view s);

struct LayerPlan {
    Backbone backbone = Backbone::CNN;
    Direction direction = Direction::Encode;
    std::vector<LayerOp> ops;
    Shape input;
    Shape output;

    bool operator==(const LayerPlan&) const = default;
};

// ---------------------------------------------------------------------------
// CNN scheme

struct CnnLayerCounts {
    int nd = 0;  ///< Lnd
    int n = 0;   ///< Ln
    int d = 0;   ///< Ld
    int r_n = 0;
    int r_d = 0;
    int n_layers = 0;
    bool operator==(const CnnLayerCounts&) const = default;
};

/// r_n = log2(n/n'), r_d = log2(d/d'); Lnd covers the shared halvings and the
/// surplus axis gets single-axis layers.
CnnLayerCounts cnn_layer_counts(Shape input, Shape output);

/// Alternating order of the counted layers. The temporal-surplus branch
/// spreads the r_n - r_d extra Ln layers over r_d + 1 slots.
std::vector<LayerOp> cnn_layer_order(const CnnLayerCounts& counts);

LayerPlan cnn_plan(Shape input, Shape output);

// ---------------------------------------------------------------------------
// Transformer scheme

/// r_d channel halvings spread over n_layers: r layers divide by 2^(q+1), the
/// rest by 2^q, then an adaptive pool to the output length.
LayerPlan transformer_plan(Shape input, Shape output, int n_layers);

/// CNN: reversed ops with each halving swapped for its doubling. Transformer:
/// a placeholder at the encoder's input length followed by one cross-attention
/// block per channel halving.
LayerPlan mirror_decoder(const LayerPlan& encoder);

// ---------------------------------------------------------------------------
// Latent search and composition

struct LatentSpec {
    std::int64_t t = 0;
    std::int64_t c = 0;
    std::int64_t l() const { return t * c; }
    bool operator==(const LatentSpec&) const = default;
};

struct HierarchicalPlan {
    LayerPlan text_plan;   ///< per event: (n_tpe, d) -> intermediate
    LayerPlan event_plan;  ///< (n_e, intermediate.n * intermediate.d) -> (t, c)
    std::int64_t n_e = 0;
    std::int64_t event_width = 0;
};

struct PlanOptions {
    Shape intermediate{1, 128};          ///< per-event text encoder output
    int hierarchical_transformer_layers = 2;
    int flat_transformer_layers = 4;
};

HierarchicalPlan hierarchical_plan(std::int64_t n_e, std::int64_t n_tpe, std::int64_t d, LatentSpec latent,
                                   Backbone backbone, const PlanOptions& options = {});

/// One-stage encoder straight from (n_t, d) to the latent.
LayerPlan flat_plan(std::int64_t n_t, std::int64_t d, LatentSpec latent, Backbone backbone,
                    const PlanOptions& options = {});

struct HierInput {
    std::int64_t n_e = 256;
    std::int64_t n_tpe = 128;
    std::int64_t d = 256;
};
struct FlatInput {
    std::int64_t n_t = 8192;
    std::int64_t d = 256;
};
using InputVolume = std::variant<HierInput, FlatInput>;

/// Input embedding volume divided by the latent size l.
std::int64_t compression_rate(const InputVolume& input, std::int64_t l);

/// For every l = 2^k in [l_min, l_max], with i = ceil(k / 2), the five specs
/// t = 2^(i-2) .. 2^(i+2), c = l / t. Ordered by l, then t.
std::vector<LatentSpec> search_grid(std::int64_t l_min, std::int64_t l_max);

}  // namespace ehrenc
