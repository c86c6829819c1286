#include "ehrenc/planner.hpp"

#include <algorithm>

namespace ehrenc {

std::string to_string(const Shape& s) { return "(" + std::to_string(s.n) + "," + std::to_string(s.d) + ")"; }

Shape parse_shape(std::string_view text)
{
    const auto x = text.find('x');
    if (x == std::string_view::npos) throw Error("shape '" + std::string(text) + "' must look like NxD");
    try {
        std::size_t used_n = 0;
        std::size_t used_d = 0;
        const std::string ns(text.substr(0, x));
        const std::string ds(text.substr(x + 1));
        const auto n = std::stoll(ns, &used_n);
        const auto d = std::stoll(ds, &used_d);
        if (used_n != ns.size() || used_d != ds.size() || n <= 0 || d <= 0) throw Error("");
        return {n, d};
    } catch (const std::exception&) {
        throw Error("shape '" + std::string(text) + "' must look like NxD with positive integers");
    }
}

std::string_view op_name(OpKind kind)
{
    switch (kind) {
    case OpKind::Ln: return "Ln";
    case OpKind::Ld: return "Ld";
    case OpKind::Lnd: return "Lnd";
    case OpKind::Ld1: return "Ld1";
    case OpKind::Ld2: return "Ld2";
    case OpKind::AdaptivePool: return "Pool";
    case OpKind::Un: return "Un";
    case OpKind::Ud: return "Ud";
    case OpKind::Und: return "Und";
    case OpKind::CrossAttention: return "XAttn";
    case OpKind::Placeholder: return "Placeholder";
    }
    return "?";
}

OpKind op_kind_from_name(std::string_view name)
{
    for (auto k : {OpKind::Ln, OpKind::Ld, OpKind::Lnd, OpKind::Ld1, OpKind::Ld2, OpKind::AdaptivePool, OpKind::Un,
                   OpKind::Ud, OpKind::Und, OpKind::CrossAttention, OpKind::Placeholder}) {
        if (op_name(k) == name) return k;
    }
    throw Error("unknown layer op '" + std::string(name) + "'");
}

std::string describe(const LayerOp& op)
{
    switch (op.kind) {
    case OpKind::Ld1:
    case OpKind::Ld2: return std::string(op_name(op.kind)) + "(/" + std::to_string(op.factor) + ")";
    case OpKind::AdaptivePool:
    case OpKind::Placeholder: return std::string(op_name(op.kind)) + "(" + std::to_string(op.target) + ")";
    default: return std::string(op_name(op.kind));
    }
}

std::string_view to_string(Backbone b) { return b == Backbone::CNN ? "cnn" : "transformer"; }
std::string_view to_string(Direction d) { return d == Direction::Encode ? "encode" : "decode"; }

Backbone backbone_from_string(std::string_view s)
{
    if (s == "cnn") return Backbone::CNN;
    if (s == "transformer") return Backbone::Transformer;
    throw Error("unknown backbone '" + std::string(s) + "' (expected cnn or transformer)");
}

// ---------------------------------------------------------------------------

namespace {

void require_pow2(Shape s, std::string_view what)
{
    if (!is_power_of_two(s.n) || !is_power_of_two(s.d)) {
        throw Error(std::string(what) + " shape " + to_string(s) + " must have power-of-two dims");
    }
}

template <typename T>
void repeat_into(std::vector<T>& out, const std::vector<T>& block, int times)
{
    for (int i = 0; i < times; ++i) out.insert(out.end(), block.begin(), block.end());
}

}  // namespace

CnnLayerCounts cnn_layer_counts(Shape input, Shape output)
{
    require_pow2(input, "input");
    require_pow2(output, "output");
    if (output.n > input.n || output.d > input.d) {
        throw Error("cannot compress " + to_string(input) + " to larger " + to_string(output));
    }
    CnnLayerCounts c;
    c.r_n = log2_exact(input.n / output.n);
    c.r_d = log2_exact(input.d / output.d);
    c.n_layers = std::max(c.r_n, c.r_d);
    if (c.r_n > c.r_d) {
        c.nd = c.r_d;
        c.n = c.n_layers - c.r_d;
    } else if (c.r_n < c.r_d) {
        c.nd = c.r_n;
        c.d = c.n_layers - c.r_n;
    } else {
        c.nd = c.n_layers;
    }
    return c;
}

std::vector<LayerOp> cnn_layer_order(const CnnLayerCounts& c)
{
    const bool consistent = c.r_n >= 0 && c.r_d >= 0 && c.n_layers == std::max(c.r_n, c.r_d) &&
                            c.nd == std::min(c.r_n, c.r_d) && c.n == std::max(c.r_n - c.r_d, 0) &&
                            c.d == std::max(c.r_d - c.r_n, 0);
    if (!consistent) throw Error("inconsistent CNN layer counts");

    const auto Ln = LayerOp::ln();
    const auto Ld = LayerOp::ld();
    const auto Lnd = LayerOp::lnd();
    std::vector<LayerOp> out;

    if (c.n > 0) {
        const int surplus = c.r_n - c.r_d;
        const int per_slot = surplus / (c.r_d + 1);
        const int remainder = surplus % (c.r_d + 1);
        const std::vector<LayerOp> block_n(static_cast<std::size_t>(per_slot), Ln);
        auto block_alt = block_n;
        block_alt.push_back(Lnd);
        auto block_alt_extra = block_alt;
        block_alt_extra.push_back(Ln);
        repeat_into(out, block_alt, c.r_d - remainder);
        repeat_into(out, block_alt_extra, remainder);
        out.insert(out.end(), block_n.begin(), block_n.end());
        return out;
    }

    if (c.d > 0) {
        const std::vector<LayerOp> block_alt{Lnd, Ld};
        if (c.n_layers - 2 * (c.r_d - c.r_n) + 1 < 0) {
            const int odd = c.n_layers % 2;
            out.insert(out.end(), static_cast<std::size_t>(odd), Ld);
            repeat_into(out, block_alt, c.r_n);
            out.insert(out.end(), static_cast<std::size_t>(c.n_layers - 2 * c.r_n - odd), Ld);
            return out;
        }
        const int num_alt = (2 * c.r_n - c.r_d >= 0) ? c.r_d - c.r_n : std::min(c.r_n, c.r_d / 2);
        if (c.r_n - num_alt == c.r_d - 2 * num_alt) {
            out.insert(out.end(), static_cast<std::size_t>(c.r_n - num_alt), Lnd);
        } else {
            out.insert(out.end(), static_cast<std::size_t>(c.r_d - 2 * num_alt), Ld);
        }
        repeat_into(out, block_alt, num_alt);
        return out;
    }

    out.assign(static_cast<std::size_t>(c.n_layers), Lnd);
    return out;
}

LayerPlan cnn_plan(Shape input, Shape output)
{
    LayerPlan p;
    p.backbone = Backbone::CNN;
    p.direction = Direction::Encode;
    p.ops = cnn_layer_order(cnn_layer_counts(input, output));
    p.input = input;
    p.output = output;
    return p;
}

LayerPlan transformer_plan(Shape input, Shape output, int n_layers)
{
    if (!is_power_of_two(input.d) || !is_power_of_two(output.d)) {
        throw Error("channel dims " + std::to_string(input.d) + " and " + std::to_string(output.d) +
                    " must be powers of two");
    }
    if (output.d > input.d) throw Error("transformer plan cannot widen channels " + to_string(input) + " -> " + to_string(output));
    if (input.n <= 0 || output.n <= 0) throw Error("sequence lengths must be positive");
    if (n_layers < 1) throw Error("transformer plan needs at least one layer");

    const int r_d = log2_exact(input.d / output.d);
    const int q = r_d / n_layers;
    const int r = r_d % n_layers;

    LayerPlan p;
    p.backbone = Backbone::Transformer;
    p.direction = Direction::Encode;
    p.input = input;
    p.output = output;
    p.ops.insert(p.ops.end(), static_cast<std::size_t>(r), LayerOp::ld1(std::int64_t{1} << (q + 1)));
    p.ops.insert(p.ops.end(), static_cast<std::size_t>(n_layers - r), LayerOp::ld2(std::int64_t{1} << q));
    p.ops.push_back(LayerOp::pool(output.n));
    return p;
}

LayerPlan mirror_decoder(const LayerPlan& enc)
{
    if (enc.direction != Direction::Encode) throw Error("plan is already a decoder");

    LayerPlan dec;
    dec.backbone = enc.backbone;
    dec.direction = Direction::Decode;
    dec.input = enc.output;
    dec.output = enc.input;

    if (enc.backbone == Backbone::CNN) {
        for (auto it = enc.ops.rbegin(); it != enc.ops.rend(); ++it) {
            switch (it->kind) {
            case OpKind::Ln: dec.ops.push_back({OpKind::Un}); break;
            case OpKind::Ld: dec.ops.push_back({OpKind::Ud}); break;
            case OpKind::Lnd: dec.ops.push_back({OpKind::Und}); break;
            default: throw Error("CNN encoder contains non-CNN op " + describe(*it));
            }
        }
        return dec;
    }

    if (enc.ops.empty()) return dec;
    int halvings = 0;
    for (const auto& op : enc.ops) {
        if (op.kind == OpKind::Ld1 || op.kind == OpKind::Ld2) {
            if (!is_power_of_two(op.factor)) throw Error("channel factor " + std::to_string(op.factor) + " is not a power of two");
            halvings += log2_exact(op.factor);
        } else if (op.kind != OpKind::AdaptivePool) {
            throw Error("transformer encoder contains non-transformer op " + describe(op));
        }
    }
    dec.ops.push_back({OpKind::Placeholder, 1, enc.input.n});
    dec.ops.insert(dec.ops.end(), static_cast<std::size_t>(halvings), LayerOp{OpKind::CrossAttention, 2, 0});
    return dec;
}

// ---------------------------------------------------------------------------

HierarchicalPlan hierarchical_plan(std::int64_t n_e, std::int64_t n_tpe, std::int64_t d, LatentSpec latent,
                                   Backbone backbone, const PlanOptions& options)
{
    for (auto v : {n_e, n_tpe, d, latent.t, latent.c}) {
        if (!is_power_of_two(v)) throw Error("hierarchical plan dims must be powers of two, got " + std::to_string(v));
    }
    const auto width = options.intermediate.n * options.intermediate.d;
    if (!is_power_of_two(width)) {
        throw Error("intermediate width " + std::to_string(width) + " is not a power of two");
    }
    if (latent.c > width || latent.t > n_e) {
        throw Error("latent (" + std::to_string(latent.t) + "," + std::to_string(latent.c) +
                    ") exceeds the event encoder input (" + std::to_string(n_e) + "," + std::to_string(width) + ")");
    }

    HierarchicalPlan h;
    h.n_e = n_e;
    h.event_width = width;
    const Shape text_in{n_tpe, d};
    const Shape event_in{n_e, width};
    const Shape out{latent.t, latent.c};
    if (backbone == Backbone::CNN) {
        h.text_plan = cnn_plan(text_in, options.intermediate);
        h.event_plan = cnn_plan(event_in, out);
    } else {
        h.text_plan = transformer_plan(text_in, options.intermediate, options.hierarchical_transformer_layers);
        h.event_plan = transformer_plan(event_in, out, options.hierarchical_transformer_layers);
    }
    return h;
}

LayerPlan flat_plan(std::int64_t n_t, std::int64_t d, LatentSpec latent, Backbone backbone, const PlanOptions& options)
{
    const Shape in{n_t, d};
    const Shape out{latent.t, latent.c};
    return backbone == Backbone::CNN ? cnn_plan(in, out) : transformer_plan(in, out, options.flat_transformer_layers);
}

std::int64_t compression_rate(const InputVolume& input, std::int64_t l)
{
    const std::int64_t volume = std::visit(
        [](const auto& v) -> std::int64_t {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, HierInput>) {
                return v.n_e * v.n_tpe * v.d;
            } else {
                return v.n_t * v.d;
            }
        },
        input);
    if (l <= 0) throw Error("latent size must be positive");
    if (volume <= 0) throw Error("input volume must be positive");
    if (volume % l != 0) throw Error("latent size " + std::to_string(l) + " does not divide input volume " + std::to_string(volume));
    return volume / l;
}

std::vector<LatentSpec> search_grid(std::int64_t l_min, std::int64_t l_max)
{
    if (!is_power_of_two(l_min) || !is_power_of_two(l_max)) throw Error("grid bounds must be powers of two");
    if (l_min > l_max) throw Error("grid lower bound exceeds upper bound");
    std::vector<LatentSpec> grid;
    for (std::int64_t l = l_min; l <= l_max; l *= 2) {
        const int k = log2_exact(l);
        const int i = (k + 1) / 2;
        for (int e = i - 2; e <= i + 2; ++e) {
            if (e < 0 || e > k) continue;  // t must be a power of two dividing l
            const std::int64_t t = std::int64_t{1} << e;
            grid.push_back({t, l / t});
        }
    }
    return grid;
}

}  // namespace ehrenc
