#include "ehrenc/analyzer.hpp"

namespace ehrenc {

std::string_view to_string(AttentionVariant a) { return a == AttentionVariant::Full ? "full" : "linear"; }

AttentionVariant attention_from_string(std::string_view s)
{
    if (s == "full") return AttentionVariant::Full;
    if (s == "linear") return AttentionVariant::Linear;
    throw Error("unknown attention variant '" + std::string(s) + "' (expected full or linear)");
}

void CostModel::validate() const
{
    if (kernel < 1 || kernel % 2 == 0) throw Error("kernel size must be odd and positive");
    if (heads < 1) throw Error("heads must be >= 1");
    if (ffn_multiplier < 1) throw Error("ffn multiplier must be >= 1");
}

std::vector<Shape> ShapeTrace::shapes() const
{
    std::vector<Shape> out{input};
    for (const auto& s : steps) out.push_back(s.shape);
    return out;
}

namespace {

std::int64_t halve(std::int64_t v, std::size_t layer, const char* axis)
{
    if (v % 2 != 0) {
        throw Error("layer " + std::to_string(layer) + ": cannot halve odd " + axis + " dim " + std::to_string(v));
    }
    return v / 2;
}

Shape apply(const LayerOp& op, Shape s, std::size_t layer)
{
    switch (op.kind) {
    case OpKind::Ln: s.n = halve(s.n, layer, "temporal"); break;
    case OpKind::Ld: s.d = halve(s.d, layer, "channel"); break;
    case OpKind::Lnd:
        s.n = halve(s.n, layer, "temporal");
        s.d = halve(s.d, layer, "channel");
        break;
    case OpKind::Ld1:
    case OpKind::Ld2:
        if (op.factor < 1 || s.d % op.factor != 0) {
            throw Error("layer " + std::to_string(layer) + ": channel dim " + std::to_string(s.d) +
                        " not divisible by " + std::to_string(op.factor));
        }
        s.d /= op.factor;
        break;
    case OpKind::AdaptivePool:
    case OpKind::Placeholder:
        if (op.target < 1) throw Error("layer " + std::to_string(layer) + ": target length must be positive");
        s.n = op.target;
        break;
    case OpKind::Un: s.n *= 2; break;
    case OpKind::Ud: s.d *= 2; break;
    case OpKind::Und:
        s.n *= 2;
        s.d *= 2;
        break;
    case OpKind::CrossAttention:
        if (op.factor < 1) throw Error("layer " + std::to_string(layer) + ": bad channel factor");
        s.d *= op.factor;
        break;
    }
    return s;
}

bool is_conv(OpKind k)
{
    return k == OpKind::Ln || k == OpKind::Ld || k == OpKind::Lnd || k == OpKind::Un || k == OpKind::Ud ||
           k == OpKind::Und;
}

std::int64_t attention_flops(std::int64_t n, std::int64_t d, AttentionVariant v)
{
    return v == AttentionVariant::Full ? 4 * n * n * d : 4 * n * d * d;
}

}  // namespace

ShapeTrace propagate_shapes(const LayerPlan& plan, Shape input)
{
    if (input.n <= 0 || input.d <= 0) throw Error("input shape " + to_string(input) + " must be positive");
    if (input != plan.input) {
        throw Error("input " + to_string(input) + " does not match plan input " + to_string(plan.input));
    }
    ShapeTrace trace;
    trace.input = input;
    Shape s = input;
    for (std::size_t i = 0; i < plan.ops.size(); ++i) {
        s = apply(plan.ops[i], s, i + 1);
        trace.steps.push_back({i + 1, plan.ops[i], s});
    }
    return trace;
}

std::int64_t count_params(const LayerPlan& plan, const CostModel& model)
{
    model.validate();
    const auto trace = propagate_shapes(plan, plan.input);
    const std::int64_t k = model.kernel;
    const std::int64_t f = model.ffn_multiplier;
    std::int64_t total = 0;
    Shape prev = trace.input;
    for (const auto& step : trace.steps) {
        const auto d_in = prev.d;
        const auto d_out = step.shape.d;
        const auto kind = step.op.kind;
        if (is_conv(kind)) {
            total += k * d_in * d_out + d_out;
        } else if (kind == OpKind::Ld1 || kind == OpKind::Ld2) {
            total += 4 * d_in * d_in + d_in * d_out + 2 * d_in * f * d_in;
            total += 5 * d_in + f * d_in + d_out;
        } else if (kind == OpKind::CrossAttention) {
            total += 8 * d_in * d_in + d_in * d_out + 2 * d_in * f * d_in;
            total += 9 * d_in + f * d_in + d_out;
        } else if (kind == OpKind::Placeholder) {
            total += step.shape.n * step.shape.d;
        }
        prev = step.shape;
    }
    return total;
}

std::int64_t count_flops(const LayerPlan& plan, Shape input, const CostModel& model)
{
    model.validate();
    const auto trace = propagate_shapes(plan, input);
    const std::int64_t k = model.kernel;
    const std::int64_t f = model.ffn_multiplier;
    const std::int64_t latent_len = plan.input.n;
    std::int64_t total = 0;
    Shape prev = trace.input;
    for (const auto& step : trace.steps) {
        const auto n = prev.n;
        const auto d = prev.d;
        const auto d_out = step.shape.d;
        const auto kind = step.op.kind;
        if (is_conv(kind)) {
            total += 2 * k * d * d_out * step.shape.n;
        } else if (kind == OpKind::Ld1 || kind == OpKind::Ld2) {
            total += 8 * n * d * d + attention_flops(n, d, model.attention) + 4 * n * d * (f * d) + 2 * n * d * d_out;
        } else if (kind == OpKind::CrossAttention) {
            const auto self = 8 * n * d * d + attention_flops(n, d, model.attention);
            const auto cross = 4 * n * d * d + 4 * latent_len * d * d + 4 * n * latent_len * d;
            total += self + cross + 4 * n * d * (f * d) + 2 * n * d * d_out;
        }
        prev = step.shape;
    }
    return total;
}

std::vector<PlanDefect> validate_plan(const LayerPlan& plan)
{
    std::vector<PlanDefect> defects;
    if (plan.input.n <= 0 || plan.input.d <= 0) {
        defects.push_back({std::nullopt, "input shape " + to_string(plan.input) + " is not positive"});
        return defects;
    }
    Shape s = plan.input;
    for (std::size_t i = 0; i < plan.ops.size(); ++i) {
        try {
            s = apply(plan.ops[i], s, i + 1);
        } catch (const Error& e) {
            defects.push_back({i + 1, e.what()});
            return defects;
        }
    }
    if (s != plan.output) {
        defects.push_back({std::nullopt, "terminal shape " + to_string(s) + " differs from declared output " +
                                             to_string(plan.output)});
    }
    return defects;
}

PlanCost analyze(const LayerPlan& plan, const CostModel& model)
{
    return {count_params(plan, model), count_flops(plan, plan.input, model)};
}

PlanCost analyze(const HierarchicalPlan& plan, const CostModel& model)
{
    const auto text = analyze(plan.text_plan, model);
    const auto event = analyze(plan.event_plan, model);
    return {text.params + event.params, plan.n_e * text.flops + event.flops};
}

}  // namespace ehrenc
