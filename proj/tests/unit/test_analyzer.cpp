#include <gtest/gtest.h>

#include "ehrenc/analyzer.hpp"
#include "ehrenc/planner.hpp"

using namespace ehrenc;

namespace {

LayerPlan single(OpKind kind, Shape in, Shape out)
{
    LayerPlan p;
    p.ops = {LayerOp{kind}};
    p.input = in;
    p.output = out;
    return p;
}

}  // namespace

TEST(Propagate, ReferenceCnnTrace)
{
    const auto p = cnn_plan({8192, 256}, {64, 8});
    const auto t = propagate_shapes(p, p.input);
    std::vector<std::string> got;
    for (const auto& s : t.steps) got.push_back(to_string(s.shape));
    EXPECT_EQ(got, (std::vector<std::string>{"(4096,128)", "(2048,64)", "(1024,32)", "(512,16)", "(256,16)", "(128,8)", "(64,8)"}));
    EXPECT_EQ(t.steps.front().index, 1u);
}

TEST(Propagate, EmptyPlanAndOddDims)
{
    LayerPlan empty;
    empty.input = empty.output = {64, 8};
    const auto t = propagate_shapes(empty, empty.input);
    EXPECT_EQ(t.shapes(), std::vector<Shape>{(Shape{64, 8})});

    try {
        propagate_shapes(single(OpKind::Ln, {3, 8}, {1, 8}), {3, 8});
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("layer 1"), std::string::npos) << e.what();
    }
}

TEST(Params, SingleCnnLayer)
{
    const auto p = single(OpKind::Lnd, {8192, 256}, {4096, 128});
    EXPECT_EQ(count_params(p, CostModel{}), 163968);
    CostModel pointwise;
    pointwise.kernel = 1;
    EXPECT_EQ(count_params(p, pointwise), 256 * 128 + 128);
}

TEST(Params, EmptyAndAdditive)
{
    LayerPlan empty;
    empty.input = empty.output = {64, 8};
    EXPECT_EQ(count_params(empty, CostModel{}), 0);
    EXPECT_EQ(count_flops(empty, empty.input, CostModel{}), 0);

    const auto two = cnn_plan({64, 64}, {16, 16});
    const auto a = single(OpKind::Lnd, {64, 64}, {32, 32});
    const auto b = single(OpKind::Lnd, {32, 32}, {16, 16});
    const CostModel m;
    EXPECT_EQ(count_params(two, m), count_params(a, m) + count_params(b, m));
    EXPECT_EQ(count_flops(two, two.input, m), count_flops(a, a.input, m) + count_flops(b, b.input, m));
}

TEST(Params, IndependentOfInputLength)
{
    const CostModel m;
    const auto a = cnn_plan({1024, 64}, {512, 32});
    const auto b = cnn_plan({64, 64}, {32, 32});
    EXPECT_EQ(count_params(a, m), count_params(b, m));
}

TEST(Flops, SingleCnnLayer)
{
    const auto p = single(OpKind::Lnd, {8192, 256}, {4096, 128});
    EXPECT_EQ(count_flops(p, p.input, CostModel{}), 1342177280LL);
    const auto half = single(OpKind::Lnd, {4096, 256}, {2048, 128});
    EXPECT_EQ(count_flops(half, half.input, CostModel{}) * 2, count_flops(p, p.input, CostModel{}));
}

TEST(Flops, TransformerLayerByHand)
{
    LayerPlan p;
    p.backbone = Backbone::Transformer;
    p.ops = {LayerOp::ld2(2)};
    p.input = {16, 8};
    p.output = {16, 4};
    const CostModel m;
    const std::int64_t n = 16, d = 8, dout = 4, f = 4;
    const std::int64_t flops = 8 * n * d * d + 4 * n * n * d + 4 * n * d * (f * d) + 2 * n * d * dout;
    EXPECT_EQ(count_flops(p, p.input, m), flops);
    const std::int64_t params = 4 * d * d + 4 * d + 2 * f * d * d + f * d + d + d * dout + dout;
    EXPECT_EQ(count_params(p, m), params);

    CostModel linear = m;
    linear.attention = AttentionVariant::Linear;
    EXPECT_EQ(count_flops(p, p.input, linear), flops - 4 * n * n * d + 4 * n * d * d);
}

TEST(Flops, CnnDecreasesWhenInputHalves)
{
    const CostModel m;
    for (std::int64_t n = 8192; n > 64; n /= 2) {
        const auto big = cnn_plan({n, 256}, {64, 8});
        const auto small = cnn_plan({n / 2, 256}, {64, 8});
        EXPECT_LT(count_flops(small, small.input, m), count_flops(big, big.input, m)) << n;
    }
}

TEST(Validate, ReferencePlanIsClean)
{
    EXPECT_TRUE(validate_plan(cnn_plan({8192, 256}, {64, 8})).empty());
}

TEST(Validate, TerminalMismatchIsReported)
{
    auto p = cnn_plan({8192, 256}, {64, 8});
    p.output = {64, 16};
    const auto defects = validate_plan(p);
    ASSERT_EQ(defects.size(), 1u);
    EXPECT_FALSE(defects[0].layer.has_value());
}

TEST(Validate, LayerDefectNamesTheLayer)
{
    LayerPlan p;
    p.ops = {LayerOp::lnd(), LayerOp::lnd()};
    p.input = {2, 8};
    p.output = {1, 2};
    const auto defects = validate_plan(p);
    ASSERT_FALSE(defects.empty());
    EXPECT_EQ(defects[0].layer, 2u);
}

TEST(Analyze, HierarchicalSharesTextEncoderWeights)
{
    const CostModel m;
    const auto h = hierarchical_plan(256, 128, 256, {64, 32}, Backbone::CNN);
    const auto text = analyze(h.text_plan, m);
    const auto events = analyze(h.event_plan, m);
    const auto total = analyze(h, m);
    EXPECT_EQ(total.params, text.params + events.params);
    EXPECT_EQ(total.flops, 256 * text.flops + events.flops);
}

TEST(CostModel, RejectsBadValues)
{
    CostModel m;
    m.kernel = 0;
    EXPECT_THROW(m.validate(), Error);
}
