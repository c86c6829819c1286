#include <gtest/gtest.h>

#include <map>

#include "ehrenc/analyzer.hpp"
#include "ehrenc/planner.hpp"

using namespace ehrenc;

namespace {

std::vector<std::string> labels(const LayerPlan& p)
{
    std::vector<std::string> out;
    for (const auto& op : p.ops) out.push_back(describe(op));
    return out;
}

std::vector<std::string> trace_strings(const ShapeTrace& t)
{
    std::vector<std::string> out;
    for (const auto& s : t.steps) out.push_back(to_string(s.shape));
    return out;
}

std::map<OpKind, int> tally(const std::vector<LayerOp>& ops)
{
    std::map<OpKind, int> m;
    for (const auto& op : ops) ++m[op.kind];
    return m;
}

}  // namespace

TEST(Shapes, ParseAndPrint)
{
    EXPECT_EQ(parse_shape("8192x256"), (Shape{8192, 256}));
    EXPECT_EQ(to_string(Shape{64, 8}), "(64,8)");
    EXPECT_THROW(parse_shape("8192"), Error);
    EXPECT_THROW(parse_shape("ax4"), Error);
}

TEST(CnnCounts, Examples)
{
    const auto c = cnn_layer_counts({8192, 256}, {64, 8});
    EXPECT_EQ(c.nd, 5);
    EXPECT_EQ(c.n, 2);
    EXPECT_EQ(c.d, 0);
    EXPECT_EQ(c.n_layers, 7);

    const auto id = cnn_layer_counts({512, 64}, {512, 64});
    EXPECT_EQ(id.nd + id.n + id.d + id.n_layers, 0);

    const auto c2 = cnn_layer_counts({256, 256}, {16, 4});
    EXPECT_EQ(c2.r_n, 4);
    EXPECT_EQ(c2.r_d, 6);
    EXPECT_EQ(c2.nd, 4);
    EXPECT_EQ(c2.d, 2);
    EXPECT_EQ(c2.n, 0);
}

TEST(CnnCounts, Errors)
{
    EXPECT_THROW(cnn_layer_counts({100, 256}, {64, 8}), Error);
    EXPECT_THROW(cnn_layer_counts({64, 8}, {128, 8}), Error);
    EXPECT_THROW(cnn_layer_counts({64, 8}, {64, 16}), Error);
}

TEST(CnnOrder, Examples)
{
    const auto reference = cnn_plan({8192, 256}, {64, 8});
    EXPECT_EQ(labels(reference), (std::vector<std::string>{"Lnd", "Lnd", "Lnd", "Lnd", "Ln", "Lnd", "Ln"}));

    CnnLayerCounts equal{6, 0, 0, 6, 6, 6};
    EXPECT_EQ(cnn_layer_order(equal), std::vector<LayerOp>(6, LayerOp::lnd()));

    const auto channel = cnn_plan({256, 256}, {16, 4});
    EXPECT_EQ(labels(channel), (std::vector<std::string>{"Lnd", "Lnd", "Lnd", "Ld", "Lnd", "Ld"}));
}

TEST(CnnOrder, CountIdentityExhaustive)
{
    for (int rn = 0; rn <= 13; ++rn) {
        for (int rd = 0; rd <= 13; ++rd) {
            const Shape in{std::int64_t{1} << 14, std::int64_t{1} << 14};
            const Shape out{in.n >> rn, in.d >> rd};
            const auto counts = cnn_layer_counts(in, out);
            const auto order = tally(cnn_layer_order(counts));
            const auto get = [&](OpKind k) { return order.contains(k) ? order.at(k) : 0; };
            ASSERT_EQ(get(OpKind::Lnd), counts.nd) << rn << "," << rd;
            ASSERT_EQ(get(OpKind::Ln), counts.n) << rn << "," << rd;
            ASSERT_EQ(get(OpKind::Ld), counts.d) << rn << "," << rd;
            ASSERT_EQ(counts.nd + counts.n + counts.d, std::max(rn, rd));
        }
    }
}

TEST(CnnOrder, InconsistentCountsAreRejected)
{
    CnnLayerCounts bad{5, 1, 0, 7, 5, 7};
    EXPECT_THROW(cnn_layer_order(bad), Error);
}

TEST(Transformer, ReferenceExample)
{
    const auto p = transformer_plan({8192, 256}, {64, 8}, 4);
    EXPECT_EQ(labels(p), (std::vector<std::string>{"Ld1(/4)", "Ld2(/2)", "Ld2(/2)", "Ld2(/2)", "Pool(64)"}));
    EXPECT_EQ(trace_strings(propagate_shapes(p, p.input)),
              (std::vector<std::string>{"(8192,64)", "(8192,32)", "(8192,16)", "(8192,8)", "(64,8)"}));
}

TEST(Transformer, ChannelPreservingAndUnevenSplits)
{
    const auto keep = transformer_plan({1024, 64}, {32, 64}, 3);
    ASSERT_EQ(keep.ops.size(), 4u);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(keep.ops[i], LayerOp::ld2(1));
    EXPECT_EQ(keep.ops.back(), LayerOp::pool(32));

    const auto seven = transformer_plan({256, 128}, {16, 1}, 4);
    EXPECT_EQ(labels(seven), (std::vector<std::string>{"Ld1(/4)", "Ld1(/4)", "Ld1(/4)", "Ld2(/2)", "Pool(16)"}));
}

TEST(Transformer, FactorProductEqualsChannelRatio)
{
    for (int rd = 0; rd <= 10; ++rd) {
        for (int layers = 1; layers <= 8; ++layers) {
            const auto p = transformer_plan({4096, 1024}, {64, 1024 >> rd}, layers);
            std::int64_t product = 1;
            for (const auto& op : p.ops) {
                if (op.kind == OpKind::Ld1 || op.kind == OpKind::Ld2) product *= op.factor;
            }
            EXPECT_EQ(product, std::int64_t{1} << rd);
        }
    }
    EXPECT_THROW(transformer_plan({64, 8}, {64, 8}, 0), Error);
}

TEST(Mirror, CnnExample)
{
    const auto enc = cnn_plan({8192, 256}, {64, 8});
    const auto dec = mirror_decoder(enc);
    EXPECT_EQ(labels(dec), (std::vector<std::string>{"Un", "Und", "Un", "Und", "Und", "Und", "Und"}));
    EXPECT_EQ(dec.input, (Shape{64, 8}));
    EXPECT_EQ(propagate_shapes(dec, dec.input).final_shape(), (Shape{8192, 256}));
    EXPECT_EQ(dec.direction, Direction::Decode);
}

TEST(Mirror, EmptyPlan)
{
    const auto enc = cnn_plan({64, 8}, {64, 8});
    EXPECT_TRUE(enc.ops.empty());
    EXPECT_TRUE(mirror_decoder(enc).ops.empty());
}

TEST(Mirror, TransformerHasOneStagePerChannelHalving)
{
    const auto enc = transformer_plan({8192, 256}, {64, 8}, 4);
    const auto dec = mirror_decoder(enc);
    int xattn = 0;
    for (const auto& op : dec.ops) xattn += op.kind == OpKind::CrossAttention ? 1 : 0;
    EXPECT_EQ(xattn, 5);
    EXPECT_EQ(propagate_shapes(dec, dec.input).final_shape(), (Shape{8192, 256}));
}

TEST(Hierarchical, DefaultComposition)
{
    const auto h = hierarchical_plan(256, 128, 256, {256, 8}, Backbone::CNN);
    EXPECT_EQ(h.text_plan.input, (Shape{128, 256}));
    EXPECT_EQ(h.text_plan.output, (Shape{1, 128}));
    EXPECT_EQ(h.event_plan.input, (Shape{256, 128}));
    EXPECT_EQ(h.event_plan.output, (Shape{256, 8}));
    EXPECT_EQ(h.event_width, 128);

    const auto identity = hierarchical_plan(256, 128, 256, {256, 128}, Backbone::CNN);
    EXPECT_TRUE(identity.event_plan.ops.empty());

    EXPECT_THROW(hierarchical_plan(256, 128, 256, {16, 256}, Backbone::CNN), Error);
}

TEST(FlatPlan, OneStage)
{
    const auto p = flat_plan(8192, 256, {64, 8}, Backbone::CNN);
    EXPECT_EQ(p.input, (Shape{8192, 256}));
    EXPECT_EQ(p.output, (Shape{64, 8}));
    EXPECT_EQ(p.ops, cnn_plan({8192, 256}, {64, 8}).ops);
}

TEST(Compression, Examples)
{
    EXPECT_EQ(compression_rate(HierInput{}, 2048), 4096);
    EXPECT_EQ(compression_rate(FlatInput{}, 4096), 512);
    EXPECT_EQ(compression_rate(FlatInput{}, 8192 * 256), 1);
    EXPECT_THROW(compression_rate(FlatInput{}, 0), Error);
}

TEST(Grid, Examples)
{
    auto ts = [](std::int64_t l) {
        std::vector<std::int64_t> out;
        for (const auto& s : search_grid(l, l)) {
            EXPECT_EQ(s.l(), l);
            out.push_back(s.t);
        }
        return out;
    };
    EXPECT_EQ(ts(2048), (std::vector<std::int64_t>{16, 32, 64, 128, 256}));
    EXPECT_EQ(ts(256), (std::vector<std::int64_t>{4, 8, 16, 32, 64}));
    EXPECT_EQ(search_grid(256, 4096).size(), 25u);
}

TEST(Grid, RateRanges)
{
    std::int64_t hmin = INT64_MAX, hmax = 0, fmin = INT64_MAX, fmax = 0;
    for (const auto& s : search_grid(256, 4096)) {
        const auto h = compression_rate(HierInput{}, s.l());
        const auto f = compression_rate(FlatInput{}, s.l());
        hmin = std::min(hmin, h);
        hmax = std::max(hmax, h);
        fmin = std::min(fmin, f);
        fmax = std::max(fmax, f);
    }
    EXPECT_EQ(hmin, 2048);
    EXPECT_EQ(hmax, 32768);
    EXPECT_EQ(fmin, 512);
    EXPECT_EQ(fmax, 8192);
}

TEST(Grid, EveryPlanValidatesAndMirrors)
{
    for (const auto& s : search_grid(256, 4096)) {
        for (auto backbone : {Backbone::CNN, Backbone::Transformer}) {
            const auto flat = flat_plan(8192, 256, s, backbone);
            EXPECT_TRUE(validate_plan(flat).empty()) << s.t << "x" << s.c;
            const auto dec = mirror_decoder(flat);
            EXPECT_EQ(propagate_shapes(dec, dec.input).final_shape(), flat.input);
            if (s.c > 128) continue;  // wider than the per-event summary
            const auto h = hierarchical_plan(256, 128, 256, s, backbone);
            for (const auto* p : {&h.text_plan, &h.event_plan}) {
                EXPECT_TRUE(validate_plan(*p).empty());
                const auto d = mirror_decoder(*p);
                EXPECT_EQ(propagate_shapes(d, d.input).final_shape(), p->input);
            }
        }
    }
}
