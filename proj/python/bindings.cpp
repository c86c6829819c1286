#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ehrenc/analyzer.hpp"
#include "ehrenc/audit.hpp"
#include "ehrenc/corpus.hpp"
#include "ehrenc/io.hpp"
#include "ehrenc/metrics.hpp"
#include "ehrenc/planner.hpp"
#include "ehrenc/privacy.hpp"
#include "ehrenc/serializer.hpp"
#include "ehrenc/vq.hpp"

namespace py = pybind11;
using namespace ehrenc;

namespace {

// Reports travel as JSON text and are decoded on the Python side.
py::object to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }
Json from_py(const py::object& o) { return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>()); }

Shape shape_of(const std::pair<std::int64_t, std::int64_t>& s) { return {s.first, s.second}; }

Matrix matrix_of(const std::vector<std::vector<double>>& rows)
{
    if (rows.empty()) throw Error("matrix has no rows");
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols) throw Error("row " + std::to_string(r) + " has a different width");
        std::copy(rows[r].begin(), rows[r].end(), m.data.begin() + static_cast<std::ptrdiff_t>(r * m.cols));
    }
    return m;
}

py::object plan_json(const LayerPlan& p, const CostModel& model)
{
    Json j = to_json(p);
    j["trace"] = to_json(propagate_shapes(p, p.input));
    const auto cost = analyze(p, model);
    j["cost"] = {{"params", cost.params}, {"flops", cost.flops}};
    return to_py(j);
}

CostModel model_of(int kernel, const std::string& attention)
{
    CostModel m;
    m.kernel = kernel;
    m.attention = attention_from_string(attention);
    m.validate();
    return m;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "EHR serialization, encoder planning, quantization and audit primitives";
    m.attr("__version__") = std::string(kVersion);
    py::register_exception<Error>(m, "EhrencError", PyExc_ValueError);

    m.def(
        "generate_corpus",
        [](const std::string& out_dir, py::object config) {
            const auto cfg = config.is_none() ? default_generator_config() : generator_config_from_json(from_py(config));
            const auto corpus = generate_corpus(cfg);
            write_corpus(corpus, out_dir);
            return py::make_tuple(corpus.patients.size(), corpus.event_count());
        },
        py::arg("out_dir"), py::arg("config") = py::none(), "Write a seeded synthetic corpus; returns (patients, events).");

    m.def(
        "corpus_counts",
        [](const std::string& dir) {
            const auto c = load_corpus(dir);
            return py::make_tuple(c.patients.size(), c.event_count());
        },
        py::arg("dir"));

    py::class_<Vocabulary>(m, "Vocabulary")
        .def_static(
            "build",
            [](const std::vector<std::string>& texts, std::size_t min_count) {
                return Vocabulary::build(texts, {.min_count = min_count});
            },
            py::arg("texts"), py::arg("min_count") = 2)
        .def_static("from_corpus", [](const std::string& dir) { return Vocabulary::build(corpus_texts(load_corpus(dir))); })
        .def_static("from_text", [](const std::string& text) { return Vocabulary::from_text(text); })
        .def("to_text", &Vocabulary::to_text)
        .def("tokenize", &Vocabulary::tokenize)
        .def("tokenize_units", &Vocabulary::tokenize_units)
        .def("unit", &Vocabulary::unit)
        .def("__len__", &Vocabulary::size);

    m.def(
        "digit_places",
        [](const std::string& s) {
            std::vector<std::int32_t> ids;
            for (const auto& p : digit_places(s)) ids.push_back(p.id());
            return ids;
        },
        py::arg("decimal"), "Digit-place ids: 0 non-digit, 1 decimal point, then one id per power of ten.");
    m.def(
        "timegap_bucket",
        [](std::int64_t seconds) { return quantize_timegap(seconds, SerializerConfig{}.timegap_minutes); },
        py::arg("seconds"));

    m.def(
        "cnn_plan",
        [](std::pair<std::int64_t, std::int64_t> in, std::pair<std::int64_t, std::int64_t> out, int kernel) {
            return plan_json(cnn_plan(shape_of(in), shape_of(out)), model_of(kernel, "full"));
        },
        py::arg("input"), py::arg("output"), py::arg("kernel") = 5);
    m.def(
        "transformer_plan",
        [](std::pair<std::int64_t, std::int64_t> in, std::pair<std::int64_t, std::int64_t> out, int layers, const std::string& attention) {
            return plan_json(transformer_plan(shape_of(in), shape_of(out), layers), model_of(5, attention));
        },
        py::arg("input"), py::arg("output"), py::arg("layers") = 4, py::arg("attention") = "full");
    m.def(
        "mirror_decoder",
        [](py::object plan) {
            auto j = from_py(plan);
            j.erase("trace");
            j.erase("cost");
            return to_py(to_json(mirror_decoder(layer_plan_from_json(j))));
        },
        py::arg("plan"));
    m.def(
        "analyze",
        [](py::object plan, int kernel, const std::string& attention) {
            auto j = from_py(plan);
            j.erase("trace");
            j.erase("cost");
            const auto p = layer_plan_from_json(j);
            const auto defects = validate_plan(p);
            if (!defects.empty()) throw Error("plan does not validate: " + defects.front().message);
            const auto cost = analyze(p, model_of(kernel, attention));
            return py::make_tuple(cost.params, cost.flops);
        },
        py::arg("plan"), py::arg("kernel") = 5, py::arg("attention") = "full", "Returns (params, flops).");
    m.def(
        "compression_rate",
        [](const std::string& layout, std::int64_t l) {
            if (layout == "hierarchical") return compression_rate(HierInput{}, l);
            if (layout == "flattened") return compression_rate(FlatInput{}, l);
            throw Error("layout must be hierarchical or flattened");
        },
        py::arg("layout"), py::arg("l"));
    m.def(
        "search_grid",
        [](std::int64_t lo, std::int64_t hi) {
            std::vector<std::pair<std::int64_t, std::int64_t>> out;
            for (const auto& s : search_grid(lo, hi)) out.emplace_back(s.t, s.c);
            return out;
        },
        py::arg("l_min"), py::arg("l_max"), "(t, c) pairs ordered by l then t.");

    m.def(
        "quantize",
        [](const std::vector<std::vector<double>>& z, const std::vector<std::vector<double>>& codebook) {
            const auto r = quantize(matrix_of(z), Codebook(matrix_of(codebook), 0.99));
            return py::make_tuple(r.indices, r.commitment_distance);
        },
        py::arg("z"), py::arg("codebook"), "Returns (indices, commitment distance); indices are t x 4, row-major.");

    m.def(
        "audit",
        [](const std::string& real_dir, const std::string& generated_dir) {
            const auto real = load_corpus(real_dir);
            const auto vocab = Vocabulary::build(corpus_texts(real));
            const auto samples = samples_from_corpus(load_corpus(generated_dir), vocab, SerializerConfig{});
            return to_py(to_json(score(samples, build_triples(real, vocab), vocab)));
        },
        py::arg("real_dir"), py::arg("generated_dir"));

    m.def(
        "hamming",
        [](const std::vector<TokenId>& a, const std::vector<TokenId>& b) { return hamming(a, b).normalized; },
        py::arg("a"), py::arg("b"));
    m.def(
        "membership_attack",
        [](const std::vector<std::vector<TokenId>>& train, const std::vector<std::vector<TokenId>>& heldout,
           const std::vector<std::vector<TokenId>>& synthetic, std::size_t n_r, std::vector<double> thresholds, std::uint64_t seed) {
            return to_py(to_json(membership_attack(train, heldout, synthetic, {n_r, std::move(thresholds), seed})));
        },
        py::arg("train"), py::arg("heldout"), py::arg("synthetic"), py::arg("n_r") = 100,
        py::arg("thresholds") = std::vector<double>{0.0}, py::arg("seed") = 0);

    m.def(
        "auroc", [](const std::vector<double>& s, const std::vector<int>& y) { return auroc(s, y); }, py::arg("scores"),
        py::arg("labels"));
    m.def(
        "token_accuracy",
        [](const std::vector<TokenId>& ref, const std::vector<TokenId>& hyp, bool include_pads) {
            return token_accuracy(ref, hyp, include_pads);
        },
        py::arg("reference"), py::arg("hypothesis"), py::arg("include_pads") = false);
}
