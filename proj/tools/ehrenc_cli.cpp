// ehrenc command-line tool: every subcommand reads files, writes its outputs
// plus manifest.json into the output directory, and exits 1 on bad input.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ehrenc/analyzer.hpp"
#include "ehrenc/audit.hpp"
#include "ehrenc/corpus.hpp"
#include "ehrenc/fileio.hpp"
#include "ehrenc/io.hpp"
#include "ehrenc/metrics.hpp"
#include "ehrenc/planner.hpp"
#include "ehrenc/privacy.hpp"
#include "ehrenc/serializer.hpp"
#include "ehrenc/vq.hpp"

namespace fs = std::filesystem;
using namespace ehrenc;

namespace {

struct Common {
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string config;
};

void add_common(CLI::App* cmd, Common& c, bool out_is_dir = true)
{
    cmd->add_option("--seed", c.seed, "Seed for every randomized step");
    if (out_is_dir) cmd->add_option("--out", c.out, "Output directory");
    cmd->add_option("--config", c.config, "Configuration file (JSON)");
}

fs::path require_dir(const std::string& out)
{
    if (out.empty()) throw Error("--out is required");
    fs::create_directories(out);
    return out;
}

void require_exists(const std::string& path, std::string_view what)
{
    if (path.empty()) throw Error(std::string(what) + " is required");
    if (!fs::exists(path)) throw Error(std::string(what) + " not found: " + path);
}

/// Collects what a run read and wrote, then writes manifest.json.
class Run {
public:
    Run(std::string command, fs::path dir) : dir_(std::move(dir)) { manifest_.command = std::move(command); }

    void input(const std::string& label, const fs::path& path) { manifest_.input_digests[label] = digest_path(path); }
    void seed(std::uint64_t s) { manifest_.seed = s; }
    Json& config() { return manifest_.config; }

    fs::path output(const std::string& name)
    {
        manifest_.outputs.push_back(name);
        return dir_ / name;
    }

    void write_text(const std::string& name, std::string_view text) { write_file_atomic(output(name), text); }
    void write_json(const std::string& name, const Json& j) { write_json_file(output(name), j); }

    void finish()
    {
        manifest_.outputs.push_back("manifest.json");
        write_json_file(dir_ / "manifest.json", to_json(manifest_));
    }

private:
    fs::path dir_;
    RunManifest manifest_;
};

std::string format_ratio(const std::optional<double>& v)
{
    if (!v) return "null";
    std::ostringstream s;
    s.precision(6);
    s << *v;
    return s.str();
}

// ---------------------------------------------------------------------------

struct GenArgs {
    Common common;
};

int cmd_gen(const GenArgs& a)
{
    GeneratorConfig cfg = default_generator_config();
    if (!a.common.config.empty()) {
        require_exists(a.common.config, "config");
        cfg = generator_config_from_json(read_json_file(a.common.config));
    }
    if (a.common.seed) cfg.seed = *a.common.seed;
    validate_config(cfg);
    const auto dir = require_dir(a.common.out);

    Run run("gen", dir);
    if (!a.common.config.empty()) run.input("config", a.common.config);
    run.seed(cfg.seed);
    run.config() = to_json(cfg);

    const auto corpus = generate_corpus(cfg);
    write_corpus(corpus, dir);
    run.output("schema.json");
    for (const auto& t : corpus.schema.tables) run.output(t.name + ".tsv");
    run.output("definitions.tsv");
    run.output("labels.tsv");
    run.finish();
    std::cout << "generated " << corpus.patients.size() << " patients, " << corpus.event_count() << " events\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct LoadArgs {
    Common common;
    std::string corpus;
    std::optional<double> window;
    std::optional<int> min_events;
};

int cmd_load(const LoadArgs& a)
{
    require_exists(a.corpus, "--corpus");
    LoadOptions opts;
    opts.observation_window_hours = a.window;
    opts.min_events = a.min_events;
    const auto corpus = load_corpus(a.corpus, opts);

    Json tables = Json::object();
    for (const auto& t : corpus.schema.tables) tables[t.name] = 0;
    std::map<std::string, std::pair<int, int>> labels;
    for (const auto& p : corpus.patients) {
        for (const auto& e : p.events) tables[e.table] = tables[e.table].get<int>() + 1;
        for (const auto& [task, y] : p.labels) {
            ++labels[task].first;
            labels[task].second += y != 0 ? 1 : 0;
        }
    }
    Json label_json = Json::object();
    for (const auto& [task, counts] : labels) label_json[task] = {{"patients", counts.first}, {"positive", counts.second}};
    const Json report{{"patients", corpus.patients.size()},
                      {"events", corpus.event_count()},
                      {"events_per_table", tables},
                      {"labels", label_json},
                      {"observation_window_hours", corpus.schema.observation_window_hours},
                      {"min_events", corpus.schema.min_events}};
    std::cout << report.dump(2) << "\n";

    if (!a.common.out.empty()) {
        Run run("load", require_dir(a.common.out));
        run.input("corpus", a.corpus);
        run.config() = {{"observation_window_hours", corpus.schema.observation_window_hours},
                        {"min_events", corpus.schema.min_events}};
        run.write_json("load_report.json", report);
        run.finish();
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct SerializeArgs {
    Common common;
    std::string corpus;
    std::string vocab;
    std::string layout = "both";
    std::size_t min_count = 2;
};

int cmd_serialize(const SerializeArgs& a)
{
    require_exists(a.corpus, "--corpus");
    if (a.layout != "both" && a.layout != "hierarchical" && a.layout != "flattened") {
        throw Error("--layout must be hierarchical, flattened or both");
    }
    SerializerConfig cfg;
    if (!a.common.config.empty()) {
        require_exists(a.common.config, "config");
        cfg = serializer_config_from_json(read_json_file(a.common.config));
    }
    cfg.validate();
    const auto dir = require_dir(a.common.out);
    const auto corpus = load_corpus(a.corpus);

    Run run("serialize", dir);
    run.input("corpus", a.corpus);
    if (!a.common.config.empty()) run.input("config", a.common.config);
    Vocabulary vocab;
    if (!a.vocab.empty()) {
        require_exists(a.vocab, "--vocab");
        run.input("vocab", a.vocab);
        vocab = Vocabulary::from_text(read_file(a.vocab));
    } else {
        vocab = Vocabulary::build(corpus_texts(corpus), {.timegap_tokens = cfg.timegap_tokens(), .min_count = a.min_count});
    }
    run.config() = {{"serializer", to_json(cfg)}, {"layout", a.layout}, {"min_count", a.min_count}};

    std::vector<TokenStream> hier, flat;
    std::size_t checked = 0, exact = 0, truncated = 0;
    for (const auto& p : corpus.patients) {
        hier.push_back(build_hierarchical(p, vocab, cfg, corpus.definitions));
        flat.push_back(flatten(hier.back(), cfg.n_t));

        const auto events = detokenize_events(hier.back(), vocab);
        std::int64_t prev = 0;
        for (std::size_t i = 0; i < p.events.size() && i < events.size(); ++i) {
            const auto length = serialize_event(p.events[i], prev, vocab, cfg, corpus.definitions).tokens.size();
            if (length > static_cast<std::size_t>(cfg.n_tpe)) {
                ++truncated;
            } else {
                ++checked;
                exact += events[i] == expected_reconstruction(p.events[i], prev, cfg, corpus.definitions) ? 1 : 0;
            }
            prev = p.events[i].timestamp;
        }
    }

    run.write_text("vocab.txt", vocab.to_text());
    if (a.layout != "flattened") run.write_text("streams_hierarchical.jsonl", streams_to_jsonl(hier));
    if (a.layout != "hierarchical") run.write_text("streams_flattened.jsonl", streams_to_jsonl(flat));
    const Json report{{"patients", corpus.patients.size()},
                      {"vocab_size", vocab.size()},
                      {"events_checked", checked},
                      {"events_truncated", truncated},
                      {"events_exact", exact},
                      {"roundtrip_exact", checked == exact}};
    run.write_json("roundtrip.json", report);
    run.finish();
    std::cout << report.dump(2) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct PlanArgs {
    Common common;
    std::string backbone = "cnn";
    std::string in;
    std::string target;
    int layers = 4;
    std::string grid;
    bool hierarchical = false;
    std::int64_t n_e = 256, n_tpe = 128, n_t = 8192, d = 256;
    std::string out_dir;
    int kernel = 5;
    std::string attention = "full";
};

Json plan_document(const LayerPlan& enc, const CostModel& model)
{
    const auto dec = mirror_decoder(enc);
    const auto enc_cost = analyze(enc, model);
    const auto dec_cost = analyze(dec, model);
    Json j = to_json(enc);
    j["trace"] = to_json(propagate_shapes(enc, enc.input));
    j["cost"] = {{"params", enc_cost.params}, {"flops", enc_cost.flops}};
    j["decoder"] = to_json(dec);
    j["decoder"]["trace"] = to_json(propagate_shapes(dec, dec.input));
    j["decoder"]["cost"] = {{"params", dec_cost.params}, {"flops", dec_cost.flops}};
    return j;
}

void print_plan(const LayerPlan& p)
{
    const auto trace = propagate_shapes(p, p.input);
    std::cout << to_string(p.backbone) << " " << to_string(p.direction) << " " << to_string(p.input) << " -> "
              << to_string(p.output) << "\n";
    std::cout << "  0  input  " << to_string(trace.input) << "\n";
    for (const auto& s : trace.steps) std::cout << "  " << s.index << "  " << describe(s.op) << "  " << to_string(s.shape) << "\n";
}

int plan_grid(const PlanArgs& a, const CostModel& model, const PlanOptions& options)
{
    const auto colon = a.grid.find(':');
    if (colon == std::string::npos) throw Error("--grid expects LMIN:LMAX");
    std::int64_t lo = 0, hi = 0;
    try {
        lo = std::stoll(a.grid.substr(0, colon));
        hi = std::stoll(a.grid.substr(colon + 1));
    } catch (const std::exception&) {
        throw Error("--grid expects integer bounds, got '" + a.grid + "'");
    }
    const auto specs = search_grid(lo, hi);
    const HierInput hin{a.n_e, a.n_tpe, a.d};
    const FlatInput fin{a.n_t, a.d};
    // Long flattened sequences are costed with linear attention.
    CostModel flat_model = model;
    flat_model.attention = AttentionVariant::Linear;

    std::ostringstream csv;
    csv << "l,t,c,layout,backbone,feasible,compression_rate,params,flops,layers\n";
    for (const auto& s : specs) {
        for (auto backbone : {Backbone::CNN, Backbone::Transformer}) {
            try {
                const auto h = hierarchical_plan(a.n_e, a.n_tpe, a.d, s, backbone, options);
                const auto cost = analyze(h, model);
                csv << s.l() << ',' << s.t << ',' << s.c << ",hierarchical," << to_string(backbone) << ",1,"
                    << compression_rate(hin, s.l()) << ',' << cost.params << ',' << cost.flops << ','
                    << h.text_plan.ops.size() + h.event_plan.ops.size() << '\n';
            } catch (const Error&) {
                csv << s.l() << ',' << s.t << ',' << s.c << ",hierarchical," << to_string(backbone) << ",0,"
                    << compression_rate(hin, s.l()) << ",,,\n";
            }
            const auto f = flat_plan(a.n_t, a.d, s, backbone, options);
            const auto cost = analyze(f, flat_model);
            csv << s.l() << ',' << s.t << ',' << s.c << ",flattened," << to_string(backbone) << ",1,"
                << compression_rate(fin, s.l()) << ',' << cost.params << ',' << cost.flops << ',' << f.ops.size() << '\n';
        }
    }
    std::cout << csv.str();
    if (!a.out_dir.empty()) {
        fs::create_directories(a.out_dir);
        Run run("plan", a.out_dir);
        run.config() = {{"grid", a.grid}, {"cost_model", to_json(model)}, {"n_e", a.n_e}, {"n_tpe", a.n_tpe},
                        {"n_t", a.n_t}, {"d", a.d}};
        run.write_text("grid.csv", csv.str());
        run.finish();
    }
    return 0;
}

int cmd_plan(const PlanArgs& a)
{
    CostModel model;
    if (!a.common.config.empty()) {
        require_exists(a.common.config, "config");
        model = cost_model_from_json(read_json_file(a.common.config));
    }
    model.kernel = a.kernel;
    model.attention = attention_from_string(a.attention);
    model.validate();
    PlanOptions options;
    if (!a.grid.empty()) return plan_grid(a, model, options);

    if (a.in.empty() || a.target.empty()) throw Error("plan needs --in NxD and --out NxD (or --grid LMIN:LMAX)");
    const auto backbone = backbone_from_string(a.backbone);
    const auto input = parse_shape(a.in);
    const auto output = parse_shape(a.target);

    Json doc;
    if (a.hierarchical) {
        // --in is (n_e, n_tpe) with --d the token width; --out is the latent.
        const auto h = hierarchical_plan(input.n, input.d, a.d, {output.n, output.d}, backbone, options);
        print_plan(h.text_plan);
        print_plan(h.event_plan);
        const auto cost = analyze(h, model);
        doc = {{"text_plan", plan_document(h.text_plan, model)},
               {"event_plan", plan_document(h.event_plan, model)},
               {"cost", {{"params", cost.params}, {"flops", cost.flops}}},
               {"compression_rate", compression_rate(HierInput{input.n, input.d, a.d}, output.n * output.d)}};
    } else {
        const auto plan = backbone == Backbone::CNN ? cnn_plan(input, output) : transformer_plan(input, output, a.layers);
        const auto defects = validate_plan(plan);
        if (!defects.empty()) throw Error("plan does not validate: " + defects.front().message);
        print_plan(plan);
        doc = plan_document(plan, model);
        doc["compression_rate"] = compression_rate(FlatInput{input.n, input.d}, output.n * output.d);
        std::cout << "params " << doc["cost"]["params"] << "  flops " << doc["cost"]["flops"] << "  compression x"
                  << doc["compression_rate"] << "\n";
    }
    if (!a.out_dir.empty()) {
        fs::create_directories(a.out_dir);
        Run run("plan", a.out_dir);
        run.config() = {{"backbone", a.backbone}, {"in", a.in},         {"out", a.target},
                        {"layers", a.layers},     {"hierarchical", a.hierarchical}, {"cost_model", to_json(model)}};
        run.write_json("plan.json", doc);
        run.finish();
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
    Common common;
    std::string plan;
    int kernel = 5;
    std::string attention = "full";
};

int cmd_analyze(const AnalyzeArgs& a)
{
    require_exists(a.plan, "--plan");
    CostModel model;
    if (!a.common.config.empty()) {
        require_exists(a.common.config, "config");
        model = cost_model_from_json(read_json_file(a.common.config));
    }
    model.kernel = a.kernel;
    model.attention = attention_from_string(a.attention);
    model.validate();

    Json j = read_json_file(a.plan);
    // Accept the plan command's document (which carries trace/cost/decoder) or a bare plan.
    j.erase("decoder");
    j.erase("compression_rate");
    const auto plan = layer_plan_from_json(j);
    const auto defects = validate_plan(plan);

    Json report{{"plan", to_json(plan)}, {"cost_model", to_json(model)}};
    Json defect_json = Json::array();
    for (const auto& d : defects) defect_json.push_back({{"layer", d.layer ? Json(*d.layer) : Json(nullptr)}, {"message", d.message}});
    report["defects"] = defect_json;
    if (defects.empty()) {
        const auto cost = analyze(plan, model);
        report["trace"] = to_json(propagate_shapes(plan, plan.input));
        report["params"] = cost.params;
        report["flops"] = cost.flops;
    }
    std::cout << report.dump(2) << "\n";
    if (!a.common.out.empty()) {
        Run run("analyze", require_dir(a.common.out));
        run.input("plan", a.plan);
        run.config() = to_json(model);
        run.write_json("analysis.json", report);
        run.finish();
    }
    if (!defects.empty()) {
        std::cerr << "error: plan has " << defects.size() << " defect(s): " << defects.front().message << "\n";
        return 1;
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct QuantizeArgs {
    Common common;
    std::string latent;
    std::string codebook;
    std::size_t codes = 64;
    double decay = 0.99;
    int ema_steps = 0;
};

int cmd_quantize(const QuantizeArgs& a)
{
    require_exists(a.latent, "--latent");
    const auto z = matrix_from_json(read_json_file(a.latent));
    if (z.cols % kPiecesPerFiber != 0) {
        throw Error("latent channel dim " + std::to_string(z.cols) + " is not divisible by 4");
    }
    const auto dir = require_dir(a.common.out);
    const std::uint64_t seed = a.common.seed.value_or(0);
    Run run("quantize", dir);
    run.input("latent", a.latent);
    run.seed(seed);

    std::optional<Codebook> cb;
    if (!a.codebook.empty()) {
        require_exists(a.codebook, "--codebook");
        run.input("codebook", a.codebook);
        cb = codebook_from_json(read_json_file(a.codebook));
    } else {
        if (a.codes < 1) throw Error("--codes must be >= 1");
        Rng rng(seed);
        cb = Codebook::random(a.codes, z.cols / kPiecesPerFiber, a.decay, rng);
    }
    run.config() = {{"codes", cb->size()}, {"width", cb->width()}, {"decay", cb->decay()}, {"ema_steps", a.ema_steps}};

    auto result = quantize(z, *cb);
    for (int step = 0; step < a.ema_steps; ++step) {
        cb = ema_update(*cb, assignments_from(z, result));
        result = quantize(z, *cb);
    }
    run.write_json("quantized.json",
                   {{"indices", result.indices}, {"z_q", to_json(result.z_q)}, {"commitment_distance", result.commitment_distance}});
    run.write_json("codebook.json", to_json(*cb));
    run.finish();
    std::cout << "quantized " << z.rows << " fibers into " << result.indices.size()
              << " codes, commitment distance " << result.commitment_distance << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct AuditArgs {
    Common common;
    std::string real;
    std::string generated;
    std::string vocab;
};

int cmd_audit(const AuditArgs& a)
{
    require_exists(a.real, "--real");
    require_exists(a.generated, "--generated");
    const auto dir = require_dir(a.common.out);
    const auto real = load_corpus(a.real);
    Run run("audit", dir);
    run.input("real", a.real);
    run.input("generated", a.generated);

    Vocabulary vocab;
    if (!a.vocab.empty()) {
        require_exists(a.vocab, "--vocab");
        run.input("vocab", a.vocab);
        vocab = Vocabulary::from_text(read_file(a.vocab));
    } else {
        if (!fs::is_directory(a.generated)) throw Error("--vocab is required when --generated is a stream file");
        vocab = Vocabulary::build(corpus_texts(real));
    }
    const auto triples = build_triples(real, vocab);

    std::vector<Sample> samples;
    if (fs::is_directory(a.generated)) {
        const SerializerConfig cfg;
        if (vocab.timegap_tokens() != cfg.timegap_tokens()) throw Error("vocabulary timegap tokens do not match the serializer");
        samples = samples_from_corpus(load_corpus(a.generated), vocab, cfg);
    } else {
        const auto hints = triples.hints();
        for (const auto& s : streams_from_jsonl(read_file(a.generated))) samples.push_back(detokenize_events(s, vocab, hints));
    }
    const auto report = score(samples, triples, vocab);
    const auto j = to_json(report);
    run.write_json("audit.json", j);
    run.finish();
    std::cout << "RCE " << format_ratio(report.rce) << "  RUE " << format_ratio(report.rue) << "  RCS "
              << format_ratio(report.rcs) << "\n";
    return 0;
}

// ---------------------------------------------------------------------------

struct PrivacyArgs {
    Common common;
    std::string train, heldout, synthetic;
    std::size_t n_r = 100;
    std::vector<double> thresholds;
};

std::vector<std::vector<TokenId>> records_from(const std::string& path)
{
    std::vector<std::vector<TokenId>> out;
    for (const auto& s : streams_from_jsonl(read_file(path))) out.push_back(s.tokens);
    return out;
}

int cmd_privacy(const PrivacyArgs& a)
{
    require_exists(a.train, "--train");
    require_exists(a.heldout, "--heldout");
    require_exists(a.synthetic, "--synthetic");
    const auto dir = require_dir(a.common.out);
    AttackConfig cfg;
    cfg.n_r = a.n_r;
    cfg.seed = a.common.seed.value_or(0);
    cfg.thresholds = a.thresholds.empty() ? std::vector<double>{0.0} : a.thresholds;
    std::sort(cfg.thresholds.begin(), cfg.thresholds.end());

    Run run("privacy", dir);
    run.input("train", a.train);
    run.input("heldout", a.heldout);
    run.input("synthetic", a.synthetic);
    run.seed(cfg.seed);
    run.config() = {{"n_r", cfg.n_r}, {"thresholds", cfg.thresholds}};
    const auto report = membership_attack(records_from(a.train), records_from(a.heldout), records_from(a.synthetic), cfg);
    run.write_json("privacy.json", to_json(report));
    run.write_text("privacy.csv", privacy_csv(report));
    run.finish();
    std::cout << privacy_csv(report);
    return 0;
}

// ---------------------------------------------------------------------------

struct MetricsArgs {
    Common common;
    std::string reference, hypothesis, scores;
    bool include_pads = false;
};

int cmd_metrics(const MetricsArgs& a)
{
    if (a.scores.empty() && (a.reference.empty() || a.hypothesis.empty())) {
        throw Error("metrics needs --reference and --hypothesis, or --scores");
    }
    Json report = Json::object();
    std::vector<std::pair<std::string, std::string>> inputs;
    if (!a.reference.empty() || !a.hypothesis.empty()) {
        require_exists(a.reference, "--reference");
        require_exists(a.hypothesis, "--hypothesis");
        const auto ref = streams_from_jsonl(read_file(a.reference));
        const auto hyp = streams_from_jsonl(read_file(a.hypothesis));
        if (ref.size() != hyp.size()) throw Error("reference and hypothesis hold different stream counts");
        std::vector<TokenId> all_ref, all_hyp;
        Json per_stream = Json::array();
        for (std::size_t i = 0; i < ref.size(); ++i) {
            const auto acc = token_accuracy(ref[i], hyp[i], a.include_pads);
            per_stream.push_back(acc ? Json(*acc) : Json(nullptr));
            all_ref.insert(all_ref.end(), ref[i].tokens.begin(), ref[i].tokens.end());
            all_hyp.insert(all_hyp.end(), hyp[i].tokens.begin(), hyp[i].tokens.end());
        }
        const auto pooled = token_accuracy(std::span<const TokenId>(all_ref), std::span<const TokenId>(all_hyp), a.include_pads);
        report["token_accuracy"] = pooled ? Json(*pooled) : Json(nullptr);
        report["token_accuracy_per_stream"] = per_stream;
        report["include_pads"] = a.include_pads;
        inputs.emplace_back("reference", a.reference);
        inputs.emplace_back("hypothesis", a.hypothesis);
    }
    if (!a.scores.empty()) {
        require_exists(a.scores, "--scores");
        std::vector<double> s;
        std::vector<int> y;
        std::istringstream in(read_file(a.scores));
        std::size_t line_no = 0;
        for (std::string line; std::getline(in, line);) {
            ++line_no;
            if (line.empty() || line == "score,label") continue;
            const auto parts = split(line, ',');
            try {
                if (parts.size() != 2) throw Error("expected score,label");
                s.push_back(std::stod(parts[0]));
                y.push_back(std::stoi(parts[1]));
            } catch (const std::exception& e) {
                throw Error(a.scores + " line " + std::to_string(line_no) + ": " + e.what());
            }
        }
        report["auroc"] = auroc(s, y);
        report["n"] = s.size();
        inputs.emplace_back("scores", a.scores);
    }
    std::cout << report.dump(2) << "\n";
    if (!a.common.out.empty()) {
        Run run("metrics", require_dir(a.common.out));
        for (const auto& [label, path] : inputs) run.input(label, path);
        run.config() = {{"include_pads", a.include_pads}};
        run.write_json("metrics.json", report);
        run.finish();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"ehrenc: EHR serialization, encoder planning, and synthetic-data audits"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic corpus");
    add_common(gen_cmd, gen.common);

    LoadArgs load;
    auto* load_cmd = app.add_subcommand("load", "Load and validate a corpus directory");
    add_common(load_cmd, load.common);
    load_cmd->add_option("--corpus", load.corpus, "Corpus directory")->required();
    load_cmd->add_option("--window-hours", load.window, "Override the observation window");
    load_cmd->add_option("--min-events", load.min_events, "Override the minimum event count");

    SerializeArgs ser;
    auto* ser_cmd = app.add_subcommand("serialize", "Tokenize a corpus into hierarchical / flattened streams");
    add_common(ser_cmd, ser.common);
    ser_cmd->add_option("--corpus", ser.corpus, "Corpus directory")->required();
    ser_cmd->add_option("--vocab", ser.vocab, "Existing vocabulary file (built from the corpus otherwise)");
    ser_cmd->add_option("--layout", ser.layout, "hierarchical, flattened or both");
    ser_cmd->add_option("--min-count", ser.min_count, "Minimum word count for the built vocabulary");

    PlanArgs plan;
    auto* plan_cmd = app.add_subcommand("plan", "Build encoder/decoder layer plans or sweep the latent grid");
    add_common(plan_cmd, plan.common, false);
    plan_cmd->add_option("--backbone", plan.backbone, "cnn or transformer");
    plan_cmd->add_option("--in", plan.in, "Input shape NxD");
    plan_cmd->add_option("--out", plan.target, "Output shape NxD");
    plan_cmd->add_option("--layers", plan.layers, "Transformer layer count");
    plan_cmd->add_option("--grid", plan.grid, "Sweep latent sizes LMIN:LMAX");
    plan_cmd->add_flag("--hierarchical", plan.hierarchical, "Two-stage plan; --in is n_e x n_tpe");
    plan_cmd->add_option("--n-e", plan.n_e, "Events per patient (grid)");
    plan_cmd->add_option("--n-tpe", plan.n_tpe, "Tokens per event (grid)");
    plan_cmd->add_option("--n-t", plan.n_t, "Flattened length (grid)");
    plan_cmd->add_option("--d", plan.d, "Token embedding width");
    plan_cmd->add_option("--kernel", plan.kernel, "Convolution kernel width");
    plan_cmd->add_option("--attention", plan.attention, "full or linear");
    plan_cmd->add_option("--out-dir", plan.out_dir, "Directory for plan.json / grid.csv and manifest");

    AnalyzeArgs an;
    auto* an_cmd = app.add_subcommand("analyze", "Shape trace and cost of a plan document");
    add_common(an_cmd, an.common);
    an_cmd->add_option("--plan", an.plan, "Plan JSON")->required();
    an_cmd->add_option("--kernel", an.kernel, "Convolution kernel width");
    an_cmd->add_option("--attention", an.attention, "full or linear");

    QuantizeArgs qa;
    auto* q_cmd = app.add_subcommand("quantize", "Vector-quantize a latent matrix");
    add_common(q_cmd, qa.common);
    q_cmd->add_option("--latent", qa.latent, "Latent matrix JSON (rows of c values)")->required();
    q_cmd->add_option("--codebook", qa.codebook, "Codebook JSON (random when omitted)");
    q_cmd->add_option("--codes", qa.codes, "Codebook size K for a random codebook");
    q_cmd->add_option("--decay", qa.decay, "EMA decay for a random codebook");
    q_cmd->add_option("--ema-steps", qa.ema_steps, "EMA refinement steps on the given latent");

    AuditArgs au;
    auto* au_cmd = app.add_subcommand("audit", "Score generated data against triples from real data");
    add_common(au_cmd, au.common);
    au_cmd->add_option("--real", au.real, "Real corpus directory")->required();
    au_cmd->add_option("--generated", au.generated, "Generated corpus directory or token-stream JSONL")->required();
    au_cmd->add_option("--vocab", au.vocab, "Vocabulary the generated streams use");

    PrivacyArgs pr;
    auto* pr_cmd = app.add_subcommand("privacy", "Hamming-distance membership inference attack");
    add_common(pr_cmd, pr.common);
    pr_cmd->add_option("--train", pr.train, "Training streams JSONL")->required();
    pr_cmd->add_option("--heldout", pr.heldout, "Held-out streams JSONL")->required();
    pr_cmd->add_option("--synthetic", pr.synthetic, "Synthetic streams JSONL")->required();
    pr_cmd->add_option("--n-r", pr.n_r, "Records sampled from each of train and held-out");
    pr_cmd->add_option("--threshold", pr.thresholds, "Normalized Hamming threshold (repeatable)")->delimiter(',');

    MetricsArgs me;
    auto* me_cmd = app.add_subcommand("metrics", "Token accuracy and AUROC");
    add_common(me_cmd, me.common);
    me_cmd->add_option("--reference", me.reference, "Reference streams JSONL");
    me_cmd->add_option("--hypothesis", me.hypothesis, "Hypothesis streams JSONL");
    me_cmd->add_flag("--include-pads", me.include_pads, "Count padding positions");
    me_cmd->add_option("--scores", me.scores, "CSV of score,label rows");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (gen_cmd->parsed()) return cmd_gen(gen);
        if (load_cmd->parsed()) return cmd_load(load);
        if (ser_cmd->parsed()) return cmd_serialize(ser);
        if (plan_cmd->parsed()) return cmd_plan(plan);
        if (an_cmd->parsed()) return cmd_analyze(an);
        if (q_cmd->parsed()) return cmd_quantize(qa);
        if (au_cmd->parsed()) return cmd_audit(au);
        if (pr_cmd->parsed()) return cmd_privacy(pr);
        if (me_cmd->parsed()) return cmd_metrics(me);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
