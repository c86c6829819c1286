#include "ehrenc/io.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "ehrenc/fileio.hpp"

namespace ehrenc {

namespace {

void reject_unknown(const Json& j, std::initializer_list<std::string_view> allowed, std::string_view what)
{
    if (!j.is_object()) throw Error(std::string(what) + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw Error("unknown key '" + key + "' in " + std::string(what));
        }
    }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback)
{
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("bad value for '") + key + "': " + e.what());
    }
}

template <typename T>
T require(const Json& j, const char* key)
{
    if (!j.contains(key)) throw Error(std::string("missing key '") + key + "'");
    return get_or<T>(j, key, T{});
}

std::string_view layout_name(Layout l) { return l == Layout::Hierarchical ? "hierarchical" : "flattened"; }

Layout layout_from_name(std::string_view s)
{
    if (s == "hierarchical") return Layout::Hierarchical;
    if (s == "flattened") return Layout::Flattened;
    throw Error("unknown layout '" + std::string(s) + "'");
}

Json to_json(const ColumnSpec& c)
{
    Json j{{"name", c.name}, {"type", to_string(c.type)}};
    if (c.type == ColumnType::Numeric) {
        j["min"] = c.min;
        j["max"] = c.max;
        j["decimals"] = c.decimals;
    } else {
        j["choices"] = c.choices;
    }
    return j;
}

ColumnSpec column_spec_from_json(const Json& j)
{
    reject_unknown(j, {"name", "type", "min", "max", "decimals", "choices"}, "column spec");
    ColumnSpec c;
    c.name = require<std::string>(j, "name");
    c.type = column_type_from_string(require<std::string>(j, "type"));
    c.min = get_or(j, "min", 0.0);
    c.max = get_or(j, "max", 0.0);
    c.decimals = get_or(j, "decimals", 1);
    c.choices = get_or(j, "choices", std::vector<std::string>{});
    return c;
}

}  // namespace

GeneratorConfig generator_config_from_json(const Json& j)
{
    reject_unknown(j,
                   {"seed", "n_patients", "tables", "definitions", "min_events", "max_events", "observation_window_hours",
                    "labels"},
                   "generator config");
    GeneratorConfig c = default_generator_config();
    c.seed = get_or(j, "seed", c.seed);
    c.n_patients = get_or(j, "n_patients", c.n_patients);
    c.min_events = get_or(j, "min_events", c.min_events);
    c.max_events = get_or(j, "max_events", c.max_events);
    c.observation_window_hours = get_or(j, "observation_window_hours", c.observation_window_hours);
    if (j.contains("tables")) {
        c.tables.clear();
        for (const auto& t : j.at("tables")) {
            reject_unknown(t, {"name", "columns"}, "table spec");
            TableSpec spec{require<std::string>(t, "name"), {}};
            for (const auto& col : t.at("columns")) spec.columns.push_back(column_spec_from_json(col));
            c.tables.push_back(std::move(spec));
        }
    }
    if (j.contains("definitions")) c.definitions = j.at("definitions").get<DefinitionTable>();
    if (j.contains("labels")) {
        c.labels.clear();
        for (const auto& l : j.at("labels")) {
            reject_unknown(l, {"task", "positive_rate"}, "label spec");
            c.labels.push_back({require<std::string>(l, "task"), get_or(l, "positive_rate", 0.5)});
        }
    }
    validate_config(c);
    return c;
}

Json to_json(const GeneratorConfig& c)
{
    Json tables = Json::array();
    for (const auto& t : c.tables) {
        Json cols = Json::array();
        for (const auto& col : t.columns) cols.push_back(to_json(col));
        tables.push_back({{"name", t.name}, {"columns", cols}});
    }
    Json labels = Json::array();
    for (const auto& l : c.labels) labels.push_back({{"task", l.task}, {"positive_rate", l.positive_rate}});
    return {{"seed", c.seed},
            {"n_patients", c.n_patients},
            {"min_events", c.min_events},
            {"max_events", c.max_events},
            {"observation_window_hours", c.observation_window_hours},
            {"tables", tables},
            {"definitions", c.definitions},
            {"labels", labels}};
}

Json to_json(const SerializerConfig& c)
{
    return {{"n_e", c.n_e}, {"n_tpe", c.n_tpe}, {"n_t", c.n_t}, {"timegap_minutes", c.timegap_minutes}};
}

SerializerConfig serializer_config_from_json(const Json& j)
{
    reject_unknown(j, {"n_e", "n_tpe", "n_t", "timegap_minutes"}, "serializer config");
    SerializerConfig c;
    c.n_e = get_or(j, "n_e", c.n_e);
    c.n_tpe = get_or(j, "n_tpe", c.n_tpe);
    c.n_t = get_or(j, "n_t", c.n_t);
    c.timegap_minutes = get_or(j, "timegap_minutes", c.timegap_minutes);
    c.validate();
    return c;
}

Json to_json(const TokenStream& s)
{
    Json j{{"patient_id", s.patient_id},
           {"layout", layout_name(s.layout)},
           {"rows", s.rows},
           {"cols", s.cols},
           {"tokens", s.tokens}};
    if (s.has_labels()) {
        std::vector<int> types;
        std::vector<std::int32_t> places;
        for (auto t : s.types) types.push_back(static_cast<int>(t));
        for (auto p : s.places) places.push_back(p.id());
        j["types"] = types;
        j["dpe"] = places;
    }
    if (s.layout == Layout::Flattened) {
        Json b = Json::array();
        for (const auto& [begin, end] : s.boundaries) b.push_back({begin, end});
        j["boundaries"] = b;
    }
    return j;
}

TokenStream stream_from_json(const Json& j)
{
    reject_unknown(j, {"patient_id", "layout", "rows", "cols", "tokens", "types", "dpe", "boundaries"}, "token stream");
    TokenStream s;
    s.patient_id = get_or<std::string>(j, "patient_id", "");
    s.layout = layout_from_name(get_or<std::string>(j, "layout", "flattened"));
    s.tokens = require<std::vector<TokenId>>(j, "tokens");
    s.rows = get_or<std::size_t>(j, "rows", s.layout == Layout::Flattened ? 1 : 0);
    s.cols = get_or<std::size_t>(j, "cols", s.rows == 0 ? 0 : s.tokens.size() / s.rows);
    constexpr int kMaxType = static_cast<int>(TokenType::Pad);
    for (int t : get_or(j, "types", std::vector<int>{})) {
        if (t < 0 || t > kMaxType) throw Error("token type id " + std::to_string(t) + " out of range");
        s.types.push_back(static_cast<TokenType>(t));
    }
    for (auto p : get_or(j, "dpe", std::vector<std::int32_t>{})) s.places.push_back(DigitPlace::from_id(p));
    for (const auto& b : get_or(j, "boundaries", Json::array())) {
        s.boundaries.emplace_back(b.at(0).get<std::size_t>(), b.at(1).get<std::size_t>());
    }
    s.validate();
    return s;
}

std::string streams_to_jsonl(const std::vector<TokenStream>& streams)
{
    std::string out;
    for (const auto& s : streams) {
        out += to_json(s).dump();
        out += '\n';
    }
    return out;
}

std::vector<TokenStream> streams_from_jsonl(std::string_view text)
{
    std::vector<TokenStream> out;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(stream_from_json(Json::parse(line)));
        } catch (const std::exception& e) {
            throw Error("stream line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

Json to_json(const LayerOp& op)
{
    return {{"kind", op_name(op.kind)}, {"factor", op.factor}, {"target", op.target}, {"label", describe(op)}};
}

LayerOp layer_op_from_json(const Json& j)
{
    reject_unknown(j, {"kind", "factor", "target", "label"}, "layer op");
    LayerOp op;
    op.kind = op_kind_from_name(require<std::string>(j, "kind"));
    op.factor = get_or<std::int64_t>(j, "factor", 1);
    op.target = get_or<std::int64_t>(j, "target", 0);
    return op;
}

namespace {

Json shape_json(Shape s) { return Json::array({s.n, s.d}); }

Shape shape_from(const Json& j)
{
    if (!j.is_array() || j.size() != 2) throw Error("shape must be a [n, d] array");
    return {j.at(0).get<std::int64_t>(), j.at(1).get<std::int64_t>()};
}

}  // namespace

Json to_json(const LayerPlan& plan)
{
    Json ops = Json::array();
    for (const auto& op : plan.ops) ops.push_back(to_json(op));
    return {{"backbone", to_string(plan.backbone)},
            {"direction", to_string(plan.direction)},
            {"input", shape_json(plan.input)},
            {"output", shape_json(plan.output)},
            {"ops", ops}};
}

LayerPlan layer_plan_from_json(const Json& j)
{
    reject_unknown(j, {"backbone", "direction", "input", "output", "ops", "trace", "cost"}, "layer plan");
    LayerPlan plan;
    plan.backbone = backbone_from_string(require<std::string>(j, "backbone"));
    const auto dir = get_or<std::string>(j, "direction", "encode");
    if (dir == to_string(Direction::Encode)) {
        plan.direction = Direction::Encode;
    } else if (dir == to_string(Direction::Decode)) {
        plan.direction = Direction::Decode;
    } else {
        throw Error("unknown direction '" + dir + "'");
    }
    plan.input = shape_from(j.at("input"));
    plan.output = shape_from(j.at("output"));
    for (const auto& op : j.at("ops")) plan.ops.push_back(layer_op_from_json(op));
    return plan;
}

Json to_json(const ShapeTrace& trace)
{
    Json steps = Json::array();
    steps.push_back({{"layer", 0}, {"op", "input"}, {"shape", to_string(trace.input)}});
    for (const auto& s : trace.steps) {
        steps.push_back({{"layer", s.index}, {"op", describe(s.op)}, {"shape", to_string(s.shape)}});
    }
    return steps;
}

Json to_json(const CostModel& m)
{
    return {{"kernel", m.kernel}, {"heads", m.heads}, {"ffn_multiplier", m.ffn_multiplier}, {"attention", to_string(m.attention)}};
}

CostModel cost_model_from_json(const Json& j)
{
    reject_unknown(j, {"kernel", "heads", "ffn_multiplier", "attention"}, "cost model");
    CostModel m;
    m.kernel = get_or(j, "kernel", m.kernel);
    m.heads = get_or(j, "heads", m.heads);
    m.ffn_multiplier = get_or(j, "ffn_multiplier", m.ffn_multiplier);
    if (j.contains("attention")) m.attention = attention_from_string(j.at("attention").get<std::string>());
    m.validate();
    return m;
}

Json to_json(const Matrix& m)
{
    Json rows = Json::array();
    for (std::size_t r = 0; r < m.rows; ++r) {
        const auto row = m.row(r);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    return rows;
}

Matrix matrix_from_json(const Json& j)
{
    if (!j.is_array()) throw Error("matrix must be an array of rows");
    if (j.empty()) return Matrix();
    const std::size_t cols = j.at(0).size();
    Matrix m(j.size(), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != cols) {
            throw Error("matrix row " + std::to_string(r) + " has " + std::to_string(j[r].size()) + " values, expected " +
                        std::to_string(cols));
        }
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
}

Json to_json(const Codebook& cb)
{
    return {{"K", cb.size()},
            {"width", cb.width()},
            {"decay", cb.decay()},
            {"entries", to_json(cb.entries())},
            {"counts", cb.counts()},
            {"sums", to_json(cb.sums())}};
}

Codebook codebook_from_json(const Json& j)
{
    reject_unknown(j, {"K", "width", "decay", "entries", "counts", "sums"}, "codebook");
    Matrix entries = matrix_from_json(j.at("entries"));
    const double decay = get_or(j, "decay", 0.99);
    if (j.contains("K") && j.at("K").get<std::size_t>() != entries.rows) throw Error("codebook K does not match its entries");
    if (j.contains("width") && j.at("width").get<std::size_t>() != entries.cols) {
        throw Error("codebook width does not match its entries");
    }
    if (j.contains("counts") || j.contains("sums")) {
        return Codebook(std::move(entries), require<std::vector<double>>(j, "counts"), matrix_from_json(j.at("sums")), decay);
    }
    return Codebook(std::move(entries), decay);
}

namespace {

Json optional_ratio(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

Json to_json(const AuditReport& r)
{
    Json defects = Json::object();
    for (auto d : {EventDefect::NotTableFirst, EventDefect::UnpairedColumn, EventDefect::UnknownTableColumn,
                   EventDefect::NumericOutOfRange, EventDefect::UnknownSubword}) {
        auto it = r.defects.find(d);
        defects[std::string(to_string(d))] = it == r.defects.end() ? 0 : it->second;
    }
    return {{"rce", optional_ratio(r.rce)},
            {"rue", optional_ratio(r.rue)},
            {"rcs", optional_ratio(r.rcs)},
            {"events", {{"total", r.total_events}, {"correct", r.correct_events}}},
            {"unique_events", {{"total", r.unique_events}, {"correct", r.correct_unique_events}}},
            {"samples", {{"total", r.total_samples}, {"correct", r.correct_samples}}},
            {"defects", defects}};
}

Json to_json(const PrivacyReport& r)
{
    Json pool = Json::array();
    for (const auto& p : r.pool) {
        pool.push_back({{"member", p.member}, {"source_index", p.source_index}, {"min_distance", p.min_distance}});
    }
    Json results = Json::array();
    for (const auto& t : r.results) {
        results.push_back({{"threshold", t.threshold},
                           {"precision", t.precision},
                           {"recall", t.recall},
                           {"flagged", t.flagged},
                           {"true_positives", t.true_positives},
                           {"flagged_records", t.flagged_records}});
    }
    return {{"pool", pool}, {"results", results}};
}

std::string privacy_csv(const PrivacyReport& r)
{
    std::ostringstream out;
    out.precision(17);
    out << "threshold,precision,recall\n";
    for (const auto& t : r.results) out << t.threshold << ',' << t.precision << ',' << t.recall << '\n';
    return out.str();
}

Json to_json(const RunManifest& m)
{
    return {{"command", m.command},
            {"version", kVersion},
            {"seed", m.seed},
            {"config", m.config},
            {"inputs", m.input_digests},
            {"outputs", m.outputs}};
}

std::string digest_path(const std::filesystem::path& path)
{
    namespace fs = std::filesystem;
    if (!fs::exists(path)) throw Error("cannot digest missing path: " + path.string());
    if (!fs::is_directory(path)) return sha256_hex(read_file(path));
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(path)) {
        if (entry.is_regular_file()) files.push_back(fs::relative(entry.path(), path));
    }
    std::sort(files.begin(), files.end());
    std::string combined;
    for (const auto& f : files) {
        combined += f.generic_string();
        combined += '\0';
        combined += sha256_hex(read_file(path / f));
        combined += '\n';
    }
    return sha256_hex(combined);
}

Json read_json_file(const std::filesystem::path& path)
{
    const auto text = read_file(path);
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

}  // namespace ehrenc
