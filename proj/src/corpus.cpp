#include "ehrenc/corpus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ehrenc/fileio.hpp"

namespace ehrenc {

using json = nlohmann::json;

std::string_view to_string(ColumnType t)
{
    switch (t) {
    case ColumnType::Numeric: return "numeric";
    case ColumnType::Text: return "text";
    case ColumnType::Itemized: return "itemized";
    }
    return "text";
}

ColumnType column_type_from_string(std::string_view s)
{
    if (s == "numeric") return ColumnType::Numeric;
    if (s == "text") return ColumnType::Text;
    if (s == "itemized") return ColumnType::Itemized;
    throw Error("unknown column type '" + std::string(s) + "' (expected numeric, text or itemized)");
}

const TableDecl* Schema::find(std::string_view table) const
{
    for (const auto& t : tables) {
        if (t.name == table) return &t;
    }
    return nullptr;
}

std::size_t Corpus::event_count() const
{
    std::size_t n = 0;
    for (const auto& p : patients) n += p.events.size();
    return n;
}

std::string cell_text(const CellValue& cell)
{
    return std::visit(
        [](const auto& c) -> std::string {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, ItemizedCell>) {
                return c.code;
            } else {
                return c.text;
            }
        },
        cell);
}

namespace {

bool is_identifier(std::string_view s)
{
    if (s.empty()) return false;
    return split_words(s).size() == 1 && split_words(s)[0].size() == s.size();
}

void check_name(std::string_view what, std::string_view name)
{
    if (!is_identifier(name)) {
        throw Error(std::string(what) + " name '" + std::string(name) + "' must be non-empty and contain no whitespace");
    }
}

}  // namespace

void validate_corpus(const Corpus& corpus)
{
    for (const auto& t : corpus.schema.tables) {
        check_name("table", t.name);
        for (const auto& c : t.columns) check_name("column", c.name);
    }
    for (const auto& p : corpus.patients) {
        std::int64_t prev = 0;
        for (const auto& e : p.events) {
            check_name("table", e.table);
            if (e.columns.empty()) {
                throw Error("patient " + p.id + ": event in table '" + e.table + "' has no columns");
            }
            if (e.timestamp < 0) throw Error("patient " + p.id + ": negative timestamp");
            if (e.timestamp < prev) throw Error("patient " + p.id + ": events not chronological");
            prev = e.timestamp;
            for (const auto& [col, cell] : e.columns) {
                check_name("column", col);
                if (const auto* num = std::get_if<NumericCell>(&cell); num && !is_decimal(num->text)) {
                    throw Error("patient " + p.id + ": " + e.table + "." + col + " numeric cell '" + num->text +
                                "' is not a decimal");
                }
                if (const auto* item = std::get_if<ItemizedCell>(&cell);
                    item && !corpus.definitions.contains(item->code)) {
                    throw Error("patient " + p.id + ": " + e.table + "." + col + " itemized code '" + item->code +
                                "' has no definition");
                }
                if (const auto* text = std::get_if<TextCell>(&cell); text && split_words(text->text).empty()) {
                    throw Error("patient " + p.id + ": " + e.table + "." + col + " text cell is empty");
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------

GeneratorConfig default_generator_config()
{
    GeneratorConfig cfg;
    cfg.definitions = {
        {"51385", "Atypical Lymphocytes"},
        {"50912", "Creatinine"},
        {"50971", "Potassium"},
        {"51222", "Hemoglobin"},
        {"50983", "Sodium"},
        {"225158", "NaCl 0.9%"},
        {"220949", "Dextrose 5%"},
        {"225943", "Solution"},
    };

    TableSpec lab{"lab", {}};
    lab.columns.push_back({"itemid", ColumnType::Itemized, 0, 0, 0, {"51385", "50912", "50971", "51222", "50983"}});
    lab.columns.push_back({"value", ColumnType::Numeric, 0.0, 200.0, 1, {}});
    lab.columns.push_back({"valueuom", ColumnType::Text, 0, 0, 0, {"mg/dL", "mEq/L", "g/dL", "%"}});
    lab.columns.push_back({"flag", ColumnType::Text, 0, 0, 0, {"normal", "abnormal"}});

    TableSpec rx{"prescription", {}};
    rx.columns.push_back({"drug", ColumnType::Text, 0, 0, 0,
                          {"Normal Saline", "Heparin Sodium", "Potassium Chloride", "Insulin", "Furosemide"}});
    rx.columns.push_back({"dose_val_rx", ColumnType::Numeric, 0.5, 100.0, 1, {}});
    rx.columns.push_back({"route", ColumnType::Text, 0, 0, 0, {"IV", "PO", "SC"}});

    TableSpec inf{"infusion", {}};
    inf.columns.push_back({"itemid", ColumnType::Itemized, 0, 0, 0, {"225158", "220949", "225943"}});
    inf.columns.push_back({"amount", ColumnType::Numeric, 1.0, 1000.0, 2, {}});
    inf.columns.push_back({"rate", ColumnType::Numeric, 0.0, 250.0, 1, {}});
    inf.columns.push_back({"amountuom", ColumnType::Text, 0, 0, 0, {"ml", "mg"}});

    cfg.tables = {lab, rx, inf};
    cfg.labels = {{"mortality", 0.15}, {"los3", 0.4}};
    return cfg;
}

void validate_config(const GeneratorConfig& config)
{
    if (config.n_patients < 0) throw Error("n_patients must be >= 0");
    if (config.min_events < 0 || config.max_events < 0) throw Error("event counts must be >= 0");
    if (config.min_events > config.max_events) throw Error("min_events > max_events");
    if (!(config.observation_window_hours > 0)) throw Error("observation_window_hours must be positive");
    if (config.tables.empty()) throw Error("generator config declares no tables");
    std::set<std::string> names;
    for (const auto& t : config.tables) {
        check_name("table", t.name);
        if (!names.insert(t.name).second) throw Error("duplicate table '" + t.name + "'");
        if (t.columns.empty()) throw Error("table '" + t.name + "' declares no columns");
        for (const auto& c : t.columns) {
            check_name("column", c.name);
            switch (c.type) {
            case ColumnType::Numeric:
                if (!(c.min <= c.max)) throw Error(t.name + "." + c.name + ": numeric range min > max");
                if (c.decimals < 0 || c.decimals > 9) throw Error(t.name + "." + c.name + ": decimals out of [0, 9]");
                if (!std::isfinite(c.min) || !std::isfinite(c.max)) {
                    throw Error(t.name + "." + c.name + ": numeric range must be finite");
                }
                break;
            case ColumnType::Text:
                if (c.choices.empty()) throw Error(t.name + "." + c.name + ": text column needs choices");
                for (const auto& v : c.choices) {
                    if (split_words(v).empty() || v.find_first_of("\t\n\r") != std::string::npos) {
                        throw Error(t.name + "." + c.name + ": text choice must be non-blank without tabs/newlines");
                    }
                }
                break;
            case ColumnType::Itemized:
                if (c.choices.empty()) throw Error(t.name + "." + c.name + ": itemized column needs codes");
                for (const auto& code : c.choices) {
                    if (!config.definitions.contains(code)) {
                        throw Error(t.name + "." + c.name + ": code '" + code + "' has no definition");
                    }
                }
                break;
            }
        }
    }
    for (const auto& l : config.labels) {
        if (!(l.positive_rate >= 0.0 && l.positive_rate <= 1.0)) throw Error("label positive_rate outside [0, 1]");
    }
}

namespace {

std::string format_fixed(std::int64_t scaled, int decimals)
{
    const bool negative = scaled < 0;
    std::string digits = std::to_string(negative ? -scaled : scaled);
    if (decimals > 0) {
        if (static_cast<int>(digits.size()) <= decimals) {
            digits.insert(0, static_cast<std::size_t>(decimals) + 1 - digits.size(), '0');
        }
        digits.insert(digits.size() - static_cast<std::size_t>(decimals), ".");
    }
    return negative ? "-" + digits : digits;
}

std::string draw_numeric(const ColumnSpec& spec, Rng& rng)
{
    const double scale = std::pow(10.0, spec.decimals);
    const auto lo = static_cast<std::int64_t>(std::ceil(spec.min * scale - 1e-9));
    const auto hi = static_cast<std::int64_t>(std::floor(spec.max * scale + 1e-9));
    if (lo > hi) throw Error(spec.name + ": no value with " + std::to_string(spec.decimals) + " decimals in range");
    return format_fixed(rng.between(lo, hi), spec.decimals);
}

}  // namespace

Corpus generate_corpus(const GeneratorConfig& config)
{
    validate_config(config);
    Rng rng(config.seed);

    Corpus corpus;
    corpus.definitions = config.definitions;
    corpus.schema.observation_window_hours = config.observation_window_hours;
    for (const auto& t : config.tables) {
        TableDecl decl{t.name, {}};
        for (const auto& c : t.columns) decl.columns.push_back({c.name, c.type});
        corpus.schema.tables.push_back(std::move(decl));
    }

    const auto window_seconds = static_cast<std::int64_t>(config.observation_window_hours * 3600.0);
    for (std::int64_t i = 0; i < config.n_patients; ++i) {
        PatientRecord patient;
        std::ostringstream id;
        id << 'P' << std::setw(6) << std::setfill('0') << i;
        patient.id = id.str();

        const auto n_events = rng.between(config.min_events, config.max_events);
        for (std::int64_t e = 0; e < n_events; ++e) {
            const auto& table = config.tables[rng.below(config.tables.size())];
            EventRecord event;
            event.table = table.name;
            event.timestamp = window_seconds > 0 ? rng.between(0, window_seconds - 1) : 0;
            for (const auto& col : table.columns) {
                switch (col.type) {
                case ColumnType::Numeric:
                    event.columns.emplace_back(col.name, NumericCell{draw_numeric(col, rng)});
                    break;
                case ColumnType::Text:
                    event.columns.emplace_back(col.name, TextCell{col.choices[rng.below(col.choices.size())]});
                    break;
                case ColumnType::Itemized:
                    event.columns.emplace_back(col.name, ItemizedCell{col.choices[rng.below(col.choices.size())]});
                    break;
                }
            }
            patient.events.push_back(std::move(event));
        }
        std::stable_sort(patient.events.begin(), patient.events.end(),
                         [](const EventRecord& a, const EventRecord& b) { return a.timestamp < b.timestamp; });
        for (const auto& l : config.labels) patient.labels[l.task] = rng.unit() < l.positive_rate ? 1 : 0;

        if (static_cast<int>(patient.events.size()) >= corpus.schema.min_events) {
            corpus.patients.push_back(std::move(patient));
        }
    }
    return corpus;
}

// ---------------------------------------------------------------------------

Schema load_schema(const std::filesystem::path& file)
{
    const auto doc = json::parse(read_file(file), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) throw Error(file.string() + ": not a JSON object");
    Schema schema;
    try {
        schema.observation_window_hours = doc.value("observation_window_hours", 12.0);
        schema.min_events = doc.value("min_events", 5);
        for (const auto& t : doc.at("tables")) {
            TableDecl decl;
            decl.name = t.at("name").get<std::string>();
            check_name("table", decl.name);
            for (const auto& c : t.at("columns")) {
                ColumnDecl col{c.at("name").get<std::string>(), column_type_from_string(c.at("type").get<std::string>())};
                check_name("column", col.name);
                decl.columns.push_back(std::move(col));
            }
            if (decl.columns.empty()) throw Error("table '" + decl.name + "' declares no columns");
            schema.tables.push_back(std::move(decl));
        }
    } catch (const json::exception& e) {
        throw Error(file.string() + ": " + e.what());
    }
    return schema;
}

namespace {

std::vector<std::vector<std::string>> read_tsv(const std::filesystem::path& file)
{
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read_file(file));
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(split(line, '\t'));
    }
    return rows;
}

std::int64_t parse_timestamp(const std::string& s, const std::string& where)
{
    std::int64_t v = 0;
    std::size_t used = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty() || v < 0) {
        throw Error(where + ": timestamp_seconds '" + s + "' is not a non-negative integer");
    }
    return v;
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& dir, const LoadOptions& options)
{
    Corpus corpus;
    corpus.schema = load_schema(dir / "schema.json");
    if (options.observation_window_hours) corpus.schema.observation_window_hours = *options.observation_window_hours;
    if (options.min_events) corpus.schema.min_events = *options.min_events;

    const auto def_path = dir / "definitions.tsv";
    if (std::filesystem::exists(def_path)) {
        const auto rows = read_tsv(def_path);
        for (std::size_t r = 1; r < rows.size(); ++r) {
            if (rows[r].size() != 2) {
                throw Error(def_path.string() + " row " + std::to_string(r + 1) + ": expected code and description");
            }
            corpus.definitions[rows[r][0]] = rows[r][1];
        }
    }

    const auto window_seconds = static_cast<std::int64_t>(corpus.schema.observation_window_hours * 3600.0);
    std::map<std::string, PatientRecord> by_id;

    for (const auto& table : corpus.schema.tables) {
        const auto path = dir / (table.name + ".tsv");
        if (!std::filesystem::exists(path)) throw Error("missing table file " + path.string());
        const auto rows = read_tsv(path);
        if (rows.empty()) continue;

        const auto& header = rows[0];
        if (header.size() < 2 || header[0] != "patient_id" || header[1] != "timestamp_seconds") {
            throw Error(path.string() + ": header must start with patient_id, timestamp_seconds");
        }
        if (header.size() - 2 != table.columns.size()) {
            throw Error(path.string() + ": header declares " + std::to_string(header.size() - 2) +
                        " columns, schema declares " + std::to_string(table.columns.size()));
        }
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (header[c + 2] != table.columns[c].name) {
                throw Error(path.string() + ": header column '" + header[c + 2] + "' does not match schema column '" +
                            table.columns[c].name + "'");
            }
        }

        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto& row = rows[r];
            const std::string where = path.filename().string() + " row " + std::to_string(r + 1);
            if (row.size() != header.size()) {
                throw Error(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(row.size()) + " (unpaired column/cell)");
            }
            EventRecord event;
            event.table = table.name;
            event.timestamp = parse_timestamp(row[1], where);
            for (std::size_t c = 0; c < table.columns.size(); ++c) {
                const auto& decl = table.columns[c];
                const auto& raw = row[c + 2];
                if (split_words(raw).empty()) continue;  // missing value
                switch (decl.type) {
                case ColumnType::Numeric:
                    if (!is_decimal(raw)) {
                        throw Error(where + " column '" + decl.name + "': '" + raw + "' is not a decimal");
                    }
                    event.columns.emplace_back(decl.name, NumericCell{raw});
                    break;
                case ColumnType::Text:
                    event.columns.emplace_back(decl.name, TextCell{raw});
                    break;
                case ColumnType::Itemized:
                    if (!corpus.definitions.contains(raw)) {
                        throw Error(where + " column '" + decl.name + "': itemized code '" + raw +
                                    "' not in definitions");
                    }
                    event.columns.emplace_back(decl.name, ItemizedCell{raw});
                    break;
                }
            }
            if (event.columns.empty()) throw Error(where + ": row has no cells");
            if (event.timestamp >= window_seconds) continue;
            auto& patient = by_id[row[0]];
            patient.id = row[0];
            patient.events.push_back(std::move(event));
        }
    }

    const auto labels_path = dir / "labels.tsv";
    if (std::filesystem::exists(labels_path)) {
        const auto rows = read_tsv(labels_path);
        for (std::size_t r = 1; r < rows.size(); ++r) {
            if (rows[r].size() != 3) throw Error(labels_path.string() + " row " + std::to_string(r + 1) + ": expected 3 fields");
            auto it = by_id.find(rows[r][0]);
            if (it == by_id.end()) continue;
            try {
                it->second.labels[rows[r][1]] = std::stoi(rows[r][2]);
            } catch (const std::exception&) {
                throw Error(labels_path.string() + " row " + std::to_string(r + 1) + ": label is not an integer");
            }
        }
    }

    for (auto& [id, patient] : by_id) {
        std::stable_sort(patient.events.begin(), patient.events.end(),
                         [](const EventRecord& a, const EventRecord& b) { return a.timestamp < b.timestamp; });
        if (static_cast<int>(patient.events.size()) >= corpus.schema.min_events) {
            corpus.patients.push_back(std::move(patient));
        }
    }
    validate_corpus(corpus);
    return corpus;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir)
{
    validate_corpus(corpus);
    std::filesystem::create_directories(dir);

    json schema;
    schema["observation_window_hours"] = corpus.schema.observation_window_hours;
    schema["min_events"] = corpus.schema.min_events;
    schema["tables"] = json::array();
    for (const auto& t : corpus.schema.tables) {
        json cols = json::array();
        for (const auto& c : t.columns) cols.push_back({{"name", c.name}, {"type", to_string(c.type)}});
        schema["tables"].push_back({{"name", t.name}, {"columns", cols}});
    }
    write_file_atomic(dir / "schema.json", schema.dump(2) + "\n");

    auto check_field = [](const std::string& s) {
        if (s.find_first_of("\t\n\r") != std::string::npos) throw Error("cell '" + s + "' contains a tab or newline");
        return s;
    };

    std::string defs = "code\tdescription\n";
    for (const auto& [code, desc] : corpus.definitions) defs += check_field(code) + "\t" + check_field(desc) + "\n";
    write_file_atomic(dir / "definitions.tsv", defs);

    for (const auto& t : corpus.schema.tables) {
        std::string out = "patient_id\ttimestamp_seconds";
        for (const auto& c : t.columns) out += "\t" + c.name;
        out += "\n";
        for (const auto& p : corpus.patients) {
            for (const auto& e : p.events) {
                if (e.table != t.name) continue;
                out += check_field(p.id) + "\t" + std::to_string(e.timestamp);
                for (const auto& c : t.columns) {
                    out += "\t";
                    for (const auto& [name, cell] : e.columns) {
                        if (name == c.name) {
                            out += check_field(cell_text(cell));
                            break;
                        }
                    }
                }
                out += "\n";
            }
        }
        write_file_atomic(dir / (t.name + ".tsv"), out);
    }

    std::string labels = "patient_id\ttask\tlabel\n";
    for (const auto& p : corpus.patients) {
        for (const auto& [task, value] : p.labels) labels += p.id + "\t" + task + "\t" + std::to_string(value) + "\n";
    }
    write_file_atomic(dir / "labels.tsv", labels);
}

// ---------------------------------------------------------------------------

namespace {

std::array<std::size_t, 3> allocate(std::size_t n, const SplitRatios& r)
{
    const std::array<double, 3> shares{n * r.train, n * r.valid, n * r.test};
    std::array<std::size_t, 3> counts{};
    std::array<double, 3> frac{};
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        counts[i] = static_cast<std::size_t>(std::floor(shares[i] + 1e-9));
        frac[i] = shares[i] - static_cast<double>(counts[i]);
        assigned += counts[i];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t k = 0; assigned < n; k = (k + 1) % 3) {
        if (shares[order[k]] <= 0.0) continue;
        ++counts[order[k]];
        ++assigned;
    }
    return counts;
}

}  // namespace

CohortSplit split_cohort(const Corpus& corpus, SplitRatios ratios, std::uint64_t seed,
                         const std::optional<std::string>& stratify_on)
{
    if (ratios.train < 0 || ratios.valid < 0 || ratios.test < 0) throw Error("split ratios must be non-negative");
    if (std::abs(ratios.train + ratios.valid + ratios.test - 1.0) > 1e-9) throw Error("split ratios must sum to 1");

    std::map<int, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < corpus.patients.size(); ++i) {
        int key = 0;
        if (stratify_on) {
            const auto& labels = corpus.patients[i].labels;
            auto it = labels.find(*stratify_on);
            if (it == labels.end()) {
                throw Error("patient " + corpus.patients[i].id + " has no label for task '" + *stratify_on + "'");
            }
            key = it->second;
        }
        strata[key].push_back(i);
    }

    Rng rng(seed);
    std::array<std::vector<std::size_t>, 3> members;
    for (auto& [label, indices] : strata) {
        rng.shuffle(indices);
        const auto counts = allocate(indices.size(), ratios);
        std::size_t pos = 0;
        for (std::size_t s = 0; s < 3; ++s) {
            for (std::size_t k = 0; k < counts[s]; ++k) members[s].push_back(indices[pos++]);
        }
    }

    std::array<Corpus, 3> out;
    for (std::size_t s = 0; s < 3; ++s) {
        std::sort(members[s].begin(), members[s].end());
        out[s].definitions = corpus.definitions;
        out[s].schema = corpus.schema;
        for (auto i : members[s]) out[s].patients.push_back(corpus.patients[i]);
    }
    return {std::move(out[0]), std::move(out[1]), std::move(out[2])};
}

}  // namespace ehrenc
