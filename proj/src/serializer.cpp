#include "ehrenc/serializer.hpp"

#include <algorithm>

namespace ehrenc {

std::string_view to_string(TokenType t)
{
    switch (t) {
    case TokenType::TableName: return "table_name";
    case TokenType::ColumnName: return "column_name";
    case TokenType::ColumnValue: return "column_value";
    case TokenType::TimeGap: return "timegap";
    case TokenType::Start: return "start";
    case TokenType::End: return "end";
    case TokenType::Pad: return "pad";
    }
    return "pad";
}

std::string_view to_string(StructuralDefect d)
{
    switch (d) {
    case StructuralDefect::NotTableFirst: return "not_table_first";
    case StructuralDefect::UnpairedColumn: return "unpaired_column";
    }
    return "unpaired_column";
}

std::int32_t DigitPlace::id() const
{
    switch (kind_) {
    case Kind::NonDigit: return 0;
    case Kind::DecimalPoint: return 1;
    case Kind::Place: return place_ >= 0 ? 2 + 2 * place_ : 1 - 2 * place_;
    }
    return 0;
}

DigitPlace DigitPlace::from_id(std::int32_t id)
{
    if (id < 0) throw Error("negative digit-place id " + std::to_string(id));
    if (id == 0) return non_digit();
    if (id == 1) return decimal_point();
    if (id % 2 == 0) return place((id - 2) / 2);
    return place(-((id - 1) / 2));
}

std::vector<DigitPlace> digit_places(std::string_view decimal)
{
    if (!is_decimal(decimal)) throw Error("'" + std::string(decimal) + "' is not a decimal");
    const auto dot = decimal.find('.');
    const std::size_t int_end = dot == std::string_view::npos ? decimal.size() : dot;
    std::vector<DigitPlace> out;
    out.reserve(decimal.size());
    for (std::size_t i = 0; i < decimal.size(); ++i) {
        const char c = decimal[i];
        if (c == '-') {
            out.push_back(DigitPlace::non_digit());
        } else if (c == '.') {
            out.push_back(DigitPlace::decimal_point());
        } else if (i < int_end) {
            out.push_back(DigitPlace::place(static_cast<int>(int_end - 1 - i)));
        } else {
            out.push_back(DigitPlace::place(-static_cast<int>(i - int_end)));
        }
    }
    return out;
}

std::optional<std::string> reconstruct_decimal(const std::vector<std::string>& tokens,
                                               const std::vector<DigitPlace>& labels)
{
    if (tokens.size() != labels.size() || tokens.empty()) return std::nullopt;
    std::string out;
    for (const auto& t : tokens) out += t;
    if (!is_decimal(out) || out.size() != tokens.size()) return std::nullopt;
    if (digit_places(out) != labels) return std::nullopt;
    return out;
}

void SerializerConfig::validate() const
{
    if (!is_power_of_two(n_e) || !is_power_of_two(n_tpe) || !is_power_of_two(n_t)) {
        throw Error("n_e, n_tpe and n_t must be powers of two");
    }
    for (std::size_t i = 0; i < timegap_minutes.size(); ++i) {
        if (timegap_minutes[i] <= 0 || (i > 0 && timegap_minutes[i] <= timegap_minutes[i - 1])) {
            throw Error("time-gap boundaries must be positive and strictly increasing");
        }
    }
}

std::string textualize_cell(const CellValue& cell, const DefinitionTable& definitions)
{
    if (const auto* item = std::get_if<ItemizedCell>(&cell)) {
        auto it = definitions.find(item->code);
        if (it == definitions.end()) throw Error("itemized code '" + item->code + "' not in definitions");
        return join(split_words(casefold(it->second)), " ");
    }
    if (const auto* num = std::get_if<NumericCell>(&cell)) {
        if (!is_decimal(num->text)) throw Error("numeric cell '" + num->text + "' is not a decimal");
        std::string out;
        for (std::size_t i = 0; i < num->text.size(); ++i) {
            if (i) out += ' ';
            out += num->text[i];
        }
        return out;
    }
    return join(split_words(casefold(std::get<TextCell>(cell).text)), " ");
}

std::size_t quantize_timegap(std::int64_t delta_seconds, const std::vector<std::int64_t>& boundaries_minutes)
{
    if (delta_seconds < 0) throw Error("negative time gap " + std::to_string(delta_seconds) + " s");
    std::size_t bucket = 0;
    while (bucket < boundaries_minutes.size() && delta_seconds >= boundaries_minutes[bucket] * 60) ++bucket;
    return bucket;
}

namespace {

void append(SerializedEvent& out, const std::vector<TokenId>& ids, TokenType type)
{
    out.tokens.insert(out.tokens.end(), ids.begin(), ids.end());
    out.types.insert(out.types.end(), ids.size(), type);
    out.places.insert(out.places.end(), ids.size(), DigitPlace::non_digit());
}

}  // namespace

SerializedEvent serialize_event(const EventRecord& event, std::int64_t prev_timestamp, const Vocabulary& vocab,
                                const SerializerConfig& config, const DefinitionTable& definitions)
{
    if (event.columns.empty()) throw Error("event in table '" + event.table + "' has no columns");
    if (event.table.empty()) throw Error("event has an empty table name");
    if (vocab.timegap_tokens() != config.timegap_tokens()) {
        throw Error("vocabulary has " + std::to_string(vocab.timegap_tokens()) + " time-gap tokens, config needs " +
                    std::to_string(config.timegap_tokens()));
    }

    SerializedEvent out;
    append(out, vocab.tokenize(casefold(event.table)), TokenType::TableName);
    for (const auto& [name, cell] : event.columns) {
        append(out, vocab.tokenize(casefold(name)), TokenType::ColumnName);
        const auto value_ids = vocab.tokenize(textualize_cell(cell, definitions));
        const auto first = out.tokens.size();
        append(out, value_ids, TokenType::ColumnValue);
        if (const auto* num = std::get_if<NumericCell>(&cell)) {
            const auto places = digit_places(num->text);
            if (places.size() != value_ids.size()) throw Error("numeric cell '" + num->text + "' did not split per character");
            std::copy(places.begin(), places.end(), out.places.begin() + static_cast<std::ptrdiff_t>(first));
        }
    }
    const auto bucket = quantize_timegap(event.timestamp - prev_timestamp, config.timegap_minutes);
    out.tokens.push_back(vocab.timegap_token(bucket));
    out.types.push_back(TokenType::TimeGap);
    out.places.push_back(DigitPlace::non_digit());
    return out;
}

std::size_t TokenStream::payload_size() const
{
    return static_cast<std::size_t>(std::count_if(tokens.begin(), tokens.end(), [](TokenId t) { return t != kPadId; }));
}

void TokenStream::validate() const
{
    if (tokens.size() != rows * cols) throw Error("token stream '" + patient_id + "': token count != rows*cols");
    if (!types.empty() && types.size() != tokens.size()) throw Error("token stream '" + patient_id + "': type channel length mismatch");
    if (!places.empty() && places.size() != tokens.size()) throw Error("token stream '" + patient_id + "': digit-place channel length mismatch");
    if (layout == Layout::Flattened && rows != 1) throw Error("flattened token stream must have one row");
    for (const auto& [s, e] : boundaries) {
        if (s > e || e > tokens.size()) throw Error("token stream '" + patient_id + "': boundary out of range");
    }
}

TokenStream build_hierarchical(const PatientRecord& patient, const Vocabulary& vocab, const SerializerConfig& config,
                               const DefinitionTable& definitions)
{
    config.validate();
    if (patient.events.empty()) throw Error("patient " + patient.id + " has no events");

    TokenStream s;
    s.patient_id = patient.id;
    s.layout = Layout::Hierarchical;
    s.rows = static_cast<std::size_t>(config.n_e);
    s.cols = static_cast<std::size_t>(config.n_tpe);
    s.tokens.assign(s.rows * s.cols, kPadId);
    s.types.assign(s.rows * s.cols, TokenType::Pad);
    s.places.assign(s.rows * s.cols, DigitPlace::non_digit());

    const auto n_rows = std::min(patient.events.size(), s.rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
        const auto prev = r == 0 ? 0 : patient.events[r - 1].timestamp;
        const auto ev = serialize_event(patient.events[r], prev, vocab, config, definitions);
        const auto n = std::min(ev.tokens.size(), s.cols);
        std::copy_n(ev.tokens.begin(), n, s.tokens.begin() + static_cast<std::ptrdiff_t>(r * s.cols));
        std::copy_n(ev.types.begin(), n, s.types.begin() + static_cast<std::ptrdiff_t>(r * s.cols));
        std::copy_n(ev.places.begin(), n, s.places.begin() + static_cast<std::ptrdiff_t>(r * s.cols));
    }
    return s;
}

TokenStream flatten(const TokenStream& hier, std::int64_t n_t)
{
    if (hier.layout != Layout::Hierarchical) throw Error("flatten expects a hierarchical stream");
    if (n_t <= 0) throw Error("n_t must be positive");
    hier.validate();
    const bool labels = hier.has_labels();

    TokenStream s;
    s.patient_id = hier.patient_id;
    s.layout = Layout::Flattened;
    s.rows = 1;
    s.cols = static_cast<std::size_t>(n_t);

    for (std::size_t r = 0; r < hier.rows; ++r) {
        const auto start = s.tokens.size();
        for (std::size_t c = 0; c < hier.cols; ++c) {
            const auto i = r * hier.cols + c;
            if (hier.tokens[i] == kPadId) continue;
            s.tokens.push_back(hier.tokens[i]);
            if (labels) {
                s.types.push_back(hier.types[i]);
                s.places.push_back(hier.places.empty() ? DigitPlace::non_digit() : hier.places[i]);
            }
        }
        if (s.tokens.size() > start) s.boundaries.emplace_back(start, s.tokens.size());
    }

    if (s.tokens.size() > s.cols) {
        s.tokens.resize(s.cols);
        if (labels) {
            s.types.resize(s.cols);
            s.places.resize(s.cols);
        }
        std::erase_if(s.boundaries, [&](const auto& b) { return b.first >= s.cols; });
        for (auto& b : s.boundaries) b.second = std::min(b.second, s.cols);
    }
    const auto pad = s.cols - s.tokens.size();
    s.tokens.insert(s.tokens.end(), pad, kPadId);
    if (labels) {
        s.types.insert(s.types.end(), pad, TokenType::Pad);
        s.places.insert(s.places.end(), pad, DigitPlace::non_digit());
    }
    return s;
}

TokenStream build_flattened(const PatientRecord& patient, const Vocabulary& vocab, const SerializerConfig& config,
                            const DefinitionTable& definitions)
{
    return flatten(build_hierarchical(patient, vocab, config, definitions), config.n_t);
}

std::vector<std::string> corpus_texts(const Corpus& corpus)
{
    std::vector<std::string> texts;
    for (const auto& p : corpus.patients) {
        for (const auto& e : p.events) {
            texts.push_back(casefold(e.table));
            for (const auto& [name, cell] : e.columns) {
                texts.push_back(casefold(name));
                if (!std::holds_alternative<NumericCell>(cell)) {
                    texts.push_back(textualize_cell(cell, corpus.definitions));
                }
            }
        }
    }
    return texts;
}

// ---------------------------------------------------------------------------

std::string ReconstructedEvent::key() const
{
    std::string k = table;
    for (const auto& c : columns) {
        k += '\x1f';
        k += c.name;
        k += '\x1e';
        k += c.content;
    }
    k += '\x1d';
    if (timegap_bucket) k += std::to_string(*timegap_bucket);
    if (defect) {
        k += '\x1c';
        k += to_string(*defect);
    }
    return k;
}

StructureHints hints_from_schema(const Schema& schema)
{
    StructureHints h;
    for (const auto& t : schema.tables) {
        auto& cols = h.columns_by_table[casefold(t.name)];
        for (const auto& c : t.columns) cols.insert(casefold(c.name));
    }
    return h;
}

namespace {

void append_word(std::string& target, const std::string& piece, bool joins_previous)
{
    if (joins_previous && !target.empty()) {
        target += piece;
    } else {
        if (!target.empty()) target += ' ';
        target += piece;
    }
}

void set_defect(ReconstructedEvent& ev, StructuralDefect d)
{
    if (!ev.defect) ev.defect = d;
}

void finish(ReconstructedEvent& ev)
{
    if (ev.columns.empty()) set_defect(ev, StructuralDefect::UnpairedColumn);
    for (const auto& c : ev.columns) {
        if (c.content.empty() || c.name.empty()) set_defect(ev, StructuralDefect::UnpairedColumn);
    }
}

ReconstructedEvent parse_labelled(const TokenStream& s, const std::vector<std::size_t>& seg, const Vocabulary& vocab)
{
    ReconstructedEvent ev;
    std::optional<TokenType> prev;
    bool first = true;
    for (auto i : seg) {
        const auto id = s.tokens[i];
        const auto type = s.types[i];
        if (type == TokenType::Pad || type == TokenType::Start || type == TokenType::End) continue;
        if (type == TokenType::TimeGap) {
            ev.timegap_bucket = vocab.timegap_bucket(id);
            prev = type;
            continue;
        }
        if (first && type != TokenType::TableName) set_defect(ev, StructuralDefect::NotTableFirst);
        first = false;
        const auto piece = vocab.surface(id);
        const bool cont = vocab.is_continuation(id);
        switch (type) {
        case TokenType::TableName:
            if (!ev.columns.empty()) {
                set_defect(ev, StructuralDefect::UnpairedColumn);
            } else {
                append_word(ev.table, piece, cont && prev == TokenType::TableName);
            }
            break;
        case TokenType::ColumnName:
            if (prev != TokenType::ColumnName) ev.columns.emplace_back();
            append_word(ev.columns.back().name, piece, cont && prev == TokenType::ColumnName);
            break;
        case TokenType::ColumnValue:
            if (ev.columns.empty()) {
                set_defect(ev, StructuralDefect::UnpairedColumn);
            } else {
                append_word(ev.columns.back().content, piece, cont && prev == TokenType::ColumnValue);
            }
            break;
        default:
            break;
        }
        prev = type;
    }
    finish(ev);
    return ev;
}

ReconstructedEvent parse_inferred(const TokenStream& s, const std::vector<std::size_t>& seg, const Vocabulary& vocab,
                                  const StructureHints& hints)
{
    ReconstructedEvent ev;
    std::vector<std::string> words;
    for (auto i : seg) {
        const auto id = s.tokens[i];
        if (id == kPadId || id == kStartId || id == kEndId) continue;
        if (auto b = vocab.timegap_bucket(id)) {
            ev.timegap_bucket = b;
            continue;
        }
        if (vocab.is_continuation(id) && !words.empty()) {
            words.back() += vocab.surface(id);
        } else {
            words.push_back(vocab.surface(id));
        }
    }
    if (words.empty()) {
        set_defect(ev, StructuralDefect::NotTableFirst);
        return ev;
    }

    ev.table = words.front();
    std::set<std::string> all_columns;
    const std::set<std::string>* columns = nullptr;
    if (auto it = hints.columns_by_table.find(ev.table); it != hints.columns_by_table.end()) {
        columns = &it->second;
    } else {
        set_defect(ev, StructuralDefect::NotTableFirst);
        for (const auto& [t, cols] : hints.columns_by_table) all_columns.insert(cols.begin(), cols.end());
        columns = &all_columns;
    }
    for (std::size_t w = 1; w < words.size(); ++w) {
        if (columns->contains(words[w])) {
            ev.columns.push_back({words[w], {}});
        } else if (ev.columns.empty()) {
            set_defect(ev, StructuralDefect::UnpairedColumn);
        } else {
            append_word(ev.columns.back().content, words[w], false);
        }
    }
    finish(ev);
    return ev;
}

}  // namespace

std::vector<ReconstructedEvent> detokenize_events(const TokenStream& stream, const Vocabulary& vocab,
                                                  const StructureHints& hints)
{
    stream.validate();
    std::vector<std::vector<std::size_t>> segments;
    if (stream.layout == Layout::Hierarchical) {
        for (std::size_t r = 0; r < stream.rows; ++r) {
            std::vector<std::size_t> seg;
            for (std::size_t c = 0; c < stream.cols; ++c) {
                if (stream.tokens[r * stream.cols + c] != kPadId) seg.push_back(r * stream.cols + c);
            }
            if (!seg.empty()) segments.push_back(std::move(seg));
        }
    } else if (!stream.boundaries.empty()) {
        for (const auto& [b, e] : stream.boundaries) {
            std::vector<std::size_t> seg;
            for (auto i = b; i < e; ++i) seg.push_back(i);
            if (!seg.empty()) segments.push_back(std::move(seg));
        }
    } else {
        std::vector<std::size_t> seg;
        for (std::size_t i = 0; i < stream.tokens.size(); ++i) {
            const auto id = stream.tokens[i];
            if (id == kPadId) continue;
            seg.push_back(i);
            if (vocab.timegap_bucket(id)) segments.push_back(std::exchange(seg, {}));
        }
        if (!seg.empty()) segments.push_back(std::move(seg));
    }

    std::vector<ReconstructedEvent> events;
    events.reserve(segments.size());
    for (const auto& seg : segments) {
        events.push_back(stream.has_labels() ? parse_labelled(stream, seg, vocab)
                                             : parse_inferred(stream, seg, vocab, hints));
    }
    return events;
}

ReconstructedEvent expected_reconstruction(const EventRecord& event, std::int64_t prev_timestamp,
                                           const SerializerConfig& config, const DefinitionTable& definitions)
{
    ReconstructedEvent ev;
    ev.table = casefold(event.table);
    for (const auto& [name, cell] : event.columns) ev.columns.push_back({casefold(name), textualize_cell(cell, definitions)});
    ev.timegap_bucket = quantize_timegap(event.timestamp - prev_timestamp, config.timegap_minutes);
    return ev;
}

}  // namespace ehrenc
