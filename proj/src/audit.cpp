#include "ehrenc/audit.hpp"

#include <cstdlib>
#include <unordered_map>

namespace ehrenc {

std::string_view to_string(EventDefect d)
{
    switch (d) {
    case EventDefect::NotTableFirst: return "not_table_first";
    case EventDefect::UnpairedColumn: return "unpaired_column";
    case EventDefect::UnknownTableColumn: return "unknown_table_column";
    case EventDefect::NumericOutOfRange: return "numeric_out_of_range";
    case EventDefect::UnknownSubword: return "unknown_subword";
    }
    return "unknown_subword";
}

bool TripleSet::has_table(const std::string& table) const
{
    auto it = content.lower_bound({table, std::string{}});
    return it != content.end() && it->first.first == table;
}

const TripleContent* TripleSet::find(const std::string& table, const std::string& column) const
{
    auto it = content.find({table, column});
    return it == content.end() ? nullptr : &it->second;
}

StructureHints TripleSet::hints() const
{
    StructureHints h;
    for (const auto& [key, value] : content) h.columns_by_table[key.first].insert(key.second);
    return h;
}

TripleSet build_triples(const Corpus& real, const Vocabulary& vocab)
{
    if (real.event_count() == 0) throw Error("cannot build triples from an empty corpus");

    std::map<std::pair<std::string, std::string>, std::vector<std::string>> observed;
    for (const auto& p : real.patients) {
        for (const auto& e : p.events) {
            for (const auto& [name, cell] : e.columns) {
                auto& contents = observed[{casefold(e.table), casefold(name)}];
                if (const auto* num = std::get_if<NumericCell>(&cell)) {
                    contents.push_back(num->text);
                } else {
                    contents.push_back(textualize_cell(cell, real.definitions));
                }
            }
        }
    }

    TripleSet triples;
    for (const auto& [key, contents] : observed) {
        bool numeric = true;
        for (const auto& c : contents) numeric = numeric && is_decimal(c);
        if (numeric) {
            NumericRange range{std::strtod(contents.front().c_str(), nullptr), 0.0};
            range.max = range.min;
            for (const auto& c : contents) {
                const double v = std::strtod(c.c_str(), nullptr);
                range.min = std::min(range.min, v);
                range.max = std::max(range.max, v);
            }
            triples.content.emplace(key, range);
        } else {
            SubwordSet set;
            for (const auto& c : contents) {
                for (auto& u : vocab.tokenize_units(c)) set.units.insert(std::move(u));
            }
            triples.content.emplace(key, std::move(set));
        }
    }
    return triples;
}

EventVerdict check_event(const ReconstructedEvent& event, const TripleSet& triples, const Vocabulary& vocab)
{
    if (event.defect) {
        return {event.defect == StructuralDefect::NotTableFirst ? EventDefect::NotTableFirst
                                                                 : EventDefect::UnpairedColumn};
    }
    if (event.columns.empty()) return {EventDefect::UnpairedColumn};
    for (const auto& col : event.columns) {
        if (col.name.empty() || col.content.empty()) return {EventDefect::UnpairedColumn};
    }
    for (const auto& col : event.columns) {
        if (!triples.find(event.table, col.name)) return {EventDefect::UnknownTableColumn};
    }
    for (const auto& col : event.columns) {
        const auto* content = triples.find(event.table, col.name);
        if (const auto* range = std::get_if<NumericRange>(content)) {
            std::string digits;
            for (const auto& w : split_words(col.content)) digits += w;
            if (!is_decimal(digits)) return {EventDefect::NumericOutOfRange};
            const double v = std::strtod(digits.c_str(), nullptr);
            if (v < range->min || v > range->max) return {EventDefect::NumericOutOfRange};
        } else {
            const auto& allowed = std::get<SubwordSet>(*content).units;
            for (const auto& u : vocab.tokenize_units(col.content)) {
                if (!allowed.contains(u)) return {EventDefect::UnknownSubword};
            }
        }
    }
    return {};
}

AuditReport score(const std::vector<Sample>& generated, const TripleSet& triples, const Vocabulary& vocab)
{
    AuditReport r;
    std::unordered_map<std::string, bool> unique;
    for (const auto& sample : generated) {
        ++r.total_samples;
        bool sample_ok = !sample.empty();
        for (const auto& event : sample) {
            const auto verdict = check_event(event, triples, vocab);
            ++r.total_events;
            if (verdict.correct()) {
                ++r.correct_events;
            } else {
                ++r.defects[*verdict.defect];
                sample_ok = false;
            }
            unique.emplace(event.key(), verdict.correct());
        }
        if (sample_ok) ++r.correct_samples;
    }
    r.unique_events = unique.size();
    for (const auto& [key, ok] : unique) r.correct_unique_events += ok ? 1 : 0;

    auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    r.rce = ratio(r.correct_events, r.total_events);
    r.rue = ratio(r.correct_unique_events, r.unique_events);
    r.rcs = ratio(r.correct_samples, r.total_samples);
    return r;
}

std::vector<Sample> samples_from_corpus(const Corpus& corpus, const Vocabulary& vocab, const SerializerConfig& config)
{
    std::vector<Sample> samples;
    samples.reserve(corpus.patients.size());
    for (const auto& p : corpus.patients) {
        Sample s;
        std::int64_t prev = 0;
        for (const auto& e : p.events) {
            TokenStream one;
            const auto ev = serialize_event(e, prev, vocab, config, corpus.definitions);
            one.layout = Layout::Flattened;
            one.rows = 1;
            one.cols = ev.tokens.size();
            one.tokens = ev.tokens;
            one.types = ev.types;
            one.places = ev.places;
            one.boundaries = {{0, ev.tokens.size()}};
            auto parsed = detokenize_events(one, vocab);
            s.insert(s.end(), parsed.begin(), parsed.end());
            prev = e.timestamp;
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

}  // namespace ehrenc
