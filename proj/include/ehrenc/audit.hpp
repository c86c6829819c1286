#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ehrenc/corpus.hpp"
#include "ehrenc/serializer.hpp"
#include "ehrenc/vocab.hpp"

namespace ehrenc {

struct NumericRange {
    double min = 0.0;
    double max = 0.0;
    bool operator==(const NumericRange&) const = default;
};

struct SubwordSet {
    std::set<std::string> units;
    bool operator==(const SubwordSet&) const = default;
};

using TripleContent = std::variant<NumericRange, SubwordSet>;

/// Admissible content per (table, column), keyed by casefolded names as they
/// appear in token streams.
struct TripleSet {
    std::map<std::pair<std::string, std::string>, TripleContent> content;

    bool has_table(const std::string& table) const;
    const TripleContent* find(const std::string& table, const std::string& column) const;
    StructureHints hints() const;
};

/// Numeric iff every observed content of the column is a decimal; numeric
/// columns keep [min, max], text columns keep the union of their subword units.
TripleSet build_triples(const Corpus& real, const Vocabulary& vocab);

enum class EventDefect { NotTableFirst, UnpairedColumn, UnknownTableColumn, NumericOutOfRange, UnknownSubword };

std::string_view to_string(EventDefect d);

struct EventVerdict {
    std::optional<EventDefect> defect;  ///< empty means correct
    bool correct() const { return !defect.has_value(); }
};

/// Structure first, then (table, column) membership, then per-column content.
/// Numeric content is reassembled from its spaced digits before the range test.
EventVerdict check_event(const ReconstructedEvent& event, const TripleSet& triples, const Vocabulary& vocab);

using Sample = std::vector<ReconstructedEvent>;

struct AuditReport {
    std::optional<double> rce;
    std::optional<double> rue;
    std::optional<double> rcs;
    std::size_t total_events = 0;
    std::size_t correct_events = 0;
    std::size_t unique_events = 0;
    std::size_t correct_unique_events = 0;
    std::size_t total_samples = 0;
    std::size_t correct_samples = 0;
    std::map<EventDefect, std::size_t> defects;
};

/// RCE over all events, RUE over exact-duplicate-collapsed events, RCS with a
/// sample correct iff it has events and all are correct.
AuditReport score(const std::vector<Sample>& generated, const TripleSet& triples, const Vocabulary& vocab);

/// Serializes every patient (flattened, untruncated by n_t) and parses it
/// back, giving the samples a perfect generator would emit.
std::vector<Sample> samples_from_corpus(const Corpus& corpus, const Vocabulary& vocab, const SerializerConfig& config);

}  // namespace ehrenc
