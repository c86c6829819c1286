#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ehrenc/corpus.hpp"
#include "ehrenc/vocab.hpp"

namespace ehrenc {

enum class TokenType : std::uint8_t { TableName, ColumnName, ColumnValue, TimeGap, Start, End, Pad };

std::string_view to_string(TokenType t);

/// Digit-place label: power-of-ten position of a digit token relative to the
/// decimal point (0 = units, 1 = tens, -1 = tenths), the decimal point
/// itself, or NonDigit for every other token.
class DigitPlace {
public:
    enum class Kind : std::uint8_t { NonDigit, DecimalPoint, Place };

    static constexpr DigitPlace non_digit() { return DigitPlace(Kind::NonDigit, 0); }
    static constexpr DigitPlace decimal_point() { return DigitPlace(Kind::DecimalPoint, 0); }
    static constexpr DigitPlace place(int k) { return DigitPlace(Kind::Place, k); }

    constexpr DigitPlace() = default;
    constexpr Kind kind() const { return kind_; }
    constexpr int position() const { return place_; }

    /// Dense non-negative id: NonDigit 0, DecimalPoint 1, Place(k >= 0) 2+2k,
    /// Place(k < 0) 1-2k.
    std::int32_t id() const;
    static DigitPlace from_id(std::int32_t id);

    constexpr bool operator==(const DigitPlace&) const = default;

private:
    constexpr DigitPlace(Kind kind, int place) : kind_(kind), place_(place) {}
    Kind kind_ = Kind::NonDigit;
    int place_ = 0;
};

/// Labels for each character of a decimal string, in order.
std::vector<DigitPlace> digit_places(std::string_view decimal);

/// Inverse of digit_places: rebuilds the decimal string from digit tokens and
/// their labels, or nullopt when the labels are inconsistent.
std::optional<std::string> reconstruct_decimal(const std::vector<std::string>& tokens,
                                               const std::vector<DigitPlace>& labels);

struct SerializerConfig {
    std::int64_t n_e = 256;
    std::int64_t n_tpe = 128;
    std::int64_t n_t = 8192;
    /// Left-inclusive bucket boundaries in minutes; k boundaries give k+1 buckets.
    std::vector<std::int64_t> timegap_minutes{1, 5, 15, 30, 60, 120, 360, 720};

    void validate() const;
    std::size_t timegap_tokens() const { return timegap_minutes.size() + 1; }
};

/// g: itemized -> casefolded description, numeric -> characters joined by
/// single spaces, text -> casefolded with whitespace runs collapsed.
std::string textualize_cell(const CellValue& cell, const DefinitionTable& definitions);

/// Index i of the bucket [b_i, b_{i+1}) containing the gap, with b_0 = 0 and
/// the last bucket unbounded.
std::size_t quantize_timegap(std::int64_t delta_seconds, const std::vector<std::int64_t>& boundaries_minutes);

struct SerializedEvent {
    std::vector<TokenId> tokens;
    std::vector<TokenType> types;
    std::vector<DigitPlace> places;
};

/// table ⊕ (column ⊕ g(cell))* ⊕ timegap. The gap is measured from
/// prev_timestamp; the first event of a patient uses 0 (admission).
SerializedEvent serialize_event(const EventRecord& event, std::int64_t prev_timestamp, const Vocabulary& vocab,
                                const SerializerConfig& config, const DefinitionTable& definitions);

enum class Layout { Hierarchical, Flattened };

/// Token grid with parallel label channels. Hierarchical streams have
/// rows = n_e and cols = n_tpe; flattened streams have rows = 1, cols = n_t.
/// `types` and `places` are empty for label-free (generated) streams.
struct TokenStream {
    std::string patient_id;
    Layout layout = Layout::Flattened;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<TokenId> tokens;
    std::vector<TokenType> types;
    std::vector<DigitPlace> places;
    std::vector<std::pair<std::size_t, std::size_t>> boundaries;  ///< flattened only

    bool has_labels() const { return !types.empty(); }
    TokenId at(std::size_t row, std::size_t col) const { return tokens[row * cols + col]; }
    std::size_t payload_size() const;

    /// Shape and channel-length invariants; throws Error.
    void validate() const;
    bool operator==(const TokenStream&) const = default;
};

/// Earliest n_e events, each row right-padded or truncated to n_tpe.
TokenStream build_hierarchical(const PatientRecord& patient, const Vocabulary& vocab, const SerializerConfig& config,
                               const DefinitionTable& definitions);

/// Concatenates non-Pad row payloads, records event boundaries, then pads or
/// truncates to n_t.
TokenStream flatten(const TokenStream& hierarchical, std::int64_t n_t);

TokenStream build_flattened(const PatientRecord& patient, const Vocabulary& vocab, const SerializerConfig& config,
                            const DefinitionTable& definitions);

/// Every word of a corpus that the serializer will emit (table names, column
/// names, textualized cells); feed to Vocabulary::build.
std::vector<std::string> corpus_texts(const Corpus& corpus);

// ---------------------------------------------------------------------------
// Detokenization

enum class StructuralDefect { NotTableFirst, UnpairedColumn };

std::string_view to_string(StructuralDefect d);

struct ReconstructedColumn {
    std::string name;
    std::string content;
    bool operator==(const ReconstructedColumn&) const = default;
};

struct ReconstructedEvent {
    std::string table;
    std::vector<ReconstructedColumn> columns;
    std::optional<std::size_t> timegap_bucket;
    std::optional<StructuralDefect> defect;

    /// Canonical text used for exact-duplicate detection.
    std::string key() const;
    bool operator==(const ReconstructedEvent&) const = default;
};

/// Known table and column names, used to parse label-free streams.
struct StructureHints {
    std::map<std::string, std::set<std::string>> columns_by_table;
};

StructureHints hints_from_schema(const Schema& schema);

/// Labelled streams are parsed from their type channel. Label-free streams
/// are split at time-gap tokens (or rows / boundaries) and parsed against
/// `hints`: the first word must be a known table, words naming a known
/// column open a new column, everything else is content.
std::vector<ReconstructedEvent> detokenize_events(const TokenStream& stream, const Vocabulary& vocab,
                                                  const StructureHints& hints = {});

/// The event as the serializer would render it, before tokenization.
ReconstructedEvent expected_reconstruction(const EventRecord& event, std::int64_t prev_timestamp,
                                           const SerializerConfig& config, const DefinitionTable& definitions);

}  // namespace ehrenc
