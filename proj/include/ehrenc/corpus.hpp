#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ehrenc/common.hpp"

namespace ehrenc {

struct NumericCell {
    std::string text;  ///< decimal string, kept verbatim
    bool operator==(const NumericCell&) const = default;
};
struct TextCell {
    std::string text;
    bool operator==(const TextCell&) const = default;
};
struct ItemizedCell {
    std::string code;  ///< resolved through the corpus DefinitionTable
    bool operator==(const ItemizedCell&) const = default;
};

using CellValue = std::variant<NumericCell, TextCell, ItemizedCell>;

enum class ColumnType { Numeric, Text, Itemized };

std::string_view to_string(ColumnType t);
ColumnType column_type_from_string(std::string_view s);

/// Code id -> description text.
using DefinitionTable = std::map<std::string, std::string>;

struct EventRecord {
    std::string table;
    std::vector<std::pair<std::string, CellValue>> columns;
    std::int64_t timestamp = 0;  ///< seconds since admission

    bool operator==(const EventRecord&) const = default;
};

struct PatientRecord {
    std::string id;
    std::vector<EventRecord> events;  ///< non-decreasing timestamps
    std::map<std::string, int> labels;

    bool operator==(const PatientRecord&) const = default;
};

struct ColumnDecl {
    std::string name;
    ColumnType type = ColumnType::Text;
    bool operator==(const ColumnDecl&) const = default;
};

struct TableDecl {
    std::string name;
    std::vector<ColumnDecl> columns;
    bool operator==(const TableDecl&) const = default;
};

struct Schema {
    std::vector<TableDecl> tables;
    double observation_window_hours = 12.0;
    int min_events = 5;

    const TableDecl* find(std::string_view table) const;
    bool operator==(const Schema&) const = default;
};

struct Corpus {
    std::vector<PatientRecord> patients;
    DefinitionTable definitions;
    Schema schema;

    std::size_t event_count() const;
    bool operator==(const Corpus&) const = default;
};

/// Checks the Corpus invariants: names non-empty and whitespace-free, every
/// event has a column, numeric cells are decimals, itemized codes resolve,
/// events are chronological. Throws Error naming the first violation.
void validate_corpus(const Corpus& corpus);

// ---------------------------------------------------------------------------
// Synthetic generation

struct ColumnSpec {
    std::string name;
    ColumnType type = ColumnType::Text;
    double min = 0.0;       ///< numeric only
    double max = 0.0;       ///< numeric only
    int decimals = 1;       ///< numeric only
    std::vector<std::string> choices;  ///< text values or itemized codes
};

struct TableSpec {
    std::string name;
    std::vector<ColumnSpec> columns;
};

struct LabelSpec {
    std::string task;
    double positive_rate = 0.5;
};

struct GeneratorConfig {
    std::uint64_t seed = 0;
    std::int64_t n_patients = 100;
    std::vector<TableSpec> tables;
    DefinitionTable definitions;
    std::int64_t min_events = 5;
    std::int64_t max_events = 40;
    double observation_window_hours = 12.0;
    std::vector<LabelSpec> labels;
};

/// Lab / prescription / infusion tables with itemized, numeric, and text
/// columns.
GeneratorConfig default_generator_config();

/// Throws Error on negative counts, empty tables, min > max, or itemized
/// choices missing from the definitions.
void validate_config(const GeneratorConfig& config);

/// Pure function of config. Patients that end up below the cohort's minimum
/// event count are dropped, so every returned patient satisfies the filter.
Corpus generate_corpus(const GeneratorConfig& config);

// ---------------------------------------------------------------------------
// On-disk format
//
//   <dir>/schema.json        table/column declarations, cohort window
//   <dir>/<table>.tsv        header: patient_id, timestamp_seconds, columns...
//   <dir>/definitions.tsv    header: code, description
//   <dir>/labels.tsv         header: patient_id, task, label (optional)

struct LoadOptions {
    /// Overrides the schema's cohort window / minimum event count when set.
    std::optional<double> observation_window_hours;
    std::optional<int> min_events;
};

Corpus load_corpus(const std::filesystem::path& dir, const LoadOptions& options = {});

/// Reads only the sidecar. The corpus directory's schema.json is used by
/// load_corpus; this is exposed for tooling.
Schema load_schema(const std::filesystem::path& file);

/// Writes every file of the on-disk format. Output is a pure function of the
/// corpus, so identical corpora produce byte-identical directories.
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

std::string cell_text(const CellValue& cell);

// ---------------------------------------------------------------------------
// Cohort split

struct SplitRatios {
    double train = 0.8;
    double valid = 0.1;
    double test = 0.1;
};

struct CohortSplit {
    Corpus train;
    Corpus valid;
    Corpus test;
};

/// Exact partition. Per stratum (or overall) sizes come from largest-remainder
/// rounding of size * ratio, so each split is within one patient of its share.
CohortSplit split_cohort(const Corpus& corpus, SplitRatios ratios, std::uint64_t seed,
                         const std::optional<std::string>& stratify_on = std::nullopt);

}  // namespace ehrenc
