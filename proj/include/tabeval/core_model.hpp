#pragma once

#include "tabeval/decimal.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tabeval::core {

enum class Dataset { FinQA, TATQA, ConvFinQA, Multihiertt };

std::string_view dataset_name(Dataset d);
std::optional<Dataset> dataset_from_name(std::string_view name);

enum class Scale { Unit, Thousand, Million, Billion, Percent, None };

std::string_view scale_name(Scale s);
std::optional<Scale> scale_from_name(std::string_view name);
// Multiplier used when comparing values across scales (Percent/None -> 1).
Decimal scale_multiplier(Scale s);

struct NumericCell {
    Decimal value;
    Scale scale = Scale::Unit;
    bool is_percent = false;
    // Digits after the decimal point as written, when known. Grading uses
    // this for its rounded-match rule.
    std::optional<int> decimals;
};

// Lenient financial-cell parser: handles "$", thousands commas, "%",
// trailing scale words, accounting-parenthesis negatives and leading "$-".
// Returns nullopt (never throws) for non-numeric text.
std::optional<NumericCell> parse_numeric_cell(std::string_view raw);

struct Cell {
    std::size_t row = 0;
    std::size_t col = 0;
    std::string raw_text;
    std::optional<NumericCell> numeric;
    bool is_empty = true;
};

// Trimmed-empty, dash-only ("—", "-", "–") and "N/A" cells count as empty.
bool is_empty_cell_text(std::string_view raw);

// Builds a cell with numeric/is_empty derived from the raw text.
Cell make_cell(std::size_t row, std::size_t col, std::string raw_text);

struct Table {
    std::string id;
    std::vector<std::vector<Cell>> grid;  // rectangular
    std::size_t n_header_rows = 0;
    std::vector<int> row_indent_levels;   // one per row, 0 = top level
    std::optional<std::string> caption;

    std::size_t n_rows() const { return grid.size(); }
    std::size_t n_cols() const { return grid.empty() ? 0 : grid.front().size(); }
};

// Validates rectangularity, header count and indent-vector length.
void validate_table(const Table& table);

struct Turn {
    std::string question_text;
    std::string gold_answer_text;
    bool operator==(const Turn&) const = default;
};

struct Question {
    std::string id;
    std::string text;
    std::vector<Turn> turn_history;  // nonempty only for ConvFinQA
    Dataset dataset = Dataset::FinQA;
};

struct NumberValue {
    Decimal value;
    Scale scale = Scale::Unit;
    bool is_percent = false;
    std::optional<int> decimals;
};

struct SpanValue {
    std::string text;
};

struct BoolValue {
    bool value = false;
};

using AnswerValue = std::variant<NumberValue, SpanValue, BoolValue>;

std::string answer_to_string(const AnswerValue& v);
// Parses free answer text ("$564,589 million", "-22.95%", "yes", spans).
AnswerValue parse_answer_text(std::string_view text);

struct TableCellRef {
    std::string table_id;
    std::size_t row = 0;
    std::size_t col = 0;
    bool operator==(const TableCellRef&) const = default;
};

enum class TextSource { Pre, Post };

struct TextSpanRef {
    TextSource source = TextSource::Pre;
    std::size_t char_start = 0;
    std::size_t char_end = 0;  // exclusive, into the joined text lines
    bool operator==(const TextSpanRef&) const = default;
};

using EvidenceRef = std::variant<TableCellRef, TextSpanRef>;

struct GoldAnnotation {
    std::optional<AnswerValue> answer;
    std::optional<std::string> program_text;  // dataset DSL / derivation form
    std::vector<EvidenceRef> evidences;
    std::optional<std::string> answer_scale_hint;
};

struct HumanLabels {
    std::optional<std::string> category;
    std::optional<int> n_steps;
    std::optional<int> hierarchy_depth;
    std::optional<double> empty_cell_pct;
};

struct HybridExample {
    std::string id;
    std::vector<std::string> pre_text;
    std::vector<std::string> post_text;
    std::vector<Table> tables;  // nonempty
    Question question;
    GoldAnnotation gold;
    std::optional<HumanLabels> human_labels;
};

class SchemaError : public std::runtime_error {
public:
    SchemaError(std::string message, std::string field);
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

// Reads one raw dataset file in its published JSON schema and normalizes
// every record (ConvFinQA turns become one example per turn).
std::vector<HybridExample> load_dataset(const std::string& path, Dataset dataset);

// The table with the most rows; ties go to the lowest list index.
const Table& select_primary_table(const HybridExample& example);

// Resolves an evidence ref to the numeric values it covers (all numbers in
// a text span; the cell value for a table ref).
std::vector<Decimal> evidence_values(const HybridExample& example, const EvidenceRef& ref);

// All numeric tokens in a free-text line, as written (commas and leading
// $/(-  handled; scale words like "million" are NOT multiplied in, so the
// values stay comparable with raw table cells).
std::vector<Decimal> extract_numbers(std::string_view text);

// --- Normalized record format (JSONL, one example per line) ---

std::string to_jsonl(const HybridExample& example);
HybridExample from_jsonl(const std::string& line);

std::vector<HybridExample> load_normalized(const std::string& path);
void save_normalized(const std::vector<HybridExample>& examples, const std::string& path);

// Optional per-example human labels; CSV columns:
// example_id, category, n_steps, hierarchy_depth, empty_cell_pct.
std::map<std::string, HumanLabels> load_human_labels(const std::string& path);
void attach_human_labels(std::vector<HybridExample>& examples,
                         const std::map<std::string, HumanLabels>& labels);

bool examples_equal(const HybridExample& a, const HybridExample& b);

}  // namespace tabeval::core
