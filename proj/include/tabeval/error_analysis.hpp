#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tabeval/core_model.hpp"
#include "tabeval/grading.hpp"
#include "tabeval/program_dsl.hpp"
#include "tabeval/response_parsing.hpp"

namespace tabeval::errors {

// Failure taxonomy over structured (EEDP) responses. E: evidence extraction,
// R: reasoning/formula choice, C: calculation.
enum class ErrorTag {
    E1_MissingEvidence,
    E2_WrongEvidence,
    R1_DomainKnowledgeDeficit,
    R2_QuestionMisinterpretation,
    C1_WrongInstantiation,
    C2_PrecisionError,
};

enum class Provenance { Auto, Human };

std::string_view tag_name(ErrorTag t);   // "E1" .. "C2"
std::string_view tag_label(ErrorTag t);  // short human-readable description
std::optional<ErrorTag> tag_from_name(std::string_view name);

struct TagResult {
    std::vector<ErrorTag> tags;  // cascade order, possibly several
    std::vector<std::string> diagnostics;
    bool needs_review = false;  // incorrect but nothing auto-taggable
};

// Value equality for evidence matching: grading tolerance, with a factor of
// 100/1000/1e6/1e9 allowed in either direction so unit phrasing ("4,884"
// vs "4.884 million", percent vs ratio) does not read as a wrong value.
bool values_match(const Decimal& a, const Decimal& b, const grading::GradeConfig& cfg = {});

// Integer in [1900, 2100]: almost always a date label, excluded from
// evidence matching so citing or omitting a year is never an E tag.
bool is_year_token(const Decimal& v);

// Gold-side values: evidence refs resolved against the example, plus the
// gold program's literal operands. Years filtered, duplicates removed.
std::vector<Decimal> gold_value_pool(const core::HybridExample& example,
                                     const dsl::ReasoningProgram* gold_program);

// Values the model claims as extracted evidence (Evidence section only).
std::vector<Decimal> evidence_numbers(const response::ParsedEEDP& eedp);

// Every value the structured response mentions (evidences + step text);
// the lenient pool used to decide a gold value is truly absent.
std::vector<Decimal> response_numbers(const response::ParsedEEDP& eedp);

enum class ProgramVerdict {
    Match,           // same formula, same operands
    OpsDiffer,       // different operation mix (or order of operations)
    ArgOrderSwapped, // same ops and values, operands inverted somewhere
    OperandsDiffer,  // same formula shape, at least one wrong value plugged in
};

struct ProgramComparison {
    ProgramVerdict verdict = ProgramVerdict::Match;
    std::vector<std::string> notes;
    // Model-side literals that failed to match, for the evidence-substitution
    // rule (a wrong value already tagged E2 does not also earn C1).
    std::vector<Decimal> mismatched_model_literals;
};

// Compares after dead-step pruning and after stripping a trailing x100
// percent-conversion step present on only one side.
ProgramComparison compare_programs(const dsl::ReasoningProgram& model,
                                   const dsl::ReasoningProgram& gold,
                                   const grading::GradeConfig& cfg = {});

// One entry per step whose stated value misses its own recomputation by
// more than 0.1% relative (display rounding and percent forms excused).
std::vector<std::string> precision_mismatches(const dsl::ReasoningProgram& model,
                                              const std::vector<response::EEDPStep>& steps);

// The auto-tagging cascade. Caller guarantees the record graded incorrect.
TagResult tag(const response::ParsedEEDP& eedp, const core::HybridExample& example,
              const grading::GradeConfig& cfg = {});

struct TaggedError {
    std::string example_id;
    core::Dataset dataset = core::Dataset::FinQA;
    std::vector<ErrorTag> tags;
    Provenance provenance = Provenance::Auto;
};

// Per-dataset taxonomy distribution: rows E1, E2, R1, R2 and C (C1 and C2
// merged); pct is of all tag instances in that dataset.
struct SummaryRow {
    core::Dataset dataset = core::Dataset::FinQA;
    std::string label;
    int count = 0;
    double pct = 0.0;
};

std::vector<SummaryRow> summarize(const std::vector<TaggedError>& errors);
std::string summary_csv(const std::vector<SummaryRow>& rows);

// Manual-review worksheet row; the CSV column order is stable:
// id, dataset, question, gold_program, model_evidences, model_steps,
// auto_tags, human_tag.
struct ReviewRow {
    std::string id;
    core::Dataset dataset = core::Dataset::FinQA;
    std::string question;
    std::string gold_program;
    std::string model_evidences;
    std::string model_steps;
    std::vector<ErrorTag> auto_tags;
    std::optional<ErrorTag> human_tag;
};

std::string review_csv(const std::vector<ReviewRow>& rows);

struct ReviewImport {
    std::vector<ReviewRow> rows;
    std::vector<std::string> errors;  // "line N: reason" for skipped rows
};

ReviewImport import_review(const std::string& text);

// Human tags from a re-imported worksheet replace the auto tags of the
// matching records and flip their provenance.
void apply_human_tags(std::vector<TaggedError>& errors,
                      const std::vector<ReviewRow>& review);

}  // namespace tabeval::errors
