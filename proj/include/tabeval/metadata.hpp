#pragma once

#include "tabeval/core_model.hpp"
#include "tabeval/program_dsl.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tabeval::metadata {

// The twelve mathematical concept categories, ordered by the priority used
// to break ties when a question matches cues for several (earlier wins).
// Other is the explicit fallback for pure-lookup questions that match no
// cue; reports keep it as its own stratum.
enum class Category {
    InDomainInfo,   // needs a finance formula beyond the listed operands
    ChangeRatio,    // difference between two fractional forms
    Ratio,          // percentages, ratios, fractional forms
    Average,
    Range,          // spread between min and max observations
    Compare,        // greater / less than between quantities
    Counting,
    Division,
    Product,
    Difference,
    Sum,
    Time,           // time-span operators not in the table or context
    Other,
};

std::string_view category_name(Category c);
std::optional<Category> category_from_name(std::string_view name);

struct CategoryResult {
    Category category = Category::Other;
    // False when question-keyword cues and gold-program cues disagree; the
    // decision still stands but reports can split these out.
    bool confident = true;
};

// Rule-based: a loaded human label wins; otherwise keyword cues over the
// question text, cross-checked against the gold program's operator mix.
CategoryResult classify_question(const core::HybridExample& example);

// Reasoning steps = steps of the gold program. Derivation-style annotations
// ("564,589 - 500,000") count one step per arithmetic operator; a bare
// value counts as one retrieval step. nullopt without a gold program.
std::optional<int> reasoning_steps(const core::HybridExample& example);

// Max over gold evidence cells of
//   1 (table level) + column-header levels above + row-indent levels.
// nullopt when the gold evidence holds no table cells to measure.
std::optional<int> hierarchy_depth(const core::HybridExample& example);

// Empty cells / total cells of the primary table, as a fraction in [0,1].
double empty_cell_pct(const core::HybridExample& example);

// Rows of the primary table, headers included.
std::size_t table_rows(const core::HybridExample& example);

enum class Source { Computed, HumanLabel };

struct MetadataRecord {
    std::string example_id;
    CategoryResult category;
    std::optional<int> n_steps;
    std::size_t table_length = 0;
    std::optional<int> depth;
    double empty_pct = 0.0;
    Source source = Source::Computed;
};

// Computes all five annotations; attached human labels override the
// computed values field by field and flip source to HumanLabel.
MetadataRecord annotate(const core::HybridExample& example);

std::vector<MetadataRecord> annotate_all(const std::vector<core::HybridExample>& examples);

// CSV: example_id,category,n_steps,table_length,hierarchy_depth,empty_cell_pct,source
std::string metadata_csv(const std::vector<MetadataRecord>& records);
std::vector<MetadataRecord> parse_metadata_csv(const std::string& text);

// Annotation-split filters: Multihiertt drops examples whose primary table
// exceeds 40 rows; TATQA drops span-selection-only questions (ones with no
// derivation); FinQA and ConvFinQA pass through unchanged.
std::vector<core::HybridExample> apply_split_filters(std::vector<core::HybridExample> examples,
                                                     core::Dataset dataset);

// Bucket labels used by the stratified report.
std::string step_bucket(std::optional<int> n_steps);   // "1","2","3","4+","unknown"
std::string depth_bucket(std::optional<int> depth);    // "1-2","3","4","5+","unknown"
std::string empty_pct_bucket(double fraction);         // "0%","0-10%","10-30%",">30%"
std::string row_bucket(std::size_t rows);              // "<=5","6-10","11-20",">20"

// Disagreement between computed annotations and human labels, for the
// calibration table: counts labeled examples where the values differ.
struct LabelAgreement {
    std::size_t n_category = 0, category_mismatch = 0;
    std::size_t n_steps = 0, steps_mismatch = 0;
    std::size_t n_depth = 0, depth_mismatch = 0;
    std::size_t n_empty = 0, empty_mismatch = 0;  // |diff| > 0.005
};

LabelAgreement label_agreement(const std::vector<core::HybridExample>& examples);

}  // namespace tabeval::metadata
