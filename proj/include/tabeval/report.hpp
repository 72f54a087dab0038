#pragma once

#include "tabeval/core_model.hpp"
#include "tabeval/prompting.hpp"
#include "tabeval/runner.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tabeval::report {

// Accuracy per (dataset, model, strategy) in Table-2 shape: one block per
// dataset (TATQA, FinQA, ConvFinQA, Multihiertt), one row per model, one
// column per strategy, percent with 2 decimals. A triple with no graded
// records leaves its cell blank; only graded records count.
std::string accuracy_table_csv(const std::vector<runner::EvalRecord>& records);

enum class Dimension { Steps, Category, TableLength, Depth, EmptyPct, Tau };

std::string_view dimension_name(Dimension d);
std::optional<Dimension> dimension_from_name(std::string_view name);

// Bucket edges are reporting choices, not dataset facts; they are
// configurable here and echoed in every report header.
struct StratifyOptions {
    std::vector<int> step_cuts = {1, 2, 3};                 // then ">=4"
    std::vector<std::size_t> row_cuts = {10, 20, 30, 40};   // "<=10" .. ">=41"
    int empty_bins = 10;                                    // deciles of [0,100]%
    int depth_levels = 5;      // domain "1".."5", extended by observed depths
    int tau_min = -6;          // probe range; extended by observed values
    int tau_max = 6;
    // Drop Time and InDomainInfo records from the category report, the two
    // categories the complexity analysis sets aside.
    bool omit_filtered_categories = false;
};

struct StratumRow {
    prompting::Strategy strategy = prompting::Strategy::Direct;
    std::string model;
    std::string bucket;
    std::size_t n = 0;         // graded records in the bucket
    std::size_t n_correct = 0;
    std::optional<double> accuracy_pct;  // absent when n = 0
};

struct StratifiedReport {
    Dimension dimension = Dimension::Steps;
    std::vector<std::string> buckets;  // the full domain, in report order
    std::vector<StratumRow> rows;      // bucket-complete per (strategy, model)
    std::string header_note;           // "dimension=<d> buckets=a|b|c"
};

// Buckets the graded records along one complexity dimension. Every bucket
// of the domain is emitted per (strategy, model) pair present in the
// records, n = 0 included, so the bucket ns always sum to that pair's
// graded count. The examples argument is only needed for Dimension::Tau
// (τ comes from the gold program, which records do not carry).
StratifiedReport stratify(const std::vector<runner::EvalRecord>& records, Dimension dimension,
                          const StratifyOptions& options = {},
                          const std::vector<core::HybridExample>& examples = {});

// "# dimension=... buckets=..." comment line, then
// strategy,model,bucket,n,accuracy rows (accuracy blank when n = 0).
std::string stratified_csv(const StratifiedReport& report);

// The same content as one series per (strategy, model): n and accuracy
// arrays over the bucket axis, null accuracy for empty buckets. Any
// plotting tool can consume this directly.
std::string plot_data_json(const StratifiedReport& report);

// τ of the gold program's final step, operands resolved through step
// references. nullopt without a parseable program, on non-scalar operands
// or on a zero operand.
std::optional<int> gold_final_tau(const core::HybridExample& example);

// The bucket label a single record falls in. Pass the record's example for
// Dimension::Tau; without one the record lands in "n/a".
std::string bucket_of(const runner::EvalRecord& record, Dimension dimension,
                      const StratifyOptions& options = {},
                      const core::HybridExample* example = nullptr);

}  // namespace tabeval::report
