#pragma once

#include "tabeval/core_model.hpp"
#include "tabeval/error_analysis.hpp"
#include "tabeval/grading.hpp"
#include "tabeval/llm_gateway.hpp"
#include "tabeval/metadata.hpp"
#include "tabeval/prompting.hpp"
#include "tabeval/response_parsing.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace tabeval::runner {

struct DatasetSource {
    core::Dataset dataset = core::Dataset::FinQA;
    std::string path;  // normalized JSONL (core::load_normalized)
};

struct RunConfig {
    std::vector<DatasetSource> datasets;
    std::vector<gateway::ModelConfig> models;
    std::vector<prompting::Strategy> strategies;
    grading::GradeConfig grade;
    // Shot banks live here, one "<dataset>_<strategy>.jsonl" per pair.
    std::string shots_dir;
    int parallelism = 4;  // runner worker pool, per triple
    std::string output_dir = "runs/out";
    bool resume = false;
    // When set, every model is rerouted to "<replay_dir>/<model stem>.jsonl"
    // and no HTTP call can happen.
    std::optional<std::string> replay_dir;
};

// Empty when the config is runnable. Checks the triple matrix is unique,
// every dataset / shot-bank / replay file exists, and the pool bound is
// sane — run() refuses a config with findings before any provider call.
std::vector<std::string> validate(const RunConfig& config);

// Declarative key=value text (README documents the schema): scalar keys
// (output_dir, shots_dir, parallelism, resume, replay_dir, strategies,
// grade.rel_tol, grade.abs_tol, grade.percent_ratio_equiv,
// grade.scale_equiv), one "dataset.<name> = <path>" per source, and
// "model.<name>.<field> = <value>" groups. Order in the file is preserved.
// Throws std::invalid_argument with "line N: ..." on any unknown key,
// unknown strategy or unparseable value.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

struct EvalRecord {
    std::string example_id;
    core::Dataset dataset = core::Dataset::FinQA;
    std::string model;
    prompting::Strategy strategy = prompting::Strategy::Direct;
    // Hash of the first request of the chain; the resume key.
    std::string prompt_hash;
    response::ParsedResponse parsed;
    // Absent only when the example carries no gradable gold answer.
    std::optional<grading::GradeResult> grade;
    std::vector<errors::ErrorTag> tags;  // EEDP misses only
    metadata::MetadataRecord metadata;
    long latency_ms = 0;
};

// One JSON object per line, no trailing newline. from_jsonl throws
// std::invalid_argument on malformed input (resume uses that to drop a
// torn final line).
std::string record_to_jsonl(const EvalRecord& record);
EvalRecord record_from_jsonl(const std::string& line);

std::vector<EvalRecord> load_records(const std::string& path);
// Every *.jsonl directly under dir, in filename order.
std::vector<EvalRecord> load_run_dir(const std::string& dir);

// "<dataset, lowercase>_<model stem>_<strategy>.jsonl"
std::string record_filename(core::Dataset dataset, const std::string& model,
                            prompting::Strategy strategy);

// Gold answer for grading: the annotated answer, else the gold program
// evaluated against the example's tables.
std::optional<core::AnswerValue> gold_answer(const core::HybridExample& example);

// Single-call render that drops shots one at a time when the context limit
// trips; rethrows ContextOverflow only when k = 0 still does not fit. For
// Decomposers the returned bundle is stage 1 of the chain.
prompting::PromptBundle render_first_prompt(prompting::Strategy strategy,
                                            const core::HybridExample& example,
                                            const std::vector<prompting::Demonstration>& shots,
                                            std::size_t k, std::size_t token_limit = 0);

struct TripleSummary {
    core::Dataset dataset = core::Dataset::FinQA;
    std::string model;
    prompting::Strategy strategy = prompting::Strategy::Direct;
    std::size_t n_records = 0;  // on disk after the run, resumed included
    std::size_t n_graded = 0;
    std::size_t n_correct = 0;
    std::size_t n_failed = 0;   // provider failures; not persisted
    std::size_t n_skipped = 0;  // resume hits
    double accuracy = 0.0;      // n_correct / n_graded, 0 when nothing graded
};

struct RunResult {
    std::vector<TripleSummary> triples;
    std::size_t records_written = 0;
    std::size_t failures = 0;
    std::vector<std::string> failure_log;  // "<file> <example>: reason"
};

// Runs the dataset x model x strategy matrix. Per-record provider failures
// are logged and counted, never fatal; a failed record is simply absent so
// a later --resume retries it. Record files are written incrementally in
// example order, which makes replay runs byte-identical. Throws
// std::invalid_argument when validate() reports problems.
RunResult run(const RunConfig& config);

// The per-triple exit summary run() prints, one line per triple.
std::string format_summary(const RunResult& result);

}  // namespace tabeval::runner
