#pragma once

#include "tabeval/core_model.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tabeval::prompting {

// Decomposers is a 3-call chain; the other four are single-call.
enum class Strategy { Direct, CoT, PoT, Decomposers, EEDP };

std::string_view strategy_name(Strategy s);
std::optional<Strategy> strategy_from_name(std::string_view name);

struct Demonstration {
    std::string premise;   // serialized table + surrounding text
    std::string question;
    std::string target;    // answer / explanation / code / structured response
};

struct PromptBundle {
    Strategy strategy = Strategy::Direct;
    std::string instruction;
    std::vector<Demonstration> shots;
    std::string query_premise;
    std::string question;
    std::string rendered;
    std::size_t approx_tokens = 0;  // chars / 4
    int stage = 0;                  // 0 single-call, 1..3 for the decomposer chain
};

class ContextOverflow : public std::runtime_error {
public:
    explicit ContextOverflow(std::size_t approx_tokens, std::size_t limit);
};

// Pre-text lines, each table as pipe-delimited rows (two leading spaces per
// indent level on the row's first cell), then post-text. Deterministic.
std::string serialize_premise(const core::HybridExample& example);

// Renders a single-call strategy with the first k shots. token_limit 0 means
// unlimited; a breached limit throws ContextOverflow (callers drop to a
// smaller k first).
PromptBundle render(Strategy strategy, const core::HybridExample& example,
                    const std::vector<Demonstration>& shots, std::size_t k,
                    std::size_t token_limit = 0);

// The three-stage decomposer chain: subtable selection, question
// decomposition, final answer. Stages 2 and 3 carry placeholders
// ("{selected_rows}", "{subquestions}") the runner fills from prior
// responses before sending.
std::vector<PromptBundle> render_decomposers(const core::HybridExample& example,
                                             const std::vector<Demonstration>& shots,
                                             std::size_t k, std::size_t token_limit = 0);

struct DecomposerFill {
    std::string selected_rows;   // raw stage-1 response (stage-2 placeholder)
    std::string pruned_premise;  // built via prune_premise (stage-3 placeholder)
    std::string subquestions;    // raw stage-2 response (stage-3 placeholder)
};

// Fills a stage-2/3 decomposer bundle with the model's earlier answers.
// Throws std::logic_error when a placeholder the bundle carries has no fill
// value — sending stage 3 before its inputs exist is a sequencing bug.
PromptBundle fill_decomposer_stage(const PromptBundle& bundle, const DecomposerFill& fill);

// Builds the pruned premise for decomposer stage 3 from a stage-1 response
// that names data rows (1-based, headers always kept).
std::string prune_premise(const core::HybridExample& example,
                          const std::vector<std::size_t>& keep_rows);

// Reads data-row numbers out of a stage-1 response ("Rows: 2, 5"), keeping
// those in [1, n_data_rows], deduplicated, in numeric order.
std::vector<std::size_t> parse_row_selection(std::string_view text,
                                             std::size_t n_data_rows);

std::size_t approx_token_count(std::string_view text);

// Shot banks ship as JSONL Demonstration records, one file per
// (dataset, strategy) pair named "<dataset>_<strategy>.jsonl".
std::vector<Demonstration> load_shot_bank(const std::string& path);
// Validating overload: every target must parse back in the strategy's
// expected shape (structured sections for EEDP, runnable code for PoT, the
// sentinel for CoT/Decomposers). Throws core::SchemaError otherwise.
std::vector<Demonstration> load_shot_bank(const std::string& path, Strategy strategy);
// Returns the reason a demonstration does not fit the strategy, if any.
std::optional<std::string> validate_demonstration(Strategy strategy,
                                                  const Demonstration& d);
void save_shot_bank(const std::string& path, const std::vector<Demonstration>& shots);
std::string shot_bank_filename(core::Dataset dataset, Strategy strategy);

}  // namespace tabeval::prompting
