#pragma once

#include "tabeval/core_model.hpp"
#include "tabeval/decimal.hpp"
#include "tabeval/program_dsl.hpp"
#include "tabeval/prompting.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tabeval::response {

// How the final answer was recovered: via the strategy's designated carrier
// (the sentinel phrase, a Direct whole-output answer, or an executed PoT
// block), via the last-number heuristic, or not at all.
enum class Confidence { Pattern, Fallback, None };

std::string_view confidence_name(Confidence c);

struct EEDPStep {
    std::string description;
    std::string equation;                 // lhs of "Response k: lhs = value"
    std::optional<Decimal> stated_value;  // rhs, as the model stated it
};

struct ParsedEEDP {
    std::optional<std::string> domain_knowledge;
    std::vector<std::string> evidences;
    std::vector<EEDPStep> steps;
    std::optional<core::AnswerValue> final_answer;
};

struct ParsedResponse {
    std::optional<core::AnswerValue> final_answer;
    Confidence confidence = Confidence::None;
    std::optional<ParsedEEDP> eedp;
    std::optional<Decimal> pot_value;
    std::vector<std::string> diagnostics;  // e.g. "unexecutable: ..."
    std::string raw;
};

// Total over arbitrary bytes; never throws. Absence of an answer is encoded
// as confidence=None.
ParsedResponse parse(prompting::Strategy strategy, std::string_view raw);

// Scans for the LAST "The final answer is" (case-insensitive, markup
// tolerated) and parses the value after it.
std::optional<core::AnswerValue> find_sentinel_answer(std::string_view raw);

// Last numeric token anywhere in the text; scale/percent marks are not
// recovered on this path.
std::optional<core::AnswerValue> last_number_fallback(std::string_view raw);

// EEDP section scan (Domain Knowledge / Gold Evidences / Steps / final
// answer). Missing sections stay absent.
ParsedEEDP parse_eedp(std::string_view raw);

struct StepsMapping {
    std::optional<dsl::ReasoningProgram> program;
    std::vector<std::string> diagnostics;  // one entry per unmappable step
};

// Maps controlled-style step descriptions ("Subtract X from Y", "Divide #1
// by Z", "Raise ... to the power of ...") onto atomic operations, falling
// back to the step's stated equation. Returns no program when any step is
// unmappable — it never guesses.
StepsMapping steps_to_program(const ParsedEEDP& eedp);

}  // namespace tabeval::response
