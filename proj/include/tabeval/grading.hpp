#pragma once

#include "tabeval/core_model.hpp"
#include "tabeval/decimal.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace tabeval::grading {

struct GradeConfig {
    Decimal rel_tol = Decimal("0.005");
    Decimal abs_tol = Decimal("0.0005");
    bool allow_percent_ratio_equiv = true;
    bool allow_scale_equiv = true;
};

enum class MatchForm { None, Exact, Scaled, PercentRatio, Rounded, Span };

std::string_view match_form_name(MatchForm f);

struct GradeResult {
    bool correct = false;
    MatchForm matched_form = MatchForm::None;
    std::string pred_canonical;
    std::string gold_canonical;
};

// |p - g| <= max(abs_tol, rel_tol * max(|p|, |g|)). The relative term uses
// the larger magnitude so grading is symmetric in its arguments.
bool within_tolerance(const Decimal& p, const Decimal& g, const GradeConfig& cfg);

// Lowercases, strips punctuation, collapses whitespace.
std::string normalize_span(std::string_view text);

std::optional<bool> as_yes_no(std::string_view text);

// Canonicalized comparison: raw values first, then (config-gated) scale
// multipliers when the sides carry different scale words, then a single
// factor of 100 when exactly one side is percent-marked, then the
// rounded-to-displayed-precision rule. Spans compare case/space/punct
// insensitively; booleans through yes/no normalization.
GradeResult is_correct(const core::AnswerValue& pred, const core::AnswerValue& gold,
                       const GradeConfig& cfg = {});

}  // namespace tabeval::grading
