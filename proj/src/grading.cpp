#include "tabeval/grading.hpp"

#include <algorithm>
#include <cctype>
#include <vector>

namespace tabeval::grading {

namespace {

struct CanonicalNumber {
    Decimal value;
    core::Scale scale = core::Scale::Unit;
    bool is_percent = false;
    std::optional<int> decimals;
};

std::optional<CanonicalNumber> to_number(const core::AnswerValue& v) {
    if (const auto* n = std::get_if<core::NumberValue>(&v))
        return CanonicalNumber{n->value, n->scale, n->is_percent, n->decimals};
    if (const auto* s = std::get_if<core::SpanValue>(&v)) {
        core::AnswerValue parsed = core::parse_answer_text(s->text);
        if (const auto* n = std::get_if<core::NumberValue>(&parsed))
            return CanonicalNumber{n->value, n->scale, n->is_percent, n->decimals};
    }
    return std::nullopt;
}

std::optional<bool> to_bool(const core::AnswerValue& v) {
    if (const auto* b = std::get_if<core::BoolValue>(&v)) return b->value;
    if (const auto* s = std::get_if<core::SpanValue>(&v)) return as_yes_no(s->text);
    return std::nullopt;
}

std::string value_text(const core::AnswerValue& v) {
    if (const auto* s = std::get_if<core::SpanValue>(&v)) return s->text;
    return core::answer_to_string(v);
}

// One side of a comparison candidate: value plus the displayed fraction
// digits, kept in sync when a transform shifts the decimal point.
struct Side {
    Decimal value;
    std::optional<int> decimals;

    // Multiplies by 10^k; the displayed precision moves with the point
    // ("1.2 million" shown to one decimal is a round-to-100k statement, so
    // decimals may go negative here).
    Side shifted(int factor_exp10) const {
        Side out = *this;
        out.value = normalize_precision(value * boost::multiprecision::pow(
                                                    Decimal(10), factor_exp10));
        if (out.decimals) out.decimals = *out.decimals - factor_exp10;
        return out;
    }
};

struct Candidate {
    Side pred;
    Side gold;
    MatchForm form;
};

int scale_exp10(core::Scale s) {
    switch (s) {
        case core::Scale::Thousand: return 3;
        case core::Scale::Million: return 6;
        case core::Scale::Billion: return 9;
        default: return 0;
    }
}

bool rounded_match(const Side& a, const Side& b) {
    // a's displayed precision: is b, rounded to it, exactly a?
    if (!a.decimals) return false;
    return round_decimal(b.value, *a.decimals) == round_decimal(a.value, *a.decimals) &&
           round_decimal(a.value, *a.decimals) == a.value;
}

}  // namespace

std::string_view match_form_name(MatchForm f) {
    switch (f) {
        case MatchForm::None: return "none";
        case MatchForm::Exact: return "exact";
        case MatchForm::Scaled: return "scaled";
        case MatchForm::PercentRatio: return "percent_ratio";
        case MatchForm::Rounded: return "rounded";
        case MatchForm::Span: return "span";
    }
    return "none";
}

bool within_tolerance(const Decimal& p, const Decimal& g, const GradeConfig& cfg) {
    Decimal diff = p - g;
    if (diff < 0) diff = -diff;
    Decimal mp = p < 0 ? Decimal(-p) : p;
    Decimal mg = g < 0 ? Decimal(-g) : g;
    Decimal tol = cfg.rel_tol * std::max(mp, mg);
    if (cfg.abs_tol > tol) tol = cfg.abs_tol;
    return diff <= tol;
}

std::string normalize_span(std::string_view text) {
    std::string out;
    bool pending_space = false;
    for (char ch : text) {
        unsigned char c = static_cast<unsigned char>(ch);
        if (std::isalnum(c)) {
            if (pending_space && !out.empty()) out.push_back(' ');
            pending_space = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        } else if (std::isspace(c)) {
            pending_space = true;
        }
        // punctuation dropped entirely
    }
    return out;
}

std::optional<bool> as_yes_no(std::string_view text) {
    std::string n = normalize_span(text);
    if (n == "yes" || n == "y" || n == "true") return true;
    if (n == "no" || n == "n" || n == "false") return false;
    return std::nullopt;
}

GradeResult is_correct(const core::AnswerValue& pred, const core::AnswerValue& gold,
                       const GradeConfig& cfg) {
    GradeResult result;

    auto pn = to_number(pred);
    auto gn = to_number(gold);
    if (pn && gn) {
        result.pred_canonical = to_canonical_string(pn->value);
        result.gold_canonical = to_canonical_string(gn->value);

        std::vector<Candidate> candidates;
        Side p0{pn->value, pn->decimals};
        Side g0{gn->value, gn->decimals};
        int pe = scale_exp10(pn->scale);
        int ge = scale_exp10(gn->scale);
        if (pe == ge) {
            // Same (or no) scale word: compare as written. A percent mark on
            // one side does not disturb raw equality — that match is exact.
            candidates.push_back({p0, g0, MatchForm::Exact});
        } else if (cfg.allow_scale_equiv) {
            // Differing scale words compare in absolute space only; "1.5
            // billion" never matches "1.5 million" on digits alone.
            p0 = p0.shifted(pe);
            g0 = g0.shifted(ge);
            candidates.push_back({p0, g0, MatchForm::Scaled});
        }
        if (!candidates.empty() && cfg.allow_percent_ratio_equiv &&
            pn->is_percent != gn->is_percent) {
            // Exactly one side is percent-marked: move one factor of 100 in
            // each direction, never more.
            if (pn->is_percent) {
                candidates.push_back({p0.shifted(-2), g0, MatchForm::PercentRatio});
                candidates.push_back({p0, g0.shifted(2), MatchForm::PercentRatio});
            } else {
                candidates.push_back({p0, g0.shifted(-2), MatchForm::PercentRatio});
                candidates.push_back({p0.shifted(2), g0, MatchForm::PercentRatio});
            }
        }

        for (const auto& cand : candidates) {
            if (within_tolerance(cand.pred.value, cand.gold.value, cfg)) {
                result.correct = true;
                result.matched_form = cand.form;
                return result;
            }
        }
        for (const auto& cand : candidates) {
            if (rounded_match(cand.pred, cand.gold) || rounded_match(cand.gold, cand.pred)) {
                result.correct = true;
                result.matched_form = MatchForm::Rounded;
                return result;
            }
        }
        return result;
    }

    auto pb = to_bool(pred);
    auto gb = to_bool(gold);
    if (pb && gb) {
        result.correct = *pb == *gb;
        bool both_bool = std::holds_alternative<core::BoolValue>(pred) &&
                         std::holds_alternative<core::BoolValue>(gold);
        if (result.correct)
            result.matched_form = both_bool ? MatchForm::Exact : MatchForm::Span;
        result.pred_canonical = *pb ? "yes" : "no";
        result.gold_canonical = *gb ? "yes" : "no";
        return result;
    }

    std::string ps = normalize_span(value_text(pred));
    std::string gs = normalize_span(value_text(gold));
    result.pred_canonical = ps;
    result.gold_canonical = gs;
    if (!ps.empty() && ps == gs) {
        result.correct = true;
        result.matched_form = MatchForm::Span;
    }
    return result;
}

}  // namespace tabeval::grading
