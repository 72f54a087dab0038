#include "tabeval/error_analysis.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <map>
#include <set>

#include "tabeval/csv.hpp"
#include "tabeval/metadata.hpp"

namespace tabeval::errors {

namespace {

constexpr ErrorTag kAllTags[] = {
    ErrorTag::E1_MissingEvidence,      ErrorTag::E2_WrongEvidence,
    ErrorTag::R1_DomainKnowledgeDeficit, ErrorTag::R2_QuestionMisinterpretation,
    ErrorTag::C1_WrongInstantiation,   ErrorTag::C2_PrecisionError,
};

void push_unique(std::vector<Decimal>& pool, std::set<std::string>& seen, const Decimal& v) {
    if (is_year_token(v)) return;
    std::string key = to_canonical_string(v);
    if (seen.insert(key).second) pool.push_back(v);
}

// "#3" step references would otherwise read as a bare 3.
std::string strip_step_refs(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '#' && i + 1 < text.size() &&
            std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
            ++i;
            while (i + 1 < text.size() &&
                   std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
                ++i;
            }
            continue;
        }
        out.push_back(text[i]);
    }
    return out;
}

std::string join_values(const std::vector<Decimal>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ", ";
        out += to_canonical_string(values[i]);
    }
    return out;
}

bool any_match(const std::vector<Decimal>& pool, const Decimal& v,
               const grading::GradeConfig& cfg) {
    return std::any_of(pool.begin(), pool.end(),
                       [&](const Decimal& p) { return values_match(p, v, cfg); });
}

// --- program comparison internals ---

struct ArgView {
    enum Kind { Ref, Value, Row } kind = Value;
    std::size_t ref = 0;
    Decimal value;
    std::string row;
};

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

ArgView view_of(const dsl::Operand& operand) {
    ArgView v;
    if (const auto* lit = std::get_if<dsl::Literal>(&operand)) {
        v.kind = ArgView::Value;
        v.value = lit->value;
    } else if (const auto* ref = std::get_if<dsl::StepRef>(&operand)) {
        v.kind = ArgView::Ref;
        v.ref = ref->index;
    } else if (const auto* named = std::get_if<dsl::NamedConst>(&operand)) {
        v.kind = ArgView::Value;
        v.value = named->value;
    } else {
        v.kind = ArgView::Row;
        v.row = lowercase(std::get<dsl::RowRef>(operand).row_label);
    }
    return v;
}

// Value of the referenced step, by evaluating the owning program's prefix.
std::optional<Decimal> ref_value(const dsl::ReasoningProgram& owner, std::size_t index) {
    if (index >= owner.steps.size()) return std::nullopt;
    dsl::ReasoningProgram prefix;
    prefix.steps.assign(owner.steps.begin(), owner.steps.begin() + index + 1);
    try {
        auto answer = dsl::evaluate(prefix);
        if (const auto* num = std::get_if<core::NumberValue>(&answer)) return num->value;
    } catch (const dsl::EvalError&) {
    }
    return std::nullopt;
}

bool args_equal(const ArgView& m, const ArgView& g, const dsl::ReasoningProgram& model,
                const dsl::ReasoningProgram& gold, const grading::GradeConfig& cfg) {
    if (m.kind == ArgView::Row || g.kind == ArgView::Row) {
        return m.kind == ArgView::Row && g.kind == ArgView::Row && m.row == g.row;
    }
    if (m.kind == ArgView::Ref && g.kind == ArgView::Ref) return m.ref == g.ref;
    if (m.kind == ArgView::Value && g.kind == ArgView::Value) {
        return values_match(m.value, g.value, cfg);
    }
    // One side inlined an intermediate result the other side references.
    auto resolved = m.kind == ArgView::Ref ? ref_value(model, m.ref) : ref_value(gold, g.ref);
    const Decimal& literal = m.kind == ArgView::Ref ? g.value : m.value;
    return resolved && values_match(*resolved, literal, cfg);
}

// Tight match for linking an inline literal to a prior step's value: close
// to 0.1% or equal at the literal's displayed rounding. No percent factors
// here; a x100 difference is a real semantic difference inside a program.
bool inline_value_match(const Decimal& literal, const Decimal& computed);

// Dead-step pruning that understands inline restatement: a step stays live
// when a later live step repeats its value as a literal ("Divide 19,201 by
// 25,403" after computing 19,201), not only when a #ref points at it.
dsl::ReasoningProgram prune_with_inline_liveness(const dsl::ReasoningProgram& program) {
    std::size_t n = program.steps.size();
    if (n == 0) return program;
    std::vector<std::optional<Decimal>> values(n);
    for (std::size_t j = 0; j < n; ++j) values[j] = ref_value(program, j);

    std::vector<bool> live(n, false);
    live[n - 1] = true;
    for (std::size_t i = n; i-- > 0;) {
        if (!live[i]) continue;
        for (const auto& arg : program.steps[i].args) {
            if (const auto* ref = std::get_if<dsl::StepRef>(&arg)) {
                if (ref->index < i) live[ref->index] = true;
            } else if (const auto* lit = std::get_if<dsl::Literal>(&arg)) {
                for (std::size_t j = i; j-- > 0;) {
                    if (values[j] && inline_value_match(lit->value, *values[j])) {
                        live[j] = true;
                        break;
                    }
                }
            }
        }
    }

    dsl::ReasoningProgram out;
    std::vector<std::size_t> remap(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!live[i]) continue;
        remap[i] = out.steps.size();
        dsl::Step step = program.steps[i];
        for (auto& arg : step.args) {
            if (auto* ref = std::get_if<dsl::StepRef>(&arg)) ref->index = remap[ref->index];
        }
        out.steps.push_back(std::move(step));
    }
    return out;
}

bool is_trailing_percent_conversion(const dsl::ReasoningProgram& program) {
    if (program.steps.size() < 2) return false;
    const dsl::Step& last = program.steps.back();
    if (last.op != dsl::AtomicOp::Multiply && last.op != dsl::AtomicOp::Divide) return false;
    if (last.args.size() != 2) return false;
    bool saw_hundred = false;
    bool saw_prev_ref = false;
    for (const auto& arg : last.args) {
        ArgView v = view_of(arg);
        if (v.kind == ArgView::Value && v.value == 100) saw_hundred = true;
        if (v.kind == ArgView::Ref && v.ref == program.steps.size() - 2) saw_prev_ref = true;
    }
    return saw_hundred && saw_prev_ref;
}

std::multiset<dsl::AtomicOp> op_multiset(const dsl::ReasoningProgram& program) {
    std::multiset<dsl::AtomicOp> out;
    for (const auto& step : program.steps) out.insert(step.op);
    return out;
}

std::string render_ops(const dsl::ReasoningProgram& program) {
    std::string out;
    for (std::size_t i = 0; i < program.steps.size(); ++i) {
        if (i) out += ", ";
        out += dsl::op_name(program.steps[i].op);
    }
    return out;
}

// --- C2 helpers ---

bool rel_close(const Decimal& a, const Decimal& b) {
    Decimal diff = a - b;
    if (diff < 0) diff = -diff;
    Decimal mag_a = a < 0 ? Decimal(-a) : a;
    Decimal mag_b = b < 0 ? Decimal(-b) : b;
    Decimal mag = mag_a > mag_b ? mag_a : mag_b;
    if (mag == 0) return true;
    return diff <= mag * Decimal("0.001");
}

int displayed_fraction_digits(const Decimal& v) {
    if (v == 0) return 0;
    auto parts = decimal_parts(v);
    int frac = static_cast<int>(parts.digits.size()) - parts.exp10;
    return frac > 0 ? frac : 0;
}

bool inline_value_match(const Decimal& literal, const Decimal& computed) {
    if (rel_close(literal, computed)) return true;
    int frac = displayed_fraction_digits(literal);
    return normalize_precision(round_decimal(computed, frac)) == literal;
}

// Stated values are transcribed at display precision and often in percent
// form; only a disagreement survived by every reading is a precision error.
bool stated_matches_recomputed(const Decimal& stated, const Decimal& computed) {
    int frac = displayed_fraction_digits(stated);
    for (const Decimal& c :
         {computed, normalize_precision(computed * 100),
          normalize_precision(computed / 100)}) {
        if (rel_close(c, stated)) return true;
        if (normalize_precision(round_decimal(c, frac)) == stated) return true;
    }
    return false;
}

}  // namespace

std::string_view tag_name(ErrorTag t) {
    switch (t) {
        case ErrorTag::E1_MissingEvidence: return "E1";
        case ErrorTag::E2_WrongEvidence: return "E2";
        case ErrorTag::R1_DomainKnowledgeDeficit: return "R1";
        case ErrorTag::R2_QuestionMisinterpretation: return "R2";
        case ErrorTag::C1_WrongInstantiation: return "C1";
        case ErrorTag::C2_PrecisionError: return "C2";
    }
    return "E1";
}

std::string_view tag_label(ErrorTag t) {
    switch (t) {
        case ErrorTag::E1_MissingEvidence: return "missing evidence";
        case ErrorTag::E2_WrongEvidence: return "wrong evidence";
        case ErrorTag::R1_DomainKnowledgeDeficit: return "domain knowledge deficit";
        case ErrorTag::R2_QuestionMisinterpretation: return "question misinterpretation";
        case ErrorTag::C1_WrongInstantiation: return "wrong instantiation";
        case ErrorTag::C2_PrecisionError: return "precision error";
    }
    return "";
}

std::optional<ErrorTag> tag_from_name(std::string_view name) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(),
                   [](unsigned char c) { return std::toupper(c); });
    for (ErrorTag t : kAllTags) {
        if (tag_name(t) == upper) return t;
    }
    return std::nullopt;
}

bool values_match(const Decimal& a, const Decimal& b, const grading::GradeConfig& cfg) {
    if (grading::within_tolerance(a, b, cfg)) return true;
    for (const char* factor : {"100", "1000", "1e6", "1e9"}) {
        Decimal f(factor);
        if (grading::within_tolerance(normalize_precision(a * f), b, cfg)) return true;
        if (grading::within_tolerance(a, normalize_precision(b * f), cfg)) return true;
    }
    return false;
}

bool is_year_token(const Decimal& v) {
    if (v < 1900 || v > 2100) return false;
    return normalize_precision(round_decimal(v, 0)) == v;
}

std::vector<Decimal> gold_value_pool(const core::HybridExample& example,
                                     const dsl::ReasoningProgram* gold_program) {
    std::vector<Decimal> pool;
    std::set<std::string> seen;
    for (const auto& ref : example.gold.evidences) {
        try {
            for (const Decimal& v : core::evidence_values(example, ref)) {
                push_unique(pool, seen, v);
            }
        } catch (const core::SchemaError&) {
            // A dangling ref contributes nothing rather than failing tagging.
        }
    }
    if (gold_program) {
        for (const auto& step : gold_program->steps) {
            for (const auto& arg : step.args) {
                if (const auto* lit = std::get_if<dsl::Literal>(&arg)) {
                    push_unique(pool, seen, lit->value);
                }
            }
        }
    }
    return pool;
}

std::vector<Decimal> evidence_numbers(const response::ParsedEEDP& eedp) {
    std::vector<Decimal> pool;
    std::set<std::string> seen;
    for (const auto& line : eedp.evidences) {
        for (const Decimal& v : core::extract_numbers(line)) push_unique(pool, seen, v);
    }
    return pool;
}

std::vector<Decimal> response_numbers(const response::ParsedEEDP& eedp) {
    std::vector<Decimal> pool;
    std::set<std::string> seen;
    for (const auto& line : eedp.evidences) {
        for (const Decimal& v : core::extract_numbers(line)) push_unique(pool, seen, v);
    }
    for (const auto& step : eedp.steps) {
        for (const Decimal& v : core::extract_numbers(step.description)) {
            push_unique(pool, seen, v);
        }
        for (const Decimal& v : core::extract_numbers(strip_step_refs(step.equation))) {
            push_unique(pool, seen, v);
        }
    }
    return pool;
}

ProgramComparison compare_programs(const dsl::ReasoningProgram& model,
                                   const dsl::ReasoningProgram& gold,
                                   const grading::GradeConfig& cfg) {
    ProgramComparison out;
    dsl::ReasoningProgram m = prune_with_inline_liveness(model);
    dsl::ReasoningProgram g = prune_with_inline_liveness(gold);

    // A x100 percent-conversion tail on one side only is a rendering
    // difference, not a formula difference.
    if (is_trailing_percent_conversion(m) && !is_trailing_percent_conversion(g)) {
        m.steps.pop_back();
        out.notes.push_back("ignored model's trailing percent conversion");
    } else if (is_trailing_percent_conversion(g) && !is_trailing_percent_conversion(m)) {
        g.steps.pop_back();
        out.notes.push_back("ignored gold's trailing percent conversion");
    }

    if (op_multiset(m) != op_multiset(g)) {
        out.verdict = ProgramVerdict::OpsDiffer;
        out.notes.push_back("operations differ: model [" + render_ops(m) + "] vs gold [" +
                            render_ops(g) + "]");
        return out;
    }
    bool sequence_matches = true;
    for (std::size_t i = 0; i < m.steps.size(); ++i) {
        if (m.steps[i].op != g.steps[i].op) sequence_matches = false;
    }
    if (!sequence_matches) {
        out.verdict = ProgramVerdict::OpsDiffer;
        out.notes.push_back("same operations in a different order: model [" + render_ops(m) +
                            "] vs gold [" + render_ops(g) + "]");
        return out;
    }

    bool any_swap = false;
    bool any_mismatch = false;
    for (std::size_t i = 0; i < m.steps.size(); ++i) {
        const auto& ms = m.steps[i];
        const auto& gs = g.steps[i];
        if (ms.args.size() != gs.args.size()) {
            any_mismatch = true;
            out.notes.push_back("step " + std::to_string(i + 1) + ": arity differs");
            continue;
        }
        std::vector<ArgView> mv, gv;
        for (const auto& a : ms.args) mv.push_back(view_of(a));
        for (const auto& a : gs.args) gv.push_back(view_of(a));

        auto direct = [&] {
            for (std::size_t k = 0; k < mv.size(); ++k) {
                if (!args_equal(mv[k], gv[k], m, g, cfg)) return false;
            }
            return true;
        };
        auto swapped = [&] {
            if (mv.size() != 2) return false;
            return args_equal(mv[0], gv[1], m, g, cfg) &&
                   args_equal(mv[1], gv[0], m, g, cfg);
        };

        if (direct()) continue;
        if (swapped()) {
            if (dsl::is_commutative(ms.op)) continue;
            any_swap = true;
            out.notes.push_back("step " + std::to_string(i + 1) + ": " +
                                std::string(dsl::op_name(ms.op)) +
                                " arguments are inverted");
            continue;
        }
        any_mismatch = true;
        std::string misses;
        for (std::size_t k = 0; k < mv.size(); ++k) {
            if (args_equal(mv[k], gv[k], m, g, cfg)) continue;
            if (mv[k].kind == ArgView::Value) {
                out.mismatched_model_literals.push_back(mv[k].value);
                if (!misses.empty()) misses += ", ";
                misses += to_canonical_string(mv[k].value);
            }
        }
        out.notes.push_back("step " + std::to_string(i + 1) + ": operand mismatch" +
                            (misses.empty() ? "" : " (model used " + misses + ")"));
    }

    if (any_swap) {
        out.verdict = ProgramVerdict::ArgOrderSwapped;
    } else if (any_mismatch) {
        out.verdict = ProgramVerdict::OperandsDiffer;
    }
    return out;
}

std::vector<std::string> precision_mismatches(const dsl::ReasoningProgram& model,
                                              const std::vector<response::EEDPStep>& steps) {
    std::vector<std::string> out;
    std::size_t n = std::min(model.steps.size(), steps.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (!steps[i].stated_value) continue;
        auto computed = ref_value(model, i);
        if (!computed) continue;
        if (!stated_matches_recomputed(*steps[i].stated_value, *computed)) {
            out.push_back("step " + std::to_string(i + 1) + ": stated " +
                          to_canonical_string(*steps[i].stated_value) + " but recomputed " +
                          to_canonical_string(round_decimal(*computed, 6)));
        }
    }
    return out;
}

TagResult tag(const response::ParsedEEDP& eedp, const core::HybridExample& example,
              const grading::GradeConfig& cfg) {
    TagResult out;

    std::optional<dsl::ReasoningProgram> gold;
    if (example.gold.program_text) {
        try {
            gold = dsl::parse_program(*example.gold.program_text);
        } catch (const dsl::ParseError& e) {
            out.diagnostics.push_back(std::string("gold program unparseable: ") + e.what());
        }
    } else {
        out.diagnostics.push_back("example has no gold program");
    }

    auto gold_pool = gold_value_pool(example, gold ? &*gold : nullptr);
    auto model_pool = response_numbers(eedp);
    auto model_evidence = evidence_numbers(eedp);

    std::vector<Decimal> missing;
    for (const auto& v : gold_pool) {
        if (!any_match(model_pool, v, cfg)) missing.push_back(v);
    }
    std::vector<Decimal> extra;
    for (const auto& v : model_evidence) {
        if (!any_match(gold_pool, v, cfg)) extra.push_back(v);
    }

    // An extra value standing in for a missing one is one wrong extraction,
    // not a missing plus a wrong; only unpaired absences count as E1.
    if (missing.size() > extra.size()) {
        out.tags.push_back(ErrorTag::E1_MissingEvidence);
        out.diagnostics.push_back("gold values absent from response: " + join_values(missing));
    }
    if (!extra.empty()) {
        out.tags.push_back(ErrorTag::E2_WrongEvidence);
        out.diagnostics.push_back("evidence values not in gold: " + join_values(extra));
    }

    auto mapping = response::steps_to_program(eedp);
    if (!mapping.program) {
        out.diagnostics.push_back("model steps not mappable to a program");
        for (const auto& d : mapping.diagnostics) out.diagnostics.push_back(d);
    } else if (gold) {
        auto cmp = compare_programs(*mapping.program, *gold, cfg);
        for (const auto& note : cmp.notes) out.diagnostics.push_back(note);
        switch (cmp.verdict) {
            case ProgramVerdict::OpsDiffer:
            case ProgramVerdict::ArgOrderSwapped: {
                auto category = metadata::classify_question(example);
                out.tags.push_back(category.category == metadata::Category::InDomainInfo
                                       ? ErrorTag::R1_DomainKnowledgeDeficit
                                       : ErrorTag::R2_QuestionMisinterpretation);
                break;
            }
            case ProgramVerdict::OperandsDiffer: {
                bool all_substituted =
                    !cmp.mismatched_model_literals.empty() && !extra.empty() &&
                    std::all_of(cmp.mismatched_model_literals.begin(),
                                cmp.mismatched_model_literals.end(), [&](const Decimal& v) {
                                    return any_match(extra, v, cfg);
                                });
                if (all_substituted) {
                    out.diagnostics.push_back(
                        "operand mismatches already covered by the wrong-evidence tag");
                } else {
                    out.tags.push_back(ErrorTag::C1_WrongInstantiation);
                }
                break;
            }
            case ProgramVerdict::Match: {
                auto mismatches = precision_mismatches(*mapping.program, eedp.steps);
                if (!mismatches.empty()) {
                    out.tags.push_back(ErrorTag::C2_PrecisionError);
                    for (auto& d : mismatches) out.diagnostics.push_back(std::move(d));
                }
                break;
            }
        }
    }

    if (out.tags.empty()) {
        out.needs_review = true;
        out.diagnostics.push_back("needs review");
    }
    return out;
}

std::vector<SummaryRow> summarize(const std::vector<TaggedError>& errors) {
    constexpr core::Dataset kDatasets[] = {core::Dataset::FinQA, core::Dataset::TATQA,
                                           core::Dataset::ConvFinQA,
                                           core::Dataset::Multihiertt};
    const std::array<std::string, 5> labels = {"E1", "E2", "R1", "R2", "C"};

    std::map<core::Dataset, std::array<int, 5>> counts;
    for (const auto& err : errors) {
        auto& slot = counts[err.dataset];
        for (ErrorTag t : err.tags) {
            switch (t) {
                case ErrorTag::E1_MissingEvidence: ++slot[0]; break;
                case ErrorTag::E2_WrongEvidence: ++slot[1]; break;
                case ErrorTag::R1_DomainKnowledgeDeficit: ++slot[2]; break;
                case ErrorTag::R2_QuestionMisinterpretation: ++slot[3]; break;
                case ErrorTag::C1_WrongInstantiation:
                case ErrorTag::C2_PrecisionError: ++slot[4]; break;
            }
        }
    }

    std::vector<SummaryRow> rows;
    for (core::Dataset d : kDatasets) {
        auto it = counts.find(d);
        if (it == counts.end()) continue;
        int total = 0;
        for (int c : it->second) total += c;
        if (total == 0) continue;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (it->second[i] == 0) continue;
            SummaryRow row;
            row.dataset = d;
            row.label = labels[i];
            row.count = it->second[i];
            Decimal pct = normalize_precision(Decimal(row.count * 100) / Decimal(total));
            row.pct = std::stod(format_fixed(pct, 2));
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out = "dataset,tag,count,pct\n";
    for (const auto& row : rows) {
        char pct[32];
        std::snprintf(pct, sizeof pct, "%.2f", row.pct);
        out += csv::join_row({std::string(core::dataset_name(row.dataset)), row.label,
                              std::to_string(row.count), pct});
    }
    return out;
}

std::string review_csv(const std::vector<ReviewRow>& rows) {
    std::string out =
        "id,dataset,question,gold_program,model_evidences,model_steps,auto_tags,human_tag\n";
    for (const auto& row : rows) {
        std::string tags;
        for (std::size_t i = 0; i < row.auto_tags.size(); ++i) {
            if (i) tags += ";";
            tags += tag_name(row.auto_tags[i]);
        }
        out += csv::join_row({row.id, std::string(core::dataset_name(row.dataset)),
                              row.question, row.gold_program, row.model_evidences,
                              row.model_steps, tags,
                              row.human_tag ? std::string(tag_name(*row.human_tag)) : ""});
    }
    return out;
}

ReviewImport import_review(const std::string& text) {
    ReviewImport out;
    auto rows = csv::parse(text);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        std::string line = "line " + std::to_string(i + 1);
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != 8) {
            out.errors.push_back(line + ": expected 8 columns, got " +
                                 std::to_string(row.size()));
            continue;
        }
        ReviewRow parsed;
        parsed.id = row[0];
        auto dataset = core::dataset_from_name(row[1]);
        if (!dataset) {
            out.errors.push_back(line + ": unknown dataset " + row[1]);
            continue;
        }
        parsed.dataset = *dataset;
        parsed.question = row[2];
        parsed.gold_program = row[3];
        parsed.model_evidences = row[4];
        parsed.model_steps = row[5];

        bool bad = false;
        std::string_view tags = row[6];
        while (!tags.empty()) {
            auto sep = tags.find(';');
            std::string_view token = tags.substr(0, sep);
            tags = sep == std::string_view::npos ? std::string_view{} : tags.substr(sep + 1);
            if (token.empty()) continue;
            auto t = tag_from_name(token);
            if (!t) {
                out.errors.push_back(line + ": unknown tag " + std::string(token));
                bad = true;
                break;
            }
            parsed.auto_tags.push_back(*t);
        }
        if (bad) continue;
        if (!row[7].empty()) {
            auto t = tag_from_name(row[7]);
            if (!t) {
                out.errors.push_back(line + ": unknown tag " + row[7]);
                continue;
            }
            parsed.human_tag = *t;
        }
        out.rows.push_back(std::move(parsed));
    }
    return out;
}

void apply_human_tags(std::vector<TaggedError>& errors,
                      const std::vector<ReviewRow>& review) {
    std::map<std::string, ErrorTag> by_id;
    for (const auto& row : review) {
        if (row.human_tag) by_id[row.id] = *row.human_tag;
    }
    for (auto& err : errors) {
        auto it = by_id.find(err.example_id);
        if (it == by_id.end()) continue;
        err.tags = {it->second};
        err.provenance = Provenance::Human;
    }
}

}  // namespace tabeval::errors
