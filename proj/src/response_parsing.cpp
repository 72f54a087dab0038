#include "tabeval/response_parsing.hpp"

#include "tabeval/expr.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace tabeval::response {

namespace {

constexpr std::string_view kSentinel = "the final answer is";

char lower(char c) {
    return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

std::string to_lower_copy(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](char c) { return lower(c); });
    return out;
}

std::string_view trim_view(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::size_t ifind_last(std::string_view hay, std::string_view needle) {
    if (needle.empty() || hay.size() < needle.size()) return std::string_view::npos;
    for (std::size_t i = hay.size() - needle.size() + 1; i-- > 0;) {
        bool hit = true;
        for (std::size_t j = 0; j < needle.size(); ++j) {
            if (lower(hay[i + j]) != lower(needle[j])) {
                hit = false;
                break;
            }
        }
        if (hit) return i;
    }
    return std::string_view::npos;
}

bool istarts_with(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (lower(s[i]) != lower(prefix[i])) return false;
    return true;
}

// Leading/trailing markdown clutter ("**", "###", "__") around a header line.
std::string_view strip_markup(std::string_view s) {
    s = trim_view(s);
    while (!s.empty() && (s.front() == '*' || s.front() == '_' || s.front() == '#' ||
                          s.front() == '`'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == '*' || s.back() == '_' || s.back() == '`'))
        s.remove_suffix(1);
    return trim_view(s);
}

bool is_number_or_bool(const core::AnswerValue& v) {
    return !std::holds_alternative<core::SpanValue>(v);
}

// Parses the value text following the sentinel: whole line first, then the
// longest word-prefix that yields a number or boolean.
std::optional<core::AnswerValue> parse_answer_tail(std::string_view tail) {
    tail = trim_view(tail);
    if (!tail.empty() && (tail.front() == ':' || tail.front() == '=')) {
        tail.remove_prefix(1);
        tail = trim_view(tail);
    }
    if (tail.empty()) return std::nullopt;

    core::AnswerValue whole = core::parse_answer_text(tail);
    if (is_number_or_bool(whole)) return whole;

    // word-prefix scan, longest numeric prefix wins
    std::optional<core::AnswerValue> best;
    std::size_t pos = 0;
    while (pos < tail.size()) {
        std::size_t next = tail.find(' ', pos);
        if (next == std::string_view::npos) next = tail.size();
        core::AnswerValue v = core::parse_answer_text(tail.substr(0, next));
        if (is_number_or_bool(v)) best = v;
        pos = next + 1;
    }
    if (best) return best;

    if (const auto* span = std::get_if<core::SpanValue>(&whole); span && !span->text.empty())
        return whole;
    return std::nullopt;
}

struct Line {
    std::string_view text;
    std::size_t start = 0;
};

std::vector<Line> split_lines(std::string_view raw) {
    std::vector<Line> lines;
    std::size_t pos = 0;
    while (pos <= raw.size()) {
        std::size_t end = raw.find('\n', pos);
        if (end == std::string_view::npos) end = raw.size();
        std::string_view line = raw.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back({line, pos});
        if (end == raw.size()) break;
        pos = end + 1;
    }
    return lines;
}

// "1." / "2)" list starters. Returns the text after the marker, or nullopt.
std::optional<std::pair<int, std::string_view>> numbered_item(std::string_view line) {
    line = trim_view(line);
    std::size_t i = 0;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
    if (i == 0 || i >= line.size()) return std::nullopt;
    if (line[i] != '.' && line[i] != ')') return std::nullopt;
    int n = 0;
    for (std::size_t j = 0; j < i; ++j) n = n * 10 + (line[j] - '0');
    return std::make_pair(n, trim_view(line.substr(i + 1)));
}

std::optional<std::string_view> bullet_item(std::string_view line) {
    line = trim_view(line);
    if (line.size() >= 2 && (line[0] == '-' || line[0] == '*') && line[1] == ' ')
        return trim_view(line.substr(2));
    // UTF-8 bullet •
    if (line.size() >= 4 && line.substr(0, 3) == "\xE2\x80\xA2")
        return trim_view(line.substr(3));
    return std::nullopt;
}

enum class Section { Preamble, DomainKnowledge, Evidences, Steps };

std::optional<Section> section_header(std::string_view line, std::string_view* rest) {
    std::string_view stripped = strip_markup(line);
    for (auto [name, alt, sec] :
         {std::tuple{"domain knowledge:", "domain knowledge :", Section::DomainKnowledge},
          std::tuple{"gold evidences:", "gold evidence:", Section::Evidences},
          std::tuple{"steps:", "step:", Section::Steps}}) {
        for (std::string_view header : {std::string_view(name), std::string_view(alt)}) {
            if (istarts_with(stripped, header)) {
                std::string_view r = trim_view(stripped.substr(header.size()));
                // the closing half of a bold "**Header:**" wrapper
                while (!r.empty() && (r.front() == '*' || r.front() == '_' || r.front() == '`'))
                    r.remove_prefix(1);
                *rest = trim_view(r);
                return sec;
            }
        }
    }
    return std::nullopt;
}

// "Response 2: -5830 / 25403 = -0.2295" -> (2, equation, stated value)
struct ResponseLine {
    int index = 0;
    std::string equation;
    std::optional<Decimal> stated;
};

std::optional<ResponseLine> response_line(std::string_view line) {
    std::string_view s = strip_markup(line);
    // tolerate a leading list bullet before "Response"
    if (auto b = bullet_item(s)) s = strip_markup(*b);
    if (!istarts_with(s, "response")) return std::nullopt;
    s.remove_prefix(std::string_view("response").size());
    s = trim_view(s);
    std::size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == 0) return std::nullopt;
    ResponseLine out;
    out.index = std::atoi(std::string(s.substr(0, i)).c_str());
    s = trim_view(s.substr(i));
    if (s.empty() || s.front() != ':') return std::nullopt;
    s = trim_view(s.substr(1));
    while (!s.empty() && (s.front() == '*' || s.front() == '_' || s.front() == '`'))
        s.remove_prefix(1);
    s = trim_view(s);
    // split at the last '=' so "a = b = c" keeps the full derivation left
    std::size_t eq = s.rfind('=');
    if (eq == std::string_view::npos) {
        out.equation = std::string(s);
        return out;
    }
    out.equation = std::string(trim_view(s.substr(0, eq)));
    std::string_view rhs = strip_markup(s.substr(eq + 1));
    if (auto cell = core::parse_numeric_cell(rhs)) out.stated = cell->value;
    return out;
}

// ---- steps_to_program helpers ----------------------------------------------

// Trailing purpose clauses ("... by 100 to get the percentage") confuse
// operand phrases; cut them before splitting.
std::string_view strip_purpose(std::string_view s) {
    static constexpr std::string_view markers[] = {
        " to get ",    " to obtain ",    " to find ",  " to express ",
        " to arrive ", " to determine ", " to compute "," to calculate ",
        " to yield ",  " in order to ",
    };
    std::string low = to_lower_copy(s);
    std::size_t cut = std::string_view::npos;
    for (auto m : markers) {
        std::size_t at = low.find(m);
        if (at != std::string_view::npos && at < cut) cut = at;
    }
    if (cut != std::string_view::npos) s = s.substr(0, cut);
    return trim_view(s);
}

// Replaces "#12" with "__s12" so the expression parser can treat step
// references as names instead of comments.
std::string substitute_step_refs(std::string_view s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '#' && i + 1 < s.size() &&
            std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
            out += "__s";
        } else {
            out += s[i];
        }
    }
    return out;
}

struct OperandResult {
    std::optional<dsl::Operand> operand;
    std::string why;  // filled on failure
};

// n_prior = number of steps already mapped (so "#k" must have k <= n_prior).
OperandResult resolve_operand(std::string_view phrase, std::size_t n_prior) {
    phrase = trim_view(phrase);
    if (phrase.empty()) return {std::nullopt, "empty operand"};

    // 1. step reference anywhere in the phrase
    for (std::size_t i = 0; i + 1 < phrase.size(); ++i) {
        if (phrase[i] == '#' && std::isdigit(static_cast<unsigned char>(phrase[i + 1]))) {
            std::size_t j = i + 1;
            int k = 0;
            while (j < phrase.size() && std::isdigit(static_cast<unsigned char>(phrase[j])))
                k = k * 10 + (phrase[j++] - '0');
            if (k < 1 || static_cast<std::size_t>(k) > n_prior)
                return {std::nullopt,
                        "step reference #" + std::to_string(k) + " out of range"};
            return {dsl::Operand(dsl::StepRef{static_cast<std::size_t>(k - 1)}), ""};
        }
    }

    // 2. the whole phrase as one number ("25403", "$19,573", "100%")
    if (auto cell = core::parse_numeric_cell(phrase)) {
        Decimal v = cell->value;
        if (cell->is_percent) v = normalize_precision(v / 100);
        return {dsl::Operand(dsl::Literal{v}), ""};
    }

    // 3. a parenthesized constant expression ("the ending value (208.14)",
    //    "(1/5)")
    std::size_t open = phrase.find('(');
    while (open != std::string_view::npos) {
        std::size_t close = phrase.find(')', open + 1);
        if (close == std::string_view::npos) break;
        std::string_view inner = phrase.substr(open + 1, close - open - 1);
        try {
            expr::ExprPtr e = expr::parse_expression(inner);
            if (expr::is_constant(*e))
                return {dsl::Operand(dsl::Literal{expr::eval_expression(*e, {})}), ""};
        } catch (const expr::ExprError&) {
            // fall through to the next candidate
        }
        open = phrase.find('(', close + 1);
    }

    // 4. exactly one bare number somewhere in the phrase — but not when the
    //    phrase holds arithmetic the number is only part of ("(1/number of
    //    years)" must not resolve to 1)
    bool has_operator = phrase.find('/') != std::string_view::npos ||
                        phrase.find('*') != std::string_view::npos ||
                        phrase.find('+') != std::string_view::npos ||
                        phrase.find('^') != std::string_view::npos ||
                        phrase.find(" - ") != std::string_view::npos;
    if (!has_operator) {
        std::vector<Decimal> nums = core::extract_numbers(phrase);
        if (nums.size() == 1) return {dsl::Operand(dsl::Literal{nums.front()}), ""};
        if (nums.size() > 1)
            return {std::nullopt, "ambiguous operand \"" + std::string(phrase) + "\""};
    }
    return {std::nullopt, "no value in \"" + std::string(phrase) + "\""};
}

// Splits "X <sep> Y" at the LAST occurrence of sep (case-insensitive) so
// descriptive left sides ("the value obtained in #1") stay intact.
std::optional<std::pair<std::string_view, std::string_view>> split_last(
    std::string_view s, std::string_view sep) {
    std::string low = to_lower_copy(s);
    std::size_t at = low.rfind(std::string(sep));
    if (at == std::string::npos) return std::nullopt;
    return std::make_pair(trim_view(s.substr(0, at)),
                          trim_view(s.substr(at + sep.size())));
}

struct MappedStep {
    std::optional<dsl::Step> step;
    std::string why;
};

MappedStep map_description(std::string_view desc, std::size_t n_prior) {
    std::string_view s = strip_purpose(trim_view(desc));
    while (!s.empty() && (s.back() == '.' || s.back() == ':')) s.remove_suffix(1);
    std::string low = to_lower_copy(s);

    auto two = [&](dsl::AtomicOp op, std::string_view a,
                   std::string_view b) -> MappedStep {
        OperandResult lhs = resolve_operand(a, n_prior);
        if (!lhs.operand) return {std::nullopt, lhs.why};
        OperandResult rhs = resolve_operand(b, n_prior);
        if (!rhs.operand) return {std::nullopt, rhs.why};
        return {dsl::Step{op, {*lhs.operand, *rhs.operand}}, ""};
    };

    if (istarts_with(low, "subtract ")) {
        // "Subtract X from Y" computes Y - X
        if (auto parts = split_last(s.substr(9), " from "))
            return two(dsl::AtomicOp::Subtract, parts->second, parts->first);
        return {std::nullopt, "subtract step without 'from'"};
    }
    if (istarts_with(low, "add ")) {
        for (std::string_view sep : {std::string_view(" and "), std::string_view(" to ")})
            if (auto parts = split_last(s.substr(4), sep))
                return two(dsl::AtomicOp::Add, parts->first, parts->second);
        return {std::nullopt, "add step without 'and'/'to'"};
    }
    if (istarts_with(low, "divide ")) {
        if (auto parts = split_last(s.substr(7), " by "))
            return two(dsl::AtomicOp::Divide, parts->first, parts->second);
        return {std::nullopt, "divide step without 'by'"};
    }
    if (istarts_with(low, "multiply ")) {
        for (std::string_view sep : {std::string_view(" by "), std::string_view(" and ")})
            if (auto parts = split_last(s.substr(9), sep))
                return two(dsl::AtomicOp::Multiply, parts->first, parts->second);
        return {std::nullopt, "multiply step without 'by'/'and'"};
    }
    if (istarts_with(low, "raise ")) {
        for (std::string_view sep :
             {std::string_view(" to the power of "), std::string_view(" to the power ")})
            if (auto parts = split_last(s.substr(6), sep))
                return two(dsl::AtomicOp::Exp, parts->first, parts->second);
        return {std::nullopt, "raise step without 'to the power'"};
    }
    for (auto [cue, op] : {std::pair{std::string_view("minimum of "), dsl::AtomicOp::Min},
                           std::pair{std::string_view("maximum of "), dsl::AtomicOp::Max}}) {
        std::size_t at = low.find(cue);
        if (at != std::string::npos)
            if (auto parts = split_last(s.substr(at + cue.size()), " and "))
                return two(op, parts->first, parts->second);
    }
    if (low.find("greater than") != std::string::npos) {
        if (auto parts = split_last(s, " greater than ")) {
            // drop interrogative lead-ins ("check if", "is")
            std::string_view x = parts->first;
            std::string xl = to_lower_copy(x);
            for (std::string_view lead : {std::string_view("check if "),
                                          std::string_view("check whether "),
                                          std::string_view("is "), std::string_view("if ")}) {
                if (istarts_with(xl, lead)) {
                    x = trim_view(x.substr(lead.size()));
                    xl = to_lower_copy(x);
                }
            }
            return two(dsl::AtomicOp::Greater, x, parts->second);
        }
    }
    return {std::nullopt, "no controlled-style verb"};
}

MappedStep map_equation(const std::string& equation, std::size_t n_prior) {
    if (equation.empty()) return {std::nullopt, "no equation"};
    std::string prepared = substitute_step_refs(equation);
    expr::ExprPtr e;
    try {
        e = expr::parse_expression(prepared);
    } catch (const expr::ExprError& err) {
        return {std::nullopt, std::string("equation: ") + err.what()};
    }

    dsl::AtomicOp op;
    switch (e->node) {
        case expr::Expr::Node::Add: op = dsl::AtomicOp::Add; break;
        case expr::Expr::Node::Sub: op = dsl::AtomicOp::Subtract; break;
        case expr::Expr::Node::Mul: op = dsl::AtomicOp::Multiply; break;
        case expr::Expr::Node::Div: op = dsl::AtomicOp::Divide; break;
        case expr::Expr::Node::Pow: op = dsl::AtomicOp::Exp; break;
        default: return {std::nullopt, "equation is not a single binary operation"};
    }

    auto fold = [&](const expr::Expr& side) -> OperandResult {
        if (side.node == expr::Expr::Node::Name) {
            if (side.name.size() > 3 && side.name.rfind("__s", 0) == 0) {
                int k = std::atoi(side.name.c_str() + 3);
                if (k < 1 || static_cast<std::size_t>(k) > n_prior)
                    return {std::nullopt,
                            "step reference #" + std::to_string(k) + " out of range"};
                return {dsl::Operand(dsl::StepRef{static_cast<std::size_t>(k - 1)}), ""};
            }
            return {std::nullopt, "unresolved name '" + side.name + "' in equation"};
        }
        if (!expr::is_constant(side))
            return {std::nullopt, "non-constant operand in equation"};
        try {
            return {dsl::Operand(dsl::Literal{expr::eval_expression(side, {})}), ""};
        } catch (const expr::ExprError& err) {
            return {std::nullopt, std::string("equation operand: ") + err.what()};
        }
    };

    OperandResult lhs = fold(*e->lhs);
    if (!lhs.operand) return {std::nullopt, lhs.why};
    OperandResult rhs = fold(*e->rhs);
    if (!rhs.operand) return {std::nullopt, rhs.why};
    return {dsl::Step{op, {*lhs.operand, *rhs.operand}}, ""};
}

std::optional<std::string> extract_pot_code(std::string_view raw) {
    // last fenced block wins; otherwise the whole text is the candidate
    std::size_t best = std::string_view::npos;
    std::size_t pos = 0;
    std::string code;
    while ((pos = raw.find("```", pos)) != std::string_view::npos) {
        std::size_t body = raw.find('\n', pos + 3);
        if (body == std::string_view::npos) break;
        std::size_t close = raw.find("```", body);
        if (close == std::string_view::npos) break;
        best = pos;
        code = std::string(raw.substr(body + 1, close - body - 1));
        pos = close + 3;
    }
    if (best != std::string_view::npos) return code;
    std::string_view t = trim_view(raw);
    if (t.empty()) return std::nullopt;
    return std::string(t);
}

}  // namespace

std::string_view confidence_name(Confidence c) {
    switch (c) {
        case Confidence::Pattern: return "pattern";
        case Confidence::Fallback: return "fallback";
        case Confidence::None: return "none";
    }
    return "none";
}

std::optional<core::AnswerValue> find_sentinel_answer(std::string_view raw) {
    std::size_t at = ifind_last(raw, kSentinel);
    if (at == std::string_view::npos) return std::nullopt;
    std::string_view tail = raw.substr(at + kSentinel.size());
    std::size_t eol = tail.find('\n');
    if (eol != std::string_view::npos) tail = tail.substr(0, eol);
    return parse_answer_tail(tail);
}

std::optional<core::AnswerValue> last_number_fallback(std::string_view raw) {
    std::vector<Decimal> nums = core::extract_numbers(raw);
    if (nums.empty()) return std::nullopt;
    return core::AnswerValue(core::NumberValue{nums.back()});
}

ParsedEEDP parse_eedp(std::string_view raw) {
    ParsedEEDP out;
    Section section = Section::Preamble;
    std::string dk;
    std::vector<std::string> evidences;
    std::vector<EEDPStep> steps;

    for (const Line& ln : split_lines(raw)) {
        std::string_view rest;
        if (auto sec = section_header(ln.text, &rest)) {
            section = *sec;
            if (section == Section::DomainKnowledge && !rest.empty()) dk = std::string(rest);
            continue;
        }
        std::string_view line = ln.text;
        if (istarts_with(strip_markup(line), kSentinel)) continue;

        switch (section) {
            case Section::Preamble: break;
            case Section::DomainKnowledge: {
                std::string_view t = trim_view(line);
                if (t.empty()) break;
                if (!dk.empty()) dk += ' ';
                dk += std::string(t);
                break;
            }
            case Section::Evidences: {
                if (auto item = bullet_item(line)) {
                    evidences.emplace_back(*item);
                } else if (auto numbered = numbered_item(line)) {
                    evidences.emplace_back(numbered->second);
                } else if (std::string_view t = trim_view(line); !t.empty()) {
                    if (evidences.empty())
                        evidences.emplace_back(t);
                    else
                        evidences.back() += " " + std::string(t);
                }
                break;
            }
            case Section::Steps: {
                if (auto resp = response_line(line)) {
                    std::size_t idx = resp->index >= 1 &&
                                              static_cast<std::size_t>(resp->index) <= steps.size()
                                          ? static_cast<std::size_t>(resp->index) - 1
                                          : (steps.empty() ? 0 : steps.size() - 1);
                    if (steps.empty()) steps.emplace_back();
                    steps[idx].equation = resp->equation;
                    steps[idx].stated_value = resp->stated;
                } else if (auto numbered = numbered_item(line)) {
                    steps.push_back(EEDPStep{std::string(numbered->second), "", std::nullopt});
                } else if (std::string_view t = trim_view(strip_markup(line)); !t.empty()) {
                    if (!steps.empty()) steps.back().description += " " + std::string(t);
                }
                break;
            }
        }
    }

    if (!dk.empty()) out.domain_knowledge = dk;
    out.evidences = std::move(evidences);
    out.steps = std::move(steps);
    out.final_answer = find_sentinel_answer(raw);
    return out;
}

StepsMapping steps_to_program(const ParsedEEDP& eedp) {
    StepsMapping out;
    if (eedp.steps.empty()) {
        out.diagnostics.push_back("no steps to map");
        return out;
    }
    dsl::ReasoningProgram program;
    for (std::size_t i = 0; i < eedp.steps.size(); ++i) {
        const EEDPStep& st = eedp.steps[i];
        MappedStep mapped = map_description(st.description, i);
        if (!mapped.step) {
            MappedStep via_eq = map_equation(st.equation, i);
            if (via_eq.step) {
                mapped = via_eq;
            } else {
                out.diagnostics.push_back("step " + std::to_string(i + 1) + ": " + mapped.why +
                                          "; " + via_eq.why);
                continue;
            }
        }
        program.steps.push_back(std::move(*mapped.step));
    }
    if (out.diagnostics.empty() && program.steps.size() == eedp.steps.size())
        out.program = std::move(program);
    return out;
}

ParsedResponse parse(prompting::Strategy strategy, std::string_view raw) {
    ParsedResponse out;
    out.raw = std::string(raw);

    auto finish_with_text_scan = [&] {
        if (auto v = find_sentinel_answer(raw)) {
            out.final_answer = std::move(v);
            out.confidence = Confidence::Pattern;
        } else if (auto f = last_number_fallback(raw)) {
            out.final_answer = std::move(f);
            out.confidence = Confidence::Fallback;
        }
    };

    switch (strategy) {
        case prompting::Strategy::Direct: {
            std::string_view t = trim_view(raw);
            if (t.empty()) break;
            bool single_line = t.find('\n') == std::string_view::npos;
            if (single_line) {
                core::AnswerValue v = core::parse_answer_text(t);
                if (is_number_or_bool(v)) {
                    out.final_answer = std::move(v);
                    out.confidence = Confidence::Pattern;
                    break;
                }
            }
            finish_with_text_scan();
            if (out.confidence == Confidence::None && single_line) {
                // a short span answer ("United States") is the expected shape
                out.final_answer = core::AnswerValue(core::SpanValue{std::string(t)});
                out.confidence = Confidence::Pattern;
            }
            break;
        }
        case prompting::Strategy::CoT:
        case prompting::Strategy::Decomposers: {
            finish_with_text_scan();
            break;
        }
        case prompting::Strategy::EEDP: {
            out.eedp = parse_eedp(raw);
            if (out.eedp->final_answer) {
                out.final_answer = out.eedp->final_answer;
                out.confidence = Confidence::Pattern;
            } else if (auto f = last_number_fallback(raw)) {
                out.final_answer = std::move(f);
                out.confidence = Confidence::Fallback;
            }
            break;
        }
        case prompting::Strategy::PoT: {
            auto code = extract_pot_code(raw);
            if (code) {
                try {
                    Decimal v = expr::eval_safe_expr(expr::parse_safe_expr(*code));
                    out.pot_value = v;
                    out.final_answer = core::AnswerValue(core::NumberValue{v});
                    out.confidence = Confidence::Pattern;
                    break;
                } catch (const expr::ExprError& e) {
                    out.diagnostics.push_back(std::string("unexecutable: ") + e.what());
                }
            } else {
                out.diagnostics.push_back("unexecutable: empty response");
            }
            finish_with_text_scan();
            break;
        }
    }
    return out;
}

}  // namespace tabeval::response
