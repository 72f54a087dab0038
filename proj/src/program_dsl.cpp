#include "tabeval/program_dsl.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace tabeval::dsl {

namespace {

bool ieq(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    }
    return true;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string fold_label(std::string_view s) {
    std::string out;
    bool pending_space = false;
    for (char ch : trim(s)) {
        if (std::isspace(static_cast<unsigned char>(ch))) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        }
    }
    return out;
}

}  // namespace

bool is_table_op(AtomicOp op) {
    switch (op) {
        case AtomicOp::TableSum:
        case AtomicOp::TableAverage:
        case AtomicOp::TableMax:
        case AtomicOp::TableMin:
            return true;
        default:
            return false;
    }
}

bool is_commutative(AtomicOp op) {
    switch (op) {
        case AtomicOp::Add:
        case AtomicOp::Multiply:
        case AtomicOp::Min:
        case AtomicOp::Max:
            return true;
        default:
            return false;
    }
}

std::string_view op_name(AtomicOp op) {
    switch (op) {
        case AtomicOp::Add: return "add";
        case AtomicOp::Subtract: return "subtract";
        case AtomicOp::Multiply: return "multiply";
        case AtomicOp::Divide: return "divide";
        case AtomicOp::Exp: return "exp";
        case AtomicOp::Greater: return "greater";
        case AtomicOp::Min: return "min";
        case AtomicOp::Max: return "max";
        case AtomicOp::TableSum: return "table_sum";
        case AtomicOp::TableAverage: return "table_average";
        case AtomicOp::TableMax: return "table_max";
        case AtomicOp::TableMin: return "table_min";
    }
    return "add";
}

std::optional<AtomicOp> op_from_name(std::string_view name) {
    static const std::pair<std::string_view, AtomicOp> table[] = {
        {"add", AtomicOp::Add},
        {"subtract", AtomicOp::Subtract},
        {"minus", AtomicOp::Subtract},
        {"multiply", AtomicOp::Multiply},
        {"divide", AtomicOp::Divide},
        {"exp", AtomicOp::Exp},
        {"power", AtomicOp::Exp},
        {"greater", AtomicOp::Greater},
        {"min", AtomicOp::Min},
        {"max", AtomicOp::Max},
        {"table_sum", AtomicOp::TableSum},
        {"table_average", AtomicOp::TableAverage},
        {"table_max", AtomicOp::TableMax},
        {"table_min", AtomicOp::TableMin},
    };
    for (const auto& [n, op] : table) {
        if (ieq(n, name)) return op;
    }
    return std::nullopt;
}

const ConstTable& default_constants() {
    static const ConstTable table = [] {
        ConstTable t;
        for (int i = 1; i <= 10; ++i) t["const_" + std::to_string(i)] = Decimal(i);
        t["const_100"] = Decimal(100);
        t["const_1000"] = Decimal(1000);
        t["const_10000"] = Decimal(10000);
        t["const_100000"] = Decimal(100000);
        t["const_1000000"] = Decimal(1000000);
        t["const_10000000"] = Decimal(10000000);
        t["const_100000000"] = Decimal(100000000);
        t["const_1000000000"] = Decimal(1000000000);
        t["const_m1"] = Decimal(-1);
        return t;
    }();
    return table;
}

ParseError::ParseError(std::string message, std::size_t offset)
    : std::runtime_error(message + " (offset " + std::to_string(offset) + ")"),
      offset_(offset) {}

EvalError::EvalError(Kind kind, std::string message, std::size_t step_index)
    : std::runtime_error(message + " (step " + std::to_string(step_index) + ")"),
      kind_(kind),
      step_index_(step_index) {}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

class Parser {
public:
    Parser(std::string_view text, const ConstTable& constants)
        : text_(text), constants_(constants) {}

    ReasoningProgram parse() {
        ReasoningProgram program;
        skip_ws();
        if (at_end()) throw ParseError("empty program", 0);
        while (true) {
            program.steps.push_back(parse_step(program.steps.size()));
            skip_ws();
            if (at_end()) break;
            if (text_[pos_] != ',')
                throw ParseError("expected ',' between steps", pos_);
            ++pos_;
            skip_ws();
            if (at_end()) break;  // tolerate a trailing comma
        }
        return program;
    }

private:
    bool at_end() const { return pos_ >= text_.size(); }

    void skip_ws() {
        while (!at_end() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    Step parse_step(std::size_t step_index) {
        skip_ws();
        std::size_t name_start = pos_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                             text_[pos_] == '_' || text_[pos_] == '-')) {
            ++pos_;
        }
        std::string_view name = text_.substr(name_start, pos_ - name_start);
        if (name.empty()) throw ParseError("expected operation name", pos_);
        auto op = op_from_name(name);
        if (!op) throw ParseError("unknown operation: " + std::string(name), name_start);
        skip_ws();
        if (at_end() || text_[pos_] != '(')
            throw ParseError("expected '(' after operation name", pos_);
        ++pos_;

        Step step;
        step.op = *op;
        skip_ws();
        if (!at_end() && text_[pos_] == ')') {
            ++pos_;
        } else {
            while (true) {
                parse_arg(step, step_index);
                skip_ws();
                if (at_end()) throw ParseError("unterminated argument list", pos_);
                if (text_[pos_] == ',') {
                    ++pos_;
                    continue;
                }
                if (text_[pos_] == ')') {
                    ++pos_;
                    break;
                }
                throw ParseError("expected ',' or ')' in argument list", pos_);
            }
        }

        std::size_t expected = is_table_op(step.op) ? 1 : 2;
        if (step.args.size() != expected) {
            throw ParseError(std::string(op_name(step.op)) + " takes " +
                                 std::to_string(expected) + " argument(s)",
                             name_start);
        }
        return step;
    }

    void parse_arg(Step& step, std::size_t step_index) {
        skip_ws();
        if (at_end()) throw ParseError("expected argument", pos_);
        std::size_t start = pos_;
        char c = text_[pos_];

        if (c == '#') {
            ++pos_;
            std::size_t digits_start = pos_;
            while (!at_end() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (pos_ == digits_start) throw ParseError("expected step number after '#'", pos_);
            std::size_t index = std::stoul(std::string(text_.substr(digits_start, pos_ - digits_start)));
            if (index >= step_index)
                throw ParseError("step reference #" + std::to_string(index) +
                                     " must point to an earlier step",
                                 start);
            step.args.push_back(StepRef{index});
            return;
        }

        // Raw argument text up to the next ',' or ')'.
        std::size_t scan = pos_;
        while (scan < text_.size() && text_[scan] != ',' && text_[scan] != ')') ++scan;
        std::string token = trim(text_.substr(pos_, scan - pos_));
        if (token.empty()) throw ParseError("empty argument", start);

        if (token.rfind("const_", 0) == 0) {
            auto it = constants_.find(token);
            if (it == constants_.end())
                throw ParseError("unknown constant: " + token, start);
            step.args.push_back(NamedConst{token, it->second});
            pos_ = scan;
            return;
        }

        if (ieq(token, "none")) {
            if (!is_table_op(step.op))
                throw ParseError("'none' placeholder is only valid in table operations", start);
            if (step.args.empty())
                throw ParseError("'none' cannot be the row argument", start);
            pos_ = scan;  // placeholder carried by the dataset syntax; dropped
            return;
        }

        if (auto literal = parse_literal(token)) {
            step.args.push_back(Literal{*literal});
            pos_ = scan;
            return;
        }

        if (!is_table_op(step.op))
            throw ParseError("expected numeric argument, got: " + token, start);
        std::string table_id;
        std::string label = token;
        if (std::size_t sep = token.find("::"); sep != std::string::npos) {
            table_id = trim(token.substr(0, sep));
            label = trim(token.substr(sep + 2));
        }
        if (label.empty()) throw ParseError("empty row label", start);
        step.args.push_back(RowRef{std::move(table_id), std::move(label)});
        pos_ = scan;
    }

    // Program literals: plain decimals, optionally "$"-prefixed and/or
    // "%"-suffixed (percent divides by 100, matching the dataset programs).
    static std::optional<Decimal> parse_literal(std::string_view token) {
        bool negative = false;
        bool percent = false;
        std::string_view t = token;
        if (!t.empty() && (t.front() == '-' || t.front() == '+')) {
            negative = t.front() == '-';
            t.remove_prefix(1);
        }
        if (!t.empty() && t.front() == '$') t.remove_prefix(1);
        if (!t.empty() && t.back() == '%') {
            percent = true;
            t.remove_suffix(1);
        }
        auto value = parse_decimal(t);
        if (!value) return std::nullopt;
        Decimal v = *value;
        if (percent) v /= 100;
        if (negative) v = -v;
        return v;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    const ConstTable& constants_;
};

}  // namespace

ReasoningProgram parse_program(std::string_view text, const ConstTable& constants) {
    return Parser(text, constants).parse();
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

TableContext table_context_for(const core::HybridExample& example) {
    TableContext ctx;
    ctx[""] = &core::select_primary_table(example);
    for (const auto& t : example.tables) ctx[t.id] = &t;
    return ctx;
}

namespace {

bool is_integer(const Decimal& v) { return v == round_decimal(v, 0); }

Decimal checked_pow(const Decimal& base, const Decimal& exponent, std::size_t step) {
    using boost::multiprecision::pow;
    if (base == 0) {
        if (exponent < 0)
            throw EvalError(EvalError::Kind::DivisionByZero, "zero base with negative exponent",
                            step);
        if (exponent == 0) return Decimal(1);
        return Decimal(0);
    }
    if (base < 0) {
        if (!is_integer(exponent))
            throw EvalError(EvalError::Kind::BadExponent,
                            "negative base requires an integer exponent", step);
        Decimal magnitude = pow(-base, exponent);
        Decimal half = exponent / 2;
        bool odd = !is_integer(half);
        return odd ? -magnitude : magnitude;
    }
    return pow(base, exponent);
}

std::vector<Decimal> row_values(const core::Table& table, std::size_t row) {
    std::vector<Decimal> values;
    for (std::size_t c = 1; c < table.n_cols(); ++c) {
        const auto& cell = table.grid[row][c];
        if (cell.numeric) values.push_back(cell.numeric->value);
    }
    return values;
}

std::vector<Decimal> resolve_row(const RowRef& ref, const TableContext& tables,
                                 std::size_t step) {
    std::string wanted = fold_label(ref.row_label);
    auto search = [&](const core::Table& table) -> std::optional<std::vector<Decimal>> {
        for (std::size_t r = table.n_header_rows; r < table.n_rows(); ++r) {
            if (table.n_cols() == 0) continue;
            if (fold_label(table.grid[r][0].raw_text) == wanted) {
                return row_values(table, r);
            }
        }
        return std::nullopt;
    };

    if (!ref.table_id.empty()) {
        auto it = tables.find(ref.table_id);
        if (it == tables.end())
            throw EvalError(EvalError::Kind::UnresolvedRowRef,
                            "unknown table: " + ref.table_id, step);
        if (auto values = search(*it->second)) return *values;
        throw EvalError(EvalError::Kind::UnresolvedRowRef,
                        "row not found: " + ref.row_label, step);
    }

    if (auto primary = tables.find(""); primary != tables.end()) {
        if (auto values = search(*primary->second)) return *values;
    }
    for (const auto& [id, table] : tables) {
        if (id.empty()) continue;
        if (auto values = search(*table)) return *values;
    }
    throw EvalError(EvalError::Kind::UnresolvedRowRef, "row not found: " + ref.row_label, step);
}

}  // namespace

core::AnswerValue evaluate(const ReasoningProgram& program, const TableContext& tables) {
    if (program.steps.empty())
        throw EvalError(EvalError::Kind::TypeMismatch, "program has no steps", 0);

    std::vector<Decimal> results(program.steps.size());
    std::vector<bool> is_bool(program.steps.size(), false);

    for (std::size_t i = 0; i < program.steps.size(); ++i) {
        const Step& step = program.steps[i];

        auto numeric_arg = [&](const Operand& operand) -> Decimal {
            if (const auto* lit = std::get_if<Literal>(&operand)) return lit->value;
            if (const auto* ref = std::get_if<StepRef>(&operand)) {
                if (is_bool[ref->index])
                    throw EvalError(EvalError::Kind::TypeMismatch,
                                    "step #" + std::to_string(ref->index) +
                                        " is boolean and cannot feed arithmetic",
                                    i);
                return results[ref->index];
            }
            if (const auto* named = std::get_if<NamedConst>(&operand)) return named->value;
            throw EvalError(EvalError::Kind::TypeMismatch,
                            "row reference used as a numeric argument", i);
        };

        if (is_table_op(step.op)) {
            const auto* ref = std::get_if<RowRef>(&step.args[0]);
            if (!ref)
                throw EvalError(EvalError::Kind::TypeMismatch,
                                "table operation needs a row argument", i);
            std::vector<Decimal> values = resolve_row(*ref, tables, i);
            if (values.empty())
                throw EvalError(EvalError::Kind::TypeMismatch,
                                "row has no numeric cells: " + ref->row_label, i);
            Decimal acc = values.front();
            switch (step.op) {
                case AtomicOp::TableSum:
                case AtomicOp::TableAverage:
                    acc = 0;
                    for (const auto& v : values) acc += v;
                    if (step.op == AtomicOp::TableAverage)
                        acc /= Decimal(static_cast<unsigned>(values.size()));
                    break;
                case AtomicOp::TableMax:
                    for (const auto& v : values) acc = std::max(acc, v);
                    break;
                case AtomicOp::TableMin:
                    for (const auto& v : values) acc = std::min(acc, v);
                    break;
                default: break;
            }
            results[i] = normalize_precision(acc);
            continue;
        }

        Decimal lhs = numeric_arg(step.args[0]);
        Decimal rhs = numeric_arg(step.args[1]);
        switch (step.op) {
            case AtomicOp::Add: results[i] = lhs + rhs; break;
            case AtomicOp::Subtract: results[i] = lhs - rhs; break;
            case AtomicOp::Multiply: results[i] = lhs * rhs; break;
            case AtomicOp::Divide:
                if (rhs == 0)
                    throw EvalError(EvalError::Kind::DivisionByZero, "division by zero", i);
                results[i] = lhs / rhs;
                break;
            case AtomicOp::Exp: results[i] = checked_pow(lhs, rhs, i); break;
            case AtomicOp::Greater:
                results[i] = lhs > rhs ? 1 : 0;
                is_bool[i] = true;
                break;
            case AtomicOp::Min: results[i] = std::min(lhs, rhs); break;
            case AtomicOp::Max: results[i] = std::max(lhs, rhs); break;
            default: break;
        }
        results[i] = normalize_precision(results[i]);
    }

    std::size_t last = program.steps.size() - 1;
    if (is_bool[last]) return core::BoolValue{results[last] != 0};
    return core::NumberValue{results[last], core::Scale::Unit, false, std::nullopt};
}

std::size_t count_steps(const ReasoningProgram& program) { return program.steps.size(); }

std::string render_program(const ReasoningProgram& program) {
    std::string out;
    for (std::size_t i = 0; i < program.steps.size(); ++i) {
        if (i) out += ", ";
        const Step& step = program.steps[i];
        out += op_name(step.op);
        out += "(";
        for (std::size_t a = 0; a < step.args.size(); ++a) {
            if (a) out += ", ";
            const Operand& operand = step.args[a];
            if (const auto* lit = std::get_if<Literal>(&operand)) {
                out += to_canonical_string(lit->value);
            } else if (const auto* ref = std::get_if<StepRef>(&operand)) {
                out += "#" + std::to_string(ref->index);
            } else if (const auto* named = std::get_if<NamedConst>(&operand)) {
                out += named->name;
            } else {
                const auto& row = std::get<RowRef>(operand);
                if (!row.table_id.empty()) out += row.table_id + "::";
                out += row.row_label;
            }
        }
        out += ")";
    }
    return out;
}

ReasoningProgram prune_dead_steps(const ReasoningProgram& program) {
    if (program.steps.empty()) return program;
    std::vector<bool> live(program.steps.size(), false);
    std::vector<std::size_t> stack = {program.steps.size() - 1};
    while (!stack.empty()) {
        std::size_t index = stack.back();
        stack.pop_back();
        if (live[index]) continue;
        live[index] = true;
        for (const auto& operand : program.steps[index].args) {
            if (const auto* ref = std::get_if<StepRef>(&operand)) stack.push_back(ref->index);
        }
    }
    std::vector<std::size_t> remap(program.steps.size(), 0);
    ReasoningProgram pruned;
    for (std::size_t i = 0; i < program.steps.size(); ++i) {
        if (!live[i]) continue;
        remap[i] = pruned.steps.size();
        Step step = program.steps[i];
        for (auto& operand : step.args) {
            if (auto* ref = std::get_if<StepRef>(&operand)) ref->index = remap[ref->index];
        }
        pruned.steps.push_back(std::move(step));
    }
    return pruned;
}

}  // namespace tabeval::dsl
