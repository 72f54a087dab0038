#pragma once

#include "tabeval/core_model.hpp"
#include "tabeval/decimal.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace tabeval::dsl {

enum class AtomicOp {
    Add,
    Subtract,
    Multiply,
    Divide,
    Exp,
    Greater,
    Min,
    Max,
    TableSum,
    TableAverage,
    TableMax,
    TableMin,
};

bool is_table_op(AtomicOp op);
// Add/Multiply/Min/Max are insensitive to argument order.
bool is_commutative(AtomicOp op);
std::string_view op_name(AtomicOp op);
std::optional<AtomicOp> op_from_name(std::string_view name);

struct Literal {
    Decimal value;
    bool operator==(const Literal& o) const { return value == o.value; }
};

// Reference to the result of an earlier step, 0-based ("#0").
struct StepRef {
    std::size_t index = 0;
    bool operator==(const StepRef&) const = default;
};

// "const_100", "const_m1", ... resolved against a closed constants table.
struct NamedConst {
    std::string name;
    Decimal value;
    bool operator==(const NamedConst& o) const { return name == o.name && value == o.value; }
};

// Row argument of a table aggregation op. The dataset syntax names rows by
// their header label; an empty table_id targets the primary table.
struct RowRef {
    std::string table_id;
    std::string row_label;
    bool operator==(const RowRef&) const = default;
};

using Operand = std::variant<Literal, StepRef, NamedConst, RowRef>;

struct Step {
    AtomicOp op;
    std::vector<Operand> args;
    bool operator==(const Step&) const = default;
};

struct ReasoningProgram {
    std::vector<Step> steps;
    bool operator==(const ReasoningProgram&) const = default;
};

// Closed, versioned table of named constants accepted by the parser.
using ConstTable = std::map<std::string, Decimal, std::less<>>;
const ConstTable& default_constants();

class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, std::size_t offset);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class EvalError : public std::runtime_error {
public:
    enum class Kind { DivisionByZero, BadExponent, UnresolvedRowRef, TypeMismatch };

    EvalError(Kind kind, std::string message, std::size_t step_index);
    Kind kind() const { return kind_; }
    std::size_t step_index() const { return step_index_; }

private:
    Kind kind_;
    std::size_t step_index_;
};

// Parses the comma-separated call syntax used by the datasets' gold
// programs, e.g. "add(15395, 3802), add(#0, 4)". Whitespace-insensitive.
// Table ops accept an optional trailing "none" placeholder argument.
ReasoningProgram parse_program(std::string_view text,
                               const ConstTable& constants = default_constants());

// Tables addressable by a program's RowRef operands. An entry under "" is
// the primary table, used when a RowRef leaves table_id empty.
using TableContext = std::map<std::string, const core::Table*, std::less<>>;

TableContext table_context_for(const core::HybridExample& example);

// Executes steps in order at full Decimal precision; the final step's value
// is the program result. Greater yields a Boolean answer.
core::AnswerValue evaluate(const ReasoningProgram& program, const TableContext& tables = {});

// The number of steps, which is the reasoning-step complexity annotation.
std::size_t count_steps(const ReasoningProgram& program);

// Canonical text form; parse_program(render_program(p)) == p.
std::string render_program(const ReasoningProgram& program);

// Drops steps whose value never reaches the final step. Used when comparing
// a model's decomposed steps against a gold program.
ReasoningProgram prune_dead_steps(const ReasoningProgram& program);

}  // namespace tabeval::dsl
