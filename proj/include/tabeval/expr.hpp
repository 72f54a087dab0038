#pragma once

#include "tabeval/decimal.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tabeval::expr {

// Restricted arithmetic over +, -, *, /, ** (also ^), parentheses, numeric
// literals and previously assigned names. This is the only thing model-written
// "code" is ever run through: no calls, no attribute access, no loops, no
// strings. Anything outside the grammar is a GrammarViolation and the caller
// falls back to text-based answer extraction.

struct ExprError : std::runtime_error {
    enum class Kind { GrammarViolation, DivisionByZero, UnboundName, BadExponent };
    Kind kind;
    std::size_t offset;  // byte offset into the source text
    ExprError(Kind k, std::string message, std::size_t offset);
};

// Expression AST. Flat enough that a variant tree is clearer than a class
// hierarchy.
struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
    enum class Node { Literal, Name, Neg, Add, Sub, Mul, Div, Pow };
    Node node;
    Decimal literal;       // Literal
    std::string name;      // Name
    ExprPtr lhs, rhs;      // binary ops; Neg uses lhs only
    std::size_t offset = 0;
};

struct Assignment {
    std::string name;
    ExprPtr value;
};

struct SafeExpr {
    std::vector<Assignment> assignments;
};

// Parses one expression (no assignment). Throws ExprError on violations.
ExprPtr parse_expression(std::string_view text);

// Parses newline/semicolon-separated `name = expression` lines. Blank lines
// and `#` comment lines are skipped.
SafeExpr parse_safe_expr(std::string_view text);

// Evaluates an expression against already-bound names.
Decimal eval_expression(const Expr& e,
                        const std::vector<std::pair<std::string, Decimal>>& env);

// Runs the assignments in order; result is the value of `ans` when assigned,
// otherwise of the last assignment.
Decimal eval_safe_expr(const SafeExpr& code);

// True when the expression contains no names (safe to fold to a value).
bool is_constant(const Expr& e);

}  // namespace tabeval::expr
