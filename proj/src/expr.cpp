#include "tabeval/expr.hpp"

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <cctype>
#include <utility>

namespace tabeval::expr {

namespace {

std::string_view kind_label(ExprError::Kind k) {
    switch (k) {
        case ExprError::Kind::GrammarViolation: return "grammar violation";
        case ExprError::Kind::DivisionByZero: return "division by zero";
        case ExprError::Kind::UnboundName: return "unbound name";
        case ExprError::Kind::BadExponent: return "bad exponent";
    }
    return "error";
}

bool is_integer(const Decimal& v) {
    return v == boost::multiprecision::trunc(v);
}

// Same semantics as the reasoning-program interpreter: 0^0 = 1, zero base
// rejects negative exponents, negative base requires an integer exponent.
Decimal pow_checked(const Decimal& base, const Decimal& exponent, std::size_t offset) {
    using boost::multiprecision::pow;
    if (base == 0) {
        if (exponent < 0)
            throw ExprError(ExprError::Kind::DivisionByZero,
                            "zero base with negative exponent", offset);
        if (exponent == 0) return Decimal(1);
        return Decimal(0);
    }
    if (base < 0) {
        if (!is_integer(exponent))
            throw ExprError(ExprError::Kind::BadExponent,
                            "negative base requires an integer exponent", offset);
        Decimal magnitude = pow(-base, exponent);
        bool odd = !is_integer(exponent / 2);
        return odd ? -magnitude : magnitude;
    }
    return pow(base, exponent);
}

struct Token {
    enum class Type { Number, Name, Plus, Minus, Star, Slash, Power, LParen, RParen, Assign, End };
    Type type = Type::End;
    std::string text;
    std::size_t offset = 0;
};

class Lexer {
public:
    Lexer(std::string_view src, std::size_t base_offset)
        : src_(src), base_(base_offset) {}

    Token next() {
        while (pos_ < src_.size() &&
               (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\r'))
            ++pos_;
        if (pos_ >= src_.size() || src_[pos_] == '#')
            return {Token::Type::End, "", base_ + pos_};
        std::size_t at = pos_;
        char c = src_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && pos_ + 1 < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))))
            return lex_number(at);
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t end = pos_;
            while (end < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
                ++end;
            Token t{Token::Type::Name, std::string(src_.substr(pos_, end - pos_)), base_ + at};
            pos_ = end;
            return t;
        }
        ++pos_;
        switch (c) {
            case '+': return {Token::Type::Plus, "+", base_ + at};
            case '-': return {Token::Type::Minus, "-", base_ + at};
            case '*':
                if (pos_ < src_.size() && src_[pos_] == '*') {
                    ++pos_;
                    return {Token::Type::Power, "**", base_ + at};
                }
                return {Token::Type::Star, "*", base_ + at};
            case '/': return {Token::Type::Slash, "/", base_ + at};
            case '^': return {Token::Type::Power, "^", base_ + at};
            case '(': return {Token::Type::LParen, "(", base_ + at};
            case ')': return {Token::Type::RParen, ")", base_ + at};
            case '=': return {Token::Type::Assign, "=", base_ + at};
        }
        throw ExprError(ExprError::Kind::GrammarViolation,
                        std::string("unexpected character '") + c + "'", base_ + at);
    }

private:
    Token lex_number(std::size_t at) {
        std::size_t end = pos_;
        auto digits = [&] {
            while (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end])))
                ++end;
        };
        digits();
        if (end < src_.size() && src_[end] == '.') {
            ++end;
            digits();
        }
        if (end < src_.size() && (src_[end] == 'e' || src_[end] == 'E')) {
            std::size_t mark = end;
            ++end;
            if (end < src_.size() && (src_[end] == '+' || src_[end] == '-')) ++end;
            if (end < src_.size() && std::isdigit(static_cast<unsigned char>(src_[end])))
                digits();
            else
                end = mark;  // "12e" is NAME-adjacent junk; let the parser complain
        }
        Token t{Token::Type::Number, std::string(src_.substr(pos_, end - pos_)), base_ + at};
        pos_ = end;
        return t;
    }

    std::string_view src_;
    std::size_t base_;
    std::size_t pos_ = 0;
};

class Parser {
public:
    Parser(std::string_view src, std::size_t base_offset) : lexer_(src, base_offset) {
        advance();
    }

    ExprPtr expression(int min_bp = 0) {
        ExprPtr lhs = prefix();
        for (;;) {
            int bp = infix_bp(cur_.type);
            if (bp == 0 || bp < min_bp) break;
            Token op = cur_;
            advance();
            // ** is right-associative; the others associate left.
            int rhs_bp = op.type == Token::Type::Power ? bp : bp + 1;
            ExprPtr rhs = expression(rhs_bp);
            auto e = std::make_unique<Expr>();
            e->node = node_for(op.type);
            e->offset = op.offset;
            e->lhs = std::move(lhs);
            e->rhs = std::move(rhs);
            lhs = std::move(e);
        }
        return lhs;
    }

    Token current() const { return cur_; }
    void advance() { cur_ = lexer_.next(); }

    void expect_end() const {
        if (cur_.type != Token::Type::End)
            throw ExprError(ExprError::Kind::GrammarViolation,
                            "unexpected trailing '" + cur_.text + "'", cur_.offset);
    }

private:
    static int infix_bp(Token::Type t) {
        switch (t) {
            case Token::Type::Plus:
            case Token::Type::Minus: return 10;
            case Token::Type::Star:
            case Token::Type::Slash: return 20;
            case Token::Type::Power: return 40;
            default: return 0;
        }
    }

    static Expr::Node node_for(Token::Type t) {
        switch (t) {
            case Token::Type::Plus: return Expr::Node::Add;
            case Token::Type::Minus: return Expr::Node::Sub;
            case Token::Type::Star: return Expr::Node::Mul;
            case Token::Type::Slash: return Expr::Node::Div;
            default: return Expr::Node::Pow;
        }
    }

    ExprPtr prefix() {
        Token t = cur_;
        switch (t.type) {
            case Token::Type::Number: {
                advance();
                auto e = std::make_unique<Expr>();
                e->node = Expr::Node::Literal;
                e->offset = t.offset;
                auto parsed = parse_decimal(t.text);
                if (!parsed)
                    throw ExprError(ExprError::Kind::GrammarViolation,
                                    "malformed number '" + t.text + "'", t.offset);
                e->literal = *parsed;
                return e;
            }
            case Token::Type::Name: {
                advance();
                if (cur_.type == Token::Type::LParen)
                    throw ExprError(ExprError::Kind::GrammarViolation,
                                    "function calls are not allowed", cur_.offset);
                auto e = std::make_unique<Expr>();
                e->node = Expr::Node::Name;
                e->offset = t.offset;
                e->name = t.text;
                return e;
            }
            case Token::Type::Minus: {
                advance();
                auto e = std::make_unique<Expr>();
                e->node = Expr::Node::Neg;
                e->offset = t.offset;
                // binds looser than ** (so -2**2 = -(2**2)) but tighter
                // than * and /
                e->lhs = expression(25);
                return e;
            }
            case Token::Type::Plus: {
                advance();
                return expression(25);
            }
            case Token::Type::LParen: {
                advance();
                ExprPtr inner = expression(0);
                if (cur_.type != Token::Type::RParen)
                    throw ExprError(ExprError::Kind::GrammarViolation, "expected ')'",
                                    cur_.offset);
                advance();
                return inner;
            }
            default:
                throw ExprError(ExprError::Kind::GrammarViolation,
                                t.type == Token::Type::End
                                    ? std::string("unexpected end of expression")
                                    : "unexpected '" + t.text + "'",
                                t.offset);
        }
    }

    Lexer lexer_;
    Token cur_;
};

const Decimal* lookup(const std::vector<std::pair<std::string, Decimal>>& env,
                      const std::string& name) {
    for (auto it = env.rbegin(); it != env.rend(); ++it)
        if (it->first == name) return &it->second;
    return nullptr;
}

}  // namespace

ExprError::ExprError(Kind k, std::string message, std::size_t off)
    : std::runtime_error(std::string(kind_label(k)) + ": " + message + " (offset " +
                         std::to_string(off) + ")"),
      kind(k),
      offset(off) {}

ExprPtr parse_expression(std::string_view text) {
    Parser p(text, 0);
    ExprPtr e = p.expression();
    p.expect_end();
    return e;
}

SafeExpr parse_safe_expr(std::string_view text) {
    SafeExpr out;
    std::size_t line_start = 0;
    while (line_start <= text.size()) {
        std::size_t line_end = text.find_first_of("\n;", line_start);
        if (line_end == std::string_view::npos) line_end = text.size();
        std::string_view line = text.substr(line_start, line_end - line_start);

        std::size_t first = line.find_first_not_of(" \t\r");
        if (first != std::string_view::npos && line[first] != '#') {
            Parser p(line, line_start);
            Token name = p.current();
            if (name.type != Token::Type::Name)
                throw ExprError(ExprError::Kind::GrammarViolation,
                                "expected an assignment `name = expression`", name.offset);
            p.advance();
            if (p.current().type != Token::Type::Assign)
                throw ExprError(ExprError::Kind::GrammarViolation,
                                "expected '=' after '" + name.text + "'",
                                p.current().offset);
            p.advance();
            Assignment a;
            a.name = name.text;
            a.value = p.expression();
            p.expect_end();
            out.assignments.push_back(std::move(a));
        }
        if (line_end == text.size()) break;
        line_start = line_end + 1;
    }
    if (out.assignments.empty())
        throw ExprError(ExprError::Kind::GrammarViolation, "no assignments found", 0);
    return out;
}

Decimal eval_expression(const Expr& e,
                        const std::vector<std::pair<std::string, Decimal>>& env) {
    switch (e.node) {
        case Expr::Node::Literal: return e.literal;
        case Expr::Node::Name: {
            const Decimal* v = lookup(env, e.name);
            if (!v)
                throw ExprError(ExprError::Kind::UnboundName, "'" + e.name + "'", e.offset);
            return *v;
        }
        case Expr::Node::Neg: return normalize_precision(-eval_expression(*e.lhs, env));
        default: break;
    }
    Decimal lhs = eval_expression(*e.lhs, env);
    Decimal rhs = eval_expression(*e.rhs, env);
    Decimal result;
    switch (e.node) {
        case Expr::Node::Add: result = lhs + rhs; break;
        case Expr::Node::Sub: result = lhs - rhs; break;
        case Expr::Node::Mul: result = lhs * rhs; break;
        case Expr::Node::Div:
            if (rhs == 0)
                throw ExprError(ExprError::Kind::DivisionByZero, "division by zero", e.offset);
            result = lhs / rhs;
            break;
        case Expr::Node::Pow: result = pow_checked(lhs, rhs, e.offset); break;
        default: result = 0; break;
    }
    return normalize_precision(result);
}

Decimal eval_safe_expr(const SafeExpr& code) {
    std::vector<std::pair<std::string, Decimal>> env;
    Decimal last(0);
    for (const auto& a : code.assignments) {
        last = eval_expression(*a.value, env);
        env.emplace_back(a.name, last);
    }
    if (const Decimal* ans = lookup(env, "ans")) return *ans;
    return last;
}

bool is_constant(const Expr& e) {
    switch (e.node) {
        case Expr::Node::Literal: return true;
        case Expr::Node::Name: return false;
        case Expr::Node::Neg: return is_constant(*e.lhs);
        default: return is_constant(*e.lhs) && is_constant(*e.rhs);
    }
}

}  // namespace tabeval::expr
