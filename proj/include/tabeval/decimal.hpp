#pragma once

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace tabeval {

// Fixed-point style decimal with 50 significant digits. All harness
// arithmetic happens at this precision; rounding is applied only when
// grading or rendering.
using Decimal = boost::multiprecision::number<boost::multiprecision::cpp_dec_float<50>,
                                              boost::multiprecision::et_off>;

// Decomposition of a nonzero decimal as 0.<digits> * 10^exp10, with
// <digits> holding the significant digits (no leading or trailing zeros).
struct DecimalParts {
    bool negative = false;
    std::string digits;
    int exp10 = 0;
};

// Strict parser for plain decimal syntax: [+-]digits[.digits][eE[+-]digits].
// No currency symbols, separators or scale words; see
// core_model::parse_numeric_cell for the lenient cell parser.
std::optional<Decimal> parse_decimal(std::string_view text);

DecimalParts decimal_parts(const Decimal& value);

// Shortest plain-notation rendering ("19201", "-0.2295"); falls back to
// scientific form when the exponent is outside [-24, 24]. Stable across
// runs, used for JSONL round-trips and report cells.
std::string to_canonical_string(const Decimal& value);

// Rounds half away from zero to `fraction_digits` digits after the point
// (negative values round to tens, hundreds, ...).
Decimal round_decimal(const Decimal& value, int fraction_digits);

// floor(log10(|value|)); callers must reject zero first.
int order_of_magnitude_unchecked(const Decimal& value);

// Rounds away the guard digits the backend keeps beyond the 50 requested
// ones. Division can leave residue there (3000/3 compares != 1000 without
// this), so every computed result is pushed through normalize_precision
// before equality or rounding decisions.
Decimal normalize_precision(const Decimal& value);

// Fixed-precision rendering with `fraction_digits` digits after the point,
// half-away-from-zero. Used in report CSVs ("75.00").
std::string format_fixed(const Decimal& value, int fraction_digits);

}  // namespace tabeval
