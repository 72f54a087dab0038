#include "tabeval/decimal.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace tabeval {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::optional<Decimal> parse_decimal(std::string_view text) {
    if (text.empty()) return std::nullopt;
    std::size_t i = 0;
    if (text[i] == '+' || text[i] == '-') ++i;
    std::size_t digits = 0;
    while (i < text.size() && is_digit(text[i])) { ++i; ++digits; }
    if (i < text.size() && text[i] == '.') {
        ++i;
        while (i < text.size() && is_digit(text[i])) { ++i; ++digits; }
    }
    if (digits == 0) return std::nullopt;
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        if (i < text.size() && (text[i] == '+' || text[i] == '-')) ++i;
        std::size_t exp_digits = 0;
        while (i < text.size() && is_digit(text[i])) { ++i; ++exp_digits; }
        if (exp_digits == 0) return std::nullopt;
    }
    if (i != text.size()) return std::nullopt;
    try {
        return Decimal(std::string(text));
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

DecimalParts decimal_parts(const Decimal& raw) {
    DecimalParts parts;
    if (raw.is_zero()) return parts;
    const Decimal value = normalize_precision(raw);
    parts.negative = value < 0;

    // str() in scientific mode yields "d.dddd...e+XX" with full precision.
    std::string sci = value.str(0, std::ios_base::scientific);
    std::size_t epos = sci.find_first_of("eE");
    std::string mantissa = sci.substr(0, epos);
    int exponent = epos == std::string::npos ? 0 : std::atoi(sci.c_str() + epos + 1);

    std::string digits;
    for (char c : mantissa) {
        if (is_digit(c)) digits.push_back(c);
    }
    // Strip leading zeros (adjusting the exponent) and trailing zeros.
    std::size_t first = digits.find_first_not_of('0');
    if (first == std::string::npos) return parts;  // defensively treat as zero
    exponent -= static_cast<int>(first);
    digits.erase(0, first);
    std::size_t last = digits.find_last_not_of('0');
    digits.erase(last + 1);

    parts.digits = digits;
    parts.exp10 = exponent + 1;  // value = 0.<digits> * 10^exp10
    return parts;
}

std::string to_canonical_string(const Decimal& value) {
    if (value.is_zero()) return "0";
    DecimalParts parts = decimal_parts(value);
    std::string out = parts.negative ? "-" : "";
    const int n = static_cast<int>(parts.digits.size());
    if (parts.exp10 > 24 || parts.exp10 < -24) {
        out += parts.digits.substr(0, 1);
        if (n > 1) {
            out += '.';
            out += parts.digits.substr(1);
        }
        out += 'e';
        int e = parts.exp10 - 1;
        if (e >= 0) out += '+';
        out += std::to_string(e);
        return out;
    }
    if (parts.exp10 <= 0) {
        out += "0.";
        out.append(static_cast<std::size_t>(-parts.exp10), '0');
        out += parts.digits;
    } else if (parts.exp10 >= n) {
        out += parts.digits;
        out.append(static_cast<std::size_t>(parts.exp10 - n), '0');
    } else {
        out += parts.digits.substr(0, static_cast<std::size_t>(parts.exp10));
        out += '.';
        out += parts.digits.substr(static_cast<std::size_t>(parts.exp10));
    }
    return out;
}

Decimal round_decimal(const Decimal& value, int fraction_digits) {
    const Decimal shift = boost::multiprecision::pow(Decimal(10), fraction_digits);
    Decimal scaled = normalize_precision(value) * shift;
    Decimal adjusted = scaled < 0 ? scaled - Decimal("0.5") : scaled + Decimal("0.5");
    Decimal truncated = boost::multiprecision::trunc(adjusted);
    return normalize_precision(truncated / shift);
}

int order_of_magnitude_unchecked(const Decimal& value) {
    return decimal_parts(value).exp10 - 1;
}

Decimal normalize_precision(const Decimal& value) {
    if (value.is_zero()) return Decimal(0);
    return Decimal(value.str(std::numeric_limits<Decimal>::digits10, std::ios_base::scientific));
}

std::string format_fixed(const Decimal& value, int fraction_digits) {
    Decimal rounded = round_decimal(value, fraction_digits);
    std::string plain = to_canonical_string(rounded);
    if (fraction_digits <= 0) return plain;
    std::size_t dot = plain.find('.');
    if (dot == std::string::npos) {
        plain += '.';
        plain.append(static_cast<std::size_t>(fraction_digits), '0');
        return plain;
    }
    std::size_t have = plain.size() - dot - 1;
    if (have < static_cast<std::size_t>(fraction_digits)) {
        plain.append(static_cast<std::size_t>(fraction_digits) - have, '0');
    }
    return plain;
}

}  // namespace tabeval
