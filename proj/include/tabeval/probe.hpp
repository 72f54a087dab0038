#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tabeval/decimal.hpp"
#include "tabeval/grading.hpp"

namespace tabeval::probe {

enum class ProbeOp { Add, Sub, Mul, Div };

std::string_view probe_op_name(ProbeOp op);    // "add" / "sub" / "mul" / "div"
std::string_view probe_op_symbol(ProbeOp op);  // "+" / "-" / "*" / "/"
std::optional<ProbeOp> probe_op_from_name(std::string_view name);

struct ZeroOperand : std::domain_error {
    ZeroOperand();
};

// floor(log10(|x|)), read off the decimal digit string rather than through
// floating log10 so boundaries like 1000 and 0.001 are exact.
int order_of_magnitude(const Decimal& x);

// Magnitude group of a binary expression: the OOM of the operand whose
// |OOM| is larger; on a tie (e.g. 0.01 vs 100) the left operand wins.
int tau(const Decimal& lhs, const Decimal& rhs);

constexpr int kTauMin = -6;
constexpr int kTauMax = 6;
constexpr int kGroupSize = 50;
constexpr int kTauGroups = kTauMax - kTauMin + 1;

struct ProbeItem {
    ProbeOp op = ProbeOp::Add;
    int tau = 0;
    Decimal lhs;
    Decimal rhs;
    Decimal expected;
    std::string id;
    std::string seed_path;
};

struct GenerateOptions {
    bool signed_operands = false;
};

// Deterministic probe set: 50 items for every op x tau in [-6, 6], so
// 650 per operation and 2600 overall. Operands carry 1-4 significant
// digits and every item satisfies tau(lhs, rhs) == item.tau.
std::vector<ProbeItem> generate(std::uint64_t seed, const GenerateOptions& opts = {});

std::string probe_prompt(const ProbeItem& item);

struct ProbeCell {
    ProbeOp op = ProbeOp::Add;
    int tau = 0;
    int n = 0;
    int correct = 0;
};

struct OpMarginal {
    ProbeOp op = ProbeOp::Add;
    int n = 0;
    int correct = 0;
};

struct ProbeReport {
    std::vector<ProbeCell> cells;  // op-major, tau ascending: 4 x 13
    std::vector<OpMarginal> per_op;
    std::vector<std::string> missing_ids;
    int total = 0;
    int total_correct = 0;
};

const ProbeCell& cell_for(const ProbeReport& report, ProbeOp op, int tau);

// Grades raw model responses (keyed by item id) against the expected
// values; absent ids count as incorrect and are listed in missing_ids.
ProbeReport grade_probe(const std::vector<ProbeItem>& items,
                        const std::map<std::string, std::string>& responses,
                        const grading::GradeConfig& cfg = {});

// Probe set CSV: id, op, tau, lhs, rhs, expected.
void save_probe_csv(const std::vector<ProbeItem>& items, const std::string& path);
std::vector<ProbeItem> load_probe_csv(const std::string& path);

// Results CSV: op, tau, accuracy, n — one row per (op, tau) cell, ordered
// like ProbeReport::cells so each op forms one series over tau.
std::string results_csv(const ProbeReport& report);

}  // namespace tabeval::probe
