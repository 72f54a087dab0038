#include "tabeval/probe.hpp"

#include <cstdio>
#include <random>

#include "tabeval/core_model.hpp"
#include "tabeval/csv.hpp"
#include "tabeval/program_dsl.hpp"
#include "tabeval/response_parsing.hpp"

namespace tabeval::probe {

namespace {

constexpr ProbeOp kOps[] = {ProbeOp::Add, ProbeOp::Sub, ProbeOp::Mul, ProbeOp::Div};

dsl::AtomicOp dsl_op(ProbeOp op) {
    switch (op) {
        case ProbeOp::Add: return dsl::AtomicOp::Add;
        case ProbeOp::Sub: return dsl::AtomicOp::Subtract;
        case ProbeOp::Mul: return dsl::AtomicOp::Multiply;
        case ProbeOp::Div: return dsl::AtomicOp::Divide;
    }
    return dsl::AtomicOp::Add;
}

// Value with exactly `digits` significant digits and OOM `oom`, built from
// its digit string so the Decimal is exact.
Decimal make_operand(std::mt19937_64& rng, int oom, bool allow_negative) {
    std::uniform_int_distribution<int> digit_count(1, 4);
    int d = digit_count(rng);
    long lo = 1;
    for (int i = 1; i < d; ++i) lo *= 10;
    long hi = lo * 10 - 1;
    std::uniform_int_distribution<long> mantissa_dist(lo, hi);
    long mantissa = mantissa_dist(rng);
    while (d > 1 && mantissa % 10 == 0) mantissa = mantissa_dist(rng);
    bool negative = false;
    if (allow_negative) {
        negative = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
    }
    // mantissa in [10^(d-1), 10^d) times 10^(oom+1-d) lands in [10^oom, 10^(oom+1)).
    std::string text = (negative ? "-" : "") + std::to_string(mantissa) + "e" +
                       std::to_string(oom + 1 - d);
    auto value = parse_decimal(text);
    return *value;
}

Decimal compute_expected(ProbeOp op, const Decimal& lhs, const Decimal& rhs) {
    dsl::ReasoningProgram program;
    program.steps.push_back(
        dsl::Step{dsl_op(op), {dsl::Literal{lhs}, dsl::Literal{rhs}}});
    auto answer = dsl::evaluate(program);
    return std::get<core::NumberValue>(answer).value;
}

std::size_t cell_index(ProbeOp op, int tau) {
    return static_cast<std::size_t>(op) * kTauGroups +
           static_cast<std::size_t>(tau - kTauMin);
}

}  // namespace

std::string_view probe_op_name(ProbeOp op) {
    switch (op) {
        case ProbeOp::Add: return "add";
        case ProbeOp::Sub: return "sub";
        case ProbeOp::Mul: return "mul";
        case ProbeOp::Div: return "div";
    }
    return "add";
}

std::string_view probe_op_symbol(ProbeOp op) {
    switch (op) {
        case ProbeOp::Add: return "+";
        case ProbeOp::Sub: return "-";
        case ProbeOp::Mul: return "*";
        case ProbeOp::Div: return "/";
    }
    return "+";
}

std::optional<ProbeOp> probe_op_from_name(std::string_view name) {
    for (ProbeOp op : kOps) {
        if (probe_op_name(op) == name) return op;
    }
    return std::nullopt;
}

ZeroOperand::ZeroOperand() : std::domain_error("order of magnitude of zero is undefined") {}

int order_of_magnitude(const Decimal& x) {
    if (x == 0) throw ZeroOperand();
    return order_of_magnitude_unchecked(x);
}

int tau(const Decimal& lhs, const Decimal& rhs) {
    int ol = order_of_magnitude(lhs);
    int orr = order_of_magnitude(rhs);
    int al = ol < 0 ? -ol : ol;
    int ar = orr < 0 ? -orr : orr;
    return al >= ar ? ol : orr;
}

std::vector<ProbeItem> generate(std::uint64_t seed, const GenerateOptions& opts) {
    std::mt19937_64 rng(seed);
    std::vector<ProbeItem> items;
    items.reserve(static_cast<std::size_t>(4) * kTauGroups * kGroupSize);

    for (ProbeOp op : kOps) {
        for (int t = kTauMin; t <= kTauMax; ++t) {
            for (int k = 0; k < kGroupSize; ++k) {
                int abs_t = t < 0 ? -t : t;
                std::uniform_int_distribution<int> other_oom_dist(-abs_t, abs_t);
                int other_oom = other_oom_dist(rng);

                Decimal dominant = make_operand(rng, t, opts.signed_operands);
                Decimal other = make_operand(rng, other_oom, opts.signed_operands);

                // Opposite-sign OOM of equal magnitude only wins the tie
                // from the left slot; otherwise either side works.
                bool dominant_left = true;
                if (other_oom == t || std::abs(other_oom) < abs_t) {
                    dominant_left = std::uniform_int_distribution<int>(0, 1)(rng) == 0;
                }

                ProbeItem item;
                item.op = op;
                item.tau = t;
                item.lhs = dominant_left ? dominant : other;
                item.rhs = dominant_left ? other : dominant;
                item.expected = compute_expected(op, item.lhs, item.rhs);
                char id[64];
                std::snprintf(id, sizeof id, "%s_%d_%02d",
                              std::string(probe_op_name(op)).c_str(), t, k);
                item.id = id;
                item.seed_path = std::to_string(seed) + "/" +
                                 std::string(probe_op_name(op)) + "/" +
                                 std::to_string(t) + "/" + std::to_string(k);
                items.push_back(std::move(item));
            }
        }
    }
    return items;
}

std::string probe_prompt(const ProbeItem& item) {
    return to_canonical_string(item.lhs) + " " + std::string(probe_op_symbol(item.op)) +
           " " + to_canonical_string(item.rhs) +
           "\nAnswer with the numeric result only.";
}

const ProbeCell& cell_for(const ProbeReport& report, ProbeOp op, int tau) {
    return report.cells.at(cell_index(op, tau));
}

ProbeReport grade_probe(const std::vector<ProbeItem>& items,
                        const std::map<std::string, std::string>& responses,
                        const grading::GradeConfig& cfg) {
    ProbeReport report;
    report.cells.resize(static_cast<std::size_t>(4) * kTauGroups);
    for (ProbeOp op : kOps) {
        for (int t = kTauMin; t <= kTauMax; ++t) {
            auto& cell = report.cells[cell_index(op, t)];
            cell.op = op;
            cell.tau = t;
        }
    }
    report.per_op.resize(4);
    for (ProbeOp op : kOps) {
        report.per_op[static_cast<std::size_t>(op)].op = op;
    }

    for (const ProbeItem& item : items) {
        auto& cell = report.cells[cell_index(item.op, item.tau)];
        auto& marginal = report.per_op[static_cast<std::size_t>(item.op)];
        ++cell.n;
        ++marginal.n;
        ++report.total;

        auto it = responses.find(item.id);
        if (it == responses.end()) {
            report.missing_ids.push_back(item.id);
            continue;
        }
        auto parsed = response::parse(prompting::Strategy::Direct, it->second);
        if (!parsed.final_answer) continue;
        core::NumberValue gold;
        gold.value = item.expected;
        auto result = grading::is_correct(*parsed.final_answer, gold, cfg);
        if (result.correct) {
            ++cell.correct;
            ++marginal.correct;
            ++report.total_correct;
        }
    }
    return report;
}

void save_probe_csv(const std::vector<ProbeItem>& items, const std::string& path) {
    std::string out = "id,op,tau,lhs,rhs,expected\n";
    for (const ProbeItem& item : items) {
        out += csv::join_row({item.id, std::string(probe_op_name(item.op)),
                              std::to_string(item.tau), to_canonical_string(item.lhs),
                              to_canonical_string(item.rhs),
                              to_canonical_string(item.expected)});
    }
    csv::write_file(path, out);
}

std::vector<ProbeItem> load_probe_csv(const std::string& path) {
    auto rows = csv::parse(csv::read_file(path));
    std::vector<ProbeItem> items;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != 6) {
            throw std::runtime_error("probe csv row " + std::to_string(i + 1) +
                                     ": expected 6 fields");
        }
        ProbeItem item;
        item.id = row[0];
        auto op = probe_op_from_name(row[1]);
        if (!op) throw std::runtime_error("probe csv row " + std::to_string(i + 1) +
                                          ": unknown op " + row[1]);
        item.op = *op;
        item.tau = std::stoi(row[2]);
        auto lhs = parse_decimal(row[3]);
        auto rhs = parse_decimal(row[4]);
        auto expected = parse_decimal(row[5]);
        if (!lhs || !rhs || !expected) {
            throw std::runtime_error("probe csv row " + std::to_string(i + 1) +
                                     ": bad decimal field");
        }
        item.lhs = *lhs;
        item.rhs = *rhs;
        item.expected = *expected;
        item.seed_path = "csv:" + path;
        items.push_back(std::move(item));
    }
    return items;
}

std::string results_csv(const ProbeReport& report) {
    std::string out = "op,tau,accuracy,n\n";
    for (const ProbeCell& cell : report.cells) {
        Decimal acc = cell.n == 0 ? Decimal(0)
                                  : normalize_precision(Decimal(cell.correct) /
                                                        Decimal(cell.n));
        out += csv::join_row({std::string(probe_op_name(cell.op)),
                              std::to_string(cell.tau), format_fixed(acc, 4),
                              std::to_string(cell.n)});
    }
    return out;
}

}  // namespace tabeval::probe
