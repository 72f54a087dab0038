// Regenerates every committed file under fixtures/: the raw dataset files,
// the gold-program oracle set, the shot banks, the 50-example replay slice,
// the probe replay table and the sample human labels. Output is fully
// deterministic, so a regenerated tree matches the committed one byte for
// byte. Run from the repository root:
//
//   ./build/gen_dataset_fixtures [fixtures-dir]
//
// The gold-program answers are computed with exact GMP rationals, on
// purpose: the evaluation library never touches them, which is what makes
// the set usable as an oracle for it.

#include "tabeval/core_model.hpp"
#include "tabeval/decimal.hpp"
#include "tabeval/llm_gateway.hpp"
#include "tabeval/probe.hpp"
#include "tabeval/program_dsl.hpp"
#include "tabeval/prompting.hpp"
#include "tabeval/response_parsing.hpp"

#include <json.hpp>

#include <gmpxx.h>

#include <array>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace tabeval;
using nlohmann::json;

namespace {

void write_text(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
    std::cout << path.string() << "\n";
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// --- raw dataset files -------------------------------------------------------

json finqa_raw() {
    return json::array({
        {{"id", "fq1"},
         {"pre_text",
          {"as a result of strong fourth-quarter bookings, backlog at year-end 2001 "
           "increased across all three aerospace segments.",
           "the commercial aerospace backlog reached $15,395 million at december 31, 2001."}},
         {"post_text",
          {"military aircraft orders added $3,802 million and other programs $4 million."}},
         {"table",
          {{"backlog (in millions)", "2001", "2000"},
           {"commercial aerospace", "$15,395", "$14,280"},
           {"military aircraft", "$3,802", "$3,356"},
           {"other programs", "$4", "$12"}}},
         {"qa",
          {{"question", "what was the total backlog at december 31, 2001?"},
           {"program", "add(15395, 3802), add(#0, 4)"},
           {"exe_ans", 19201},
           {"gold_inds",
            {{"table_1", "commercial aerospace backlog was $15,395 million"},
             {"table_2", "military aircraft backlog was $3,802 million"},
             {"table_3", "other programs backlog was $4 million"}}}}}},
        {{"id", "fq2"},
         {"pre_text",
          {"net sales declined during 2001 as commercial deliveries slowed."}},
         {"post_text", {}},
         {"table",
          {{"(in millions)", "2001", "2000"},
           {"net sales", "$19,573", "$25,403"},
           {"operating profit", "$1,790", "$2,310"}}},
         {"qa",
          {{"question", "what was the percentage change in net sales from 2000 to 2001?"},
           {"program", "subtract(19573, 25403), divide(#0, 25403)"},
           {"exe_ans", -0.2295},
           {"gold_inds", {{"table_1", "net sales were $19,573 million in 2001"}}}}}},
        {{"id", "fq3"},
         {"pre_text",
          {"the firm's invested assets include mortgage and other loans receivable, "
           "net of allowance, of $28,418 million in 2006.",
           "asset management accounted for $4,884 million of that total."}},
         {"post_text", {}},
         {"table",
          {{"(in millions)", "2006"},
           {"asset management", "$4,884"},
           {"mortgage and other loans receivable, net of allowance", "$28,418"}}},
         {"qa",
          {{"question",
            "what is the proportion of asset management to the total mortgage and other "
            "loans receivable, net of allowance in 2006?"},
           {"program", "divide(4884, 28418)"},
           {"exe_ans", 0.1719},
           {"gold_inds",
            {{"table_1", "asset management was $4,884 million"},
             {"table_2", "mortgage and other loans receivable were $28,418 million"}}}}}},
        {{"id", "fq4"},
         {"pre_text", {"segment revenue grew in each of the last three years."}},
         {"post_text", {}},
         {"table",
          {{"(in millions)", "2015", "2016", "2017"},
           {"revenue", "1,100", "1,300", "1,600"},
           {"expenses", "900", "1,000", "1,150"}}},
         {"qa",
          {{"question", "what was the average annual revenue over the period?"},
           {"program", "table_average(revenue, none)"},
           {"exe_ans", 1333.33},
           {"gold_inds", {{"table_1", "revenue of 1,100, 1,300 and 1,600"}}}}}},
        {{"id", "fq5"},
         {"pre_text", {"revenue comparison between the two most recent years."}},
         {"post_text", {}},
         {"table",
          {{"(in millions)", "2017", "2016"}, {"revenue", "$5,735", "$4,884"}}},
         {"qa",
          {{"question", "was 2017 revenue greater than 2016 revenue?"},
           {"program", "greater(5735, 4884)"},
           {"exe_ans", "yes"},
           {"gold_inds", {{"table_1", "revenue was $5,735 and $4,884"}}}}}},
        {{"id", "fq6"},
         {"pre_text",
          {"the effective tax rate was 17.5% in 2017 and 14.1% in 2016."}},
         {"post_text", {}},
         {"table",
          {{"", "2017", "2016"}, {"effective tax rate", "17.5%", "14.1%"}}},
         {"qa",
          {{"question", "how much did the effective tax rate increase during 2017?"},
           {"program", "subtract(17.5%, 14.1%)"},
           {"exe_ans", 0.034},
           {"gold_inds", {{"text_0", "17.5% in 2017 and 14.1% in 2016"}}}}}},
    });
}

json tatqa_raw() {
    json table = {
        {"uid", "tq-table-1"},
        {"table",
         {{"", "2019", "2018"},
          {"Revenue", "5,735", "4,884"},
          {"Distribution expenses", "1,968", "2,121"},
          {"Administrative expenses", "1,282", "1,138"},
          {"Total expenses", "3,250", "3,259"},
          {"Net income", "2,485", "1,625"}}}};
    json paragraphs = json::array(
        {{{"uid", "tq-p1"},
          {"order", 1},
          {"text", "Revenue grew to $5,735 thousand in fiscal 2019 from $4,884 thousand "
                   "a year earlier."}},
         {{"uid", "tq-p2"},
          {"order", 2},
          {"text", "Expense discipline held total expenses roughly flat year over year."}}});
    json questions = json::array(
        {{{"uid", "tq1"},
          {"question", "What was the change in revenue between 2018 and 2019?"},
          {"answer", "851"},
          {"derivation", "5,735 - 4,884"},
          {"answer_type", "arithmetic"},
          {"scale", "thousand"}},
         {{"uid", "tq2"},
          {"question", "Which expense line was larger in 2019?"},
          {"answer", "Distribution expenses"},
          {"derivation", ""},
          {"answer_type", "span"},
          {"scale", ""}},
         {{"uid", "tq3"},
          {"question", "What were total expenses as a percentage of revenue in 2019?"},
          {"answer", 56.67},
          {"derivation", "(3,250 / 5,735) * 100"},
          {"answer_type", "arithmetic"},
          {"scale", "percent"}},
         {{"uid", "tq4"},
          {"question", "Which fiscal years does the table report?"},
          {"answer", {"2019", "2018"}},
          {"derivation", ""},
          {"answer_type", "multi-span"},
          {"scale", ""}}});
    return json::array({{{"table", table}, {"paragraphs", paragraphs}, {"questions", questions}}});
}

json convfinqa_raw() {
    return json::array(
        {{{"id", "cfq1"},
          {"pre_text",
           {"the graph compares the cumulative total shareholder return on masco common "
            "stock against the s&p 500 index over five years."}},
          {"post_text", {"all values assume a $100 investment on december 31, 2012."}},
          {"table",
           {{"", "2013", "2014", "2015", "2016", "2017"},
            {"masco", "$138.48", "$155.26", "$200.79", "$227.08", "$318.46"},
            {"s&p 500 index", "$132.04", "$149.89", "$151.94", "$169.82", "$206.49"},
            {"s&p industrials index", "$140.18", "$153.73", "$149.83", "$177.65",
             "$214.55"}}},
          {"annotation",
           {{"dialogue_break",
             {"what was the value of the s&p 500 index in 2017?",
              "and what was it in 2013?",
              "what was, then, the change over the years?",
              "and how much does that change represent in relation to the 2013 value?"}},
            {"exe_ans_list", {206.49, 132.04, 74.45, 0.5638}},
            {"turn_program_list",
             {"", "", "subtract(206.49, 132.04)",
              "subtract(206.49, 132.04), divide(#0, 132.04)"}}}}}});
}

// The hierarchical-depth illustration: a 15-row segment-results table with
// two header rows and indented revenue/expense groups. The two evidence
// cells sit under both header levels and one row group, depth
// 1 + 2 + 1 = 4.
json multihiertt_raw() {
    json fig_table = {{"Years Ended December 31,", "2009", "2008"},
                      {"(in millions, except percentages)", "", ""},
                      {"Revenues", "", ""},
                      {"Management and financial advice fees", "$1,234", "$1,339"},
                      {"Distribution fees", "$1,733", "$1,912"},
                      {"Net investment income", "$297", "$-43"},
                      {"Other revenues", "$85", "$80"},
                      {"Total revenues", "$3,349", "$3,288"},
                      {"Banking and deposit interest expense", "$133", "$178"},
                      {"Total net revenues", "$3,216", "$3,110"},
                      {"Expenses", "", ""},
                      {"Distribution expenses", "$1,968", "$2,121"},
                      {"General and administrative expense", "$1,282", "$1,138"},
                      {"Total expenses", "$3,250", "$3,259"},
                      {"Pretax loss", "$-34", "$-149"}};
    json fig_indents = {0, 0, 0, 1, 1, 1, 1, 1, 0, 0, 0, 1, 1, 1, 0};
    json small_table = {{"", "2009"}, {"advisors", "9,700"}, {"branded offices", "7,570"}};

    auto sized_table = [](std::size_t data_rows) {
        json grid = json::array();
        grid.push_back({"item", "value"});
        for (std::size_t r = 1; r <= data_rows; ++r)
            grid.push_back({"item " + std::to_string(r), std::to_string(r * 10)});
        return grid;
    };

    return json::array(
        {{{"uid", "mh_fig6"},
          {"paragraphs",
           {"the following table presents the results of operations of the advice and "
            "wealth management segment."}},
          {"tables", {fig_table, small_table}},
          {"n_header_rows", {2, 1}},
          {"row_indents", {fig_indents, {0, 0, 0}}},
          {"qa",
           {{"question",
             "what will distribution fees reach in 2010 if they continue to grow at "
             "their current rate? (in millions)"},
            {"program", "divide(1733, 1912), multiply(#0, 1733)"},
            {"answer", 1570.76},
            {"gold_inds",
             {{"cell_4_1", "distribution fees were $1,733 in 2009"},
              {"cell_4_2", "distribution fees were $1,912 in 2008"}}}}}},
         {{"uid", "mh_tables"},
          {"paragraphs", {"segment detail follows, one table per business line."}},
          {"tables", {sized_table(4), sized_table(11), sized_table(8)}},
          {"qa",
           {{"question", "what is the sum of the first two items of the largest table?"},
            {"program", "add(10, 20)"},
            {"answer", 30}}}},
         {{"uid", "mh_rows40"},
          {"paragraphs", {"holdings by position, forty rows."}},
          {"tables", {sized_table(39)}},
          {"qa",
           {{"question", "what is the value of item 2 less item 1?"},
            {"program", "subtract(20, 10)"},
            {"answer", 10}}}},
         {{"uid", "mh_rows41"},
          {"paragraphs", {"holdings by position, forty-one rows."}},
          {"tables", {sized_table(40)}},
          {"qa",
           {{"question", "what is the value of item 2 less item 1?"},
            {"program", "subtract(20, 10)"},
            {"answer", 10}}}}});
}

constexpr const char* kHumanLabels =
    "example_id,category,n_steps,hierarchy_depth,empty_cell_pct\n"
    "fq1,Sum,2,2,0.0\n"
    "fq2,ChangeRatio,3,2,0.0\n";

// --- gold programs (GMP rational oracle) -------------------------------------

struct RatOperand {
    std::string text;
    mpq_class value;
};

std::string rat_to_decimal(const mpq_class& q, int frac_digits = 12) {
    mpz_class num = q.get_num(), den = q.get_den();
    bool neg = num < 0;
    if (neg) num = -num;
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(frac_digits));
    mpz_class scaled = num * scale, quot, rem;
    mpz_fdiv_qr(quot.get_mpz_t(), rem.get_mpz_t(), scaled.get_mpz_t(), den.get_mpz_t());
    if (rem * 2 >= den) ++quot;
    std::string digits = quot.get_str();
    if (digits.size() <= static_cast<std::size_t>(frac_digits))
        digits.insert(0, static_cast<std::size_t>(frac_digits) + 1 - digits.size(), '0');
    std::string out = digits.substr(0, digits.size() - static_cast<std::size_t>(frac_digits)) +
                      "." + digits.substr(digits.size() - static_cast<std::size_t>(frac_digits));
    while (out.back() == '0') out.pop_back();
    if (out.back() == '.') out.pop_back();
    if (neg && out != "0") out.insert(out.begin(), '-');
    return out;
}

RatOperand random_literal(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> sig(1, 4), frac(0, 2), neg(0, 9);
    int digits = sig(rng);
    std::uniform_int_distribution<long> mag(digits == 1 ? 1 : static_cast<long>(std::pow(10, digits - 1)),
                                            static_cast<long>(std::pow(10, digits)) - 1);
    long n = mag(rng);
    int f = frac(rng);
    bool negative = neg(rng) == 0;
    std::string body = std::to_string(n);
    if (f > 0) {
        if (body.size() <= static_cast<std::size_t>(f))
            body.insert(0, static_cast<std::size_t>(f) + 1 - body.size(), '0');
        body.insert(body.size() - static_cast<std::size_t>(f), ".");
    }
    mpz_class scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(f));
    mpq_class v(mpz_class(n), scale);
    v.canonicalize();
    if (negative) {
        body.insert(body.begin(), '-');
        v = -v;
    }
    return {body, v};
}

std::string gold_programs_jsonl() {
    std::mt19937_64 rng(20240817);
    const std::array<const char*, 4> named_consts = {"const_100", "const_1000", "const_m1",
                                                     "const_2"};
    const std::array<long, 4> named_values = {100, 1000, -1, 2};

    std::string out;
    int emitted = 0;
    for (int idx = 0; emitted < 220; ++idx) {
        std::uniform_int_distribution<int> nsteps_dist(1, 5), op_dist(0, 6), pick(0, 9);
        int n_steps = nsteps_dist(rng);
        std::vector<mpq_class> values;
        std::vector<std::string> steps;
        bool greater_final = emitted % 22 == 21;  // sprinkle boolean programs
        bool gave_up = false;
        std::string bool_answer;

        for (int s = 0; s < n_steps && !gave_up; ++s) {
            auto operand = [&](bool avoid_zero) -> RatOperand {
                // step references become available from the second step on
                if (!values.empty() && pick(rng) < 4) {
                    std::uniform_int_distribution<int> ref(0, static_cast<int>(values.size()) - 1);
                    int k = ref(rng);
                    if (!avoid_zero || values[static_cast<std::size_t>(k)] != 0)
                        return {"#" + std::to_string(k), values[static_cast<std::size_t>(k)]};
                }
                if (pick(rng) == 0) {
                    std::uniform_int_distribution<int> c(0, 3);
                    int k = c(rng);
                    return {named_consts[static_cast<std::size_t>(k)],
                            mpq_class(named_values[static_cast<std::size_t>(k)])};
                }
                RatOperand lit = random_literal(rng);
                while (avoid_zero && lit.value == 0) lit = random_literal(rng);
                return lit;
            };

            bool final_step = s == n_steps - 1;
            if (greater_final && final_step) {
                RatOperand a = operand(false), b = operand(false);
                steps.push_back("greater(" + a.text + ", " + b.text + ")");
                bool_answer = a.value > b.value ? "yes" : "no";
                values.emplace_back(0);
                break;
            }

            int op = op_dist(rng);
            RatOperand a = operand(false);
            RatOperand b = operand(op == 3);  // divide avoids a zero divisor
            mpq_class v;
            const char* name = nullptr;
            switch (op) {
                case 0: name = "add"; v = a.value + b.value; break;
                case 1: name = "subtract"; v = a.value - b.value; break;
                case 2: name = "multiply"; v = a.value * b.value; break;
                case 3: name = "divide"; v = a.value / b.value; break;
                case 4: {
                    name = "exp";
                    std::uniform_int_distribution<int> e(2, 3);
                    int k = e(rng);
                    b = {std::to_string(k), mpq_class(k)};
                    mpz_class num, den;
                    mpz_pow_ui(num.get_mpz_t(), a.value.get_num().get_mpz_t(),
                               static_cast<unsigned long>(k));
                    mpz_pow_ui(den.get_mpz_t(), a.value.get_den().get_mpz_t(),
                               static_cast<unsigned long>(k));
                    v = mpq_class(num, den);
                    v.canonicalize();
                    break;
                }
                case 5: name = "min"; v = a.value < b.value ? a.value : b.value; break;
                default: name = "max"; v = a.value > b.value ? a.value : b.value; break;
            }
            if (abs(v) > 1000000000000L) {
                gave_up = true;  // keep answer strings in a sane range
                break;
            }
            steps.push_back(std::string(name) + "(" + a.text + ", " + b.text + ")");
            values.push_back(v);
        }
        if (gave_up || steps.empty()) continue;

        std::string program;
        for (const auto& s : steps) program += (program.empty() ? "" : ", ") + s;
        char id[16];
        std::snprintf(id, sizeof id, "gp-%03d", emitted + 1);
        json j{{"id", id},
               {"program", program},
               {"exe_ans", greater_final ? bool_answer : rat_to_decimal(values.back())}};
        out += j.dump() + "\n";
        ++emitted;
    }
    return out;
}

// --- shot banks --------------------------------------------------------------

struct Scenario {
    std::string context;                               // one premise sentence
    std::vector<std::vector<std::string>> rows;        // first row is the header
    std::vector<int> indents;                          // optional, per row
    std::string question;
    std::string program;                               // DSL text
    std::string domain;                                // EEDP domain knowledge
    std::vector<std::string> evidences;                // EEDP evidence bullets
    std::string answer_suffix;                         // "" or "%"
    std::string rows_used;                             // decomposer row pick
};

// Step values as the model would state them: integers exact, otherwise two
// decimals at magnitude >= 1 and four below (all well inside grading
// tolerance).
std::string stated(const Decimal& v) {
    std::string canon = to_canonical_string(v);
    if (canon.find('.') == std::string::npos) return canon;
    Decimal mag = v < 0 ? Decimal(-v) : v;
    std::string fixed = format_fixed(v, mag >= 1 ? 2 : 4);
    while (fixed.back() == '0') fixed.pop_back();
    if (fixed.back() == '.') fixed.pop_back();
    return fixed;
}

struct StepText {
    std::string description;  // "Divide #1 by 25403."
    std::string equation;     // "-5830 / 25403 = -0.2295"
};

struct ProgramTexts {
    std::vector<StepText> steps;
    Decimal final_value;
};

ProgramTexts program_texts(const std::string& program_text) {
    auto program = dsl::parse_program(program_text);
    std::vector<Decimal> values;
    for (std::size_t i = 1; i <= program.steps.size(); ++i) {
        dsl::ReasoningProgram prefix;
        prefix.steps.assign(program.steps.begin(),
                            program.steps.begin() + static_cast<std::ptrdiff_t>(i));
        values.push_back(std::get<core::NumberValue>(dsl::evaluate(prefix)).value);
    }

    auto ref_text = [](const dsl::Operand& o) {
        if (const auto* r = std::get_if<dsl::StepRef>(&o))
            return "#" + std::to_string(r->index + 1);
        if (const auto* l = std::get_if<dsl::Literal>(&o)) return to_canonical_string(l->value);
        return to_canonical_string(std::get<dsl::NamedConst>(o).value);
    };
    auto value_text = [&](const dsl::Operand& o) {
        if (const auto* r = std::get_if<dsl::StepRef>(&o)) return stated(values[r->index]);
        if (const auto* l = std::get_if<dsl::Literal>(&o)) return to_canonical_string(l->value);
        return to_canonical_string(std::get<dsl::NamedConst>(o).value);
    };

    ProgramTexts out;
    for (std::size_t i = 0; i < program.steps.size(); ++i) {
        const auto& step = program.steps[i];
        std::string a = ref_text(step.args[0]), b = ref_text(step.args[1]);
        std::string av = value_text(step.args[0]), bv = value_text(step.args[1]);
        StepText t;
        const char* sym = "+";
        switch (step.op) {
            case dsl::AtomicOp::Add:
                t.description = "Add " + a + " and " + b + ".";
                break;
            case dsl::AtomicOp::Subtract:
                t.description = "Subtract " + b + " from " + a + ".";
                sym = "-";
                break;
            case dsl::AtomicOp::Multiply:
                t.description = "Multiply " + a + " by " + b + ".";
                sym = "*";
                break;
            case dsl::AtomicOp::Divide:
                t.description = "Divide " + a + " by " + b + ".";
                sym = "/";
                break;
            case dsl::AtomicOp::Exp:
                t.description = "Raise " + a + " to the power of " + b + ".";
                sym = "^";
                break;
            default:
                throw std::logic_error("scenario programs stick to arithmetic ops");
        }
        t.equation = av + " " + sym + " " + bv + " = " + stated(values[i]);
        out.steps.push_back(std::move(t));
    }
    out.final_value = values.back();
    return out;
}

std::string premise_of(const Scenario& sc) {
    std::string out = sc.context + "\n";
    for (std::size_t r = 0; r < sc.rows.size(); ++r) {
        std::string line = "|";
        for (std::size_t c = 0; c < sc.rows[r].size(); ++c) {
            std::string cell = sc.rows[r][c];
            if (c == 0 && r < sc.indents.size())
                cell.insert(0, static_cast<std::size_t>(sc.indents[r]) * 2, ' ');
            line += " " + cell + " |";
        }
        out += line + "\n";
    }
    return out;
}

prompting::Demonstration demo_for(prompting::Strategy strategy, const Scenario& sc) {
    auto texts = program_texts(sc.program);
    std::string answer = stated(texts.final_value) + sc.answer_suffix;

    prompting::Demonstration d;
    d.premise = premise_of(sc);
    d.question = sc.question;
    switch (strategy) {
        case prompting::Strategy::Direct:
            d.target = answer;
            break;
        case prompting::Strategy::CoT: {
            std::string body = sc.domain;
            for (std::size_t i = 0; i < texts.steps.size(); ++i)
                body += " " + texts.steps[i].description + " That gives " +
                        texts.steps[i].equation + ".";
            d.target = body + " The final answer is " + answer + ".";
            break;
        }
        case prompting::Strategy::PoT: {
            auto program = dsl::parse_program(sc.program);
            auto var = [&](std::size_t i) { return "s" + std::to_string(i + 1); };
            auto operand = [&](const dsl::Operand& o) {
                if (const auto* r = std::get_if<dsl::StepRef>(&o)) return var(r->index);
                if (const auto* l = std::get_if<dsl::Literal>(&o))
                    return to_canonical_string(l->value);
                return to_canonical_string(std::get<dsl::NamedConst>(o).value);
            };
            std::string code;
            for (std::size_t i = 0; i < program.steps.size(); ++i) {
                const auto& step = program.steps[i];
                const char* sym = step.op == dsl::AtomicOp::Add        ? " + "
                                  : step.op == dsl::AtomicOp::Subtract ? " - "
                                  : step.op == dsl::AtomicOp::Multiply ? " * "
                                  : step.op == dsl::AtomicOp::Divide   ? " / "
                                                                       : " ** ";
                std::string name = i + 1 == program.steps.size() ? "ans" : var(i);
                code += name + " = " + operand(step.args[0]) + sym + operand(step.args[1]) +
                        "\n";
            }
            d.target = code;
            break;
        }
        case prompting::Strategy::Decomposers: {
            std::string body = "Rows: " + sc.rows_used + "\nSub-questions:\n";
            for (std::size_t i = 0; i < texts.steps.size(); ++i)
                body += std::to_string(i + 1) + ". " + texts.steps[i].description + "\n";
            d.target = body + "The final answer is " + answer + ".";
            break;
        }
        case prompting::Strategy::EEDP: {
            std::string body = "Domain Knowledge: " + sc.domain + "\nGold Evidences:\n";
            for (const auto& e : sc.evidences) body += "- " + e + "\n";
            body += "Steps:\n";
            for (std::size_t i = 0; i < texts.steps.size(); ++i)
                body += std::to_string(i + 1) + ". " + texts.steps[i].description + "\n" +
                        "   - Response " + std::to_string(i + 1) + ": " +
                        texts.steps[i].equation + "\n";
            d.target = body + "The final answer is " + answer + ".";
            break;
        }
    }
    auto why = prompting::validate_demonstration(strategy, d);
    if (why)
        throw std::logic_error("generated demonstration rejected (" +
                               std::string(prompting::strategy_name(strategy)) + "): " + *why);
    return d;
}

std::vector<Scenario> scenarios_for(core::Dataset dataset) {
    switch (dataset) {
        case core::Dataset::FinQA:
            return {
                {"the company reported the following results (in millions).",
                 {{"", "2017", "2016"},
                  {"revenue", "$5,120", "$4,884"},
                  {"cost of sales", "$3,104", "$2,673"},
                  {"operating income", "$1,288", "$1,140"}},
                 {},
                 "what was the change in revenue from 2016 to 2017?",
                 "subtract(5120, 4884)",
                 "The change between two years is the later value minus the earlier value.",
                 {"Table shows revenue in 2017 is $5,120.",
                  "Table shows revenue in 2016 is $4,884."},
                 "",
                 "1"},
                {"the company reported the following results (in millions).",
                 {{"", "2017", "2016"},
                  {"revenue", "$5,120", "$4,884"},
                  {"operating income", "$1,288", "$1,140"}},
                 {},
                 "what portion of 2017 revenue was operating income?",
                 "divide(1288, 5120)",
                 "A portion is the part divided by the whole.",
                 {"Table shows operating income in 2017 is $1,288.",
                  "Table shows revenue in 2017 is $5,120."},
                 "",
                 "1, 2"},
                {"the company reported the following results (in millions).",
                 {{"", "2017", "2016"}, {"operating income", "$1,288", "$1,140"}},
                 {},
                 "what was the percent change in operating income from 2016 to 2017?",
                 "subtract(1288, 1140), divide(#0, 1140), multiply(#1, const_100)",
                 "Percent change is the difference divided by the earlier value, times 100.",
                 {"Table shows operating income in 2017 is $1,288.",
                  "Table shows operating income in 2016 is $1,140."},
                 "%",
                 "1"},
                {"the company reported the following results (in millions).",
                 {{"", "2017", "2016"}, {"operating income", "$1,288", "$1,140"}},
                 {},
                 "what was the average operating income for 2016 and 2017?",
                 "add(1288, 1140), divide(#0, 2)",
                 "An average of two values is their sum divided by two.",
                 {"Table shows operating income in 2017 is $1,288.",
                  "Table shows operating income in 2016 is $1,140."},
                 "",
                 "1"},
            };
        case core::Dataset::TATQA:
            return {
                {"expense detail for fiscal 2019 (in thousands).",
                 {{"", "2019", "2018"},
                  {"Distribution expenses", "1,968", "2,121"},
                  {"Administrative expenses", "1,282", "1,138"}},
                 {},
                 "What was the total of distribution and administrative expenses in 2019?",
                 "add(1968, 1282)",
                 "A total is the sum of the listed parts.",
                 {"Table shows distribution expenses in 2019 are 1,968 thousand.",
                  "Table shows administrative expenses in 2019 are 1,282 thousand."},
                 "",
                 "1, 2"},
                {"revenue detail for fiscal 2019 (in thousands).",
                 {{"", "2019", "2018"},
                  {"Total revenues", "3,349", "3,288"}},
                 {},
                 "How much higher were total revenues in 2019 than in 2018?",
                 "subtract(3349, 3288)",
                 "The increase is the later value minus the earlier value.",
                 {"Table shows total revenues in 2019 are 3,349 thousand.",
                  "Table shows total revenues in 2018 are 3,288 thousand."},
                 "",
                 "1"},
                {"revenue detail for fiscal 2019 (in thousands).",
                 {{"", "2019", "2018"},
                  {"Distribution fees", "1,733", "1,912"},
                  {"Total revenues", "3,349", "3,288"}},
                 {},
                 "What percentage of 2019 total revenues came from distribution fees?",
                 "divide(1733, 3349), multiply(#0, const_100)",
                 "A percentage of a total is the part divided by the total, times 100.",
                 {"Table shows distribution fees in 2019 are 1,733 thousand.",
                  "Table shows total revenues in 2019 are 3,349 thousand."},
                 "%",
                 "1, 2"},
                {"other income lines for fiscal 2019 (in thousands).",
                 {{"", "2019", "2018"},
                  {"Net investment income", "297", "-43"},
                  {"Other revenues", "85", "80"}},
                 {},
                 "What was the average of net investment income and other revenues in 2019?",
                 "add(297, 85), divide(#0, 2)",
                 "An average of two values is their sum divided by two.",
                 {"Table shows net investment income in 2019 is 297 thousand.",
                  "Table shows other revenues in 2019 are 85 thousand."},
                 "",
                 "1, 2"},
            };
        case core::Dataset::ConvFinQA:
            return {
                {"cumulative five-year total shareholder return, $100 invested in 2012.",
                 {{"", "2013", "2017"},
                  {"s&p 500 index", "$132.04", "$206.49"}},
                 {},
                 "what was the change in the s&p 500 index value from 2013 to 2017?",
                 "subtract(206.49, 132.04)",
                 "The change over a period is the final value minus the initial value.",
                 {"Table shows the s&p 500 index at $206.49 in 2017.",
                  "Table shows the s&p 500 index at $132.04 in 2013."},
                 "",
                 "1"},
                {"cumulative five-year total shareholder return, $100 invested in 2012.",
                 {{"", "2013", "2017"},
                  {"s&p 500 index", "$132.04", "$206.49"}},
                 {},
                 "and what was that change as a ratio of the 2013 value?",
                 "subtract(206.49, 132.04), divide(#0, 132.04)",
                 "A relative change is the absolute change divided by the starting value.",
                 {"Table shows the s&p 500 index at $206.49 in 2017.",
                  "Table shows the s&p 500 index at $132.04 in 2013."},
                 "",
                 "1"},
                {"cumulative five-year total shareholder return, $100 invested in 2012.",
                 {{"", "2013", "2014"},
                  {"masco", "$138.48", "$155.26"},
                  {"s&p 500 index", "$132.04", "$149.89"}},
                 {},
                 "what was the combined 2013 value of masco and the index?",
                 "add(138.48, 132.04)",
                 "A combined value is the sum of the two holdings.",
                 {"Table shows masco at $138.48 in 2013.",
                  "Table shows the s&p 500 index at $132.04 in 2013."},
                 "",
                 "1, 2"},
                {"cumulative five-year total shareholder return, $100 invested in 2012.",
                 {{"", "2014"}, {"masco", "$155.26"}},
                 {},
                 "what would twice the 2014 masco value be?",
                 "multiply(155.26, 2)",
                 "Doubling a value multiplies it by two.",
                 {"Table shows masco at $155.26 in 2014."},
                 "",
                 "1"},
            };
        case core::Dataset::Multihiertt:
            return {
                {"results of operations, advice and wealth management segment.",
                 {{"Years Ended December 31,", "2009", "2008"},
                  {"Revenues", "", ""},
                  {"Distribution fees", "$1,733", "$1,912"}},
                 {0, 0, 1},
                 "what was the change in distribution fees from 2008 to 2009?",
                 "subtract(1733, 1912)",
                 "The change between two years is the later value minus the earlier value.",
                 {"Table shows distribution fees in 2009 are $1,733.",
                  "Table shows distribution fees in 2008 are $1,912."},
                 "",
                 "2"},
                {"results of operations, advice and wealth management segment.",
                 {{"Years Ended December 31,", "2009", "2008"},
                  {"Revenues", "", ""},
                  {"Distribution fees", "$1,733", "$1,912"}},
                 {0, 0, 1},
                 "what is the ratio of 2009 distribution fees to the 2008 level?",
                 "divide(1733, 1912)",
                 "A year-over-year ratio divides the later value by the earlier value.",
                 {"Table shows distribution fees in 2009 are $1,733.",
                  "Table shows distribution fees in 2008 are $1,912."},
                 "",
                 "2"},
                {"results of operations, advice and wealth management segment.",
                 {{"Years Ended December 31,", "2009", "2008"},
                  {"Revenues", "", ""},
                  {"Management and financial advice fees", "$1,234", "$1,339"},
                  {"Distribution fees", "$1,733", "$1,912"},
                  {"Net investment income", "$297", "$-43"},
                  {"Other revenues", "$85", "$80"}},
                 {0, 0, 1, 1, 1, 1},
                 "what was the total revenue across the four revenue lines in 2009?",
                 "add(1234, 1733), add(#0, 297), add(#1, 85)",
                 "A total aggregates every listed revenue line.",
                 {"Table shows management and financial advice fees in 2009 are $1,234.",
                  "Table shows distribution fees in 2009 are $1,733.",
                  "Table shows net investment income in 2009 is $297.",
                  "Table shows other revenues in 2009 are $85."},
                 "",
                 "2, 3, 4, 5"},
                {"results of operations, advice and wealth management segment.",
                 {{"Years Ended December 31,", "2009", "2008"},
                  {"Banking and deposit interest expense", "$133", "$178"}},
                 {0, 0},
                 "what is twice the 2009 interest expense, less the 2008 level?",
                 "multiply(133, 2), subtract(#0, 178)",
                 "Apply the operations in the order the question states them.",
                 {"Table shows banking and deposit interest expense in 2009 is $133.",
                  "Table shows banking and deposit interest expense in 2008 is $178."},
                 "",
                 "1"},
            };
    }
    return {};
}

void write_shot_banks(const fs::path& dir) {
    for (auto dataset : {core::Dataset::FinQA, core::Dataset::TATQA, core::Dataset::ConvFinQA,
                         core::Dataset::Multihiertt}) {
        auto scenarios = scenarios_for(dataset);
        for (auto strategy :
             {prompting::Strategy::Direct, prompting::Strategy::CoT, prompting::Strategy::PoT,
              prompting::Strategy::Decomposers, prompting::Strategy::EEDP}) {
            std::vector<prompting::Demonstration> demos;
            for (const auto& sc : scenarios) demos.push_back(demo_for(strategy, sc));
            auto path = dir / prompting::shot_bank_filename(dataset, strategy);
            fs::create_directories(dir);
            prompting::save_shot_bank(path.string(), demos);
            std::cout << path.string() << "\n";
        }
    }
}

// --- 50-example replay slice ---------------------------------------------------

std::string comma_fmt(long v) {
    std::string s = std::to_string(v);
    for (auto i = static_cast<std::ptrdiff_t>(s.size()) - 3; i > 0 && s[static_cast<std::size_t>(i) - 1] != '-';
         i -= 3)
        s.insert(static_cast<std::size_t>(i), ",");
    return s;
}

struct EvalItem {
    core::HybridExample example;
    std::string response;  // EEDP-structured raw text
    bool correct;
};

std::string eedp_response(const std::string& program, const std::string& domain,
                          const std::vector<std::string>& evidences) {
    auto texts = program_texts(program);
    std::string body = "Domain Knowledge: " + domain + "\nGold Evidences:\n";
    for (const auto& e : evidences) body += "- " + e + "\n";
    body += "Steps:\n";
    for (std::size_t i = 0; i < texts.steps.size(); ++i)
        body += std::to_string(i + 1) + ". " + texts.steps[i].description + "\n" +
                "   - Response " + std::to_string(i + 1) + ": " + texts.steps[i].equation +
                "\n";
    return body + "The final answer is " + stated(texts.final_value) + ".";
}

std::vector<EvalItem> eval50_items() {
    std::vector<EvalItem> items;
    for (int i = 0; i < 50; ++i) {
        long a = 1200 + 37L * i, b = 800 + 53L * (49 - i) % 1100 + 100;
        long c = 300 + 11L * i;
        core::HybridExample e;
        e.id = "ev" + std::to_string(i + 1);
        e.pre_text = {"the company reported the following results (in millions)."};
        core::Table t;
        t.id = "t0";
        std::vector<std::vector<std::string>> raw = {
            {"", "2017", "2016"},
            {"net revenue", "$" + comma_fmt(a), "$" + comma_fmt(b)},
            {"operating expenses", "$" + comma_fmt(c), "$" + comma_fmt(c - 40)},
        };
        for (std::size_t r = 0; r < raw.size(); ++r) {
            std::vector<core::Cell> row;
            for (std::size_t col = 0; col < raw[r].size(); ++col)
                row.push_back(core::make_cell(r, col, raw[r][col]));
            t.grid.push_back(std::move(row));
        }
        t.n_header_rows = 1;
        t.row_indent_levels = {0, 0, 0};
        e.tables.push_back(std::move(t));
        e.question.id = e.id;
        e.question.dataset = core::Dataset::FinQA;
        e.gold.evidences = {core::TableCellRef{"t0", 1, 1}, core::TableCellRef{"t0", 1, 2}};

        std::string domain;
        std::string as = std::to_string(a), bs = std::to_string(b);
        switch (i % 3) {
            case 0:
                e.question.text = "what was the change in net revenue from 2016 to 2017?";
                e.gold.program_text = "subtract(" + as + ", " + bs + ")";
                domain = "The change between two years is the later value minus the earlier "
                         "value.";
                break;
            case 1:
                e.question.text = "what was the ratio of 2017 net revenue to 2016 net revenue?";
                e.gold.program_text = "divide(" + as + ", " + bs + ")";
                domain = "A year-over-year ratio divides the later value by the earlier value.";
                break;
            default:
                e.question.text =
                    "what was the percent change in net revenue from 2016 to 2017?";
                e.gold.program_text =
                    "subtract(" + as + ", " + bs + "), divide(#0, " + bs + ")";
                domain = "Percent change is the difference divided by the earlier value.";
                break;
        }
        std::vector<std::string> evidences = {
            "Table shows net revenue in 2017 is $" + comma_fmt(a) + ".",
            "Table shows net revenue in 2016 is $" + comma_fmt(b) + "."};

        // every fifth response answers the inverted question — hand-graded
        // as wrong, so the slice carries a known 40/50 accuracy
        bool wrong = i % 5 == 4;
        std::string program = *e.gold.program_text;
        if (wrong) {
            auto p = dsl::parse_program(program);
            std::swap(p.steps[0].args[0], p.steps[0].args[1]);
            program = dsl::render_program(p);
        }
        items.push_back({std::move(e), eedp_response(program, domain, evidences), !wrong});
    }
    return items;
}

void write_eval50(const fs::path& fixtures) {
    auto items = eval50_items();
    std::vector<core::HybridExample> examples;
    for (const auto& it : items) examples.push_back(it.example);
    auto data_path = fixtures / "datasets" / "finqa_eval50.jsonl";
    core::save_normalized(examples, data_path.string());
    std::cout << data_path.string() << "\n";

    auto shots = prompting::load_shot_bank(
        (fixtures / "shots" /
         prompting::shot_bank_filename(core::Dataset::FinQA, prompting::Strategy::EEDP))
            .string(),
        prompting::Strategy::EEDP);
    gateway::ModelConfig mc;
    mc.name = "evalbot";
    std::vector<std::pair<std::string, std::string>> entries;
    for (const auto& it : items) {
        auto bundle =
            prompting::render(prompting::Strategy::EEDP, it.example, shots, mc.default_shots);
        entries.emplace_back(gateway::request_hash(mc, bundle.rendered), it.response);
    }
    auto replay_path = fixtures / "replay" / "evalbot.jsonl";
    fs::create_directories(replay_path.parent_path());
    gateway::save_replay_fixture(replay_path.string(), entries);
    std::cout << replay_path.string() << "\n";
}

// --- probe fixtures ------------------------------------------------------------

void write_probe_fixtures(const fs::path& fixtures) {
    auto items = probe::generate(7);
    gateway::ModelConfig mc;
    mc.name = "probebot";
    std::vector<std::pair<std::string, std::string>> entries;
    std::string responses;
    int planted = 0;
    for (const auto& item : items) {
        std::string raw = to_canonical_string(item.expected);
        // three wrong answers planted in the (mul, tau 5) cell: its
        // accuracy reads 47/50 in the report
        if (item.op == probe::ProbeOp::Mul && item.tau == 5 && planted < 3) {
            raw = to_canonical_string(item.expected * 2);
            ++planted;
        }
        entries.emplace_back(gateway::request_hash(mc, probe::probe_prompt(item)), raw);
        responses += json{{"id", item.id}, {"raw", raw}}.dump() + "\n";
    }
    auto replay_path = fixtures / "replay" / "probebot.jsonl";
    fs::create_directories(replay_path.parent_path());
    gateway::save_replay_fixture(replay_path.string(), entries);
    std::cout << replay_path.string() << "\n";
    write_text(fixtures / "responses" / "probe_demo.jsonl", responses);
}

constexpr const char* kReplayRunConfig =
    "# Offline demo run: every model response comes from the committed\n"
    "# replay fixture, so no endpoint or API key is needed.\n"
    "dataset.finqa = fixtures/datasets/finqa_eval50.jsonl\n"
    "model.evalbot.endpoint =\n"
    "strategies = eedp\n"
    "shots_dir = fixtures/shots\n"
    "output_dir = runs/replay_demo\n"
    "replay_dir = fixtures/replay\n";

}  // namespace

int main(int argc, char** argv) {
    fs::path fixtures = argc > 1 ? argv[1] : "fixtures";
    try {
        write_json(fixtures / "datasets" / "finqa_raw.json", finqa_raw());
        write_json(fixtures / "datasets" / "tatqa_raw.json", tatqa_raw());
        write_json(fixtures / "datasets" / "convfinqa_raw.json", convfinqa_raw());
        write_json(fixtures / "datasets" / "multihiertt_raw.json", multihiertt_raw());
        write_text(fixtures / "labels" / "human_labels.csv", kHumanLabels);
        write_text(fixtures / "datasets" / "gold_programs.jsonl", gold_programs_jsonl());
        write_shot_banks(fixtures / "shots");
        write_eval50(fixtures);
        write_probe_fixtures(fixtures);
        write_text(fixtures / "replay_run.cfg", kReplayRunConfig);
    } catch (const std::exception& e) {
        std::cerr << "fixture generation failed: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
