#include "tabeval/error_analysis.hpp"

#include <doctest.h>

#include <algorithm>

#include "tabeval/metadata.hpp"

using namespace tabeval;
using errors::ErrorTag;
using errors::ProgramVerdict;

namespace {

Decimal dec(const char* s) { return *parse_decimal(s); }

core::HybridExample make_example(std::string question, std::string program,
                                 const std::vector<std::pair<std::string, std::string>>& rows) {
    core::HybridExample e;
    e.id = "ex";
    core::Table t;
    t.id = "t0";
    std::vector<core::Cell> header = {core::make_cell(0, 0, ""), core::make_cell(0, 1, "value")};
    t.grid.push_back(header);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        t.grid.push_back({core::make_cell(r + 1, 0, rows[r].first),
                          core::make_cell(r + 1, 1, rows[r].second)});
    }
    t.n_header_rows = 1;
    t.row_indent_levels.assign(t.grid.size(), 0);
    e.tables.push_back(std::move(t));
    e.question.id = "ex";
    e.question.text = std::move(question);
    e.gold.program_text = std::move(program);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        e.gold.evidences.push_back(core::TableCellRef{"t0", r + 1, 1});
    }
    return e;
}

response::EEDPStep step(std::string description, std::string equation,
                        const char* stated = nullptr) {
    response::EEDPStep s;
    s.description = std::move(description);
    s.equation = std::move(equation);
    if (stated) s.stated_value = dec(stated);
    return s;
}

response::ParsedEEDP eedp_with(std::vector<std::string> evidences,
                               std::vector<response::EEDPStep> steps) {
    response::ParsedEEDP e;
    e.evidences = std::move(evidences);
    e.steps = std::move(steps);
    return e;
}

bool has_tag(const errors::TagResult& r, ErrorTag t) {
    return std::find(r.tags.begin(), r.tags.end(), t) != r.tags.end();
}

}  // namespace

TEST_CASE("tag names round-trip and accept lowercase") {
    for (ErrorTag t : {ErrorTag::E1_MissingEvidence, ErrorTag::E2_WrongEvidence,
                       ErrorTag::R1_DomainKnowledgeDeficit,
                       ErrorTag::R2_QuestionMisinterpretation,
                       ErrorTag::C1_WrongInstantiation, ErrorTag::C2_PrecisionError}) {
        CHECK(errors::tag_from_name(errors::tag_name(t)) == t);
        CHECK_FALSE(errors::tag_label(t).empty());
    }
    CHECK(errors::tag_from_name("r2") == ErrorTag::R2_QuestionMisinterpretation);
    CHECK_FALSE(errors::tag_from_name("E9").has_value());
    CHECK_FALSE(errors::tag_from_name("").has_value());
}

TEST_CASE("values_match tolerates unit phrasing but not different values") {
    CHECK(errors::values_match(dec("4884"), dec("4884")));
    CHECK(errors::values_match(dec("4884"), dec("4884.0")));
    CHECK(errors::values_match(dec("4884"), dec("4884000")));    // thousand phrasing
    CHECK(errors::values_match(dec("4.884"), dec("4884000")));   // million phrasing
    CHECK(errors::values_match(dec("0.141"), dec("14.1")));      // percent form
    CHECK(errors::values_match(dec("-210.09"), dec("-210.09")));
    CHECK(errors::values_match(dec("14.12"), dec("14.13")));     // inside 0.5% tolerance
    CHECK_FALSE(errors::values_match(dec("-210.09"), dec("210.09")));
    CHECK_FALSE(errors::values_match(dec("4884"), dec("68280")));
    CHECK_FALSE(errors::values_match(dec("12"), dec("15")));
}

TEST_CASE("year tokens are integers between 1900 and 2100") {
    CHECK(errors::is_year_token(dec("2017")));
    CHECK(errors::is_year_token(dec("1900")));
    CHECK(errors::is_year_token(dec("2100")));
    CHECK_FALSE(errors::is_year_token(dec("1899")));
    CHECK_FALSE(errors::is_year_token(dec("2101")));
    CHECK_FALSE(errors::is_year_token(dec("2017.5")));
    CHECK_FALSE(errors::is_year_token(dec("150")));
    CHECK_FALSE(errors::is_year_token(dec("-2017")));
}

TEST_CASE("gold value pool combines evidence cells and program literals") {
    auto example = make_example("What was the change in revenue from 2016 to 2017?",
                                "subtract(5735, 4884)",
                                {{"2016 revenue", "4,884"}, {"2017 revenue", "5,735"}});
    auto gold = dsl::parse_program(*example.gold.program_text);
    auto pool = errors::gold_value_pool(example, &gold);
    REQUIRE(pool.size() == 2);  // literals duplicate the cells; years filtered
    CHECK(pool[0] == dec("4884"));
    CHECK(pool[1] == dec("5735"));
}

TEST_CASE("response pools strip step references and years") {
    auto eedp = eedp_with({"In 2017, services backlog was 4,884 thousand"},
                          {step("Divide the backlog by total", "#0 / 25403", "0.19")});
    auto evidence = errors::evidence_numbers(eedp);
    REQUIRE(evidence.size() == 1);
    CHECK(evidence[0] == dec("4884"));

    auto all = errors::response_numbers(eedp);
    REQUIRE(all.size() == 2);  // 4884 + 25403; the #0 ref is not a number
    CHECK(all[1] == dec("25403"));
}

TEST_CASE("program comparison: identical and percent-tail variants match") {
    auto gold = dsl::parse_program("subtract(19573, 25403), divide(#0, 25403)");
    auto same = dsl::parse_program("subtract(19573, 25403), divide(#0, 25403)");
    CHECK(errors::compare_programs(same, gold).verdict == ProgramVerdict::Match);

    auto with_tail =
        dsl::parse_program("subtract(19573, 25403), divide(#0, 25403), multiply(#1, 100)");
    auto cmp = errors::compare_programs(with_tail, gold);
    CHECK(cmp.verdict == ProgramVerdict::Match);
    REQUIRE(!cmp.notes.empty());
    CHECK(cmp.notes[0].find("percent conversion") != std::string::npos);

    // Both sides carrying the conversion also match, nothing stripped.
    auto gold_tail =
        dsl::parse_program("subtract(19573, 25403), divide(#0, 25403), multiply(#1, 100)");
    CHECK(errors::compare_programs(with_tail, gold_tail).verdict == ProgramVerdict::Match);
}

TEST_CASE("program comparison: named constants equal their literal values") {
    auto gold = dsl::parse_program("divide(1, 4), multiply(#0, const_100)");
    auto model = dsl::parse_program("divide(1, 4), multiply(#0, 100)");
    CHECK(errors::compare_programs(model, gold).verdict == ProgramVerdict::Match);
}

TEST_CASE("program comparison: inlined intermediates resolve against refs") {
    auto gold = dsl::parse_program("subtract(10, 4), divide(#0, 2)");
    auto model = dsl::parse_program("subtract(10, 4), divide(6, 2)");
    CHECK(errors::compare_programs(model, gold).verdict == ProgramVerdict::Match);

    // A literal matching nothing upstream orphans the earlier step: the
    // effective computation is a one-step divide, a structural difference.
    auto wrong = dsl::parse_program("subtract(10, 4), divide(7, 2)");
    CHECK(errors::compare_programs(wrong, gold).verdict == ProgramVerdict::OpsDiffer);
}

TEST_CASE("program comparison: op mix differences") {
    auto gold = dsl::parse_program("subtract(225.08, 108.14), divide(#0, 108.14)");
    auto ratio_only = dsl::parse_program("divide(225.08, 108.14)");
    auto cmp = errors::compare_programs(ratio_only, gold);
    CHECK(cmp.verdict == ProgramVerdict::OpsDiffer);
    REQUIRE(!cmp.notes.empty());
    CHECK(cmp.notes[0].find("operations differ") != std::string::npos);

    auto reordered = dsl::parse_program("divide(225.08, 108.14), subtract(#0, 1)");
    auto cmp2 = errors::compare_programs(reordered, gold);
    CHECK(cmp2.verdict == ProgramVerdict::OpsDiffer);
    CHECK(cmp2.notes[0].find("different order") != std::string::npos);
}

TEST_CASE("program comparison: swapped arguments of a non-commutative op") {
    auto gold = dsl::parse_program("divide(50, 200)");
    auto inverted = dsl::parse_program("divide(200, 50)");
    auto cmp = errors::compare_programs(inverted, gold);
    CHECK(cmp.verdict == ProgramVerdict::ArgOrderSwapped);
    CHECK(cmp.notes[0].find("inverted") != std::string::npos);

    // Commutative swaps are no difference at all.
    auto gold_add = dsl::parse_program("add(3, 4)");
    auto swapped_add = dsl::parse_program("add(4, 3)");
    CHECK(errors::compare_programs(swapped_add, gold_add).verdict == ProgramVerdict::Match);
}

TEST_CASE("program comparison: wrong literal reports the model value") {
    auto gold = dsl::parse_program("subtract(4.08, -210.09)");
    auto flipped = dsl::parse_program("subtract(4.08, 210.09)");
    auto cmp = errors::compare_programs(flipped, gold);
    CHECK(cmp.verdict == ProgramVerdict::OperandsDiffer);
    REQUIRE(cmp.mismatched_model_literals.size() == 1);
    CHECK(cmp.mismatched_model_literals[0] == dec("210.09"));
}

TEST_CASE("precision check accepts display rounding and percent forms") {
    auto program = dsl::parse_program("divide(1, 3)");
    auto check = [&](const char* stated) {
        return errors::precision_mismatches(program, {step("Divide 1 by 3", "1 / 3", stated)});
    };
    CHECK(check("0.3333").empty());
    CHECK(check("0.33").empty());
    CHECK(check("33.33").empty());     // percent form of the ratio
    CHECK(check("0.333333333").empty());
    REQUIRE(check("0.3379").size() == 1);
    CHECK(check("0.3379")[0].find("step 1") != std::string::npos);

    // Steps without a stated value have nothing to disagree with.
    CHECK(errors::precision_mismatches(program, {step("Divide 1 by 3", "1 / 3")}).empty());
}

TEST_CASE("precision check never fires on exact recomputation") {
    auto program = dsl::parse_program("add(15395, 3802), add(#0, 4)");
    std::vector<response::EEDPStep> steps = {
        step("Add 15395 and 3802", "15395 + 3802", "19197"),
        step("Add #1 and 4", "#1 + 4", "19201"),
    };
    CHECK(errors::precision_mismatches(program, steps).empty());
}

// --- the six taxonomy cases ---

TEST_CASE("missing gold evidence earns E1") {
    auto example = make_example(
        "What is the total expense across the five categories?",
        "add(10, 20), add(#0, 30), add(#1, 40), add(#2, 50)",
        {{"alpha", "10"}, {"beta", "20"}, {"gamma", "30"}, {"delta", "40"}, {"epsilon", "50"}});
    auto eedp = eedp_with({"alpha expense: 10", "beta expense: 20", "gamma expense: 30"},
                          {step("Add 10 and 20", "10 + 20", "30"),
                           step("Add #1 and 30", "#1 + 30", "60")});
    auto result = errors::tag(eedp, example);
    REQUIRE(has_tag(result, ErrorTag::E1_MissingEvidence));
    CHECK(result.tags.front() == ErrorTag::E1_MissingEvidence);
    CHECK_FALSE(has_tag(result, ErrorTag::E2_WrongEvidence));
    bool mentions_missing = false;
    for (const auto& d : result.diagnostics) {
        if (d.find("absent") != std::string::npos && d.find("40") != std::string::npos)
            mentions_missing = true;
    }
    CHECK(mentions_missing);
}

TEST_CASE("substituted wrong value earns E2 alone") {
    auto example = make_example("What portion of total backlog was attributable to services?",
                                "divide(4884, 110000)",
                                {{"services backlog", "4,884"}, {"total backlog", "110,000"}});
    auto eedp = eedp_with({"services backlog: 68,280", "total backlog: 110,000"},
                          {step("Divide 68280 by 110000", "68280 / 110000", "0.6207")});
    auto result = errors::tag(eedp, example);
    CHECK(result.tags == std::vector<ErrorTag>{ErrorTag::E2_WrongEvidence});
    // The wrong operand is the wrong extraction, not a second instantiation error.
    CHECK_FALSE(has_tag(result, ErrorTag::C1_WrongInstantiation));
    CHECK_FALSE(has_tag(result, ErrorTag::E1_MissingEvidence));
}

TEST_CASE("wrong formula on an in-domain measure earns R1") {
    auto example = make_example(
        "What was the return on investment for the S&P 500 from 2012 to 2017?",
        "subtract(225.08, 108.14), divide(#0, 108.14)",
        {{"2012 value", "108.14"}, {"2017 value", "225.08"}});
    CHECK(metadata::classify_question(example).category == metadata::Category::InDomainInfo);

    auto eedp = eedp_with({"2012 value: 108.14", "2017 value: 225.08"},
                          {step("Divide 225.08 by 108.14", "225.08 / 108.14", "2.0814")});
    auto result = errors::tag(eedp, example);
    CHECK(result.tags == std::vector<ErrorTag>{ErrorTag::R1_DomainKnowledgeDeficit});
}

TEST_CASE("inverted ratio earns R2") {
    auto example = make_example("What is the ratio of segment revenue to total revenue?",
                                "divide(50, 200)",
                                {{"segment revenue", "50"}, {"total revenue", "200"}});
    auto eedp = eedp_with({"segment revenue: 50", "total revenue: 200"},
                          {step("Divide 200 by 50", "200 / 50", "4.0")});
    auto result = errors::tag(eedp, example);
    CHECK(result.tags == std::vector<ErrorTag>{ErrorTag::R2_QuestionMisinterpretation});
}

TEST_CASE("sign-flipped operand earns C1") {
    auto example = make_example(
        "What was the change in cash flow between 2015 and 2016?",
        "subtract(4.08, -210.09)",
        {{"2016 cash flow", "4.08"}, {"2015 cash flow", "-210.09"}});
    auto eedp = eedp_with({"2016 cash flow: 4.08", "2015 cash flow: -210.09"},
                          {step("Subtract 210.09 from 4.08", "4.08 - 210.09", "-206.01")});
    auto result = errors::tag(eedp, example);
    CHECK(result.tags == std::vector<ErrorTag>{ErrorTag::C1_WrongInstantiation});
}

TEST_CASE("inaccurate stated arithmetic earns C2") {
    auto example = make_example(
        "What is the annualized return for the S&P 500 from 2012 to 2017?",
        "divide(225.08, 108.14), exp(#0, 0.2), subtract(#1, 1), multiply(#2, 100)",
        {{"2012 value", "108.14"}, {"2017 value", "225.08"}});
    auto eedp = eedp_with(
        {"2012 value: 108.14", "2017 value: 225.08"},
        {step("Divide 225.08 by 108.14", "225.08 / 108.14", "2.0814"),
         step("Raise #1 to the power of 0.2", "2.0814 ^ 0.2", "1.1606"),
         step("Subtract 1 from #2", "#2 - 1", "0.1606"),
         step("Multiply #3 by 100", "#3 * 100", "16.06")});
    auto result = errors::tag(eedp, example);
    REQUIRE(result.tags == std::vector<ErrorTag>{ErrorTag::C2_PrecisionError});
    bool mentions_step2 = false;
    for (const auto& d : result.diagnostics) {
        if (d.find("step 2") != std::string::npos && d.find("1.1606") != std::string::npos)
            mentions_step2 = true;
    }
    CHECK(mentions_step2);
}

TEST_CASE("fully consistent response yields needs_review") {
    auto example = make_example("What is the ratio of segment revenue to total revenue?",
                                "divide(50, 200)",
                                {{"segment revenue", "50"}, {"total revenue", "200"}});
    auto eedp = eedp_with({"segment revenue: 50", "total revenue: 200"},
                          {step("Divide 50 by 200", "50 / 200", "0.25")});
    auto result = errors::tag(eedp, example);
    CHECK(result.tags.empty());
    CHECK(result.needs_review);
    REQUIRE(!result.diagnostics.empty());
    CHECK(result.diagnostics.back() == "needs review");
}

TEST_CASE("unmappable steps leave the program checks out, with diagnostics") {
    auto example = make_example("What is the ratio of segment revenue to total revenue?",
                                "divide(50, 200)",
                                {{"segment revenue", "50"}, {"total revenue", "200"}});
    auto eedp = eedp_with({"segment revenue: 50", "total revenue: 200"},
                          {step("Reticulate the splines", "", nullptr)});
    auto result = errors::tag(eedp, example);
    CHECK(result.tags.empty());
    CHECK(result.needs_review);
    bool noted = false;
    for (const auto& d : result.diagnostics) {
        if (d.find("not mappable") != std::string::npos) noted = true;
    }
    CHECK(noted);
}

TEST_CASE("tagging is deterministic") {
    auto example = make_example("What portion of total backlog was attributable to services?",
                                "divide(4884, 110000)",
                                {{"services backlog", "4,884"}, {"total backlog", "110,000"}});
    auto eedp = eedp_with({"services backlog: 68,280", "total backlog: 110,000"},
                          {step("Divide 68280 by 110000", "68280 / 110000", "0.6207")});
    auto first = errors::tag(eedp, example);
    auto second = errors::tag(eedp, example);
    CHECK(first.tags == second.tags);
    CHECK(first.diagnostics == second.diagnostics);
    CHECK(first.needs_review == second.needs_review);
}

// --- summaries ---

namespace {

std::vector<errors::TaggedError> planted_finqa_errors() {
    // 212 tag instances: 22 E1, 53 E2, 53 R1, 33 R2, 51 C (30 C1 + 21 C2).
    std::vector<errors::TaggedError> out;
    auto plant = [&](ErrorTag t, int n) {
        for (int i = 0; i < n; ++i) {
            errors::TaggedError e;
            e.example_id = std::string(errors::tag_name(t)) + "-" + std::to_string(i);
            e.dataset = core::Dataset::FinQA;
            e.tags = {t};
            out.push_back(std::move(e));
        }
    };
    plant(ErrorTag::E1_MissingEvidence, 22);
    plant(ErrorTag::E2_WrongEvidence, 53);
    plant(ErrorTag::R1_DomainKnowledgeDeficit, 53);
    plant(ErrorTag::R2_QuestionMisinterpretation, 33);
    plant(ErrorTag::C1_WrongInstantiation, 30);
    plant(ErrorTag::C2_PrecisionError, 21);
    return out;
}

}  // namespace

TEST_CASE("summary reproduces the planted FinQA distribution") {
    auto rows = errors::summarize(planted_finqa_errors());
    REQUIRE(rows.size() == 5);
    auto pct_of = [&](const std::string& label) {
        for (const auto& row : rows) {
            if (row.label == label) return row.pct;
        }
        FAIL("missing label ", label);
        return 0.0;
    };
    CHECK(pct_of("E1") == doctest::Approx(10.38));
    CHECK(pct_of("E2") == doctest::Approx(25.00));
    CHECK(pct_of("R1") == doctest::Approx(25.00));
    CHECK(pct_of("R2") == doctest::Approx(15.57));
    CHECK(pct_of("C") == doctest::Approx(24.06));

    double total = 0;
    for (const auto& row : rows) total += row.pct;
    CHECK(total == doctest::Approx(100.0).epsilon(0.001));

    auto csv = errors::summary_csv(rows);
    CHECK(csv.rfind("dataset,tag,count,pct\n", 0) == 0);
    CHECK(csv.find("FinQA,E1,22,10.38\n") != std::string::npos);
    CHECK(csv.find("FinQA,C,51,24.06\n") != std::string::npos);
}

TEST_CASE("summary edge shapes") {
    CHECK(errors::summarize({}).empty());

    errors::TaggedError single;
    single.example_id = "only";
    single.dataset = core::Dataset::TATQA;
    single.tags = {ErrorTag::R2_QuestionMisinterpretation};
    auto rows = errors::summarize({single});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].dataset == core::Dataset::TATQA);
    CHECK(rows[0].label == "R2");
    CHECK(rows[0].count == 1);
    CHECK(rows[0].pct == doctest::Approx(100.0));

    // An error with no tags contributes nothing.
    errors::TaggedError untagged;
    untagged.example_id = "untagged";
    untagged.dataset = core::Dataset::TATQA;
    rows = errors::summarize({single, untagged});
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].pct == doctest::Approx(100.0));
}

TEST_CASE("summary keeps datasets separate") {
    std::vector<errors::TaggedError> mixed;
    errors::TaggedError a;
    a.example_id = "a";
    a.dataset = core::Dataset::FinQA;
    a.tags = {ErrorTag::E1_MissingEvidence, ErrorTag::C2_PrecisionError};
    errors::TaggedError b;
    b.example_id = "b";
    b.dataset = core::Dataset::Multihiertt;
    b.tags = {ErrorTag::E2_WrongEvidence};
    mixed.push_back(a);
    mixed.push_back(b);

    auto rows = errors::summarize(mixed);
    REQUIRE(rows.size() == 3);  // FinQA E1 + C, Multihiertt E2
    CHECK(rows[0].dataset == core::Dataset::FinQA);
    CHECK(rows[0].label == "E1");
    CHECK(rows[0].pct == doctest::Approx(50.0));
    CHECK(rows[1].label == "C");
    CHECK(rows[2].dataset == core::Dataset::Multihiertt);
    CHECK(rows[2].pct == doctest::Approx(100.0));
}

// --- review worksheet ---

namespace {

std::vector<errors::ReviewRow> sample_review_rows(int n) {
    std::vector<errors::ReviewRow> rows;
    for (int i = 0; i < n; ++i) {
        errors::ReviewRow row;
        row.id = "ex-" + std::to_string(i);
        row.dataset = core::Dataset::FinQA;
        row.question = "What changed, by how much?";
        row.gold_program = "subtract(5735, 4884)";
        row.model_evidences = "2017 revenue: 5,735 | 2016 revenue: 4,884";
        row.model_steps = "subtract(5735, 4883)";
        row.auto_tags = {ErrorTag::E2_WrongEvidence, ErrorTag::C1_WrongInstantiation};
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

TEST_CASE("review worksheet round-trips through CSV") {
    auto rows = sample_review_rows(10);
    auto text = errors::review_csv(rows);
    CHECK(text.rfind("id,dataset,question,gold_program,model_evidences,model_steps,"
                     "auto_tags,human_tag\n",
                     0) == 0);
    std::size_t lines = std::count(text.begin(), text.end(), '\n');
    CHECK(lines == 11);

    auto imported = errors::import_review(text);
    CHECK(imported.errors.empty());
    REQUIRE(imported.rows.size() == 10);
    CHECK(imported.rows[0].id == "ex-0");
    CHECK(imported.rows[0].auto_tags ==
          std::vector<ErrorTag>{ErrorTag::E2_WrongEvidence, ErrorTag::C1_WrongInstantiation});
    CHECK_FALSE(imported.rows[0].human_tag.has_value());
}

TEST_CASE("re-imported human tags override auto tags") {
    auto rows = sample_review_rows(4);
    rows[2].human_tag = ErrorTag::R1_DomainKnowledgeDeficit;
    auto imported = errors::import_review(errors::review_csv(rows));
    REQUIRE(imported.errors.empty());

    std::vector<errors::TaggedError> errors_list;
    for (int i = 0; i < 4; ++i) {
        errors::TaggedError e;
        e.example_id = "ex-" + std::to_string(i);
        e.dataset = core::Dataset::FinQA;
        e.tags = {ErrorTag::E2_WrongEvidence};
        errors_list.push_back(std::move(e));
    }
    errors::apply_human_tags(errors_list, imported.rows);

    CHECK(errors_list[2].tags == std::vector<ErrorTag>{ErrorTag::R1_DomainKnowledgeDeficit});
    CHECK(errors_list[2].provenance == errors::Provenance::Human);
    CHECK(errors_list[0].tags == std::vector<ErrorTag>{ErrorTag::E2_WrongEvidence});
    CHECK(errors_list[0].provenance == errors::Provenance::Auto);
}

TEST_CASE("review import reports malformed rows with line numbers") {
    std::string text =
        "id,dataset,question,gold_program,model_evidences,model_steps,auto_tags,human_tag\n"
        "ex-0,FinQA,q,p,e,s,E1,\n"
        "ex-1,FinQA,q,p,e,s,E1,E9\n"
        "ex-2,Atlantis,q,p,e,s,,\n"
        "ex-3,FinQA,q,p,e,s\n"
        "ex-4,FinQA,q,p,e,s,,R1\n";
    auto imported = errors::import_review(text);
    REQUIRE(imported.rows.size() == 2);
    CHECK(imported.rows[0].id == "ex-0");
    CHECK(imported.rows[1].id == "ex-4");
    CHECK(imported.rows[1].human_tag == ErrorTag::R1_DomainKnowledgeDeficit);

    REQUIRE(imported.errors.size() == 3);
    CHECK(imported.errors[0].find("line 3") != std::string::npos);
    CHECK(imported.errors[0].find("E9") != std::string::npos);
    CHECK(imported.errors[1].find("line 4") != std::string::npos);
    CHECK(imported.errors[1].find("Atlantis") != std::string::npos);
    CHECK(imported.errors[2].find("line 5") != std::string::npos);
    CHECK(imported.errors[2].find("columns") != std::string::npos);
}
