#include "tabeval/metadata.hpp"

#include <doctest.h>

using namespace tabeval;
using namespace tabeval::metadata;

namespace {

core::Table make_table(const std::vector<std::vector<std::string>>& raw,
                       std::size_t n_header_rows = 1, std::vector<int> indents = {}) {
    core::Table t;
    t.id = "t0";
    for (std::size_t r = 0; r < raw.size(); ++r) {
        std::vector<core::Cell> row;
        for (std::size_t c = 0; c < raw[r].size(); ++c)
            row.push_back(core::make_cell(r, c, raw[r][c]));
        t.grid.push_back(row);
    }
    t.n_header_rows = n_header_rows;
    t.row_indent_levels = indents.empty() ? std::vector<int>(raw.size(), 0) : std::move(indents);
    return t;
}

core::HybridExample make_example(std::string question,
                                 std::optional<std::string> program = std::nullopt) {
    core::HybridExample e;
    e.id = "ex";
    e.tables.push_back(make_table({{"", "2009"}, {"revenue", "100"}, {"expenses", "40"}}));
    e.question.id = "ex";
    e.question.text = std::move(question);
    e.gold.program_text = std::move(program);
    e.gold.answer = core::NumberValue{Decimal(1), core::Scale::Unit, false, {}};
    return e;
}

}  // namespace

TEST_CASE("category names round-trip, with label spellings tolerated") {
    for (Category c : {Category::Sum, Category::Difference, Category::Product,
                       Category::Division, Category::Ratio, Category::ChangeRatio,
                       Category::Range, Category::Compare, Category::Average,
                       Category::InDomainInfo, Category::Time, Category::Counting,
                       Category::Other})
        CHECK(category_from_name(category_name(c)) == c);
    CHECK(category_from_name("Change Ratio") == Category::ChangeRatio);
    CHECK(category_from_name("change-ratio") == Category::ChangeRatio);
    CHECK(category_from_name("In-Domain-Info") == Category::InDomainInfo);
    CHECK(category_from_name("NEED-IN-DOMAIN-INFO") == Category::InDomainInfo);
    CHECK_FALSE(category_from_name("nonsense"));
}

TEST_CASE("classify_question recognizes the concept categories") {
    auto cat = [](const std::string& q, std::optional<std::string> program = std::nullopt) {
        return classify_question(make_example(q, std::move(program))).category;
    };
    CHECK(cat("What is the sum of CET1 capital, Tier 1 capital, and Total capital in 2017?",
              "add(100, 40), add(#0, 40)") == Category::Sum);
    CHECK(cat("What was the 2019 percentage change in pre-tax losses?",
              "subtract(100, 40), divide(#0, 40)") == Category::ChangeRatio);
    CHECK(cat("What is the annualized return for s&p 500 from 2012 to 2017?") ==
          Category::InDomainInfo);
    CHECK(cat("What portion of total revenue came from services?") == Category::Ratio);
    CHECK(cat("What was the average revenue between 2008 and 2009?") == Category::Average);
    CHECK(cat("What was the range of quarterly share prices?") == Category::Range);
    CHECK(cat("Was revenue in 2009 greater than in 2008?") == Category::Compare);
    CHECK(cat("How many segments reported a loss?") == Category::Counting);
    CHECK(cat("What was revenue per share?") == Category::Division);
    CHECK(cat("What is the product of units sold and price?") == Category::Product);
    CHECK(cat("What was the difference in revenue between 2008 and 2009?") ==
          Category::Difference);
    CHECK(cat("How long did the lease run?") == Category::Time);
    CHECK(cat("What was revenue in 2009?") == Category::Other);
}

TEST_CASE("word boundaries keep cues from leaking") {
    auto cat = [](const std::string& q) { return classify_question(make_example(q)).category; };
    // "exchange" must not cue change, "assuming" must not cue sum.
    CHECK(cat("What was the foreign exchange impact as reported?") == Category::Other);
    CHECK(cat("What were liabilities assuming full conversion?") == Category::Other);
    // "corporate" must not cue rate.
    CHECK(cat("What was the decline in corporate expenses?") == Category::Difference);
    CHECK(cat("What was the growth rate of deposits?") == Category::ChangeRatio);
}

TEST_CASE("program operators back up the keyword decision") {
    // Keyword and program agree -> confident.
    auto r = classify_question(make_example("What is the total of both segments?",
                                            "add(100, 40)"));
    CHECK(r.category == Category::Sum);
    CHECK(r.confident);
    // A divide program is the mechanical form of a Ratio question.
    r = classify_question(make_example("What share of revenue came from services?",
                                       "divide(100, 40)"));
    CHECK(r.category == Category::Ratio);
    CHECK(r.confident);
    // pure program fallback when no keyword matches
    r = classify_question(make_example("What about 2009 versus 2008?",
                                       "subtract(100, 40), divide(#0, 40)"));
    CHECK(r.category == Category::ChangeRatio);
    CHECK(r.confident);
    // disagreement flips the flag
    r = classify_question(make_example("What was the combined backlog?", "divide(100, 40)"));
    CHECK(r.category == Category::Sum);
    CHECK_FALSE(r.confident);
}

TEST_CASE("human category labels win") {
    auto e = make_example("What was the difference in revenue?", "subtract(100, 40)");
    e.human_labels = core::HumanLabels{};
    e.human_labels->category = "Ratio";
    CHECK(classify_question(e).category == Category::Ratio);
    // Unparseable label strings fall back to the computed value.
    e.human_labels->category = "mystery";
    CHECK(classify_question(e).category == Category::Difference);
}

TEST_CASE("reasoning steps come from the program or derivation") {
    CHECK(reasoning_steps(make_example("q", "add(1, 2)")) == 1);
    CHECK(reasoning_steps(make_example("q", "add(1, 2), divide(#0, 2)")) == 2);
    CHECK(reasoning_steps(make_example("q", "564,589 - 500,000")) == 1);
    CHECK(reasoning_steps(make_example("q", "(100 - 50) / 50")) == 2);
    CHECK(reasoning_steps(make_example("q", "1200")) == 1);
    CHECK(reasoning_steps(make_example("q", "-5 + 3")) == 1);
    CHECK(reasoning_steps(make_example("q", "5 * -3")) == 1);
    CHECK(reasoning_steps(make_example("q", "10.5% - 9.8%")) == 1);
    CHECK_FALSE(reasoning_steps(make_example("q")));
}

TEST_CASE("hierarchy depth is 1 + header levels + indent levels, maxed") {
    core::HybridExample e;
    e.id = "h";
    e.question.id = "h";
    e.question.text = "q";
    e.gold.answer = core::NumberValue{Decimal(1), core::Scale::Unit, false, {}};
    e.tables.push_back(make_table(
        {
            {"", "2012", "2011"},
            {"", "(in millions)", "(in millions)"},
            {"total expenses", "1912", "1733"},
            {"  distribution fees", "1000", "900"},
        },
        2, {0, 0, 0, 1}));

    // Flat data cell under two header rows -> 1 + 2 + 0 = 3.
    e.gold.evidences = {core::TableCellRef{"t0", 2, 1}};
    CHECK(hierarchy_depth(e) == 3);
    // Indented row adds its grouping level -> 1 + 2 + 1 = 4.
    e.gold.evidences = {core::TableCellRef{"t0", 3, 1}};
    CHECK(hierarchy_depth(e) == 4);
    // Max over evidence cells of depth {3, 4} -> 4.
    e.gold.evidences = {core::TableCellRef{"t0", 2, 1}, core::TableCellRef{"t0", 3, 2}};
    CHECK(hierarchy_depth(e) == 4);
    // Text evidence alone gives nothing to measure.
    e.gold.evidences = {core::TextSpanRef{core::TextSource::Pre, 0, 0}};
    CHECK_FALSE(hierarchy_depth(e));

    // A data cell in a one-header flat table sits at depth 2.
    core::HybridExample flat = make_example("q");
    flat.gold.evidences = {core::TableCellRef{"t0", 1, 1}};
    CHECK(hierarchy_depth(flat) == 2);
}

TEST_CASE("empty cell fraction over the primary table") {
    core::HybridExample e = make_example("q");
    e.tables.clear();
    e.tables.push_back(make_table({{"a", "1"}, {"b", "-"}}));
    CHECK(empty_cell_pct(e) == 0.25);

    e.tables.clear();
    e.tables.push_back(make_table({{"a", "1"}, {"b", "2"}}));
    CHECK(empty_cell_pct(e) == 0.0);

    // Appending an all-empty row strictly increases the fraction.
    double before = empty_cell_pct(e);
    auto& t = e.tables[0];
    t.grid.push_back({core::make_cell(2, 0, ""), core::make_cell(2, 1, "—")});
    t.row_indent_levels.push_back(0);
    CHECK(empty_cell_pct(e) > before);
    CHECK(empty_cell_pct(e) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("table_length uses the primary (longest) table") {
    core::HybridExample e = make_example("q");
    e.tables.clear();
    auto grid_of = [](std::size_t rows) {
        std::vector<std::vector<std::string>> g;
        for (std::size_t r = 0; r < rows; ++r) g.push_back({"r" + std::to_string(r), "1"});
        return g;
    };
    e.tables.push_back(make_table(grid_of(5)));
    e.tables.push_back(make_table(grid_of(12)));
    e.tables.push_back(make_table(grid_of(9)));
    e.tables[0].id = "t0";
    e.tables[1].id = "t1";
    e.tables[2].id = "t2";
    CHECK(table_rows(e) == 12);
}

TEST_CASE("split filters") {
    auto grid_of = [](std::size_t rows) {
        std::vector<std::vector<std::string>> g;
        for (std::size_t r = 0; r < rows; ++r) g.push_back({"r" + std::to_string(r), "1"});
        return g;
    };
    std::vector<core::HybridExample> mh;
    for (std::size_t rows : {41, 40, 12}) {
        core::HybridExample e = make_example("q", "add(1, 2)");
        e.id = "mh" + std::to_string(rows);
        e.tables.clear();
        e.tables.push_back(make_table(grid_of(rows)));
        mh.push_back(e);
    }
    auto kept = apply_split_filters(mh, core::Dataset::Multihiertt);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].id == "mh40");  // boundary: "exceeds" is strict
    CHECK(kept[1].id == "mh12");
    // Other datasets pass through.
    CHECK(apply_split_filters(mh, core::Dataset::FinQA).size() == 3);

    std::vector<core::HybridExample> tat;
    tat.push_back(make_example("span question"));
    tat.push_back(make_example("arithmetic question", "100 - 40"));
    kept = apply_split_filters(tat, core::Dataset::TATQA);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].question.text == "arithmetic question");
}

TEST_CASE("annotate merges human labels and marks the source") {
    auto e = make_example("What was the difference in revenue?", "subtract(100, 40)");
    auto r = annotate(e);
    CHECK(r.category.category == Category::Difference);
    CHECK(r.n_steps == 1);
    CHECK(r.table_length == 3);
    CHECK_FALSE(r.depth);
    CHECK(r.empty_pct == doctest::Approx(1.0 / 6.0));  // one empty header cell
    CHECK(r.source == Source::Computed);

    e.human_labels = core::HumanLabels{};
    e.human_labels->n_steps = 4;
    e.human_labels->hierarchy_depth = 3;
    r = annotate(e);
    CHECK(r.n_steps == 4);
    CHECK(r.depth == 3);
    CHECK(r.source == Source::HumanLabel);
}

TEST_CASE("metadata CSV round-trips") {
    auto e1 = make_example("What was the sum of segments?", "add(100, 40)");
    e1.id = "a";
    auto e2 = make_example("What was revenue in 2009?");
    e2.id = "b";
    auto records = annotate_all({e1, e2});
    std::string text = metadata_csv(records);
    auto parsed = parse_metadata_csv(text);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].example_id == "a");
    CHECK(parsed[0].category.category == Category::Sum);
    CHECK(parsed[0].n_steps == 1);
    CHECK(parsed[0].table_length == 3);
    CHECK_FALSE(parsed[0].depth);
    CHECK(parsed[0].empty_pct == doctest::Approx(records[0].empty_pct).epsilon(1e-3));
    CHECK(parsed[1].category.category == Category::Other);
    CHECK_FALSE(parsed[1].n_steps);
}

TEST_CASE("buckets") {
    CHECK(step_bucket(std::nullopt) == "unknown");
    CHECK(step_bucket(1) == "1");
    CHECK(step_bucket(2) == "2");
    CHECK(step_bucket(3) == "3");
    CHECK(step_bucket(4) == "4+");
    CHECK(step_bucket(9) == "4+");
    CHECK(depth_bucket(std::nullopt) == "unknown");
    CHECK(depth_bucket(2) == "1-2");
    CHECK(depth_bucket(3) == "3");
    CHECK(depth_bucket(4) == "4");
    CHECK(depth_bucket(7) == "5+");
    CHECK(empty_pct_bucket(0.0) == "0%");
    CHECK(empty_pct_bucket(0.05) == "0-10%");
    CHECK(empty_pct_bucket(0.25) == "10-30%");
    CHECK(empty_pct_bucket(0.62) == ">30%");
    CHECK(row_bucket(4) == "<=5");
    CHECK(row_bucket(10) == "6-10");
    CHECK(row_bucket(17) == "11-20");
    CHECK(row_bucket(41) == ">20");
}

TEST_CASE("label agreement counts mismatches") {
    auto e1 = make_example("What was the difference in revenue?", "subtract(100, 40)");
    e1.human_labels = core::HumanLabels{"Difference", 1, std::nullopt, std::nullopt};
    auto e2 = make_example("What was the difference in revenue?", "subtract(100, 40)");
    e2.human_labels = core::HumanLabels{"Ratio", 3, std::nullopt, 1.0 / 6.0};
    auto agg = label_agreement({e1, e2});
    CHECK(agg.n_category == 2);
    CHECK(agg.category_mismatch == 1);
    CHECK(agg.n_steps == 2);
    CHECK(agg.steps_mismatch == 1);
    CHECK(agg.n_depth == 0);
    CHECK(agg.n_empty == 1);
    CHECK(agg.empty_mismatch == 0);
}
