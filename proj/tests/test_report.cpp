#include "tabeval/report.hpp"

#include <doctest.h>

#include <json.hpp>

#include <map>

using namespace tabeval;
using prompting::Strategy;
using report::Dimension;

namespace {

Decimal dec(const char* s) { return *parse_decimal(s); }

runner::EvalRecord rec(core::Dataset ds, const std::string& model, Strategy s, int correct,
                       std::optional<int> steps = 1,
                       metadata::Category cat = metadata::Category::Other,
                       std::size_t rows = 5, std::optional<int> depth = 2,
                       double empty = 0.0) {
    static int n = 0;
    runner::EvalRecord r;
    r.example_id = "r" + std::to_string(++n);
    r.dataset = ds;
    r.model = model;
    r.strategy = s;
    r.prompt_hash = r.example_id;
    if (correct >= 0) {
        grading::GradeResult g;
        g.correct = correct > 0;
        r.grade = g;
    }
    r.metadata.example_id = r.example_id;
    r.metadata.n_steps = steps;
    r.metadata.category.category = cat;
    r.metadata.table_length = rows;
    r.metadata.depth = depth;
    r.metadata.empty_pct = empty;
    return r;
}

core::HybridExample program_example(const std::string& id, const char* program) {
    core::HybridExample e;
    e.id = id;
    core::Table t;
    t.id = "t0";
    t.grid.push_back({core::make_cell(0, 0, "item"), core::make_cell(0, 1, "value")});
    t.grid.push_back({core::make_cell(1, 0, "a"), core::make_cell(1, 1, "1")});
    t.n_header_rows = 1;
    t.row_indent_levels = {0, 0};
    e.tables.push_back(std::move(t));
    e.question.id = id;
    e.question.text = "q";
    if (program) e.gold.program_text = program;
    core::NumberValue nv;
    nv.value = dec("1");
    e.gold.answer = nv;
    return e;
}

const report::StratumRow& row_at(const report::StratifiedReport& rep, Strategy s,
                                 const std::string& model, const std::string& bucket) {
    for (const auto& row : rep.rows)
        if (row.strategy == s && row.model == model && row.bucket == bucket) return row;
    REQUIRE(false);
    return rep.rows.front();
}

}  // namespace

TEST_CASE("accuracy table keeps the fixed dataset order and 2-decimal percents") {
    std::vector<runner::EvalRecord> records;
    // FinQA appears first in the records but TATQA must lead the table
    for (int i = 0; i < 4; ++i)
        records.push_back(rec(core::Dataset::FinQA, "gpt4", Strategy::Direct, i < 3));
    records.push_back(rec(core::Dataset::TATQA, "gpt4", Strategy::Direct, 1));
    records.push_back(rec(core::Dataset::TATQA, "gpt4", Strategy::Direct, 0));
    records.push_back(rec(core::Dataset::FinQA, "gpt4", Strategy::EEDP, 1));
    records.push_back(rec(core::Dataset::FinQA, "gpt4", Strategy::EEDP, 1));
    records.push_back(rec(core::Dataset::FinQA, "mini", Strategy::Direct, 0));
    // ungraded records never count
    records.push_back(rec(core::Dataset::FinQA, "gpt4", Strategy::Direct, -1));

    CHECK(report::accuracy_table_csv(records) ==
          "dataset,model,direct,cot,pot,eedp,decomposers\n"
          "TATQA,gpt4,50.00,,,,\n"
          "FinQA,gpt4,75.00,,,100.00,\n"
          "FinQA,mini,0.00,,,,\n");
}

TEST_CASE("an empty record set yields just the header") {
    CHECK(report::accuracy_table_csv({}) ==
          "dataset,model,direct,cot,pot,eedp,decomposers\n");
}

TEST_CASE("step strata cover the full bucket domain, empty buckets included") {
    std::vector<runner::EvalRecord> records = {
        rec(core::Dataset::FinQA, "gpt4", Strategy::Direct, 1, 1),
        rec(core::Dataset::FinQA, "gpt4", Strategy::Direct, 0, 1),
        rec(core::Dataset::FinQA, "gpt4", Strategy::Direct, 1, 2),
        rec(core::Dataset::FinQA, "gpt4", Strategy::Direct, 1, 5),
        rec(core::Dataset::FinQA, "gpt4", Strategy::Direct, 1, std::nullopt),
    };
    auto rep = report::stratify(records, Dimension::Steps);
    CHECK(rep.buckets == std::vector<std::string>{"1", "2", "3", ">=4", "unknown"});
    CHECK(rep.header_note == "dimension=steps buckets=1|2|3|>=4|unknown");
    REQUIRE(rep.rows.size() == 5);  // one (strategy, model) pair x 5 buckets

    CHECK(row_at(rep, Strategy::Direct, "gpt4", "1").n == 2);
    CHECK(row_at(rep, Strategy::Direct, "gpt4", "1").accuracy_pct == doctest::Approx(50.0));
    CHECK(row_at(rep, Strategy::Direct, "gpt4", "2").n == 1);
    CHECK(row_at(rep, Strategy::Direct, "gpt4", "3").n == 0);
    CHECK_FALSE(row_at(rep, Strategy::Direct, "gpt4", "3").accuracy_pct.has_value());
    CHECK(row_at(rep, Strategy::Direct, "gpt4", ">=4").n == 1);
    CHECK(row_at(rep, Strategy::Direct, "gpt4", "unknown").n == 1);

    std::size_t total = 0;
    for (const auto& row : rep.rows) total += row.n;
    CHECK(total == records.size());

    CHECK(report::stratified_csv(rep) ==
          "# dimension=steps buckets=1|2|3|>=4|unknown\n"
          "strategy,model,bucket,n,accuracy\n"
          "direct,gpt4,1,2,50.00\n"
          "direct,gpt4,2,1,100.00\n"
          "direct,gpt4,3,0,\n"
          "direct,gpt4,>=4,1,100.00\n"
          "direct,gpt4,unknown,1,100.00\n");
}

TEST_CASE("single-step records land in one bucket holding the whole count") {
    std::vector<runner::EvalRecord> records;
    for (int i = 0; i < 7; ++i)
        records.push_back(rec(core::Dataset::FinQA, "m", Strategy::CoT, 1, 1));
    auto rep = report::stratify(records, Dimension::Steps);
    CHECK(row_at(rep, Strategy::CoT, "m", "1").n == 7);
    for (const auto& b : {"2", "3", ">=4", "unknown"})
        CHECK(row_at(rep, Strategy::CoT, "m", b).n == 0);
}

TEST_CASE("table length buckets use the configured row cuts") {
    std::vector<runner::EvalRecord> records = {
        rec(core::Dataset::FinQA, "m", Strategy::PoT, 1, 1, metadata::Category::Other, 5),
        rec(core::Dataset::FinQA, "m", Strategy::PoT, 1, 1, metadata::Category::Other, 10),
        rec(core::Dataset::FinQA, "m", Strategy::PoT, 0, 1, metadata::Category::Other, 11),
        rec(core::Dataset::FinQA, "m", Strategy::PoT, 1, 1, metadata::Category::Other, 30),
        rec(core::Dataset::FinQA, "m", Strategy::PoT, 1, 1, metadata::Category::Other, 40),
        rec(core::Dataset::FinQA, "m", Strategy::PoT, 1, 1, metadata::Category::Other, 55),
    };
    auto rep = report::stratify(records, Dimension::TableLength);
    CHECK(rep.buckets ==
          std::vector<std::string>{"<=10", "11-20", "21-30", "31-40", ">=41"});
    CHECK(row_at(rep, Strategy::PoT, "m", "<=10").n == 2);
    CHECK(row_at(rep, Strategy::PoT, "m", "11-20").n == 1);
    CHECK(row_at(rep, Strategy::PoT, "m", "21-30").n == 1);
    CHECK(row_at(rep, Strategy::PoT, "m", "31-40").n == 1);
    CHECK(row_at(rep, Strategy::PoT, "m", ">=41").n == 1);
}

TEST_CASE("empty-cell strata are deciles of the percentage") {
    std::vector<runner::EvalRecord> records = {
        rec(core::Dataset::FinQA, "m", Strategy::Direct, 1, 1, metadata::Category::Other, 5, 2,
            0.0),
        rec(core::Dataset::FinQA, "m", Strategy::Direct, 1, 1, metadata::Category::Other, 5, 2,
            0.05),
        rec(core::Dataset::FinQA, "m", Strategy::Direct, 1, 1, metadata::Category::Other, 5, 2,
            0.15),
        rec(core::Dataset::FinQA, "m", Strategy::Direct, 1, 1, metadata::Category::Other, 5, 2,
            0.95),
        rec(core::Dataset::FinQA, "m", Strategy::Direct, 1, 1, metadata::Category::Other, 5, 2,
            1.0),
    };
    auto rep = report::stratify(records, Dimension::EmptyPct);
    REQUIRE(rep.buckets.size() == 10);
    CHECK(rep.buckets.front() == "0-10%");
    CHECK(rep.buckets.back() == "90-100%");
    CHECK(row_at(rep, Strategy::Direct, "m", "0-10%").n == 2);
    CHECK(row_at(rep, Strategy::Direct, "m", "10-20%").n == 1);
    CHECK(row_at(rep, Strategy::Direct, "m", "90-100%").n == 2);  // 1.0 clamps in
}

TEST_CASE("depth strata extend past the default levels when observed") {
    std::vector<runner::EvalRecord> records = {
        rec(core::Dataset::Multihiertt, "m", Strategy::EEDP, 1, 1, metadata::Category::Other, 5,
            2),
        rec(core::Dataset::Multihiertt, "m", Strategy::EEDP, 0, 1, metadata::Category::Other, 5,
            4),
        rec(core::Dataset::Multihiertt, "m", Strategy::EEDP, 1, 1, metadata::Category::Other, 5,
            std::nullopt),
    };
    auto rep = report::stratify(records, Dimension::Depth);
    CHECK(rep.buckets == std::vector<std::string>{"1", "2", "3", "4", "5", "unknown"});
    CHECK(row_at(rep, Strategy::EEDP, "m", "2").n == 1);
    CHECK(row_at(rep, Strategy::EEDP, "m", "unknown").n == 1);

    records.push_back(rec(core::Dataset::Multihiertt, "m", Strategy::EEDP, 1, 1,
                          metadata::Category::Other, 5, 7));
    rep = report::stratify(records, Dimension::Depth);
    CHECK(rep.buckets ==
          std::vector<std::string>{"1", "2", "3", "4", "5", "6", "7", "unknown"});
    CHECK(row_at(rep, Strategy::EEDP, "m", "7").n == 1);
}

TEST_CASE("category strata span the taxonomy and honor the omit filter") {
    std::vector<runner::EvalRecord> records = {
        rec(core::Dataset::FinQA, "m", Strategy::Direct, 1, 1, metadata::Category::Ratio),
        rec(core::Dataset::FinQA, "m", Strategy::Direct, 0, 1, metadata::Category::Ratio),
        rec(core::Dataset::FinQA, "m", Strategy::Direct, 1, 1, metadata::Category::Time),
        rec(core::Dataset::FinQA, "m", Strategy::Direct, 1, 1,
            metadata::Category::InDomainInfo),
        rec(core::Dataset::FinQA, "m", Strategy::Direct, 1, 1, metadata::Category::Sum),
    };
    auto rep = report::stratify(records, Dimension::Category);
    CHECK(rep.buckets.size() == 13);
    CHECK(rep.buckets.front() == "InDomainInfo");
    CHECK(rep.buckets.back() == "Other");
    CHECK(row_at(rep, Strategy::Direct, "m", "Ratio").n == 2);
    CHECK(row_at(rep, Strategy::Direct, "m", "Time").n == 1);

    report::StratifyOptions omit;
    omit.omit_filtered_categories = true;
    auto filtered = report::stratify(records, Dimension::Category, omit);
    CHECK(filtered.buckets.size() == 11);
    for (const auto& b : filtered.buckets) {
        CHECK(b != "Time");
        CHECK(b != "InDomainInfo");
    }
    std::size_t total = 0;
    for (const auto& row : filtered.rows) total += row.n;
    CHECK(total == 3);  // the Time and InDomainInfo records are set aside
}

TEST_CASE("tau of a gold program resolves final-step operands") {
    CHECK(report::gold_final_tau(program_example("a", "divide(100, 0.01)")) == 2);
    CHECK(report::gold_final_tau(program_example("b", "subtract(5000, 200), divide(#0, 200)")) ==
          3);
    CHECK_FALSE(report::gold_final_tau(program_example("c", nullptr)).has_value());
    CHECK_FALSE(report::gold_final_tau(program_example("d", "multiply(0, 5)")).has_value());
    CHECK_FALSE(report::gold_final_tau(program_example("e", "not a program")).has_value());
}

TEST_CASE("tau strata need the examples and park the rest under n/a") {
    std::vector<core::HybridExample> examples = {
        program_example("t1", "divide(100, 0.01)"),          // tau 2
        program_example("t2", "subtract(5000, 200), divide(#0, 200)"),  // tau 3
        program_example("t3", nullptr),                       // no program
    };
    std::vector<runner::EvalRecord> records;
    for (const auto& ex : examples) {
        auto r = rec(core::Dataset::FinQA, "m", Strategy::Direct, 1);
        r.example_id = ex.id;
        records.push_back(std::move(r));
    }
    auto orphan = rec(core::Dataset::FinQA, "m", Strategy::Direct, 0);
    orphan.example_id = "unmatched";
    records.push_back(std::move(orphan));

    auto rep = report::stratify(records, Dimension::Tau, {}, examples);
    // default probe range plus the n/a bucket
    REQUIRE(rep.buckets.size() == 14);
    CHECK(rep.buckets.front() == "-6");
    CHECK(rep.buckets[12] == "6");
    CHECK(rep.buckets.back() == "n/a");
    CHECK(row_at(rep, Strategy::Direct, "m", "2").n == 1);
    CHECK(row_at(rep, Strategy::Direct, "m", "3").n == 1);
    CHECK(row_at(rep, Strategy::Direct, "m", "n/a").n == 2);

    // an observed tau outside the probe range stretches the domain
    examples.push_back(program_example("t4", "multiply(1000000000, 2)"));
    auto big = rec(core::Dataset::FinQA, "m", Strategy::Direct, 1);
    big.example_id = "t4";
    records.push_back(std::move(big));
    rep = report::stratify(records, Dimension::Tau, {}, examples);
    CHECK(rep.buckets[rep.buckets.size() - 2] == "9");
    CHECK(row_at(rep, Strategy::Direct, "m", "9").n == 1);
}

TEST_CASE("plot data mirrors the strata as one series per strategy and model") {
    std::vector<runner::EvalRecord> records = {
        rec(core::Dataset::FinQA, "gpt4", Strategy::PoT, 1, 1),
        rec(core::Dataset::FinQA, "gpt4", Strategy::PoT, 0, 2),
        rec(core::Dataset::FinQA, "gpt4", Strategy::EEDP, 1, 1),
    };
    auto rep = report::stratify(records, Dimension::Steps);
    auto j = nlohmann::json::parse(report::plot_data_json(rep));
    CHECK(j["dimension"] == "steps");
    CHECK(j["buckets"].size() == 5);
    REQUIRE(j["series"].size() == 2);
    // kStrategyOrder puts PoT before EEDP
    CHECK(j["series"][0]["strategy"] == "pot");
    CHECK(j["series"][0]["model"] == "gpt4");
    CHECK(j["series"][0]["n"][0] == 1);
    CHECK(j["series"][0]["n"][1] == 1);
    CHECK(j["series"][0]["accuracy"][0] == doctest::Approx(100.0));
    CHECK(j["series"][0]["accuracy"][1] == doctest::Approx(0.0));
    CHECK(j["series"][0]["accuracy"][2].is_null());
    CHECK(j["series"][1]["strategy"] == "eedp");
}

TEST_CASE("a planted per-category advantage survives the report") {
    std::vector<runner::EvalRecord> records;
    const std::vector<metadata::Category> cats = {
        metadata::Category::Ratio, metadata::Category::Average, metadata::Category::Sum};
    for (auto c : cats) {
        records.push_back(rec(core::Dataset::FinQA, "m", Strategy::PoT, 1, 1, c));
        records.push_back(rec(core::Dataset::FinQA, "m", Strategy::PoT, 0, 1, c));
        records.push_back(rec(core::Dataset::FinQA, "m", Strategy::EEDP, 1, 1, c));
        records.push_back(rec(core::Dataset::FinQA, "m", Strategy::EEDP, 1, 1, c));
    }
    auto rep = report::stratify(records, Dimension::Category);
    for (auto c : cats) {
        const std::string bucket(metadata::category_name(c));
        const auto& pot = row_at(rep, Strategy::PoT, "m", bucket);
        const auto& eedp = row_at(rep, Strategy::EEDP, "m", bucket);
        REQUIRE(pot.accuracy_pct.has_value());
        REQUIRE(eedp.accuracy_pct.has_value());
        CHECK(*eedp.accuracy_pct >= *pot.accuracy_pct);
    }
}

TEST_CASE("bucket counts sum to the graded total on every dimension") {
    std::vector<runner::EvalRecord> records;
    for (int i = 0; i < 12; ++i) {
        auto c = static_cast<metadata::Category>(i % 13);
        records.push_back(rec(core::Dataset::FinQA, i % 2 ? "a" : "b",
                              i % 3 ? Strategy::Direct : Strategy::EEDP, i % 2, 1 + i % 5, c,
                              3 + 4 * static_cast<std::size_t>(i),
                              i % 4 == 0 ? std::optional<int>() : std::optional<int>(1 + i % 6),
                              (i % 10) / 10.0));
    }
    records.push_back(rec(core::Dataset::FinQA, "a", Strategy::Direct, -1));  // ungraded
    for (auto dim : {Dimension::Steps, Dimension::Category, Dimension::TableLength,
                     Dimension::Depth, Dimension::EmptyPct, Dimension::Tau}) {
        auto rep = report::stratify(records, dim);
        std::map<std::pair<Strategy, std::string>, std::size_t> per_pair;
        for (const auto& row : rep.rows) per_pair[{row.strategy, row.model}] += row.n;
        std::map<std::pair<Strategy, std::string>, std::size_t> expected;
        for (const auto& r : records)
            if (r.grade) ++expected[{r.strategy, r.model}];
        CHECK(per_pair == expected);
    }
}

TEST_CASE("dimension names round-trip") {
    for (auto d : {Dimension::Steps, Dimension::Category, Dimension::TableLength,
                   Dimension::Depth, Dimension::EmptyPct, Dimension::Tau})
        CHECK(report::dimension_from_name(report::dimension_name(d)) == d);
    CHECK_FALSE(report::dimension_from_name("sideways").has_value());
}
