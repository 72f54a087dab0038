#include "tabeval/runner.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "tabeval/csv.hpp"
#include "tabeval/program_dsl.hpp"

namespace fs = std::filesystem;
using namespace tabeval;
using prompting::Strategy;

namespace {

Decimal dec(const char* s) { return *parse_decimal(s); }

fs::path fresh_dir(const std::string& leaf) {
    fs::path p = fs::path("build") / "runner_tests" / leaf;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

core::HybridExample make_example(const std::string& id, const std::string& question,
                                 const std::optional<std::string>& program,
                                 const std::vector<std::pair<std::string, std::string>>& rows) {
    core::HybridExample e;
    e.id = id;
    core::Table t;
    t.id = "t0";
    t.grid.push_back({core::make_cell(0, 0, "item"), core::make_cell(0, 1, "value")});
    for (std::size_t r = 0; r < rows.size(); ++r)
        t.grid.push_back({core::make_cell(r + 1, 0, rows[r].first),
                          core::make_cell(r + 1, 1, rows[r].second)});
    t.n_header_rows = 1;
    t.row_indent_levels.assign(t.grid.size(), 0);
    e.tables.push_back(std::move(t));
    e.question.id = id;
    e.question.text = question;
    e.question.dataset = core::Dataset::FinQA;
    e.gold.program_text = program;
    if (program)
        for (std::size_t r = 0; r < rows.size(); ++r)
            e.gold.evidences.push_back(core::TableCellRef{"t0", r + 1, 1});
    return e;
}

std::vector<core::HybridExample> fixture_examples() {
    return {
        make_example("e1", "What is the sum of a and b?", "add(2, 3)",
                     {{"a", "2"}, {"b", "3"}}),
        make_example("e2", "What is the difference between a and b?", "subtract(10, 4)",
                     {{"a", "10"}, {"b", "4"}}),
        make_example("e3", "What is the ratio of a to b?", "divide(8, 2)",
                     {{"a", "8"}, {"b", "2"}}),
        make_example("e4", "What is the product of a and b?", "multiply(3, 7)",
                     {{"a", "3"}, {"b", "7"}}),
        // parses but cannot evaluate, so the record stays ungraded
        make_example("e5", "What is a?", "divide(1, 0)", {{"a", "1"}, {"b", "1"}}),
    };
}

const char* direct_response(const std::string& id) {
    if (id == "e1") return "5";
    if (id == "e2") return "999";  // wrong
    if (id == "e3") return "4";
    if (id == "e4") return "21";
    return "7";
}

std::string eedp_response(const std::string& id) {
    if (id == "e1")
        return "Domain Knowledge: A sum adds the two quantities.\n"
               "Gold Evidences:\n- a is 2.\n- b is 3.\n"
               "Steps:\n1. Add 2 to 3.\n   - Response 1: 2 + 3 = 5\n"
               "The final answer is 5.\n";
    if (id == "e2")  // inverted subtraction: wrong answer, R2 shape
        return "Domain Knowledge: A difference subtracts one quantity from the other.\n"
               "Gold Evidences:\n- a is 10.\n- b is 4.\n"
               "Steps:\n1. Subtract 10 from 4.\n   - Response 1: 4 - 10 = -6\n"
               "The final answer is -6.\n";
    if (id == "e3")
        return "Domain Knowledge: A ratio divides one quantity by the other.\n"
               "Gold Evidences:\n- a is 8.\n- b is 2.\n"
               "Steps:\n1. Divide 8 by 2.\n   - Response 1: 8 / 2 = 4\n"
               "The final answer is 4.\n";
    if (id == "e4")
        return "Domain Knowledge: A product multiplies the two quantities.\n"
               "Gold Evidences:\n- a is 3.\n- b is 7.\n"
               "Steps:\n1. Multiply 3 by 7.\n   - Response 1: 3 * 7 = 21\n"
               "The final answer is 21.\n";
    return "Domain Knowledge: Plain lookup.\n"
           "Gold Evidences:\n- a is 1.\n"
           "Steps:\n1. Add 1 to 0.\n   - Response 1: 1 + 0 = 1\n"
           "The final answer is 1.\n";
}

const char* decomposer_final(const std::string& id) {
    if (id == "e1") return "The final answer is 5.";
    if (id == "e2") return "The final answer is 6.";
    if (id == "e3") return "The final answer is 17.";  // wrong
    if (id == "e4") return "The final answer is 21.";
    return "The final answer is 7.";
}

constexpr const char* kStage1Response = "Rows: 1, 2";
constexpr const char* kStage2Response =
    "1. What is the first quantity?\n2. What is the second quantity?";

struct Env {
    fs::path root;
    runner::RunConfig cfg;
    std::vector<core::HybridExample> examples;
    std::map<Strategy, std::vector<prompting::Demonstration>> shots;
};

// Builds dataset, shot banks and the replay fixture under a fresh root.
// skip lists (example id, strategy) pairs left out of the replay fixture.
Env setup(const std::string& leaf, const std::vector<Strategy>& strategies,
          const std::vector<std::pair<std::string, Strategy>>& skip = {}) {
    Env env;
    env.root = fresh_dir(leaf);
    env.examples = fixture_examples();
    core::save_normalized(env.examples, (env.root / "data.jsonl").string());

    fs::create_directories(env.root / "shots");
    fs::create_directories(env.root / "replay");

    prompting::Demonstration direct_demo;
    direct_demo.premise = "| item | value |\n| a | 1 |\n| b | 2 |";
    direct_demo.question = "What is the sum of a and b?";
    direct_demo.target = "3";
    prompting::Demonstration eedp_demo;
    eedp_demo.premise = direct_demo.premise;
    eedp_demo.question = direct_demo.question;
    eedp_demo.target =
        "Domain Knowledge: A sum adds the two quantities.\n"
        "Gold Evidences:\n- a is 1.\n- b is 2.\n"
        "Steps:\n1. Add 1 to 2.\n   - Response 1: 1 + 2 = 3\n"
        "The final answer is 3.\n";
    prompting::Demonstration dec_demo;
    dec_demo.premise = direct_demo.premise;
    dec_demo.question = direct_demo.question;
    dec_demo.target = "The final answer is 3.";

    auto bank_for = [&](Strategy s) -> prompting::Demonstration {
        if (s == Strategy::EEDP) return eedp_demo;
        if (s == Strategy::Direct) return direct_demo;
        return dec_demo;
    };
    for (Strategy s : strategies) {
        const auto path =
            env.root / "shots" / prompting::shot_bank_filename(core::Dataset::FinQA, s);
        prompting::save_shot_bank(path.string(), {bank_for(s)});
        env.shots[s] = prompting::load_shot_bank(path.string(), s);
    }

    gateway::ModelConfig mc;
    mc.name = "replaybot";

    auto skipped = [&](const std::string& id, Strategy s) {
        return std::find(skip.begin(), skip.end(), std::make_pair(id, s)) != skip.end();
    };
    std::vector<std::pair<std::string, std::string>> entries;
    for (const auto& ex : env.examples) {
        for (Strategy s : strategies) {
            if (skipped(ex.id, s)) continue;
            if (s == Strategy::Decomposers) {
                auto bundles = prompting::render_decomposers(ex, env.shots[s], 1);
                entries.emplace_back(gateway::request_hash(mc, bundles[0].rendered),
                                     kStage1Response);
                prompting::DecomposerFill fill;
                fill.selected_rows = kStage1Response;
                entries.emplace_back(
                    gateway::request_hash(
                        mc, prompting::fill_decomposer_stage(bundles[1], fill).rendered),
                    kStage2Response);
                const auto& table = core::select_primary_table(ex);
                fill.pruned_premise = prompting::prune_premise(
                    ex, prompting::parse_row_selection(kStage1Response,
                                                       table.n_rows() - table.n_header_rows));
                fill.subquestions = kStage2Response;
                entries.emplace_back(
                    gateway::request_hash(
                        mc, prompting::fill_decomposer_stage(bundles[2], fill).rendered),
                    decomposer_final(ex.id));
            } else {
                auto bundle = prompting::render(s, ex, env.shots[s], 1);
                entries.emplace_back(gateway::request_hash(mc, bundle.rendered),
                                     s == Strategy::Direct ? std::string(direct_response(ex.id))
                                                           : eedp_response(ex.id));
            }
        }
    }
    gateway::save_replay_fixture((env.root / "replay" / "replaybot.jsonl").string(), entries);

    env.cfg.datasets = {{core::Dataset::FinQA, (env.root / "data.jsonl").string()}};
    env.cfg.models = {mc};
    env.cfg.strategies = strategies;
    env.cfg.shots_dir = (env.root / "shots").string();
    env.cfg.output_dir = (env.root / "out").string();
    env.cfg.parallelism = 3;
    env.cfg.replay_dir = (env.root / "replay").string();
    return env;
}

const runner::TripleSummary& triple_for(const runner::RunResult& r, Strategy s) {
    for (const auto& t : r.triples)
        if (t.strategy == s) return t;
    REQUIRE(false);
    return r.triples.front();
}

std::vector<std::string> file_lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

}  // namespace

TEST_CASE("eval records survive the JSONL round trip") {
    runner::EvalRecord r;
    r.example_id = "fx_12";
    r.dataset = core::Dataset::Multihiertt;
    r.model = "gpt-4";
    r.strategy = Strategy::EEDP;
    r.prompt_hash = "abc123";
    r.latency_ms = 840;
    r.parsed.confidence = response::Confidence::Pattern;
    r.parsed.raw = "Domain Knowledge: x\nThe final answer is 19,201.\n";
    r.parsed.diagnostics = {"note"};
    core::NumberValue nv;
    nv.value = dec("19201");
    nv.scale = core::Scale::Thousand;
    nv.is_percent = false;
    nv.decimals = 0;
    r.parsed.final_answer = nv;
    response::ParsedEEDP eedp;
    eedp.domain_knowledge = "x";
    eedp.evidences = {"a is 1.", "b is 2."};
    response::EEDPStep st;
    st.description = "Add 1 to 2.";
    st.equation = "1 + 2";
    st.stated_value = dec("3");
    eedp.steps.push_back(st);
    eedp.final_answer = nv;
    r.parsed.eedp = eedp;
    grading::GradeResult g;
    g.correct = false;
    g.matched_form = grading::MatchForm::None;
    g.pred_canonical = "19201";
    g.gold_canonical = "19200";
    r.grade = g;
    r.tags = {errors::ErrorTag::R2_QuestionMisinterpretation,
              errors::ErrorTag::C2_PrecisionError};
    r.metadata.example_id = "fx_12";
    r.metadata.category.category = metadata::Category::Difference;
    r.metadata.category.confident = false;
    r.metadata.n_steps = 2;
    r.metadata.table_length = 17;
    r.metadata.depth = 4;
    r.metadata.empty_pct = 0.125;
    r.metadata.source = metadata::Source::HumanLabel;

    const std::string line = runner::record_to_jsonl(r);
    CHECK(line.find('\n') == std::string::npos);
    runner::EvalRecord back = runner::record_from_jsonl(line);
    CHECK(back.example_id == r.example_id);
    CHECK(back.dataset == r.dataset);
    CHECK(back.model == r.model);
    CHECK(back.strategy == r.strategy);
    CHECK(back.prompt_hash == r.prompt_hash);
    CHECK(back.latency_ms == r.latency_ms);
    CHECK(back.parsed.confidence == r.parsed.confidence);
    CHECK(back.parsed.raw == r.parsed.raw);
    CHECK(back.parsed.diagnostics == r.parsed.diagnostics);
    REQUIRE(back.parsed.final_answer.has_value());
    const auto& bn = std::get<core::NumberValue>(*back.parsed.final_answer);
    CHECK(bn.value == nv.value);
    CHECK(bn.scale == nv.scale);
    CHECK(bn.decimals == nv.decimals);
    REQUIRE(back.parsed.eedp.has_value());
    CHECK(back.parsed.eedp->domain_knowledge == eedp.domain_knowledge);
    CHECK(back.parsed.eedp->evidences == eedp.evidences);
    REQUIRE(back.parsed.eedp->steps.size() == 1);
    CHECK(back.parsed.eedp->steps[0].description == st.description);
    CHECK(back.parsed.eedp->steps[0].equation == st.equation);
    CHECK(back.parsed.eedp->steps[0].stated_value == st.stated_value);
    REQUIRE(back.grade.has_value());
    CHECK(back.grade->correct == g.correct);
    CHECK(back.grade->matched_form == g.matched_form);
    CHECK(back.grade->pred_canonical == g.pred_canonical);
    CHECK(back.grade->gold_canonical == g.gold_canonical);
    CHECK(back.tags == r.tags);
    CHECK(back.metadata.category.category == r.metadata.category.category);
    CHECK(back.metadata.category.confident == r.metadata.category.confident);
    CHECK(back.metadata.n_steps == r.metadata.n_steps);
    CHECK(back.metadata.table_length == r.metadata.table_length);
    CHECK(back.metadata.depth == r.metadata.depth);
    CHECK(back.metadata.empty_pct == doctest::Approx(r.metadata.empty_pct));
    CHECK(back.metadata.source == r.metadata.source);
}

TEST_CASE("minimal records omit the optional parts") {
    runner::EvalRecord r;
    r.example_id = "x";
    r.model = "m";
    r.prompt_hash = "h";
    r.parsed.raw = "no answer here";
    r.metadata.example_id = "x";
    runner::EvalRecord back = runner::record_from_jsonl(runner::record_to_jsonl(r));
    CHECK_FALSE(back.parsed.final_answer.has_value());
    CHECK_FALSE(back.parsed.eedp.has_value());
    CHECK_FALSE(back.grade.has_value());
    CHECK(back.tags.empty());
    CHECK_FALSE(back.metadata.n_steps.has_value());
    CHECK_FALSE(back.metadata.depth.has_value());
}

TEST_CASE("malformed record lines throw invalid_argument") {
    CHECK_THROWS_AS((void)runner::record_from_jsonl("{not json"), std::invalid_argument);
    CHECK_THROWS_AS((void)runner::record_from_jsonl("{}"), std::invalid_argument);
    CHECK_THROWS_AS((void)runner::record_from_jsonl(
                        R"({"example_id":"x","dataset":"webqa"})"),
                    std::invalid_argument);
}

TEST_CASE("record filenames combine dataset, model stem and strategy") {
    CHECK(runner::record_filename(core::Dataset::FinQA, "replaybot", Strategy::Direct) ==
          "finqa_replaybot_direct.jsonl");
    CHECK(runner::record_filename(core::Dataset::ConvFinQA, "org/model v1", Strategy::EEDP) ==
          "convfinqa_org_model_v1_eedp.jsonl");
}

TEST_CASE("gold answers come from the annotation or the program") {
    auto ex = make_example("g1", "q", "add(2, 3)", {{"a", "2"}, {"b", "3"}});
    auto viaProgram = runner::gold_answer(ex);
    REQUIRE(viaProgram.has_value());
    CHECK(std::get<core::NumberValue>(*viaProgram).value == dec("5"));

    core::NumberValue annotated;
    annotated.value = dec("42");
    ex.gold.answer = annotated;
    auto viaAnswer = runner::gold_answer(ex);
    REQUIRE(viaAnswer.has_value());
    CHECK(std::get<core::NumberValue>(*viaAnswer).value == dec("42"));

    auto bare = make_example("g2", "q", std::nullopt, {{"a", "1"}});
    CHECK_FALSE(runner::gold_answer(bare).has_value());

    auto broken = make_example("g3", "q", "add(1", {{"a", "1"}});
    CHECK_FALSE(runner::gold_answer(broken).has_value());
}

TEST_CASE("render_first_prompt drops shots under a tight context limit") {
    auto ex = fixture_examples()[0];
    prompting::Demonstration d;
    d.premise = std::string(2000, 'x');
    d.question = "q";
    d.target = "3";
    std::vector<prompting::Demonstration> shots = {d, d};

    auto zero = prompting::render(Strategy::Direct, ex, shots, 0);
    auto one = prompting::render(Strategy::Direct, ex, shots, 1);
    REQUIRE(one.approx_tokens > zero.approx_tokens);
    const std::size_t limit = zero.approx_tokens + 1;

    auto bundle = runner::render_first_prompt(Strategy::Direct, ex, shots, 2, limit);
    CHECK(bundle.shots.empty());
    CHECK(bundle.approx_tokens <= limit);

    CHECK_THROWS_AS(
        (void)runner::render_first_prompt(Strategy::Direct, ex, shots, 2, 1),
        prompting::ContextOverflow);
}

TEST_CASE("run config text parses into a full RunConfig") {
    const std::string text =
        "# demo config\n"
        "output_dir = runs/demo\n"
        "shots_dir = fx/shots\n"
        "parallelism = 3\n"
        "resume = true\n"
        "replay_dir = fx/replay\n"
        "strategies = direct, eedp\n"
        "grade.rel_tol = 0.01\n"
        "grade.scale_equiv = false\n"
        "\n"
        "dataset.finqa = fx/finqa.jsonl\n"
        "dataset.tatqa = fx/tatqa.jsonl\n"
        "\n"
        "model.gpt4.endpoint = https://api.example.com/v1/chat/completions\n"
        "model.gpt4.api_key_env = EXAMPLE_KEY\n"
        "model.gpt4.shots = 2\n"
        "model.gpt4.requests_per_minute = 30\n"
        "model.gpt4.temperature = 0.5\n"
        "model.mini.endpoint = https://api.example.com/v1/chat/completions\n";
    runner::RunConfig cfg = runner::parse_run_config(text);
    CHECK(cfg.output_dir == "runs/demo");
    CHECK(cfg.shots_dir == "fx/shots");
    CHECK(cfg.parallelism == 3);
    CHECK(cfg.resume);
    CHECK(cfg.replay_dir == "fx/replay");
    REQUIRE(cfg.strategies.size() == 2);
    CHECK(cfg.strategies[0] == Strategy::Direct);
    CHECK(cfg.strategies[1] == Strategy::EEDP);
    CHECK(cfg.grade.rel_tol == dec("0.01"));
    CHECK(cfg.grade.abs_tol == dec("0.0005"));  // untouched default
    CHECK_FALSE(cfg.grade.allow_scale_equiv);
    CHECK(cfg.grade.allow_percent_ratio_equiv);
    REQUIRE(cfg.datasets.size() == 2);
    CHECK(cfg.datasets[0].dataset == core::Dataset::FinQA);
    CHECK(cfg.datasets[1].dataset == core::Dataset::TATQA);
    CHECK(cfg.datasets[1].path == "fx/tatqa.jsonl");
    REQUIRE(cfg.models.size() == 2);
    CHECK(cfg.models[0].name == "gpt4");
    CHECK(cfg.models[0].default_shots == 2);
    CHECK(cfg.models[0].requests_per_minute == 30);
    CHECK(cfg.models[0].temperature == doctest::Approx(0.5));
    CHECK(cfg.models[0].api_key_env == "EXAMPLE_KEY");
    CHECK(cfg.models[1].name == "mini");
}

TEST_CASE("config errors carry their line number") {
    CHECK_THROWS_WITH_AS((void)runner::parse_run_config("foo = bar\n"),
                         "line 1: unknown key 'foo'", std::invalid_argument);
    CHECK_THROWS_WITH_AS((void)runner::parse_run_config("\nstrategies = direct, wizardry\n"),
                         "line 2: unknown strategy 'wizardry'", std::invalid_argument);
    CHECK_THROWS_WITH_AS((void)runner::parse_run_config("parallelism = many\n"),
                         "line 1: bad number 'many'", std::invalid_argument);
    CHECK_THROWS_WITH_AS((void)runner::parse_run_config("dataset.webqa = x\n"),
                         "line 1: unknown dataset 'webqa'", std::invalid_argument);
    CHECK_THROWS_WITH_AS((void)runner::parse_run_config("model.gpt4 = x\n"),
                         "line 1: expected model.<name>.<field>", std::invalid_argument);
    CHECK_THROWS_WITH_AS((void)runner::parse_run_config("resume = maybe\n"),
                         "line 1: expected true/false", std::invalid_argument);
    CHECK_THROWS_WITH_AS((void)runner::parse_run_config("just words\n"),
                         "line 1: expected key = value", std::invalid_argument);
}

TEST_CASE("validate reports every configuration problem before a run") {
    runner::RunConfig cfg;
    auto problems = runner::validate(cfg);
    CHECK(problems.size() >= 3);  // no datasets, no models, no strategies

    Env env = setup("validate", {Strategy::Direct});
    CHECK(runner::validate(env.cfg).empty());

    auto broken = env.cfg;
    broken.datasets.push_back(broken.datasets.front());
    auto dup = runner::validate(broken);
    REQUIRE(dup.size() == 1);
    CHECK(dup[0].find("duplicate dataset") != std::string::npos);

    broken = env.cfg;
    broken.datasets[0].path = (env.root / "missing.jsonl").string();
    dup = runner::validate(broken);
    REQUIRE(dup.size() == 1);
    CHECK(dup[0].find("dataset file not found") != std::string::npos);

    broken = env.cfg;
    broken.strategies.push_back(Strategy::EEDP);  // bank not on disk
    dup = runner::validate(broken);
    REQUIRE(dup.size() == 1);
    CHECK(dup[0].find("shot bank not found") != std::string::npos);

    broken = env.cfg;
    broken.replay_dir = (env.root / "nowhere").string();
    dup = runner::validate(broken);
    REQUIRE(dup.size() == 1);
    CHECK(dup[0].find("replay fixture not found") != std::string::npos);

    broken = env.cfg;
    broken.replay_dir.reset();  // model has no endpoint either
    dup = runner::validate(broken);
    REQUIRE(dup.size() == 1);
    CHECK(dup[0].find("no endpoint") != std::string::npos);
}

TEST_CASE("run refuses an invalid config without touching the output dir") {
    Env env = setup("refuse", {Strategy::Direct});
    env.cfg.strategies = {Strategy::Direct, Strategy::Direct};
    CHECK_THROWS_AS((void)runner::run(env.cfg), std::invalid_argument);
    CHECK_FALSE(fs::exists(env.cfg.output_dir));
}

TEST_CASE("a replay run produces graded, tagged records in example order") {
    Env env = setup("full", {Strategy::Direct, Strategy::EEDP, Strategy::Decomposers});
    runner::RunResult result = runner::run(env.cfg);

    REQUIRE(result.triples.size() == 3);
    CHECK(result.failures == 0);
    CHECK(result.records_written == 15);

    const auto& direct = triple_for(result, Strategy::Direct);
    CHECK(direct.n_records == 5);
    CHECK(direct.n_graded == 4);  // e5 has no gold answer
    CHECK(direct.n_correct == 3);
    CHECK(direct.accuracy == doctest::Approx(0.75));

    const auto& eedp = triple_for(result, Strategy::EEDP);
    CHECK(eedp.n_correct == 3);
    const auto& dec_triple = triple_for(result, Strategy::Decomposers);
    CHECK(dec_triple.n_correct == 3);

    auto records = runner::load_records(
        (fs::path(env.cfg.output_dir) /
         runner::record_filename(core::Dataset::FinQA, "replaybot", Strategy::Direct))
            .string());
    REQUIRE(records.size() == 5);
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(records[i].example_id == env.examples[i].id);
        CHECK(records[i].model == "replaybot");
        CHECK(records[i].dataset == core::Dataset::FinQA);
        auto bundle = prompting::render(Strategy::Direct, env.examples[i],
                                        env.shots[Strategy::Direct], 1);
        CHECK(records[i].prompt_hash ==
              gateway::request_hash(env.cfg.models[0], bundle.rendered));
        CHECK(records[i].latency_ms == 0);  // replay serves instantly
    }
    CHECK(records[0].grade.has_value());
    CHECK(records[0].grade->correct);
    CHECK_FALSE(records[1].grade->correct);
    CHECK_FALSE(records[4].grade.has_value());
    CHECK(records[0].metadata.n_steps == 1);

    // the inverted-subtraction EEDP miss carries its reasoning tag
    auto eedp_records = runner::load_records(
        (fs::path(env.cfg.output_dir) /
         runner::record_filename(core::Dataset::FinQA, "replaybot", Strategy::EEDP))
            .string());
    REQUIRE(eedp_records.size() == 5);
    CHECK(eedp_records[0].tags.empty());
    REQUIRE(eedp_records[1].tags.size() == 1);
    CHECK(eedp_records[1].tags[0] == errors::ErrorTag::R2_QuestionMisinterpretation);
    REQUIRE(eedp_records[1].parsed.eedp.has_value());
    CHECK(eedp_records[1].parsed.eedp->steps.size() == 1);

    // decomposers chained three calls and graded off the final stage
    auto dec_records = runner::load_records(
        (fs::path(env.cfg.output_dir) /
         runner::record_filename(core::Dataset::FinQA, "replaybot", Strategy::Decomposers))
            .string());
    REQUIRE(dec_records.size() == 5);
    CHECK(dec_records[1].grade->correct);
    CHECK_FALSE(dec_records[2].grade->correct);
    CHECK(dec_records[0].parsed.raw == decomposer_final("e1"));

    // whole-dir loader sees all three triples
    CHECK(runner::load_run_dir(env.cfg.output_dir).size() == 15);

    const std::string summary = runner::format_summary(result);
    CHECK(summary.find("FinQA x replaybot x direct: accuracy 75.00%") != std::string::npos);
    CHECK(summary.find("15 records written, 0 failures") != std::string::npos);
}

TEST_CASE("replay runs are byte-identical across invocations") {
    Env env = setup("deterministic", {Strategy::Direct, Strategy::EEDP});
    auto cfg_a = env.cfg;
    cfg_a.output_dir = (env.root / "out_a").string();
    auto cfg_b = env.cfg;
    cfg_b.output_dir = (env.root / "out_b").string();
    (void)runner::run(cfg_a);
    (void)runner::run(cfg_b);
    for (Strategy s : {Strategy::Direct, Strategy::EEDP}) {
        const auto name = runner::record_filename(core::Dataset::FinQA, "replaybot", s);
        const std::string a = csv::read_file((fs::path(cfg_a.output_dir) / name).string());
        const std::string b = csv::read_file((fs::path(cfg_b.output_dir) / name).string());
        CHECK(a == b);
        CHECK_FALSE(a.empty());
    }
}

TEST_CASE("resume completes a truncated run file without duplicates") {
    Env env = setup("resume", {Strategy::Direct});
    auto reference_cfg = env.cfg;
    reference_cfg.output_dir = (env.root / "out_ref").string();
    (void)runner::run(reference_cfg);
    const auto name = runner::record_filename(core::Dataset::FinQA, "replaybot",
                                              Strategy::Direct);
    const auto ref_lines = file_lines(fs::path(reference_cfg.output_dir) / name);
    REQUIRE(ref_lines.size() == 5);

    // simulate a run killed mid-write: two full records plus a torn third
    auto resumed_cfg = env.cfg;
    resumed_cfg.output_dir = (env.root / "out_resume").string();
    resumed_cfg.resume = true;
    fs::create_directories(resumed_cfg.output_dir);
    {
        std::ofstream out(fs::path(resumed_cfg.output_dir) / name);
        out << ref_lines[0] << '\n' << ref_lines[1] << '\n';
        out << R"({"example_id":"e3","dataset":"Fin)";  // torn
    }
    runner::RunResult result = runner::run(resumed_cfg);
    REQUIRE(result.triples.size() == 1);
    CHECK(result.triples[0].n_skipped == 2);
    CHECK(result.records_written == 3);
    CHECK(file_lines(fs::path(resumed_cfg.output_dir) / name) == ref_lines);

    // resuming a complete file is a no-op
    runner::RunResult again = runner::run(resumed_cfg);
    CHECK(again.records_written == 0);
    CHECK(again.triples[0].n_skipped == 5);
    CHECK(file_lines(fs::path(resumed_cfg.output_dir) / name) == ref_lines);

    // without --resume the file is rebuilt from scratch, not appended to
    auto fresh_cfg = resumed_cfg;
    fresh_cfg.resume = false;
    (void)runner::run(fresh_cfg);
    CHECK(file_lines(fs::path(fresh_cfg.output_dir) / name) == ref_lines);
}

TEST_CASE("a missing replay entry is logged and the run continues") {
    Env env = setup("partial", {Strategy::Direct},
                    {{"e4", Strategy::Direct}});
    runner::RunResult result = runner::run(env.cfg);
    CHECK(result.failures == 1);
    CHECK(result.records_written == 4);
    REQUIRE(result.failure_log.size() == 1);
    CHECK(result.failure_log[0].find("e4") != std::string::npos);
    const auto& t = result.triples[0];
    CHECK(t.n_failed == 1);
    CHECK(t.n_records == 4);

    const auto name = runner::record_filename(core::Dataset::FinQA, "replaybot",
                                              Strategy::Direct);
    auto records = runner::load_records((fs::path(env.cfg.output_dir) / name).string());
    REQUIRE(records.size() == 4);
    for (const auto& r : records) CHECK(r.example_id != "e4");

    // repairing the fixture and resuming picks the failed example back up
    Env full = setup("partial_fixed", {Strategy::Direct});
    auto resume_cfg = env.cfg;
    resume_cfg.replay_dir = full.cfg.replay_dir;
    resume_cfg.resume = true;
    runner::RunResult second = runner::run(resume_cfg);
    CHECK(second.records_written == 1);
    CHECK(second.failures == 0);
    records = runner::load_records((fs::path(env.cfg.output_dir) / name).string());
    REQUIRE(records.size() == 5);
    std::vector<std::string> ids;
    for (const auto& r : records) ids.push_back(r.example_id);
    std::sort(ids.begin(), ids.end());
    CHECK(ids == std::vector<std::string>{"e1", "e2", "e3", "e4", "e5"});
}
