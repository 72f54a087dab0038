// tabeval — batch evaluation harness for numerical reasoning over hybrid
// table-text financial QA.
//
// Subcommands: ingest, annotate, render, run, grade, tag-errors, report,
// probe generate|run|report. Exit codes: 0 success, 2 config error,
// 3 run finished with partial failures.

#include "tabeval/core_model.hpp"
#include "tabeval/decimal.hpp"
#include "tabeval/error_analysis.hpp"
#include "tabeval/grading.hpp"
#include "tabeval/llm_gateway.hpp"
#include "tabeval/metadata.hpp"
#include "tabeval/probe.hpp"
#include "tabeval/prompting.hpp"
#include "tabeval/report.hpp"
#include "tabeval/response_parsing.hpp"
#include "tabeval/runner.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace tabeval;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kPartialFailure = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    if (auto parent = fs::path(path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

core::Dataset dataset_arg(const std::string& name) {
    auto ds = core::dataset_from_name(name);
    if (!ds)
        throw std::runtime_error("unknown dataset '" + name +
                                 "' (finqa, tatqa, convfinqa, multihiertt)");
    return *ds;
}

prompting::Strategy strategy_arg(const std::string& name) {
    auto s = prompting::strategy_from_name(name);
    if (!s)
        throw std::runtime_error("unknown strategy '" + name +
                                 "' (direct, cot, pot, decomposers, eedp)");
    return *s;
}

Decimal decimal_arg(const std::string& text, const char* flag) {
    auto d = parse_decimal(text);
    if (!d) throw std::runtime_error(std::string("bad value for ") + flag + ": '" + text + "'");
    return *d;
}

// A records argument is either one JSONL file or a whole run directory.
std::vector<runner::EvalRecord> load_records_arg(const std::string& path) {
    if (fs::is_directory(path)) return runner::load_run_dir(path);
    return runner::load_records(path);
}

std::map<std::string, core::HybridExample> index_examples(
    const std::vector<std::string>& data_paths) {
    std::map<std::string, core::HybridExample> by_id;
    for (const auto& p : data_paths)
        for (auto& ex : core::load_normalized(p)) by_id.emplace(ex.id, std::move(ex));
    return by_id;
}

std::string pct(std::size_t correct, std::size_t total) {
    if (total == 0) return "n/a";
    return format_fixed(Decimal(100) * Decimal(static_cast<unsigned>(correct)) /
                            Decimal(static_cast<unsigned>(total)),
                        2) +
           "%";
}

// --- ingest ---------------------------------------------------------------

struct IngestArgs {
    std::string dataset, input, out, labels;
    bool filter = false;
};

int cmd_ingest(const IngestArgs& a) {
    auto ds = dataset_arg(a.dataset);
    auto examples = core::load_dataset(a.input, ds);
    const std::size_t raw_count = examples.size();
    if (!a.labels.empty())
        core::attach_human_labels(examples, core::load_human_labels(a.labels));
    if (a.filter) examples = metadata::apply_split_filters(std::move(examples), ds);
    core::save_normalized(examples, a.out);
    std::cout << "ingested " << examples.size() << " examples -> " << a.out;
    if (a.filter && examples.size() != raw_count)
        std::cout << " (" << raw_count - examples.size() << " filtered out)";
    std::cout << "\n";
    return kOk;
}

// --- annotate ---------------------------------------------------------------

struct AnnotateArgs {
    std::string input, out, labels;
    bool agreement = false;
};

int cmd_annotate(const AnnotateArgs& a) {
    auto examples = core::load_normalized(a.input);
    if (!a.labels.empty())
        core::attach_human_labels(examples, core::load_human_labels(a.labels));
    write_file(a.out, metadata::metadata_csv(metadata::annotate_all(examples)));
    std::cout << "annotated " << examples.size() << " examples -> " << a.out << "\n";
    if (a.agreement) {
        auto la = metadata::label_agreement(examples);
        std::cout << "label agreement (mismatches / labeled):\n"
                  << "  category:  " << la.category_mismatch << " / " << la.n_category << "\n"
                  << "  n_steps:   " << la.steps_mismatch << " / " << la.n_steps << "\n"
                  << "  depth:     " << la.depth_mismatch << " / " << la.n_depth << "\n"
                  << "  empty_pct: " << la.empty_mismatch << " / " << la.n_empty << "\n";
    }
    return kOk;
}

// --- render ---------------------------------------------------------------

struct RenderArgs {
    std::string input, dataset, strategy, shots, out;
    std::size_t k = 4;
    std::size_t context_limit = 0;
};

int cmd_render(const RenderArgs& a) {
    auto ds = dataset_arg(a.dataset);
    auto strat = strategy_arg(a.strategy);
    auto examples = core::load_normalized(a.input);
    auto bank_path = fs::path(a.shots) / prompting::shot_bank_filename(ds, strat);
    auto shots = prompting::load_shot_bank(bank_path.string(), strat);
    fs::create_directories(a.out);

    std::size_t written = 0, failed = 0;
    for (const auto& ex : examples) {
        try {
            if (strat == prompting::Strategy::Decomposers) {
                auto bundles =
                    prompting::render_decomposers(ex, shots, a.k, a.context_limit);
                for (std::size_t i = 0; i < bundles.size(); ++i) {
                    auto name = ex.id + ".stage" + std::to_string(i + 1) + ".txt";
                    write_file((fs::path(a.out) / name).string(), bundles[i].rendered);
                }
            } else {
                auto bundle =
                    runner::render_first_prompt(strat, ex, shots, a.k, a.context_limit);
                write_file((fs::path(a.out) / (ex.id + ".txt")).string(), bundle.rendered);
            }
            ++written;
        } catch (const prompting::ContextOverflow& e) {
            std::cerr << ex.id << ": " << e.what() << "\n";
            ++failed;
        }
    }
    std::cout << "rendered " << written << " prompts -> " << a.out;
    if (failed) std::cout << " (" << failed << " failed)";
    std::cout << "\n";
    return failed ? kPartialFailure : kOk;
}

// --- run --------------------------------------------------------------------

struct RunArgs {
    std::string config, out, replay;
    bool resume = false;
};

int cmd_run(const RunArgs& a) {
    auto cfg = runner::load_run_config(a.config);
    if (!a.out.empty()) cfg.output_dir = a.out;
    if (!a.replay.empty()) cfg.replay_dir = a.replay;
    if (a.resume) cfg.resume = true;
    auto result = runner::run(cfg);
    std::cout << runner::format_summary(result);
    for (const auto& line : result.failure_log) std::cerr << line << "\n";
    return result.failures ? kPartialFailure : kOk;
}

// --- grade ------------------------------------------------------------------

struct GradeArgs {
    std::string records, out;
    std::vector<std::string> data;
    std::string rel_tol, abs_tol;
    bool no_percent_equiv = false, no_scale_equiv = false;
};

grading::GradeConfig grade_config_from(const std::string& rel, const std::string& abs,
                                       bool no_percent, bool no_scale) {
    grading::GradeConfig cfg;
    if (!rel.empty()) cfg.rel_tol = decimal_arg(rel, "--rel-tol");
    if (!abs.empty()) cfg.abs_tol = decimal_arg(abs, "--abs-tol");
    cfg.allow_percent_ratio_equiv = !no_percent;
    cfg.allow_scale_equiv = !no_scale;
    return cfg;
}

int cmd_grade(const GradeArgs& a) {
    auto records = load_records_arg(a.records);
    auto by_id = index_examples(a.data);
    auto cfg = grade_config_from(a.rel_tol, a.abs_tol, a.no_percent_equiv, a.no_scale_equiv);

    std::size_t regraded = 0, unmatched = 0;
    for (auto& r : records) {
        auto it = by_id.find(r.example_id);
        if (it == by_id.end()) {
            ++unmatched;
            continue;  // record keeps whatever grade it had
        }
        auto gold = runner::gold_answer(it->second);
        if (!gold) {
            r.grade.reset();
            continue;
        }
        if (r.parsed.final_answer) {
            r.grade = grading::is_correct(*r.parsed.final_answer, *gold, cfg);
        } else {
            grading::GradeResult miss;
            miss.gold_canonical = core::answer_to_string(*gold);
            r.grade = miss;
        }
        ++regraded;
    }

    struct Cell {
        std::size_t n = 0, correct = 0;
    };
    std::map<std::string, Cell> triples;
    for (const auto& r : records) {
        if (!r.grade) continue;
        auto key = std::string(core::dataset_name(r.dataset)) + " x " + r.model + " x " +
                   std::string(prompting::strategy_name(r.strategy));
        auto& cell = triples[key];
        ++cell.n;
        if (r.grade->correct) ++cell.correct;
    }
    for (const auto& [key, cell] : triples)
        std::cout << key << ": " << cell.correct << "/" << cell.n << " = "
                  << pct(cell.correct, cell.n) << "\n";
    std::cout << "regraded " << regraded << " records";
    if (unmatched) std::cout << " (" << unmatched << " without a matching example)";
    std::cout << "\n";

    if (!a.out.empty()) {
        std::string body;
        for (const auto& r : records) body += runner::record_to_jsonl(r) + "\n";
        write_file(a.out, body);
        std::cout << "wrote " << records.size() << " records -> " << a.out << "\n";
    }
    return kOk;
}

// --- tag-errors ---------------------------------------------------------------

struct TagArgs {
    std::string records, out, import_path;
    std::vector<std::string> data;
};

int cmd_tag_errors(const TagArgs& a) {
    auto records = load_records_arg(a.records);
    auto by_id = index_examples(a.data);

    std::vector<errors::TaggedError> tagged;
    std::vector<errors::ReviewRow> reviews;
    std::size_t unmatched = 0;
    for (const auto& r : records) {
        if (r.strategy != prompting::Strategy::EEDP) continue;
        if (!r.grade || r.grade->correct || !r.parsed.eedp) continue;
        auto it = by_id.find(r.example_id);
        if (it == by_id.end()) {
            ++unmatched;
            continue;
        }
        const auto& ex = it->second;
        auto result = errors::tag(*r.parsed.eedp, ex);

        errors::TaggedError te;
        te.example_id = r.example_id;
        te.dataset = r.dataset;
        te.tags = result.tags;
        tagged.push_back(std::move(te));

        errors::ReviewRow row;
        row.id = r.example_id;
        row.dataset = r.dataset;
        row.question = ex.question.text;
        row.gold_program = ex.gold.program_text.value_or("");
        std::string evid, steps;
        for (const auto& e : r.parsed.eedp->evidences)
            evid += (evid.empty() ? "" : " | ") + e;
        for (const auto& s : r.parsed.eedp->steps) {
            if (!steps.empty()) steps += " | ";
            steps += s.description + " => " + s.equation;
            if (s.stated_value) steps += " = " + to_canonical_string(*s.stated_value);
        }
        row.model_evidences = std::move(evid);
        row.model_steps = std::move(steps);
        row.auto_tags = result.tags;
        reviews.push_back(std::move(row));
    }

    if (!a.import_path.empty()) {
        auto imported = errors::import_review(read_file(a.import_path));
        for (const auto& err : imported.errors) std::cerr << a.import_path << ": " << err << "\n";
        errors::apply_human_tags(tagged, imported.rows);
    }

    fs::create_directories(a.out);
    write_file((fs::path(a.out) / "review.csv").string(), errors::review_csv(reviews));
    write_file((fs::path(a.out) / "summary.csv").string(),
               errors::summary_csv(errors::summarize(tagged)));
    std::cout << "tagged " << tagged.size() << " failing responses -> " << a.out
              << " (review.csv, summary.csv)";
    if (unmatched) std::cout << " (" << unmatched << " without a matching example)";
    std::cout << "\n";
    return kOk;
}

// --- report ---------------------------------------------------------------

struct ReportArgs {
    std::string records, out, dimension;
    std::vector<std::string> data;
    bool omit_filtered = false;
};

int cmd_report(const ReportArgs& a) {
    auto records = load_records_arg(a.records);
    std::vector<core::HybridExample> examples;
    for (const auto& p : a.data)
        for (auto& ex : core::load_normalized(p)) examples.push_back(std::move(ex));

    std::vector<report::Dimension> dims;
    if (a.dimension.empty()) {
        dims = {report::Dimension::Steps,       report::Dimension::Category,
                report::Dimension::TableLength, report::Dimension::Depth,
                report::Dimension::EmptyPct,    report::Dimension::Tau};
    } else {
        auto d = report::dimension_from_name(a.dimension);
        if (!d)
            throw std::runtime_error(
                "unknown dimension '" + a.dimension +
                "' (steps, category, table_length, depth, empty_pct, tau)");
        dims = {*d};
    }

    report::StratifyOptions opts;
    opts.omit_filtered_categories = a.omit_filtered;

    fs::create_directories(a.out);
    write_file((fs::path(a.out) / "accuracy.csv").string(),
               report::accuracy_table_csv(records));

    // Stratified views are per dataset: the trends those files expose
    // (steps, categories, table shape) are dataset-specific.
    std::size_t n_files = 1;
    for (auto ds : {core::Dataset::TATQA, core::Dataset::FinQA, core::Dataset::ConvFinQA,
                    core::Dataset::Multihiertt}) {
        std::vector<runner::EvalRecord> subset;
        for (const auto& r : records)
            if (r.dataset == ds) subset.push_back(r);
        if (subset.empty()) continue;
        std::string prefix(core::dataset_name(ds));
        for (auto& c : prefix) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        for (auto dim : dims) {
            auto rep = report::stratify(subset, dim, opts, examples);
            auto stem = prefix + "_" + std::string(report::dimension_name(dim));
            write_file((fs::path(a.out) / (stem + ".csv")).string(),
                       report::stratified_csv(rep));
            write_file((fs::path(a.out) / (stem + ".json")).string(),
                       report::plot_data_json(rep));
            n_files += 2;
        }
    }
    std::cout << "wrote accuracy.csv and " << n_files - 1 << " stratified files -> " << a.out
              << "\n";
    return kOk;
}

// --- probe ------------------------------------------------------------------

struct ProbeGenerateArgs {
    std::uint64_t seed = 7;
    bool signed_operands = false;
    std::string out;
};

int cmd_probe_generate(const ProbeGenerateArgs& a) {
    probe::GenerateOptions opts;
    opts.signed_operands = a.signed_operands;
    auto items = probe::generate(a.seed, opts);
    probe::save_probe_csv(items, a.out);
    std::cout << items.size() << " probe items (seed " << a.seed << ") -> " << a.out << "\n";
    return kOk;
}

struct ProbeRunArgs {
    std::string probe_csv, out, model, endpoint, replay, api_key_env, cache;
    std::size_t rpm = 0, parallelism = 4, max_output_tokens = 64;
    double temperature = 0.0, top_p = 1.0;
};

int cmd_probe_run(const ProbeRunArgs& a) {
    if (a.endpoint.empty() == a.replay.empty())
        throw std::runtime_error("exactly one of --endpoint or --replay is required");
    auto items = probe::load_probe_csv(a.probe_csv);

    gateway::ModelConfig mc;
    mc.name = a.model;
    mc.endpoint = a.endpoint;
    if (!a.replay.empty())
        mc.endpoint = "replay:" +
                      (fs::path(a.replay) / (gateway::model_filename_stem(a.model) + ".jsonl"))
                          .string();
    mc.api_key_env = a.api_key_env;
    mc.requests_per_minute = a.rpm;
    mc.parallelism = a.parallelism;
    mc.max_output_tokens = a.max_output_tokens;
    mc.temperature = a.temperature;
    mc.top_p = a.top_p;
    if (!a.cache.empty()) mc.cache_dir = a.cache;
    gateway::Gateway gw(mc);

    std::vector<std::optional<std::string>> raw(items.size());
    std::vector<std::string> failures;
    std::mutex failures_mutex;
    std::atomic<std::size_t> cursor{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = cursor.fetch_add(1);
            if (i >= items.size()) return;
            try {
                raw[i] = gw.complete(probe::probe_prompt(items[i])).raw_text;
            } catch (const std::exception& e) {
                std::lock_guard lock(failures_mutex);
                failures.push_back(items[i].id + ": " + e.what());
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::max<std::size_t>(1, a.parallelism); ++t)
        pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::string body;
    std::size_t answered = 0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (!raw[i]) continue;
        nlohmann::json j{{"id", items[i].id}, {"raw", *raw[i]}};
        body += j.dump() + "\n";
        ++answered;
    }
    write_file(a.out, body);
    for (const auto& f : failures) std::cerr << f << "\n";
    std::cout << answered << "/" << items.size() << " responses -> " << a.out;
    if (!failures.empty()) std::cout << " (" << failures.size() << " failed)";
    std::cout << "\n";
    return failures.empty() ? kOk : kPartialFailure;
}

struct ProbeReportArgs {
    std::string probe_csv, responses, out;
    std::string rel_tol, abs_tol;
};

int cmd_probe_report(const ProbeReportArgs& a) {
    auto items = probe::load_probe_csv(a.probe_csv);
    std::map<std::string, std::string> responses;
    std::ifstream in(a.responses, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + a.responses);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error(a.responses + " line " + std::to_string(lineno) + ": " +
                                     e.what());
        }
        responses[j.at("id").get<std::string>()] = j.at("raw").get<std::string>();
    }
    auto cfg = grade_config_from(a.rel_tol, a.abs_tol, false, false);
    auto rep = probe::grade_probe(items, responses, cfg);
    write_file(a.out, probe::results_csv(rep));
    for (const auto& m : rep.per_op)
        std::cout << probe::probe_op_name(m.op) << ": " << m.correct << "/" << m.n << " = "
                  << pct(static_cast<std::size_t>(m.correct), static_cast<std::size_t>(m.n))
                  << "\n";
    std::cout << "overall " << rep.total_correct << "/" << rep.total << " = "
              << pct(static_cast<std::size_t>(rep.total_correct),
                     static_cast<std::size_t>(rep.total))
              << " (" << rep.missing_ids.size() << " missing) -> " << a.out << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "tabeval — batch evaluation harness for numerical reasoning over "
        "hybrid table-text financial QA"};
    app.require_subcommand(1);

    IngestArgs ingest;
    auto* ingest_cmd =
        app.add_subcommand("ingest", "Normalize a raw dataset file into JSONL");
    ingest_cmd->add_option("input", ingest.input, "raw dataset JSON file")->required();
    ingest_cmd->add_option("--dataset", ingest.dataset,
                           "finqa | tatqa | convfinqa | multihiertt")
        ->required();
    ingest_cmd->add_option("--out", ingest.out, "normalized JSONL output path")->required();
    ingest_cmd->add_option("--labels", ingest.labels, "human-label CSV to attach");
    ingest_cmd->add_flag("--filter", ingest.filter, "apply the annotation-split filters");

    AnnotateArgs annotate;
    auto* annotate_cmd = app.add_subcommand(
        "annotate", "Compute the five complexity annotations per example");
    annotate_cmd->add_option("input", annotate.input, "normalized JSONL file")->required();
    annotate_cmd->add_option("--out", annotate.out, "metadata CSV output path")->required();
    annotate_cmd->add_option("--labels", annotate.labels, "human-label CSV to attach");
    annotate_cmd->add_flag("--agreement", annotate.agreement,
                           "print computed-vs-human agreement counts");

    RenderArgs render;
    auto* render_cmd =
        app.add_subcommand("render", "Render prompts to files without calling a model");
    render_cmd->add_option("input", render.input, "normalized JSONL file")->required();
    render_cmd->add_option("--dataset", render.dataset, "dataset the examples come from")
        ->required();
    render_cmd->add_option("--strategy", render.strategy,
                           "direct | cot | pot | decomposers | eedp")
        ->required();
    render_cmd->add_option("--shots", render.shots, "shot-bank directory")->required();
    render_cmd->add_option("--out", render.out, "output directory, one .txt per prompt")
        ->required();
    render_cmd->add_option("-k,--shots-per-prompt", render.k, "demonstrations per prompt");
    render_cmd->add_option("--context-limit", render.context_limit,
                           "approx token limit, 0 = unlimited");

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run a dataset x model x strategy matrix");
    run_cmd->add_option("--config", run.config, "run config file (key = value)")->required();
    run_cmd->add_option("--out", run.out, "override output_dir");
    run_cmd->add_option("--replay", run.replay, "replay fixture directory; no HTTP happens");
    run_cmd->add_flag("--resume", run.resume, "skip records already on disk");

    GradeArgs grade;
    auto* grade_cmd =
        app.add_subcommand("grade", "Re-grade stored records against their gold answers");
    grade_cmd->add_option("records", grade.records, "record JSONL file or run directory")
        ->required();
    grade_cmd->add_option("--data", grade.data, "normalized JSONL with the gold answers")
        ->required();
    grade_cmd->add_option("--out", grade.out, "write the regraded records here");
    grade_cmd->add_option("--rel-tol", grade.rel_tol, "relative tolerance (default 0.005)");
    grade_cmd->add_option("--abs-tol", grade.abs_tol, "absolute tolerance (default 0.0005)");
    grade_cmd->add_flag("--no-percent-equiv", grade.no_percent_equiv,
                        "disable percent/ratio equivalence");
    grade_cmd->add_flag("--no-scale-equiv", grade.no_scale_equiv,
                        "disable scale-word equivalence");

    TagArgs tag;
    auto* tag_cmd = app.add_subcommand(
        "tag-errors", "Auto-tag failing EEDP responses with the error taxonomy");
    tag_cmd->add_option("records", tag.records, "record JSONL file or run directory")
        ->required();
    tag_cmd->add_option("--data", tag.data, "normalized JSONL with the gold annotations")
        ->required();
    tag_cmd->add_option("--out", tag.out, "output directory (review.csv, summary.csv)")
        ->required();
    tag_cmd->add_option("--import", tag.import_path,
                        "re-imported review worksheet; human tags override");

    ReportArgs report_args;
    auto* report_cmd =
        app.add_subcommand("report", "Accuracy table and stratified accuracy reports");
    report_cmd->add_option("records", report_args.records, "record JSONL file or run directory")
        ->required();
    report_cmd->add_option("--out", report_args.out, "output directory")->required();
    report_cmd->add_option("--data", report_args.data,
                           "normalized JSONL files (needed for the tau dimension)");
    report_cmd->add_option("--dimension", report_args.dimension,
                           "restrict to one dimension (default: all six)");
    report_cmd->add_flag("--omit-filtered-categories", report_args.omit_filtered,
                         "drop the Time and InDomainInfo categories");

    auto* probe_cmd = app.add_subcommand("probe", "Synthetic arithmetic probe");
    probe_cmd->require_subcommand(1);

    ProbeGenerateArgs pgen;
    auto* pgen_cmd = probe_cmd->add_subcommand(
        "generate", "Generate the 2600-item probe set (50 per op x tau)");
    pgen_cmd->add_option("--seed", pgen.seed, "RNG seed (default 7)");
    pgen_cmd->add_flag("--signed", pgen.signed_operands, "allow negative operands");
    pgen_cmd->add_option("--out", pgen.out, "probe CSV output path")->required();

    ProbeRunArgs prun;
    auto* prun_cmd = probe_cmd->add_subcommand("run", "Send every probe item to a model");
    prun_cmd->add_option("--probe", prun.probe_csv, "probe CSV from `probe generate`")
        ->required();
    prun_cmd->add_option("--out", prun.out, "responses JSONL output path")->required();
    prun_cmd->add_option("--model", prun.model, "model name")->required();
    prun_cmd->add_option("--endpoint", prun.endpoint, "chat-completion endpoint URL");
    prun_cmd->add_option("--replay", prun.replay, "replay fixture directory");
    prun_cmd->add_option("--api-key-env", prun.api_key_env,
                         "env var holding the API key (name only)");
    prun_cmd->add_option("--rpm", prun.rpm, "requests per minute, 0 = unlimited");
    prun_cmd->add_option("--parallelism", prun.parallelism, "in-flight requests");
    prun_cmd->add_option("--max-output-tokens", prun.max_output_tokens, "completion budget");
    prun_cmd->add_option("--temperature", prun.temperature, "sampling temperature");
    prun_cmd->add_option("--top-p", prun.top_p, "nucleus sampling cutoff");
    prun_cmd->add_option("--cache", prun.cache, "response cache directory");

    ProbeReportArgs prep;
    auto* prep_cmd =
        probe_cmd->add_subcommand("report", "Grade probe responses into the op x tau table");
    prep_cmd->add_option("--probe", prep.probe_csv, "probe CSV from `probe generate`")
        ->required();
    prep_cmd->add_option("--responses", prep.responses, "responses JSONL from `probe run`")
        ->required();
    prep_cmd->add_option("--out", prep.out, "results CSV output path")->required();
    prep_cmd->add_option("--rel-tol", prep.rel_tol, "relative tolerance (default 0.005)");
    prep_cmd->add_option("--abs-tol", prep.abs_tol, "absolute tolerance (default 0.0005)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (ingest_cmd->parsed()) return cmd_ingest(ingest);
        if (annotate_cmd->parsed()) return cmd_annotate(annotate);
        if (render_cmd->parsed()) return cmd_render(render);
        if (run_cmd->parsed()) return cmd_run(run);
        if (grade_cmd->parsed()) return cmd_grade(grade);
        if (tag_cmd->parsed()) return cmd_tag_errors(tag);
        if (report_cmd->parsed()) return cmd_report(report_args);
        if (pgen_cmd->parsed()) return cmd_probe_generate(pgen);
        if (prun_cmd->parsed()) return cmd_probe_run(prun);
        if (prep_cmd->parsed()) return cmd_probe_report(prep);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
    return kOk;
}
