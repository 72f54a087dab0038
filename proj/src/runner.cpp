#include "tabeval/runner.hpp"

#include "tabeval/program_dsl.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_set>
#include <utility>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace tabeval::runner {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return s;
}

// --- JSON (de)serialization of the record parts ---

json answer_to_json(const core::AnswerValue& v) {
    json j;
    if (const auto* n = std::get_if<core::NumberValue>(&v)) {
        j["kind"] = "number";
        j["value"] = to_canonical_string(n->value);
        j["scale"] = std::string(core::scale_name(n->scale));
        j["percent"] = n->is_percent;
        if (n->decimals) j["decimals"] = *n->decimals;
    } else if (const auto* s = std::get_if<core::SpanValue>(&v)) {
        j["kind"] = "span";
        j["text"] = s->text;
    } else {
        j["kind"] = "bool";
        j["value"] = std::get<core::BoolValue>(v).value;
    }
    return j;
}

core::AnswerValue answer_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "number") {
        core::NumberValue n;
        auto v = parse_decimal(j.at("value").get<std::string>());
        if (!v) throw std::invalid_argument("record: bad decimal in answer");
        n.value = *v;
        auto sc = core::scale_from_name(j.at("scale").get<std::string>());
        if (!sc) throw std::invalid_argument("record: bad scale in answer");
        n.scale = *sc;
        n.is_percent = j.at("percent").get<bool>();
        if (j.contains("decimals")) n.decimals = j.at("decimals").get<int>();
        return n;
    }
    if (kind == "span") return core::SpanValue{j.at("text").get<std::string>()};
    if (kind == "bool") return core::BoolValue{j.at("value").get<bool>()};
    throw std::invalid_argument("record: unknown answer kind '" + kind + "'");
}

json eedp_to_json(const response::ParsedEEDP& e) {
    json j;
    if (e.domain_knowledge) j["domain_knowledge"] = *e.domain_knowledge;
    j["evidences"] = e.evidences;
    json steps = json::array();
    for (const auto& s : e.steps) {
        json sj;
        sj["description"] = s.description;
        sj["equation"] = s.equation;
        if (s.stated_value) sj["stated_value"] = to_canonical_string(*s.stated_value);
        steps.push_back(std::move(sj));
    }
    j["steps"] = std::move(steps);
    if (e.final_answer) j["final_answer"] = answer_to_json(*e.final_answer);
    return j;
}

response::ParsedEEDP eedp_from_json(const json& j) {
    response::ParsedEEDP e;
    if (j.contains("domain_knowledge"))
        e.domain_knowledge = j.at("domain_knowledge").get<std::string>();
    e.evidences = j.at("evidences").get<std::vector<std::string>>();
    for (const auto& sj : j.at("steps")) {
        response::EEDPStep s;
        s.description = sj.at("description").get<std::string>();
        s.equation = sj.at("equation").get<std::string>();
        if (sj.contains("stated_value")) {
            auto v = parse_decimal(sj.at("stated_value").get<std::string>());
            if (!v) throw std::invalid_argument("record: bad stated_value");
            s.stated_value = *v;
        }
        e.steps.push_back(std::move(s));
    }
    if (j.contains("final_answer")) e.final_answer = answer_from_json(j.at("final_answer"));
    return e;
}

response::Confidence confidence_from_name(const std::string& name) {
    for (auto c : {response::Confidence::Pattern, response::Confidence::Fallback,
                   response::Confidence::None})
        if (name == response::confidence_name(c)) return c;
    throw std::invalid_argument("record: unknown confidence '" + name + "'");
}

grading::MatchForm match_form_from_name(const std::string& name) {
    for (auto f : {grading::MatchForm::None, grading::MatchForm::Exact,
                   grading::MatchForm::Scaled, grading::MatchForm::PercentRatio,
                   grading::MatchForm::Rounded, grading::MatchForm::Span})
        if (name == grading::match_form_name(f)) return f;
    throw std::invalid_argument("record: unknown match form '" + name + "'");
}

json parsed_to_json(const response::ParsedResponse& p) {
    json j;
    if (p.final_answer) j["final_answer"] = answer_to_json(*p.final_answer);
    j["confidence"] = std::string(response::confidence_name(p.confidence));
    if (p.eedp) j["eedp"] = eedp_to_json(*p.eedp);
    if (p.pot_value) j["pot_value"] = to_canonical_string(*p.pot_value);
    j["diagnostics"] = p.diagnostics;
    j["raw"] = p.raw;
    return j;
}

response::ParsedResponse parsed_from_json(const json& j) {
    response::ParsedResponse p;
    if (j.contains("final_answer")) p.final_answer = answer_from_json(j.at("final_answer"));
    p.confidence = confidence_from_name(j.at("confidence").get<std::string>());
    if (j.contains("eedp")) p.eedp = eedp_from_json(j.at("eedp"));
    if (j.contains("pot_value")) {
        auto v = parse_decimal(j.at("pot_value").get<std::string>());
        if (!v) throw std::invalid_argument("record: bad pot_value");
        p.pot_value = *v;
    }
    p.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
    p.raw = j.at("raw").get<std::string>();
    return p;
}

json grade_to_json(const grading::GradeResult& g) {
    json j;
    j["correct"] = g.correct;
    j["form"] = std::string(grading::match_form_name(g.matched_form));
    j["pred"] = g.pred_canonical;
    j["gold"] = g.gold_canonical;
    return j;
}

grading::GradeResult grade_from_json(const json& j) {
    grading::GradeResult g;
    g.correct = j.at("correct").get<bool>();
    g.matched_form = match_form_from_name(j.at("form").get<std::string>());
    g.pred_canonical = j.at("pred").get<std::string>();
    g.gold_canonical = j.at("gold").get<std::string>();
    return g;
}

json metadata_to_json(const metadata::MetadataRecord& m) {
    json j;
    j["example_id"] = m.example_id;
    j["category"] = std::string(metadata::category_name(m.category.category));
    j["confident"] = m.category.confident;
    if (m.n_steps) j["n_steps"] = *m.n_steps;
    j["table_length"] = m.table_length;
    if (m.depth) j["depth"] = *m.depth;
    j["empty_pct"] = m.empty_pct;
    j["source"] = m.source == metadata::Source::HumanLabel ? "human" : "computed";
    return j;
}

metadata::MetadataRecord metadata_from_json(const json& j) {
    metadata::MetadataRecord m;
    m.example_id = j.at("example_id").get<std::string>();
    auto cat = metadata::category_from_name(j.at("category").get<std::string>());
    if (!cat) throw std::invalid_argument("record: unknown category");
    m.category.category = *cat;
    m.category.confident = j.at("confident").get<bool>();
    if (j.contains("n_steps")) m.n_steps = j.at("n_steps").get<int>();
    m.table_length = j.at("table_length").get<std::size_t>();
    if (j.contains("depth")) m.depth = j.at("depth").get<int>();
    m.empty_pct = j.at("empty_pct").get<double>();
    const std::string src = j.at("source").get<std::string>();
    if (src != "human" && src != "computed")
        throw std::invalid_argument("record: unknown metadata source");
    m.source = src == "human" ? metadata::Source::HumanLabel : metadata::Source::Computed;
    return m;
}

}  // namespace

std::string record_to_jsonl(const EvalRecord& r) {
    json j;
    j["example_id"] = r.example_id;
    j["dataset"] = std::string(core::dataset_name(r.dataset));
    j["model"] = r.model;
    j["strategy"] = std::string(prompting::strategy_name(r.strategy));
    j["prompt_hash"] = r.prompt_hash;
    j["parsed"] = parsed_to_json(r.parsed);
    if (r.grade) j["grade"] = grade_to_json(*r.grade);
    json tags = json::array();
    for (auto t : r.tags) tags.push_back(std::string(errors::tag_name(t)));
    j["tags"] = std::move(tags);
    j["metadata"] = metadata_to_json(r.metadata);
    j["latency_ms"] = r.latency_ms;
    return j.dump();
}

EvalRecord record_from_jsonl(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("record: ") + e.what());
    }
    try {
        EvalRecord r;
        r.example_id = j.at("example_id").get<std::string>();
        auto ds = core::dataset_from_name(j.at("dataset").get<std::string>());
        if (!ds) throw std::invalid_argument("record: unknown dataset");
        r.dataset = *ds;
        r.model = j.at("model").get<std::string>();
        auto st = prompting::strategy_from_name(j.at("strategy").get<std::string>());
        if (!st) throw std::invalid_argument("record: unknown strategy");
        r.strategy = *st;
        r.prompt_hash = j.at("prompt_hash").get<std::string>();
        r.parsed = parsed_from_json(j.at("parsed"));
        if (j.contains("grade")) r.grade = grade_from_json(j.at("grade"));
        for (const auto& t : j.at("tags")) {
            auto tag = errors::tag_from_name(t.get<std::string>());
            if (!tag) throw std::invalid_argument("record: unknown tag");
            r.tags.push_back(*tag);
        }
        r.metadata = metadata_from_json(j.at("metadata"));
        r.latency_ms = j.at("latency_ms").get<long>();
        return r;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("record: ") + e.what());
    }
}

std::vector<EvalRecord> load_records(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open record file: " + path);
    std::vector<EvalRecord> out;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        out.push_back(record_from_jsonl(line));
    }
    return out;
}

std::vector<EvalRecord> load_run_dir(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
            files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    std::vector<EvalRecord> out;
    for (const auto& f : files) {
        auto part = load_records(f);
        out.insert(out.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
    }
    return out;
}

std::string record_filename(core::Dataset dataset, const std::string& model,
                            prompting::Strategy strategy) {
    return lower(std::string(core::dataset_name(dataset))) + "_" +
           gateway::model_filename_stem(model) + "_" +
           std::string(prompting::strategy_name(strategy)) + ".jsonl";
}

std::optional<core::AnswerValue> gold_answer(const core::HybridExample& example) {
    if (example.gold.answer) return example.gold.answer;
    if (example.gold.program_text) {
        try {
            auto program = dsl::parse_program(*example.gold.program_text);
            return dsl::evaluate(program, dsl::table_context_for(example));
        } catch (const std::exception&) {
            return std::nullopt;
        }
    }
    return std::nullopt;
}

prompting::PromptBundle render_first_prompt(prompting::Strategy strategy,
                                            const core::HybridExample& example,
                                            const std::vector<prompting::Demonstration>& shots,
                                            std::size_t k, std::size_t token_limit) {
    for (std::size_t kk = std::min(k, shots.size());; --kk) {
        try {
            if (strategy == prompting::Strategy::Decomposers)
                return prompting::render_decomposers(example, shots, kk, token_limit).front();
            return prompting::render(strategy, example, shots, kk, token_limit);
        } catch (const prompting::ContextOverflow&) {
            if (kk == 0) throw;
        }
    }
}

// --- config file ---

namespace {

bool parse_bool(const std::string& v, bool& out) {
    if (v == "true" || v == "1") { out = true; return true; }
    if (v == "false" || v == "0") { out = false; return true; }
    return false;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    auto fail = [&](const std::string& msg) -> void {
        throw std::invalid_argument("line " + std::to_string(lineno) + ": " + msg);
    };
    auto model_of = [&](const std::string& name) -> gateway::ModelConfig& {
        for (auto& m : cfg.models)
            if (m.name == name) return m;
        cfg.models.emplace_back();
        cfg.models.back().name = name;
        return cfg.models.back();
    };
    auto to_size = [&](const std::string& v) -> std::size_t {
        try {
            std::size_t pos = 0;
            auto n = std::stoull(v, &pos);
            if (pos != v.size()) fail("bad number '" + v + "'");
            return n;
        } catch (const std::invalid_argument&) {
            fail("bad number '" + v + "'");
        } catch (const std::out_of_range&) {
            fail("bad number '" + v + "'");
        }
        return 0;
    };
    auto to_double = [&](const std::string& v) -> double {
        try {
            std::size_t pos = 0;
            double d = std::stod(v, &pos);
            if (pos != v.size()) fail("bad number '" + v + "'");
            return d;
        } catch (const std::exception&) {
            fail("bad number '" + v + "'");
        }
        return 0;
    };
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) fail("expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail("empty key");
        if (key == "output_dir") {
            cfg.output_dir = value;
        } else if (key == "shots_dir") {
            cfg.shots_dir = value;
        } else if (key == "parallelism") {
            cfg.parallelism = static_cast<int>(to_size(value));
        } else if (key == "resume") {
            bool b = false;
            if (!parse_bool(value, b)) fail("expected true/false");
            cfg.resume = b;
        } else if (key == "replay_dir") {
            cfg.replay_dir = value;
        } else if (key == "strategies") {
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const std::string name = trim(item);
                if (name.empty()) continue;
                auto s = prompting::strategy_from_name(name);
                if (!s) fail("unknown strategy '" + name + "'");
                cfg.strategies.push_back(*s);
            }
        } else if (key.rfind("grade.", 0) == 0) {
            const std::string field = key.substr(6);
            if (field == "rel_tol" || field == "abs_tol") {
                auto d = parse_decimal(value);
                if (!d) fail("bad decimal '" + value + "'");
                (field == "rel_tol" ? cfg.grade.rel_tol : cfg.grade.abs_tol) = *d;
            } else if (field == "percent_ratio_equiv" || field == "scale_equiv") {
                bool b = false;
                if (!parse_bool(value, b)) fail("expected true/false");
                (field == "percent_ratio_equiv" ? cfg.grade.allow_percent_ratio_equiv
                                                : cfg.grade.allow_scale_equiv) = b;
            } else {
                fail("unknown key '" + key + "'");
            }
        } else if (key.rfind("dataset.", 0) == 0) {
            const std::string name = key.substr(8);
            auto ds = core::dataset_from_name(name);
            if (!ds) fail("unknown dataset '" + name + "'");
            cfg.datasets.push_back({*ds, value});
        } else if (key.rfind("model.", 0) == 0) {
            const std::string rest = key.substr(6);
            auto dot = rest.find('.');
            if (dot == std::string::npos || dot == 0 || dot + 1 >= rest.size())
                fail("expected model.<name>.<field>");
            auto& m = model_of(rest.substr(0, dot));
            const std::string field = rest.substr(dot + 1);
            if (field == "endpoint") m.endpoint = value;
            else if (field == "api_key_env") m.api_key_env = value;
            else if (field == "cache_dir") m.cache_dir = value;
            else if (field == "context_limit") m.context_limit = to_size(value);
            else if (field == "shots") m.default_shots = to_size(value);
            else if (field == "max_output_tokens") m.max_output_tokens = to_size(value);
            else if (field == "requests_per_minute") m.requests_per_minute = to_size(value);
            else if (field == "parallelism") m.parallelism = to_size(value);
            else if (field == "temperature") m.temperature = to_double(value);
            else if (field == "top_p") m.top_p = to_double(value);
            else fail("unknown key '" + key + "'");
        } else {
            fail("unknown key '" + key + "'");
        }
    }
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_run_config(buf.str());
}

std::vector<std::string> validate(const RunConfig& config) {
    std::vector<std::string> out;
    if (config.datasets.empty()) out.push_back("no datasets configured");
    if (config.models.empty()) out.push_back("no models configured");
    if (config.strategies.empty()) out.push_back("no strategies configured");
    if (config.parallelism < 1) out.push_back("parallelism must be >= 1");
    if (config.output_dir.empty()) out.push_back("output_dir is empty");

    std::set<core::Dataset> seen_ds;
    for (const auto& src : config.datasets) {
        if (!seen_ds.insert(src.dataset).second)
            out.push_back("duplicate dataset " + std::string(core::dataset_name(src.dataset)) +
                          " makes run triples non-unique");
        else if (!fs::exists(src.path))
            out.push_back("dataset file not found: " + src.path);
    }
    std::set<std::string> seen_model;
    for (const auto& m : config.models) {
        if (m.name.empty()) out.push_back("model with empty name");
        if (!seen_model.insert(m.name).second)
            out.push_back("duplicate model " + m.name + " makes run triples non-unique");
        if (!config.replay_dir && m.endpoint.empty())
            out.push_back("model " + m.name + " has no endpoint and no replay_dir is set");
        if (config.replay_dir) {
            const auto fixture =
                fs::path(*config.replay_dir) / (gateway::model_filename_stem(m.name) + ".jsonl");
            if (!fs::exists(fixture))
                out.push_back("replay fixture not found: " + fixture.string());
        }
    }
    std::set<prompting::Strategy> seen_strat;
    for (auto s : config.strategies)
        if (!seen_strat.insert(s).second)
            out.push_back("duplicate strategy " + std::string(prompting::strategy_name(s)) +
                          " makes run triples non-unique");
    for (const auto& src : config.datasets) {
        for (auto s : config.strategies) {
            const auto bank =
                fs::path(config.shots_dir) / prompting::shot_bank_filename(src.dataset, s);
            if (!fs::exists(bank)) out.push_back("shot bank not found: " + bank.string());
        }
    }
    return out;
}

// --- the run itself ---

namespace {

struct Slot {
    // 0 pending, 1 record ready, 2 failed
    int state = 0;
    EvalRecord record;
    std::string failure;
};

struct Unit {
    const core::HybridExample* example = nullptr;
    std::vector<prompting::PromptBundle> bundles;  // 1 entry, or 3 for Decomposers
    std::string hash;
};

EvalRecord build_record(const core::HybridExample& ex, core::Dataset ds,
                        const gateway::ModelConfig& mc, prompting::Strategy strat,
                        const std::string& hash, const std::string& final_raw, long latency,
                        const grading::GradeConfig& grade_cfg) {
    EvalRecord rec;
    rec.example_id = ex.id;
    rec.dataset = ds;
    rec.model = mc.name;
    rec.strategy = strat;
    rec.prompt_hash = hash;
    rec.latency_ms = latency;
    rec.parsed = response::parse(strat, final_raw);
    if (auto gold = gold_answer(ex)) {
        grading::GradeResult g;
        if (rec.parsed.final_answer) {
            g = grading::is_correct(*rec.parsed.final_answer, *gold, grade_cfg);
        } else {
            g.correct = false;
            g.gold_canonical = core::answer_to_string(*gold);
        }
        rec.grade = g;
    }
    if (strat == prompting::Strategy::EEDP && rec.grade && !rec.grade->correct &&
        rec.parsed.eedp)
        rec.tags = errors::tag(*rec.parsed.eedp, ex, grade_cfg).tags;
    rec.metadata = metadata::annotate(ex);
    return rec;
}

Slot process_unit(const Unit& u, gateway::Gateway& gw, const gateway::ModelConfig& mc,
                  core::Dataset ds, prompting::Strategy strat,
                  const grading::GradeConfig& grade_cfg) {
    Slot slot;
    try {
        long latency = 0;
        std::string final_raw;
        if (strat == prompting::Strategy::Decomposers) {
            auto r1 = gw.complete(u.bundles[0].rendered);
            latency += r1.latency_ms;
            const auto& table = core::select_primary_table(*u.example);
            const std::size_t n_data_rows = table.n_rows() - table.n_header_rows;
            prompting::DecomposerFill fill;
            fill.selected_rows = r1.raw_text;
            fill.pruned_premise = prompting::prune_premise(
                *u.example, prompting::parse_row_selection(r1.raw_text, n_data_rows));
            auto r2 = gw.complete(prompting::fill_decomposer_stage(u.bundles[1], fill).rendered);
            latency += r2.latency_ms;
            fill.subquestions = r2.raw_text;
            auto r3 = gw.complete(prompting::fill_decomposer_stage(u.bundles[2], fill).rendered);
            latency += r3.latency_ms;
            final_raw = r3.raw_text;
        } else {
            auto r = gw.complete(u.bundles[0].rendered);
            latency = r.latency_ms;
            final_raw = r.raw_text;
        }
        slot.record = build_record(*u.example, ds, mc, strat, u.hash, final_raw, latency,
                                   grade_cfg);
        slot.state = 1;
    } catch (const std::exception& e) {
        slot.failure = e.what();
        slot.state = 2;
    }
    return slot;
}

void run_triple(gateway::Gateway& gw, const gateway::ModelConfig& mc, core::Dataset ds,
                const std::vector<core::HybridExample>& examples, prompting::Strategy strat,
                const std::vector<prompting::Demonstration>& shots, const RunConfig& config,
                RunResult& result) {
    TripleSummary sum;
    sum.dataset = ds;
    sum.model = mc.name;
    sum.strategy = strat;
    const fs::path out_path = fs::path(config.output_dir) / record_filename(ds, mc.name, strat);

    std::unordered_set<std::string> done;
    if (config.resume && fs::exists(out_path)) {
        // Tolerate a torn final line from a killed run: keep the lines that
        // parse and rewrite the file without the rest, so resume appends to
        // a clean prefix and the final file matches an uninterrupted run.
        std::vector<std::string> good;
        bool torn = false;
        {
            std::ifstream in(out_path);
            std::string line;
            while (std::getline(in, line)) {
                if (trim(line).empty()) { torn = true; continue; }
                try {
                    EvalRecord r = record_from_jsonl(line);
                    done.insert(r.prompt_hash);
                    ++sum.n_records;
                    if (r.grade) {
                        ++sum.n_graded;
                        if (r.grade->correct) ++sum.n_correct;
                    }
                    good.push_back(line);
                } catch (const std::invalid_argument&) {
                    torn = true;
                }
            }
        }
        if (torn) {
            std::ofstream rewrite(out_path, std::ios::trunc);
            for (const auto& line : good) rewrite << line << '\n';
        }
    } else if (fs::exists(out_path)) {
        fs::remove(out_path);  // a fresh (non-resume) run replaces the file
    }

    std::vector<Unit> units;
    for (const auto& ex : examples) {
        Unit u;
        u.example = &ex;
        try {
            if (strat == prompting::Strategy::Decomposers) {
                for (std::size_t kk = std::min(mc.default_shots, shots.size());; --kk) {
                    try {
                        u.bundles = prompting::render_decomposers(ex, shots, kk, mc.context_limit);
                        break;
                    } catch (const prompting::ContextOverflow&) {
                        if (kk == 0) throw;
                    }
                }
            } else {
                u.bundles = {render_first_prompt(strat, ex, shots, mc.default_shots,
                                                 mc.context_limit)};
            }
        } catch (const std::exception& e) {
            ++sum.n_failed;
            result.failure_log.push_back(out_path.filename().string() + " " + ex.id + ": " +
                                         e.what());
            continue;
        }
        u.hash = gateway::request_hash(mc, u.bundles[0].rendered);
        if (done.count(u.hash)) {
            ++sum.n_skipped;
            continue;
        }
        units.push_back(std::move(u));
    }

    // Bounded pool over the pending units; results land in index order so
    // the record file is written incrementally but deterministically.
    std::vector<Slot> slots(units.size());
    std::atomic<std::size_t> cursor{0};
    std::mutex mtx;
    std::condition_variable cv;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= units.size()) return;
            Slot s = process_unit(units[i], gw, mc, ds, strat, config.grade);
            {
                std::lock_guard<std::mutex> lock(mtx);
                slots[i] = std::move(s);
            }
            cv.notify_all();
        }
    };
    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), units.size());
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);

    {
        std::ofstream out(out_path, std::ios::app);
        for (std::size_t i = 0; i < units.size(); ++i) {
            std::unique_lock<std::mutex> lock(mtx);
            cv.wait(lock, [&] { return slots[i].state != 0; });
            Slot slot = std::move(slots[i]);
            lock.unlock();
            if (slot.state == 1) {
                out << record_to_jsonl(slot.record) << '\n';
                out.flush();
                ++sum.n_records;
                ++result.records_written;
                if (slot.record.grade) {
                    ++sum.n_graded;
                    if (slot.record.grade->correct) ++sum.n_correct;
                }
            } else {
                ++sum.n_failed;
                result.failure_log.push_back(out_path.filename().string() + " " +
                                             units[i].example->id + ": " + slot.failure);
            }
        }
    }
    for (auto& t : pool) t.join();

    sum.accuracy = sum.n_graded == 0
                       ? 0.0
                       : static_cast<double>(sum.n_correct) / static_cast<double>(sum.n_graded);
    result.failures += sum.n_failed;
    result.triples.push_back(sum);
}

}  // namespace

RunResult run(const RunConfig& config) {
    auto problems = validate(config);
    if (!problems.empty()) {
        std::string msg = "invalid run config:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw std::invalid_argument(msg);
    }

    // Everything that can fail for configuration reasons is loaded up front,
    // before the first provider call.
    std::vector<std::pair<DatasetSource, std::vector<core::HybridExample>>> data;
    for (const auto& src : config.datasets) {
        try {
            data.emplace_back(src, core::load_normalized(src.path));
        } catch (const std::exception& e) {
            throw std::invalid_argument("dataset " + src.path + ": " + e.what());
        }
    }
    std::map<std::pair<core::Dataset, prompting::Strategy>, std::vector<prompting::Demonstration>>
        banks;
    for (const auto& src : config.datasets) {
        for (auto s : config.strategies) {
            const auto path =
                fs::path(config.shots_dir) / prompting::shot_bank_filename(src.dataset, s);
            try {
                banks[{src.dataset, s}] = prompting::load_shot_bank(path.string(), s);
            } catch (const std::exception& e) {
                throw std::invalid_argument("shot bank " + path.string() + ": " + e.what());
            }
        }
    }

    fs::create_directories(config.output_dir);
    RunResult result;
    for (const auto& configured : config.models) {
        gateway::ModelConfig mc = configured;
        if (config.replay_dir)
            mc.endpoint = "replay:" +
                          (fs::path(*config.replay_dir) /
                           (gateway::model_filename_stem(mc.name) + ".jsonl"))
                              .string();
        // A bare default cache would land wherever the process started;
        // scope it under the run directory instead.
        if (mc.cache_dir == gateway::ModelConfig{}.cache_dir)
            mc.cache_dir = (fs::path(config.output_dir) / "cache").string();
        gateway::Gateway gw(mc);
        for (const auto& [src, examples] : data)
            for (auto strat : config.strategies)
                run_triple(gw, mc, src.dataset, examples, strat, banks.at({src.dataset, strat}),
                           config, result);
    }
    return result;
}

std::string format_summary(const RunResult& result) {
    std::ostringstream out;
    for (const auto& t : result.triples) {
        out << core::dataset_name(t.dataset) << " x " << t.model << " x "
            << prompting::strategy_name(t.strategy) << ": accuracy "
            << format_fixed(Decimal(100) * Decimal(static_cast<unsigned>(t.n_correct)) /
                                Decimal(static_cast<unsigned>(std::max<std::size_t>(t.n_graded, 1))),
                            2)
            << "% (" << t.n_correct << "/" << t.n_graded << " graded, " << t.n_records
            << " records";
        if (t.n_skipped) out << ", " << t.n_skipped << " resumed";
        if (t.n_failed) out << ", " << t.n_failed << " failed";
        out << ")\n";
    }
    out << result.records_written << " records written, " << result.failures << " failures\n";
    return out.str();
}

}  // namespace tabeval::runner
