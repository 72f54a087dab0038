#include "tabeval/prompting.hpp"

#include "tabeval/response_parsing.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace tabeval::prompting {

namespace {

// The structured-derivation instruction: four numbered directives ending in
// the sentinel phrase the response parser keys on.
constexpr std::string_view kEEDPInstruction =
    "Please carefully analyze the provided information, perform necessary numerical "
    "calculations, and provide accurate answers to the given question using the provided "
    "data. Take into account the pre-text, table, and post-text when formulating your "
    "response.\n"
    "When performing numerical calculations, ensure you gather the required information "
    "and follow a step-by-step approach.\n"
    "1. Elicit the most relevant domain fact or knowledge that might be useful for you to "
    "extract the right operands and forming the right approach to the problem.\n"
    "2. Translate table data into sentences and identify gold evidence for answering the "
    "question.\n"
    "3. Define a sequence of atomic operations (Add, Subtract, Divide, Multiply, Greater, "
    "Min, Max, Exp) which take into account only two operands at a time. Divide a complex "
    "task into a sequence of atomic operations defined above.\n"
    "4. Finally, conclude as: The final answer is <answer>.";

constexpr std::string_view kDirectInstruction =
    "Please carefully analyze the provided information and answer the given question "
    "using the provided data. Return only the final answer and abstain from providing "
    "explanations.";

constexpr std::string_view kCoTInstruction =
    "Please carefully analyze the provided information, think step by step, and output "
    "the explanation to the answer. Conclude as: The final answer is <answer>.";

constexpr std::string_view kPoTInstruction =
    "Please derive the answer as code: a sequence of assignments over numeric literals, "
    "previously assigned names, and the operators +, -, *, / and ** only. No function "
    "calls, imports, loops, or strings. Assign the final result to ans and return only "
    "the code.";

constexpr std::string_view kDecompose1Instruction =
    "Identify the table rows required to answer the question. Respond with the row "
    "numbers only, counting the first data row below the header as row 1, in the form: "
    "Rows: 2, 5";

constexpr std::string_view kDecompose2Instruction =
    "Decompose the question into a short sequence of simpler subquestions that can each "
    "be answered from the table in one step. Respond with one subquestion per line.";

constexpr std::string_view kDecompose3Instruction =
    "Answer the question using the reduced table and the subquestions as a guide. "
    "Conclude as: The final answer is <answer>.";

std::string_view answer_label(Strategy s) {
    return s == Strategy::Direct ? "Answer:" : "Response:";
}

std::string_view instruction_for(Strategy s) {
    switch (s) {
        case Strategy::Direct: return kDirectInstruction;
        case Strategy::CoT: return kCoTInstruction;
        case Strategy::PoT: return kPoTInstruction;
        case Strategy::EEDP: return kEEDPInstruction;
        case Strategy::Decomposers: return kDecompose3Instruction;
    }
    return kDirectInstruction;
}

void append_table(std::string& out, const core::Table& table) {
    out += "Table " + table.id + ":";
    if (table.caption) out += " " + *table.caption;
    out += '\n';
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        int indent = r < table.row_indent_levels.size() ? table.row_indent_levels[r] : 0;
        out.append(static_cast<std::size_t>(indent) * 2, ' ');
        out += '|';
        for (const auto& cell : table.grid[r]) {
            out += ' ';
            out += cell.raw_text;
            out += " |";
        }
        out += '\n';
    }
}

std::string question_block(const core::HybridExample& example) {
    std::string out;
    for (const auto& turn : example.question.turn_history) {
        out += "Q: " + turn.question_text + '\n';
        out += "A: " + turn.gold_answer_text + '\n';
    }
    out += "Question: " + example.question.text + '\n';
    return out;
}

std::string render_text(Strategy strategy, std::string_view instruction,
                        const std::vector<Demonstration>& shots, std::size_t k,
                        std::string_view query_premise, std::string_view question_text) {
    std::string out(instruction);
    out += "\n\n";
    for (std::size_t i = 0; i < k; ++i) {
        out += "Demonstration:\n";
        out += shots[i].premise;
        if (!shots[i].premise.empty() && shots[i].premise.back() != '\n') out += '\n';
        out += "Question: " + shots[i].question + '\n';
        out += answer_label(strategy);
        out += '\n';
        out += shots[i].target;
        if (!shots[i].target.empty() && shots[i].target.back() != '\n') out += '\n';
        out += '\n';
    }
    out += query_premise;
    if (!query_premise.empty() && query_premise.back() != '\n') out += '\n';
    out += question_text;
    out += answer_label(strategy);
    out += '\n';
    return out;
}

PromptBundle make_bundle(Strategy strategy, std::string_view instruction,
                         const std::vector<Demonstration>& shots, std::size_t k,
                         std::string query_premise, std::string question_text, int stage,
                         std::size_t token_limit) {
    if (k > shots.size())
        throw std::invalid_argument("k exceeds the available demonstrations");
    PromptBundle b;
    b.strategy = strategy;
    b.instruction = std::string(instruction);
    b.shots.assign(shots.begin(), shots.begin() + static_cast<std::ptrdiff_t>(k));
    b.query_premise = std::move(query_premise);
    b.question = std::move(question_text);
    b.stage = stage;
    b.rendered =
        render_text(strategy, instruction, shots, k, b.query_premise, b.question);
    b.approx_tokens = approx_token_count(b.rendered);
    if (token_limit > 0 && b.approx_tokens > token_limit)
        throw ContextOverflow(b.approx_tokens, token_limit);
    return b;
}

}  // namespace

std::string_view strategy_name(Strategy s) {
    switch (s) {
        case Strategy::Direct: return "direct";
        case Strategy::CoT: return "cot";
        case Strategy::PoT: return "pot";
        case Strategy::Decomposers: return "decomposers";
        case Strategy::EEDP: return "eedp";
    }
    return "direct";
}

std::optional<Strategy> strategy_from_name(std::string_view name) {
    std::string low(name);
    std::transform(low.begin(), low.end(), low.begin(), [](char c) {
        return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    });
    if (low == "direct") return Strategy::Direct;
    if (low == "cot" || low == "chain-of-thought") return Strategy::CoT;
    if (low == "pot" || low == "program-of-thought") return Strategy::PoT;
    if (low == "decomposers" || low == "decompose") return Strategy::Decomposers;
    if (low == "eedp") return Strategy::EEDP;
    return std::nullopt;
}

ContextOverflow::ContextOverflow(std::size_t approx_tokens, std::size_t limit)
    : std::runtime_error("prompt of ~" + std::to_string(approx_tokens) +
                         " tokens exceeds the model limit of " + std::to_string(limit)) {}

std::string serialize_premise(const core::HybridExample& example) {
    std::string out;
    for (const auto& line : example.pre_text) {
        out += line;
        out += '\n';
    }
    for (const auto& table : example.tables) append_table(out, table);
    for (const auto& line : example.post_text) {
        out += line;
        out += '\n';
    }
    return out;
}

std::size_t approx_token_count(std::string_view text) { return text.size() / 4; }

PromptBundle render(Strategy strategy, const core::HybridExample& example,
                    const std::vector<Demonstration>& shots, std::size_t k,
                    std::size_t token_limit) {
    if (strategy == Strategy::Decomposers)
        throw std::invalid_argument("Decomposers renders through render_decomposers");
    return make_bundle(strategy, instruction_for(strategy), shots, k,
                       serialize_premise(example), question_block(example), 0,
                       token_limit);
}

std::vector<PromptBundle> render_decomposers(const core::HybridExample& example,
                                             const std::vector<Demonstration>& shots,
                                             std::size_t k, std::size_t token_limit) {
    std::string premise = serialize_premise(example);
    std::string question = question_block(example);

    std::vector<PromptBundle> chain;
    chain.push_back(make_bundle(Strategy::Decomposers, kDecompose1Instruction, {}, 0,
                                premise, question, 1, token_limit));
    chain.push_back(make_bundle(Strategy::Decomposers,
                                std::string(kDecompose2Instruction) +
                                    "\nRelevant rows: {selected_rows}",
                                {}, 0, premise, question, 2, token_limit));
    chain.push_back(make_bundle(Strategy::Decomposers, kDecompose3Instruction, shots, k,
                                "{pruned_premise}\nSubquestions:\n{subquestions}\n",
                                question, 3, token_limit));
    return chain;
}

PromptBundle fill_decomposer_stage(const PromptBundle& bundle, const DecomposerFill& fill) {
    PromptBundle filled = bundle;
    const std::pair<std::string_view, const std::string*> slots[] = {
        {"{selected_rows}", &fill.selected_rows},
        {"{pruned_premise}", &fill.pruned_premise},
        {"{subquestions}", &fill.subquestions},
    };
    for (std::string* field :
         {&filled.instruction, &filled.query_premise, &filled.rendered}) {
        for (auto [key, value] : slots) {
            std::size_t at = field->find(key);
            if (at == std::string::npos) continue;
            if (value->empty())
                throw std::logic_error("decomposer stage sent before its input for " +
                                       std::string(key) + " exists");
            do {
                field->replace(at, key.size(), *value);
                at = field->find(key, at + value->size());
            } while (at != std::string::npos);
        }
    }
    filled.approx_tokens = approx_token_count(filled.rendered);
    return filled;
}

std::vector<std::size_t> parse_row_selection(std::string_view text,
                                             std::size_t n_data_rows) {
    std::vector<std::size_t> rows;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!std::isdigit(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        std::size_t n = 0;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i])))
            n = n * 10 + static_cast<std::size_t>(text[i++] - '0');
        if (n >= 1 && n <= n_data_rows) rows.push_back(n);
    }
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
    return rows;
}

std::string prune_premise(const core::HybridExample& example,
                          const std::vector<std::size_t>& keep_rows) {
    std::string out;
    for (const auto& line : example.pre_text) {
        out += line;
        out += '\n';
    }
    for (const auto& table : example.tables) {
        core::Table pruned;
        pruned.id = table.id;
        pruned.caption = table.caption;
        pruned.n_header_rows = std::min(table.n_header_rows, table.n_rows());
        std::size_t data_index = 0;  // 1-based over data rows
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            bool keep = r < table.n_header_rows;
            if (!keep) {
                ++data_index;
                keep = std::find(keep_rows.begin(), keep_rows.end(), data_index) !=
                       keep_rows.end();
            }
            if (keep) {
                pruned.grid.push_back(table.grid[r]);
                pruned.row_indent_levels.push_back(
                    r < table.row_indent_levels.size() ? table.row_indent_levels[r] : 0);
            }
        }
        append_table(out, pruned);
    }
    for (const auto& line : example.post_text) {
        out += line;
        out += '\n';
    }
    return out;
}

std::vector<Demonstration> load_shot_bank(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw core::SchemaError("cannot open shot bank: " + path, "path");
    std::vector<Demonstration> shots;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("premise") ||
            !j.contains("question") || !j.contains("target"))
            throw core::SchemaError("malformed demonstration at " + path + ":" +
                                        std::to_string(line_no),
                                    "target");
        shots.push_back(Demonstration{j["premise"].get<std::string>(),
                                      j["question"].get<std::string>(),
                                      j["target"].get<std::string>()});
    }
    return shots;
}

std::vector<Demonstration> load_shot_bank(const std::string& path, Strategy strategy) {
    std::vector<Demonstration> shots = load_shot_bank(path);
    for (std::size_t i = 0; i < shots.size(); ++i) {
        if (auto why = validate_demonstration(strategy, shots[i]))
            throw core::SchemaError("demonstration " + std::to_string(i + 1) + " in " +
                                        path + ": " + *why,
                                    "target");
    }
    return shots;
}

std::optional<std::string> validate_demonstration(Strategy strategy,
                                                  const Demonstration& d) {
    using response::Confidence;
    switch (strategy) {
        case Strategy::Direct: {
            auto r = response::parse(strategy, d.target);
            if (r.confidence != Confidence::Pattern)
                return "target is not a bare answer";
            return std::nullopt;
        }
        case Strategy::CoT:
        case Strategy::Decomposers:
            if (!response::find_sentinel_answer(d.target))
                return "target lacks a parseable \"The final answer is\" conclusion";
            return std::nullopt;
        case Strategy::PoT: {
            auto r = response::parse(strategy, d.target);
            if (!r.pot_value) return "target code does not execute";
            return std::nullopt;
        }
        case Strategy::EEDP: {
            response::ParsedEEDP e = response::parse_eedp(d.target);
            if (!e.domain_knowledge) return "target lacks a Domain Knowledge section";
            if (e.evidences.empty()) return "target lacks Gold Evidences";
            if (e.steps.empty()) return "target lacks Steps";
            if (!e.final_answer) return "target lacks a parseable final answer";
            return std::nullopt;
        }
    }
    return std::nullopt;
}

void save_shot_bank(const std::string& path, const std::vector<Demonstration>& shots) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw core::SchemaError("cannot write shot bank: " + path, "path");
    for (const auto& d : shots) {
        nlohmann::ordered_json j;
        j["premise"] = d.premise;
        j["question"] = d.question;
        j["target"] = d.target;
        out << j.dump() << '\n';
    }
}

std::string shot_bank_filename(core::Dataset dataset, Strategy strategy) {
    std::string name(core::dataset_name(dataset));
    std::transform(name.begin(), name.end(), name.begin(), [](char c) {
        return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    });
    return name + "_" + std::string(strategy_name(strategy)) + ".jsonl";
}

}  // namespace tabeval::prompting
