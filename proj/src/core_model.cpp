#include "tabeval/core_model.hpp"

#include "tabeval/csv.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace tabeval::core {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Replaces the U+2212 minus sign with the ASCII hyphen.
std::string normalize_minus(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
            static_cast<unsigned char>(s[i + 1]) == 0x88 &&
            static_cast<unsigned char>(s[i + 2]) == 0x92) {
            out.push_back('-');
            i += 2;
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

std::optional<Scale> scale_from_word(std::string_view word) {
    std::string w = to_lower(word);
    if (w == "thousand" || w == "thousands") return Scale::Thousand;
    if (w == "million" || w == "millions") return Scale::Million;
    if (w == "billion" || w == "billions") return Scale::Billion;
    if (w == "percent" || w == "percentage") return Scale::Percent;
    return std::nullopt;
}

// Validates a bare numeric token (commas must group thousands) and returns
// it with commas removed, or nullopt.
std::optional<std::string> normalize_digit_token(std::string_view token) {
    if (token.empty()) return std::nullopt;
    std::string out;
    std::size_t i = 0;
    bool has_comma = token.find(',') != std::string_view::npos;
    if (has_comma) {
        // Leading group of 1-3 digits, then ",ddd" groups.
        std::size_t lead = 0;
        while (lead < token.size() && lead < 3 && std::isdigit(static_cast<unsigned char>(token[lead]))) ++lead;
        if (lead == 0) return std::nullopt;
        out.append(token.substr(0, lead));
        i = lead;
        while (i < token.size() && token[i] == ',') {
            for (std::size_t k = 1; k <= 3; ++k) {
                if (i + k >= token.size() || !std::isdigit(static_cast<unsigned char>(token[i + k])))
                    return std::nullopt;
            }
            out.append(token.substr(i + 1, 3));
            i += 4;
        }
    } else {
        while (i < token.size() && std::isdigit(static_cast<unsigned char>(token[i]))) {
            out.push_back(token[i]);
            ++i;
        }
    }
    if (i < token.size() && token[i] == '.') {
        out.push_back('.');
        ++i;
        std::size_t frac = 0;
        while (i < token.size() && std::isdigit(static_cast<unsigned char>(token[i]))) {
            out.push_back(token[i]);
            ++i;
            ++frac;
        }
        if (frac == 0) return std::nullopt;
    }
    if (i != token.size()) return std::nullopt;
    if (out.empty() || out == ".") return std::nullopt;
    if (out.front() == '.') out.insert(out.begin(), '0');
    return out;
}

}  // namespace

std::string_view dataset_name(Dataset d) {
    switch (d) {
        case Dataset::FinQA: return "FinQA";
        case Dataset::TATQA: return "TATQA";
        case Dataset::ConvFinQA: return "ConvFinQA";
        case Dataset::Multihiertt: return "Multihiertt";
    }
    return "FinQA";
}

std::optional<Dataset> dataset_from_name(std::string_view name) {
    std::string n = to_lower(name);
    if (n == "finqa") return Dataset::FinQA;
    if (n == "tatqa" || n == "tat-qa") return Dataset::TATQA;
    if (n == "convfinqa") return Dataset::ConvFinQA;
    if (n == "multihiertt") return Dataset::Multihiertt;
    return std::nullopt;
}

std::string_view scale_name(Scale s) {
    switch (s) {
        case Scale::Unit: return "unit";
        case Scale::Thousand: return "thousand";
        case Scale::Million: return "million";
        case Scale::Billion: return "billion";
        case Scale::Percent: return "percent";
        case Scale::None: return "none";
    }
    return "none";
}

std::optional<Scale> scale_from_name(std::string_view name) {
    std::string n = to_lower(name);
    if (n == "unit") return Scale::Unit;
    if (n == "thousand") return Scale::Thousand;
    if (n == "million") return Scale::Million;
    if (n == "billion") return Scale::Billion;
    if (n == "percent") return Scale::Percent;
    if (n == "none") return Scale::None;
    return std::nullopt;
}

Decimal scale_multiplier(Scale s) {
    switch (s) {
        case Scale::Thousand: return Decimal(1000);
        case Scale::Million: return Decimal(1000000);
        case Scale::Billion: return Decimal(1000000000);
        default: return Decimal(1);
    }
}

bool is_empty_cell_text(std::string_view raw) {
    std::string t = trim(raw);
    if (t.empty() || t == "-" || t == "\xE2\x80\x94" /* em dash */ ||
        t == "\xE2\x80\x93" /* en dash */)
        return true;
    std::string lower = to_lower(t);
    return lower == "n/a";
}

std::optional<NumericCell> parse_numeric_cell(std::string_view raw) {
    std::string s = normalize_minus(trim(raw));
    if (s.empty() || is_empty_cell_text(s)) return std::nullopt;

    bool negative = false;
    bool percent = false;
    std::optional<Scale> word_scale;

    if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
        negative = true;
        s = trim(std::string_view(s).substr(1, s.size() - 2));
    }
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        if (s.front() == '-') negative = !negative;
        s = trim(std::string_view(s).substr(1));
    }
    if (!s.empty() && s.front() == '$') {
        s = trim(std::string_view(s).substr(1));
    }
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {  // "$-4800"
        if (s.front() == '-') negative = !negative;
        s = trim(std::string_view(s).substr(1));
    }
    if (s.size() >= 2 && s.front() == '(' && s.back() == ')') {
        negative = true;
        s = trim(std::string_view(s).substr(1, s.size() - 2));
    }

    // Trailing '%' and/or scale word, in either order.
    for (int pass = 0; pass < 2; ++pass) {
        if (!s.empty() && s.back() == '%') {
            percent = true;
            s = trim(std::string_view(s).substr(0, s.size() - 1));
            continue;
        }
        std::size_t sp = s.find_last_of(" \t");
        if (sp != std::string::npos) {
            if (auto sc = scale_from_word(std::string_view(s).substr(sp + 1))) {
                word_scale = sc;
                s = trim(std::string_view(s).substr(0, sp));
                continue;
            }
        }
        break;
    }

    auto digits = normalize_digit_token(s);
    if (!digits) return std::nullopt;
    auto value = parse_decimal(*digits);
    if (!value) return std::nullopt;

    NumericCell cell;
    cell.value = negative ? -*value : *value;
    if (percent) {
        cell.scale = Scale::Percent;
        cell.is_percent = true;
    } else if (word_scale) {
        cell.scale = *word_scale;
        cell.is_percent = *word_scale == Scale::Percent;
    } else {
        cell.scale = Scale::Unit;
    }
    std::size_t dot = digits->find('.');
    cell.decimals = dot == std::string::npos ? 0 : static_cast<int>(digits->size() - dot - 1);
    return cell;
}

Cell make_cell(std::size_t row, std::size_t col, std::string raw_text) {
    Cell c;
    c.row = row;
    c.col = col;
    c.raw_text = std::move(raw_text);
    c.is_empty = is_empty_cell_text(c.raw_text);
    if (!c.is_empty) c.numeric = parse_numeric_cell(c.raw_text);
    return c;
}

void validate_table(const Table& table) {
    for (const auto& row : table.grid) {
        if (row.size() != table.n_cols())
            throw SchemaError("table grid is not rectangular", "table.grid");
    }
    if (!table.grid.empty() && table.n_header_rows >= table.n_rows())
        throw SchemaError("n_header_rows must be less than total rows", "table.n_header_rows");
    if (table.row_indent_levels.size() != table.n_rows())
        throw SchemaError("row_indent_levels length must equal row count", "table.row_indent_levels");
    for (int lvl : table.row_indent_levels) {
        if (lvl < 0) throw SchemaError("row indent level must be >= 0", "table.row_indent_levels");
    }
}

std::string answer_to_string(const AnswerValue& v) {
    if (const auto* n = std::get_if<NumberValue>(&v)) {
        std::string out = to_canonical_string(n->value);
        if (n->is_percent) out += "%";
        else if (n->scale == Scale::Thousand) out += " thousand";
        else if (n->scale == Scale::Million) out += " million";
        else if (n->scale == Scale::Billion) out += " billion";
        return out;
    }
    if (const auto* s = std::get_if<SpanValue>(&v)) return s->text;
    return std::get<BoolValue>(v).value ? "yes" : "no";
}

AnswerValue parse_answer_text(std::string_view text) {
    std::string t = trim(text);
    // Strip wrapping markup and trailing sentence terminators until stable
    // ("**-22.95%**." needs both phases twice).
    for (bool changed = true; changed;) {
        changed = false;
        while (!t.empty() && (t.front() == '*' || t.front() == '_' || t.front() == '`')) {
            t.erase(0, 1);
            changed = true;
        }
        while (!t.empty() && (t.back() == '*' || t.back() == '_' || t.back() == '`')) {
            t.pop_back();
            changed = true;
        }
        t = trim(t);
        if (!t.empty() && (t.back() == '.' || t.back() == '!')) {
            // Keep the dot when it is part of the number ("12." is not).
            std::string without = trim(std::string_view(t).substr(0, t.size() - 1));
            if (!without.empty()) {
                t = without;
                changed = true;
            }
        }
    }
    std::string lower = to_lower(t);
    if (lower == "yes" || lower == "true") return BoolValue{true};
    if (lower == "no" || lower == "false") return BoolValue{false};
    if (auto numeric = parse_numeric_cell(t)) {
        return NumberValue{numeric->value, numeric->scale, numeric->is_percent, numeric->decimals};
    }
    return SpanValue{t};
}

const Table& select_primary_table(const HybridExample& example) {
    if (example.tables.empty()) throw SchemaError("example has no tables", "tables");
    const Table* best = &example.tables.front();
    for (const auto& t : example.tables) {
        if (t.n_rows() > best->n_rows()) best = &t;
    }
    return *best;
}

std::vector<Decimal> extract_numbers(std::string_view text) {
    std::string s = normalize_minus(text);
    std::vector<Decimal> out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            ++i;
            continue;
        }
        auto digit_at = [&](std::size_t pos) {
            return pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]));
        };
        std::size_t start = i;
        std::size_t end = i;
        while (end < s.size()) {
            char c = s[end];
            if (std::isdigit(static_cast<unsigned char>(c))) {
                ++end;
            } else if (c == ',' && digit_at(end + 1) && digit_at(end + 2) && digit_at(end + 3) &&
                       !digit_at(end + 4)) {
                // Accept a comma only when exactly a 3-digit group follows.
                end += 4;
            } else if (c == '.' && digit_at(end + 1)) {
                ++end;
                while (digit_at(end)) ++end;
                break;
            } else {
                break;
            }
        }
        std::string token = s.substr(start, end - start);
        bool negative = false;
        std::size_t p = start;
        while (p > 0 && (s[p - 1] == '$' || s[p - 1] == '(')) --p;
        if (p > 0 && s[p - 1] == '-') negative = true;
        if (auto normalized = normalize_digit_token(token)) {
            if (auto value = parse_decimal(*normalized)) {
                out.push_back(negative ? -*value : *value);
            }
        }
        i = end;
    }
    return out;
}

std::vector<Decimal> evidence_values(const HybridExample& example, const EvidenceRef& ref) {
    if (const auto* cell_ref = std::get_if<TableCellRef>(&ref)) {
        for (const auto& table : example.tables) {
            if (table.id != cell_ref->table_id) continue;
            if (cell_ref->row >= table.n_rows() || cell_ref->col >= table.n_cols())
                throw SchemaError("evidence cell out of range", "gold.evidences");
            const Cell& cell = table.grid[cell_ref->row][cell_ref->col];
            if (cell.numeric) return {cell.numeric->value};
            return extract_numbers(cell.raw_text);
        }
        throw SchemaError("evidence references unknown table: " + cell_ref->table_id,
                          "gold.evidences");
    }
    const auto& span = std::get<TextSpanRef>(ref);
    const auto& lines = span.source == TextSource::Pre ? example.pre_text : example.post_text;
    std::string joined;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) joined += "\n";
        joined += lines[i];
    }
    if (span.char_end > joined.size() || span.char_start > span.char_end)
        throw SchemaError("evidence span out of range", "gold.evidences");
    return extract_numbers(std::string_view(joined).substr(span.char_start, span.char_end - span.char_start));
}

SchemaError::SchemaError(std::string message, std::string field)
    : std::runtime_error(message + " (field: " + field + ")"), field_(std::move(field)) {}

// ---------------------------------------------------------------------------
// Normalized JSONL format
// ---------------------------------------------------------------------------

namespace {

ordered_json answer_to_json(const AnswerValue& v) {
    ordered_json j;
    if (const auto* n = std::get_if<NumberValue>(&v)) {
        j["kind"] = "number";
        j["value"] = to_canonical_string(n->value);
        j["scale"] = std::string(scale_name(n->scale));
        j["percent"] = n->is_percent;
        if (n->decimals) j["decimals"] = *n->decimals;
        else j["decimals"] = nullptr;
    } else if (const auto* s = std::get_if<SpanValue>(&v)) {
        j["kind"] = "span";
        j["text"] = s->text;
    } else {
        j["kind"] = "bool";
        j["value"] = std::get<BoolValue>(v).value;
    }
    return j;
}

AnswerValue answer_from_json(const json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "number") {
        NumberValue n;
        auto value = parse_decimal(j.at("value").get<std::string>());
        if (!value) throw SchemaError("bad decimal literal", "answer.value");
        n.value = *value;
        n.scale = scale_from_name(j.at("scale").get<std::string>()).value_or(Scale::Unit);
        n.is_percent = j.at("percent").get<bool>();
        if (j.contains("decimals") && !j.at("decimals").is_null())
            n.decimals = j.at("decimals").get<int>();
        return n;
    }
    if (kind == "span") return SpanValue{j.at("text").get<std::string>()};
    if (kind == "bool") return BoolValue{j.at("value").get<bool>()};
    throw SchemaError("unknown answer kind: " + kind, "answer.kind");
}

ordered_json evidence_to_json(const EvidenceRef& ref) {
    ordered_json j;
    if (const auto* c = std::get_if<TableCellRef>(&ref)) {
        j["kind"] = "table_cell";
        j["table"] = c->table_id;
        j["row"] = c->row;
        j["col"] = c->col;
    } else {
        const auto& s = std::get<TextSpanRef>(ref);
        j["kind"] = "text_span";
        j["source"] = s.source == TextSource::Pre ? "pre" : "post";
        j["start"] = s.char_start;
        j["end"] = s.char_end;
    }
    return j;
}

EvidenceRef evidence_from_json(const json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "table_cell") {
        TableCellRef c;
        c.table_id = j.at("table").get<std::string>();
        c.row = j.at("row").get<std::size_t>();
        c.col = j.at("col").get<std::size_t>();
        return c;
    }
    if (kind == "text_span") {
        TextSpanRef s;
        s.source = j.at("source").get<std::string>() == "post" ? TextSource::Post : TextSource::Pre;
        s.char_start = j.at("start").get<std::size_t>();
        s.char_end = j.at("end").get<std::size_t>();
        return s;
    }
    throw SchemaError("unknown evidence kind: " + kind, "gold.evidences.kind");
}

ordered_json table_to_json(const Table& t) {
    ordered_json j;
    j["id"] = t.id;
    if (t.caption) j["caption"] = *t.caption;
    else j["caption"] = nullptr;
    j["n_header_rows"] = t.n_header_rows;
    j["row_indents"] = t.row_indent_levels;
    ordered_json grid = ordered_json::array();
    for (const auto& row : t.grid) {
        ordered_json r = ordered_json::array();
        for (const auto& cell : row) r.push_back(cell.raw_text);
        grid.push_back(std::move(r));
    }
    j["grid"] = std::move(grid);
    return j;
}

Table table_from_json(const json& j) {
    Table t;
    t.id = j.at("id").get<std::string>();
    if (j.contains("caption") && !j.at("caption").is_null())
        t.caption = j.at("caption").get<std::string>();
    t.n_header_rows = j.at("n_header_rows").get<std::size_t>();
    t.row_indent_levels = j.at("row_indents").get<std::vector<int>>();
    std::size_t r = 0;
    for (const auto& row : j.at("grid")) {
        std::vector<Cell> cells;
        std::size_t c = 0;
        for (const auto& text : row) cells.push_back(make_cell(r, c++, text.get<std::string>()));
        t.grid.push_back(std::move(cells));
        ++r;
    }
    validate_table(t);
    return t;
}

ordered_json labels_to_json(const HumanLabels& l) {
    ordered_json j;
    j["category"] = l.category ? ordered_json(*l.category) : ordered_json(nullptr);
    j["n_steps"] = l.n_steps ? ordered_json(*l.n_steps) : ordered_json(nullptr);
    j["hierarchy_depth"] = l.hierarchy_depth ? ordered_json(*l.hierarchy_depth) : ordered_json(nullptr);
    j["empty_cell_pct"] = l.empty_cell_pct ? ordered_json(*l.empty_cell_pct) : ordered_json(nullptr);
    return j;
}

HumanLabels labels_from_json(const json& j) {
    HumanLabels l;
    if (j.contains("category") && !j.at("category").is_null())
        l.category = j.at("category").get<std::string>();
    if (j.contains("n_steps") && !j.at("n_steps").is_null())
        l.n_steps = j.at("n_steps").get<int>();
    if (j.contains("hierarchy_depth") && !j.at("hierarchy_depth").is_null())
        l.hierarchy_depth = j.at("hierarchy_depth").get<int>();
    if (j.contains("empty_cell_pct") && !j.at("empty_cell_pct").is_null())
        l.empty_cell_pct = j.at("empty_cell_pct").get<double>();
    return l;
}

}  // namespace

std::string to_jsonl(const HybridExample& e) {
    ordered_json j;
    j["id"] = e.id;
    j["dataset"] = std::string(dataset_name(e.question.dataset));
    j["pre_text"] = e.pre_text;
    j["post_text"] = e.post_text;
    ordered_json tables = ordered_json::array();
    for (const auto& t : e.tables) tables.push_back(table_to_json(t));
    j["tables"] = std::move(tables);
    ordered_json q;
    q["id"] = e.question.id;
    q["text"] = e.question.text;
    ordered_json turns = ordered_json::array();
    for (const auto& turn : e.question.turn_history)
        turns.push_back(ordered_json::array({turn.question_text, turn.gold_answer_text}));
    q["turns"] = std::move(turns);
    j["question"] = std::move(q);
    ordered_json g;
    g["answer"] = e.gold.answer ? answer_to_json(*e.gold.answer) : ordered_json(nullptr);
    g["program"] = e.gold.program_text ? ordered_json(*e.gold.program_text) : ordered_json(nullptr);
    ordered_json ev = ordered_json::array();
    for (const auto& r : e.gold.evidences) ev.push_back(evidence_to_json(r));
    g["evidences"] = std::move(ev);
    g["scale_hint"] = e.gold.answer_scale_hint ? ordered_json(*e.gold.answer_scale_hint) : ordered_json(nullptr);
    j["gold"] = std::move(g);
    j["labels"] = e.human_labels ? labels_to_json(*e.human_labels) : ordered_json(nullptr);
    return j.dump();
}

HybridExample from_jsonl(const std::string& line) {
    json j = json::parse(line);
    HybridExample e;
    e.id = j.at("id").get<std::string>();
    auto ds = dataset_from_name(j.at("dataset").get<std::string>());
    if (!ds) throw SchemaError("unknown dataset name", "dataset");
    e.pre_text = j.at("pre_text").get<std::vector<std::string>>();
    e.post_text = j.at("post_text").get<std::vector<std::string>>();
    for (const auto& tj : j.at("tables")) e.tables.push_back(table_from_json(tj));
    if (e.tables.empty()) throw SchemaError("tables must be nonempty", "tables");
    const auto& q = j.at("question");
    e.question.id = q.at("id").get<std::string>();
    e.question.text = q.at("text").get<std::string>();
    e.question.dataset = *ds;
    for (const auto& turn : q.at("turns"))
        e.question.turn_history.push_back({turn.at(0).get<std::string>(), turn.at(1).get<std::string>()});
    const auto& g = j.at("gold");
    if (!g.at("answer").is_null()) e.gold.answer = answer_from_json(g.at("answer"));
    if (!g.at("program").is_null()) e.gold.program_text = g.at("program").get<std::string>();
    for (const auto& r : g.at("evidences")) e.gold.evidences.push_back(evidence_from_json(r));
    if (!g.at("scale_hint").is_null()) e.gold.answer_scale_hint = g.at("scale_hint").get<std::string>();
    if (!e.gold.answer && !e.gold.program_text)
        throw SchemaError("gold must carry an answer or a program", "gold");
    if (j.contains("labels") && !j.at("labels").is_null())
        e.human_labels = labels_from_json(j.at("labels"));
    return e;
}

bool examples_equal(const HybridExample& a, const HybridExample& b) {
    return to_jsonl(a) == to_jsonl(b);
}

std::vector<HybridExample> load_normalized(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::vector<HybridExample> out;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        out.push_back(from_jsonl(line));
    }
    return out;
}

void save_normalized(const std::vector<HybridExample>& examples, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    for (const auto& e : examples) out << to_jsonl(e) << "\n";
}

// ---------------------------------------------------------------------------
// Raw dataset adapters
// ---------------------------------------------------------------------------

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& err) {
        throw SchemaError(std::string("invalid JSON: ") + err.what(), "<root>");
    }
    return j;
}

Table grid_to_table(const json& grid, std::string id, std::size_t n_header_rows,
                    const std::vector<int>* indents) {
    Table t;
    t.id = std::move(id);
    std::size_t r = 0;
    for (const auto& row : grid) {
        std::vector<Cell> cells;
        std::size_t c = 0;
        for (const auto& text : row) {
            std::string raw = text.is_string() ? text.get<std::string>() : text.dump();
            cells.push_back(make_cell(r, c++, std::move(raw)));
        }
        t.grid.push_back(std::move(cells));
        ++r;
    }
    t.n_header_rows = t.grid.empty() ? 0 : std::min(n_header_rows, t.n_rows() - 1);
    if (indents && indents->size() == t.n_rows()) {
        t.row_indent_levels = *indents;
    } else {
        // Fall back to leading-whitespace depth of the row label.
        for (const auto& row : t.grid) {
            int spaces = 0;
            if (!row.empty()) {
                const std::string& label = row.front().raw_text;
                while (spaces < static_cast<int>(label.size()) && label[spaces] == ' ') ++spaces;
            }
            t.row_indent_levels.push_back(spaces / 2);
        }
    }
    validate_table(t);
    return t;
}

AnswerValue answer_from_raw(const json& j, const std::optional<std::string>& scale_hint) {
    AnswerValue v;
    if (j.is_number()) {
        v = parse_answer_text(j.dump());
    } else if (j.is_string()) {
        v = parse_answer_text(j.get<std::string>());
    } else if (j.is_boolean()) {
        v = BoolValue{j.get<bool>()};
    } else if (j.is_array()) {
        std::string joined;
        for (const auto& item : j) {
            if (!joined.empty()) joined += "; ";
            joined += item.is_string() ? item.get<std::string>() : item.dump();
        }
        v = parse_answer_text(joined);
    } else {
        throw SchemaError("unsupported answer JSON type", "qa.answer");
    }
    if (scale_hint && !scale_hint->empty()) {
        if (auto* n = std::get_if<NumberValue>(&v)) {
            if (auto sc = scale_from_word(*scale_hint)) {
                if (*sc == Scale::Percent) {
                    n->is_percent = true;
                    n->scale = Scale::Percent;
                } else if (n->scale == Scale::Unit) {
                    n->scale = *sc;
                }
            }
        }
    }
    return v;
}

// gold_inds keys: "text_<i>" (pre+post line index), "table_<row>" (numeric
// cells of that row in the primary table) or "cell_<row>_<col>".
std::vector<EvidenceRef> evidences_from_gold_inds(const json& gold_inds,
                                                  const std::vector<std::string>& pre_text,
                                                  const std::vector<std::string>& post_text,
                                                  const Table& table) {
    std::vector<std::string> keys;
    if (gold_inds.is_object()) {
        for (auto it = gold_inds.begin(); it != gold_inds.end(); ++it) keys.push_back(it.key());
    } else if (gold_inds.is_array()) {
        for (const auto& k : gold_inds) keys.push_back(k.get<std::string>());
    } else if (!gold_inds.is_null()) {
        throw SchemaError("gold_inds must be object or array", "qa.gold_inds");
    }
    std::sort(keys.begin(), keys.end());

    auto line_span = [](const std::vector<std::string>& lines, std::size_t index,
                        TextSource source) -> EvidenceRef {
        std::size_t start = 0;
        for (std::size_t i = 0; i < index; ++i) start += lines[i].size() + 1;
        return TextSpanRef{source, start, start + lines[index].size()};
    };

    std::vector<EvidenceRef> out;
    for (const auto& key : keys) {
        if (key.rfind("text_", 0) == 0) {
            std::size_t idx = std::stoul(key.substr(5));
            if (idx < pre_text.size()) {
                out.push_back(line_span(pre_text, idx, TextSource::Pre));
            } else if (idx - pre_text.size() < post_text.size()) {
                out.push_back(line_span(post_text, idx - pre_text.size(), TextSource::Post));
            } else {
                throw SchemaError("text evidence index out of range: " + key, "qa.gold_inds");
            }
        } else if (key.rfind("cell_", 0) == 0) {
            std::size_t sep = key.find('_', 5);
            if (sep == std::string::npos) throw SchemaError("bad cell key: " + key, "qa.gold_inds");
            std::size_t row = std::stoul(key.substr(5, sep - 5));
            std::size_t col = std::stoul(key.substr(sep + 1));
            if (row >= table.n_rows() || col >= table.n_cols())
                throw SchemaError("cell evidence out of range: " + key, "qa.gold_inds");
            out.push_back(TableCellRef{table.id, row, col});
        } else if (key.rfind("table_", 0) == 0) {
            std::size_t row = std::stoul(key.substr(6));
            if (row >= table.n_rows())
                throw SchemaError("table evidence row out of range: " + key, "qa.gold_inds");
            for (std::size_t c = 0; c < table.n_cols(); ++c) {
                if (table.grid[row][c].numeric) out.push_back(TableCellRef{table.id, row, c});
            }
        } else {
            throw SchemaError("unknown gold_inds key: " + key, "qa.gold_inds");
        }
    }
    return out;
}

std::vector<int> read_indents(const json& record, const char* key) {
    std::vector<int> indents;
    if (record.contains(key)) indents = record.at(key).get<std::vector<int>>();
    return indents;
}

std::vector<HybridExample> load_finqa(const json& root) {
    if (!root.is_array()) throw SchemaError("FinQA file must be a JSON array", "<root>");
    std::vector<HybridExample> out;
    for (const auto& record : root) {
        HybridExample e;
        e.id = record.at("id").get<std::string>();
        e.pre_text = record.value("pre_text", std::vector<std::string>{});
        e.post_text = record.value("post_text", std::vector<std::string>{});
        std::size_t headers = record.value("n_header_rows", std::size_t{1});
        auto indents = read_indents(record, "row_indents");
        e.tables.push_back(grid_to_table(record.at("table"), "t0", headers,
                                         indents.empty() ? nullptr : &indents));
        const auto& qa = record.at("qa");
        e.question.id = e.id;
        e.question.text = qa.at("question").get<std::string>();
        e.question.dataset = Dataset::FinQA;
        if (qa.contains("program") && !qa.at("program").is_null())
            e.gold.program_text = qa.at("program").get<std::string>();
        if (qa.contains("exe_ans") && !qa.at("exe_ans").is_null())
            e.gold.answer = answer_from_raw(qa.at("exe_ans"), std::nullopt);
        if (!e.gold.answer && !e.gold.program_text)
            throw SchemaError("record needs exe_ans or program", "qa");
        if (qa.contains("gold_inds"))
            e.gold.evidences = evidences_from_gold_inds(qa.at("gold_inds"), e.pre_text,
                                                        e.post_text, e.tables.front());
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<HybridExample> load_tatqa(const json& root) {
    if (!root.is_array()) throw SchemaError("TATQA file must be a JSON array", "<root>");
    std::vector<HybridExample> out;
    for (const auto& block : root) {
        const auto& table_obj = block.at("table");
        Table table = grid_to_table(table_obj.at("table"), table_obj.value("uid", "t0"), 1, nullptr);

        std::vector<std::pair<int, std::string>> paras;
        for (const auto& p : block.at("paragraphs"))
            paras.emplace_back(p.value("order", 0), p.at("text").get<std::string>());
        std::sort(paras.begin(), paras.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        for (const auto& q : block.at("questions")) {
            HybridExample e;
            e.id = q.at("uid").get<std::string>();
            for (const auto& [order, text] : paras) e.pre_text.push_back(text);
            e.tables.push_back(table);
            e.question.id = e.id;
            e.question.text = q.at("question").get<std::string>();
            e.question.dataset = Dataset::TATQA;
            std::optional<std::string> scale;
            if (q.contains("scale") && q.at("scale").is_string()) {
                std::string s = q.at("scale").get<std::string>();
                if (!s.empty()) scale = s;
            }
            e.gold.answer_scale_hint = scale;
            e.gold.answer = answer_from_raw(q.at("answer"), scale);
            if (q.contains("derivation") && q.at("derivation").is_string()) {
                std::string d = q.at("derivation").get<std::string>();
                if (!trim(d).empty()) e.gold.program_text = d;
            }
            out.push_back(std::move(e));
        }
    }
    return out;
}

std::vector<HybridExample> load_convfinqa(const json& root) {
    if (!root.is_array()) throw SchemaError("ConvFinQA file must be a JSON array", "<root>");
    std::vector<HybridExample> out;
    for (const auto& record : root) {
        std::string id = record.at("id").get<std::string>();
        const auto& ann = record.at("annotation");
        auto questions = ann.at("dialogue_break").get<std::vector<std::string>>();
        const auto& answers = ann.at("exe_ans_list");
        if (answers.size() != questions.size())
            throw SchemaError("exe_ans_list length mismatch", "annotation.exe_ans_list");
        std::vector<std::string> programs;
        if (ann.contains("turn_program_list"))
            programs = ann.at("turn_program_list").get<std::vector<std::string>>();

        std::size_t headers = record.value("n_header_rows", std::size_t{1});
        auto indents = read_indents(record, "row_indents");
        Table table = grid_to_table(record.at("table"), "t0", headers,
                                    indents.empty() ? nullptr : &indents);
        auto pre = record.value("pre_text", std::vector<std::string>{});
        auto post = record.value("post_text", std::vector<std::string>{});

        for (std::size_t turn = 0; turn < questions.size(); ++turn) {
            HybridExample e;
            e.id = id + "_turn" + std::to_string(turn);
            e.pre_text = pre;
            e.post_text = post;
            e.tables.push_back(table);
            e.question.id = e.id;
            e.question.text = questions[turn];
            e.question.dataset = Dataset::ConvFinQA;
            for (std::size_t prev = 0; prev < turn; ++prev) {
                AnswerValue pa = answer_from_raw(answers[prev], std::nullopt);
                e.question.turn_history.push_back({questions[prev], answer_to_string(pa)});
            }
            e.gold.answer = answer_from_raw(answers[turn], std::nullopt);
            if (turn < programs.size() && !trim(programs[turn]).empty())
                e.gold.program_text = programs[turn];
            out.push_back(std::move(e));
        }
    }
    return out;
}

std::vector<HybridExample> load_multihiertt(const json& root) {
    if (!root.is_array()) throw SchemaError("Multihiertt file must be a JSON array", "<root>");
    std::vector<HybridExample> out;
    for (const auto& record : root) {
        HybridExample e;
        e.id = record.at("uid").get<std::string>();
        e.pre_text = record.value("paragraphs", std::vector<std::string>{});
        const auto& tables = record.at("tables");
        std::vector<std::vector<int>> all_indents;
        if (record.contains("row_indents"))
            all_indents = record.at("row_indents").get<std::vector<std::vector<int>>>();
        std::vector<std::size_t> header_counts;
        if (record.contains("n_header_rows"))
            header_counts = record.at("n_header_rows").get<std::vector<std::size_t>>();
        std::size_t index = 0;
        for (const auto& grid : tables) {
            std::size_t headers = index < header_counts.size() ? header_counts[index] : 1;
            const std::vector<int>* indents =
                index < all_indents.size() ? &all_indents[index] : nullptr;
            e.tables.push_back(grid_to_table(grid, "t" + std::to_string(index), headers, indents));
            ++index;
        }
        if (e.tables.empty()) throw SchemaError("record has no tables", "tables");
        const auto& qa = record.at("qa");
        e.question.id = e.id;
        e.question.text = qa.at("question").get<std::string>();
        e.question.dataset = Dataset::Multihiertt;
        if (qa.contains("program") && !qa.at("program").is_null()) {
            std::string p = qa.at("program").get<std::string>();
            if (!trim(p).empty()) e.gold.program_text = p;
        }
        if (qa.contains("answer") && !qa.at("answer").is_null())
            e.gold.answer = answer_from_raw(qa.at("answer"), std::nullopt);
        if (!e.gold.answer && !e.gold.program_text)
            throw SchemaError("record needs answer or program", "qa");
        if (qa.contains("gold_inds"))
            e.gold.evidences = evidences_from_gold_inds(qa.at("gold_inds"), e.pre_text,
                                                        e.post_text,
                                                        select_primary_table(e));
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace

std::vector<HybridExample> load_dataset(const std::string& path, Dataset dataset) {
    json root = load_json_file(path);
    std::vector<HybridExample> out;
    switch (dataset) {
        case Dataset::FinQA: out = load_finqa(root); break;
        case Dataset::TATQA: out = load_tatqa(root); break;
        case Dataset::ConvFinQA: out = load_convfinqa(root); break;
        case Dataset::Multihiertt: out = load_multihiertt(root); break;
    }
    std::set<std::string> ids;
    for (const auto& e : out) {
        if (!ids.insert(e.id).second)
            throw SchemaError("duplicate example id: " + e.id, "id");
    }
    return out;
}

std::map<std::string, HumanLabels> load_human_labels(const std::string& path) {
    auto rows = csv::parse(csv::read_file(path));
    if (rows.empty()) return {};
    std::map<std::string, HumanLabels> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() < 5) throw SchemaError("label row needs 5 columns (line " +
                                              std::to_string(i + 1) + ")", "labels.csv");
        HumanLabels l;
        if (!row[1].empty()) l.category = row[1];
        if (!row[2].empty()) l.n_steps = std::stoi(row[2]);
        if (!row[3].empty()) l.hierarchy_depth = std::stoi(row[3]);
        if (!row[4].empty()) l.empty_cell_pct = std::stod(row[4]);
        out[row[0]] = l;
    }
    return out;
}

void attach_human_labels(std::vector<HybridExample>& examples,
                         const std::map<std::string, HumanLabels>& labels) {
    for (auto& e : examples) {
        auto it = labels.find(e.id);
        if (it != labels.end()) e.human_labels = it->second;
    }
}

}  // namespace tabeval::core
