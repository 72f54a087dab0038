#include "tabeval/metadata.hpp"

#include "tabeval/csv.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <sstream>

namespace tabeval::metadata {

namespace {

std::string to_lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// Cue matching: the phrase must start at a word boundary ("exchange" does
// not cue "change"). exact additionally requires the phrase to end the word,
// with an optional plural 's' ("assuming" does not cue "sum").
bool has_cue(const std::string& text, std::string_view phrase, bool exact = false) {
    auto alpha = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; };
    std::size_t pos = 0;
    while ((pos = text.find(phrase, pos)) != std::string::npos) {
        bool left_ok = pos == 0 || !alpha(text[pos - 1]);
        bool right_ok = true;
        if (exact) {
            std::size_t end = pos + phrase.size();
            if (end < text.size() && text[end] == 's') ++end;
            right_ok = end >= text.size() || !alpha(text[end]);
        }
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

struct Cue {
    std::string_view phrase;
    bool exact = false;
};

bool any_cue(const std::string& text, std::initializer_list<Cue> cues) {
    for (const Cue& c : cues)
        if (has_cue(text, c.phrase, c.exact)) return true;
    return false;
}

}  // namespace

std::string_view category_name(Category c) {
    switch (c) {
        case Category::Sum: return "Sum";
        case Category::Difference: return "Difference";
        case Category::Product: return "Product";
        case Category::Division: return "Division";
        case Category::Ratio: return "Ratio";
        case Category::ChangeRatio: return "ChangeRatio";
        case Category::Range: return "Range";
        case Category::Compare: return "Compare";
        case Category::Average: return "Average";
        case Category::InDomainInfo: return "InDomainInfo";
        case Category::Time: return "Time";
        case Category::Counting: return "Counting";
        case Category::Other: return "Other";
    }
    return "Other";
}

std::optional<Category> category_from_name(std::string_view name) {
    static const std::array<Category, 13> all = {
        Category::Sum, Category::Difference, Category::Product, Category::Division,
        Category::Ratio, Category::ChangeRatio, Category::Range, Category::Compare,
        Category::Average, Category::InDomainInfo, Category::Time, Category::Counting,
        Category::Other,
    };
    std::string n = to_lower(name);
    // Tolerate the spaced/hyphenated spellings used in hand labels.
    if (n == "change ratio" || n == "change-ratio" || n == "change in ratio") n = "changeratio";
    if (n == "in-domain-info" || n == "need-in-domain-info" || n == "in domain info")
        n = "indomaininfo";
    for (Category c : all) {
        if (to_lower(category_name(c)) == n) return c;
    }
    return std::nullopt;
}

namespace {

// Category suggested by the question wording alone, in priority order.
std::optional<Category> keyword_category(const std::string& q) {
    if (any_cue(q, {{"annualized"}, {"return on investment"}, {"roi", true},
                    {"cost of goods sold"}, {"cogs", true}, {"amortization"}, {"amortized"},
                    {"shareholder return"}, {"cumulative total return"}, {"dividend yield"},
                    {"book value per share"}, {"net margin"}, {"profit margin"},
                    {"operating margin"}, {"interest coverage"}, {"debt-to-equity"},
                    {"debt to equity"}}))
        return Category::InDomainInfo;
    bool mentions_change = any_cue(q, {{"change"}, {"increase"}, {"decrease"}, {"decline"},
                                       {"drop"}, {"growth"}, {"grew", true}, {"rose", true},
                                       {"fell", true}});
    bool mentions_fraction = any_cue(q, {{"percent"}, {"%"}, {"ratio"}, {"rate", true},
                                         {"proportion"}, {"fraction"}});
    if (mentions_change && mentions_fraction) return Category::ChangeRatio;
    if (mentions_fraction || any_cue(q, {{"portion of"}, {"share of"}, {"out of the total"}}))
        return Category::Ratio;
    if (any_cue(q, {{"average"}, {"mean", true}, {"on average"}})) return Category::Average;
    if (any_cue(q, {{"range", true}, {"highest and lowest"}, {"spread between"}}))
        return Category::Range;
    if (any_cue(q, {{"greater"}, {"exceed"}, {"higher"}, {"lower"}, {"larger"}, {"smaller"},
                    {"more than"}, {"less than"}, {"compare"}}))
        return Category::Compare;
    if (any_cue(q, {{"how many"}, {"count of"}, {"number of times"}})) return Category::Counting;
    if (any_cue(q, {{"divided by"}, {"divide", true}, {"per share"}, {"per unit"},
                    {"per employee"}, {"quotient"}}))
        return Category::Division;
    if (any_cue(q, {{"product of"}, {"multiplied"}, {"multiply"}, {"times", true}}))
        return Category::Product;
    if (mentions_change || any_cue(q, {{"difference"}, {"differ"}, {"how much more"},
                                       {"how much less"}, {"net of"}}))
        return Category::Difference;
    if (any_cue(q, {{"sum", true}, {"total"}, {"combined"}, {"aggregate"}, {"altogether"},
                    {"add up"}, {"added"}, {"adding"}, {"together"}}))
        return Category::Sum;
    if (any_cue(q, {{"how long"}, {"years between"}, {"time span"}, {"duration"},
                    {"months between"}}))
        return Category::Time;
    return std::nullopt;
}

// Category family suggested by the gold program's operator multiset.
std::optional<Category> program_category(const dsl::ReasoningProgram& program) {
    bool any_exp = false, any_avg = false, any_max = false, any_min = false,
         any_greater = false;
    std::size_t adds = 0, subs = 0, muls = 0, divs = 0, others = 0;
    for (const auto& step : program.steps) {
        switch (step.op) {
            case dsl::AtomicOp::Add:
            case dsl::AtomicOp::TableSum: ++adds; break;
            case dsl::AtomicOp::Subtract: ++subs; break;
            case dsl::AtomicOp::Multiply: ++muls; break;
            case dsl::AtomicOp::Divide: ++divs; break;
            case dsl::AtomicOp::Exp: any_exp = true; ++others; break;
            case dsl::AtomicOp::TableAverage: any_avg = true; ++others; break;
            case dsl::AtomicOp::Max:
            case dsl::AtomicOp::TableMax: any_max = true; ++others; break;
            case dsl::AtomicOp::Min:
            case dsl::AtomicOp::TableMin: any_min = true; ++others; break;
            case dsl::AtomicOp::Greater: any_greater = true; ++others; break;
        }
    }
    if (any_exp) return Category::InDomainInfo;
    if (any_greater) return Category::Compare;
    if (any_avg) return Category::Average;
    if (any_max && any_min) return Category::Range;
    std::size_t total = adds + subs + muls + divs + others;
    if (total == 0) return std::nullopt;
    if (subs > 0 && divs > 0 && muls == 0 && adds == 0) return Category::ChangeRatio;
    if (divs == total) return Category::Division;
    if (subs == total) return Category::Difference;
    if (adds == total) return Category::Sum;
    if (muls == total) return Category::Product;
    return std::nullopt;
}

std::optional<dsl::ReasoningProgram> try_parse_program(const core::HybridExample& example) {
    if (!example.gold.program_text) return std::nullopt;
    try {
        return dsl::parse_program(*example.gold.program_text);
    } catch (const dsl::ParseError&) {
        return std::nullopt;
    }
}

}  // namespace

CategoryResult classify_question(const core::HybridExample& example) {
    if (example.human_labels && example.human_labels->category) {
        if (auto c = category_from_name(*example.human_labels->category))
            return CategoryResult{*c, true};
    }
    std::string q = to_lower(example.question.text);
    auto by_keyword = keyword_category(q);
    std::optional<Category> by_program;
    if (auto program = try_parse_program(example)) by_program = program_category(*program);

    CategoryResult result;
    if (by_keyword) {
        result.category = *by_keyword;
        // Division programs are the mechanical form of Ratio questions, so
        // they do not count as disagreement.
        bool compatible = !by_program || *by_program == *by_keyword ||
                          (*by_program == Category::Division &&
                           (*by_keyword == Category::Ratio || *by_keyword == Category::Average));
        result.confident = compatible;
    } else if (by_program) {
        result.category = *by_program;
        result.confident = true;
    } else {
        result.category = Category::Other;
        result.confident = true;
    }
    return result;
}

std::optional<int> reasoning_steps(const core::HybridExample& example) {
    if (!example.gold.program_text) return std::nullopt;
    if (auto program = try_parse_program(example))
        return static_cast<int>(dsl::count_steps(*program));

    // Derivation-style text: one step per binary arithmetic operator. The
    // minus sign of a negative literal is not an operator, so count only
    // operators whose left side already produced a value.
    const std::string& text = *example.gold.program_text;
    int ops = 0;
    char prev_solid = '\0';
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        bool binary_position = std::isdigit(static_cast<unsigned char>(prev_solid)) ||
                               prev_solid == ')' || prev_solid == '%';
        if ((c == '+' || c == '-' || c == '*' || c == '/') && binary_position)
            ++ops;
        prev_solid = c;
    }
    return ops > 0 ? ops : 1;
}

std::optional<int> hierarchy_depth(const core::HybridExample& example) {
    std::optional<int> best;
    for (const auto& ref : example.gold.evidences) {
        const auto* cell = std::get_if<core::TableCellRef>(&ref);
        if (!cell) continue;
        for (const auto& table : example.tables) {
            if (table.id != cell->table_id) continue;
            if (cell->row >= table.n_rows())
                throw core::SchemaError("evidence cell out of range", "gold.evidences");
            std::size_t headers_above = std::min(cell->row, table.n_header_rows);
            int depth = 1 + static_cast<int>(headers_above) +
                        table.row_indent_levels[cell->row];
            if (!best || depth > *best) best = depth;
        }
    }
    return best;
}

double empty_cell_pct(const core::HybridExample& example) {
    const core::Table& table = core::select_primary_table(example);
    std::size_t total = 0, empty = 0;
    for (const auto& row : table.grid) {
        for (const auto& cell : row) {
            ++total;
            if (cell.is_empty) ++empty;
        }
    }
    return total == 0 ? 0.0 : static_cast<double>(empty) / static_cast<double>(total);
}

std::size_t table_rows(const core::HybridExample& example) {
    return core::select_primary_table(example).n_rows();
}

MetadataRecord annotate(const core::HybridExample& example) {
    MetadataRecord r;
    r.example_id = example.id;
    r.category = classify_question(example);
    r.n_steps = reasoning_steps(example);
    r.table_length = table_rows(example);
    r.depth = hierarchy_depth(example);
    r.empty_pct = empty_cell_pct(example);
    if (example.human_labels) {
        const auto& labels = *example.human_labels;
        bool used = false;
        if (labels.category && category_from_name(*labels.category)) used = true;
        if (labels.n_steps) {
            r.n_steps = labels.n_steps;
            used = true;
        }
        if (labels.hierarchy_depth) {
            r.depth = labels.hierarchy_depth;
            used = true;
        }
        if (labels.empty_cell_pct) {
            r.empty_pct = *labels.empty_cell_pct;
            used = true;
        }
        if (used) r.source = Source::HumanLabel;
    }
    return r;
}

std::vector<MetadataRecord> annotate_all(const std::vector<core::HybridExample>& examples) {
    std::vector<MetadataRecord> out;
    out.reserve(examples.size());
    for (const auto& e : examples) out.push_back(annotate(e));
    return out;
}

std::string metadata_csv(const std::vector<MetadataRecord>& records) {
    std::string out = csv::join_row({"example_id", "category", "n_steps", "table_length",
                                     "hierarchy_depth", "empty_cell_pct", "source"});
    for (const auto& r : records) {
        out += csv::join_row({
            r.example_id,
            std::string(category_name(r.category.category)),
            r.n_steps ? std::to_string(*r.n_steps) : "",
            std::to_string(r.table_length),
            r.depth ? std::to_string(*r.depth) : "",
            format_fixed(Decimal(r.empty_pct), 4),
            r.source == Source::HumanLabel ? "human_label" : "computed",
        });
    }
    return out;
}

std::vector<MetadataRecord> parse_metadata_csv(const std::string& text) {
    auto rows = csv::parse(text);
    std::vector<MetadataRecord> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() < 7)
            throw core::SchemaError("metadata row needs 7 columns (line " +
                                        std::to_string(i + 1) + ")",
                                    "metadata.csv");
        MetadataRecord r;
        r.example_id = row[0];
        r.category.category = category_from_name(row[1]).value_or(Category::Other);
        if (!row[2].empty()) r.n_steps = std::stoi(row[2]);
        r.table_length = static_cast<std::size_t>(std::stoul(row[3]));
        if (!row[4].empty()) r.depth = std::stoi(row[4]);
        if (!row[5].empty()) r.empty_pct = std::stod(row[5]);
        r.source = row[6] == "human_label" ? Source::HumanLabel : Source::Computed;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<core::HybridExample> apply_split_filters(std::vector<core::HybridExample> examples,
                                                     core::Dataset dataset) {
    if (dataset == core::Dataset::Multihiertt) {
        std::erase_if(examples, [](const core::HybridExample& e) {
            return table_rows(e) > 40;
        });
    } else if (dataset == core::Dataset::TATQA) {
        std::erase_if(examples, [](const core::HybridExample& e) {
            return !e.gold.program_text.has_value();
        });
    }
    return examples;
}

std::string step_bucket(std::optional<int> n_steps) {
    if (!n_steps) return "unknown";
    if (*n_steps <= 1) return "1";
    if (*n_steps == 2) return "2";
    if (*n_steps == 3) return "3";
    return "4+";
}

std::string depth_bucket(std::optional<int> depth) {
    if (!depth) return "unknown";
    if (*depth <= 2) return "1-2";
    if (*depth == 3) return "3";
    if (*depth == 4) return "4";
    return "5+";
}

std::string empty_pct_bucket(double fraction) {
    if (fraction <= 0.0) return "0%";
    if (fraction <= 0.10) return "0-10%";
    if (fraction <= 0.30) return "10-30%";
    return ">30%";
}

std::string row_bucket(std::size_t rows) {
    if (rows <= 5) return "<=5";
    if (rows <= 10) return "6-10";
    if (rows <= 20) return "11-20";
    return ">20";
}

LabelAgreement label_agreement(const std::vector<core::HybridExample>& examples) {
    LabelAgreement agg;
    for (const auto& e : examples) {
        if (!e.human_labels) continue;
        const auto& labels = *e.human_labels;
        core::HybridExample unlabeled = e;
        unlabeled.human_labels.reset();
        if (labels.category) {
            if (auto want = category_from_name(*labels.category)) {
                ++agg.n_category;
                if (classify_question(unlabeled).category != *want) ++agg.category_mismatch;
            }
        }
        if (labels.n_steps) {
            ++agg.n_steps;
            if (reasoning_steps(unlabeled) != labels.n_steps) ++agg.steps_mismatch;
        }
        if (labels.hierarchy_depth) {
            ++agg.n_depth;
            if (hierarchy_depth(unlabeled) != labels.hierarchy_depth) ++agg.depth_mismatch;
        }
        if (labels.empty_cell_pct) {
            ++agg.n_empty;
            double diff = empty_cell_pct(unlabeled) - *labels.empty_cell_pct;
            if (diff < 0) diff = -diff;
            if (diff > 0.005) ++agg.empty_mismatch;
        }
    }
    return agg;
}

}  // namespace tabeval::metadata
