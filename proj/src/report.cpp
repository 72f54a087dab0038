#include "tabeval/report.hpp"

#include "tabeval/csv.hpp"
#include "tabeval/probe.hpp"
#include "tabeval/program_dsl.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <tuple>
#include <utility>

using json = nlohmann::json;

namespace tabeval::report {

namespace {

constexpr std::array<core::Dataset, 4> kDatasetOrder = {
    core::Dataset::TATQA, core::Dataset::FinQA, core::Dataset::ConvFinQA,
    core::Dataset::Multihiertt};

constexpr std::array<prompting::Strategy, 5> kStrategyOrder = {
    prompting::Strategy::Direct, prompting::Strategy::CoT, prompting::Strategy::PoT,
    prompting::Strategy::EEDP, prompting::Strategy::Decomposers};

std::string pct_string(std::size_t correct, std::size_t n) {
    return format_fixed(Decimal(100) * Decimal(static_cast<unsigned long long>(correct)) /
                            Decimal(static_cast<unsigned long long>(n)),
                        2);
}

// Labels for cut-point buckets: consecutive integers get a bare number,
// the first wider bucket "<=c", later ones "lo-hi", overflow ">=last+1".
template <typename T>
std::vector<std::string> cut_labels(const std::vector<T>& cuts) {
    std::vector<std::string> out;
    T prev = 0;
    for (std::size_t i = 0; i < cuts.size(); ++i) {
        const T c = cuts[i];
        if (c == prev + 1)
            out.push_back(std::to_string(c));
        else if (i == 0)
            out.push_back("<=" + std::to_string(c));
        else
            out.push_back(std::to_string(prev + 1) + "-" + std::to_string(c));
        prev = c;
    }
    out.push_back(">=" + std::to_string(cuts.back() + 1));
    return out;
}

template <typename T>
std::string cut_bucket(const std::vector<T>& cuts, T value) {
    const auto labels = cut_labels(cuts);
    for (std::size_t i = 0; i < cuts.size(); ++i)
        if (value <= cuts[i]) return labels[i];
    return labels.back();
}

std::string decile_label(int bin, int bins) {
    return std::to_string(bin * 100 / bins) + "-" + std::to_string((bin + 1) * 100 / bins) + "%";
}

std::string empty_pct_bucket_label(double fraction, int bins) {
    int bin = static_cast<int>(std::floor(fraction * bins));
    bin = std::clamp(bin, 0, bins - 1);
    return decile_label(bin, bins);
}

constexpr std::array<metadata::Category, 13> kCategoryOrder = {
    metadata::Category::InDomainInfo, metadata::Category::ChangeRatio,
    metadata::Category::Ratio,        metadata::Category::Average,
    metadata::Category::Range,        metadata::Category::Compare,
    metadata::Category::Counting,     metadata::Category::Division,
    metadata::Category::Product,      metadata::Category::Difference,
    metadata::Category::Sum,          metadata::Category::Time,
    metadata::Category::Other};

bool category_filtered(metadata::Category c) {
    return c == metadata::Category::Time || c == metadata::Category::InDomainInfo;
}

}  // namespace

std::string_view dimension_name(Dimension d) {
    switch (d) {
        case Dimension::Steps: return "steps";
        case Dimension::Category: return "category";
        case Dimension::TableLength: return "table_length";
        case Dimension::Depth: return "depth";
        case Dimension::EmptyPct: return "empty_pct";
        case Dimension::Tau: return "tau";
    }
    return "steps";
}

std::optional<Dimension> dimension_from_name(std::string_view name) {
    for (auto d : {Dimension::Steps, Dimension::Category, Dimension::TableLength,
                   Dimension::Depth, Dimension::EmptyPct, Dimension::Tau})
        if (name == dimension_name(d)) return d;
    return std::nullopt;
}

std::string accuracy_table_csv(const std::vector<runner::EvalRecord>& records) {
    std::vector<std::string> header{"dataset", "model"};
    for (auto s : kStrategyOrder) header.emplace_back(prompting::strategy_name(s));
    std::string out = csv::join_row(header);

    std::vector<std::string> model_order;
    for (const auto& r : records)
        if (std::find(model_order.begin(), model_order.end(), r.model) == model_order.end())
            model_order.push_back(r.model);

    struct Cell {
        std::size_t n = 0;
        std::size_t correct = 0;
    };
    std::map<std::tuple<core::Dataset, std::string, prompting::Strategy>, Cell> cells;
    for (const auto& r : records) {
        if (!r.grade) continue;
        auto& cell = cells[{r.dataset, r.model, r.strategy}];
        ++cell.n;
        if (r.grade->correct) ++cell.correct;
    }

    for (auto ds : kDatasetOrder) {
        for (const auto& model : model_order) {
            std::vector<std::string> row;
            bool any = false;
            for (auto s : kStrategyOrder) {
                auto it = cells.find({ds, model, s});
                if (it == cells.end() || it->second.n == 0) {
                    row.emplace_back();
                } else {
                    row.push_back(pct_string(it->second.correct, it->second.n));
                    any = true;
                }
            }
            if (!any) continue;
            row.insert(row.begin(), model);
            row.insert(row.begin(), std::string(core::dataset_name(ds)));
            out += csv::join_row(row);
        }
    }
    return out;
}

std::optional<int> gold_final_tau(const core::HybridExample& example) {
    if (!example.gold.program_text) return std::nullopt;
    dsl::ReasoningProgram program;
    try {
        program = dsl::parse_program(*example.gold.program_text);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (program.steps.empty()) return std::nullopt;
    const auto& last = program.steps.back();
    if (last.args.size() < 2) return std::nullopt;
    const auto ctx = dsl::table_context_for(example);
    auto scalar = [&](const dsl::Operand& operand) -> std::optional<Decimal> {
        if (const auto* l = std::get_if<dsl::Literal>(&operand)) return l->value;
        if (const auto* c = std::get_if<dsl::NamedConst>(&operand)) return c->value;
        if (const auto* s = std::get_if<dsl::StepRef>(&operand)) {
            dsl::ReasoningProgram prefix;
            prefix.steps.assign(program.steps.begin(), program.steps.begin() + s->index + 1);
            try {
                auto v = dsl::evaluate(prefix, ctx);
                if (const auto* n = std::get_if<core::NumberValue>(&v)) return n->value;
            } catch (const std::exception&) {
            }
            return std::nullopt;
        }
        return std::nullopt;  // a row reference aggregates; no scalar magnitude
    };
    const auto lhs = scalar(last.args[0]);
    const auto rhs = scalar(last.args[1]);
    if (!lhs || !rhs) return std::nullopt;
    try {
        return probe::tau(*lhs, *rhs);
    } catch (const probe::ZeroOperand&) {
        return std::nullopt;
    }
}

std::string bucket_of(const runner::EvalRecord& record, Dimension dimension,
                      const StratifyOptions& options, const core::HybridExample* example) {
    const auto& m = record.metadata;
    switch (dimension) {
        case Dimension::Steps:
            return m.n_steps ? cut_bucket(options.step_cuts, *m.n_steps)
                             : std::string("unknown");
        case Dimension::Category:
            return std::string(metadata::category_name(m.category.category));
        case Dimension::TableLength:
            return cut_bucket(options.row_cuts, m.table_length);
        case Dimension::Depth:
            return m.depth ? std::to_string(*m.depth) : std::string("unknown");
        case Dimension::EmptyPct:
            return empty_pct_bucket_label(m.empty_pct, options.empty_bins);
        case Dimension::Tau: {
            if (example) {
                if (auto t = gold_final_tau(*example)) return std::to_string(*t);
            }
            return "n/a";
        }
    }
    return "unknown";
}

StratifiedReport stratify(const std::vector<runner::EvalRecord>& records, Dimension dimension,
                          const StratifyOptions& options,
                          const std::vector<core::HybridExample>& examples) {
    StratifiedReport rep;
    rep.dimension = dimension;

    std::map<std::string_view, const core::HybridExample*> by_id;
    for (const auto& ex : examples) by_id[ex.id] = &ex;

    struct Used {
        const runner::EvalRecord* record;
        std::string bucket;
    };
    std::vector<Used> used;
    int depth_max = options.depth_levels, depth_min = 1;
    int tau_lo = options.tau_min, tau_hi = options.tau_max;
    for (const auto& r : records) {
        if (!r.grade) continue;
        if (dimension == Dimension::Category && options.omit_filtered_categories &&
            category_filtered(r.metadata.category.category))
            continue;
        const core::HybridExample* ex = nullptr;
        if (dimension == Dimension::Tau) {
            auto it = by_id.find(r.example_id);
            if (it != by_id.end()) ex = it->second;
        }
        Used u{&r, bucket_of(r, dimension, options, ex)};
        if (dimension == Dimension::Depth && r.metadata.depth) {
            depth_max = std::max(depth_max, *r.metadata.depth);
            depth_min = std::min(depth_min, *r.metadata.depth);
        }
        if (dimension == Dimension::Tau && u.bucket != "n/a") {
            const int t = std::stoi(u.bucket);
            tau_lo = std::min(tau_lo, t);
            tau_hi = std::max(tau_hi, t);
        }
        used.push_back(std::move(u));
    }

    switch (dimension) {
        case Dimension::Steps:
            rep.buckets = cut_labels(options.step_cuts);
            rep.buckets.emplace_back("unknown");
            break;
        case Dimension::TableLength:
            rep.buckets = cut_labels(options.row_cuts);
            break;
        case Dimension::Depth:
            for (int d = depth_min; d <= depth_max; ++d)
                rep.buckets.push_back(std::to_string(d));
            rep.buckets.emplace_back("unknown");
            break;
        case Dimension::EmptyPct:
            for (int b = 0; b < options.empty_bins; ++b)
                rep.buckets.push_back(decile_label(b, options.empty_bins));
            break;
        case Dimension::Category:
            for (auto c : kCategoryOrder) {
                if (options.omit_filtered_categories && category_filtered(c)) continue;
                rep.buckets.emplace_back(metadata::category_name(c));
            }
            break;
        case Dimension::Tau:
            for (int t = tau_lo; t <= tau_hi; ++t) rep.buckets.push_back(std::to_string(t));
            rep.buckets.emplace_back("n/a");
            break;
    }

    std::string note = "dimension=" + std::string(dimension_name(dimension)) + " buckets=";
    for (std::size_t i = 0; i < rep.buckets.size(); ++i) {
        if (i) note += '|';
        note += rep.buckets[i];
    }
    rep.header_note = std::move(note);

    std::vector<std::pair<prompting::Strategy, std::string>> pairs;
    for (auto s : kStrategyOrder)
        for (const auto& u : used) {
            if (u.record->strategy != s) continue;
            std::pair<prompting::Strategy, std::string> p{s, u.record->model};
            if (std::find(pairs.begin(), pairs.end(), p) == pairs.end()) pairs.push_back(p);
        }

    struct Cell {
        std::size_t n = 0;
        std::size_t correct = 0;
    };
    std::map<std::tuple<prompting::Strategy, std::string, std::string>, Cell> cells;
    for (const auto& u : used) {
        auto& cell = cells[{u.record->strategy, u.record->model, u.bucket}];
        ++cell.n;
        if (u.record->grade->correct) ++cell.correct;
    }

    for (const auto& [strategy, model] : pairs) {
        for (const auto& bucket : rep.buckets) {
            StratumRow row;
            row.strategy = strategy;
            row.model = model;
            row.bucket = bucket;
            auto it = cells.find({strategy, model, bucket});
            if (it != cells.end()) {
                row.n = it->second.n;
                row.n_correct = it->second.correct;
                if (row.n > 0) row.accuracy_pct = std::stod(pct_string(row.n_correct, row.n));
            }
            rep.rows.push_back(std::move(row));
        }
    }
    return rep;
}

std::string stratified_csv(const StratifiedReport& report) {
    std::string out = "# " + report.header_note + "\n";
    out += csv::join_row({"strategy", "model", "bucket", "n", "accuracy"});
    for (const auto& row : report.rows) {
        out += csv::join_row({std::string(prompting::strategy_name(row.strategy)), row.model,
                              row.bucket, std::to_string(row.n),
                              row.n > 0 ? pct_string(row.n_correct, row.n) : std::string()});
    }
    return out;
}

std::string plot_data_json(const StratifiedReport& report) {
    json j;
    j["dimension"] = std::string(dimension_name(report.dimension));
    j["buckets"] = report.buckets;
    json series = json::array();
    const std::size_t width = report.buckets.size();
    for (std::size_t base = 0; base + width <= report.rows.size(); base += width) {
        json s;
        s["strategy"] = std::string(prompting::strategy_name(report.rows[base].strategy));
        s["model"] = report.rows[base].model;
        json ns = json::array();
        json accs = json::array();
        for (std::size_t i = base; i < base + width; ++i) {
            ns.push_back(report.rows[i].n);
            if (report.rows[i].accuracy_pct)
                accs.push_back(*report.rows[i].accuracy_pct);
            else
                accs.push_back(nullptr);
        }
        s["n"] = std::move(ns);
        s["accuracy"] = std::move(accs);
        series.push_back(std::move(s));
    }
    j["series"] = std::move(series);
    return j.dump(2) + "\n";
}

}  // namespace tabeval::report
