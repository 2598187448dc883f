#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "ssodat/config.hpp"
#include "ssodat/io.hpp"
#include "ssodat/round.hpp"
#include "ssodat/selection.hpp"
#include "ssodat/simulator.hpp"

// Command bodies for the ssodat binary. They live in the library so tests can
// drive them in-process; the binary itself only does flag parsing.
namespace ssodat::cli {

namespace fs = std::filesystem;

inline int cmd_ingest(const std::string& preds_path, std::ostream& out) {
    const io::PredictionSet set = io::read_predictions(preds_path);
    std::size_t teacher_rois = 0;
    std::size_t student_rois = 0;
    for (const auto& [id, pair] : set.pairs) {
        teacher_rois += pair.teacher.rois.size();
        student_rois += pair.student.rois.size();
    }
    out << "ok: " << set.pairs.size() << " paired images, " << teacher_rois
        << " teacher rois, " << student_rois << " student rois, num_classes="
        << set.num_classes << ", feature_dim=" << set.feature_dim << "\n";
    if (!set.incomplete.empty()) {
        out << "warning: " << set.incomplete.size()
            << " images missing one source (excluded):";
        for (const auto& id : set.incomplete) out << ' ' << id;
        out << "\n";
    }
    return 0;
}

inline int cmd_score(const std::string& preds_path, const std::string& bank_path,
                     const std::string& config_path, const std::string& out_dir,
                     std::ostream& out) {
    const EngineConfig cfg = load_config(config_path);
    const io::PredictionSet set = io::read_predictions(preds_path);
    if (set.num_classes != cfg.num_classes || set.feature_dim != cfg.feature_dim) {
        throw validation_error("score: prediction header dimensions do not match config");
    }

    prototypes::PrototypeBank bank =
        bank_path.empty()
            ? prototypes::PrototypeBank(cfg.num_classes, cfg.feature_dim, cfg.alpha,
                                        cfg.sim_threshold)
            : io::load_bank(bank_path);
    if (bank.num_classes() != cfg.num_classes || bank.feature_dim() != cfg.feature_dim) {
        throw validation_error("score: bank dimensions do not match config");
    }

    const round::RoundScoring scoring = round::score_round(set.pairs, bank, cfg);
    const std::size_t round_index = static_cast<std::size_t>(bank.round_index()) + 1;
    bank.set_round_index(round_index);

    fs::create_directories(out_dir);
    io::write_report(fs::path(out_dir) / "report.json", round_index, cfg.num_classes,
                     scoring);
    io::save_bank(fs::path(out_dir) / "bank.bin", bank);
    io::write_bank_json(fs::path(out_dir) / "bank.json", bank);

    out << "round " << round_index << ": " << scoring.stats.num_images << " images = "
        << scoring.stats.num_consistent << " consistent / " << scoring.stats.num_divergent
        << " divergent / " << scoring.stats.num_unscorable << " unscorable\n";
    out << "mean weight " << io::format_double(scoring.stats.mean_weight)
        << ", mean s_unc " << io::format_double(scoring.stats.mean_s_unc) << "\n";
    if (!set.incomplete.empty()) {
        out << "warning: " << set.incomplete.size()
            << " images missing one source (excluded)\n";
    }
    out << "wrote " << out_dir << "\n";
    return 0;
}

inline int cmd_select(const std::string& round_dir, std::size_t budget, double p,
                      std::ostream& out) {
    const io::ReportData report = io::read_report(fs::path(round_dir) / "report.json");
    const selection::SelectionPlan plan =
        selection::plan_round(report.candidates, budget, p, report.round_index);
    io::write_selection_plan(fs::path(round_dir) / "selection.json", plan);
    out << "round " << plan.round_index << ": ranked " << plan.ranked.size()
        << " candidates, selected " << plan.selected.size() << " of budget "
        << plan.budget << "\n";
    for (const auto& id : plan.selected) out << id << "\n";
    return 0;
}

struct LoopArgs {
    std::string spec_path;            // empty: stock benchmark pool and oracle
    std::size_t rounds = 0;
    std::size_t budget = 1;
    std::optional<std::uint64_t> seed; // overrides the pool spec seed
    std::string strategy;              // empty: spec file value or "combined"
    std::optional<double> initial_label_fraction;
    std::string out_dir;
};

inline int cmd_loop(const LoopArgs& args, std::ostream& out) {
    sim::SyntheticPoolSpec pool_spec;
    sim::OracleSkill skill = sim::OracleSkill::benchmark();
    nlohmann::json engine_json = nlohmann::json::object();
    sim::LoopOptions options;

    if (args.spec_path.empty()) {
        pool_spec = sim::benchmark_spec();
    } else {
        const nlohmann::json j = io::read_json_file(args.spec_path);
        try {
            if (j.contains("pool")) {
                pool_spec = sim::SyntheticPoolSpec::from_json(j.at("pool"));
                if (j.contains("oracle")) {
                    skill = sim::OracleSkill::from_json(j.at("oracle"));
                }
                if (j.contains("engine")) engine_json = j.at("engine");
                if (j.contains("strategy")) {
                    options.strategy =
                        sim::strategy_from_string(j.at("strategy").get<std::string>());
                }
                if (j.contains("initial_label_fraction")) {
                    options.initial_label_fraction =
                        j.at("initial_label_fraction").get<double>();
                }
            } else {
                pool_spec = sim::SyntheticPoolSpec::from_json(j);
            }
        } catch (const nlohmann::json::exception& e) {
            throw io_error(args.spec_path + ": " + e.what());
        }
    }

    if (args.seed) pool_spec.seed = *args.seed;
    if (!args.strategy.empty()) options.strategy = sim::strategy_from_string(args.strategy);
    if (args.initial_label_fraction) {
        options.initial_label_fraction = *args.initial_label_fraction;
    }
    options.rounds = args.rounds;
    options.budget = args.budget;

    if (!engine_json.contains("num_classes")) {
        engine_json["num_classes"] = pool_spec.num_classes;
    }
    if (!engine_json.contains("feature_dim")) {
        engine_json["feature_dim"] = pool_spec.feature_dim;
    }
    const EngineConfig cfg = EngineConfig::from_json(engine_json);

    const sim::SyntheticPool pool = sim::generate_pool(pool_spec);
    const sim::LoopTrace trace = sim::run_loop(pool, skill, cfg, options);
    io::write_loop_trace(args.out_dir, trace);

    for (const auto& round : trace.rounds) {
        out << "round " << round.round_index << ": lf "
            << io::format_double(round.label_fraction) << ", "
            << round.stats.num_divergent << " divergent, selected "
            << round.plan.selected.size() << ", batch coverage "
            << round.batch_class_coverage << "/" << cfg.num_classes
            << ", labeled coverage " << round.quality.labeled_class_coverage << "/"
            << cfg.num_classes << "\n";
    }
    out << "labeled " << trace.final_state.labeled.size() << "/"
        << pool_spec.num_images << " images after " << trace.rounds.size()
        << " rounds (" << sim::to_string(options.strategy) << ")\n";
    out << "wrote " << args.out_dir << "\n";
    return 0;
}

namespace detail {

inline std::string cell(double v) { return io::format_double(v); }

inline void print_table_row(std::ostream& out, const std::string& a,
                            const std::string& b, const std::string& c,
                            const std::string& d, const std::string& e,
                            const std::string& f) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%-12s %-11s %12s %12s %12s %9s\n", a.c_str(),
                  b.c_str(), c.c_str(), d.c_str(), e.c_str(), f.c_str());
    out << buf;
}

} // namespace detail

inline int cmd_report(const std::string& round_dir, const std::string& format,
                      std::ostream& out) {
    if (format != "table" && format != "csv") {
        throw validation_error("report: format must be 'table' or 'csv'");
    }
    const io::ReportData report = io::read_report(fs::path(round_dir) / "report.json");

    std::optional<selection::SelectionPlan> plan;
    const fs::path selection_path = fs::path(round_dir) / "selection.json";
    if (fs::exists(selection_path)) plan = io::read_selection_plan(selection_path);

    std::map<std::string, std::size_t> rank_by_id; // 1-based rank in the plan
    std::set<std::string> selected;
    if (plan) {
        for (std::size_t i = 0; i < plan->ranked.size(); ++i) {
            rank_by_id[plan->ranked[i].image_id] = i + 1;
        }
        selected.insert(plan->selected.begin(), plan->selected.end());
    }
    std::map<std::string, const selection::CandidateScore*> score_by_id;
    if (plan) {
        for (const auto& c : plan->ranked) score_by_id[c.image_id] = &c;
    }

    if (format == "csv") {
        out << "image_id,verdict,d_kl,weight,s_unc,s_div,s_sel,rank,selected\n";
        for (const auto& part : report.partitions) {
            out << part.image_id << ','
                << roicm::to_string(part.verdict) << ','
                << (part.d_kl ? detail::cell(*part.d_kl) : "") << ','
                << (part.weight ? detail::cell(*part.weight) : "") << ','
                << (part.s_unc ? detail::cell(*part.s_unc) : "") << ',';
            auto it = score_by_id.find(part.image_id);
            if (part.verdict == roicm::Verdict::divergent) {
                const auto c = std::find_if(report.candidates.begin(),
                                            report.candidates.end(),
                                            [&](const selection::CandidateInput& x) {
                                                return x.image_id == part.image_id;
                                            });
                out << (c != report.candidates.end() ? detail::cell(c->s_div) : "");
            }
            out << ',';
            if (it != score_by_id.end()) out << detail::cell(it->second->s_sel);
            out << ',';
            if (rank_by_id.count(part.image_id)) out << rank_by_id[part.image_id];
            out << ',' << (selected.count(part.image_id) ? "1" : "0") << "\n";
        }
        return 0;
    }

    out << "round " << report.round_index << ": " << report.stats.num_images
        << " images = " << report.stats.num_consistent << " consistent / "
        << report.stats.num_divergent << " divergent / " << report.stats.num_unscorable
        << " unscorable\n";
    out << "mean weight " << detail::cell(report.stats.mean_weight) << ", mean s_unc "
        << detail::cell(report.stats.mean_s_unc) << "\n";
    if (plan) {
        out << "selection: budget " << plan->budget << ", p " << detail::cell(plan->p)
            << ", selected " << plan->selected.size() << "\n";
        detail::print_table_row(out, "rank", "image_id", "s_unc", "s_div", "s_sel",
                                "picked");
        const std::size_t show = std::min<std::size_t>(plan->ranked.size(), 20);
        for (std::size_t i = 0; i < show; ++i) {
            const auto& c = plan->ranked[i];
            detail::print_table_row(out, std::to_string(i + 1), c.image_id,
                                    detail::cell(c.s_unc), detail::cell(c.s_div),
                                    detail::cell(c.s_sel),
                                    selected.count(c.image_id) ? "*" : "");
        }
        if (plan->ranked.size() > show) {
            out << "... " << plan->ranked.size() - show << " more candidates\n";
        }
    } else {
        out << "selection: none (run 'ssodat select' on this round directory)\n";
    }
    return 0;
}

} // namespace ssodat::cli
