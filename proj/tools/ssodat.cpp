#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ssodat/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"ssodat: teacher/student agreement scoring and active selection"};
    app.require_subcommand(1);

    // ingest
    std::string ingest_preds;
    bool validate_only = false;
    auto* ingest = app.add_subcommand("ingest", "parse and validate a prediction file");
    ingest->add_option("--preds", ingest_preds, "prediction JSONL file")->required();
    ingest->add_flag("--validate", validate_only, "validate only (the default behavior)");

    // score
    std::string score_preds, score_bank, score_config, score_out;
    auto* score = app.add_subcommand("score", "partition one round and update the bank");
    score->add_option("--preds", score_preds, "prediction JSONL file")->required();
    score->add_option("--bank", score_bank, "prototype bank to start from (.bin)");
    score->add_option("--config", score_config, "engine config JSON")->required();
    score->add_option("--out", score_out, "output round directory")->required();

    // select
    std::string select_dir;
    std::size_t select_budget = 0;
    double select_p = 2.0;
    auto* select = app.add_subcommand("select", "rank a scored round and pick a batch");
    select->add_option("--round-dir", select_dir, "round directory with report.json")
        ->required();
    select->add_option("--budget", select_budget, "images to select")->required();
    select->add_option("--p", select_p, "fusion exponent (default 2)");

    // loop
    ssodat::cli::LoopArgs loop_args;
    std::uint64_t loop_seed = 0;
    double loop_init = 0.0;
    auto* loop = app.add_subcommand("loop", "run the simulated multi-round loop");
    loop->add_option("--spec", loop_args.spec_path,
                     "pool/oracle spec JSON (default: stock benchmark)");
    loop->add_option("--rounds", loop_args.rounds, "number of rounds")->required();
    loop->add_option("--budget", loop_args.budget, "images per round")->required();
    auto* seed_opt = loop->add_option("--seed", loop_seed, "override the pool seed");
    loop->add_option("--strategy", loop_args.strategy,
                     "combined|uncertainty|diversity|random");
    auto* init_opt = loop->add_option("--init-fraction", loop_init,
                                      "initial labeled fraction (default 0.05)");
    loop->add_option("--out", loop_args.out_dir, "output directory")->required();

    // report
    std::string report_dir, report_format = "table";
    auto* report = app.add_subcommand("report", "print a scored round");
    report->add_option("--round-dir", report_dir, "round directory with report.json")
        ->required();
    report->add_option("--format", report_format, "table or csv");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest) return ssodat::cli::cmd_ingest(ingest_preds, std::cout);
        if (*score) {
            return ssodat::cli::cmd_score(score_preds, score_bank, score_config,
                                          score_out, std::cout);
        }
        if (*select) {
            return ssodat::cli::cmd_select(select_dir, select_budget, select_p,
                                           std::cout);
        }
        if (*loop) {
            if (seed_opt->count() > 0) loop_args.seed = loop_seed;
            if (init_opt->count() > 0) loop_args.initial_label_fraction = loop_init;
            return ssodat::cli::cmd_loop(loop_args, std::cout);
        }
        if (*report) return ssodat::cli::cmd_report(report_dir, report_format, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
