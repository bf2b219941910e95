// playmech: session pipeline and epsilon-machine toolkit.
//
// Every option can also be set in a flat `key = value` file passed with
// --config; keys are the option names without dashes. A flag on the command
// line beats the file, and the file beats the built-in default.

#include <CLI11.hpp>

#include <iostream>

#include "playmech/cli.hpp"

int main(int argc, char** argv) {
    playmech::RunConfig cfg;
    CLI::App app{"Session segmentation, skill metrics and epsilon-machine fitting for game-play records"};
    app.set_version_flag("--version", PLAYMECH_VERSION);
    app.set_config("--config", "", "Flat key = value config file (# comments)");
    app.require_subcommand(1, 1);

    app.add_option("--dataset", cfg.dataset, "Delimited play-record file (ingest)");
    app.add_option("--col_player", cfg.col_player, "Player id column")->capture_default_str();
    app.add_option("--col_time", cfg.col_time, "Timestamp column (hours or YYYY-MM-DD HH...)")->capture_default_str();
    app.add_option("--col_score", cfg.col_score, "Score column")->capture_default_str();
    app.add_option("--delimiter", cfg.delimiter, "auto, comma or tab")->capture_default_str();
    app.add_option("--threshold_h", cfg.threshold_h, "Session break threshold in hours")->capture_default_str();
    app.add_option("--split_rule", cfg.split_rule, "at_least (gap >= threshold splits) or greater")->capture_default_str();
    app.add_option("--basis", cfg.basis, "Quartile basis: talent or success")->capture_default_str();
    app.add_option("--quartile_population", cfg.quartile_population,
                   "Players ranked into quartiles: all or analyzed")->capture_default_str();
    app.add_option("--shuffle_seed", cfg.shuffle_seed, "Seed of the within-session shuffle control")->capture_default_str();
    app.add_option("--quit_bin_width", cfg.quit_bin_width, "Score-delta bin width of the quit curve")->capture_default_str();
    app.add_option("--scheme", cfg.scheme, "delta_prev, delta_median or delta_mean")->capture_default_str();
    app.add_option("--theta", cfg.theta, "Good/very-good threshold in points")->capture_default_str();
    app.add_option("--reference_scope", cfg.reference_scope, "Running mean/median scope: session or lifetime")->capture_default_str();
    app.add_option("--quartile", cfg.quartile, "0 = all players, 1..4 = one quartile (encode)")->capture_default_str();
    app.add_option("--L", cfg.L, "Maximum history length")->capture_default_str();
    app.add_option("--alpha", cfg.alpha, "Significance level of the CSSR test")->capture_default_str();
    app.add_option("--test", cfg.test, "chi_square or ks")->capture_default_str();
    app.add_option("--min_count", cfg.min_count, "Minimum suffix count to be testable")->capture_default_str();
    app.add_option("--split_fraction", cfg.split_fraction, "Training share of the temporal split")->capture_default_str();
    app.add_option("--bootstrap_n", cfg.bootstrap_n, "Bootstrap resamples (0 disables)")->capture_default_str();
    app.add_option("--bootstrap_seed", cfg.bootstrap_seed, "Bootstrap seed")->capture_default_str();
    app.add_option("--fourth_game", cfg.fourth_game, "Score from the 4th game on: auto, on or off")->capture_default_str();
    app.add_option("--schemes", cfg.schemes, "Sweep schemes, comma separated")->capture_default_str();
    app.add_option("--thetas", cfg.thetas, "Sweep thresholds, comma separated (default grid when empty)");
    app.add_option("--lengths", cfg.lengths, "Sweep history lengths, comma separated")->capture_default_str();
    app.add_option("--quartiles", cfg.quartiles, "Sweep quartiles, comma separated (0 = all)")->capture_default_str();
    app.add_option("--min_edge_prob", cfg.min_edge_prob, "DOT edges below this probability are dropped")->capture_default_str();
    app.add_flag("--include_transient", cfg.include_transient, "Draw transient states in DOT output");
    app.add_option("--synth_spec", cfg.synth_spec, "Session generator spec (JSON)");
    app.add_option("--synth_seed", cfg.synth_seed, "Synthetic data seed")->capture_default_str();
    app.add_option("--synth_players", cfg.synth_players, "Synthetic players (without --synth_spec)")->capture_default_str();
    app.add_option("--outdir,-o", cfg.outdir, "Output root")->capture_default_str();
    app.add_flag("--force", cfg.force, "Overwrite existing results");
    app.add_option("--threads", cfg.threads, "Worker threads")->capture_default_str();

    const char* descriptions[] = {
        "Parse the dataset into records.csv",
        "Segment records into sessions and summarize them",
        "Skill, learning, quitting, persistence and spacing metrics",
        "Encode sessions over the PGVQ alphabet",
        "Fit an epsilon-machine to the encoded corpus",
        "Temporal split, fit, predict and score with AUC",
        "Scheme x theta x L model selection grid",
        "Generate a synthetic session dataset",
        "Write the fitted machine as DOT",
    };
    std::string chosen;
    const auto& names = playmech::subcommand_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        auto* sub = app.add_subcommand(names[i], descriptions[i]);
        sub->fallthrough();
        sub->callback([&chosen, name = names[i]] { chosen = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : playmech::kExitConfig;
    }
    return playmech::run_subcommand(chosen, cfg, std::cerr);
}
