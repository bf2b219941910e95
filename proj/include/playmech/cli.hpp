#pragma once

// Pipeline subcommands. Each one reads its inputs (the raw dataset or an
// upstream subcommand's artifacts), writes its outputs under
// <outdir>/<subcommand>/ and records a manifest.json next to them.
//
//   ingest      dataset          -> ingest/records.csv, parse_report.json
//   sessions    ingest           -> sessions/sessions.csv, summary.json, hist_*.csv
//   metrics     sessions         -> metrics/*.csv, metrics.json
//   encode      sessions         -> encode/encoded_sessions.csv, corpus.txt, corpus.json, frequencies.csv
//   fit         encode           -> fit/machine.json, machine.dot, states.csv
//   evaluate    encode           -> evaluate/auc.json, auc.csv, roc_<X>.csv, machine.json
//   sweep       sessions         -> sweep/sweep.csv, sweep.json
//   synth       (nothing)        -> synth/dataset.csv, spec.json, machine.json, machine.dot
//   export-dot  fit              -> export-dot/machine.dot

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "playmech/cssr.hpp"
#include "playmech/encode.hpp"
#include "playmech/ingest.hpp"
#include "playmech/metrics.hpp"

namespace playmech {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitInternal = 4;

const std::vector<std::string>& subcommand_names();

struct RunConfig {
    // ingest
    std::string dataset;                  // delimited text; required by ingest
    std::string col_player = "player";
    std::string col_time = "time";
    std::string col_score = "score";
    std::string delimiter = "auto";       // auto, comma or tab
    // sessions
    std::int64_t threshold_h = 2;
    std::string split_rule = "at_least";  // at_least (gap >= threshold) or greater
    // metrics
    std::string basis = "talent";         // quartile basis for encode/fit/evaluate
    std::string quartile_population = "all";  // all or analyzed (players with a 4..15 game session)
    std::uint64_t shuffle_seed = 7;
    std::int64_t quit_bin_width = 1000;
    // encode
    std::string scheme = "delta_prev";
    std::int64_t theta = 8000;
    std::string reference_scope = "session";  // session or lifetime
    int quartile = 0;                     // 0 = every player, 1..4 = that quartile only
    // cssr
    int L = 1;
    double alpha = 0.001;
    std::string test = "chi_square";
    std::uint64_t min_count = 5;
    // evaluate
    double split_fraction = 0.9;
    std::size_t bootstrap_n = 1000;
    std::uint64_t bootstrap_seed = 12345;
    std::string fourth_game = "auto";     // auto (on when sweeping several L), on, off
    // sweep
    std::string schemes = "delta_prev,delta_median,delta_mean";
    std::string thetas;                   // empty = default grid
    std::string lengths = "1,2,3";
    std::string quartiles = "1,2,3,4";    // 0 = whole population
    // export-dot
    double min_edge_prob = 0.1;
    bool include_transient = false;
    // synth
    std::string synth_spec;               // JSON session generator spec; empty = defaults
    std::uint64_t synth_seed = 1;
    std::size_t synth_players = 1000;
    // run
    std::string outdir = "out";
    bool force = false;
    unsigned threads = 1;

    /// Throws ConfigError naming the offending field.
    void validate(const std::string& subcommand) const;

    SegmentOptions segment_options() const;
    AlphabetSpec alphabet_spec() const;
    CssrConfig cssr_config() const;
};

nlohmann::json to_json(const RunConfig& config);

/// Runs one subcommand and returns its exit status. Errors are reported on
/// `log` with the status they map to: 2 for configuration problems
/// (including refusing to overwrite without `force`), 3 for data problems
/// and missing upstream artifacts, 4 for internal invariant failures.
int run_subcommand(const std::string& name, const RunConfig& config, std::ostream& log);

}  // namespace playmech
