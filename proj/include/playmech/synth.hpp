#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "playmech/cssr.hpp"
#include "playmech/ingest.hpp"

namespace playmech {

enum class ProcessKind { Iid, Periodic, GoldenMean, EvenProcess, CustomUnifilar };
const char* to_string(ProcessKind k);
ProcessKind process_kind_from_string(std::string_view s);

struct UnifilarStateSpec {
    std::vector<double> emission;  // per alphabet symbol
    std::vector<int> transitions;  // per alphabet symbol; -1 where emission is 0
};

/// A stationary process with a known minimal unifilar presentation.
///  - iid: one state emitting `probabilities` (uniform when empty)
///  - periodic: repeats `pattern`; one state per position
///  - golden_mean: binary, no two consecutive 1s; P(1) = p in the free state
///  - even_process: binary, 1s come in runs of even length; P(1) = p in the free state
///  - custom_unifilar: `states` verbatim
struct GeneratorSpec {
    ProcessKind kind = ProcessKind::Iid;
    std::string alphabet = "01";
    std::vector<double> probabilities;
    double p = 0.5;
    std::string pattern = "01";
    std::vector<UnifilarStateSpec> states;
};

/// Exact minimal machine for a generator description. Throws ConfigError for
/// non-stochastic rows, non-unifilar or non-minimal custom machines, and
/// periodic patterns that repeat a shorter word.
EpsilonMachine analytic_machine(const GeneratorSpec& spec);

/// `length` symbols started from the stationary distribution.
std::string generate(const GeneratorSpec& spec, std::size_t length, std::uint64_t seed);
std::string generate_from_machine(const EpsilonMachine& machine, std::size_t length,
                                  std::uint64_t seed);

/// Session-level process over the play alphabet. The next delta class
/// depends on the previous one (or on the session start), and the chance of
/// ending the session depends on the class just played.
struct SessionGeneratorSpec {
    std::int64_t theta = 8000;
    // rows: session start, after P, after G, after V; columns: P, G, V
    std::array<std::array<double, 3>, 4> next_class{{{0.4, 0.4, 0.2},
                                                      {0.05, 0.15, 0.8},
                                                      {0.3, 0.5, 0.2},
                                                      {0.8, 0.15, 0.05}}};
    std::array<double, 3> quit_hazard{0.5, 0.08, 0.04};  // after P, G, V
    double start_quit = 0.0;                           // one-game sessions
    int max_games = 15;
    std::size_t players = 1000;
    int min_sessions = 1;
    int max_sessions = 3;
    std::int64_t base_score = 50000;
    std::int64_t base_spread = 10000;
    std::int64_t drop_max = 3000;    // P deltas uniform in [-drop_max, -1]
    std::int64_t gain_span = 5000;   // V deltas uniform in [theta, theta + gain_span)
    std::int64_t threshold_h = 2;    // gaps between sessions are at least this
    std::int64_t horizon_h = 24 * 365;

    void validate() const;
};

/// Records for a synthetic population, ready for the ingest pipeline.
std::vector<GameRecord> generate_sessions(const SessionGeneratorSpec& spec, std::uint64_t seed);

/// Machine over "PGVQ" that generates the delta-prev encoding of the
/// sessions above (ignoring the session length cap). State 0 is the session
/// start; states 1..3 follow P, G, V.
EpsilonMachine session_machine(const SessionGeneratorSpec& spec);

nlohmann::json to_json(const GeneratorSpec& spec);
GeneratorSpec generator_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SessionGeneratorSpec& spec);
SessionGeneratorSpec session_spec_from_json(const nlohmann::json& j);

}  // namespace playmech
