#pragma once

// Causal State Splitting Reconstruction.
//
// Histories are strings over a small alphabet, oldest symbol first. A
// "suffix" of length l is the last l symbols before a position; its counts
// are the symbols observed right after it. The empty suffix holds the
// marginal counts.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace playmech {

struct SuffixStats {
    std::string alphabet;
    int max_length = 0;
    std::map<std::string, std::vector<std::uint64_t>> counts;

    const std::vector<std::uint64_t>* find(std::string_view suffix) const;
    std::uint64_t total(std::string_view suffix) const;
    /// Associative, commutative merge; both sides must share alphabet and length.
    void merge(const SuffixStats& other);
    int symbol_index(char c) const;
};

/// Credits every suffix of length 0..max_length ending before each position
/// with the symbol at that position. Windows never span two streams.
SuffixStats collect_suffix_stats(std::span<const std::string> streams, std::string_view alphabet,
                                 int max_length);

enum class TestKind { ChiSquare, KolmogorovSmirnov };
const char* to_string(TestKind t);
TestKind test_kind_from_string(std::string_view s);

struct CssrConfig {
    int max_length = 1;       // L
    double alpha = 0.001;     // significance level of the equality test
    TestKind test = TestKind::ChiSquare;
    std::uint64_t min_count = 5;  // rarer suffixes inherit their parent's state
    int state_cap_factor = 10;    // determinization may grow states up to this factor

    void validate() const;
    bool operator==(const CssrConfig&) const = default;
};

/// True when "same next-symbol distribution" is not rejected at level alpha.
/// Samples smaller than min_count cannot reject and count as equal.
bool test_equal(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b,
                const CssrConfig& config);

struct CausalState {
    int id = 0;
    std::vector<std::string> members;   // suffixes, sorted
    std::vector<std::uint64_t> counts;  // pooled next-symbol counts
    std::vector<double> emission;       // P(symbol | state)
    std::vector<int> transitions;       // per symbol; -1 when undefined
    bool recurrent = false;

    bool operator==(const CausalState&) const = default;
};

struct EpsilonMachine {
    std::string alphabet;
    CssrConfig config;
    std::vector<CausalState> states;
    std::map<std::string, int> sync;  // suffix -> state id
    std::vector<double> marginal;

    std::size_t recurrent_count() const;
    int symbol_index(char c) const;  // -1 when not in the alphabet
    /// State of the longest known suffix (length 1..L) of `history`.
    std::optional<int> synchronize(std::string_view history) const;

    bool operator==(const EpsilonMachine&) const = default;
};

/// Throws DataError on empty statistics or when determinization exceeds
/// the state cap.
EpsilonMachine fit(const SuffixStats& stats, const CssrConfig& config);

/// Recomputes `recurrent` flags: states in closed strongly connected
/// components of the positive-probability transition graph.
void mark_recurrent(EpsilonMachine& machine);

/// Stationary probability of each state (transient states get 0). With
/// several closed classes each class is weighted by its pooled observation
/// count, or equally when the machine carries no counts.
std::vector<double> stationary_distribution(const EpsilonMachine& machine);

/// Pairs of same-state member suffixes whose continuation distributions the
/// configured test tells apart. Empty for a fully refined machine.
std::vector<std::pair<std::string, std::string>> audit_refinement(const EpsilonMachine& machine,
                                                                  const SuffixStats& stats);

struct DotOptions {
    double min_edge_prob = 0.1;
    bool include_transient = false;
};

std::string export_dot(const EpsilonMachine& machine, const DotOptions& options = {});

struct DotGraph {
    struct Node {
        int id = 0;
        std::vector<double> emission;
    };
    struct Edge {
        int from = 0;
        int to = 0;
        char symbol = 0;
        double prob = 0.0;
    };
    std::vector<Node> nodes;
    std::vector<Edge> edges;
};

/// Reads DOT text produced by export_dot.
DotGraph parse_dot(std::string_view dot, std::string_view alphabet);

nlohmann::json to_json(const CssrConfig& config);
CssrConfig cssr_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EpsilonMachine& machine);
EpsilonMachine machine_from_json(const nlohmann::json& j);

}  // namespace playmech
