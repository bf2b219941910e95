#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "playmech/cssr.hpp"
#include "playmech/encode.hpp"
#include "playmech/ingest.hpp"

namespace playmech {

struct TrainTestSplit {
    std::vector<EncodedSession> train;
    std::vector<EncodedSession> test;
    double fraction = 0.9;
};

/// Orders sessions by (start_h, player_id, session_index) and puts the first
/// ceil(fraction * n) in train. Sessions are never split. Throws DataError
/// with fewer than 10 sessions.
TrainTestSplit temporal_split(std::span<const EncodedSession> sessions, double fraction = 0.9);

struct Prediction {
    std::string player_id;
    std::size_t session_index = 0;
    std::size_t position = 0;  // symbol offset inside the session (or stream)
    std::vector<double> distribution;
    char actual = 0;
    bool synchronized = false;
};

/// Predicts every symbol of `stream` from the longest known suffix of the
/// symbols before it. With no usable history the machine's marginal is
/// emitted and the prediction is marked unsynchronized.
std::vector<Prediction> predict_stream(const EpsilonMachine& machine, std::string_view stream);

/// Same walk over each player's sessions in order; history carries across a
/// player's sessions but never across players.
std::vector<Prediction> predict_sessions(const EpsilonMachine& machine,
                                         std::span<const EncodedSession> sessions);

/// Filters by following the machine's transitions from `start_state` for
/// each player instead of suffix lookup. Meant for generating machines whose
/// start state is known. An unexpected Q resets to the start state.
std::vector<Prediction> predict_with_transitions(const EpsilonMachine& machine,
                                                 std::span<const EncodedSession> sessions,
                                                 int start_state);

struct RocCurve {
    char target = 0;
    std::vector<std::pair<double, double>> points;  // (FPR, TPR), from (0,0) to (1,1)
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

/// Threshold sweep over distinct scores, highest first; equal scores move
/// together. Throws DataError without at least one positive and one negative.
RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels,
                   char target = 0);
RocCurve roc_curve(std::span<const Prediction> predictions, char target,
                   std::string_view alphabet);

double auc_trapezoid(const RocCurve& curve);
/// Mann-Whitney U / (n+ n-), ties count one half.
double auc_rank_sum(std::span<const double> scores, std::span<const std::uint8_t> labels);
/// Both routes; throws InvariantError if they disagree by more than 1e-9.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// sum_X w_X AUC_X / sum_X w_X.
double weighted_auc(std::span<const double> aucs, std::span<const double> weights);

struct BootstrapOptions {
    std::size_t n_resamples = 1000;
    std::uint64_t seed = 12345;
};

struct SymbolAuc {
    char symbol = 0;
    std::optional<double> auc;  // undefined when the symbol never (or always) occurs
    double weight = 0.0;        // frequency among actual symbols, renormalized over defined AUCs
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

struct AucReport {
    std::vector<SymbolAuc> symbols;
    double weighted = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t n_predictions = 0;
    std::size_t n_sessions = 0;
    std::size_t n_resamples = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> warnings;
};

/// Per-symbol one-vs-rest AUCs, their frequency-weighted mean and percentile
/// bootstrap intervals. Resampling unit is the session (player_id,
/// session_index). `n_resamples == 0` skips the bootstrap.
AucReport evaluate_predictions(std::span<const Prediction> predictions, std::string_view alphabet,
                               const BootstrapOptions& bootstrap = {});

struct EvaluationOptions {
    CssrConfig cssr;
    double train_fraction = 0.9;
    BootstrapOptions bootstrap;
    /// Keep only sessions with at least four games and score only symbols
    /// from the fourth game on, so machines with different L see the same
    /// targets.
    bool from_fourth_game = false;
};

struct EvaluationResult {
    EpsilonMachine machine;
    std::vector<Prediction> predictions;
    AucReport report;
    std::size_t n_train_sessions = 0;
    std::size_t n_test_sessions = 0;
};

/// Split, fit on train, predict test, score.
EvaluationResult evaluate_encoded(std::span<const EncodedSession> sessions,
                                  const EvaluationOptions& options);

/// Sessions kept by the fourth-game restriction, and predictions scored by it.
bool keeps_for_fourth_game(const EncodedSession& session);
std::vector<Prediction> from_fourth_game(std::span<const Prediction> predictions);

struct SweepOptions {
    std::vector<Scheme> schemes{Scheme::DeltaPrev, Scheme::DeltaMedian, Scheme::DeltaMean};
    std::vector<std::int64_t> thetas = theta_grid();
    std::vector<int> lengths{1};
    ReferenceScope scope = ReferenceScope::Session;
    EvaluationOptions evaluation;
    int quartile = 0;  // label carried into the report
    unsigned threads = 1;
};

struct SweepCell {
    Scheme scheme = Scheme::DeltaPrev;
    std::int64_t theta = 0;
    int L = 1;
    int quartile = 0;
    double weighted_auc = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t states = 0;
    std::size_t recurrent_states = 0;
    std::size_t n_train_sessions = 0;
    std::size_t n_test_sessions = 0;
    bool best_theta = false;  // argmax over theta for this (scheme, L)
    std::string error;        // non-empty when the cell could not be evaluated
};

struct SweepReport {
    std::vector<SweepCell> cells;

    const SweepCell* best(Scheme scheme, int L) const;
    /// Scheme whose best cell has the highest weighted AUC at this L.
    std::optional<Scheme> best_scheme(int L) const;
};

/// Cells are independent and may run on `threads` workers; the report order
/// is (scheme, L, theta) regardless.
SweepReport model_selection(std::span<const Session> sessions, const SweepOptions& options);

nlohmann::json to_json(const AucReport& report);
nlohmann::json to_json(const SweepCell& cell);

}  // namespace playmech
