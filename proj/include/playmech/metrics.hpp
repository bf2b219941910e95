#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "playmech/common.hpp"
#include "playmech/ingest.hpp"

namespace playmech {

struct SkillProfile {
    std::string player_id;
    std::size_t n_games = 0;
    std::optional<double> talent;   // defined iff n_games >= 3
    std::optional<double> success;  // defined iff n_games >= 4
};

/// Median score of the first three games.
std::optional<double> talent(const PlayerHistory& history);
/// Median of the top min(3, n-3) scores after discarding the first three games.
std::optional<double> success(const PlayerHistory& history);
SkillProfile skill_profile(const PlayerHistory& history);
std::vector<SkillProfile> skill_profiles(std::span<const PlayerHistory> histories);
/// Same as skill_profiles, but reconstructs each player's history from their sessions.
std::vector<SkillProfile> skill_profiles(std::span<const Session> sessions);

enum class Basis { Talent, Success };
const char* to_string(Basis b);

/// Quartile assignment by a skill score. Quartile 1 holds the lowest scores.
/// A tie group straddling a cut point goes entirely to the lower quartile.
struct QuartileSplit {
    Basis basis = Basis::Talent;
    std::array<double, 3> boundaries{};
    std::map<std::string, int> assignment;
    bool degenerate = false;  // some quartile is empty because of ties

    /// 0 when the player is not part of the split.
    int quartile_of(const std::string& player_id) const;
    std::array<std::size_t, 4> sizes() const;
};

/// Profiles lacking the basis score are ignored. Throws DataError with
/// fewer than four eligible profiles.
QuartileSplit quartile_split(std::span<const SkillProfile> profiles, Basis basis);

struct CorrelationResult {
    double r = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

/// Pearson r with a two-sided p-value from t = r sqrt((n-2)/(1-r^2)).
/// Throws DataError for n < 3, unequal lengths or zero variance.
CorrelationResult pearson(std::span<const double> xs, std::span<const double> ys);

/// Overall success-vs-talent correlation plus one per talent quartile.
struct SkillCorrelations {
    CorrelationResult overall;
    std::array<std::optional<CorrelationResult>, 4> by_quartile;
};
SkillCorrelations skill_correlations(std::span<const SkillProfile> profiles,
                                     const QuartileSplit& talent_split);

// ---------------------------------------------------------------------------
// Learning curves and the shuffle control
// ---------------------------------------------------------------------------

struct CurvePoint {
    int quartile = 0;
    int length = 0;  // exact session length
    int index = 0;   // 1-based game index within the session
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

struct LearningCurveSet {
    std::vector<CurvePoint> points;  // ordered by (quartile, length, index)

    const CurvePoint* find(int quartile, int length, int index) const;
};

LearningCurveSet learning_curves(std::span<const Session> sessions, const QuartileSplit& split,
                                 int min_length = 4, int max_length = 15);

/// Permutes game order inside every session. Each session draws from its own
/// generator seeded by (seed, player_id, session_index).
std::vector<Session> shuffle_control(std::span<const Session> sessions, std::uint64_t seed);

/// Trend test for one (quartile, length) cell: the per-session OLS slope of
/// score on index, averaged over sessions, with its standard error.
struct SlopeTest {
    int quartile = 0;
    int length = 0;
    double slope = 0.0;
    double se = 0.0;
    double z = 0.0;
    std::size_t n_sessions = 0;
    bool significant = false;  // |z| > 1.96
};

std::vector<SlopeTest> index_slope_tests(std::span<const Session> sessions,
                                         const QuartileSplit& split, int min_length = 4,
                                         int max_length = 15);

// ---------------------------------------------------------------------------
// Quitting and persistence
// ---------------------------------------------------------------------------

struct IndexRange {
    int first = 0;
    int last = 0;
};

struct QuitCurveOptions {
    std::int64_t bin_width = 1000;
    std::int64_t min_delta = -30000;  // deltas outside [min, max) clamp into the edge bins
    std::int64_t max_delta = 30000;
    std::vector<IndexRange> index_ranges{{3, 6}, {7, 10}, {11, 14}};
};

struct QuitPoint {
    int quartile = 0;
    IndexRange range;
    std::int64_t bin_lo = 0;
    std::int64_t bin_hi = 0;
    Proportion quit;
};

struct QuitCurve {
    std::vector<QuitPoint> points;  // empty bins omitted
};

/// Delta is score minus previous score within a session; a game "quits"
/// when it is the session's last game.
QuitCurve quit_probability_curve(std::span<const Session> sessions, const QuartileSplit& split,
                                 const QuitCurveOptions& options = {});

struct PersistenceCell {
    Basis basis = Basis::Talent;
    int quartile = 0;
    Proportion quit_after_drop;
    Proportion quit_after_gain;
};

struct PersistenceResult {
    std::vector<PersistenceCell> cells;  // basis-major, quartiles 1..4

    const PersistenceCell* find(Basis basis, int quartile) const;
};

PersistenceResult persistence(std::span<const Session> sessions, const QuartileSplit& by_talent,
                              const QuartileSplit& by_success);

// ---------------------------------------------------------------------------
// Practice spacing
// ---------------------------------------------------------------------------

struct SpacingBin {
    std::int64_t lo_h = 0;
    std::int64_t hi_h = 0;  // exclusive; INT64_MAX for the open last bin
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

struct SpacingCurve {
    std::vector<SpacingBin> game_level;
    std::vector<SpacingBin> session_level;
};

std::vector<std::int64_t> default_break_edges();

/// Sessions grouped by player in session order. `edges` are ascending bin
/// lower bounds in hours; the last bin is open-ended.
SpacingCurve spacing_improvement(std::span<const Session> sessions,
                                 std::span<const std::int64_t> edges);

}  // namespace playmech
