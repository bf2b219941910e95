#include "playmech/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

namespace playmech {
namespace {

std::vector<double> scores_of(std::span<const GameRecord> games) {
    std::vector<double> v;
    v.reserve(games.size());
    for (const auto& g : games) v.push_back(static_cast<double>(g.score));
    return v;
}

// Consecutive runs of sessions belonging to one player.
template <typename F>
void for_each_player(std::span<const Session> sessions, F&& f) {
    std::size_t i = 0;
    while (i < sessions.size()) {
        std::size_t j = i;
        while (j < sessions.size() && sessions[j].player_id == sessions[i].player_id) ++j;
        f(sessions.subspan(i, j - i));
        i = j;
    }
}

}  // namespace

const char* to_string(Basis b) { return b == Basis::Talent ? "talent" : "success"; }

std::optional<double> talent(const PlayerHistory& history) {
    if (history.games.size() < 3) return std::nullopt;
    return median(scores_of(std::span(history.games).first(3)));
}

std::optional<double> success(const PlayerHistory& history) {
    if (history.games.size() < 4) return std::nullopt;
    auto rest = scores_of(std::span(history.games).subspan(3));
    const auto k = std::min<std::size_t>(3, rest.size());
    std::partial_sort(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(k), rest.end(),
                      std::greater<>());
    rest.resize(k);
    return median(std::move(rest));
}

SkillProfile skill_profile(const PlayerHistory& history) {
    return {history.player_id, history.games.size(), talent(history), success(history)};
}

std::vector<SkillProfile> skill_profiles(std::span<const PlayerHistory> histories) {
    std::vector<SkillProfile> out;
    out.reserve(histories.size());
    for (const auto& h : histories) out.push_back(skill_profile(h));
    return out;
}

std::vector<SkillProfile> skill_profiles(std::span<const Session> sessions) {
    std::vector<SkillProfile> out;
    for_each_player(sessions, [&](std::span<const Session> mine) {
        PlayerHistory h{mine.front().player_id, {}};
        for (const auto& s : mine) h.games.insert(h.games.end(), s.games.begin(), s.games.end());
        out.push_back(skill_profile(h));
    });
    return out;
}

int QuartileSplit::quartile_of(const std::string& player_id) const {
    auto it = assignment.find(player_id);
    return it == assignment.end() ? 0 : it->second;
}

std::array<std::size_t, 4> QuartileSplit::sizes() const {
    std::array<std::size_t, 4> n{};
    for (const auto& [id, q] : assignment) ++n[static_cast<std::size_t>(q - 1)];
    return n;
}

QuartileSplit quartile_split(std::span<const SkillProfile> profiles, Basis basis) {
    std::vector<std::pair<double, const std::string*>> scored;
    for (const auto& p : profiles) {
        const auto& v = basis == Basis::Talent ? p.talent : p.success;
        if (v) scored.emplace_back(*v, &p.player_id);
    }
    if (scored.size() < 4) {
        throw DataError("quartile split needs at least 4 players with a " +
                        std::string(to_string(basis)) + " score");
    }
    std::vector<double> sorted;
    sorted.reserve(scored.size());
    for (const auto& [v, id] : scored) sorted.push_back(v);
    std::sort(sorted.begin(), sorted.end());

    QuartileSplit split;
    split.basis = basis;
    const auto n = sorted.size();
    for (std::size_t k = 1; k <= 3; ++k) {
        const auto cut = (k * n + 3) / 4;  // ceil(k n / 4) players in quartiles <= k
        split.boundaries[k - 1] = sorted[cut - 1];
    }
    for (const auto& [v, id] : scored) {
        int q = 1;
        for (double b : split.boundaries) q += v > b ? 1 : 0;
        split.assignment[*id] = q;
    }
    const auto sz = split.sizes();
    split.degenerate = std::find(sz.begin(), sz.end(), 0u) != sz.end();
    return split;
}

CorrelationResult pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw DataError("pearson: samples are not paired");
    const auto n = xs.size();
    if (n < 3) throw DataError("pearson: need at least 3 samples");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
            throw DataError("pearson: non-finite sample");
        }
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0 || syy == 0) throw DataError("pearson: zero variance, correlation undefined");
    CorrelationResult res;
    res.n = n;
    res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double df = static_cast<double>(n - 2);
    const double denom = 1.0 - res.r * res.r;
    res.p_value = denom <= 0 ? 0.0 : students_t_two_sided(res.r * std::sqrt(df / denom), df);
    return res;
}

SkillCorrelations skill_correlations(std::span<const SkillProfile> profiles,
                                     const QuartileSplit& talent_split) {
    std::vector<double> t, s;
    std::array<std::vector<double>, 4> qt, qs;
    for (const auto& p : profiles) {
        if (!p.talent || !p.success) continue;
        t.push_back(*p.talent);
        s.push_back(*p.success);
        if (const int q = talent_split.quartile_of(p.player_id); q > 0) {
            qt[q - 1].push_back(*p.talent);
            qs[q - 1].push_back(*p.success);
        }
    }
    SkillCorrelations out;
    out.overall = pearson(t, s);
    for (std::size_t q = 0; q < 4; ++q) {
        try {
            out.by_quartile[q] = pearson(qt[q], qs[q]);
        } catch (const DataError&) {
            // too few or constant samples in this quartile; left undefined
        }
    }
    return out;
}

const CurvePoint* LearningCurveSet::find(int quartile, int length, int index) const {
    for (const auto& p : points) {
        if (p.quartile == quartile && p.length == length && p.index == index) return &p;
    }
    return nullptr;
}

LearningCurveSet learning_curves(std::span<const Session> sessions, const QuartileSplit& split,
                                 int min_length, int max_length) {
    std::map<std::array<int, 3>, RunningStats> acc;
    for (const auto& s : sessions) {
        const int len = static_cast<int>(s.games.size());
        if (len < min_length || len > max_length) continue;
        const int q = split.quartile_of(s.player_id);
        if (q == 0) continue;
        for (int i = 0; i < len; ++i) {
            acc[{q, len, i + 1}].add(static_cast<double>(s.games[static_cast<std::size_t>(i)].score));
        }
    }
    LearningCurveSet out;
    for (const auto& [key, st] : acc) {
        out.points.push_back({key[0], key[1], key[2], st.mean(), st.stderr_mean(), st.count()});
    }
    return out;
}

std::vector<Session> shuffle_control(std::span<const Session> sessions, std::uint64_t seed) {
    std::vector<Session> out(sessions.begin(), sessions.end());
    for (auto& s : out) {
        if (s.games.size() < 2) continue;
        std::mt19937_64 rng(derive_seed(seed, s.player_id, s.session_index));
        std::vector<std::int64_t> scores;
        for (const auto& g : s.games) scores.push_back(g.score);
        // Fisher-Yates with our own index draws keeps the permutation stable
        // across standard library implementations.
        for (std::size_t i = scores.size() - 1; i > 0; --i) {
            const auto j = static_cast<std::size_t>(rng() % (i + 1));
            std::swap(scores[i], scores[j]);
        }
        for (std::size_t i = 0; i < scores.size(); ++i) s.games[i].score = scores[i];
    }
    return out;
}

std::vector<SlopeTest> index_slope_tests(std::span<const Session> sessions,
                                         const QuartileSplit& split, int min_length,
                                         int max_length) {
    std::map<std::pair<int, int>, RunningStats> acc;
    for (const auto& s : sessions) {
        const int len = static_cast<int>(s.games.size());
        if (len < min_length || len > max_length) continue;
        const int q = split.quartile_of(s.player_id);
        if (q == 0) continue;
        const double mean_idx = (len + 1) / 2.0;
        double mean_score = 0;
        for (const auto& g : s.games) mean_score += static_cast<double>(g.score);
        mean_score /= len;
        double sxy = 0, sxx = 0;
        for (int i = 0; i < len; ++i) {
            const double dx = (i + 1) - mean_idx;
            sxy += dx * (static_cast<double>(s.games[static_cast<std::size_t>(i)].score) - mean_score);
            sxx += dx * dx;
        }
        acc[{q, len}].add(sxy / sxx);
    }
    std::vector<SlopeTest> out;
    for (const auto& [key, st] : acc) {
        SlopeTest t;
        t.quartile = key.first;
        t.length = key.second;
        t.slope = st.mean();
        t.se = st.stderr_mean();
        t.n_sessions = st.count();
        t.z = t.se > 0 ? t.slope / t.se : 0.0;
        t.significant = std::abs(t.z) > 1.959963984540054;
        out.push_back(t);
    }
    return out;
}

QuitCurve quit_probability_curve(std::span<const Session> sessions, const QuartileSplit& split,
                                 const QuitCurveOptions& options) {
    if (options.bin_width <= 0 || options.max_delta <= options.min_delta) {
        throw ConfigError("quit curve: invalid delta binning");
    }
    const auto bin_of = [&](std::int64_t delta) {
        const auto clamped =
            std::clamp(delta, options.min_delta, options.max_delta - 1) - options.min_delta;
        return options.min_delta + (clamped / options.bin_width) * options.bin_width;
    };
    // key: quartile, range slot, bin lower edge
    std::map<std::tuple<int, std::size_t, std::int64_t>, Proportion> cells;
    for (const auto& s : sessions) {
        const int q = split.quartile_of(s.player_id);
        if (q == 0) continue;
        for (std::size_t g = 1; g < s.games.size(); ++g) {
            const int index = static_cast<int>(g) + 1;
            const auto delta = s.games[g].score - s.games[g - 1].score;
            const bool last = g + 1 == s.games.size();
            for (std::size_t r = 0; r < options.index_ranges.size(); ++r) {
                const auto& range = options.index_ranges[r];
                if (index < range.first || index > range.last) continue;
                auto& cell = cells[{q, r, bin_of(delta)}];
                ++cell.denominator;
                if (last) ++cell.numerator;
            }
        }
    }
    QuitCurve out;
    for (const auto& [key, p] : cells) {
        const auto& [q, r, lo] = key;
        ensure(p.numerator <= p.denominator, "quit curve cell numerator > denominator");
        out.points.push_back({q, options.index_ranges[r], lo,
                              std::min(lo + options.bin_width, options.max_delta), p});
    }
    return out;
}

const PersistenceCell* PersistenceResult::find(Basis basis, int quartile) const {
    for (const auto& c : cells) {
        if (c.basis == basis && c.quartile == quartile) return &c;
    }
    return nullptr;
}

PersistenceResult persistence(std::span<const Session> sessions, const QuartileSplit& by_talent,
                              const QuartileSplit& by_success) {
    PersistenceResult out;
    for (const auto& [split, basis] : {std::pair{&by_talent, Basis::Talent}, std::pair{&by_success, Basis::Success}}) {
        std::array<PersistenceCell, 4> cells{};
        for (int q = 0; q < 4; ++q) cells[static_cast<std::size_t>(q)] = {basis, q + 1, {}, {}};
        for (const auto& s : sessions) {
            const int q = split->quartile_of(s.player_id);
            if (q == 0) continue;
            auto& cell = cells[static_cast<std::size_t>(q - 1)];
            for (std::size_t g = 1; g < s.games.size(); ++g) {
                const bool last = g + 1 == s.games.size();
                const auto cur = s.games[g].score, prev = s.games[g - 1].score;
                Proportion* p = cur < prev   ? &cell.quit_after_drop
                                : cur > prev ? &cell.quit_after_gain
                                             : nullptr;
                if (!p) continue;
                ++p->denominator;
                if (last) ++p->numerator;
            }
        }
        out.cells.insert(out.cells.end(), cells.begin(), cells.end());
    }
    return out;
}

std::vector<std::int64_t> default_break_edges() {
    return {0, 1, 2, 3, 6, 12, 24, 48, 72, 96, 168, 336, 720};
}

SpacingCurve spacing_improvement(std::span<const Session> sessions,
                                 std::span<const std::int64_t> edges) {
    if (edges.empty() || !std::is_sorted(edges.begin(), edges.end()) ||
        std::adjacent_find(edges.begin(), edges.end()) != edges.end()) {
        throw ConfigError("spacing: break edges must be strictly ascending");
    }
    const auto slot = [&](std::int64_t gap) -> std::optional<std::size_t> {
        if (gap < edges.front()) return std::nullopt;
        auto it = std::upper_bound(edges.begin(), edges.end(), gap);
        return static_cast<std::size_t>(it - edges.begin()) - 1;
    };
    std::vector<RunningStats> game(edges.size()), session(edges.size());

    for_each_player(sessions, [&](std::span<const Session> mine) {
        const GameRecord* prev = nullptr;
        for (const auto& s : mine) {
            for (const auto& g : s.games) {
                if (prev) {
                    if (auto k = slot(g.time_h - prev->time_h)) {
                        game[*k].add(static_cast<double>(g.score - prev->score));
                    }
                }
                prev = &g;
            }
        }
        for (std::size_t k = 1; k < mine.size(); ++k) {
            const auto& before = mine[k - 1].games;
            const auto& after = mine[k].games;
            // the earlier session's final game is excluded before taking its last three
            if (before.size() < 4 || after.size() < 3) continue;
            const auto tail = std::span(before).subspan(before.size() - 4, 3);
            const double improvement = median(scores_of(std::span(after).first(3))) -
                                       median(scores_of(tail));
            if (auto b = slot(mine[k].start_h - mine[k - 1].end_h)) session[*b].add(improvement);
        }
    });

    const auto emit = [&](const std::vector<RunningStats>& acc) {
        std::vector<SpacingBin> bins;
        for (std::size_t k = 0; k < edges.size(); ++k) {
            const auto hi = k + 1 < edges.size() ? edges[k + 1]
                                                 : std::numeric_limits<std::int64_t>::max();
            bins.push_back({edges[k], hi, acc[k].mean(), acc[k].stderr_mean(), acc[k].count()});
        }
        return bins;
    };
    return {emit(game), emit(session)};
}

}  // namespace playmech
