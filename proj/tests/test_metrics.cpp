#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "playmech/common.hpp"
#include "playmech/metrics.hpp"

using namespace playmech;

namespace {

// Sessions of hourly games; `gap_before` is the break after the player's
// previous session.
struct Builder {
    std::vector<GameRecord> records;
    std::map<std::string, std::int64_t> last;

    Builder& add(const std::string& player, const std::vector<std::int64_t>& scores,
                 std::int64_t gap_before = 24) {
        auto it = last.find(player);
        std::int64_t t = it == last.end() ? 0 : it->second + gap_before;
        for (auto s : scores) {
            records.push_back({player, t, s, records.size()});
            last[player] = t++;
        }
        return *this;
    }

    std::vector<Session> sessions() const { return segment_all(build_histories(records)); }
};

PlayerHistory scores_history(const std::vector<std::int64_t>& scores) {
    PlayerHistory h;
    h.player_id = "p";
    for (std::size_t i = 0; i < scores.size(); ++i) {
        h.games.push_back({"p", static_cast<std::int64_t>(i), scores[i], i});
    }
    return h;
}

std::vector<SkillProfile> talent_profiles(const std::vector<double>& talents) {
    std::vector<SkillProfile> out;
    for (std::size_t i = 0; i < talents.size(); ++i) {
        SkillProfile p;
        p.player_id = "p" + std::to_string(i);
        p.n_games = 3;
        p.talent = talents[i];
        out.push_back(p);
    }
    return out;
}

QuartileSplit everyone_in(const std::vector<std::string>& players, int q) {
    QuartileSplit s;
    for (const auto& p : players) s.assignment[p] = q;
    return s;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("talent is the median of the first three games") {
    CHECK(talent(scores_history({100, 300, 200, 900})) == 200);
    CHECK_FALSE(talent(scores_history({100, 300})));
    CHECK(talent(scores_history({5, 5, 5})) == 5);
}

TEST_CASE("success is the median of the best three after the first three") {
    CHECK(success(scores_history({100, 300, 200, 500, 400, 800, 600})) == 600);
    CHECK(success(scores_history({100, 300, 200, 900})) == 900);
    CHECK_FALSE(success(scores_history({1, 2, 3})));
    // Two remaining games: median of both.
    CHECK(success(scores_history({1, 2, 3, 10, 20})) == 15);
}

TEST_CASE("property: talent and success ignore permutations of later games") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<std::int64_t> s(3 + rng() % 10);
        for (auto& x : s) x = static_cast<std::int64_t>(rng() % 1000);
        const auto t0 = talent(scores_history(s)), s0 = success(scores_history(s));
        std::shuffle(s.begin() + 3, s.end(), rng);
        REQUIRE(talent(scores_history(s)) == t0);
        REQUIRE(success(scores_history(s)) == s0);
    }
}

TEST_CASE("quartiles of 1..8 are exact pairs") {
    const auto split = quartile_split(talent_profiles({1, 2, 3, 4, 5, 6, 7, 8}), Basis::Talent);
    CHECK(split.quartile_of("p0") == 1);
    CHECK(split.quartile_of("p1") == 1);
    CHECK(split.quartile_of("p2") == 2);
    CHECK(split.quartile_of("p5") == 3);
    CHECK(split.quartile_of("p7") == 4);
    CHECK(split.sizes() == std::array<std::size_t, 4>{2, 2, 2, 2});
    CHECK_FALSE(split.degenerate);
    CHECK(split.quartile_of("nobody") == 0);
}

TEST_CASE("equal scores all land in quartile 1 with a degenerate flag") {
    const auto split = quartile_split(talent_profiles({5, 5, 5, 5, 5}), Basis::Talent);
    CHECK(split.sizes() == std::array<std::size_t, 4>{5, 0, 0, 0});
    CHECK(split.degenerate);
    CHECK_THROWS_AS(quartile_split(talent_profiles({1, 2, 3}), Basis::Talent), DataError);
}

TEST_CASE("property: quartile assignment is monotone and tie groups stay together") {
    std::mt19937_64 rng(22);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> t(4 + rng() % 40);
        for (auto& x : t) x = static_cast<double>(rng() % 12);
        const auto profiles = talent_profiles(t);
        const auto split = quartile_split(profiles, Basis::Talent);
        for (std::size_t i = 0; i < t.size(); ++i) {
            for (std::size_t j = 0; j < t.size(); ++j) {
                const int qi = split.quartile_of(profiles[i].player_id);
                const int qj = split.quartile_of(profiles[j].player_id);
                if (t[i] < t[j]) REQUIRE(qi <= qj);
                if (t[i] == t[j]) REQUIRE(qi == qj);
            }
        }
    }
}

TEST_CASE("pearson") {
    const std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y, z;
    for (double v : x) {
        y.push_back(2 * v + 1);
        z.push_back(-v);
    }
    CHECK(pearson(x, y).r == doctest::Approx(1.0));
    CHECK(pearson(x, z).r == doctest::Approx(-1.0));
    CHECK(pearson(x, y).p_value == doctest::Approx(0.0));
    const std::vector<double> flat{1, 1, 1, 1, 1};
    CHECK_THROWS_AS(pearson(x, flat), DataError);
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), DataError);
}

TEST_CASE("pearson r and p-value match a direct computation") {
    const std::vector<double> x{1, 2, 3, 4, 5, 6}, y{2, 1, 4, 3, 7, 5};
    double mx = 3.5, my = 22.0 / 6;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    const double r = sxy / std::sqrt(sxx * syy);
    const auto res = pearson(x, y);
    CHECK(res.r == doctest::Approx(r).epsilon(1e-12));
    CHECK(res.n == 6);
    CHECK(res.p_value == doctest::Approx(students_t_two_sided(r * std::sqrt(4 / (1 - r * r)), 4)));
}

TEST_CASE("property: pearson of an affine map is +-1") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> d;
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<double> x(3 + rng() % 30), y;
        for (auto& v : x) v = d(rng);
        const double a = d(rng);
        if (std::abs(a) < 1e-3) continue;
        for (double v : x) y.push_back(a * v + d(rng));
        const double b = y[0] - a * x[0];
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i] + b;
        REQUIRE(pearson(x, y).r == doctest::Approx(a > 0 ? 1.0 : -1.0).epsilon(1e-9));
    }
}

TEST_CASE("single session learning curve reproduces its scores") {
    const auto sessions = Builder().add("a", {10, 20, 30, 40}).sessions();
    const auto curves = learning_curves(sessions, everyone_in({"a"}, 2));
    REQUIRE(curves.points.size() == 4);
    for (int i = 1; i <= 4; ++i) {
        const auto* p = curves.find(2, 4, i);
        REQUIRE(p);
        CHECK(p->mean == 10.0 * i);
        CHECK(p->n == 1);
        CHECK(p->se == 0);
    }
}

TEST_CASE("learning curve standard error is sd / sqrt(n)") {
    const auto sessions = Builder().add("a", {10, 20, 30, 40}).add("a", {30, 0, 0, 0}).add("a", {50, 0, 0, 0}).sessions();
    const auto curves = learning_curves(sessions, everyone_in({"a"}, 1));
    const auto* p = curves.find(1, 4, 1);
    REQUIRE(p);
    CHECK(p->mean == 30);
    CHECK(p->se == doctest::Approx(std::sqrt(400.0 / 3)));
    CHECK(p->n == 3);
    CHECK_FALSE(curves.find(1, 3, 1));
}

TEST_CASE("shuffle control keeps singletons, multisets and boundaries") {
    const auto sessions = Builder().add("a", {7}).add("a", {10, 20, 30}).sessions();
    const auto shuffled = shuffle_control(sessions, 3);
    REQUIRE(shuffled.size() == 2);
    CHECK(shuffled[0].games[0].score == 7);
    std::vector<std::int64_t> s;
    for (const auto& g : shuffled[1].games) s.push_back(g.score);
    std::sort(s.begin(), s.end());
    CHECK(s == std::vector<std::int64_t>{10, 20, 30});
}

TEST_CASE("property: shuffle preserves multisets and is seeded") {
    std::mt19937_64 rng(24);
    for (int trial = 0; trial < 10000; ++trial) {
        Builder b;
        const int n_sessions = 1 + static_cast<int>(rng() % 3);
        for (int k = 0; k < n_sessions; ++k) {
            std::vector<std::int64_t> scores(1 + rng() % 8);
            for (auto& x : scores) x = static_cast<std::int64_t>(rng() % 100);
            b.add("p", scores);
        }
        const auto sessions = b.sessions();
        const auto seed = rng();
        const auto shuffled = shuffle_control(sessions, seed);
        REQUIRE(shuffled.size() == sessions.size());
        for (std::size_t k = 0; k < sessions.size(); ++k) {
            REQUIRE(shuffled[k].session_index == sessions[k].session_index);
            REQUIRE(shuffled[k].start_h == sessions[k].start_h);
            REQUIRE(shuffled[k].end_h == sessions[k].end_h);
            std::vector<std::int64_t> a, c;
            for (const auto& g : sessions[k].games) a.push_back(g.score);
            for (const auto& g : shuffled[k].games) c.push_back(g.score);
            std::sort(a.begin(), a.end());
            std::sort(c.begin(), c.end());
            REQUIRE(a == c);
        }
        const auto again = shuffle_control(sessions, seed);
        for (std::size_t k = 0; k < sessions.size(); ++k) {
            for (std::size_t i = 0; i < again[k].games.size(); ++i) {
                REQUIRE(again[k].games[i].score == shuffled[k].games[i].score);
            }
        }
    }
}

TEST_CASE("slope test flags a steady trend and not a flat one") {
    Builder b;
    for (int k = 0; k < 30; ++k) b.add("a", {100 + k, 200 + k, 300 - k, 400 + k});
    for (int k = 0; k < 30; ++k) b.add("b", k % 2 ? std::vector<std::int64_t>{100, 110, 100, 110} : std::vector<std::int64_t>{110, 100, 110, 100});
    const auto sessions = b.sessions();
    QuartileSplit split;
    split.assignment = {{"a", 1}, {"b", 2}};
    const auto tests = index_slope_tests(sessions, split);
    REQUIRE(tests.size() == 2);
    CHECK(tests[0].quartile == 1);
    CHECK(tests[0].significant);
    CHECK(tests[0].slope > 50);
    CHECK_FALSE(tests[1].significant);
}

TEST_CASE("quit curve examples") {
    {
        const auto sessions = Builder().add("a", {0, 0, 5}).add("a", {10, 10, 15}).sessions();
        const auto curve = quit_probability_curve(sessions, everyone_in({"a"}, 1));
        const auto it = std::find_if(curve.points.begin(), curve.points.end(), [](const QuitPoint& p) {
            return p.range.first == 3 && p.bin_lo <= 5 && 5 < p.bin_hi;
        });
        REQUIRE(it != curve.points.end());
        CHECK(it->quit.value() == 1.0);
        CHECK(it->quit.denominator == 2);
    }
    {
        // The third game (delta -2) continues, the fourth (delta -2) ends the session.
        const auto sessions = Builder().add("a", {0, 10, 8, 6}).sessions();
        const auto curve = quit_probability_curve(sessions, everyone_in({"a"}, 1));
        const auto it = std::find_if(curve.points.begin(), curve.points.end(), [](const QuitPoint& p) {
            return p.range.first == 3 && p.bin_lo <= -2 && -2 < p.bin_hi;
        });
        REQUIRE(it != curve.points.end());
        CHECK(it->quit.value() == 0.5);
    }
}

TEST_CASE("quit curve clamps large deltas into the edge bins") {
    const auto sessions = Builder().add("a", {0, 0, 90000}).sessions();
    const auto curve = quit_probability_curve(sessions, everyone_in({"a"}, 1));
    REQUIRE(curve.points.size() == 1);
    CHECK(curve.points[0].bin_hi == 30000);
    for (const auto& p : curve.points) CHECK(p.quit.numerator <= p.quit.denominator);
}

TEST_CASE("persistence examples") {
    {
        const auto sessions = Builder().add("a", {10, 5}).sessions();
        const auto r = persistence(sessions, everyone_in({"a"}, 1), everyone_in({"a"}, 1));
        CHECK(r.find(Basis::Talent, 1)->quit_after_drop.value() == 1.0);
        CHECK_FALSE(r.find(Basis::Talent, 1)->quit_after_gain.defined());
    }
    {
        const auto sessions = Builder().add("a", {10, 5, 8}).add("a", {10, 5}).sessions();
        const auto r = persistence(sessions, everyone_in({"a"}, 2), everyone_in({"a"}, 3));
        CHECK(r.find(Basis::Talent, 2)->quit_after_drop.value() == 0.5);
        CHECK(r.find(Basis::Success, 3)->quit_after_drop.value() == 0.5);
        CHECK(r.find(Basis::Success, 3)->quit_after_gain.value() == 1.0);
        CHECK_FALSE(r.find(Basis::Talent, 1)->quit_after_drop.defined());
    }
}

TEST_CASE("session-level spacing improvement example") {
    const auto sessions = Builder().add("a", {1, 2, 3, 4, 100}).add("a", {9, 9, 9}, 10).sessions();
    REQUIRE(sessions.size() == 2);
    const auto curve = spacing_improvement(sessions, default_break_edges());
    std::size_t used = 0;
    for (const auto& b : curve.session_level) {
        if (b.n == 0) continue;
        ++used;
        CHECK(b.lo_h <= 10);
        CHECK(10 < b.hi_h);
        CHECK(b.mean == 6);
    }
    CHECK(used == 1);
    // Game-level: one bin at 1h for within-session steps and one at 10h.
    std::size_t game_total = 0;
    for (const auto& b : curve.game_level) game_total += b.n;
    CHECK(game_total == 7);
}

TEST_CASE("spacing with identical medians gives zero improvement and short sessions are dropped") {
    const auto sessions = Builder().add("a", {5, 5, 5, 5, 1}).add("a", {5, 5, 5}, 30).add("a", {1, 2}, 30).sessions();
    const auto curve = spacing_improvement(sessions, default_break_edges());
    std::size_t n = 0;
    for (const auto& b : curve.session_level) {
        if (b.n) CHECK(b.mean == 0);
        n += b.n;
    }
    CHECK(n == 1);
}

TEST_CASE("correlations per talent quartile") {
    std::vector<SkillProfile> profiles;
    std::mt19937_64 rng(25);
    for (int i = 0; i < 400; ++i) {
        SkillProfile p;
        p.player_id = "p" + std::to_string(i);
        p.n_games = 10;
        p.talent = static_cast<double>(i);
        p.success = i + static_cast<double>(rng() % 50);
        profiles.push_back(p);
    }
    const auto split = quartile_split(profiles, Basis::Talent);
    const auto c = skill_correlations(profiles, split);
    CHECK(c.overall.n == 400);
    CHECK(c.overall.r > 0.9);
    for (const auto& q : c.by_quartile) {
        REQUIRE(q);
        CHECK(q->n == 100);
    }
}

}
