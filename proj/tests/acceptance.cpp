// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Dataset-dependent
// criteria read the file named by AXON_DATASET (column names from
// AXON_COL_PLAYER / AXON_COL_TIME / AXON_COL_SCORE) and skip when it is unset
// or missing.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iterator>
#include <optional>
#include <thread>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "playmech/cssr.hpp"
#include "playmech/encode.hpp"
#include "playmech/evaluate.hpp"
#include "playmech/ingest.hpp"
#include "playmech/metrics.hpp"
#include "playmech/synth.hpp"

using namespace playmech;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Verdict {
    Outcome outcome = Outcome::Pass;
    std::string detail;
};

Verdict pass(std::string d) { return {Outcome::Pass, std::move(d)}; }
Verdict fail(std::string d) { return {Outcome::Fail, std::move(d)}; }
Verdict skip(std::string d) { return {Outcome::Skip, std::move(d)}; }
Verdict judge(bool ok, std::string d) { return {ok ? Outcome::Pass : Outcome::Fail, std::move(d)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

EpsilonMachine fit_one(const std::string& stream, const std::string& alphabet, int L, SuffixStats* stats_out = nullptr) {
    const std::vector<std::string> streams{stream};
    CssrConfig c;
    c.max_length = L;
    c.alpha = 0.001;
    auto stats = collect_suffix_stats(streams, alphabet, L);
    auto m = fit(stats, c);
    if (stats_out) *stats_out = std::move(stats);
    return m;
}

// Matches fitted recurrent states to analytic states through histories that
// leave exactly one analytic state possible, then reports the largest
// emission gap. Returns -1 when some recurrent state could not be matched.
double emission_error(const EpsilonMachine& fitted, const EpsilonMachine& truth, const std::string& probe) {
    double worst = 0;
    std::set<int> matched;
    for (std::size_t cut = 8; cut <= std::min<std::size_t>(probe.size(), 400); ++cut) {
        const auto history = probe.substr(0, cut);
        const auto f = fitted.synchronize(history);
        if (!f || !fitted.states[static_cast<std::size_t>(*f)].recurrent) continue;
        std::set<int> ends;
        for (std::size_t s0 = 0; s0 < truth.states.size(); ++s0) {
            int s = static_cast<int>(s0);
            for (char c : history) {
                const auto k = static_cast<std::size_t>(truth.symbol_index(c));
                if (truth.states[static_cast<std::size_t>(s)].emission[k] == 0) {
                    s = -1;
                    break;
                }
                s = truth.states[static_cast<std::size_t>(s)].transitions[k];
            }
            if (s >= 0) ends.insert(s);
        }
        if (ends.size() != 1) continue;
        matched.insert(*f);
        const auto& fe = fitted.states[static_cast<std::size_t>(*f)].emission;
        const auto& te = truth.states[static_cast<std::size_t>(*ends.begin())].emission;
        for (std::size_t k = 0; k < fe.size(); ++k) worst = std::max(worst, std::abs(fe[k] - te[k]));
    }
    return matched.size() == fitted.recurrent_count() ? worst : -1.0;
}

// Every emission row sums to one; every well-observed member suffix of
// length < L moves on each observed symbol to its state's single successor.
bool machine_invariants_hold(const EpsilonMachine& m, const SuffixStats& stats) {
    for (const auto& s : m.states) {
        double total = 0;
        for (double p : s.emission) total += p;
        if (std::abs(total - 1.0) > 1e-12) return false;
        for (const auto& member : s.members) {
            if (member.size() >= static_cast<std::size_t>(m.config.max_length)) continue;
            if (stats.total(member) < m.config.min_count) continue;
            const auto& counts = *stats.find(member);
            for (std::size_t k = 0; k < counts.size(); ++k) {
                if (counts[k] == 0) continue;
                const auto next = m.synchronize(member + m.alphabet[k]);
                if (!next || *next != s.transitions[k]) return false;
            }
        }
    }
    return true;
}

// ---- criterion 1 ----------------------------------------------------------

Verdict oracle_recovery() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = 100000;
    std::ostringstream d;
    bool ok = true;

    GeneratorSpec gm;
    gm.kind = ProcessKind::GoldenMean;
    gm.p = 0.5;
    const auto gs = generate(gm, n, 101);
    const auto g = fit_one(gs, gm.alphabet, 3);
    const double err = emission_error(g, analytic_machine(gm), gs);
    ok = ok && g.recurrent_count() == 2 && err >= 0 && err <= 0.02;
    d << "golden states=" << g.recurrent_count() << " err=" << fmt("%.4f", err);

    GeneratorSpec iid;
    const auto i = fit_one(generate(iid, n, 102), iid.alphabet, 3);
    ok = ok && i.recurrent_count() == 1;
    d << " iid=" << i.recurrent_count();

    GeneratorSpec ev;
    ev.kind = ProcessKind::EvenProcess;
    const auto e = fit_one(generate(ev, n, 103), ev.alphabet, 3);
    ok = ok && e.recurrent_count() == 2;
    d << " even=" << e.recurrent_count();

    GeneratorSpec per;
    per.kind = ProcessKind::Periodic;
    per.pattern = "011";
    const auto p = fit_one(generate(per, n, 104), per.alphabet, 3);
    ok = ok && p.recurrent_count() == 3;
    d << " period3=" << p.recurrent_count();

    const double secs = seconds_since(t0);
    ok = ok && secs < 30;
    d << " time=" << fmt("%.1fs", secs);
    return judge(ok, d.str());
}

// ---- criterion 2 ----------------------------------------------------------

Verdict auc_identities() {
    std::mt19937_64 rng(2024);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng() % 200;
        std::vector<double> scores(n);
        std::vector<std::uint8_t> labels(n);
        // coarse scores so that ties are frequent
        for (std::size_t k = 0; k < n; ++k) {
            scores[k] = static_cast<double>(rng() % 25) / 24.0;
            labels[k] = static_cast<std::uint8_t>(rng() % 2);
        }
        labels[0] = 1;
        labels[1] = 0;
        worst = std::max(worst, std::abs(auc_trapezoid(roc_curve(scores, labels)) - auc_rank_sum(scores, labels)));
    }
    const std::vector<double> ps{0.9, 0.8, 0.7, 0.1};
    const std::vector<std::uint8_t> pl{1, 1, 0, 0};
    const std::vector<double> cs{0.4, 0.4, 0.4, 0.4};
    const std::vector<double> hs{0.1, 0.4, 0.35, 0.8};
    const std::vector<std::uint8_t> hl{0, 0, 1, 1};
    const double perfect = auc(ps, pl);
    const double flat = auc(cs, pl);
    const double hand = auc(hs, hl);
    const bool ok = worst <= 1e-9 && perfect == 1.0 && flat == 0.5 && hand == 0.75;
    std::ostringstream d;
    d << "max|trap-rank|=" << worst << " perfect=" << perfect << " flat=" << flat << " hand=" << hand;
    return judge(ok, d.str());
}

// ---- criterion 3 ----------------------------------------------------------

Verdict self_consistency() {
    const auto t0 = std::chrono::steady_clock::now();
    const int trials = 20;
    int wins = 0, covered = 0, good = 0;
    SessionGeneratorSpec spec;
    spec.players = 2000;
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t seed = derive_seed(3, "acceptance", static_cast<std::uint64_t>(t));
        const auto sessions = segment_all(build_histories(generate_sessions(spec, seed)),
                                          {spec.threshold_h, SplitRule::AtLeast});
        SweepOptions opt;
        opt.thetas = {2000, 8000, 16000};
        opt.evaluation.bootstrap = {0, seed};
        const auto report = model_selection(sessions, opt);
        const auto best = report.best_scheme(1);
        const bool win = best && *best == Scheme::DeltaPrev;

        EvaluationOptions eval;
        eval.bootstrap = {1000, seed};
        const auto encoded = encode_corpus(sessions, {Scheme::DeltaPrev, spec.theta, {}}).sessions();
        const auto fitted = evaluate_encoded(encoded, eval);
        const auto split = temporal_split(encoded, eval.train_fraction);
        const auto truth = session_machine(spec);
        const auto truth_report =
            evaluate_predictions(predict_with_transitions(truth, split.test, 0), truth.alphabet, eval.bootstrap);
        const bool inside =
            fitted.report.weighted >= truth_report.ci_lo && fitted.report.weighted <= truth_report.ci_hi;
        wins += win;
        covered += inside;
        good += win && inside;
    }
    const double secs = seconds_since(t0);
    const bool ok = good * 20 >= trials * 19 && secs < 300;
    std::ostringstream d;
    d << "delta_prev wins " << wins << "/" << trials << ", AUC inside truth CI " << covered << "/" << trials
      << ", both " << good << "/" << trials << " time=" << fmt("%.1fs", secs);
    return judge(ok, d.str());
}

// ---- dataset-backed criteria ---------------------------------------------

struct Dataset {
    std::vector<PlayerHistory> histories;
    std::vector<Session> sessions;
    std::vector<SkillProfile> profiles;
    QuartileSplit by_talent;
    QuartileSplit by_success;
};

std::optional<Dataset> load_dataset(std::string& why) {
    const char* path = std::getenv("AXON_DATASET");
    if (!path || !*path) {
        why = "AXON_DATASET not set";
        return std::nullopt;
    }
    if (!std::filesystem::exists(path)) {
        why = std::string("dataset not found: ") + path;
        return std::nullopt;
    }
    ColumnMap cols;
    if (const char* c = std::getenv("AXON_COL_PLAYER")) cols.player = c;
    if (const char* c = std::getenv("AXON_COL_TIME")) cols.time = c;
    if (const char* c = std::getenv("AXON_COL_SCORE")) cols.score = c;
    Dataset d;
    const auto parsed = parse_dataset_file(path, cols);
    d.histories = build_histories(parsed.records);
    d.sessions = segment_all(d.histories, {});
    d.profiles = skill_profiles(d.histories);
    d.by_talent = quartile_split(d.profiles, Basis::Talent);
    d.by_success = quartile_split(d.profiles, Basis::Success);
    return d;
}

std::vector<Session> in_quartile(const std::vector<Session>& sessions, const QuartileSplit& split, int q) {
    std::vector<Session> out;
    for (const auto& s : sessions) {
        if (split.quartile_of(s.player_id) == q) out.push_back(s);
    }
    return out;
}

Verdict population_structure(const Dataset& d) {
    const auto s = summarize(d.sessions);
    const double players = static_cast<double>(s.n_players);
    const double under8 = 100.0 * static_cast<double>(s.players_under_eight_games) / players;
    const double single = 100.0 * static_cast<double>(s.players_single_session) / players;
    const double sessions = static_cast<double>(s.n_sessions);
    const double over3 = static_cast<double>(s.sessions_over_three_games);
    const bool ok = std::abs(under8 - 92) <= 1 && std::abs(single - 90) <= 2 &&
                    std::abs(sessions / 990000 - 1) <= 0.02 && std::abs(over3 / 242000 - 1) <= 0.02;
    std::ostringstream out;
    out << "under8=" << fmt("%.2f%%", under8) << " single=" << fmt("%.2f%%", single)
        << " sessions=" << s.n_sessions << " over3=" << s.sessions_over_three_games;
    return judge(ok, out.str());
}

Verdict correlations(const Dataset& d) {
    const auto c = skill_correlations(d.profiles, d.by_talent);
    const double target[4] = {0.049, 0.179, 0.137, 0.299};
    bool ok = std::abs(c.overall.r - 0.467) <= 0.01;
    std::ostringstream out;
    out << "r=" << fmt("%.3f", c.overall.r);
    for (int q = 0; q < 4; ++q) {
        const auto& r = c.by_quartile[static_cast<std::size_t>(q)];
        ok = ok && r && std::abs(r->r - target[q]) <= 0.02;
        out << " q" << q + 1 << "=" << (r ? fmt("%.3f", r->r) : "n/a");
    }
    return judge(ok, out.str());
}

Verdict last_game_effect(const Dataset& d) {
    const auto curves = learning_curves(d.sessions, d.by_talent);
    int higher = 0;
    for (int q = 1; q <= 4; ++q) {
        for (int len = 4; len <= 15; ++len) {
            const auto* last = curves.find(q, len, len);
            const auto* prev = curves.find(q, len, len - 1);
            higher += last && prev && last->mean > prev->mean;
        }
    }
    return judge(higher == 48, std::to_string(higher) + "/48 cells");
}

Verdict shuffle_slopes(const Dataset& d) {
    const auto tests = index_slope_tests(shuffle_control(d.sessions, 7), d.by_talent);
    const auto significant = std::count_if(tests.begin(), tests.end(), [](const SlopeTest& t) { return t.significant; });
    return judge(significant == 0 && tests.size() == 48,
                 std::to_string(significant) + " of " + std::to_string(tests.size()) + " cells significant");
}

Verdict persistence_ordering(const Dataset& d) {
    const auto p = persistence(d.sessions, d.by_talent, d.by_success);
    bool drop_dec = true, gain_dec = true;
    std::ostringstream out;
    out << "drop";
    double prev_drop = 2, prev_gain = 2;
    for (int q = 1; q <= 4; ++q) {
        const auto* c = p.find(Basis::Success, q);
        if (!c || !c->quit_after_drop.defined() || !c->quit_after_gain.defined()) return fail("empty success quartile");
        const double drop = c->quit_after_drop.value(), gain = c->quit_after_gain.value();
        drop_dec = drop_dec && drop < prev_drop;
        gain_dec = gain_dec && gain < prev_gain;
        prev_drop = drop;
        prev_gain = gain;
        out << " " << fmt("%.4f", drop);
    }
    out << (gain_dec ? " gain strictly ordered" : " gain not strictly ordered");
    return judge(drop_dec && !gain_dec, out.str());
}

Verdict model_selection_check(const Dataset& d, std::array<std::int64_t, 4>& best_theta) {
    const std::int64_t targets[4] = {300, 8000, 16000, 22000};
    const auto grid = theta_grid();
    bool ok = true;
    double auc_sum = 0;
    std::ostringstream out;
    for (int q = 1; q <= 4; ++q) {
        SweepOptions opt;
        opt.quartile = q;
        opt.evaluation.bootstrap = {0, 12345};
        opt.threads = std::max(1u, std::thread::hardware_concurrency());
        const auto report = model_selection(in_quartile(d.sessions, d.by_talent, q), opt);
        const auto scheme = report.best_scheme(1);
        const auto* best = report.best(Scheme::DeltaPrev, 1);
        if (!best) return fail("no delta_prev cell for quartile " + std::to_string(q));
        const auto nearest = *std::min_element(grid.begin(), grid.end(), [&](auto a, auto b) {
            return std::llabs(a - targets[q - 1]) < std::llabs(b - targets[q - 1]);
        });
        best_theta[static_cast<std::size_t>(q - 1)] = best->theta;
        ok = ok && scheme && *scheme == Scheme::DeltaPrev && best->theta == nearest;
        auc_sum += best->weighted_auc;
        out << "q" << q << ": " << (scheme ? to_string(*scheme) : "none") << " theta=" << best->theta
            << " auc=" << fmt("%.3f", best->weighted_auc) << "; ";
    }
    const double mean_auc = auc_sum / 4;
    ok = ok && std::abs(mean_auc - 0.64) <= 0.03;
    out << "mean auc=" << fmt("%.3f", mean_auc);
    return judge(ok, out.str());
}

Verdict state_counts(const Dataset& d, std::int64_t theta) {
    const auto sessions = in_quartile(d.sessions, d.by_talent, 4);
    const auto encoded = encode_corpus(sessions, {Scheme::DeltaPrev, theta, {}}).sessions();
    // longer histories are compared on sessions of four or more games
    std::vector<EncodedSession> long_sessions;
    std::copy_if(encoded.begin(), encoded.end(), std::back_inserter(long_sessions), keeps_for_fourth_game);
    std::size_t counts[3] = {};
    for (int L = 1; L <= 3; ++L) {
        const auto streams = player_streams(L == 1 ? encoded : long_sessions);
        CssrConfig c;
        c.max_length = L;
        counts[L - 1] = fit(collect_suffix_stats(streams, kPlayAlphabet, L), c).recurrent_count();
    }
    const auto within = [](std::size_t v, int target) { return std::abs(static_cast<int>(v) - target) <= 2; };
    const bool ok = counts[0] == 4 && within(counts[1], 9) && within(counts[2], 21);
    std::ostringstream out;
    out << "theta=" << theta << " L1=" << counts[0] << " L2=" << counts[1] << " L3=" << counts[2];
    return judge(ok, out.str());
}

// ---- criterion 11 ---------------------------------------------------------

Verdict property_suites() {
    const int n = 10000;
    std::mt19937_64 rng(11);
    std::ostringstream out;
    bool ok = true;

    // unifilarity and emission normalization on random short streams
    int machine_bad = 0;
    for (int i = 0; i < n; ++i) {
        const std::string alphabet = i % 2 ? "PGVQ" : "01";
        std::string s(40 + rng() % 160, ' ');
        for (auto& c : s) c = alphabet[rng() % alphabet.size()];
        CssrConfig c;
        c.max_length = 1 + static_cast<int>(rng() % 3);
        c.test = i % 3 ? TestKind::ChiSquare : TestKind::KolmogorovSmirnov;
        const std::vector<std::string> streams{s};
        const auto stats = collect_suffix_stats(streams, alphabet, c.max_length);
        machine_bad += !machine_invariants_hold(fit(stats, c), stats);
    }
    ok = ok && machine_bad == 0;
    out << "machines bad=" << machine_bad;

    // session partition: games are covered exactly once, in order, with
    // every within-session gap below the threshold
    int partition_bad = 0;
    for (int i = 0; i < n; ++i) {
        PlayerHistory h;
        h.player_id = "p";
        std::int64_t t = static_cast<std::int64_t>(rng() % 100);
        const std::size_t games = 1 + rng() % 30;
        for (std::size_t k = 0; k < games; ++k) {
            h.games.push_back({"p", t, static_cast<std::int64_t>(rng() % 50000), k});
            t += static_cast<std::int64_t>(rng() % 5);
        }
        const std::int64_t threshold = 1 + static_cast<std::int64_t>(rng() % 4);
        std::vector<GameRecord> seen;
        bool good = true;
        for (const auto& s : segment_sessions(h, {threshold, SplitRule::AtLeast})) {
            for (std::size_t k = 1; k < s.games.size(); ++k) {
                good = good && s.games[k].time_h - s.games[k - 1].time_h < threshold;
            }
            if (!seen.empty()) good = good && s.games.front().time_h - seen.back().time_h >= threshold;
            seen.insert(seen.end(), s.games.begin(), s.games.end());
        }
        partition_bad += !(good && seen == h.games);
    }
    ok = ok && partition_bad == 0;
    out << " partitions bad=" << partition_bad;

    // shuffle control keeps each session's score multiset and length
    int shuffle_bad = 0;
    for (int i = 0; i < n; ++i) {
        Session s;
        s.player_id = "p";
        const std::size_t games = 1 + rng() % 15;
        for (std::size_t k = 0; k < games; ++k) {
            s.games.push_back({"p", static_cast<std::int64_t>(k), static_cast<std::int64_t>(rng() % 100), k});
        }
        const std::vector<Session> one{s};
        const auto shuffled = shuffle_control(one, rng());
        std::vector<std::int64_t> a, b;
        for (const auto& g : s.games) a.push_back(g.score);
        for (const auto& g : shuffled.at(0).games) b.push_back(g.score);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        shuffle_bad += a != b;
    }
    ok = ok && shuffle_bad == 0;
    out << " shuffles bad=" << shuffle_bad;

    // seeded determinism: generator output and fitted machine repeat exactly
    int determinism_bad = 0;
    for (int i = 0; i < n; ++i) {
        GeneratorSpec g;
        g.kind = static_cast<ProcessKind>(rng() % 4);
        g.pattern = "011";
        const std::uint64_t seed = rng();
        const auto a = generate(g, 200, seed);
        const auto b = generate(g, 200, seed);
        determinism_bad += a != b;
        if (i % 10 == 0) determinism_bad += !(fit_one(a, g.alphabet, 2) == fit_one(b, g.alphabet, 2));
    }
    ok = ok && determinism_bad == 0;
    out << " determinism bad=" << determinism_bad << " (n=" << n << " each)";
    return judge(ok, out.str());
}

}  // namespace

int main() {
    int failures = 0;
    const auto report = [&](int id, const char* name, const std::function<Verdict()>& check) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v = fail(std::string("exception: ") + e.what());
        }
        const char* tag = v.outcome == Outcome::Pass ? "PASS" : v.outcome == Outcome::Fail ? "FAIL" : "SKIP";
        failures += v.outcome == Outcome::Fail;
        std::printf("%s %2d %s: %s\n", tag, id, name, v.detail.c_str());
        std::fflush(stdout);
    };

    report(1, "oracle recovery", oracle_recovery);
    report(2, "AUC identities", auc_identities);
    report(3, "end-to-end self-consistency", self_consistency);

    std::string why;
    std::optional<Dataset> data;
    try {
        data = load_dataset(why);
    } catch (const std::exception& e) {
        why = std::string("dataset unreadable: ") + e.what();
    }
    const auto needs_data = [&](std::function<Verdict(const Dataset&)> check) {
        return [&, check]() { return data ? check(*data) : skip(why); };
    };
    std::array<std::int64_t, 4> best_theta{300, 8000, 16000, 22000};
    report(4, "population structure", needs_data(population_structure));
    report(5, "correlations", needs_data(correlations));
    report(6, "last-game effect", needs_data(last_game_effect));
    report(7, "shuffle control", needs_data(shuffle_slopes));
    report(8, "persistence ordering", needs_data(persistence_ordering));
    report(9, "model selection", needs_data([&](const Dataset& d) { return model_selection_check(d, best_theta); }));
    report(10, "state counts", needs_data([&](const Dataset& d) { return state_counts(d, best_theta[3]); }));
    report(11, "property suites", property_suites);
    return failures == 0 ? 0 : 1;
}
