#include "playmech/evaluate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <thread>

#include "playmech/common.hpp"

namespace playmech {
namespace {

constexpr double kAucAgreement = 1e-9;

double percentile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// AUC from per-score-level counts, levels in ascending score order.
std::optional<double> auc_from_levels(std::span<const std::uint64_t> pos,
                                      std::span<const std::uint64_t> neg) {
    double n_pos = 0, n_neg = 0, acc = 0, neg_below = 0;
    for (std::size_t k = 0; k < pos.size(); ++k) {
        acc += static_cast<double>(pos[k]) * (neg_below + 0.5 * static_cast<double>(neg[k]));
        neg_below += static_cast<double>(neg[k]);
        n_pos += static_cast<double>(pos[k]);
        n_neg += static_cast<double>(neg[k]);
    }
    if (n_pos == 0 || n_neg == 0) return std::nullopt;
    return acc / (n_pos * n_neg);
}

void check_distribution(const std::vector<double>& d) {
    const double total = std::accumulate(d.begin(), d.end(), 0.0);
    ensure(std::abs(total - 1.0) < 1e-9, "prediction distribution does not sum to 1");
}

}  // namespace

TrainTestSplit temporal_split(std::span<const EncodedSession> sessions, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw ConfigError("split fraction must lie in (0,1)");
    if (sessions.size() < 10) throw DataError("temporal split needs at least 10 sessions");
    std::vector<const EncodedSession*> order;
    for (const auto& s : sessions) order.push_back(&s);
    std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
        return std::tie(a->start_h, a->player_id, a->session_index) <
               std::tie(b->start_h, b->player_id, b->session_index);
    });
    const auto n = order.size();
    const auto n_train = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(n) - 1e-9));
    if (n_train >= n) throw DataError("temporal split leaves no test sessions");
    TrainTestSplit split;
    split.fraction = fraction;
    for (std::size_t i = 0; i < n; ++i) (i < n_train ? split.train : split.test).push_back(*order[i]);
    return split;
}

std::vector<Prediction> predict_stream(const EpsilonMachine& machine, std::string_view stream) {
    std::vector<Prediction> out;
    out.reserve(stream.size());
    const auto L = static_cast<std::size_t>(machine.config.max_length);
    for (std::size_t t = 0; t < stream.size(); ++t) {
        if (machine.symbol_index(stream[t]) < 0) {
            throw DataError(std::string("symbol '") + stream[t] + "' not in the machine's alphabet");
        }
        Prediction p;
        p.position = t;
        p.actual = stream[t];
        const auto from = t > L ? t - L : 0;
        const auto state = t == 0 ? std::nullopt : machine.synchronize(stream.substr(from, t - from));
        p.synchronized = state.has_value();
        p.distribution = state ? machine.states[static_cast<std::size_t>(*state)].emission
                               : machine.marginal;
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<Prediction> predict_sessions(const EpsilonMachine& machine,
                                         std::span<const EncodedSession> sessions) {
    std::vector<Prediction> out;
    for (const auto& player : group_by_player(sessions)) {
        const auto stream = player.stream();
        auto preds = predict_stream(machine, stream);
        std::size_t offset = 0;
        for (const auto& s : player.sessions) {
            for (std::size_t i = 0; i < s.symbols.size(); ++i) {
                auto& p = preds[offset + i];
                p.player_id = s.player_id;
                p.session_index = s.session_index;
                p.position = i;
                out.push_back(std::move(p));
            }
            offset += s.symbols.size();
        }
    }
    return out;
}

std::vector<Prediction> predict_with_transitions(const EpsilonMachine& machine,
                                                 std::span<const EncodedSession> sessions,
                                                 int start_state) {
    if (start_state < 0 || start_state >= static_cast<int>(machine.states.size())) {
        throw ConfigError("start state out of range");
    }
    const int quit = machine.symbol_index(kQuit);
    std::vector<Prediction> out;
    for (const auto& player : group_by_player(sessions)) {
        int state = start_state;
        for (const auto& s : player.sessions) {
            for (std::size_t i = 0; i < s.symbols.size(); ++i) {
                const int b = machine.symbol_index(s.symbols[i]);
                if (b < 0) throw DataError("symbol not in the machine's alphabet");
                Prediction p{s.player_id, s.session_index, i, {}, s.symbols[i], state >= 0};
                p.distribution = state >= 0 ? machine.states[static_cast<std::size_t>(state)].emission
                                            : machine.marginal;
                out.push_back(std::move(p));
                if (state >= 0) state = machine.states[static_cast<std::size_t>(state)].transitions[static_cast<std::size_t>(b)];
                if (state < 0 && b == quit) state = start_state;
            }
        }
    }
    return out;
}

RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels,
                   char target) {
    if (scores.size() != labels.size()) throw DataError("ROC: scores and labels differ in length");
    RocCurve curve;
    curve.target = target;
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });
    for (auto l : labels) (l ? curve.positives : curve.negatives)++;
    if (curve.positives == 0 || curve.negatives == 0) {
        throw DataError(std::string("ROC for '") + (target ? std::string(1, target) : "?") +
                        "': needs at least one positive and one negative");
    }
    curve.points.emplace_back(0.0, 0.0);
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (labels[order[j]] ? tp : fp)++;
            ++j;
        }
        curve.points.emplace_back(static_cast<double>(fp) / static_cast<double>(curve.negatives),
                                  static_cast<double>(tp) / static_cast<double>(curve.positives));
        i = j;
    }
    return curve;
}

RocCurve roc_curve(std::span<const Prediction> predictions, char target,
                   std::string_view alphabet) {
    const auto b = alphabet.find(target);
    if (b == std::string_view::npos) throw DataError("ROC target not in alphabet");
    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
    for (const auto& p : predictions) {
        scores.push_back(p.distribution[b]);
        labels.push_back(p.actual == target ? 1 : 0);
    }
    return roc_curve(scores, labels, target);
}

double auc_trapezoid(const RocCurve& curve) {
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto [x0, y0] = curve.points[i - 1];
        const auto [x1, y1] = curve.points[i];
        area += (x1 - x0) * (y0 + y1) / 2.0;
    }
    return area;
}

double auc_rank_sum(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) throw DataError("AUC: scores and labels differ in length");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
    double rank_sum = 0.0, n_pos = 0.0, n_neg = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double mid_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]]) rank_sum += mid_rank;
        }
        i = j;
    }
    for (auto l : labels) (l ? n_pos : n_neg) += 1.0;
    if (n_pos == 0 || n_neg == 0) throw DataError("AUC needs at least one positive and one negative");
    return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    const double by_ranks = auc_rank_sum(scores, labels);
    const double by_curve = auc_trapezoid(roc_curve(scores, labels));
    if (std::abs(by_ranks - by_curve) > kAucAgreement) {
        throw InvariantError("AUC routes disagree: rank-sum " + std::to_string(by_ranks) +
                             " vs trapezoid " + std::to_string(by_curve));
    }
    return by_ranks;
}

double weighted_auc(std::span<const double> aucs, std::span<const double> weights) {
    if (aucs.size() != weights.size()) throw DataError("weighted AUC: size mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < aucs.size(); ++i) {
        num += weights[i] * aucs[i];
        den += weights[i];
    }
    if (den <= 0) throw DataError("weighted AUC: weights sum to zero");
    return num / den;
}

AucReport evaluate_predictions(std::span<const Prediction> predictions, std::string_view alphabet,
                               const BootstrapOptions& bootstrap) {
    AucReport report;
    report.n_predictions = predictions.size();
    report.n_resamples = bootstrap.n_resamples;
    report.seed = bootstrap.seed;
    if (predictions.empty()) throw DataError("no predictions to evaluate");
    const auto k = alphabet.size();

    // Score levels per symbol and the session each prediction belongs to.
    std::vector<std::vector<double>> levels(k);
    for (const auto& p : predictions) {
        check_distribution(p.distribution);
        if (p.distribution.size() != k) throw DataError("prediction/alphabet size mismatch");
        for (std::size_t b = 0; b < k; ++b) levels[b].push_back(p.distribution[b]);
    }
    for (auto& l : levels) {
        std::sort(l.begin(), l.end());
        l.erase(std::unique(l.begin(), l.end()), l.end());
    }
    // Per session: (symbol, level, positive) entries.
    struct Entry {
        std::uint32_t level;
        std::uint8_t symbol;
        bool positive;
    };
    std::vector<std::vector<Entry>> by_session;
    std::map<std::pair<std::string, std::size_t>, std::size_t> session_slot;
    std::vector<double> freq(k, 0.0);
    for (const auto& p : predictions) {
        const auto [it, fresh] =
            session_slot.try_emplace({p.player_id, p.session_index}, by_session.size());
        if (fresh) by_session.emplace_back();
        auto& entries = by_session[it->second];
        const auto actual = alphabet.find(p.actual);
        if (actual == std::string_view::npos) throw DataError("actual symbol not in alphabet");
        freq[actual] += 1.0;
        for (std::size_t b = 0; b < k; ++b) {
            const auto lv = std::lower_bound(levels[b].begin(), levels[b].end(), p.distribution[b]) -
                            levels[b].begin();
            entries.push_back({static_cast<std::uint32_t>(lv), static_cast<std::uint8_t>(b), b == actual});
        }
    }
    report.n_sessions = by_session.size();

    struct Tally {
        std::vector<std::vector<std::uint64_t>> pos, neg;
        std::vector<double> actual;
    };
    const auto fresh_tally = [&] {
        Tally t;
        t.actual.assign(k, 0.0);
        for (std::size_t b = 0; b < k; ++b) {
            t.pos.emplace_back(levels[b].size(), 0);
            t.neg.emplace_back(levels[b].size(), 0);
        }
        return t;
    };
    const auto add_session = [&](Tally& t, std::size_t s) {
        for (const auto& e : by_session[s]) {
            (e.positive ? t.pos : t.neg)[e.symbol][e.level]++;
            if (e.positive) t.actual[e.symbol] += 1.0;
        }
    };
    // per-symbol AUCs and the renormalized weighted mean
    const auto score = [&](const Tally& t) {
        std::vector<std::optional<double>> per(k);
        double num = 0, den = 0;
        for (std::size_t b = 0; b < k; ++b) {
            per[b] = auc_from_levels(t.pos[b], t.neg[b]);
            if (per[b]) {
                num += t.actual[b] * *per[b];
                den += t.actual[b];
            }
        }
        return std::pair{per, den > 0 ? std::optional<double>(num / den) : std::nullopt};
    };

    Tally all = fresh_tally();
    for (std::size_t s = 0; s < by_session.size(); ++s) add_session(all, s);
    const auto [per, weighted] = score(all);
    if (!weighted) throw DataError("no symbol has both positive and negative instances");
    report.weighted = *weighted;
    double defined_weight = 0.0;
    for (std::size_t b = 0; b < k; ++b) {
        if (per[b]) defined_weight += freq[b];
    }
    for (std::size_t b = 0; b < k; ++b) {
        SymbolAuc sa;
        sa.symbol = alphabet[b];
        sa.auc = per[b];
        sa.weight = per[b] ? freq[b] / defined_weight : 0.0;
        if (!per[b]) {
            report.warnings.push_back(std::string("symbol '") + alphabet[b] +
                                      "' has no positive or no negative instances; excluded "
                                      "and weights renormalized");
        } else {
            ensure(*per[b] >= 0.0 && *per[b] <= 1.0, "AUC outside [0,1]");
        }
        report.symbols.push_back(sa);
    }

    if (bootstrap.n_resamples == 0) {
        report.ci_lo = report.ci_hi = report.weighted;
        for (auto& sa : report.symbols) sa.ci_lo = sa.ci_hi = sa.auc.value_or(0.0);
        return report;
    }
    if (bootstrap.n_resamples < 100) {
        report.warnings.push_back("fewer than 100 bootstrap resamples; intervals are rough");
    }
    std::vector<double> weighted_samples;
    std::vector<std::vector<double>> symbol_samples(k);
    const auto n_sessions = by_session.size();
    for (std::size_t r = 0; r < bootstrap.n_resamples; ++r) {
        std::mt19937_64 rng(derive_seed(bootstrap.seed, "bootstrap", r));
        Tally t = fresh_tally();
        for (std::size_t i = 0; i < n_sessions; ++i) add_session(t, static_cast<std::size_t>(rng() % n_sessions));
        const auto [rp, rw] = score(t);
        if (rw) weighted_samples.push_back(*rw);
        for (std::size_t b = 0; b < k; ++b) {
            if (rp[b]) symbol_samples[b].push_back(*rp[b]);
        }
    }
    report.ci_lo = percentile(weighted_samples, 0.025);
    report.ci_hi = percentile(weighted_samples, 0.975);
    for (std::size_t b = 0; b < k; ++b) {
        report.symbols[b].ci_lo = percentile(symbol_samples[b], 0.025);
        report.symbols[b].ci_hi = percentile(symbol_samples[b], 0.975);
    }
    return report;
}

bool keeps_for_fourth_game(const EncodedSession& session) {
    return session.symbols.size() >= 4;  // three deltas and the quit
}

std::vector<Prediction> from_fourth_game(std::span<const Prediction> predictions) {
    std::vector<Prediction> out;
    for (const auto& p : predictions) {
        // symbol i describes game i + 2, so game four onward is position >= 2
        if (p.position >= 2) out.push_back(p);
    }
    return out;
}

EvaluationResult evaluate_encoded(std::span<const EncodedSession> sessions,
                                  const EvaluationOptions& options) {
    std::vector<EncodedSession> kept;
    if (options.from_fourth_game) {
        std::copy_if(sessions.begin(), sessions.end(), std::back_inserter(kept), keeps_for_fourth_game);
        sessions = kept;
    }
    const auto split = temporal_split(sessions, options.train_fraction);
    const auto streams = player_streams(split.train);
    const auto stats = collect_suffix_stats(streams, kPlayAlphabet, options.cssr.max_length);

    EvaluationResult result;
    result.machine = fit(stats, options.cssr);
    result.predictions = predict_sessions(result.machine, split.test);
    if (options.from_fourth_game) result.predictions = from_fourth_game(result.predictions);
    result.report = evaluate_predictions(result.predictions, kPlayAlphabet, options.bootstrap);
    result.n_train_sessions = split.train.size();
    result.n_test_sessions = split.test.size();
    return result;
}

const SweepCell* SweepReport::best(Scheme scheme, int L) const {
    for (const auto& c : cells) {
        if (c.scheme == scheme && c.L == L && c.best_theta) return &c;
    }
    return nullptr;
}

std::optional<Scheme> SweepReport::best_scheme(int L) const {
    std::optional<Scheme> winner;
    double top = -1.0;
    for (auto s : {Scheme::DeltaPrev, Scheme::DeltaMedian, Scheme::DeltaMean}) {
        if (const auto* c = best(s, L); c && c->weighted_auc > top) {
            top = c->weighted_auc;
            winner = s;
        }
    }
    return winner;
}

SweepReport model_selection(std::span<const Session> sessions, const SweepOptions& options) {
    struct Job {
        Scheme scheme;
        int L;
        std::int64_t theta;
    };
    std::vector<Job> jobs;
    for (auto scheme : options.schemes) {
        for (int L : options.lengths) {
            for (auto theta : options.thetas) jobs.push_back({scheme, L, theta});
        }
    }
    SweepReport report;
    report.cells.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            const auto& job = jobs[i];
            SweepCell& cell = report.cells[i];
            cell.scheme = job.scheme;
            cell.theta = job.theta;
            cell.L = job.L;
            cell.quartile = options.quartile;
            try {
                const auto corpus = encode_corpus(sessions, {job.scheme, job.theta, options.scope});
                auto eval = options.evaluation;
                eval.cssr.max_length = job.L;
                const auto encoded = corpus.sessions();
                const auto res = evaluate_encoded(encoded, eval);
                cell.weighted_auc = res.report.weighted;
                cell.ci_lo = res.report.ci_lo;
                cell.ci_hi = res.report.ci_hi;
                cell.states = res.machine.states.size();
                cell.recurrent_states = res.machine.recurrent_count();
                cell.n_train_sessions = res.n_train_sessions;
                cell.n_test_sessions = res.n_test_sessions;
            } catch (const std::runtime_error& e) {
                cell.error = e.what();
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(jobs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (auto scheme : options.schemes) {
        for (int L : options.lengths) {
            SweepCell* top = nullptr;
            for (auto& c : report.cells) {
                if (c.scheme != scheme || c.L != L || !c.error.empty()) continue;
                if (!top || c.weighted_auc > top->weighted_auc) top = &c;
            }
            if (top) top->best_theta = true;
        }
    }
    return report;
}

nlohmann::json to_json(const AucReport& r) {
    nlohmann::json symbols = nlohmann::json::array();
    for (const auto& s : r.symbols) {
        symbols.push_back({{"symbol", std::string(1, s.symbol)},
                           {"auc", s.auc ? nlohmann::json(*s.auc) : nlohmann::json(nullptr)},
                           {"weight", s.weight},
                           {"ci_lo", s.ci_lo},
                           {"ci_hi", s.ci_hi}});
    }
    return {{"weighted_auc", r.weighted}, {"ci_lo", r.ci_lo},
            {"ci_hi", r.ci_hi},           {"symbols", symbols},
            {"n_predictions", r.n_predictions}, {"n_sessions", r.n_sessions},
            {"n_resamples", r.n_resamples}, {"seed", r.seed},
            {"warnings", r.warnings}};
}

nlohmann::json to_json(const SweepCell& c) {
    return {{"scheme", to_string(c.scheme)},
            {"theta", c.theta},
            {"L", c.L},
            {"quartile", c.quartile},
            {"weighted_auc", c.weighted_auc},
            {"ci_lo", c.ci_lo},
            {"ci_hi", c.ci_hi},
            {"states", c.states},
            {"recurrent_states", c.recurrent_states},
            {"n_train_sessions", c.n_train_sessions},
            {"n_test_sessions", c.n_test_sessions},
            {"best_theta", c.best_theta},
            {"error", c.error}};
}

}  // namespace playmech
