#include "playmech/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>

#include "playmech/common.hpp"
#include "playmech/encode.hpp"

namespace playmech {
namespace {

constexpr double kStochasticTol = 1e-9;

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<std::int64_t>(rng() % span);
}

std::size_t draw(std::mt19937_64& rng, std::span<const double> probs) {
    const double u = uniform01(rng);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0) continue;
        last_positive = i;
        acc += probs[i];
        if (u < acc) return i;
    }
    return last_positive;
}

void check_row(std::span<const double> row, const std::string& where) {
    double total = 0;
    for (double p : row) {
        if (!(p >= 0.0) || p > 1.0) throw ConfigError(where + ": probability outside [0,1]");
        total += p;
    }
    if (std::abs(total - 1.0) > kStochasticTol) {
        throw ConfigError(where + ": probabilities sum to " + std::to_string(total));
    }
}

// Moore-style refinement over (emission, successor class). Returns true when
// two states are indistinguishable.
bool has_equivalent_states(const std::vector<UnifilarStateSpec>& states) {
    const auto n = states.size();
    std::vector<int> cls(n);
    for (std::size_t i = 0; i < n; ++i) {
        cls[i] = static_cast<int>(i);
        for (std::size_t j = 0; j < i; ++j) {
            if (states[i].emission == states[j].emission) {
                cls[i] = cls[j];
                break;
            }
        }
    }
    for (;;) {
        std::vector<std::vector<int>> sig(n);
        for (std::size_t i = 0; i < n; ++i) {
            sig[i].push_back(cls[i]);
            for (std::size_t b = 0; b < states[i].transitions.size(); ++b) {
                const int t = states[i].transitions[b];
                const bool live = t >= 0 && states[i].emission[b] > 0;
                sig[i].push_back(live ? cls[static_cast<std::size_t>(t)] : -1);
            }
        }
        std::vector<int> next(n);
        std::vector<std::vector<int>> seen;
        for (std::size_t i = 0; i < n; ++i) {
            auto it = std::find(seen.begin(), seen.end(), sig[i]);
            next[i] = static_cast<int>(it - seen.begin());
            if (it == seen.end()) seen.push_back(sig[i]);
        }
        const auto count = [](const std::vector<int>& v) {
            return std::set<int>(v.begin(), v.end()).size();
        };
        if (count(next) == count(cls)) return count(next) < n;
        cls = std::move(next);
    }
}

std::vector<UnifilarStateSpec> named_states(const GeneratorSpec& spec) {
    switch (spec.kind) {
        case ProcessKind::Iid: {
            std::vector<double> probs = spec.probabilities;
            if (probs.empty()) {
                probs.assign(spec.alphabet.size(), 1.0 / static_cast<double>(spec.alphabet.size()));
            }
            std::vector<int> t(spec.alphabet.size());
            for (std::size_t b = 0; b < t.size(); ++b) t[b] = probs[b] > 0 ? 0 : -1;
            return {{probs, t}};
        }
        case ProcessKind::Periodic: {
            const auto& w = spec.pattern;
            if (w.empty()) throw ConfigError("periodic pattern is empty");
            for (std::size_t d = 1; d < w.size(); ++d) {
                if (w.size() % d) continue;
                bool repeats = true;
                for (std::size_t i = d; i < w.size() && repeats; ++i) repeats = w[i] == w[i - d];
                if (repeats) {
                    throw ConfigError("periodic pattern '" + w + "' repeats a shorter word");
                }
            }
            std::vector<UnifilarStateSpec> states;
            for (std::size_t i = 0; i < w.size(); ++i) {
                const auto b = spec.alphabet.find(w[i]);
                if (b == std::string::npos) throw ConfigError("pattern symbol not in alphabet");
                UnifilarStateSpec s{std::vector<double>(spec.alphabet.size(), 0.0),
                                    std::vector<int>(spec.alphabet.size(), -1)};
                s.emission[b] = 1.0;
                s.transitions[b] = static_cast<int>((i + 1) % w.size());
                states.push_back(std::move(s));
            }
            return states;
        }
        case ProcessKind::GoldenMean:
        case ProcessKind::EvenProcess: {
            if (spec.alphabet.size() != 2) throw ConfigError("binary process needs a 2-letter alphabet");
            if (!(spec.p > 0.0 && spec.p < 1.0)) throw ConfigError("p must lie in (0,1)");
            // state 0 free; state 1 after a 1 (golden mean) or mid-run (even)
            UnifilarStateSpec free{{1.0 - spec.p, spec.p}, {0, 1}};
            UnifilarStateSpec forced = spec.kind == ProcessKind::GoldenMean
                                           ? UnifilarStateSpec{{1.0, 0.0}, {0, -1}}
                                           : UnifilarStateSpec{{0.0, 1.0}, {-1, 0}};
            return {free, forced};
        }
        case ProcessKind::CustomUnifilar:
            return spec.states;
    }
    return {};
}

}  // namespace

const char* to_string(ProcessKind k) {
    switch (k) {
        case ProcessKind::Iid: return "iid";
        case ProcessKind::Periodic: return "periodic";
        case ProcessKind::GoldenMean: return "golden_mean";
        case ProcessKind::EvenProcess: return "even_process";
        case ProcessKind::CustomUnifilar: return "custom_unifilar";
    }
    return "?";
}

ProcessKind process_kind_from_string(std::string_view s) {
    for (auto k : {ProcessKind::Iid, ProcessKind::Periodic, ProcessKind::GoldenMean,
                   ProcessKind::EvenProcess, ProcessKind::CustomUnifilar}) {
        if (s == to_string(k)) return k;
    }
    throw ConfigError("unknown process '" + std::string(s) + "'");
}

EpsilonMachine analytic_machine(const GeneratorSpec& spec) {
    if (spec.alphabet.empty()) throw ConfigError("generator alphabet is empty");
    const auto states = named_states(spec);
    if (states.empty()) throw ConfigError("generator has no states");
    const auto k = spec.alphabet.size();
    for (std::size_t s = 0; s < states.size(); ++s) {
        const std::string where = "state " + std::to_string(s);
        if (states[s].emission.size() != k || states[s].transitions.size() != k) {
            throw ConfigError(where + ": rows must have one entry per symbol");
        }
        check_row(states[s].emission, where);
        for (std::size_t b = 0; b < k; ++b) {
            const int t = states[s].transitions[b];
            if (states[s].emission[b] > 0 && (t < 0 || t >= static_cast<int>(states.size()))) {
                throw ConfigError(where + ": missing or invalid transition on '" +
                                  std::string(1, spec.alphabet[b]) + "'");
            }
        }
    }
    if (spec.kind == ProcessKind::CustomUnifilar && has_equivalent_states(states)) {
        throw ConfigError("custom machine is not minimal (equivalent states); minimize it first");
    }

    EpsilonMachine m;
    m.alphabet = spec.alphabet;
    for (std::size_t s = 0; s < states.size(); ++s) {
        CausalState st;
        st.id = static_cast<int>(s);
        st.emission = states[s].emission;
        st.transitions = states[s].transitions;
        for (std::size_t b = 0; b < k; ++b) {
            if (st.emission[b] <= 0) st.transitions[b] = -1;
        }
        st.counts.assign(k, 0);
        m.states.push_back(std::move(st));
    }
    mark_recurrent(m);
    const auto pi = stationary_distribution(m);
    m.marginal.assign(k, 0.0);
    for (std::size_t s = 0; s < m.states.size(); ++s) {
        for (std::size_t b = 0; b < k; ++b) m.marginal[b] += pi[s] * m.states[s].emission[b];
    }
    return m;
}

std::string generate_from_machine(const EpsilonMachine& machine, std::size_t length,
                                  std::uint64_t seed) {
    if (length < 1) throw ConfigError("generate: length must be >= 1");
    std::mt19937_64 rng(splitmix64(seed));
    const auto pi = stationary_distribution(machine);
    auto state = draw(rng, pi);
    std::string out;
    out.reserve(length);
    for (std::size_t i = 0; i < length; ++i) {
        const auto& st = machine.states[state];
        const auto b = draw(rng, st.emission);
        out.push_back(machine.alphabet[b]);
        if (st.transitions[b] < 0) throw InvariantError("generator reached an undefined transition");
        state = static_cast<std::size_t>(st.transitions[b]);
    }
    return out;
}

std::string generate(const GeneratorSpec& spec, std::size_t length, std::uint64_t seed) {
    return generate_from_machine(analytic_machine(spec), length, seed);
}

void SessionGeneratorSpec::validate() const {
    if (theta <= 0) throw ConfigError("session generator: theta must be positive");
    for (std::size_t r = 0; r < next_class.size(); ++r) {
        check_row(next_class[r], "session generator next_class row " + std::to_string(r));
    }
    for (double h : quit_hazard) {
        if (!(h >= 0.0 && h <= 1.0)) throw ConfigError("session generator: quit hazard outside [0,1]");
    }
    if (!(start_quit >= 0.0 && start_quit <= 1.0)) {
        throw ConfigError("session generator: start_quit outside [0,1]");
    }
    if (max_games < 1) throw ConfigError("session generator: max_games must be >= 1");
    if (min_sessions < 1 || max_sessions < min_sessions) {
        throw ConfigError("session generator: invalid sessions-per-player range");
    }
    if (drop_max < 1 || gain_span < 1 || base_spread < 0 || base_score < 0) {
        throw ConfigError("session generator: invalid score ranges");
    }
    if (threshold_h < 1 || horizon_h < 1) throw ConfigError("session generator: invalid time ranges");
}

std::vector<GameRecord> generate_sessions(const SessionGeneratorSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::vector<GameRecord> records;
    char id[32];
    for (std::size_t p = 0; p < spec.players; ++p) {
        std::snprintf(id, sizeof id, "p%06zu", p);
        std::mt19937_64 rng(derive_seed(seed, "synthetic-player", p));
        std::int64_t t = uniform_int(rng, 0, spec.horizon_h - 1);
        const auto base = spec.base_score + uniform_int(rng, -spec.base_spread, spec.base_spread);
        const auto n_sessions = uniform_int(rng, spec.min_sessions, spec.max_sessions);
        for (std::int64_t s = 0; s < n_sessions; ++s) {
            std::int64_t score = std::max<std::int64_t>(0, base + uniform_int(rng, -2000, 2000));
            records.push_back({id, t, score, 0});
            int games = 1;
            std::size_t context = 0;
            for (;;) {
                if (games >= spec.max_games) break;
                const double hazard = context == 0 ? spec.start_quit : spec.quit_hazard[context - 1];
                if (uniform01(rng) < hazard) break;
                const auto cls = draw(rng, spec.next_class[context]);
                std::int64_t delta = 0;
                if (cls == 0) delta = -uniform_int(rng, 1, spec.drop_max);
                if (cls == 1) delta = uniform_int(rng, 0, spec.theta - 1);
                if (cls == 2) delta = spec.theta + uniform_int(rng, 0, spec.gain_span - 1);
                score = std::max<std::int64_t>(0, score + delta);
                t += uniform_int(rng, 0, 1);
                records.push_back({id, t, score, 0});
                ++games;
                context = cls + 1;
            }
            t += spec.threshold_h + uniform_int(rng, 0, 70);
        }
    }
    for (std::size_t i = 0; i < records.size(); ++i) records[i].file_ordinal = i;
    return records;
}

EpsilonMachine session_machine(const SessionGeneratorSpec& spec) {
    spec.validate();
    EpsilonMachine m;
    m.alphabet = std::string(kPlayAlphabet);
    for (std::size_t s = 0; s < 4; ++s) {
        CausalState st;
        st.id = static_cast<int>(s);
        const double hazard = s == 0 ? spec.start_quit : spec.quit_hazard[s - 1];
        st.emission.assign(4, 0.0);
        st.transitions.assign(4, -1);
        for (std::size_t c = 0; c < 3; ++c) {
            st.emission[c] = (1.0 - hazard) * spec.next_class[s][c];
            if (st.emission[c] > 0) st.transitions[c] = static_cast<int>(c + 1);
        }
        st.emission[3] = hazard;
        if (hazard > 0) st.transitions[3] = 0;
        st.counts.assign(4, 0);
        m.states.push_back(std::move(st));
    }
    mark_recurrent(m);
    const auto pi = stationary_distribution(m);
    m.marginal.assign(4, 0.0);
    for (std::size_t s = 0; s < 4; ++s) {
        for (std::size_t b = 0; b < 4; ++b) m.marginal[b] += pi[s] * m.states[s].emission[b];
    }
    return m;
}

nlohmann::json to_json(const GeneratorSpec& spec) {
    nlohmann::json states = nlohmann::json::array();
    for (const auto& s : spec.states) {
        states.push_back({{"emission", s.emission}, {"transitions", s.transitions}});
    }
    return {{"process", to_string(spec.kind)}, {"alphabet", spec.alphabet},
            {"probabilities", spec.probabilities}, {"p", spec.p},
            {"pattern", spec.pattern}, {"states", states}};
}

GeneratorSpec generator_spec_from_json(const nlohmann::json& j) {
    try {
        GeneratorSpec spec;
        spec.kind = process_kind_from_string(j.at("process").get<std::string>());
        spec.alphabet = j.value("alphabet", spec.alphabet);
        spec.probabilities = j.value("probabilities", spec.probabilities);
        spec.p = j.value("p", spec.p);
        spec.pattern = j.value("pattern", spec.pattern);
        for (const auto& s : j.value("states", nlohmann::json::array())) {
            spec.states.push_back({s.at("emission").get<std::vector<double>>(),
                                   s.at("transitions").get<std::vector<int>>()});
        }
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("generator spec: ") + e.what());
    }
}

nlohmann::json to_json(const SessionGeneratorSpec& s) {
    return {{"theta", s.theta},
            {"next_class", s.next_class},
            {"quit_hazard", s.quit_hazard},
            {"start_quit", s.start_quit},
            {"max_games", s.max_games},
            {"players", s.players},
            {"min_sessions", s.min_sessions},
            {"max_sessions", s.max_sessions},
            {"base_score", s.base_score},
            {"base_spread", s.base_spread},
            {"drop_max", s.drop_max},
            {"gain_span", s.gain_span},
            {"threshold_h", s.threshold_h},
            {"horizon_h", s.horizon_h}};
}

SessionGeneratorSpec session_spec_from_json(const nlohmann::json& j) {
    try {
        SessionGeneratorSpec s;
        s.theta = j.value("theta", s.theta);
        s.next_class = j.value("next_class", s.next_class);
        s.quit_hazard = j.value("quit_hazard", s.quit_hazard);
        s.start_quit = j.value("start_quit", s.start_quit);
        s.max_games = j.value("max_games", s.max_games);
        s.players = j.value("players", s.players);
        s.min_sessions = j.value("min_sessions", s.min_sessions);
        s.max_sessions = j.value("max_sessions", s.max_sessions);
        s.base_score = j.value("base_score", s.base_score);
        s.base_spread = j.value("base_spread", s.base_spread);
        s.drop_max = j.value("drop_max", s.drop_max);
        s.gain_span = j.value("gain_span", s.gain_span);
        s.threshold_h = j.value("threshold_h", s.threshold_h);
        s.horizon_h = j.value("horizon_h", s.horizon_h);
        s.validate();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("session generator spec: ") + e.what());
    }
}

}  // namespace playmech
