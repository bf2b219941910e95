#include "playmech/encode.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include "playmech/common.hpp"

namespace playmech {
namespace {

// Running reference statistic over the scores seen so far.
class Reference {
public:
    explicit Reference(Scheme scheme) : scheme_(scheme) {}

    void add(std::int64_t score) {
        sum_ += static_cast<double>(score);
        sorted_.insert(std::upper_bound(sorted_.begin(), sorted_.end(), score), score);
    }

    bool empty() const { return sorted_.empty(); }

    double value() const {
        if (scheme_ == Scheme::DeltaMean) return sum_ / static_cast<double>(sorted_.size());
        const auto n = sorted_.size();
        if (n % 2 == 1) return static_cast<double>(sorted_[n / 2]);
        return 0.5 * static_cast<double>(sorted_[n / 2 - 1] + sorted_[n / 2]);
    }

private:
    Scheme scheme_;
    double sum_ = 0.0;
    std::vector<std::int64_t> sorted_;
};

}  // namespace

const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::DeltaPrev: return "delta_prev";
        case Scheme::DeltaMedian: return "delta_median";
        case Scheme::DeltaMean: return "delta_mean";
    }
    return "?";
}

Scheme scheme_from_string(std::string_view s) {
    if (s == "delta_prev") return Scheme::DeltaPrev;
    if (s == "delta_median") return Scheme::DeltaMedian;
    if (s == "delta_mean") return Scheme::DeltaMean;
    throw ConfigError("unknown alphabet scheme '" + std::string(s) + "'");
}

const char* to_string(ReferenceScope s) {
    return s == ReferenceScope::Session ? "session" : "lifetime";
}

ReferenceScope scope_from_string(std::string_view s) {
    if (s == "session") return ReferenceScope::Session;
    if (s == "lifetime") return ReferenceScope::Lifetime;
    throw ConfigError("unknown reference scope '" + std::string(s) + "'");
}

void AlphabetSpec::validate() const {
    if (theta <= 0) throw ConfigError("theta must be positive");
}

char classify(double delta, std::int64_t theta) {
    if (delta < 0) return kPoor;
    return delta < static_cast<double>(theta) ? kGood : kVeryGood;
}

EncodedSession encode_session(const Session& session, const AlphabetSpec& spec,
                              std::span<const std::int64_t> prior_scores) {
    spec.validate();
    EncodedSession out{session.player_id, session.session_index, session.start_h, {}, {}};
    Reference ref(spec.scheme);
    if (spec.scope == ReferenceScope::Lifetime && spec.scheme != Scheme::DeltaPrev) {
        for (auto s : prior_scores) ref.add(s);
    }
    for (std::size_t i = 0; i < session.games.size(); ++i) {
        const auto score = session.games[i].score;
        if (i > 0) {
            const double delta =
                spec.scheme == Scheme::DeltaPrev
                    ? static_cast<double>(score - session.games[i - 1].score)
                    : static_cast<double>(score) - ref.value();
            out.deltas.push_back(delta);
            out.symbols.push_back(classify(delta, spec.theta));
        }
        if (spec.scheme != Scheme::DeltaPrev) ref.add(score);
    }
    out.symbols.push_back(kQuit);
    return out;
}

std::string PlayerStream::stream() const {
    std::string s;
    for (const auto& e : sessions) s += e.symbols;
    return s;
}

std::vector<std::string> Corpus::streams() const {
    std::vector<std::string> out;
    out.reserve(players.size());
    for (const auto& p : players) out.push_back(p.stream());
    return out;
}

std::vector<EncodedSession> Corpus::sessions() const {
    std::vector<EncodedSession> out;
    for (const auto& p : players) out.insert(out.end(), p.sessions.begin(), p.sessions.end());
    return out;
}

std::map<char, std::uint64_t> Corpus::symbol_frequencies() const {
    std::map<char, std::uint64_t> freq;
    for (char c : kPlayAlphabet) freq[c] = 0;
    for (const auto& p : players) {
        for (const auto& s : p.sessions) {
            for (char c : s.symbols) ++freq[c];
        }
    }
    return freq;
}

Corpus encode_corpus(std::span<const Session> sessions, const AlphabetSpec& spec) {
    spec.validate();
    Corpus corpus{spec, {}};
    std::vector<std::int64_t> prior;
    for (const auto& s : sessions) {
        if (corpus.players.empty() || corpus.players.back().player_id != s.player_id) {
            corpus.players.push_back({s.player_id, {}});
            prior.clear();
        }
        corpus.players.back().sessions.push_back(encode_session(s, spec, prior));
        if (spec.scope == ReferenceScope::Lifetime) {
            for (const auto& g : s.games) prior.push_back(g.score);
        }
    }
    return corpus;
}

std::vector<PlayerStream> group_by_player(std::span<const EncodedSession> sessions) {
    std::vector<const EncodedSession*> order;
    order.reserve(sessions.size());
    for (const auto& s : sessions) order.push_back(&s);
    std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
        return std::tie(a->player_id, a->session_index) < std::tie(b->player_id, b->session_index);
    });
    std::vector<PlayerStream> out;
    for (const auto* s : order) {
        if (out.empty() || out.back().player_id != s->player_id) out.push_back({s->player_id, {}});
        out.back().sessions.push_back(*s);
    }
    return out;
}

std::vector<std::string> player_streams(std::span<const EncodedSession> sessions) {
    std::vector<std::string> out;
    for (const auto& p : group_by_player(sessions)) out.push_back(p.stream());
    return out;
}

std::vector<std::int64_t> theta_grid(std::span<const double> extra) {
    std::set<std::int64_t> grid{100,  200,  300,  500,   1000,  2000,  3000,
                                5000, 8000, 12000, 16000, 22000, 30000};
    for (double x : extra) {
        if (!std::isfinite(x)) continue;
        const auto rounded = static_cast<std::int64_t>(std::llround(x / 100.0)) * 100;
        if (rounded >= 100 && rounded <= 30000) grid.insert(rounded);
    }
    return {grid.begin(), grid.end()};
}

nlohmann::json to_json(const AlphabetSpec& spec) {
    return {{"format", "playmech-corpus"},
            {"format_version", 1},
            {"alphabet", std::string(kPlayAlphabet)},
            {"scheme", to_string(spec.scheme)},
            {"theta", spec.theta},
            {"reference_scope", to_string(spec.scope)}};
}

AlphabetSpec alphabet_spec_from_json(const nlohmann::json& j) {
    try {
        if (j.at("alphabet").get<std::string>() != kPlayAlphabet) {
            throw DataError("corpus sidecar: unsupported alphabet");
        }
        AlphabetSpec spec;
        spec.scheme = scheme_from_string(j.at("scheme").get<std::string>());
        spec.theta = j.at("theta").get<std::int64_t>();
        spec.scope = scope_from_string(j.value("reference_scope", std::string("session")));
        spec.validate();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("corpus sidecar: ") + e.what());
    }
}

CorpusFile to_corpus_file(const Corpus& corpus) {
    CorpusFile f{corpus.spec, {}};
    for (const auto& p : corpus.players) f.streams.emplace_back(p.player_id, p.stream());
    return f;
}

void write_corpus_text(std::ostream& out, const CorpusFile& corpus) {
    for (const auto& [id, symbols] : corpus.streams) out << id << '\t' << symbols << '\n';
}

CorpusFile read_corpus_text(std::istream& in, const AlphabetSpec& spec) {
    CorpusFile f{spec, {}};
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw DataError("corpus line " + std::to_string(row) + ": missing tab");
        }
        auto symbols = line.substr(tab + 1);
        if (symbols.find_first_not_of(kPlayAlphabet) != std::string::npos) {
            throw DataError("corpus line " + std::to_string(row) + ": symbol outside alphabet");
        }
        if (!symbols.empty() && symbols.back() != kQuit) {
            throw DataError("corpus line " + std::to_string(row) + ": stream must end with Q");
        }
        f.streams.emplace_back(line.substr(0, tab), std::move(symbols));
    }
    return f;
}

}  // namespace playmech
