#include "playmech/reports.hpp"

#include <charconv>
#include <limits>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "playmech/common.hpp"

namespace playmech {
namespace {

std::string fmt(double v) { return format_number(v); }

const char* quartile_label(int q) {
    static const char* labels[] = {"all", "1", "2", "3", "4"};
    return q >= 0 && q <= 4 ? labels[q] : "?";
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

nlohmann::json histogram_json(const Histogram& h) {
    auto bins = nlohmann::json::array();
    for (const auto& [k, n] : h.bins) bins.push_back({k, n});
    return bins;
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0) return "0";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    ensure(ec == std::errc{}, "format_number: to_chars failed");
    return std::string(buf, end);
}

void write_histogram_csv(std::ostream& out, const Histogram& h, const std::string& key_name) {
    out << key_name << ",count\n";
    for (const auto& [k, n] : h.bins) out << k << ',' << n << '\n';
}

nlohmann::json to_json(const DatasetSummary& s) {
    const double players = static_cast<double>(std::max<std::uint64_t>(s.n_players, 1));
    return {
        {"n_players", s.n_players},
        {"n_games", s.n_games},
        {"n_sessions", s.n_sessions},
        {"sessions_over_three_games", s.sessions_over_three_games},
        {"players_under_eight_games", s.players_under_eight_games},
        {"fraction_players_under_eight_games", s.players_under_eight_games / players},
        {"players_single_session", s.players_single_session},
        {"fraction_players_single_session", s.players_single_session / players},
        {"sessions_per_player", histogram_json(s.sessions_per_player)},
        {"games_per_session", histogram_json(s.games_per_session)},
        {"games_per_player", histogram_json(s.games_per_player)},
        {"session_duration_h", histogram_json(s.session_duration_h)},
        {"inter_session_gap_h", histogram_json(s.inter_session_gap_h)},
    };
}

nlohmann::json to_json(const ParseReport& r) {
    return {{"records", r.records.size()},
            {"rows_read", r.rows_read},
            {"rows_skipped", r.rows_skipped},
            {"skip_reasons", r.skip_reasons}};
}

void write_profiles_csv(std::ostream& out, std::span<const SkillProfile> profiles,
                        const QuartileSplit& by_talent, const QuartileSplit& by_success) {
    out << "player,n_games,talent,success,talent_quartile,success_quartile\n";
    for (const auto& p : profiles) {
        out << p.player_id << ',' << p.n_games << ',' << (p.talent ? fmt(*p.talent) : "") << ','
            << (p.success ? fmt(*p.success) : "") << ',' << by_talent.quartile_of(p.player_id)
            << ',' << by_success.quartile_of(p.player_id) << '\n';
    }
}

nlohmann::json to_json(const QuartileSplit& split) {
    const auto sizes = split.sizes();
    return {{"basis", to_string(split.basis)},
            {"boundaries", split.boundaries},
            {"sizes", sizes},
            {"degenerate", split.degenerate}};
}

void write_correlations_csv(std::ostream& out, const SkillCorrelations& c) {
    out << "talent_quartile,r,p_value,n\n";
    const auto row = [&](int q, const CorrelationResult& r) {
        out << quartile_label(q) << ',' << fmt(r.r) << ',' << fmt(r.p_value) << ',' << r.n << '\n';
    };
    row(0, c.overall);
    for (int q = 0; q < 4; ++q) {
        if (c.by_quartile[static_cast<std::size_t>(q)]) row(q + 1, *c.by_quartile[static_cast<std::size_t>(q)]);
    }
}

nlohmann::json to_json(const SkillCorrelations& c) {
    const auto one = [](const CorrelationResult& r) {
        return nlohmann::json{{"r", r.r}, {"p_value", r.p_value}, {"n", r.n}};
    };
    nlohmann::json j{{"overall", one(c.overall)}, {"by_talent_quartile", nlohmann::json::object()}};
    for (int q = 0; q < 4; ++q) {
        const auto& r = c.by_quartile[static_cast<std::size_t>(q)];
        j["by_talent_quartile"][quartile_label(q + 1)] = r ? one(*r) : nlohmann::json(nullptr);
    }
    return j;
}

void write_curves_csv(std::ostream& out, const LearningCurveSet& curves) {
    out << "quartile,length,index,mean,stderr,n\n";
    for (const auto& p : curves.points) {
        out << p.quartile << ',' << p.length << ',' << p.index << ',' << fmt(p.mean) << ','
            << fmt(p.se) << ',' << p.n << '\n';
    }
}

void write_slopes_csv(std::ostream& out, std::span<const SlopeTest> slopes) {
    out << "quartile,length,slope,stderr,z,n,significant\n";
    for (const auto& s : slopes) {
        out << s.quartile << ',' << s.length << ',' << fmt(s.slope) << ',' << fmt(s.se) << ','
            << fmt(s.z) << ',' << s.n_sessions << ',' << (s.significant ? 1 : 0) << '\n';
    }
}

void write_quit_curve_csv(std::ostream& out, const QuitCurve& curve) {
    out << "quartile,index_first,index_last,delta_lo,delta_hi,quit_probability,stderr,n,quits\n";
    for (const auto& p : curve.points) {
        out << p.quartile << ',' << p.range.first << ',' << p.range.last << ',' << p.bin_lo << ','
            << p.bin_hi << ',' << fmt(p.quit.value()) << ',' << fmt(p.quit.stderr_value()) << ','
            << p.quit.denominator << ',' << p.quit.numerator << '\n';
    }
}

void write_persistence_csv(std::ostream& out, const PersistenceResult& result) {
    out << "basis,quartile,event,quit_probability,stderr,n,quits\n";
    const auto row = [&](const PersistenceCell& c, const char* event, const Proportion& p) {
        out << to_string(c.basis) << ',' << c.quartile << ',' << event << ',';
        if (p.defined()) {
            out << fmt(p.value()) << ',' << fmt(p.stderr_value());
        } else {
            out << ',';
        }
        out << ',' << p.denominator << ',' << p.numerator << '\n';
    };
    for (const auto& c : result.cells) {
        row(c, "drop", c.quit_after_drop);
        row(c, "gain", c.quit_after_gain);
    }
}

void write_spacing_csv(std::ostream& out, const SpacingCurve& curve) {
    out << "variant,break_lo_h,break_hi_h,mean,stderr,n\n";
    const auto rows = [&](const char* variant, const std::vector<SpacingBin>& bins) {
        for (const auto& b : bins) {
            out << variant << ',' << b.lo_h << ',';
            if (b.hi_h != std::numeric_limits<std::int64_t>::max()) out << b.hi_h;
            out << ',' << fmt(b.mean) << ',' << fmt(b.se) << ',' << b.n << '\n';
        }
    };
    rows("game", curve.game_level);
    rows("session", curve.session_level);
}

void write_frequencies_csv(std::ostream& out, const std::map<char, std::uint64_t>& freq) {
    out << "symbol,count\n";
    for (char c : kPlayAlphabet) {
        const auto it = freq.find(c);
        out << c << ',' << (it == freq.end() ? 0 : it->second) << '\n';
    }
}

void write_encoded_sessions_csv(std::ostream& out, std::span<const EncodedSession> sessions) {
    out << "player,session_index,start_h,symbols,deltas\n";
    for (const auto& s : sessions) {
        out << s.player_id << ',' << s.session_index << ',' << s.start_h << ',' << s.symbols << ',';
        for (std::size_t i = 0; i < s.deltas.size(); ++i) {
            if (i) out << ';';
            out << fmt(s.deltas[i]);
        }
        out << '\n';
    }
}

std::vector<EncodedSession> read_encoded_sessions_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("player,session_index,start_h,symbols", 0) != 0) {
        throw DataError("encoded sessions: unexpected header");
    }
    std::vector<EncodedSession> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 5) throw DataError("encoded sessions line " + std::to_string(line_no) + ": expected 5 fields");
        EncodedSession s;
        s.player_id = f[0];
        try {
            s.session_index = std::stoull(f[1]);
            s.start_h = std::stoll(f[2]);
            for (const auto& d : split(f[4], ';')) {
                if (!d.empty()) s.deltas.push_back(std::stod(d));
            }
        } catch (const std::exception&) {
            throw DataError("encoded sessions line " + std::to_string(line_no) + ": bad number");
        }
        s.symbols = f[3];
        if (s.symbols.empty() || s.symbols.back() != kQuit ||
            s.symbols.find_first_not_of(kPlayAlphabet) != std::string::npos) {
            throw DataError("encoded sessions line " + std::to_string(line_no) + ": bad symbols");
        }
        out.push_back(std::move(s));
    }
    return out;
}

void write_states_csv(std::ostream& out, const EpsilonMachine& machine) {
    out << "state,recurrent,n";
    for (char c : machine.alphabet) out << ",p_" << c;
    for (char c : machine.alphabet) out << ",next_" << c;
    out << ",members\n";
    for (const auto& s : machine.states) {
        std::uint64_t n = 0;
        for (auto c : s.counts) n += c;
        out << s.id << ',' << (s.recurrent ? 1 : 0) << ',' << n;
        for (double p : s.emission) out << ',' << fmt(p);
        for (int t : s.transitions) out << ',' << t;
        out << ',';
        for (std::size_t i = 0; i < s.members.size(); ++i) {
            if (i) out << ' ';
            out << (s.members[i].empty() ? "-" : s.members[i]);
        }
        out << '\n';
    }
}

void write_auc_csv(std::ostream& out, const AucReport& report) {
    out << "symbol,auc,weight,ci_lo,ci_hi\n";
    for (const auto& s : report.symbols) {
        out << s.symbol << ',' << (s.auc ? fmt(*s.auc) : "") << ',' << fmt(s.weight) << ','
            << fmt(s.ci_lo) << ',' << fmt(s.ci_hi) << '\n';
    }
    out << "weighted," << fmt(report.weighted) << ",1," << fmt(report.ci_lo) << ','
        << fmt(report.ci_hi) << '\n';
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
    out << "fpr,tpr\n";
    for (const auto& [x, y] : curve.points) out << fmt(x) << ',' << fmt(y) << '\n';
}

void write_sweep_csv(std::ostream& out, const SweepReport& report) {
    out << "scheme,theta,L,quartile,weighted_auc,ci_lo,ci_hi,states,recurrent_states,"
           "n_train_sessions,n_test_sessions,best_theta,error\n";
    for (const auto& c : report.cells) {
        out << to_string(c.scheme) << ',' << c.theta << ',' << c.L << ',' << quartile_label(c.quartile)
            << ',';
        if (c.error.empty()) {
            out << fmt(c.weighted_auc) << ',' << fmt(c.ci_lo) << ',' << fmt(c.ci_hi);
        } else {
            out << ",,";
        }
        std::string error = c.error;
        for (char& ch : error) {
            if (ch == ',' || ch == '\n') ch = ' ';
        }
        out << ',' << c.states << ',' << c.recurrent_states << ',' << c.n_train_sessions << ','
            << c.n_test_sessions << ',' << (c.best_theta ? 1 : 0) << ',' << error << '\n';
    }
}

nlohmann::json to_json(const SweepReport& report) {
    auto cells = nlohmann::json::array();
    for (const auto& c : report.cells) cells.push_back(to_json(c));
    return {{"cells", cells}};
}

}  // namespace playmech
