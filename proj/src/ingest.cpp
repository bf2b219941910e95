#include "playmech/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

#include "playmech/common.hpp"

namespace playmech {
namespace {

constexpr std::size_t kMaxSkipReasons = 20;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '"')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '"')) {
        s.remove_suffix(1);
    }
    return s;
}

// Splits one line. Quoted fields may contain the delimiter; embedded quotes
// and newlines are not supported.
std::vector<std::string_view> split_fields(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') {
            quoted = !quoted;
        } else if (line[i] == delim && !quoted) {
            out.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    out.push_back(trim(line.substr(start)));
    return out;
}

template <typename T>
std::optional<T> parse_int(std::string_view s) {
    T v{};
    if (s.empty()) return std::nullopt;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || p != end) return std::nullopt;
    return v;
}

std::size_t column_index(const std::vector<std::string_view>& header,
                         const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw DataError("column '" + name + "' not found in header");
}

}  // namespace

std::optional<std::int64_t> parse_hours(std::string_view text) {
    text = trim(text);
    if (auto v = parse_int<std::int64_t>(text)) return *v >= 0 ? v : std::nullopt;
    // YYYY-MM-DD[ T]HH[:MM[:SS[.frac]]]
    if (text.size() < 13 || text[4] != '-' || text[7] != '-' ||
        (text[10] != ' ' && text[10] != 'T')) {
        return std::nullopt;
    }
    const auto y = parse_int<int>(text.substr(0, 4));
    const auto m = parse_int<unsigned>(text.substr(5, 2));
    const auto d = parse_int<unsigned>(text.substr(8, 2));
    const auto h = parse_int<int>(text.substr(11, 2));
    if (!y || !m || !d || !h || *h < 0 || *h > 23) return std::nullopt;
    using namespace std::chrono;
    const year_month_day ymd{year{*y}, month{*m}, day{*d}};
    if (!ymd.ok()) return std::nullopt;
    const auto days = sys_days{ymd}.time_since_epoch().count();
    return static_cast<std::int64_t>(days) * 24 + *h;
}

ParseReport parse_dataset(std::istream& in, const ColumnMap& columns, char delimiter) {
    ParseReport report;
    std::string line;
    if (!std::getline(in, line)) throw DataError("dataset is empty (no header row)");
    if (delimiter == 0) delimiter = line.find('\t') != std::string::npos ? '\t' : ',';
    const std::string header_line = line;
    const auto header = split_fields(header_line, delimiter);
    const auto ip = column_index(header, columns.player);
    const auto it = column_index(header, columns.time);
    const auto is = column_index(header, columns.score);
    const auto needed = std::max({ip, it, is});

    auto skip = [&](std::size_t row, const std::string& why) {
        ++report.rows_skipped;
        if (report.skip_reasons.size() < kMaxSkipReasons) {
            report.skip_reasons.push_back("row " + std::to_string(row) + ": " + why);
        }
    };

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        const std::size_t ordinal = row++;
        ++report.rows_read;
        const auto fields = split_fields(line, delimiter);
        if (fields.size() <= needed) {
            skip(ordinal, "too few fields");
            continue;
        }
        if (fields[ip].empty()) {
            skip(ordinal, "empty player id");
            continue;
        }
        const auto time = parse_hours(fields[it]);
        if (!time || *time < 0) {
            skip(ordinal, "bad time '" + std::string(fields[it]) + "'");
            continue;
        }
        const auto score = parse_int<std::int64_t>(fields[is]);
        if (!score || *score < 0) {
            skip(ordinal, "bad score '" + std::string(fields[is]) + "'");
            continue;
        }
        report.records.push_back({std::string(fields[ip]), *time, *score, ordinal});
    }
    return report;
}

ParseReport parse_dataset_file(const std::filesystem::path& path, const ColumnMap& columns,
                               char delimiter) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset " + path.string());
    return parse_dataset(in, columns, delimiter);
}

std::vector<PlayerHistory> build_histories(std::span<const GameRecord> records) {
    std::unordered_map<std::string_view, std::size_t> slot;
    std::vector<PlayerHistory> histories;
    for (const auto& r : records) {
        auto [pos, inserted] = slot.try_emplace(r.player_id, histories.size());
        if (inserted) histories.push_back({r.player_id, {}});
        histories[pos->second].games.push_back(r);
    }
    for (auto& h : histories) {
        std::sort(h.games.begin(), h.games.end(), [](const auto& a, const auto& b) {
            return std::tie(a.time_h, a.file_ordinal) < std::tie(b.time_h, b.file_ordinal);
        });
    }
    std::sort(histories.begin(), histories.end(),
              [](const auto& a, const auto& b) { return a.player_id < b.player_id; });
    return histories;
}

std::vector<Session> segment_sessions(const PlayerHistory& history,
                                      const SegmentOptions& options) {
    if (options.threshold_h < 1) throw ConfigError("session threshold must be >= 1 hour");
    std::vector<Session> sessions;
    for (const auto& g : history.games) {
        bool split = sessions.empty();
        if (!split) {
            const auto gap = g.time_h - sessions.back().end_h;
            split = options.rule == SplitRule::AtLeast ? gap >= options.threshold_h
                                                       : gap > options.threshold_h;
        }
        if (split) {
            sessions.push_back({history.player_id, sessions.size(), {}, g.time_h, g.time_h});
        }
        sessions.back().games.push_back(g);
        sessions.back().end_h = g.time_h;
    }
    return sessions;
}

std::vector<Session> segment_all(std::span<const PlayerHistory> histories,
                                 const SegmentOptions& options) {
    std::vector<Session> out;
    for (const auto& h : histories) {
        auto s = segment_sessions(h, options);
        std::move(s.begin(), s.end(), std::back_inserter(out));
    }
    return out;
}

std::size_t count_contested_gaps(std::span<const PlayerHistory> histories,
                                 std::int64_t threshold_h) {
    std::size_t n = 0;
    for (const auto& h : histories) {
        for (std::size_t i = 1; i < h.games.size(); ++i) {
            if (h.games[i].time_h - h.games[i - 1].time_h == threshold_h) ++n;
        }
    }
    return n;
}

std::uint64_t Histogram::total() const {
    std::uint64_t t = 0;
    for (const auto& [k, v] : bins) t += v;
    return t;
}

DatasetSummary summarize(std::span<const Session> sessions) {
    DatasetSummary s;
    std::size_t i = 0;
    while (i < sessions.size()) {
        std::size_t j = i;
        std::uint64_t games = 0;
        while (j < sessions.size() && sessions[j].player_id == sessions[i].player_id) {
            const auto& cur = sessions[j];
            games += cur.games.size();
            s.games_per_session.add(static_cast<std::int64_t>(cur.games.size()));
            s.session_duration_h.add(cur.end_h - cur.start_h);
            if (cur.games.size() > 3) ++s.sessions_over_three_games;
            if (j > i) s.inter_session_gap_h.add(cur.start_h - sessions[j - 1].end_h);
            ++j;
        }
        const auto n_sessions = j - i;
        ++s.n_players;
        s.n_sessions += n_sessions;
        s.n_games += games;
        s.sessions_per_player.add(static_cast<std::int64_t>(n_sessions));
        s.games_per_player.add(static_cast<std::int64_t>(games));
        if (games < 8) ++s.players_under_eight_games;
        if (n_sessions == 1) ++s.players_single_session;
        i = j;
    }
    return s;
}

void write_records_csv(std::ostream& out, std::span<const GameRecord> records) {
    out << "player,time_h,score,file_ordinal\n";
    for (const auto& r : records) {
        out << r.player_id << ',' << r.time_h << ',' << r.score << ',' << r.file_ordinal << '\n';
    }
}

std::vector<GameRecord> read_records_csv(std::istream& in) {
    std::vector<GameRecord> out;
    std::string line;
    std::getline(in, line);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = split_fields(line, ',');
        if (f.size() != 4) throw DataError("records.csv row " + std::to_string(row) + " malformed");
        const auto t = parse_int<std::int64_t>(f[1]);
        const auto s = parse_int<std::int64_t>(f[2]);
        const auto o = parse_int<std::size_t>(f[3]);
        if (!t || !s || !o) throw DataError("records.csv row " + std::to_string(row) + " malformed");
        out.push_back({std::string(f[0]), *t, *s, *o});
    }
    return out;
}

void write_sessions_csv(std::ostream& out, std::span<const Session> sessions) {
    out << "player,session_index,game_index,time_h,score,file_ordinal\n";
    for (const auto& s : sessions) {
        for (std::size_t g = 0; g < s.games.size(); ++g) {
            const auto& r = s.games[g];
            out << s.player_id << ',' << s.session_index << ',' << g + 1 << ',' << r.time_h << ','
                << r.score << ',' << r.file_ordinal << '\n';
        }
    }
}

std::vector<Session> read_sessions_csv(std::istream& in) {
    std::vector<Session> out;
    std::string line;
    std::getline(in, line);
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = split_fields(line, ',');
        const auto si = f.size() == 6 ? parse_int<std::size_t>(f[1]) : std::nullopt;
        const auto t = f.size() == 6 ? parse_int<std::int64_t>(f[3]) : std::nullopt;
        const auto s = f.size() == 6 ? parse_int<std::int64_t>(f[4]) : std::nullopt;
        const auto o = f.size() == 6 ? parse_int<std::size_t>(f[5]) : std::nullopt;
        if (!si || !t || !s || !o) {
            throw DataError("sessions.csv row " + std::to_string(row) + " malformed");
        }
        if (out.empty() || out.back().player_id != f[0] || out.back().session_index != *si) {
            out.push_back({std::string(f[0]), *si, {}, *t, *t});
        }
        out.back().games.push_back({std::string(f[0]), *t, *s, *o});
        out.back().end_h = *t;
    }
    return out;
}

}  // namespace playmech
