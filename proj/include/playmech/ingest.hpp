#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace playmech {

/// One play event. Time has hourly resolution.
struct GameRecord {
    std::string player_id;
    std::int64_t time_h = 0;
    std::int64_t score = 0;
    std::size_t file_ordinal = 0;

    bool operator==(const GameRecord&) const = default;
};

/// A player's games ordered by (time_h, file_ordinal).
struct PlayerHistory {
    std::string player_id;
    std::vector<GameRecord> games;
};

/// Maximal run of one player's games with no long break in between.
struct Session {
    std::string player_id;
    std::size_t session_index = 0;
    std::vector<GameRecord> games;
    std::int64_t start_h = 0;
    std::int64_t end_h = 0;

    bool operator==(const Session&) const = default;
};

/// Header names of the three columns the parser reads. Other columns are ignored.
struct ColumnMap {
    std::string player = "player";
    std::string time = "time";
    std::string score = "score";
};

struct ParseReport {
    std::vector<GameRecord> records;
    std::size_t rows_read = 0;
    std::size_t rows_skipped = 0;
    std::vector<std::string> skip_reasons;  // first few, for diagnostics
};

/// Parse delimited text with a header row. `delimiter == 0` sniffs tab vs
/// comma from the header. Throws DataError when a mapped column is missing;
/// rows that fail to parse are skipped and tallied.
ParseReport parse_dataset(std::istream& in, const ColumnMap& columns, char delimiter = 0);
ParseReport parse_dataset_file(const std::filesystem::path& path, const ColumnMap& columns,
                               char delimiter = 0);

/// Whole hours from an integer string or an ISO-like datetime
/// ("YYYY-MM-DD HH:MM:SS", 'T' separator allowed, minutes/seconds truncated).
std::optional<std::int64_t> parse_hours(std::string_view text);

/// One history per player, sorted by player id.
std::vector<PlayerHistory> build_histories(std::span<const GameRecord> records);

enum class SplitRule {
    AtLeast,  // gap >= threshold starts a new session
    Greater,  // gap > threshold starts a new session
};

struct SegmentOptions {
    std::int64_t threshold_h = 2;
    SplitRule rule = SplitRule::AtLeast;
};

std::vector<Session> segment_sessions(const PlayerHistory& history,
                                      const SegmentOptions& options = {});

/// Segments every history; output is grouped by player in history order.
std::vector<Session> segment_all(std::span<const PlayerHistory> histories,
                                 const SegmentOptions& options = {});

/// Inter-game gaps exactly equal to the threshold (the boundary the two
/// split rules disagree on).
std::size_t count_contested_gaps(std::span<const PlayerHistory> histories,
                                 std::int64_t threshold_h);

/// Sparse integer histogram.
struct Histogram {
    std::map<std::int64_t, std::uint64_t> bins;

    void add(std::int64_t key, std::uint64_t n = 1) { bins[key] += n; }
    std::uint64_t total() const;
};

struct DatasetSummary {
    std::uint64_t n_players = 0;
    std::uint64_t n_games = 0;
    std::uint64_t n_sessions = 0;
    std::uint64_t sessions_over_three_games = 0;
    std::uint64_t players_under_eight_games = 0;
    std::uint64_t players_single_session = 0;
    Histogram sessions_per_player;
    Histogram games_per_session;
    Histogram games_per_player;
    Histogram session_duration_h;
    Histogram inter_session_gap_h;
};

/// Sessions must be grouped by player with increasing session_index.
DatasetSummary summarize(std::span<const Session> sessions);

// Tabular I/O for the pipeline's intermediate artifacts.
void write_records_csv(std::ostream& out, std::span<const GameRecord> records);
/// Reads the format written by write_records_csv, keeping file ordinals.
std::vector<GameRecord> read_records_csv(std::istream& in);
void write_sessions_csv(std::ostream& out, std::span<const Session> sessions);
/// Reads the format written by write_sessions_csv.
std::vector<Session> read_sessions_csv(std::istream& in);

}  // namespace playmech
