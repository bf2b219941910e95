#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "playmech/ingest.hpp"

namespace playmech {

/// Poor, good, very good, quit. Order fixes symbol indices everywhere.
inline constexpr std::string_view kPlayAlphabet = "PGVQ";
inline constexpr char kPoor = 'P';
inline constexpr char kGood = 'G';
inline constexpr char kVeryGood = 'V';
inline constexpr char kQuit = 'Q';

enum class Scheme {
    DeltaPrev,    // score minus previous score
    DeltaMedian,  // score minus median of earlier scores
    DeltaMean,    // score minus mean of earlier scores
};

/// Where the running mean/median reference starts.
enum class ReferenceScope {
    Session,   // earlier games of the same session
    Lifetime,  // all of the player's earlier games
};

const char* to_string(Scheme s);
Scheme scheme_from_string(std::string_view s);
const char* to_string(ReferenceScope s);
ReferenceScope scope_from_string(std::string_view s);

struct AlphabetSpec {
    Scheme scheme = Scheme::DeltaPrev;
    std::int64_t theta = 8000;
    ReferenceScope scope = ReferenceScope::Session;

    void validate() const;
    bool operator==(const AlphabetSpec&) const = default;
};

/// P for delta < 0, G for 0 <= delta < theta, V for delta >= theta.
char classify(double delta, std::int64_t theta);

/// One symbol per game after the first, then Q. `deltas` has one entry per
/// non-Q symbol.
struct EncodedSession {
    std::string player_id;
    std::size_t session_index = 0;
    std::int64_t start_h = 0;
    std::string symbols;
    std::vector<double> deltas;
};

/// `prior_scores` are the player's scores before this session; only read
/// under ReferenceScope::Lifetime.
EncodedSession encode_session(const Session& session, const AlphabetSpec& spec,
                              std::span<const std::int64_t> prior_scores = {});

struct PlayerStream {
    std::string player_id;
    std::vector<EncodedSession> sessions;

    /// Concatenation of the session encodings; Q separates sessions.
    std::string stream() const;
};

struct Corpus {
    AlphabetSpec spec;
    std::vector<PlayerStream> players;

    std::vector<std::string> streams() const;
    std::vector<EncodedSession> sessions() const;
    std::map<char, std::uint64_t> symbol_frequencies() const;
};

/// Sessions grouped by player in session order.
Corpus encode_corpus(std::span<const Session> sessions, const AlphabetSpec& spec);

/// Regroups encoded sessions (any order) into per-player streams sorted by
/// (player_id, session_index).
std::vector<PlayerStream> group_by_player(std::span<const EncodedSession> sessions);
std::vector<std::string> player_streams(std::span<const EncodedSession> sessions);

/// Threshold sweep grid: ascending, spans [100, 30000], always contains
/// 300, 8000, 16000 and 22000. `extra` values (for instance quantiles of a
/// quartile's positive deltas) are rounded to 100 points and merged in.
std::vector<std::int64_t> theta_grid(std::span<const double> extra = {});

nlohmann::json to_json(const AlphabetSpec& spec);
AlphabetSpec alphabet_spec_from_json(const nlohmann::json& j);

/// Line-per-player corpus text: `player_id<TAB>symbols`. The sidecar JSON
/// carries the alphabet spec.
struct CorpusFile {
    AlphabetSpec spec;
    std::vector<std::pair<std::string, std::string>> streams;
};

CorpusFile to_corpus_file(const Corpus& corpus);
void write_corpus_text(std::ostream& out, const CorpusFile& corpus);
CorpusFile read_corpus_text(std::istream& in, const AlphabetSpec& spec);

}  // namespace playmech
