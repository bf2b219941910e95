#pragma once

// Tidy CSV and JSON renderings of every analysis result. One CSV row per
// cell; numbers are printed with a fixed format so reruns are byte-identical.

#include <iosfwd>
#include <map>
#include <span>
#include <string>

#include <json.hpp>

#include "playmech/cssr.hpp"
#include "playmech/encode.hpp"
#include "playmech/evaluate.hpp"
#include "playmech/ingest.hpp"
#include "playmech/metrics.hpp"

namespace playmech {

/// Shortest round-trip decimal for finite values; "nan"/"inf" otherwise.
std::string format_number(double v);

void write_histogram_csv(std::ostream& out, const Histogram& h, const std::string& key_name);
nlohmann::json to_json(const DatasetSummary& s);
nlohmann::json to_json(const ParseReport& r);

void write_profiles_csv(std::ostream& out, std::span<const SkillProfile> profiles,
                        const QuartileSplit& by_talent, const QuartileSplit& by_success);
nlohmann::json to_json(const QuartileSplit& split);

void write_correlations_csv(std::ostream& out, const SkillCorrelations& c);
nlohmann::json to_json(const SkillCorrelations& c);

void write_curves_csv(std::ostream& out, const LearningCurveSet& curves);
void write_slopes_csv(std::ostream& out, std::span<const SlopeTest> slopes);
void write_quit_curve_csv(std::ostream& out, const QuitCurve& curve);
void write_persistence_csv(std::ostream& out, const PersistenceResult& result);
void write_spacing_csv(std::ostream& out, const SpacingCurve& curve);

void write_frequencies_csv(std::ostream& out, const std::map<char, std::uint64_t>& freq);
/// `player,session_index,start_h,symbols,deltas` with deltas joined by ';'.
void write_encoded_sessions_csv(std::ostream& out, std::span<const EncodedSession> sessions);
std::vector<EncodedSession> read_encoded_sessions_csv(std::istream& in);

void write_states_csv(std::ostream& out, const EpsilonMachine& machine);
void write_auc_csv(std::ostream& out, const AucReport& report);
void write_roc_csv(std::ostream& out, const RocCurve& curve);
void write_sweep_csv(std::ostream& out, const SweepReport& report);
nlohmann::json to_json(const SweepReport& report);

}  // namespace playmech
