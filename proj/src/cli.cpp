#include "playmech/cli.hpp"

#include <boost/version.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iterator>
#include <ostream>
#include <set>
#include <sstream>

#include "playmech/common.hpp"
#include "playmech/cssr.hpp"
#include "playmech/evaluate.hpp"
#include "playmech/reports.hpp"
#include "playmech/synth.hpp"

namespace playmech {
namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

template <class T>
std::vector<T> parse_list(const std::string& field, const std::string& text) {
    std::vector<T> out;
    for (const auto& item : split_list(text)) {
        try {
            std::size_t used = 0;
            const long long v = std::stoll(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(static_cast<T>(v));
        } catch (const std::exception&) {
            throw ConfigError(field + ": '" + item + "' is not an integer");
        }
    }
    return out;
}

std::vector<Scheme> parse_schemes(const std::string& text) {
    std::vector<Scheme> out;
    for (const auto& item : split_list(text)) {
        try {
            out.push_back(scheme_from_string(item));
        } catch (const std::exception&) {
            throw ConfigError("schemes: unknown scheme '" + item + "'");
        }
    }
    return out;
}

std::string file_hash(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return hex64(fnv1a64(bytes));
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

// One subcommand invocation: owns the output directory and the manifest.
class Stage {
public:
    Stage(std::string name, const RunConfig& config, std::ostream& log)
        : name_(std::move(name)), config_(config), log_(log), dir_(fs::path(config.outdir) / name_) {
        if (fs::exists(dir_) && !fs::is_empty(dir_)) {
            if (!config.force) {
                throw ConfigError("outdir: " + dir_.string() +
                                  " already holds results; pass --force to overwrite");
            }
            fs::remove_all(dir_);
        }
        fs::create_directories(dir_);
    }

    // A failed run leaves no partial results behind.
    ~Stage() {
        if (!finished_) {
            std::error_code ec;
            fs::remove_all(dir_, ec);
        }
    }

    Stage(const Stage&) = delete;
    Stage& operator=(const Stage&) = delete;

    /// Path of an upstream artifact; a missing file names the subcommand
    /// that produces it.
    fs::path input(const std::string& stage, const std::string& file) {
        const fs::path p = fs::path(config_.outdir) / stage / file;
        if (!fs::exists(p)) {
            throw DataError("missing " + p.string() + "; run `playmech " + stage + "` first");
        }
        track_input(p);
        return p;
    }

    void track_input(const fs::path& p) { inputs_.push_back(p); }

    void write(const std::string& file, const std::function<void(std::ostream&)>& body) {
        const fs::path p = dir_ / file;
        std::ofstream out(p, std::ios::binary);
        if (!out) throw DataError("cannot write " + p.string());
        body(out);
        out.close();
        if (!out) throw DataError("failed writing " + p.string());
        outputs_.push_back(p);
    }

    void write_json(const std::string& file, const nlohmann::json& j) {
        write(file, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
    }

    void note(const std::string& message) { log_ << name_ << ": " << message << '\n'; }

    void finish() {
        nlohmann::json cfg = to_json(config_);
        cfg.erase("force");
        cfg.erase("threads");
        const auto files = [](const std::vector<fs::path>& paths) {
            auto arr = nlohmann::json::array();
            for (const auto& p : paths) {
                arr.push_back({{"path", p.generic_string()},
                               {"bytes", fs::file_size(p)},
                               {"fnv1a64", file_hash(p)}});
            }
            return arr;
        };
        nlohmann::json manifest{
            {"subcommand", name_},
            {"config", cfg},
            {"config_hash", hex64(fnv1a64(cfg.dump()))},
            {"inputs", files(inputs_)},
            {"outputs", files(outputs_)},
            {"versions",
             {{"playmech", PLAYMECH_VERSION},
              {"boost", BOOST_LIB_VERSION},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                    std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"compiler", __VERSION__}}},
            {"timestamp", utc_timestamp()},
        };
        std::ofstream out(dir_ / "manifest.json", std::ios::binary);
        out << manifest.dump(2) << '\n';
        finished_ = true;
        note("wrote " + std::to_string(outputs_.size()) + " files to " + dir_.string());
    }

    const RunConfig& config() const { return config_; }

private:
    std::string name_;
    const RunConfig& config_;
    std::ostream& log_;
    fs::path dir_;
    std::vector<fs::path> inputs_;
    std::vector<fs::path> outputs_;
    bool finished_ = false;
};

std::vector<Session> load_sessions(Stage& stage) {
    std::ifstream in(stage.input("sessions", "sessions.csv"));
    return read_sessions_csv(in);
}

std::vector<EncodedSession> load_encoded(Stage& stage) {
    std::ifstream in(stage.input("encode", "encoded_sessions.csv"));
    return read_encoded_sessions_csv(in);
}

QuartileSplit split_for(std::span<const Session> sessions, const RunConfig& cfg, Basis basis) {
    auto profiles = skill_profiles(sessions);
    if (cfg.quartile_population == "analyzed") {
        std::set<std::string> analyzed;
        for (const auto& s : sessions) {
            if (s.games.size() >= 4 && s.games.size() <= 15) analyzed.insert(s.player_id);
        }
        std::erase_if(profiles, [&](const SkillProfile& p) { return !analyzed.count(p.player_id); });
    }
    return quartile_split(profiles, basis);
}

Basis configured_basis(const RunConfig& cfg) {
    return cfg.basis == "success" ? Basis::Success : Basis::Talent;
}

std::vector<Session> restrict_to_quartile(std::span<const Session> sessions, const QuartileSplit& split,
                                          int quartile) {
    std::vector<Session> out;
    for (const auto& s : sessions) {
        if (split.quartile_of(s.player_id) == quartile) out.push_back(s);
    }
    return out;
}

std::vector<Session> select_quartile(std::span<const Session> sessions, const RunConfig& cfg,
                                     int quartile) {
    if (quartile == 0) return {sessions.begin(), sessions.end()};
    return restrict_to_quartile(sessions, split_for(sessions, cfg, configured_basis(cfg)), quartile);
}

bool fourth_game_for(const RunConfig& cfg, std::size_t n_lengths) {
    if (cfg.fourth_game == "on") return true;
    if (cfg.fourth_game == "off") return false;
    return n_lengths > 1;
}

EvaluationOptions evaluation_options(const RunConfig& cfg) {
    EvaluationOptions o;
    o.cssr = cfg.cssr_config();
    o.train_fraction = cfg.split_fraction;
    o.bootstrap = {cfg.bootstrap_n, cfg.bootstrap_seed};
    o.from_fourth_game = fourth_game_for(cfg, 1);
    return o;
}

void run_ingest(Stage& stage) {
    const auto& cfg = stage.config();
    ColumnMap columns{cfg.col_player, cfg.col_time, cfg.col_score};
    const char delim = cfg.delimiter == "comma" ? ',' : cfg.delimiter == "tab" ? '\t' : 0;
    stage.track_input(cfg.dataset);
    const auto report = parse_dataset_file(cfg.dataset, columns, delim);
    stage.write("records.csv", [&](std::ostream& out) { write_records_csv(out, report.records); });
    stage.write_json("parse_report.json", to_json(report));
    stage.note(std::to_string(report.records.size()) + " records, " +
               std::to_string(report.rows_skipped) + " rows skipped");
}

void run_sessions(Stage& stage) {
    const auto& cfg = stage.config();
    std::ifstream in(stage.input("ingest", "records.csv"));
    const auto records = read_records_csv(in);
    const auto histories = build_histories(records);
    const auto sessions = segment_all(histories, cfg.segment_options());
    const auto summary = summarize(sessions);
    auto j = to_json(summary);
    j["threshold_h"] = cfg.threshold_h;
    j["split_rule"] = cfg.split_rule;
    j["contested_gaps"] = count_contested_gaps(histories, cfg.threshold_h);
    stage.write("sessions.csv", [&](std::ostream& out) { write_sessions_csv(out, sessions); });
    stage.write_json("summary.json", j);
    const std::pair<const char*, const Histogram*> hists[] = {
        {"sessions_per_player", &summary.sessions_per_player},
        {"games_per_session", &summary.games_per_session},
        {"games_per_player", &summary.games_per_player},
        {"session_duration_h", &summary.session_duration_h},
        {"inter_session_gap_h", &summary.inter_session_gap_h},
    };
    for (const auto& [name, h] : hists) {
        stage.write(std::string("hist_") + name + ".csv",
                    [&](std::ostream& out) { write_histogram_csv(out, *h, name); });
    }
    stage.note(std::to_string(summary.n_sessions) + " sessions from " +
               std::to_string(summary.n_players) + " players");
}

void run_metrics(Stage& stage) {
    const auto& cfg = stage.config();
    const auto sessions = load_sessions(stage);
    const auto profiles = skill_profiles(sessions);
    const auto by_talent = split_for(sessions, cfg, Basis::Talent);
    const auto by_success = quartile_split(profiles, Basis::Success);
    const auto correlations = skill_correlations(profiles, by_talent);
    const auto curves = learning_curves(sessions, by_talent);
    const auto shuffled = shuffle_control(sessions, cfg.shuffle_seed);
    const auto shuffled_curves = learning_curves(shuffled, by_talent);
    const auto slopes = index_slope_tests(sessions, by_talent);
    const auto shuffled_slopes = index_slope_tests(shuffled, by_talent);
    QuitCurveOptions quit_options;
    quit_options.bin_width = cfg.quit_bin_width;
    const auto quit = quit_probability_curve(sessions, by_talent, quit_options);
    const auto persist = persistence(sessions, by_talent, by_success);
    const auto spacing = spacing_improvement(sessions, default_break_edges());

    std::size_t last_game_cells = 0, last_game_higher = 0;
    for (int q = 1; q <= 4; ++q) {
        for (int len = 4; len <= 15; ++len) {
            const auto* last = curves.find(q, len, len);
            const auto* prev = curves.find(q, len, len - 1);
            if (!last || !prev) continue;
            ++last_game_cells;
            if (last->mean > prev->mean) ++last_game_higher;
        }
    }
    std::size_t shuffled_significant = 0;
    for (const auto& s : shuffled_slopes) shuffled_significant += s.significant ? 1 : 0;

    stage.write("profiles.csv", [&](std::ostream& out) { write_profiles_csv(out, profiles, by_talent, by_success); });
    stage.write("correlations.csv", [&](std::ostream& out) { write_correlations_csv(out, correlations); });
    stage.write("learning_curves.csv", [&](std::ostream& out) { write_curves_csv(out, curves); });
    stage.write("learning_curves_shuffled.csv", [&](std::ostream& out) { write_curves_csv(out, shuffled_curves); });
    stage.write("slopes.csv", [&](std::ostream& out) { write_slopes_csv(out, slopes); });
    stage.write("slopes_shuffled.csv", [&](std::ostream& out) { write_slopes_csv(out, shuffled_slopes); });
    stage.write("quit_curve.csv", [&](std::ostream& out) { write_quit_curve_csv(out, quit); });
    stage.write("persistence.csv", [&](std::ostream& out) { write_persistence_csv(out, persist); });
    stage.write("spacing.csv", [&](std::ostream& out) { write_spacing_csv(out, spacing); });
    stage.write_json("metrics.json",
                     {{"quartiles", {{"talent", to_json(by_talent)}, {"success", to_json(by_success)}}},
                      {"correlations", to_json(correlations)},
                      {"last_game_effect", {{"cells", last_game_cells}, {"last_higher", last_game_higher}}},
                      {"shuffle_control",
                       {{"cells", shuffled_slopes.size()}, {"significant", shuffled_significant},
                        {"seed", cfg.shuffle_seed}}}});
    stage.note("success-talent r = " + format_number(correlations.overall.r));
}

void run_encode(Stage& stage) {
    const auto& cfg = stage.config();
    const auto all = load_sessions(stage);
    const auto sessions = select_quartile(all, cfg, cfg.quartile);
    const auto corpus = encode_corpus(sessions, cfg.alphabet_spec());
    const auto encoded = corpus.sessions();
    auto meta = to_json(corpus.spec);
    meta["quartile"] = cfg.quartile;
    meta["basis"] = cfg.basis;
    meta["n_players"] = corpus.players.size();
    meta["n_sessions"] = encoded.size();
    stage.write("encoded_sessions.csv", [&](std::ostream& out) { write_encoded_sessions_csv(out, encoded); });
    stage.write("corpus.txt", [&](std::ostream& out) { write_corpus_text(out, to_corpus_file(corpus)); });
    stage.write_json("corpus.json", meta);
    stage.write("frequencies.csv", [&](std::ostream& out) { write_frequencies_csv(out, corpus.symbol_frequencies()); });
    stage.note(std::to_string(encoded.size()) + " sessions encoded");
}

void run_fit(Stage& stage) {
    const auto& cfg = stage.config();
    const auto encoded = load_encoded(stage);
    const auto streams = player_streams(encoded);
    const auto stats = collect_suffix_stats(streams, kPlayAlphabet, cfg.L);
    const auto machine = fit(stats, cfg.cssr_config());
    stage.write_json("machine.json", to_json(machine));
    stage.write("machine.dot", [&](std::ostream& out) {
        out << export_dot(machine, {cfg.min_edge_prob, cfg.include_transient});
    });
    stage.write("states.csv", [&](std::ostream& out) { write_states_csv(out, machine); });
    stage.note(std::to_string(machine.recurrent_count()) + " recurrent states (" +
               std::to_string(machine.states.size()) + " total)");
}

void run_evaluate(Stage& stage) {
    const auto& cfg = stage.config();
    const auto encoded = load_encoded(stage);
    const auto result = evaluate_encoded(encoded, evaluation_options(cfg));
    auto j = to_json(result.report);
    j["n_train_sessions"] = result.n_train_sessions;
    j["n_test_sessions"] = result.n_test_sessions;
    j["states"] = result.machine.states.size();
    j["recurrent_states"] = result.machine.recurrent_count();
    stage.write_json("auc.json", j);
    stage.write("auc.csv", [&](std::ostream& out) { write_auc_csv(out, result.report); });
    for (const auto& s : result.report.symbols) {
        if (!s.auc) continue;
        const auto curve = roc_curve(result.predictions, s.symbol, kPlayAlphabet);
        stage.write(std::string("roc_") + s.symbol + ".csv", [&](std::ostream& out) { write_roc_csv(out, curve); });
    }
    stage.write_json("machine.json", to_json(result.machine));
    for (const auto& w : result.report.warnings) stage.note("warning: " + w);
    stage.note("weighted AUC = " + format_number(result.report.weighted));
}

void run_sweep(Stage& stage) {
    const auto& cfg = stage.config();
    const auto sessions = load_sessions(stage);
    SweepOptions options;
    options.schemes = parse_schemes(cfg.schemes);
    if (!cfg.thetas.empty()) options.thetas = parse_list<std::int64_t>("thetas", cfg.thetas);
    options.lengths = parse_list<int>("lengths", cfg.lengths);
    options.scope = cfg.alphabet_spec().scope;
    options.evaluation = evaluation_options(cfg);
    options.evaluation.from_fourth_game = fourth_game_for(cfg, options.lengths.size());
    options.threads = cfg.threads;

    const auto quartiles = parse_list<int>("quartiles", cfg.quartiles);
    const bool need_split = std::any_of(quartiles.begin(), quartiles.end(), [](int q) { return q > 0; });
    const auto split = need_split ? split_for(sessions, cfg, configured_basis(cfg)) : QuartileSplit{};

    SweepReport all;
    nlohmann::json summary = nlohmann::json::array();
    for (int q : quartiles) {
        options.quartile = q;
        const auto subset = q == 0 ? sessions : restrict_to_quartile(sessions, split, q);
        const auto report = model_selection(subset, options);
        for (int L : options.lengths) {
            nlohmann::json row{{"quartile", q}, {"L", L}};
            const auto winner = report.best_scheme(L);
            row["best_scheme"] = winner ? nlohmann::json(to_string(*winner)) : nlohmann::json(nullptr);
            for (auto scheme : options.schemes) {
                const auto* best = report.best(scheme, L);
                row["best_theta"][to_string(scheme)] = best ? nlohmann::json(best->theta) : nlohmann::json(nullptr);
                row["best_auc"][to_string(scheme)] = best ? nlohmann::json(best->weighted_auc) : nlohmann::json(nullptr);
            }
            summary.push_back(row);
        }
        all.cells.insert(all.cells.end(), report.cells.begin(), report.cells.end());
    }
    auto j = to_json(all);
    j["summary"] = summary;
    j["from_fourth_game"] = options.evaluation.from_fourth_game;
    stage.write("sweep.csv", [&](std::ostream& out) { write_sweep_csv(out, all); });
    stage.write_json("sweep.json", j);
    stage.note(std::to_string(all.cells.size()) + " cells");
}

void run_synth(Stage& stage) {
    const auto& cfg = stage.config();
    SessionGeneratorSpec spec;
    if (!cfg.synth_spec.empty()) {
        stage.track_input(cfg.synth_spec);
        std::ifstream in(cfg.synth_spec);
        spec = session_spec_from_json(nlohmann::json::parse(in));
    } else {
        spec.players = cfg.synth_players;
        spec.threshold_h = cfg.threshold_h;
    }
    const auto records = generate_sessions(spec, cfg.synth_seed);
    const auto machine = session_machine(spec);
    stage.write("dataset.csv", [&](std::ostream& out) {
        out << cfg.col_player << ',' << cfg.col_time << ',' << cfg.col_score << '\n';
        for (const auto& r : records) out << r.player_id << ',' << r.time_h << ',' << r.score << '\n';
    });
    auto spec_json = to_json(spec);
    spec_json["seed"] = cfg.synth_seed;
    stage.write_json("spec.json", spec_json);
    stage.write_json("machine.json", to_json(machine));
    stage.write("machine.dot", [&](std::ostream& out) {
        out << export_dot(machine, {cfg.min_edge_prob, cfg.include_transient});
    });
    stage.note(std::to_string(records.size()) + " games for " + std::to_string(spec.players) + " players");
}

void run_export_dot(Stage& stage) {
    const auto& cfg = stage.config();
    std::ifstream in(stage.input("fit", "machine.json"));
    const auto machine = machine_from_json(nlohmann::json::parse(in));
    stage.write("machine.dot", [&](std::ostream& out) {
        out << export_dot(machine, {cfg.min_edge_prob, cfg.include_transient});
    });
}

template <class T>
void require(bool ok, const std::string& field, const T& value, const std::string& rule) {
    if (!ok) {
        std::ostringstream msg;
        msg << field << " = " << value << ": " << rule;
        throw ConfigError(msg.str());
    }
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
    static const std::vector<std::string> names{"ingest", "sessions", "metrics",  "encode",    "fit",
                                                "evaluate", "sweep",  "synth",    "export-dot"};
    return names;
}

void RunConfig::validate(const std::string& subcommand) const {
    const auto& names = subcommand_names();
    require(std::find(names.begin(), names.end(), subcommand) != names.end(), "subcommand", subcommand,
            "unknown subcommand");
    if (subcommand == "ingest") {
        require(!dataset.empty(), "dataset", "\"\"", "required by ingest");
        require(fs::is_regular_file(dataset), "dataset", dataset, "file does not exist");
    }
    require(!col_player.empty() && !col_time.empty() && !col_score.empty(), "col_player/col_time/col_score",
            "\"\"", "column names must be non-empty");
    require(delimiter == "auto" || delimiter == "comma" || delimiter == "tab", "delimiter", delimiter,
            "expected auto, comma or tab");
    require(threshold_h >= 1, "threshold_h", threshold_h, "must be >= 1");
    require(split_rule == "at_least" || split_rule == "greater", "split_rule", split_rule,
            "expected at_least or greater");
    require(basis == "talent" || basis == "success", "basis", basis, "expected talent or success");
    require(quartile_population == "all" || quartile_population == "analyzed", "quartile_population",
            quartile_population, "expected all or analyzed");
    require(quit_bin_width >= 1, "quit_bin_width", quit_bin_width, "must be >= 1");
    require(quartile >= 0 && quartile <= 4, "quartile", quartile, "expected 0..4");
    try {
        alphabet_spec().validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("scheme/theta/reference_scope: ") + e.what());
    }
    try {
        cssr_config().validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("L/alpha/test/min_count: ") + e.what());
    }
    require(split_fraction > 0 && split_fraction < 1, "split_fraction", split_fraction, "must be in (0, 1)");
    require(fourth_game == "auto" || fourth_game == "on" || fourth_game == "off", "fourth_game", fourth_game,
            "expected auto, on or off");
    require(!parse_schemes(schemes).empty(), "schemes", schemes, "must list at least one scheme");
    for (auto t : parse_list<std::int64_t>("thetas", thetas)) require(t > 0, "thetas", t, "must be > 0");
    const auto ls = parse_list<int>("lengths", lengths);
    require(!ls.empty(), "lengths", lengths, "must list at least one L");
    for (int l : ls) require(l >= 1, "lengths", l, "must be >= 1");
    const auto qs = parse_list<int>("quartiles", quartiles);
    require(!qs.empty(), "quartiles", quartiles, "must list at least one quartile");
    for (int q : qs) require(q >= 0 && q <= 4, "quartiles", q, "expected 0..4");
    require(min_edge_prob >= 0 && min_edge_prob <= 1, "min_edge_prob", min_edge_prob, "must be in [0, 1]");
    if (!synth_spec.empty()) require(fs::is_regular_file(synth_spec), "synth_spec", synth_spec, "file does not exist");
    require(synth_players >= 1, "synth_players", synth_players, "must be >= 1");
    require(!outdir.empty(), "outdir", "\"\"", "must be non-empty");
    require(threads >= 1, "threads", threads, "must be >= 1");
}

SegmentOptions RunConfig::segment_options() const {
    return {threshold_h, split_rule == "greater" ? SplitRule::Greater : SplitRule::AtLeast};
}

AlphabetSpec RunConfig::alphabet_spec() const {
    try {
        return {scheme_from_string(scheme), theta, scope_from_string(reference_scope)};
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("scheme/reference_scope: ") + e.what());
    }
}

CssrConfig RunConfig::cssr_config() const {
    CssrConfig c;
    c.max_length = L;
    c.alpha = alpha;
    try {
        c.test = test_kind_from_string(test);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("test: ") + e.what());
    }
    c.min_count = min_count;
    return c;
}

nlohmann::json to_json(const RunConfig& c) {
    return {
        {"dataset", c.dataset},
        {"col_player", c.col_player},
        {"col_time", c.col_time},
        {"col_score", c.col_score},
        {"delimiter", c.delimiter},
        {"threshold_h", c.threshold_h},
        {"split_rule", c.split_rule},
        {"basis", c.basis},
        {"quartile_population", c.quartile_population},
        {"shuffle_seed", c.shuffle_seed},
        {"quit_bin_width", c.quit_bin_width},
        {"scheme", c.scheme},
        {"theta", c.theta},
        {"reference_scope", c.reference_scope},
        {"quartile", c.quartile},
        {"L", c.L},
        {"alpha", c.alpha},
        {"test", c.test},
        {"min_count", c.min_count},
        {"split_fraction", c.split_fraction},
        {"bootstrap_n", c.bootstrap_n},
        {"bootstrap_seed", c.bootstrap_seed},
        {"fourth_game", c.fourth_game},
        {"schemes", c.schemes},
        {"thetas", c.thetas},
        {"lengths", c.lengths},
        {"quartiles", c.quartiles},
        {"min_edge_prob", c.min_edge_prob},
        {"include_transient", c.include_transient},
        {"synth_spec", c.synth_spec},
        {"synth_seed", c.synth_seed},
        {"synth_players", c.synth_players},
        {"outdir", c.outdir},
        {"force", c.force},
        {"threads", c.threads},
    };
}

int run_subcommand(const std::string& name, const RunConfig& config, std::ostream& log) {
    try {
        config.validate(name);
        Stage stage(name, config, log);
        if (name == "ingest") run_ingest(stage);
        else if (name == "sessions") run_sessions(stage);
        else if (name == "metrics") run_metrics(stage);
        else if (name == "encode") run_encode(stage);
        else if (name == "fit") run_fit(stage);
        else if (name == "evaluate") run_evaluate(stage);
        else if (name == "sweep") run_sweep(stage);
        else if (name == "synth") run_synth(stage);
        else run_export_dot(stage);
        stage.finish();
        return kExitOk;
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DataError& e) {
        log << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const nlohmann::json::exception& e) {
        log << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const fs::filesystem_error& e) {
        log << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        log << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace playmech
