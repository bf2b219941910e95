#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <sys/wait.h>

#include "playmech/common.hpp"
#include "playmech/cli.hpp"
#include "playmech/cssr.hpp"
#include "playmech/ingest.hpp"

using namespace playmech;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("playmech-" + tag + "-" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int run(const std::string& name, const RunConfig& cfg, std::string* log = nullptr) {
    std::ostringstream out;
    const int code = run_subcommand(name, cfg, out);
    if (log) *log = out.str();
    return code;
}

#ifdef PLAYMECH_CLI
int shell(const std::string& args) {
    const int status = std::system((std::string(PLAYMECH_CLI) + " " + args + " 2>/dev/null").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("sessions on a toy file") {
    TempDir tmp("toy");
    {
        std::ofstream f(tmp.path / "toy.csv");
        f << "player,time,score\na,0,10\na,1,20\na,4,30\n";
    }
    RunConfig cfg;
    cfg.dataset = (tmp.path / "toy.csv").string();
    cfg.outdir = (tmp.path / "out").string();
    REQUIRE(run("ingest", cfg) == kExitOk);
    REQUIRE(run("sessions", cfg) == kExitOk);
    std::ifstream in(tmp.path / "out/sessions/sessions.csv");
    const auto sessions = read_sessions_csv(in);
    REQUIRE(sessions.size() == 2);
    CHECK(sessions[0].games.size() == 2);
    CHECK(sessions[1].games.size() == 1);
    CHECK(fs::exists(tmp.path / "out/sessions/manifest.json"));
    CHECK(fs::exists(tmp.path / "out/sessions/hist_inter_session_gap_h.csv"));
}

TEST_CASE("full pipeline on synthetic data is reproducible") {
    TempDir tmp("pipe");
    RunConfig cfg;
    cfg.outdir = (tmp.path / "out").string();
    cfg.synth_players = 1500;
    cfg.bootstrap_n = 100;
    cfg.thetas = "2000,8000";
    cfg.lengths = "1";
    cfg.quartiles = "0";
    REQUIRE(run("synth", cfg) == kExitOk);
    cfg.dataset = (tmp.path / "out/synth/dataset.csv").string();
    for (const char* name : {"ingest", "sessions", "metrics", "encode", "fit", "evaluate", "sweep", "export-dot"}) {
        std::string log;
        INFO(name);
        REQUIRE(run(name, cfg, &log) == kExitOk);
    }
    for (const char* file : {"metrics/correlations.csv", "metrics/learning_curves.csv", "metrics/quit_curve.csv",
                             "metrics/persistence.csv", "metrics/spacing.csv", "encode/corpus.txt",
                             "fit/machine.json", "fit/machine.dot", "evaluate/auc.json", "evaluate/roc_P.csv",
                             "sweep/sweep.csv", "export-dot/machine.dot"}) {
        CHECK(fs::exists(tmp.path / "out" / file));
    }
    const auto sweep = nlohmann::json::parse(slurp(tmp.path / "out/sweep/sweep.json"));
    CHECK(sweep["summary"][0]["best_scheme"] == "delta_prev");

    // Same config and inputs: byte-identical outputs apart from the manifest timestamp.
    const auto before = slurp(tmp.path / "out/evaluate/auc.json");
    const auto machine_before = slurp(tmp.path / "out/fit/machine.json");
    const auto manifest_before = nlohmann::json::parse(slurp(tmp.path / "out/fit/manifest.json"));
    cfg.force = true;
    REQUIRE(run("fit", cfg) == kExitOk);
    REQUIRE(run("evaluate", cfg) == kExitOk);
    CHECK(slurp(tmp.path / "out/evaluate/auc.json") == before);
    CHECK(slurp(tmp.path / "out/fit/machine.json") == machine_before);
    auto manifest_after = nlohmann::json::parse(slurp(tmp.path / "out/fit/manifest.json"));
    manifest_after.erase("timestamp");
    auto mb = manifest_before;
    mb.erase("timestamp");
    CHECK(manifest_after == mb);
    CHECK(mb["config_hash"].get<std::string>().size() == 16);
    CHECK(mb["inputs"].size() == 1);
}

TEST_CASE("outputs are never overwritten without force") {
    TempDir tmp("force");
    RunConfig cfg;
    cfg.outdir = (tmp.path / "out").string();
    cfg.synth_players = 10;
    REQUIRE(run("synth", cfg) == kExitOk);
    std::string log;
    CHECK(run("synth", cfg, &log) == kExitConfig);
    CHECK(log.find("--force") != std::string::npos);
    CHECK(fs::exists(tmp.path / "out/synth/dataset.csv"));
    cfg.force = true;
    CHECK(run("synth", cfg) == kExitOk);
}

TEST_CASE("missing upstream artifacts name the prerequisite") {
    TempDir tmp("missing");
    RunConfig cfg;
    cfg.outdir = (tmp.path / "out").string();
    std::string log;
    CHECK(run("fit", cfg, &log) == kExitData);
    CHECK(log.find("playmech encode") != std::string::npos);
    CHECK(run("export-dot", cfg, &log) == kExitData);
    CHECK(log.find("playmech fit") != std::string::npos);
    CHECK(run("sessions", cfg, &log) == kExitData);
    CHECK(log.find("playmech ingest") != std::string::npos);
    CHECK_FALSE(fs::exists(tmp.path / "out/fit"));
}

TEST_CASE("invalid config fails with a field-level message") {
    RunConfig cfg;
    std::string log;
    cfg.threshold_h = 0;
    CHECK(run("synth", cfg, &log) == kExitConfig);
    CHECK(log.find("threshold_h") != std::string::npos);
    cfg = {};
    cfg.alpha = 2;
    CHECK(run("synth", cfg, &log) == kExitConfig);
    CHECK(log.find("alpha") != std::string::npos);
    cfg = {};
    CHECK(run("ingest", cfg, &log) == kExitConfig);
    CHECK(log.find("dataset") != std::string::npos);
    cfg = {};
    cfg.lengths = "1,x";
    CHECK(run("sweep", cfg, &log) == kExitConfig);
    CHECK(log.find("lengths") != std::string::npos);
    cfg = {};
    CHECK(run("frobnicate", cfg, &log) == kExitConfig);
}

TEST_CASE("malformed upstream data is a data error") {
    TempDir tmp("corrupt");
    fs::create_directories(tmp.path / "out/fit");
    {
        std::ofstream f(tmp.path / "out/fit/machine.json");
        f << "{not json";
    }
    RunConfig cfg;
    cfg.outdir = (tmp.path / "out").string();
    CHECK(run("export-dot", cfg) == kExitData);
}

#ifdef PLAYMECH_CLI
TEST_CASE("executable: exit codes, config file and flag precedence") {
    TempDir tmp("exe");
    const auto out = (tmp.path / "out").string();
    CHECK(shell("--help >/dev/null") == 0);
    CHECK(shell("synth --outdir " + out + " --threshold_h 0") == kExitConfig);
    CHECK(shell("synth --outdir " + out + " --bogus 1") == kExitConfig);
    CHECK(shell("fit --outdir " + out) == kExitData);
    {
        std::ofstream f(tmp.path / "run.cfg");
        f << "# synthetic run\nsynth_players = 5\nsynth_seed = 3\n";
    }
    REQUIRE(shell("synth --config " + (tmp.path / "run.cfg").string() + " --outdir " + out) == kExitOk);
    auto spec = nlohmann::json::parse(slurp(tmp.path / "out/synth/spec.json"));
    CHECK(spec["players"] == 5);
    CHECK(spec["seed"] == 3);
    REQUIRE(shell("synth --config " + (tmp.path / "run.cfg").string() + " --outdir " + out +
                  " --synth_players 7 --force") == kExitOk);
    spec = nlohmann::json::parse(slurp(tmp.path / "out/synth/spec.json"));
    CHECK(spec["players"] == 7);
    CHECK(spec["seed"] == 3);
}
#endif

}
