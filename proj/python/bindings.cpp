#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "playmech/cli.hpp"
#include "playmech/cssr.hpp"
#include "playmech/encode.hpp"
#include "playmech/evaluate.hpp"
#include "playmech/ingest.hpp"
#include "playmech/synth.hpp"

namespace py = pybind11;
using namespace playmech;

namespace {

using RecordTuple = std::tuple<std::string, std::int64_t, std::int64_t>;

std::vector<GameRecord> to_records(const std::vector<RecordTuple>& rows) {
    std::vector<GameRecord> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& [player, time_h, score] = rows[i];
        out.push_back({player, time_h, score, i});
    }
    return out;
}

py::dict session_dict(const Session& s) {
    py::list times, scores;
    for (const auto& g : s.games) {
        times.append(g.time_h);
        scores.append(g.score);
    }
    py::dict d;
    d["player"] = s.player_id;
    d["session_index"] = s.session_index;
    d["start_h"] = s.start_h;
    d["end_h"] = s.end_h;
    d["times"] = times;
    d["scores"] = scores;
    return d;
}

SplitRule rule_from(const std::string& s) {
    if (s == "at_least") return SplitRule::AtLeast;
    if (s == "greater") return SplitRule::Greater;
    throw ConfigError("split_rule must be at_least or greater");
}

}  // namespace

PYBIND11_MODULE(_playmech, m) {
    m.doc() = "Session segmentation, symbolic encoding and CSSR reconstruction";
    m.attr("__version__") = PLAYMECH_VERSION;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

    m.def(
        "segment",
        [](const std::vector<RecordTuple>& rows, std::int64_t threshold_h, const std::string& split_rule) {
            const auto records = to_records(rows);
            py::list out;
            for (const auto& s : segment_all(build_histories(records), {threshold_h, rule_from(split_rule)})) {
                out.append(session_dict(s));
            }
            return out;
        },
        py::arg("records"), py::arg("threshold_h") = 2, py::arg("split_rule") = "at_least",
        "Split (player, time_h, score) rows into sessions.");

    m.def(
        "encode",
        [](const std::vector<std::int64_t>& scores, const std::string& scheme, std::int64_t theta) {
            Session s;
            for (std::size_t i = 0; i < scores.size(); ++i) {
                s.games.push_back({"", static_cast<std::int64_t>(i), scores[i], i});
            }
            const AlphabetSpec spec{scheme_from_string(scheme), theta, ReferenceScope::Session};
            spec.validate();
            const auto e = encode_session(s, spec);
            return py::make_tuple(e.symbols, e.deltas);
        },
        py::arg("scores"), py::arg("scheme") = "delta_prev", py::arg("theta") = 8000,
        "Encode one session's scores as PGVQ symbols; returns (symbols, deltas).");

    m.def(
        "generate",
        [](const std::string& process, std::size_t length, std::uint64_t seed, double p, const std::string& pattern) {
            GeneratorSpec g;
            g.kind = process_kind_from_string(process);
            g.p = p;
            g.pattern = pattern;
            return generate(g, length, seed);
        },
        py::arg("process"), py::arg("length"), py::arg("seed") = 1, py::arg("p") = 0.5, py::arg("pattern") = "01");

    py::class_<EpsilonMachine>(m, "Machine")
        .def_readonly("alphabet", &EpsilonMachine::alphabet)
        .def_property_readonly("n_states", [](const EpsilonMachine& em) { return em.states.size(); })
        .def_property_readonly("recurrent_count", &EpsilonMachine::recurrent_count)
        .def("emission", [](const EpsilonMachine& em, std::size_t i) { return em.states.at(i).emission; })
        .def("transitions", [](const EpsilonMachine& em, std::size_t i) { return em.states.at(i).transitions; })
        .def("synchronize", &EpsilonMachine::synchronize)
        .def("to_json", [](const EpsilonMachine& em) { return to_json(em).dump(); })
        .def("to_dot", [](const EpsilonMachine& em, double min_edge_prob, bool include_transient) {
            return export_dot(em, {min_edge_prob, include_transient});
        }, py::arg("min_edge_prob") = 0.1, py::arg("include_transient") = false)
        .def_static("from_json", [](const std::string& text) { return machine_from_json(nlohmann::json::parse(text)); });

    m.def(
        "fit",
        [](const std::vector<std::string>& streams, const std::string& alphabet, int L, double alpha,
           const std::string& test, std::uint64_t min_count) {
            CssrConfig c;
            c.max_length = L;
            c.alpha = alpha;
            c.test = test_kind_from_string(test);
            c.min_count = min_count;
            c.validate();
            py::gil_scoped_release release;
            return fit(collect_suffix_stats(streams, alphabet, L), c);
        },
        py::arg("streams"), py::arg("alphabet"), py::arg("L") = 1, py::arg("alpha") = 0.001,
        py::arg("test") = "chi_square", py::arg("min_count") = 5, "Reconstruct an epsilon-machine with CSSR.");

    m.def("auc", [](const std::vector<double>& s, const std::vector<std::uint8_t>& l) { return auc(s, l); },
          py::arg("scores"), py::arg("labels"));
    m.def("auc_rank_sum",
          [](const std::vector<double>& s, const std::vector<std::uint8_t>& l) { return auc_rank_sum(s, l); },
          py::arg("scores"), py::arg("labels"));
    m.def("roc_curve",
          [](const std::vector<double>& s, const std::vector<std::uint8_t>& l) { return roc_curve(s, l).points; },
          py::arg("scores"), py::arg("labels"));

    py::class_<RunConfig> cfg(m, "RunConfig");
    cfg.def(py::init<>())
        .def_readwrite("dataset", &RunConfig::dataset)
        .def_readwrite("col_player", &RunConfig::col_player)
        .def_readwrite("col_time", &RunConfig::col_time)
        .def_readwrite("col_score", &RunConfig::col_score)
        .def_readwrite("delimiter", &RunConfig::delimiter)
        .def_readwrite("threshold_h", &RunConfig::threshold_h)
        .def_readwrite("split_rule", &RunConfig::split_rule)
        .def_readwrite("basis", &RunConfig::basis)
        .def_readwrite("quartile_population", &RunConfig::quartile_population)
        .def_readwrite("shuffle_seed", &RunConfig::shuffle_seed)
        .def_readwrite("quit_bin_width", &RunConfig::quit_bin_width)
        .def_readwrite("scheme", &RunConfig::scheme)
        .def_readwrite("theta", &RunConfig::theta)
        .def_readwrite("reference_scope", &RunConfig::reference_scope)
        .def_readwrite("quartile", &RunConfig::quartile)
        .def_readwrite("L", &RunConfig::L)
        .def_readwrite("alpha", &RunConfig::alpha)
        .def_readwrite("test", &RunConfig::test)
        .def_readwrite("min_count", &RunConfig::min_count)
        .def_readwrite("split_fraction", &RunConfig::split_fraction)
        .def_readwrite("bootstrap_n", &RunConfig::bootstrap_n)
        .def_readwrite("bootstrap_seed", &RunConfig::bootstrap_seed)
        .def_readwrite("fourth_game", &RunConfig::fourth_game)
        .def_readwrite("schemes", &RunConfig::schemes)
        .def_readwrite("thetas", &RunConfig::thetas)
        .def_readwrite("lengths", &RunConfig::lengths)
        .def_readwrite("quartiles", &RunConfig::quartiles)
        .def_readwrite("min_edge_prob", &RunConfig::min_edge_prob)
        .def_readwrite("include_transient", &RunConfig::include_transient)
        .def_readwrite("synth_spec", &RunConfig::synth_spec)
        .def_readwrite("synth_seed", &RunConfig::synth_seed)
        .def_readwrite("synth_players", &RunConfig::synth_players)
        .def_readwrite("outdir", &RunConfig::outdir)
        .def_readwrite("force", &RunConfig::force)
        .def_readwrite("threads", &RunConfig::threads);

    m.def(
        "run",
        [](const std::string& subcommand, const RunConfig& config) {
            std::ostringstream log;
            int code = 0;
            {
                py::gil_scoped_release release;
                code = run_subcommand(subcommand, config, log);
            }
            return py::make_tuple(code, log.str());
        },
        py::arg("subcommand"), py::arg("config"),
        "Run one pipeline stage; returns (exit_code, log).");
    m.attr("SUBCOMMANDS") = subcommand_names();
}
