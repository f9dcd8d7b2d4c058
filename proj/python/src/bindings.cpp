#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "procqm/acceptance.hpp"
#include "procqm/dd.hpp"
#include "procqm/dp.hpp"
#include "procqm/errors.hpp"
#include "procqm/harness.hpp"
#include "procqm/pd.hpp"
#include "procqm/ppp.hpp"

namespace py = pybind11;

using namespace procqm;

namespace {

py::object fraction(const Rational& r) {
    static py::object ctor = py::module_::import("fractions").attr("Fraction");
    return ctor(r.num, r.den);
}

std::shared_ptr<DirectionGrid> mutable_grid(std::shared_ptr<const DirectionGrid> grid) {
    return std::const_pointer_cast<DirectionGrid>(std::move(grid));
}

py::dict frequency_row_dict(const harness::FrequencyRow& row) {
    py::dict out;
    out["prep"] = row.prep;
    out["chain"] = row.chain;
    out["outcome_seq"] = row.outcome_seq;
    out["count"] = row.count;
    out["emp_freq"] = row.emp_freq;
    out["theory"] = row.theory;
    out["se"] = row.se;
    out["quant_bound"] = row.quant_bound;
    out["pass"] = row.pass;
    return out;
}

const dp::CyclicPrep& find_prep(const dp::Model& model, const std::string& name) {
    for (const auto& prep : model.preparations) {
        if (prep.name == name) return prep;
    }
    throw ConfigError("unknown cyclic preparation: " + name);
}

const dp::DetectionRule& find_rule(const dp::Model& model, const std::string& name) {
    for (const auto& rule : model.rules) {
        if (rule.name == name) return rule;
    }
    throw ConfigError("unknown detection rule: " + name);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Process-based ontological models of a single qubit";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<MalformedInstanceError>(m, "MalformedInstanceError", PyExc_ValueError);
    py::register_exception<EmptyVisibleSetError>(m, "EmptyVisibleSetError", PyExc_RuntimeError);
    py::register_exception<NotSingletonError>(m, "NotSingletonError", PyExc_RuntimeError);
    py::register_exception<NotOrthogonalError>(m, "NotOrthogonalError", PyExc_RuntimeError);

    py::class_<Direction>(m, "Direction")
        .def_property_readonly(
            "unit", [](const Direction& d) { return py::make_tuple(d.unit.x, d.unit.y, d.unit.z); })
        .def_readonly("id", &Direction::id)
        .def("__repr__", [](const Direction& d) {
            return "Direction(id=" + std::to_string(d.id) + ")";
        });

    py::class_<QubitState>(m, "QubitState")
        .def_readonly("axis", &QubitState::axis)
        .def_readonly("sign", &QubitState::sign)
        .def("__repr__", [](const QubitState& s) {
            return "QubitState(axis=" + std::to_string(s.axis.id) +
                   ", sign=" + (s.sign > 0 ? std::string("+1") : std::string("-1")) + ")";
        });

    py::class_<DirectionGrid, std::shared_ptr<DirectionGrid>>(m, "DirectionGrid")
        .def_static(
            "default_grid",
            [](int resolution) { return mutable_grid(DirectionGrid::default_grid(resolution)); },
            py::arg("resolution") = 100)
        .def_static(
            "great_circle",
            [](int axis_count, int resolution) {
                return mutable_grid(DirectionGrid::great_circle(axis_count, resolution));
            },
            py::arg("axis_count"), py::arg("resolution") = 100)
        .def_static(
            "from_spec",
            [](const std::string& spec, int resolution) {
                return mutable_grid(harness::grid_from_spec(spec, resolution));
            },
            py::arg("spec"), py::arg("resolution") = 100)
        .def("__len__", &DirectionGrid::size)
        .def_property_readonly("resolution", &DirectionGrid::resolution)
        .def("direction", &DirectionGrid::direction, py::arg("id"))
        .def("state", &DirectionGrid::state, py::arg("id"), py::arg("sign"))
        .def("parse_state",
             [](const DirectionGrid& grid, const std::string& token) {
                 return harness::parse_state_token(grid, token);
             })
        .def("parse_axis", [](const DirectionGrid& grid, const std::string& token) {
            return harness::parse_axis_token(grid, token);
        });

    m.def("born_probability", &born_probability, py::arg("state"), py::arg("axis"),
          py::arg("outcome_sign"));
    m.def("sequential_probability", &sequential_probability, py::arg("prep"), py::arg("chain"));

    py::class_<dd::OnticStateId>(m, "OnticStateId")
        .def(py::init<int, int>(), py::arg("direction_id"), py::arg("sign"))
        .def_readonly("direction_id", &dd::OnticStateId::direction_id)
        .def_readonly("sign", &dd::OnticStateId::sign)
        .def("__eq__",
             [](const dd::OnticStateId& a, const dd::OnticStateId& b) { return a == b; })
        .def("__hash__",
             [](const dd::OnticStateId& s) { return s.direction_id * 2 + (s.sign > 0 ? 0 : 1); })
        .def("__repr__", [](const dd::OnticStateId& s) {
            return "OnticStateId(" + std::to_string(s.direction_id) + ", " +
                   (s.sign > 0 ? std::string("+1") : std::string("-1")) + ")";
        });

    py::class_<dd::VisitCounts>(m, "VisitCounts")
        .def("count", &dd::VisitCounts::count)
        .def("pair_total", &dd::VisitCounts::pair_total)
        .def("total", &dd::VisitCounts::total)
        .def_property_readonly("direction_count", &dd::VisitCounts::direction_count);

    py::class_<dd::ProcessPath>(m, "ProcessPath")
        .def(py::init<int, std::vector<dd::OnticStateId>>(), py::arg("direction_count"),
             py::arg("visits"))
        .def_property_readonly("visits", &dd::ProcessPath::visits)
        .def_property_readonly("counts", &dd::ProcessPath::counts)
        .def("__len__", [](const dd::ProcessPath& p) { return p.visits().size(); })
        .def("to_json", &dd::path_to_json);
    m.def("path_from_json", &dd::path_from_json, py::arg("text"), py::arg("direction_count"));

    py::enum_<dd::PathOrdering>(m, "PathOrdering")
        .value("shuffled", dd::PathOrdering::shuffled)
        .value("round_robin", dd::PathOrdering::round_robin);

    py::class_<dd::DdPreparation>(m, "DdPreparation")
        .def(py::init([](const QubitState& psi, std::shared_ptr<DirectionGrid> grid,
                         int resolution, dd::PathOrdering ordering) {
                 return dd::DdPreparation(psi, grid, resolution, ordering);
             }),
             py::arg("psi"), py::arg("grid"), py::arg("resolution") = 0,
             py::arg("ordering") = dd::PathOrdering::shuffled)
        .def_readonly("psi", &dd::DdPreparation::psi)
        .def_readonly("resolution", &dd::DdPreparation::resolution)
        .def_readonly("ordering", &dd::DdPreparation::ordering);

    m.def("quantized_counts", &dd::quantized_counts, py::arg("prep"));
    m.def(
        "generate_path",
        [](const dd::DdPreparation& prep, std::uint64_t seed) {
            return dd::generate_path(prep, seed);
        },
        py::arg("prep"), py::arg("seed"));
    m.def(
        "measure",
        [](const dd::DdPreparation& prep, const dd::ProcessPath& path, const Direction& axis,
           std::uint64_t seed) {
            auto result = dd::measure(prep, path, axis, seed);
            return py::make_tuple(result.outcome, result.post);
        },
        py::arg("prep"), py::arg("path"), py::arg("axis"), py::arg("seed"));
    m.def(
        "run_sequential",
        [](const dd::DdPreparation& prep, const std::vector<Direction>& axes,
           std::uint64_t seed) { return dd::run_sequential(prep, axes, seed); },
        py::arg("prep"), py::arg("axes"), py::arg("seed"));

    // Cyclic-model operations (exact rationals surface as fractions.Fraction).
    m.def(
        "dp_outcome_distribution",
        [](const std::string& prep, const std::string& rule, bool extended) {
            const auto model = dp::builtin_model(extended);
            const auto& r = find_rule(model, rule);
            const auto dist = dp::outcome_distribution(find_prep(model, prep), r);
            py::dict out;
            out[py::str(r.outcome_names[0])] = fraction(dist[0]);
            out[py::str(r.outcome_names[1])] = fraction(dist[1]);
            return out;
        },
        py::arg("prep"), py::arg("rule"), py::arg("extended") = false);
    m.def(
        "dp_distinguishability",
        [](const std::string& prep1, const std::string& prep2, const std::string& rule,
           bool extended) {
            const auto model = dp::builtin_model(extended);
            const auto analysis = dp::distinguishability(find_prep(model, prep1),
                                                         find_prep(model, prep2),
                                                         find_rule(model, rule));
            py::dict out;
            out["one_shot_distinguishable"] = analysis.one_shot_distinguishable;
            py::list rows;
            for (const auto& row : analysis.rows) {
                py::dict r;
                r["outcome"] = row.outcome;
                r["likelihoods"] = py::make_tuple(fraction(row.likelihood1),
                                                  fraction(row.likelihood2));
                if (row.possible) {
                    r["posterior"] = py::make_tuple(fraction(row.posterior1),
                                                    fraction(row.posterior2));
                    r["support_share"] = py::make_tuple(fraction(row.support_share1),
                                                        fraction(row.support_share2));
                }
                rows.append(r);
            }
            out["rows"] = rows;
            return out;
        },
        py::arg("prep1"), py::arg("prep2"), py::arg("rule"), py::arg("extended") = false);
    m.def("dp_find_distinguishing_rule",
          [](const std::string& prep1, const std::string& prep2) -> py::object {
              const auto model = dp::builtin_model(true);
              const auto rule =
                  dp::find_distinguishing_rule(find_prep(model, prep1), find_prep(model, prep2));
              if (!rule) return py::none();
              return py::str(rule->name);
          });
    m.def("dp_table_csv",
          [](bool extended) {
              return dp::table_to_csv(extended ? dp::spekkens_table()
                                               : dp::outcome_table(dp::builtin_model(false)));
          },
          py::arg("extended") = false);

    // Trajectory-model operations work on the JSON document format.
    m.def("pd_builtin_instance_json",
          []() { return pd::instance_to_json_text(pd::builtin_minimal_instance()); });
    m.def("pd_counterexample_json", [](const std::string& which) {
        if (which == "a") return pd::instance_to_json_text(pd::counterexample_rule_a());
        if (which == "b") return pd::instance_to_json_text(pd::counterexample_rule_b());
        throw ConfigError("counterexample must be 'a' or 'b'");
    });
    m.def("pd_validate", [](const std::string& instance_json) {
        const auto report = pd::validate_rules(pd::instance_from_json_text(instance_json));
        py::list violations;
        for (const auto& violation : report.violations) {
            py::dict v;
            v["trajectory"] = violation.trajectory;
            v["rule"] = violation.rule;
            v["detail"] = violation.detail;
            violations.append(v);
        }
        py::dict out;
        out["violations"] = violations;
        out["notes"] = report.notes;
        return out;
    });
    m.def("pd_outcome_probabilities",
          [](const std::string& instance_json, const std::string& prep,
             const std::string& measurement) {
              const auto inst = pd::instance_from_json_text(instance_json);
              py::dict out;
              for (const auto& [outcome, p] : pd::outcome_probabilities(inst, prep, measurement)) {
                  out[py::str(outcome)] = fraction(p);
              }
              return out;
          });
    m.def("pd_classify_pair", [](const std::string& instance_json, const std::string& prep1,
                                 const std::string& prep2) {
        return pd::pair_class_name(
            pd::classify_pair(pd::instance_from_json_text(instance_json), prep1, prep2));
    });

    // Path-framework operations.
    py::class_<ppp::PathPrep>(m, "PathPrep")
        .def_readonly("label", &ppp::PathPrep::label)
        .def_property_readonly("paths",
                               [](const ppp::PathPrep& prep) {
                                   py::list out;
                                   for (const auto& [path, p] : prep.support) {
                                       out.append(py::make_tuple(path, p));
                                   }
                                   return out;
                               })
        .def("to_json", &ppp::path_prep_to_json_text);

    m.def(
        "path_family",
        [](const dd::DdPreparation& prep, const std::string& label, int count,
           std::uint64_t seed) { return ppp::path_family(prep, label, count, seed); },
        py::arg("prep"), py::arg("label"), py::arg("count"), py::arg("seed"));
    m.def(
        "m_equivalent",
        [](const dd::ProcessPath& a, const dd::ProcessPath& b,
           const std::vector<Direction>& measurements) {
            const ppp::RelativeFrequencyResponse response;
            return ppp::m_equivalent(a, b, response, measurements);
        },
        py::arg("a"), py::arg("b"), py::arg("measurements"));
    m.def(
        "q_equivalence_classes",
        [](const std::vector<dd::ProcessPath>& space, const std::vector<Direction>& measurements,
           std::shared_ptr<DirectionGrid> grid, int resolution) {
            const ppp::RelativeFrequencyResponse response;
            const auto classes =
                ppp::q_equivalence_classes(space, response, measurements, *grid, resolution);
            py::list out;
            for (const auto& cls : classes) {
                py::dict row;
                row["members"] = cls.members;
                row["matched_state"] =
                    cls.matched_state ? py::cast(*cls.matched_state) : py::none();
                out.append(row);
            }
            return out;
        },
        py::arg("space"), py::arg("measurements"), py::arg("grid"), py::arg("resolution"));
    m.def("classify_state", [](const std::vector<ppp::PathPrep>& preps) {
        const auto result = ppp::classify_state(preps);
        py::list verdicts;
        for (const auto& verdict : result.paths) {
            py::dict v;
            v["prep_labels"] = verdict.prep_labels;
            v["determines_state"] = verdict.determines_state;
            v["path"] = verdict.path;
            verdicts.append(v);
        }
        py::dict visits;
        for (const auto& [state, labels] : result.ontic_visits) {
            visits[py::make_tuple(state.direction_id, state.sign)] = labels;
        }
        py::dict out;
        out["paths"] = verdicts;
        out["ontic_visits"] = visits;
        return out;
    });
    m.def(
        "overlap_contradiction",
        [](const ppp::PathPrep& prep1, const ppp::PathPrep& prep2,
           std::shared_ptr<DirectionGrid> grid) -> py::object {
            std::vector<Direction> measurements;
            for (int d = 0; d < grid->size(); ++d) measurements.push_back(grid->direction(d));
            const ppp::RelativeFrequencyResponse response;
            const auto witness =
                ppp::overlap_contradiction(prep1, prep2, response, measurements);
            if (!witness) return py::none();
            py::dict out;
            out["axis_id"] = witness->axis_id;
            out["prob_plus"] = witness->prob_plus;
            out["note"] = witness->note;
            out["path"] = witness->path;
            return out;
        },
        py::arg("prep1"), py::arg("prep2"), py::arg("grid"));
    m.def("standard_check", [](const std::string& grid_spec, int resolution) {
        const auto grid = harness::grid_from_spec(grid_spec, resolution);
        const auto report =
            ppp::check_reproduction(ppp::delta_quantum_model(*grid), *grid);
        py::dict out;
        out["all_pass"] = report.all_pass;
        out["rows"] = report.rows.size();
        return out;
    });

    // Harness.
    m.def("verdict", &harness::verdict, py::arg("empirical"), py::arg("theoretical"),
          py::arg("trials"), py::arg("resolution"), py::arg("z"), py::arg("chain_len") = 1);
    m.def(
        "simulate_dd",
        [](const std::string& prep, const std::vector<std::string>& chain, long long trials,
           std::uint64_t seed, int resolution, const std::string& grid_spec, int workers,
           double z) {
            harness::RunConfig cfg;
            cfg.model = "dd";
            cfg.prep = prep;
            cfg.chain = chain;
            cfg.trials = trials;
            cfg.seed = seed;
            cfg.resolution = resolution;
            cfg.grid_spec = grid_spec;
            cfg.workers = workers;
            cfg.z = z;
            const auto report = harness::run_dd_trials({{prep, chain}}, cfg);
            py::list rows;
            for (const auto& row : report.rows) rows.append(frequency_row_dict(row));
            return rows;
        },
        py::arg("prep"), py::arg("chain"), py::arg("trials") = 10000, py::arg("seed") = 42,
        py::arg("resolution") = 100, py::arg("grid_spec") = "default", py::arg("workers") = 0,
        py::arg("z") = 4.0);
    m.def(
        "verify_all",
        [](std::uint64_t seed, long long trials, int resolution, int workers, double z) {
            accept::AcceptanceConfig cfg;
            cfg.seed = seed;
            cfg.trials = trials;
            cfg.resolution = resolution;
            cfg.workers = workers;
            cfg.z = z;
            py::list out;
            for (const auto& result : accept::run_all(cfg)) {
                py::dict r;
                r["id"] = result.id;
                r["name"] = result.name;
                r["pass"] = result.pass;
                r["detail"] = result.detail;
                out.append(r);
            }
            return out;
        },
        py::arg("seed") = 42, py::arg("trials") = 100000, py::arg("resolution") = 100,
        py::arg("workers") = 0, py::arg("z") = 4.0);

    m.attr("__all__") = py::make_tuple(
        "Direction", "QubitState", "DirectionGrid", "born_probability", "sequential_probability",
        "OnticStateId", "VisitCounts", "ProcessPath", "PathOrdering", "DdPreparation",
        "quantized_counts", "generate_path", "measure", "run_sequential", "path_from_json",
        "dp_outcome_distribution", "dp_distinguishability", "dp_find_distinguishing_rule",
        "dp_table_csv", "pd_builtin_instance_json", "pd_counterexample_json", "pd_validate",
        "pd_outcome_probabilities", "pd_classify_pair", "PathPrep", "path_family", "m_equivalent",
        "q_equivalence_classes", "classify_state", "overlap_contradiction", "standard_check",
        "verdict", "simulate_dd", "verify_all", "ConfigError", "MalformedInstanceError",
        "EmptyVisibleSetError", "NotSingletonError", "NotOrthogonalError");
}
