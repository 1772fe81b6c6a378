#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pcmdp/algorithms.hpp"
#include "pcmdp/environments.hpp"
#include "pcmdp/harness.hpp"
#include "pcmdp/oracle.hpp"

namespace py = pybind11;
using namespace pcmdp;

PYBIND11_MODULE(_pcmdp, m) {
  m.doc() = "tabular RL with factored controllable/exogenous dynamics";

  py::class_<Env>(m, "Env")
      .def_property_readonly("name", [](const Env& e) { return e.name; })
      .def_property_readonly("n_states", &Env::n_states)
      .def_property_readonly("n_actions", &Env::n_actions)
      .def_property_readonly("horizon", &Env::horizon)
      .def_property_readonly("exportable", [](const Env& e) { return e.exportable; })
      .def("raw_return", &Env::raw_return);

  m.def("make_env", &build_named_env,
        "taxi | trading | trading_desk | elevator | lower_bound");
  m.def("make_env_from_config", &build_env_from_file);
  m.def("optimal_value", &optimal_value,
        "exact optimal return from the initial distribution (raw reward scale)");

  py::class_<LearnerConfig>(m, "LearnerConfig")
      .def(py::init<>())
      .def_readwrite("algo", &LearnerConfig::algo)
      .def_readwrite("bonus_c", &LearnerConfig::bonus_c)
      .def_readwrite("delta", &LearnerConfig::delta)
      .def_readwrite("replan_every", &LearnerConfig::replan_every)
      .def_readwrite("ql_alpha", &LearnerConfig::ql_alpha)
      .def_readwrite("eps_start", &LearnerConfig::eps_start)
      .def_readwrite("eps_min", &LearnerConfig::eps_min)
      .def_readwrite("eps_decay", &LearnerConfig::eps_decay)
      .def_readwrite("eps_decay_type", &LearnerConfig::eps_decay_type);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("env_name", &ExperimentConfig::env_name)
      .def_readwrite("env_config_path", &ExperimentConfig::env_config_path)
      .def_readwrite("learner", &ExperimentConfig::learner)
      .def_readwrite("episodes", &ExperimentConfig::episodes)
      .def_readwrite("seeds", &ExperimentConfig::seeds)
      .def_readwrite("master_seed", &ExperimentConfig::master_seed)
      .def_readwrite("eval_every", &ExperimentConfig::eval_every)
      .def_readwrite("eval_episodes", &ExperimentConfig::eval_episodes)
      .def_readwrite("regret", &ExperimentConfig::regret);

  py::class_<RunRecord>(m, "RunRecord")
      .def_readonly("seed", &RunRecord::seed)
      .def_readonly("episode", &RunRecord::episode)
      .def_readonly("train_return", &RunRecord::train_return)
      .def_readonly("eval_return", &RunRecord::eval_return)
      .def_readonly("cum_regret", &RunRecord::cum_regret)
      .def_readonly("has_regret", &RunRecord::has_regret);

  py::class_<ExperimentResult>(m, "ExperimentResult")
      .def_property_readonly("env", [](const ExperimentResult& r) { return r.env; })
      .def_property_readonly("algo", [](const ExperimentResult& r) { return r.algo; })
      .def_property_readonly("records",
                             [](const ExperimentResult& r) { return r.per_seed; });

  m.def("run_experiment",
        py::overload_cast<const ExperimentConfig&>(&run_experiment),
        py::call_guard<py::gil_scoped_release>());
  m.def("write_csv", &emit_csv);
  m.def("read_csv", &parse_csv);
}
