#include "clubcascade/bounds.hpp"
#include "clubcascade/bounds_check.hpp"
#include "clubcascade/club.hpp"
#include "clubcascade/environment.hpp"
#include "clubcascade/error.hpp"
#include "clubcascade/experiment.hpp"
#include "clubcascade/glm.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace pybind11::literals;
using namespace clubcascade;

namespace {

// Row r of X becomes the item with id r.
ItemList rows_to_items(const Matrix& X) {
  ItemList items;
  items.reserve(static_cast<std::size_t>(X.rows()));
  for (Index r = 0; r < X.rows(); ++r) items.push_back({static_cast<std::size_t>(r), X.row(r).transpose()});
  return items;
}

std::vector<std::size_t> ids_of(const ItemList& list) {
  std::vector<std::size_t> out;
  for (const auto& it : list) out.push_back(it.id);
  return out;
}

Link parse_link(const std::string& name) {
  if (name == "logistic") return Link::logistic;
  if (name == "identity") return Link::identity;
  throw Error(Errc::invalid_config, "unknown link '" + name + "'");
}

ExperimentConfig config_from(const std::map<std::string, std::string>& settings) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : settings) apply_setting(cfg, key, value);
  cfg.validate();
  return cfg;
}

py::list records_of(const std::vector<CellResult>& cells) {
  py::list out;
  for (const auto& c : cells)
    for (const auto& r : c.records) out.append(py::make_tuple(r.t, r.algorithm, r.seed, r.metric));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Clustered cascading bandits: CLUB-cascade learner, baselines, bounds and harness.";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error;
  error.call_once_and_store_result(
      [&] { return py::exception<Error>(m, "ClubcascadeError", PyExc_RuntimeError); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      if (e.code() == Errc::invalid_config || e.code() == Errc::dimension_mismatch)
        PyErr_SetString(PyExc_ValueError, e.what());
      else
        py::set_error(error.get_stored(), e.what());
    }
  });

  m.def("set_warnings_enabled", &set_warnings_enabled, "enabled"_a);

  auto b = m.def_submodule("bounds", "Closed-form confidence widths and inequality bounds.");
  b.def("beta_linear", &bounds::beta_linear, "t"_a, "delta"_a, "d"_a, "lam"_a);
  b.def("beta_glm", &bounds::beta_glm, "T"_a, "delta"_a, "d"_a, "lambda_x"_a, "c_mu"_a);
  b.def("alpha_default", &bounds::alpha_default, "d"_a, "lambda_x"_a);
  b.def("det_upper_bound_ridge", &bounds::det_upper_bound_ridge, "lam"_a, "n"_a, "L"_a, "d"_a);
  b.def("self_norm_sum_bound", &bounds::self_norm_sum_bound, "n"_a, "K"_a, "d"_a, "lam"_a, "L"_a);
  b.def("lambda_min_threshold", &bounds::lambda_min_threshold, "lambda_x"_a, "d"_a, "delta"_a);
  b.def("log_dominance_threshold", &bounds::log_dominance_threshold, "a"_a, "b"_a);
  b.def(
      "run_checks",
      [](double scale, std::uint64_t seed) {
        ExperimentConfig cfg;
        cfg.bounds_trials_scale = scale;
        cfg.seeds = {seed};
        py::list out;
        for (const auto& r : bounds::run_all_checks(check_config(cfg)))
          out.append(py::dict("name"_a = r.name, "trials"_a = r.trials, "violations"_a = r.violations,
                              "allowed"_a = r.allowed, "worst_margin"_a = r.worst_margin,
                              "passed"_a = r.passed()));
        return out;
      },
      "scale"_a = 1.0, "seed"_a = 1, "Runs every empirical bound check; trial counts scale linearly.");

  m.def(
      "optimal_list", [](const Matrix& X, const Vector& theta, std::size_t k) {
        return ids_of(optimal_list(rows_to_items(X), theta, k));
      },
      "X"_a, "theta"_a, "k"_a, "Row indices of the expected-reward-maximizing list, best first.");
  m.def(
      "expected_reward", [](const Matrix& X, const Vector& theta) {
        return expected_reward(rows_to_items(X), theta);
      },
      "X"_a, "theta"_a);
  m.def(
      "regret_decomposition_check",
      [](const std::vector<double>& p_opt, const std::vector<double>& p_alg) {
        return regret_decomposition_check(p_opt, p_alg);
      },
      "p_opt"_a, "p_alg"_a);
  m.def(
      "glm_mle",
      [](const Matrix& X, const Vector& y, const std::string& link, double reg) {
        if (X.rows() != y.size()) throw Error(Errc::dimension_mismatch, "X rows and y length differ");
        std::vector<GlmSample> samples;
        for (Index r = 0; r < X.rows(); ++r) samples.push_back({X.row(r).transpose(), y(r)});
        return glm_mle(samples, parse_link(link), reg, X.cols());
      },
      "X"_a, "y"_a, "link"_a = "logistic", "reg"_a = kGlmDefaultReg);

  py::class_<ClubLearner>(m, "ClubLearner")
      .def(py::init([](std::size_t users, std::size_t d, std::size_t K, double lam, double alpha,
                       std::optional<double> beta, std::size_t horizon, double delta) {
             ClubConfig cfg;
             cfg.d = d;
             cfg.K = K;
             cfg.lambda = lam;
             cfg.alpha = alpha;
             cfg.beta = beta;
             cfg.horizon = horizon;
             cfg.delta = delta;
             return ClubLearner(cfg, users);
           }),
           "users"_a, "d"_a, "K"_a, "lam"_a = 4.0, "alpha"_a = 1.0, "beta"_a = py::none(),
           "horizon"_a = 10000, "delta"_a = 0.1)
      .def_property_readonly("users", &ClubLearner::users)
      .def(
          "recommend",
          [](const ClubLearner& l, std::size_t user, const Matrix& X) {
            return ids_of(l.recommend(user, rows_to_items(X)));
          },
          "user"_a, "X"_a, "Row indices of the UCB top-K list.")
      .def(
          "update",
          [](ClubLearner& l, std::size_t user, const Matrix& shown, std::optional<std::size_t> click) {
            const auto list = rows_to_items(shown);
            const auto outcome = click ? CascadeOutcome::click_at(*click, list.size())
                                       : CascadeOutcome::no_click(list.size());
            l.update(user, list, outcome);
            return l.prune_edges(user);
          },
          "user"_a, "shown"_a, "click"_a = py::none(),
          "Feeds back a shown list; click is the 1-based clicked position or None. Returns deleted edges.")
      .def("theta_hat", [](const ClubLearner& l, std::size_t user) { return l.stats(user).theta_hat; },
           "user"_a)
      .def("component_labels", [](const ClubLearner& l) { return l.graph().component_labels(); })
      .def("edge_count", [](const ClubLearner& l) { return l.graph().edge_count(); });

  m.def(
      "run_synth", [](const std::map<std::string, std::string>& settings) {
        return records_of(run_synth(config_from(settings)));
      },
      "settings"_a = std::map<std::string, std::string>{},
      "Synthetic experiment; settings use the harness config keys. Returns (t, algorithm, seed, metric).");
  m.def(
      "run_replay", [](const std::map<std::string, std::string>& settings) {
        auto cfg = config_from(settings);
        cfg.scenario = Scenario::replay;
        return records_of(run_replay(cfg, prepare_replay(cfg)));
      },
      "settings"_a = std::map<std::string, std::string>{});
}
