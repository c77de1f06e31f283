#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "doco/conformal.hpp"
#include "doco/config.hpp"
#include "doco/harness.hpp"
#include "doco/ledger.hpp"
#include "doco/magnitude_learner.hpp"
#include "doco/metrics.hpp"
#include "doco/ogd.hpp"
#include "doco/rng.hpp"
#include "doco/schedule.hpp"
#include "doco/special_math.hpp"
#include "doco/streams.hpp"
#include "doco/vector_learner.hpp"

namespace py = pybind11;
using namespace doco;

PYBIND11_MODULE(_doco, m) {
  m.doc() = "discounted adaptive online learning core";

  // special math
  m.def("erfi", &erfi, py::arg("x"));
  m.def(
      "stable_exp",
      [](double x, double max_arg) {
        const ClampedExp r = stable_exp(x, max_arg);
        return py::make_tuple(r.value, r.saturated);
      },
      py::arg("x"), py::arg("max_arg") = kMaxExpArg);
  py::class_<PotentialArgs>(m, "PotentialArgs")
      .def(py::init([](double v, double s, double h, double eps) {
             return PotentialArgs{v, s, h, eps};
           }),
           py::arg("v"), py::arg("s"), py::arg("h"), py::arg("eps") = 1.0)
      .def_readwrite("v", &PotentialArgs::v)
      .def_readwrite("s", &PotentialArgs::s)
      .def_readwrite("h", &PotentialArgs::h)
      .def_readwrite("eps", &PotentialArgs::eps);
  m.def("potential", &potential, py::arg("args"));

  // schedules
  py::class_<DiscountSchedule>(m, "DiscountSchedule")
      .def_static("constant", &DiscountSchedule::constant, py::arg("lam"))
      .def_static("piecewise", &DiscountSchedule::piecewise, py::arg("segments"))
      .def_static("restart", &DiscountSchedule::restart, py::arg("restart_indices"),
                  py::arg("floor") = DiscountSchedule::kDefaultFloor)
      .def_static("explicit_sequence", &DiscountSchedule::explicit_sequence, py::arg("values"))
      .def("lam", &DiscountSchedule::lambda, py::arg("t"));
  py::class_<DiscountedMoments>(m, "DiscountedMoments")
      .def(py::init<>())
      .def_readwrite("horizon", &DiscountedMoments::horizon)
      .def_readwrite("variance", &DiscountedMoments::variance)
      .def_readwrite("lipschitz", &DiscountedMoments::lipschitz);
  m.def("update_moments", &update_moments, py::arg("moments"), py::arg("g_norm"),
        py::arg("lambda_prev"));
  m.def("effective_horizon", &effective_horizon, py::arg("schedule"), py::arg("t"));
  m.def("forgetting_multiplier", &forgetting_multiplier, py::arg("schedule"), py::arg("from_index"),
        py::arg("to_index"));

  // magnitude learner
  py::enum_<MagnitudeVariant>(m, "MagnitudeVariant")
      .value("DISCOUNTED", MagnitudeVariant::kDiscounted)
      .value("UNDISCOUNTED", MagnitudeVariant::kUndiscounted)
      .value("HINT_FREE", MagnitudeVariant::kHintFree)
      .value("HINTED", MagnitudeVariant::kHinted);
  py::class_<MagnitudeState>(m, "MagnitudeState")
      .def_static("make", &MagnitudeState::make, py::arg("variant"), py::arg("eps") = 1.0)
      .def_static("make_hint_free", &MagnitudeState::make_hint_free, py::arg("eps") = 1.0,
                  py::arg("v0") = MagnitudeState::kDefaultHintFreeV0)
      .def_readonly("v", &MagnitudeState::v)
      .def_readonly("s", &MagnitudeState::s)
      .def_readonly("h", &MagnitudeState::h)
      .def_readonly("eps", &MagnitudeState::eps)
      .def_readonly("saturated", &MagnitudeState::saturated);
  py::class_<MagnitudePrediction>(m, "MagnitudePrediction")
      .def_readonly("x", &MagnitudePrediction::x)
      .def_readonly("x_unprojected", &MagnitudePrediction::x_unprojected)
      .def_readonly("saturated", &MagnitudePrediction::saturated);
  py::class_<MagnitudeUpdateRecord>(m, "MagnitudeUpdateRecord")
      .def_readonly("g", &MagnitudeUpdateRecord::g)
      .def_readonly("g_clip", &MagnitudeUpdateRecord::g_clip)
      .def_readonly("g_tilde", &MagnitudeUpdateRecord::g_tilde)
      .def_readonly("x_unprojected", &MagnitudeUpdateRecord::x_unprojected)
      .def_readonly("x", &MagnitudeUpdateRecord::x)
      .def_readonly("lambda_prev", &MagnitudeUpdateRecord::lambda_prev);
  m.def("magnitude_predict", &magnitude_predict, py::arg("state"));
  m.def("magnitude_update", &magnitude_update, py::arg("state"), py::arg("g"),
        py::arg("lambda_prev"), py::arg("hint") = std::nullopt);
  m.def(
      "magnitude_regret_bound",
      [](double variance, double lipschitz, double comparator, double eps, std::int64_t tau,
         double forgetting, double max_x_recent, double max_x_old, double lipschitz_old) {
        return magnitude_regret_bound(MagnitudeBoundArgs{variance, lipschitz, comparator, eps,
                                                         tau, forgetting, max_x_recent,
                                                         max_x_old, lipschitz_old});
      },
      py::arg("variance"), py::arg("lipschitz"), py::arg("comparator"), py::arg("eps") = 1.0,
      py::arg("tau") = 1, py::arg("forgetting") = 1.0, py::arg("max_x_recent") = 0.0,
      py::arg("max_x_old") = 0.0, py::arg("lipschitz_old") = 0.0);

  // vector learner
  py::class_<BallLearnerState>(m, "BallLearnerState")
      .def(py::init<std::size_t>(), py::arg("dim"))
      .def_readonly("w", &BallLearnerState::w)
      .def_readonly("variance", &BallLearnerState::variance);
  m.def("ball_step",
        [](const BallLearnerState& st, const std::vector<double>& g, double lam) {
          return ball_step(st, g, lam);
        },
        py::arg("state"), py::arg("g"), py::arg("lambda_prev"));
  py::class_<VectorLearnerState>(m, "VectorLearnerState")
      .def_static("make", &VectorLearnerState::make, py::arg("dim"), py::arg("eps") = 1.0,
                  py::arg("bias") = std::vector<double>{})
      .def_readonly("magnitude", &VectorLearnerState::magnitude)
      .def_readonly("ball", &VectorLearnerState::ball)
      .def_readonly("h", &VectorLearnerState::h)
      .def_readonly("bias", &VectorLearnerState::bias);
  m.def("vector_predict", &vector_predict, py::arg("state"));
  m.def("vector_update",
        [](const VectorLearnerState& st, const std::vector<double>& g, double lam) {
          return vector_update(st, g, lam);
        },
        py::arg("state"), py::arg("g"), py::arg("lambda_prev"));

  // conformal
  py::class_<RadiusLossEval>(m, "RadiusLossEval")
      .def_readonly("value", &RadiusLossEval::value)
      .def_readonly("gradient", &RadiusLossEval::gradient);
  m.def("pinball_loss", &pinball_loss, py::arg("r"), py::arg("r_star"), py::arg("alpha"));
  m.def("skewed_quadratic_loss", &skewed_quadratic_loss, py::arg("r"), py::arg("r_star"),
        py::arg("alpha"));
  py::class_<ConformalState>(m, "ConformalState")
      .def_static("make", &ConformalState::make, py::arg("eps") = 1.0)
      .def_property_readonly("s_clip", &ConformalState::s_clip)
      .def_property_readonly("v_clip", &ConformalState::v_clip)
      .def_property_readonly("g_max", &ConformalState::g_max)
      .def_property_readonly("saturated", &ConformalState::saturated);
  py::class_<ConformalPrediction>(m, "ConformalPrediction")
      .def_readonly("r", &ConformalPrediction::r)
      .def_readonly("r_unprojected", &ConformalPrediction::r_unprojected)
      .def_readonly("saturated", &ConformalPrediction::saturated);
  m.def("acp_predict", &acp_predict, py::arg("state"));
  m.def("acp_update", &acp_update, py::arg("state"), py::arg("g_star"), py::arg("lambda_prev"));
  m.def("discounted_coverage_metric",
        [](const std::vector<double>& g_history, const DiscountSchedule& schedule,
           std::int64_t t) { return discounted_coverage_metric(g_history, schedule, t); },
        py::arg("g_history"), py::arg("schedule"), py::arg("t"));
  m.def("coverage_deviation_bound", &coverage_deviation_bound, py::arg("v_clip"),
        py::arg("g_max"), py::arg("ceiling"), py::arg("eps"));

  // baselines
  py::class_<OgdDomain>(m, "OgdDomain")
      .def_static("unconstrained", &OgdDomain::unconstrained)
      .def_static("interval", &OgdDomain::interval, py::arg("lo"), py::arg("hi"))
      .def_static("ball", &OgdDomain::ball, py::arg("center"), py::arg("radius"))
      .def("project", &OgdDomain::project, py::arg("x"))
      .def("diameter", &OgdDomain::diameter);
  py::class_<OgdRule>(m, "OgdRule")
      .def_static("constant_lr", &OgdRule::constant_lr, py::arg("diameter"), py::arg("lipschitz"),
                  py::arg("lam"))
      .def_static("horizon", &OgdRule::horizon, py::arg("diameter"), py::arg("lipschitz"))
      .def_static("adagrad", &OgdRule::adagrad, py::arg("diameter"))
      .def_static("simple", &OgdRule::simple, py::arg("lr_scale") = 1.0);
  py::class_<OgdState>(m, "OgdState")
      .def_static("make", &OgdState::make, py::arg("rule"), py::arg("domain"), py::arg("x0"))
      .def_readonly("x", &OgdState::x)
      .def_readonly("moments", &OgdState::moments);
  m.def("ogd_step",
        [](const OgdState& st, const std::vector<double>& g, double lam) {
          return ogd_step(st, g, lam);
        },
        py::arg("state"), py::arg("g"), py::arg("lambda_prev"));
  m.def("l2_regularized_ogd_step",
        [](const std::vector<double>& x, const std::vector<double>& g, double eta, double gamma) {
          return l2_regularized_ogd_step(x, g, eta, gamma);
        },
        py::arg("x"), py::arg("g"), py::arg("eta"), py::arg("gamma"));
  m.def("linear_ftrl_step",
        [](const std::vector<double>& sum, const std::vector<double>& g, double lam, double c) {
          const LinearFtrlResult r = linear_ftrl_step(sum, g, lam, c);
          return py::make_tuple(r.sum, r.prediction);
        },
        py::arg("sum"), py::arg("g"), py::arg("lam"), py::arg("c"));

  // synthetic streams
  m.def(
      "quantile_shift_stream",
      [](std::vector<double> levels, double noise_scale, std::int64_t shift_period,
         const std::string& mode, std::uint64_t seed, std::int64_t horizon) {
        QuantileShiftSpec qs;
        qs.mode = (mode == "gradual") ? QuantileShiftSpec::Mode::kGradual
                                      : QuantileShiftSpec::Mode::kSudden;
        qs.shift_period = shift_period;
        qs.levels = std::move(levels);
        qs.noise_scale = noise_scale;
        StreamSpec spec;
        spec.kind = std::move(qs);
        spec.seed = seed;
        spec.horizon = horizon;
        const QuantileStream stream = quantile_shift_stream(spec);
        return py::make_tuple(stream.r_star, stream.ceiling);
      },
      py::arg("levels"), py::arg("noise_scale"), py::arg("shift_period"),
      py::arg("mode") = "sudden", py::arg("seed") = 0, py::arg("horizon") = 1000);
  m.def(
      "rademacher_stream",
      [](std::vector<double> direction, double budget, double lipschitz,
         const DiscountSchedule& schedule, std::uint64_t seed, std::int64_t horizon) {
        StreamSpec spec;
        spec.kind = RademacherSpec{std::move(direction), budget, lipschitz};
        spec.seed = seed;
        spec.horizon = horizon;
        const RademacherStream stream = rademacher_stream(spec, schedule);
        return py::make_tuple(stream.gradients, stream.scale);
      },
      py::arg("direction"), py::arg("budget"), py::arg("lipschitz"), py::arg("schedule"),
      py::arg("seed") = 0, py::arg("horizon") = 1000);

  // experiment harness
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_static("from_file", &ExperimentConfig::from_file, py::arg("path"))
      .def_readwrite("trials", &ExperimentConfig::trials)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("horizon", &ExperimentConfig::horizon)
      .def_readwrite("alpha", &ExperimentConfig::alpha)
      .def_readwrite("out_dir", &ExperimentConfig::out_dir);
  py::class_<LearnerSummary>(m, "LearnerSummary")
      .def_readonly("id", &LearnerSummary::id)
      .def_readonly("algo", &LearnerSummary::algo)
      .def_readonly("step_ns_mean", &LearnerSummary::step_ns_mean)
      .def_readonly("coverage_mean", &LearnerSummary::coverage_mean)
      .def_readonly("width_mean", &LearnerSummary::width_mean)
      .def_readonly("lce_max", &LearnerSummary::lce_max)
      .def_readonly("bounds_checked", &LearnerSummary::bounds_checked)
      .def_readonly("bounds_failed", &LearnerSummary::bounds_failed);
  py::class_<ExperimentReport>(m, "ExperimentReport")
      .def_readonly("learners", &ExperimentReport::learners)
      .def_readonly("all_bounds_pass", &ExperimentReport::all_bounds_pass);
  m.def(
      "run_experiment",
      [](const ExperimentConfig& config, bool write_outputs, bool quiet) {
        RunOptions options;
        options.write_outputs = write_outputs;
        options.quiet = quiet;
        return run_experiment(config, options);
      },
      py::arg("config"), py::arg("write_outputs") = true, py::arg("quiet") = true);
}
