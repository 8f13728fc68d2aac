#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amix/adaptive_loop.hpp"
#include "amix/design_space.hpp"
#include "amix/gp.hpp"

namespace amix {

double example1(const MixedPoint& w);
double example2(const MixedPoint& w);
double example3(const MixedPoint& w);

struct TestProblem {
  std::string name;
  DesignSpace space;
  ResponseFn evaluate;
  double known_min = 0.0;
  double known_max = 0.0;

  std::size_t optim_n0 = 9;
  std::vector<std::size_t> optim_budgets;
  std::size_t contour_n0 = 9;
  std::vector<std::size_t> contour_budgets;
  std::vector<double> contour_levels;
  double epsilon = 0.05;
  double delta = 0.05;
  std::size_t predict_n0 = 0;
  std::vector<std::size_t> predict_budgets;
};

/// "example1", "example2" or "example3"; throws std::invalid_argument otherwise.
TestProblem make_problem(std::string_view name);
std::vector<std::string> problem_names();

/// Running minimum.
std::vector<double> metric_best_min(std::span<const double> responses);

/// Probe points with their true responses.
struct ProbeSet {
  std::vector<MixedPoint> points;
  std::vector<double> truth;
};

/// per_combo-run LHD at every level combination, evaluated exactly.
ProbeSet make_probe(const TestProblem& problem, std::size_t per_combo, RngStream rng);

/// Mean |Y - Yhat| over probe points with |Y - a| <= eps; empty when none qualify.
std::optional<double> metric_mc0(const FittedGP& model, const ProbeSet& probe, double a, double eps);
std::optional<double> metric_mc0(const FittedGP& model, const TestProblem& problem, double a, double eps,
                                 std::uint64_t pool_seed);

/// Root mean squared prediction error; throws on an empty test set.
double metric_rmse(const FittedGP& model, const ProbeSet& test);

enum class StudyKind { Optimize, Contour, Predict };
std::string_view to_string(StudyKind k);

struct Study {
  StudyKind kind = StudyKind::Optimize;
  TestProblem problem;
  std::vector<Method> methods;
  bool include_oneshot = true;
  std::size_t n0 = 9;
  std::vector<std::size_t> budgets;
  std::size_t replications = 1;
  std::uint64_t base_seed = 1;
  double a = 0.0;        // contour level (contour studies)
  double epsilon = 0.05;  // M_C0 band
  std::size_t n_per_combo = 100;
  std::size_t probe_per_combo = 200;
  FitOptions fit;
  std::size_t jobs = 1;

  void validate() const;
};

/// Seed shared by every method in replication r.
std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t r);

inline constexpr std::string_view kOneShot = "oneshot";

struct CellResult {
  std::string method;
  std::size_t budget = 0;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::optional<double> metric;  // best min, M_C0 or log RMSE; empty for NA
  double fit_seconds = 0.0;
  double select_seconds = 0.0;
  std::string error;  // nonempty if the run failed
};

struct CellSummary {
  std::string method;
  std::size_t budget = 0;
  std::size_t count = 0;  // replications with a metric value
  std::size_t na = 0;
  std::size_t failed = 0;
  std::optional<double> mean;
  std::optional<double> sd;
  std::optional<double> median;
  std::optional<double> rel_efficiency;  // one-shot mean / method mean
  double fit_time_mean = 0.0;
  double select_time_mean = 0.0;
  double time_per_point = 0.0;  // (fit + select) / added points
};

struct ReplicationReport {
  std::vector<CellResult> cells;  // method order, then replication, then budget
  std::vector<CellSummary> summary;
};

/// Called once per finished adaptive run, serialized across workers.
using TraceSink = std::function<void(const std::string& method, std::size_t replication, const Trace& trace)>;

/// Run every (method, replication) pair, up to `study.jobs` at a time.
ReplicationReport replicate(const Study& study, const TraceSink& sink = {});

/// Fold cells into per-(method, budget) summaries in method order.
std::vector<CellSummary> summarize(const Study& study, const std::vector<CellResult>& cells);

}  // namespace amix
