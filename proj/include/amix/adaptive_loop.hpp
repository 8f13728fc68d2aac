#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "amix/acquisition.hpp"
#include "amix/design_space.hpp"
#include "amix/gp.hpp"
#include "amix/hybrid.hpp"

namespace amix {

using ResponseFn = std::function<double(const MixedPoint&)>;

/// A named selection method: a criterion on an EzGP fit, or Hybrid.
struct Method {
  std::string name;
  bool hybrid = false;
  AcquisitionSpec spec;
  HybridOptions hybrid_opts;
  KernelPool pool = KernelPool::standard();

  static Method criterion(std::string name, AcquisitionSpec spec);
  static Method make_hybrid(HybridOptions opts = {});
};

struct LoopConfig {
  std::size_t n0 = 9;
  std::size_t budget = 15;
  Method method;
  std::size_t n_per_combo = 100;
  FitOptions fit;
  /// Replication seed; the initial design depends on it alone, so every
  /// method in a replication starts from the same design.
  std::uint64_t seed = 0;
  /// Sample sizes at which the fitted model is kept. The final size is always kept.
  std::vector<std::size_t> checkpoints;
  /// Half-width of the reported contour band (RCC only).
  double contour_epsilon = 0.05;
  std::size_t contour_probe_per_combo = 200;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

struct TraceRecord {
  std::size_t n = 0;  // sample size after adding this point
  MixedPoint chosen;
  double y = 0.0;
  double score = 0.0;
  RegionTag region = RegionTag::Whole;
  double best_min = 0.0;
  double fit_seconds = 0.0;
  double select_seconds = 0.0;
};

struct Trace {
  std::string method;
  std::uint64_t seed = 0;
  Dataset initial;
  Dataset data;
  std::vector<TraceRecord> records;
  std::shared_ptr<const FittedGP> final_model;
  std::map<std::size_t, std::shared_ptr<const FittedGP>> models;  // by sample size
  std::vector<MixedPoint> contour_set;                          // RCC only

  explicit Trace(const DesignSpace& space) : initial(space), data(space) {}
  double fit_seconds() const;
  double select_seconds() const;
};

/// Raised when a fit fails mid-run; carries what was collected so far.
class LoopFailure : public FitFailure {
 public:
  LoopFailure(const std::string& what, Trace partial) : FitFailure(what), partial_(std::move(partial)) {}
  const Trace& partial() const { return partial_; }

 private:
  Trace partial_;
};

/// Stream id of the initial / one-shot design within a replication seed.
inline constexpr std::uint64_t kDesignStream = 0x64657369676eULL;

/// Fit, regenerate the candidate pool, select, evaluate and augment until the
/// budget is reached, then fit once more on the full data.
Trace run_adaptive(const ResponseFn& objective, const DesignSpace& space, const LoopConfig& config);

/// run_adaptive for an RCC method, plus the estimated contour set
/// {w in a dense probe : |mean(w) - a| <= contour_epsilon}.
Trace run_rcc(const ResponseFn& objective, const DesignSpace& space, const LoopConfig& config);

struct OneShotResult {
  Dataset data;
  std::shared_ptr<const FittedGP> model;
  double fit_seconds = 0.0;
};

/// Balanced one-shot design of size n from the replication's design stream, and its fit.
OneShotResult run_oneshot(const ResponseFn& objective, const DesignSpace& space, std::size_t n, std::uint64_t seed,
                          const FitOptions& fit = {});

/// CSV: n, x1..xp, z1..zq, y, score, region, best_min, fit_seconds, select_seconds.
/// Initial-design rows carry region "initial" and NA score.
void write_trace_csv(const std::string& path, const Trace& trace);

}  // namespace amix
