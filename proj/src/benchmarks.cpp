#include "amix/benchmarks.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <map>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "amix/sampling.hpp"

namespace amix {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_shape(const MixedPoint& w, std::size_t p, std::size_t q, const char* name) {
  if (w.x.size() != p || w.z.size() != q) throw std::invalid_argument(std::string(name) + ": wrong input shape");
}

int level(const MixedPoint& w, std::size_t h) {
  const int z = w.z[h];
  if (z < 1 || z > 3) throw std::invalid_argument("level out of range");
  return z;
}

}  // namespace

double example1(const MixedPoint& w) {
  require_shape(w, 1, 1, "example1");
  const double x = w.x[0];
  switch (level(w, 0)) {
    case 1:
      return 2.0 - std::cos(kTwoPi * x);
    case 2:
      return 1.0 - std::cos(2.0 * kTwoPi * x);
    default:
      return std::cos(kTwoPi * x);
  }
}

double example2(const MixedPoint& w) {
  require_shape(w, 2, 2, "example2");
  const double x1 = w.x[0], x2 = w.x[1];
  double i = 0.0, g = 0.0;
  switch (level(w, 0)) {
    case 1: i = x1 + x2 * x2; break;
    case 2: i = x1 * x1 + x2; break;
    default: i = x1 * x1 + x2 * x2; break;
  }
  switch (level(w, 1)) {
    case 1: g = std::cos(x1) + std::cos(2.0 * x2); break;
    case 2: g = std::cos(2.0 * x1) + std::cos(x2); break;
    default: g = std::cos(2.0 * x1) + std::cos(2.0 * x2); break;
  }
  return i + g;
}

double example3(const MixedPoint& w) {
  require_shape(w, 3, 3, "example3");
  const double x1 = w.x[0], x2 = w.x[1], x3 = w.x[2];
  double i = 0.0, g = 0.0, h = 0.0;
  switch (level(w, 0)) {
    case 1: i = x1 + x2 * x2 + x3; break;
    case 2: i = x1 * x1 + x2 + x3; break;
    default: i = x3 + x1 + x2 * x2; break;
  }
  if (level(w, 1) < 3)
    g = std::cos(x1) + std::cos(2.0 * x2) + std::cos(x3);
  else
    g = std::cos(2.0 * x1) + std::cos(x2) + std::cos(x3);
  if (level(w, 2) < 3)
    h = std::sin(x1) + std::sin(2.0 * x2) + std::sin(x3);
  else
    h = std::sin(2.0 * x1) + std::sin(x2) + std::sin(x3);
  return i + g + h;
}

TestProblem make_problem(std::string_view name) {
  if (name == "example1") {
    TestProblem p{"example1", DesignSpace(1, {3}), example1, -1.0, 3.0};
    p.optim_budgets = {10, 11, 12, 13, 14, 15};
    p.contour_budgets = {11, 13, 15, 17, 19};
    p.contour_levels = {-0.7, 1.2, 2.2};
    p.epsilon = 0.05;
    p.delta = 0.05;
    p.predict_n0 = 10;
    p.predict_budgets = {15, 21};
    return p;
  }
  if (name == "example2") {
    TestProblem p{"example2", DesignSpace(2, {3, 3}), example2, 1.0, 2.7};
    p.optim_budgets = {10, 12, 14, 16, 18};
    p.contour_budgets = {27, 36, 45, 54, 63};
    p.contour_levels = {1.2, 1.7, 2.1};
    p.epsilon = 0.05;
    p.delta = 0.02;
    p.predict_n0 = 20;
    p.predict_budgets = {30, 40};
    return p;
  }
  if (name == "example3") {
    TestProblem p{"example3", DesignSpace(3, {3, 3, 3}), example3, 3.0, 6.7};
    p.optim_budgets = {10, 12, 14, 16, 18};
    p.contour_budgets = {27, 36, 45, 54, 63};
    p.contour_levels = {4.5, 5.5, 6.5};
    p.epsilon = 0.1;
    p.delta = 0.1;
    p.predict_n0 = 30;
    p.predict_budgets = {80, 100};
    return p;
  }
  throw std::invalid_argument("unknown problem '" + std::string(name) + "'");
}

std::vector<std::string> problem_names() { return {"example1", "example2", "example3"}; }

std::vector<double> metric_best_min(std::span<const double> responses) {
  std::vector<double> out(responses.begin(), responses.end());
  for (std::size_t i = 1; i < out.size(); ++i) out[i] = std::min(out[i], out[i - 1]);
  return out;
}

ProbeSet make_probe(const TestProblem& problem, std::size_t per_combo, RngStream rng) {
  ProbeSet probe;
  probe.points = candidate_set(problem.space, per_combo, rng);
  probe.truth.reserve(probe.points.size());
  for (const auto& w : probe.points) probe.truth.push_back(problem.evaluate(w));
  return probe;
}

std::optional<double> metric_mc0(const FittedGP& model, const ProbeSet& probe, double a, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("metric_mc0: epsilon must be > 0");
  std::vector<MixedPoint> band;
  std::vector<double> truth;
  for (std::size_t i = 0; i < probe.points.size(); ++i) {
    if (std::abs(probe.truth[i] - a) <= eps) {
      band.push_back(probe.points[i]);
      truth.push_back(probe.truth[i]);
    }
  }
  if (band.empty()) return std::nullopt;
  const auto posts = model.predict(band);
  double s = 0.0;
  for (std::size_t i = 0; i < band.size(); ++i) s += std::abs(truth[i] - posts[i].mean);
  return s / static_cast<double>(band.size());
}

std::optional<double> metric_mc0(const FittedGP& model, const TestProblem& problem, double a, double eps,
                                 std::uint64_t pool_seed) {
  return metric_mc0(model, make_probe(problem, 200, RngStream(pool_seed, stable_hash("mc0-probe"))), a, eps);
}

double metric_rmse(const FittedGP& model, const ProbeSet& test) {
  if (test.points.empty()) throw std::invalid_argument("metric_rmse: empty test set");
  const auto posts = model.predict(test.points);
  double s = 0.0;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    const double e = test.truth[i] - posts[i].mean;
    s += e * e;
  }
  return std::sqrt(s / static_cast<double>(posts.size()));
}

std::string_view to_string(StudyKind k) {
  switch (k) {
    case StudyKind::Optimize:
      return "optimize";
    case StudyKind::Contour:
      return "contour";
    case StudyKind::Predict:
      return "predict";
  }
  return "optimize";
}

void Study::validate() const {
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
  if (budgets.empty()) throw std::invalid_argument("budgets must not be empty");
  if (n0 < 2) throw std::invalid_argument("n0 must be >= 2");
  for (auto b : budgets)
    if (b < n0) throw std::invalid_argument("every budget must be >= n0");
  if (methods.empty() && !include_oneshot) throw std::invalid_argument("no methods selected");
  if (kind == StudyKind::Contour && !(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (jobs < 1) throw std::invalid_argument("jobs must be >= 1");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    if (methods[i].name == kOneShot) throw std::invalid_argument("method name 'oneshot' is reserved");
    for (std::size_t j = 0; j < i; ++j)
      if (methods[j].name == methods[i].name) throw std::invalid_argument("duplicate method '" + methods[i].name + "'");
    if (!methods[i].hybrid) methods[i].spec.validate();
  }
}

std::uint64_t replication_seed(std::uint64_t base_seed, std::size_t r) {
  return mix64(base_seed ^ mix64(0x7265706c ^ static_cast<std::uint64_t>(r)));
}

namespace {

std::vector<std::size_t> sorted_budgets(const Study& s) {
  auto b = s.budgets;
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

struct Probes {
  ProbeSet contour;
  ProbeSet test;
};

Probes probes_for(const Study& study, std::uint64_t seed) {
  Probes p;
  if (study.kind == StudyKind::Contour)
    p.contour = make_probe(study.problem, study.probe_per_combo, RngStream(seed, stable_hash("mc0-probe")));
  if (study.kind == StudyKind::Predict)
    p.test = make_probe(study.problem, study.probe_per_combo, RngStream(seed, stable_hash("rmse-probe")));
  return p;
}

std::optional<double> model_metric(const Study& study, const Probes& probes, const FittedGP& model) {
  if (study.kind == StudyKind::Contour) return metric_mc0(model, probes.contour, study.a, study.epsilon);
  return std::log(metric_rmse(model, probes.test));
}

std::vector<CellResult> run_oneshot_cells(const Study& study, std::size_t r) {
  const auto seed = replication_seed(study.base_seed, r);
  const auto probes = probes_for(study, seed);
  std::vector<CellResult> out;
  for (auto n : sorted_budgets(study)) {
    CellResult c{std::string(kOneShot), n, r, seed};
    try {
      if (study.kind == StudyKind::Optimize) {
        RngStream design_rng(seed, kDesignStream);
        double best = std::numeric_limits<double>::infinity();
        for (const auto& w : oneshot_design(study.problem.space, n, design_rng))
          best = std::min(best, study.problem.evaluate(w));
        c.metric = best;
      } else {
        const auto res = run_oneshot(study.problem.evaluate, study.problem.space, n, seed, study.fit);
        c.fit_seconds = res.fit_seconds;
        c.metric = model_metric(study, probes, *res.model);
      }
    } catch (const std::exception& e) {
      c.error = e.what();
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<CellResult> run_method_cells(const Study& study, const Method& method, std::size_t r,
                                         const TraceSink& sink, std::mutex& sink_mutex) {
  const auto seed = replication_seed(study.base_seed, r);
  const auto budgets = sorted_budgets(study);
  LoopConfig cfg;
  cfg.n0 = study.n0;
  cfg.budget = budgets.back();
  cfg.method = method;
  cfg.n_per_combo = study.n_per_combo;
  cfg.fit = study.fit;
  cfg.seed = seed;
  cfg.contour_epsilon = study.epsilon;
  if (study.kind != StudyKind::Optimize) cfg.checkpoints = budgets;

  std::vector<CellResult> out;
  for (auto n : budgets) out.push_back(CellResult{method.name, n, r, seed});
  std::optional<Trace> trace;
  try {
    trace.emplace(run_adaptive(study.problem.evaluate, study.problem.space, cfg));
  } catch (const LoopFailure& e) {
    trace.emplace(e.partial());
    for (auto& c : out) c.error = e.what();
  } catch (const std::exception& e) {
    for (auto& c : out) c.error = e.what();
    return out;
  }
  const auto probes = probes_for(study, seed);
  const auto best = metric_best_min(trace->data.responses());
  for (auto& c : out) {
    double fit = 0.0, sel = 0.0;
    for (const auto& rec : trace->records) {
      if (rec.n > c.budget) break;
      fit += rec.fit_seconds;
      sel += rec.select_seconds;
    }
    c.fit_seconds = fit;
    c.select_seconds = sel;
    if (!c.error.empty() && trace->data.size() < c.budget) continue;
    c.error.clear();
    try {
      if (study.kind == StudyKind::Optimize) {
        c.metric = best[c.budget - 1];
      } else {
        const auto it = trace->models.find(c.budget);
        if (it == trace->models.end()) throw FitFailure("no model at this budget");
        c.metric = model_metric(study, probes, *it->second);
      }
    } catch (const std::exception& e) {
      c.error = e.what();
    }
  }
  if (sink) {
    std::lock_guard lock(sink_mutex);
    sink(method.name, r, *trace);
  }
  return out;
}

}  // namespace

ReplicationReport replicate(const Study& study, const TraceSink& sink) {
  study.validate();
  const std::size_t n_methods = study.methods.size() + (study.include_oneshot ? 1 : 0);
  const std::size_t tasks = n_methods * study.replications;
  std::vector<std::vector<CellResult>> slots(tasks);
  std::mutex sink_mutex;
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      const std::size_t m = t / study.replications, r = t % study.replications;
      if (study.include_oneshot && m == 0)
        slots[t] = run_oneshot_cells(study, r);
      else
        slots[t] = run_method_cells(study, study.methods[m - (study.include_oneshot ? 1 : 0)], r, sink, sink_mutex);
    }
  };
  const std::size_t workers = std::min(study.jobs, tasks);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
  }

  ReplicationReport report;
  for (auto& s : slots)
    for (auto& c : s) report.cells.push_back(std::move(c));
  report.summary = summarize(study, report.cells);
  return report;
}

std::vector<CellSummary> summarize(const Study& study, const std::vector<CellResult>& cells) {
  std::vector<std::string> order;
  if (study.include_oneshot) order.emplace_back(kOneShot);
  for (const auto& m : study.methods) order.push_back(m.name);
  std::vector<CellSummary> out;
  std::map<std::size_t, double> oneshot_mean;
  for (const auto& name : order) {
    for (auto n : sorted_budgets(study)) {
      CellSummary s{name, n};
      std::vector<double> v;
      double fit = 0.0, sel = 0.0;
      std::size_t timed = 0;
      for (const auto& c : cells) {
        if (c.method != name || c.budget != n) continue;
        if (!c.error.empty()) {
          ++s.failed;
          continue;
        }
        fit += c.fit_seconds;
        sel += c.select_seconds;
        ++timed;
        if (c.metric)
          v.push_back(*c.metric);
        else
          ++s.na;
      }
      s.count = v.size();
      if (timed) {
        s.fit_time_mean = fit / static_cast<double>(timed);
        s.select_time_mean = sel / static_cast<double>(timed);
        const std::size_t added = name == kOneShot ? n : n - study.n0;
        if (added) s.time_per_point = (s.fit_time_mean + s.select_time_mean) / static_cast<double>(added);
      }
      if (!v.empty()) {
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        s.mean = mean;
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        s.sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
        std::sort(v.begin(), v.end());
        const std::size_t k = v.size();
        s.median = k % 2 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
      }
      if (name == kOneShot && s.mean) oneshot_mean[n] = *s.mean;
      if (study.kind == StudyKind::Contour && s.mean && *s.mean > 0.0 && oneshot_mean.count(n))
        s.rel_efficiency = oneshot_mean[n] / *s.mean;
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace amix
