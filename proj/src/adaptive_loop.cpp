#include "amix/adaptive_loop.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "amix/csv.hpp"
#include "amix/sampling.hpp"

namespace amix {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double min_response(const Dataset& d) {
  const auto& y = d.responses();
  return y.empty() ? std::numeric_limits<double>::infinity() : *std::min_element(y.begin(), y.end());
}

double max_response(const Dataset& d) {
  const auto& y = d.responses();
  return y.empty() ? -std::numeric_limits<double>::infinity() : *std::max_element(y.begin(), y.end());
}

std::vector<MixedPoint> fresh_candidates(const DesignSpace& space, const Dataset& data, std::size_t per_combo,
                                         RngStream& rng) {
  auto pool = candidate_set(space, per_combo, rng);
  std::erase_if(pool, [&](const MixedPoint& w) { return data.contains(w); });
  if (pool.empty()) throw std::runtime_error("candidate pool exhausted by existing design points");
  return pool;
}

}  // namespace

Method Method::criterion(std::string name, AcquisitionSpec spec) {
  Method m;
  m.name = std::move(name);
  m.spec = std::move(spec);
  return m;
}

Method Method::make_hybrid(HybridOptions opts) {
  Method m;
  m.name = "hybrid";
  m.hybrid = true;
  m.hybrid_opts = opts;
  return m;
}

void LoopConfig::validate() const {
  if (n0 < 2) throw std::invalid_argument("n0 must be >= 2");
  if (budget < n0) throw std::invalid_argument("budget must be >= n0");
  if (n_per_combo < 1) throw std::invalid_argument("n_per_combo must be >= 1");
  if (!(contour_epsilon > 0.0)) throw std::invalid_argument("contour_epsilon must be > 0");
  if (method.name.empty()) throw std::invalid_argument("method name is empty");
  if (method.hybrid) {
    if (method.pool.members.empty()) throw std::invalid_argument("hybrid kernel pool is empty");
    if (method.hybrid_opts.c < 0.0) throw std::invalid_argument("hybrid C must be >= 0");
  } else {
    method.spec.validate();
  }
}

double Trace::fit_seconds() const {
  double s = 0.0;
  for (const auto& r : records) s += r.fit_seconds;
  return s;
}

double Trace::select_seconds() const {
  double s = 0.0;
  for (const auto& r : records) s += r.select_seconds;
  return s;
}

Trace run_adaptive(const ResponseFn& objective, const DesignSpace& space, const LoopConfig& config) {
  config.validate();
  Trace trace(space);
  trace.method = config.method.name;
  trace.seed = config.seed;

  RngStream design_rng(config.seed, kDesignStream);
  for (const auto& w : initial_design(space, config.n0, design_rng)) trace.initial.add(w, objective(w));
  trace.data = trace.initial;

  const RngStream method_rng(config.seed, stable_hash(config.method.name));
  const std::size_t combos = space.combinations();
  const double worst_init = max_response(trace.initial);
  McTree tree(space);
  double best = min_response(trace.data);

  auto keep = [&](std::size_t n, std::shared_ptr<const FittedGP> m) {
    if (std::find(config.checkpoints.begin(), config.checkpoints.end(), n) != config.checkpoints.end())
      trace.models[n] = std::move(m);
  };

  try {
    for (std::size_t n = config.n0; n < config.budget; ++n) {
      RngStream step = method_rng.substream(n);
      RngStream cand_rng = step.substream(1), fit_rng = step.substream(2), sel_rng = step.substream(3);
      TraceRecord rec;
      if (config.method.hybrid) {
        const auto t0 = Clock::now();
        const auto cands = fresh_candidates(space, trace.data, config.n_per_combo, cand_rng);
        const auto choice = hybrid_step(tree, config.method.pool, trace.data, cands, n - config.n0 + 1, config.budget,
                                        config.method.hybrid_opts, config.fit, sel_rng);
        const double total = seconds_since(t0);
        rec.fit_seconds = choice.fit_seconds;
        rec.select_seconds = std::max(0.0, total - choice.fit_seconds);
        rec.chosen = choice.chosen;
        rec.score = choice.score;
        keep(n, choice.model);
        rec.y = objective(rec.chosen);
        best = std::min(best, rec.y);
        backprop(tree, choice.leaf, hybrid_reward(worst_init, best, rec.y));
      } else {
        auto t0 = Clock::now();
        auto model = std::make_shared<const FittedGP>(fit_ezgp(trace.data, config.fit, fit_rng));
        rec.fit_seconds = seconds_since(t0);
        keep(n, model);
        t0 = Clock::now();
        const auto cands = fresh_candidates(space, trace.data, config.n_per_combo, cand_rng);
        const SelectionContext ctx{n, combos, min_response(trace.data)};
        const auto sel = select_next(*model, cands, config.method.spec, ctx, sel_rng);
        rec.select_seconds = seconds_since(t0);
        rec.chosen = sel.chosen;
        rec.score = sel.score;
        rec.region = sel.region;
        rec.y = objective(rec.chosen);
        best = std::min(best, rec.y);
      }
      rec.n = n + 1;
      rec.best_min = best;
      trace.data.add(rec.chosen, rec.y);
      trace.records.push_back(std::move(rec));
    }
    RngStream final_rng = method_rng.substream(config.budget).substream(2);
    trace.final_model = std::make_shared<const FittedGP>(fit_ezgp(trace.data, config.fit, final_rng));
    trace.models[config.budget] = trace.final_model;
  } catch (const FitFailure& e) {
    throw LoopFailure(e.what(), std::move(trace));
  }
  return trace;
}

Trace run_rcc(const ResponseFn& objective, const DesignSpace& space, const LoopConfig& config) {
  if (config.method.hybrid || config.method.spec.kind != Criterion::RCC)
    throw std::invalid_argument("run_rcc needs an RCC method");
  Trace trace = run_adaptive(objective, space, config);
  RngStream probe_rng(config.seed, stable_hash("contour-probe"));
  const auto probe = candidate_set(space, config.contour_probe_per_combo, probe_rng);
  const auto posts = trace.final_model->predict(probe);
  for (std::size_t i = 0; i < probe.size(); ++i)
    if (std::abs(posts[i].mean - config.method.spec.a) <= config.contour_epsilon) trace.contour_set.push_back(probe[i]);
  return trace;
}

OneShotResult run_oneshot(const ResponseFn& objective, const DesignSpace& space, std::size_t n, std::uint64_t seed,
                          const FitOptions& fit) {
  if (n < 2) throw std::invalid_argument("one-shot size must be >= 2");
  RngStream design_rng(seed, kDesignStream);
  OneShotResult out{Dataset(space), nullptr, 0.0};
  for (const auto& w : oneshot_design(space, n, design_rng)) out.data.add(w, objective(w));
  const auto t0 = Clock::now();
  out.model = std::make_shared<const FittedGP>(fit_ezgp(out.data, fit, RngStream(seed, stable_hash("oneshot")).substream(n)));
  out.fit_seconds = seconds_since(t0);
  return out;
}

void write_trace_csv(const std::string& path, const Trace& trace) {
  const auto& space = trace.data.space();
  std::vector<std::string> header{"n"};
  for (std::size_t k = 0; k < space.p(); ++k) header.push_back("x" + std::to_string(k + 1));
  for (std::size_t k = 0; k < space.q(); ++k) header.push_back("z" + std::to_string(k + 1));
  for (const char* c : {"y", "score", "region", "best_min", "fit_seconds", "select_seconds"}) header.emplace_back(c);
  CsvWriter w(path, "amix.trace/1", header);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trace.initial.size(); ++i) {
    const auto& pt = trace.initial.point(i);
    best = std::min(best, trace.initial.response(i));
    w << i + 1;
    for (double x : pt.x) w << x;
    for (int z : pt.z) w << z;
    w << trace.initial.response(i) << std::numeric_limits<double>::quiet_NaN() << std::string("initial") << best << 0.0
      << 0.0;
    w.end_row();
  }
  for (const auto& r : trace.records) {
    w << r.n;
    for (double x : r.chosen.x) w << x;
    for (int z : r.chosen.z) w << z;
    w << r.y << r.score << std::string(to_string(r.region)) << r.best_min << r.fit_seconds << r.select_seconds;
    w.end_row();
  }
}

}  // namespace amix
