#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "amix/adaptive_loop.hpp"
#include "amix/benchmarks.hpp"
#include "amix/csv.hpp"
#include "amix/sampling.hpp"

using namespace amix;

namespace {

LoopConfig base_config(Method m, std::size_t n0 = 9, std::size_t budget = 13, std::uint64_t seed = 7) {
  LoopConfig c;
  c.n0 = n0;
  c.budget = budget;
  c.method = std::move(m);
  c.n_per_combo = 30;
  c.fit.restarts = 2;
  c.seed = seed;
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("amix_" + name)).string();
}

}  // namespace

TEST_CASE("zero-iteration budget") {
  const auto prob = make_problem("example1");
  const auto cfg = base_config(Method::criterion("ei", {.kind = Criterion::EI}), 9, 9);
  const auto t = run_adaptive(prob.evaluate, prob.space, cfg);
  CHECK(t.records.empty());
  REQUIRE(t.final_model);
  CHECK(t.final_model->data().size() == 9);
  CHECK(t.data.size() == 9);
}

TEST_CASE("budget, monotone incumbent and pool membership") {
  const auto prob = make_problem("example1");
  for (auto kind : {Criterion::EI, Criterion::LCB, Criterion::ARSD, Criterion::EI_MC}) {
    AcquisitionSpec spec{.kind = kind, .n_levels = 4};
    const auto cfg = base_config(Method::criterion(std::string(to_string(kind)), spec));
    const auto t = run_adaptive(prob.evaluate, prob.space, cfg);
    CHECK(t.data.size() == cfg.budget);
    CHECK(t.records.size() == cfg.budget - cfg.n0);
    double prev = *std::min_element(t.initial.responses().begin(), t.initial.responses().end());
    const RngStream method_rng(cfg.seed, stable_hash(cfg.method.name));
    for (const auto& r : t.records) {
      CHECK(r.best_min <= prev);
      CHECK(r.y == prob.evaluate(r.chosen));
      prev = r.best_min;
      RngStream cand_rng = method_rng.substream(r.n - 1).substream(1);
      const auto pool = candidate_set(prob.space, cfg.n_per_combo, cand_rng);
      CHECK(std::find(pool.begin(), pool.end(), r.chosen) != pool.end());
      CHECK(r.fit_seconds >= 0.0);
      CHECK(r.select_seconds >= 0.0);
    }
  }
}

TEST_CASE("initial design equals the one-shot design at n0") {
  const auto prob = make_problem("example2");
  const auto cfg = base_config(Method::criterion("lcb", {.kind = Criterion::LCB}), 9, 10, 3);
  const auto t = run_adaptive(prob.evaluate, prob.space, cfg);
  const auto os = run_oneshot(prob.evaluate, prob.space, 9, 3, cfg.fit);
  REQUIRE(os.data.size() == 9);
  for (std::size_t i = 0; i < 9; ++i) CHECK(os.data.point(i) == t.initial.point(i));
}

TEST_CASE("deterministic trace bytes") {
  const auto prob = make_problem("example1");
  const auto cfg = base_config(Method::criterion("rcc", {.kind = Criterion::RCC, .a = 1.2}));
  const auto a = temp_path("trace_a.csv"), b = temp_path("trace_b.csv");
  auto scrub = [](const std::string& path) {
    // timing columns are wall-clock; compare everything else
    const auto t = read_csv(path);
    std::string out;
    const auto fit = t.column("fit_seconds"), sel = t.column("select_seconds");
    for (const auto& row : t.rows)
      for (std::size_t i = 0; i < row.size(); ++i)
        if (i != fit && i != sel) out += row[i] + ",";
    return out;
  };
  write_trace_csv(a, run_adaptive(prob.evaluate, prob.space, cfg));
  write_trace_csv(b, run_adaptive(prob.evaluate, prob.space, cfg));
  CHECK(scrub(a) == scrub(b));
  CHECK(slurp(a).rfind("# schema: amix.trace/1", 0) == 0);
  const auto t = read_csv(a);
  CHECK(t.rows.size() == cfg.budget);
  CHECK(t.header.front() == "n");
  CHECK(t.header.back() == "select_seconds");
  std::filesystem::remove(a);
  std::filesystem::remove(b);
}

TEST_CASE("checkpoint models") {
  const auto prob = make_problem("example1");
  auto cfg = base_config(Method::criterion("ecl", {.kind = Criterion::ECL, .a = -0.7}));
  cfg.checkpoints = {10, 12};
  const auto t = run_adaptive(prob.evaluate, prob.space, cfg);
  REQUIRE(t.models.count(10));
  REQUIRE(t.models.count(12));
  REQUIRE(t.models.count(13));
  CHECK(t.models.at(10)->data().size() == 10);
  CHECK(t.models.at(12)->data().size() == 12);
  CHECK(t.models.at(13) == t.final_model);
}

TEST_CASE("rcc on a flat response terminates") {
  DesignSpace space(1, {2});
  const double a = 0.5;
  auto cfg = base_config(Method::criterion("rcc", {.kind = Criterion::RCC, .a = a}), 4, 8);
  cfg.contour_probe_per_combo = 20;
  const auto t = run_rcc([&](const MixedPoint&) { return a; }, space, cfg);
  CHECK(t.data.size() == 8);
  for (const auto& r : t.records) CHECK(r.region == RegionTag::A2);
  CHECK(t.contour_set.size() == 40);
}

TEST_CASE("rcc contour set lies in the band") {
  const auto prob = make_problem("example1");
  auto cfg = base_config(Method::criterion("rcc", {.kind = Criterion::RCC, .a = 1.2}), 9, 15);
  const auto t = run_rcc(prob.evaluate, prob.space, cfg);
  CHECK_FALSE(t.contour_set.empty());
  for (const auto& w : t.contour_set) CHECK(std::abs(t.final_model->predict(w).mean - 1.2) <= cfg.contour_epsilon);
  CHECK_THROWS_AS(run_rcc(prob.evaluate, prob.space, base_config(Method::criterion("ei", {}))), std::invalid_argument);
}

TEST_CASE("hybrid loop") {
  const auto prob = make_problem("example1");
  const auto cfg = base_config(Method::make_hybrid(), 9, 12);
  const auto t = run_adaptive(prob.evaluate, prob.space, cfg);
  CHECK(t.data.size() == 12);
  const auto again = run_adaptive(prob.evaluate, prob.space, cfg);
  for (std::size_t i = 0; i < t.records.size(); ++i) CHECK(t.records[i].chosen == again.records[i].chosen);
}

TEST_CASE("config validation") {
  auto cfg = base_config(Method::criterion("ei", {}), 9, 8);
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = base_config(Method::criterion("ei", {}), 1, 8);
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = base_config(Method::criterion("rcc", {.kind = Criterion::RCC, .delta = -1.0}));
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_THROWS_AS(run_oneshot(example1, DesignSpace(1, {3}), 1, 0), std::invalid_argument);
}

TEST_CASE("partial trace on failure") {
  const auto prob = make_problem("example1");
  auto cfg = base_config(Method::criterion("ei", {}), 9, 12);
  std::size_t calls = 0;
  // non-finite responses make every start point infeasible once they enter the data
  auto f = [&](const MixedPoint& w) { return ++calls > 10 ? std::nan("") : example1(w); };
  try {
    run_adaptive(f, prob.space, cfg);
    FAIL("expected a failure");
  } catch (const LoopFailure& e) {
    CHECK(e.partial().data.size() >= 10);
    CHECK(e.partial().records.size() >= 1);
  }
}
