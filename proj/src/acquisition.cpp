#include "amix/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "amix/csv.hpp"
#include "amix/sampling.hpp"

namespace amix {

namespace {

constexpr std::pair<Criterion, std::string_view> kNames[] = {
    {Criterion::EI, "ei"},       {Criterion::LCB, "lcb"},       {Criterion::UCB, "ucb"},
    {Criterion::ARSD, "arsd"},   {Criterion::EI_C, "ei_c"},     {Criterion::ECL, "ecl"},
    {Criterion::RCC, "rcc"},     {Criterion::ARSD_C, "arsd_c"}, {Criterion::LCB_C, "lcb_c"},
    {Criterion::EI_MC, "ei_mc"}, {Criterion::EI_SC, "ei_sc"},
};

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// First index maximizing score over the masked set; npos if the mask is empty.
template <class Score, class Keep>
std::size_t argmax_where(std::size_t n, Score score, Keep keep) {
  std::size_t best = static_cast<std::size_t>(-1);
  double best_v = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (!keep(i)) continue;
    const double v = score(i);
    if (best == static_cast<std::size_t>(-1) || v > best_v) {
      best = i;
      best_v = v;
    }
  }
  return best;
}

template <class Score>
std::size_t argmax(std::size_t n, Score score) {
  return argmax_where(n, score, [](std::size_t) { return true; });
}

void require_nonempty(std::span<const Posterior> posts) {
  if (posts.empty()) throw std::invalid_argument("selection needs a nonempty candidate pool");
}

double contour_distance(const Posterior& p, double a) { return std::abs(p.mean - a); }

}  // namespace

std::string_view to_string(Criterion c) {
  for (const auto& [k, name] : kNames)
    if (k == c) return name;
  return "unknown";
}

std::optional<Criterion> parse_criterion(std::string_view name) {
  for (const auto& [k, n] : kNames)
    if (n == name) return k;
  return std::nullopt;
}

bool needs_contour_level(Criterion c) {
  switch (c) {
    case Criterion::EI_C:
    case Criterion::ECL:
    case Criterion::RCC:
    case Criterion::ARSD_C:
    case Criterion::LCB_C:
      return true;
    default:
      return false;
  }
}

void AcquisitionSpec::validate() const {
  if (!(rho >= 0.0)) throw std::invalid_argument("rho must be >= 0");
  if (!(alpha_conf > 0.0 && alpha_conf < 1.0)) throw std::invalid_argument("alpha_conf must lie in (0,1)");
  if (!(alpha_eps > 0.0)) throw std::invalid_argument("alpha_eps must be > 0");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be > 0");
  if (needs_contour_level(kind) && !std::isfinite(a)) throw std::invalid_argument("contour level a is required");
  if (kind == Criterion::EI_MC) {
    if (levels.empty() && n_levels < 1) throw std::invalid_argument("n_levels must be >= 1");
    for (std::size_t j = 1; j < levels.size(); ++j)
      if (!(levels[j - 1] < levels[j])) throw std::invalid_argument("levels must be strictly increasing");
  }
}

std::string_view to_string(RegionTag t) {
  switch (t) {
    case RegionTag::Whole:
      return "whole";
    case RegionTag::A1:
      return "A1";
    case RegionTag::A2:
      return "A2";
    case RegionTag::ArsdRegion:
      return "arsd_region";
  }
  return "whole";
}

// ---------------------------------------------------------------- scalar criteria

double normal_pdf(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); }

double ei_min(const Posterior& post, double f_min) {
  const double d = f_min - post.mean;
  if (post.sd <= 0.0) return std::max(0.0, d);
  const double u = d / post.sd;
  return std::max(0.0, d * normal_cdf(u) + post.sd * normal_pdf(u));
}

double lcb(const Posterior& post, double rho) { return post.mean - rho * post.sd; }

double ucb(const Posterior& post, double rho) { return post.mean + rho * post.sd; }

double beta0n(double n, double m, double alpha_conf) {
  constexpr double pi2 = std::numbers::pi * std::numbers::pi;
  return 2.0 * std::log(pi2 * n * n * m / (6.0 * alpha_conf));
}

double ei_contour(const Posterior& post, double a, double alpha_eps) {
  const double s = post.sd;
  if (s <= 0.0) return 0.0;
  const double eps = alpha_eps * s;
  const double d = post.mean - a;
  const double u1 = (a - post.mean - eps) / s;
  const double u2 = (a - post.mean + eps) / s;
  const double v = (eps * eps - d * d - s * s) * (normal_cdf(u2) - normal_cdf(u1)) +
                   s * s * (u2 * normal_pdf(u2) - u1 * normal_pdf(u1)) +
                   2.0 * d * s * (normal_pdf(u2) - normal_pdf(u1));
  return std::max(0.0, v);
}

double ecl(const Posterior& post, double a) {
  if (post.sd <= 0.0) return 0.0;
  const double t = (post.mean - a) / post.sd;
  const double p = normal_cdf(t);
  const double q = normal_cdf(-t);
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (q > 0.0) h -= q * std::log(q);
  return std::clamp(h, 0.0, std::numbers::ln2);
}

double ei_mc(const Posterior& post, std::span<const double> levels, double alpha_eps) {
  double s = 0.0;
  for (double a : levels) s += ei_contour(post, a, alpha_eps);
  return s;
}

// ---------------------------------------------------------------- selectors

Selection select_ei(std::span<const Posterior> posts, double f_min) {
  require_nonempty(posts);
  const auto i = argmax(posts.size(), [&](std::size_t k) { return ei_min(posts[k], f_min); });
  return {i, {}, ei_min(posts[i], f_min), RegionTag::Whole};
}

Selection select_lcb(std::span<const Posterior> posts, double rho) {
  require_nonempty(posts);
  const auto i = argmax(posts.size(), [&](std::size_t k) { return -lcb(posts[k], rho); });
  return {i, {}, lcb(posts[i], rho), RegionTag::Whole};
}

Selection select_ucb(std::span<const Posterior> posts, double rho) {
  require_nonempty(posts);
  const auto i = argmax(posts.size(), [&](std::size_t k) { return ucb(posts[k], rho); });
  return {i, {}, ucb(posts[i], rho), RegionTag::Whole};
}

Selection arsd_select(std::span<const Posterior> posts, double rho, double beta) {
  require_nonempty(posts);
  const double b = std::sqrt(beta);
  double min_upper = std::numeric_limits<double>::infinity();
  for (const auto& p : posts) min_upper = std::min(min_upper, p.mean + b * p.sd);
  const auto i = argmax_where(
      posts.size(), [&](std::size_t k) { return -lcb(posts[k], rho); },
      [&](std::size_t k) { return posts[k].mean - b * posts[k].sd <= min_upper; });
  return {i, {}, lcb(posts[i], rho), RegionTag::ArsdRegion};
}

Selection ei_contour_select(std::span<const Posterior> posts, double a, double alpha_eps) {
  require_nonempty(posts);
  const auto i = argmax(posts.size(), [&](std::size_t k) { return ei_contour(posts[k], a, alpha_eps); });
  return {i, {}, ei_contour(posts[i], a, alpha_eps), RegionTag::Whole};
}

Selection ecl_select(std::span<const Posterior> posts, double a) {
  require_nonempty(posts);
  const auto i = argmax(posts.size(), [&](std::size_t k) { return ecl(posts[k], a); });
  return {i, {}, ecl(posts[i], a), RegionTag::Whole};
}

std::vector<RegionTag> rcc_partition(std::span<const Posterior> posts, double a, double beta) {
  const double b = std::sqrt(beta);
  std::vector<RegionTag> out(posts.size());
  for (std::size_t i = 0; i < posts.size(); ++i)
    out[i] = contour_distance(posts[i], a) - b * posts[i].sd > 0.0 ? RegionTag::A1 : RegionTag::A2;
  return out;
}

Selection rcc_select(std::span<const Posterior> posts, double a, double beta, double delta) {
  require_nonempty(posts);
  const double b = std::sqrt(beta);
  const auto groups = rcc_partition(posts, a, beta);
  double min_upper = std::numeric_limits<double>::infinity();
  for (const auto& p : posts) min_upper = std::min(min_upper, contour_distance(p, a) + b * p.sd);

  constexpr auto npos = static_cast<std::size_t>(-1);
  // A1 restricted to candidates whose lower bound beats the best upper bound
  const auto c1 = argmax_where(
      posts.size(), [&](std::size_t k) { return posts[k].sd; },
      [&](std::size_t k) {
        return groups[k] == RegionTag::A1 && contour_distance(posts[k], a) - b * posts[k].sd <= min_upper;
      });
  const auto c2 = argmax_where(
      posts.size(), [&](std::size_t k) { return ecl(posts[k], a); },
      [&](std::size_t k) { return groups[k] == RegionTag::A2; });

  auto ratio = [&](std::size_t k) { return posts[k].sd / std::max(delta, contour_distance(posts[k], a)); };
  std::size_t pick;
  if (c1 == npos) {
    pick = c2;
  } else if (c2 == npos) {
    pick = c1;
  } else {
    const double r1 = ratio(c1), r2 = ratio(c2);
    pick = r1 > r2 ? c1 : r2 > r1 ? c2 : std::min(c1, c2);
  }
  return {pick, {}, ratio(pick), groups[pick]};
}

Selection lcb_c_select(std::span<const Posterior> posts, double a, double rho) {
  require_nonempty(posts);
  auto crit = [&](std::size_t k) { return contour_distance(posts[k], a) - rho * posts[k].sd; };
  const auto i = argmax(posts.size(), [&](std::size_t k) { return -crit(k); });
  return {i, {}, crit(i), RegionTag::Whole};
}

Selection arsd_c_select(std::span<const Posterior> posts, double a, double rho, double beta) {
  require_nonempty(posts);
  const double b = std::sqrt(beta);
  double min_upper = std::numeric_limits<double>::infinity();
  for (const auto& p : posts) min_upper = std::min(min_upper, contour_distance(p, a) + b * p.sd);
  auto crit = [&](std::size_t k) { return contour_distance(posts[k], a) - rho * posts[k].sd; };
  const auto i = argmax_where(
      posts.size(), [&](std::size_t k) { return -crit(k); },
      [&](std::size_t k) { return contour_distance(posts[k], a) - b * posts[k].sd <= min_upper; });
  return {i, {}, crit(i), RegionTag::ArsdRegion};
}

Selection ei_mc_select(std::span<const Posterior> posts, std::span<const double> levels, double alpha_eps) {
  require_nonempty(posts);
  const auto i = argmax(posts.size(), [&](std::size_t k) { return ei_mc(posts[k], levels, alpha_eps); });
  return {i, {}, ei_mc(posts[i], levels, alpha_eps), RegionTag::Whole};
}

Selection ei_sc_select(std::span<const Posterior> posts, double alpha_eps) {
  require_nonempty(posts);
  const auto opt = argmax(posts.size(), [&](std::size_t k) { return posts[k].sd; });
  return ei_contour_select(posts, posts[opt].mean, alpha_eps);
}

std::vector<double> estimate_contour_levels(const FittedGP& model, int c, RngStream& rng) {
  if (c < 1) throw std::invalid_argument("estimate_contour_levels: c must be >= 1");
  const DesignSpace& space = model.data().space();
  const std::size_t n = std::max<std::size_t>(1000, 1000 * space.p());
  const auto probe = oneshot_design(space, n, rng);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& post : model.predict(probe)) {
    lo = std::min(lo, post.mean);
    hi = std::max(hi, post.mean);
  }
  std::vector<double> levels(static_cast<std::size_t>(c));
  if (c == 1) {
    levels[0] = 0.5 * (lo + hi);
    return levels;
  }
  for (int j = 0; j < c; ++j) levels[static_cast<std::size_t>(j)] = lo + (hi - lo) * j / (c - 1);
  // a flat surface collapses the grid; keep the levels strictly increasing
  for (std::size_t j = 1; j < levels.size(); ++j)
    if (!(levels[j] > levels[j - 1])) levels[j] = std::nextafter(levels[j - 1], std::numeric_limits<double>::infinity());
  return levels;
}

Selection select_from_posteriors(const AcquisitionSpec& spec, std::span<const Posterior> posts,
                                 const SelectionContext& ctx, std::span<const double> levels) {
  const auto beta = [&] {
    return beta0n(static_cast<double>(ctx.n), static_cast<double>(ctx.combinations), spec.alpha_conf);
  };
  switch (spec.kind) {
    case Criterion::EI:
      return select_ei(posts, ctx.f_min);
    case Criterion::LCB:
      return select_lcb(posts, spec.rho);
    case Criterion::UCB:
      return select_ucb(posts, spec.rho);
    case Criterion::ARSD:
      return arsd_select(posts, spec.rho, beta());
    case Criterion::EI_C:
      return ei_contour_select(posts, spec.a, spec.alpha_eps);
    case Criterion::ECL:
      return ecl_select(posts, spec.a);
    case Criterion::RCC:
      return rcc_select(posts, spec.a, beta(), spec.delta);
    case Criterion::ARSD_C:
      return arsd_c_select(posts, spec.a, spec.rho, beta());
    case Criterion::LCB_C:
      return lcb_c_select(posts, spec.a, spec.rho);
    case Criterion::EI_MC:
      return ei_mc_select(posts, levels.empty() ? std::span<const double>(spec.levels) : levels, spec.alpha_eps);
    case Criterion::EI_SC:
      return ei_sc_select(posts, spec.alpha_eps);
  }
  throw std::logic_error("unhandled criterion");
}

Selection select_next(const FittedGP& model, std::span<const MixedPoint> candidates, const AcquisitionSpec& spec,
                      const SelectionContext& ctx, RngStream& rng) {
  const auto posts = model.predict(candidates);
  std::vector<double> levels;
  if (spec.kind == Criterion::EI_MC && spec.levels.empty()) levels = estimate_contour_levels(model, spec.n_levels, rng);
  Selection s = select_from_posteriors(spec, posts, ctx, levels);
  s.chosen = candidates[s.index];
  return s;
}

ScoreTable score_candidates(const AcquisitionSpec& spec, std::span<const Posterior> posts,
                            const SelectionContext& ctx, std::span<const double> levels) {
  ScoreTable t;
  t.posts.assign(posts.begin(), posts.end());
  t.scores.resize(posts.size(), kNaN);
  t.regions.assign(posts.size(), RegionTag::Whole);
  const double beta = beta0n(static_cast<double>(ctx.n), static_cast<double>(ctx.combinations), spec.alpha_conf);
  const double b = std::sqrt(beta);
  const auto lv = levels.empty() ? std::span<const double>(spec.levels) : levels;
  double min_upper = std::numeric_limits<double>::infinity();
  for (const auto& p : posts)
    min_upper = std::min(min_upper, spec.kind == Criterion::ARSD ? p.mean + b * p.sd : contour_distance(p, spec.a) + b * p.sd);
  for (std::size_t i = 0; i < posts.size(); ++i) {
    const auto& p = posts[i];
    switch (spec.kind) {
      case Criterion::EI: t.scores[i] = ei_min(p, ctx.f_min); break;
      case Criterion::LCB: t.scores[i] = lcb(p, spec.rho); break;
      case Criterion::UCB: t.scores[i] = ucb(p, spec.rho); break;
      case Criterion::ARSD:
        t.scores[i] = lcb(p, spec.rho);
        if (p.mean - b * p.sd <= min_upper) t.regions[i] = RegionTag::ArsdRegion;
        break;
      case Criterion::EI_C: t.scores[i] = ei_contour(p, spec.a, spec.alpha_eps); break;
      case Criterion::ECL: t.scores[i] = ecl(p, spec.a); break;
      case Criterion::RCC:
        t.scores[i] = p.sd / std::max(spec.delta, contour_distance(p, spec.a));
        t.regions[i] = contour_distance(p, spec.a) - b * p.sd > 0.0 ? RegionTag::A1 : RegionTag::A2;
        break;
      case Criterion::ARSD_C:
        t.scores[i] = contour_distance(p, spec.a) - spec.rho * p.sd;
        if (contour_distance(p, spec.a) - b * p.sd <= min_upper) t.regions[i] = RegionTag::ArsdRegion;
        break;
      case Criterion::LCB_C: t.scores[i] = contour_distance(p, spec.a) - spec.rho * p.sd; break;
      case Criterion::EI_MC: t.scores[i] = ei_mc(p, lv, spec.alpha_eps); break;
      case Criterion::EI_SC: break;  // level depends on the whole pool
    }
  }
  if (spec.kind == Criterion::EI_SC && !posts.empty()) {
    const auto opt = argmax(posts.size(), [&](std::size_t k) { return posts[k].sd; });
    for (std::size_t i = 0; i < posts.size(); ++i) t.scores[i] = ei_contour(posts[i], posts[opt].mean, spec.alpha_eps);
  }
  return t;
}

void write_score_csv(const std::string& path, std::span<const MixedPoint> candidates, const ScoreTable& table) {
  std::vector<std::string> header{"candidate"};
  const std::size_t p = candidates.empty() ? 0 : candidates[0].x.size();
  const std::size_t q = candidates.empty() ? 0 : candidates[0].z.size();
  for (std::size_t k = 0; k < p; ++k) header.push_back("x" + std::to_string(k + 1));
  for (std::size_t k = 0; k < q; ++k) header.push_back("z" + std::to_string(k + 1));
  for (const char* c : {"mean", "sd", "score", "region_tag"}) header.emplace_back(c);
  CsvWriter w(path, "amix.scores/1", header);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    w << i;
    for (double x : candidates[i].x) w << x;
    for (int z : candidates[i].z) w << z;
    w << table.posts[i].mean << table.posts[i].sd << table.scores[i] << std::string(to_string(table.regions[i]));
    w.end_row();
  }
}

}  // namespace amix
