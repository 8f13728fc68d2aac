#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amix/design_space.hpp"
#include "amix/gp.hpp"
#include "amix/rng.hpp"

namespace amix {

enum class Criterion { EI, LCB, UCB, ARSD, EI_C, ECL, RCC, ARSD_C, LCB_C, EI_MC, EI_SC };

std::string_view to_string(Criterion c);
std::optional<Criterion> parse_criterion(std::string_view name);
/// True for criteria that need a contour level `a`.
bool needs_contour_level(Criterion c);

struct AcquisitionSpec {
  Criterion kind = Criterion::EI;
  double a = 0.0;            // contour level
  double rho = 2.0;          // LCB / ARSD trade-off
  double alpha_conf = 0.05;  // confidence level inside beta0n
  double alpha_eps = 1.96;   // epsilon = alpha_eps * sd for contour improvement
  double delta = 0.05;       // RCC tie-break floor
  std::vector<double> levels;  // explicit EI-MC levels; empty means estimate
  int n_levels = 10;           // EI-MC level count when estimated

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

enum class RegionTag { Whole, A1, A2, ArsdRegion };
std::string_view to_string(RegionTag t);

struct Selection {
  std::size_t index = 0;
  MixedPoint chosen;
  double score = 0.0;
  RegionTag region = RegionTag::Whole;
};

// Scalar criteria -----------------------------------------------------------

double normal_pdf(double u);
double normal_cdf(double u);

/// Expected improvement below f_min.
double ei_min(const Posterior& post, double f_min);
double lcb(const Posterior& post, double rho);
double ucb(const Posterior& post, double rho);
/// 2 ln(pi^2 n^2 M / (6 alpha)).
double beta0n(double n, double m, double alpha_conf);
/// Expected contour improvement with epsilon = alpha_eps * sd.
double ei_contour(const Posterior& post, double a, double alpha_eps);
/// Binary entropy (nats) of P(Y > a).
double ecl(const Posterior& post, double a);
/// Sum of ei_contour over the levels.
double ei_mc(const Posterior& post, std::span<const double> levels, double alpha_eps);

// Selection over a scored pool ---------------------------------------------

/// Model-independent inputs a selection needs.
struct SelectionContext {
  std::size_t n = 1;             // current sample size
  std::size_t combinations = 1;  // M
  double f_min = 0.0;            // best observed response
};

/// Each selector breaks ties by lowest candidate index.
Selection select_ei(std::span<const Posterior> posts, double f_min);
Selection select_lcb(std::span<const Posterior> posts, double rho);
Selection select_ucb(std::span<const Posterior> posts, double rho);
Selection arsd_select(std::span<const Posterior> posts, double rho, double beta);
Selection ei_contour_select(std::span<const Posterior> posts, double a, double alpha_eps);
Selection ecl_select(std::span<const Posterior> posts, double a);
Selection rcc_select(std::span<const Posterior> posts, double a, double beta, double delta);
Selection lcb_c_select(std::span<const Posterior> posts, double a, double rho);
Selection arsd_c_select(std::span<const Posterior> posts, double a, double rho, double beta);
Selection ei_mc_select(std::span<const Posterior> posts, std::span<const double> levels, double alpha_eps);
Selection ei_sc_select(std::span<const Posterior> posts, double alpha_eps);

/// RCC groups: A1 = {|mean - a| - sqrt(beta) sd > 0}, A2 the complement.
std::vector<RegionTag> rcc_partition(std::span<const Posterior> posts, double a, double beta);

/// c equally spaced levels spanning the predicted range over a probe design of
/// 1000 p points (at least 1000 when p = 0).
std::vector<double> estimate_contour_levels(const FittedGP& model, int c, RngStream& rng);

/// Dispatch on spec.kind. `levels` supplies EI-MC levels (ignored otherwise).
Selection select_from_posteriors(const AcquisitionSpec& spec, std::span<const Posterior> posts,
                                 const SelectionContext& ctx, std::span<const double> levels = {});

/// Predict on the pool, resolve EI-MC levels if needed, and select.
Selection select_next(const FittedGP& model, std::span<const MixedPoint> candidates, const AcquisitionSpec& spec,
                      const SelectionContext& ctx, RngStream& rng);

/// Per-candidate criterion values and region tags, for diagnostics dumps.
struct ScoreTable {
  std::vector<Posterior> posts;
  std::vector<double> scores;
  std::vector<RegionTag> regions;
};
ScoreTable score_candidates(const AcquisitionSpec& spec, std::span<const Posterior> posts,
                            const SelectionContext& ctx, std::span<const double> levels = {});

/// CSV: candidate, x1..xp, z1..zq, mean, sd, score, region.
void write_score_csv(const std::string& path, std::span<const MixedPoint> candidates, const ScoreTable& table);

}  // namespace amix
