#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "amix/design_space.hpp"
#include "amix/kernel.hpp"
#include "amix/rng.hpp"

namespace amix {

struct Posterior {
  double mean = 0.0;
  double sd = 0.0;
};

class FactorizationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FitFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FitOptions {
  int restarts = 5;
  /// Start points drawn per restart; local searches run from the best
  /// `restarts` of them by objective value.
  int screen_factor = 20;
  int max_iters = 100;
  ParamRanges ranges;
  /// Diagonal jitter as a multiple of the prior variance.
  double jitter = 1e-8;
  /// Jitter escalates by 10x per failed factorization up to this multiple.
  double jitter_cap = 1e-4;
  double tolerance = 1e-6;
};

/// Jittered Gram matrix and its Cholesky factor.
struct GramFactor {
  Eigen::MatrixXd gram;  // includes jitter on the diagonal
  Eigen::MatrixXd lower;
  double jitter = 0.0;   // absolute diagonal value added
};

/// Gram matrix on `pts` with jitter `relative_jitter * prior_variance`,
/// escalated 10x per failed factorization up to `jitter_cap`. Throws
/// FactorizationFailure when every level fails.
GramFactor gram_matrix(const CovarianceModel& kernel, std::span<const MixedPoint> pts,
                       std::span<const double> log_params, double relative_jitter, double jitter_cap);

/// GLS estimate of the constant mean for a factored Gram matrix.
double profile_mu(const GramFactor& factor, const Eigen::VectorXd& y);

/// log|Phi| + (y - mu 1)' Phi^-1 (y - mu 1) with mu profiled; +inf if the
/// Gram matrix cannot be factored.
double neg_log_likelihood(const CovarianceModel& kernel, const Dataset& data, std::span<const double> log_params,
                          double relative_jitter, double jitter_cap = 1e-4);

/// Same objective plus its gradient in the log parameters.
double neg_log_likelihood(const CovarianceModel& kernel, const Dataset& data, std::span<const double> log_params,
                          double relative_jitter, double jitter_cap, Eigen::VectorXd& grad);

/// A Gaussian process conditioned on a dataset at fixed parameters. Immutable;
/// predictions are safe to call concurrently.
class FittedGP {
 public:
  FittedGP(std::shared_ptr<const CovarianceModel> kernel, Dataset data, std::vector<double> log_params,
           double relative_jitter = 1e-8, double jitter_cap = 1e-4);

  const CovarianceModel& kernel() const { return *kernel_; }
  std::shared_ptr<const CovarianceModel> kernel_ptr() const { return kernel_; }
  const Dataset& data() const { return data_; }
  const std::vector<double>& log_params() const { return log_params_; }
  double mu() const { return mu_; }
  double prior_variance() const { return prior_var_; }
  double jitter() const { return factor_.jitter; }
  double nll() const { return nll_; }
  const Eigen::MatrixXd& cholesky() const { return factor_.lower; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  const Eigen::VectorXd& phiinv_one() const { return phiinv_one_; }

  Posterior predict(const MixedPoint& w) const;
  std::vector<Posterior> predict(std::span<const MixedPoint> ws) const;
  /// Posterior variance before clamping at zero.
  std::vector<double> raw_variance(std::span<const MixedPoint> ws) const;

  /// Seed of the stream that produced the fit, for audit output.
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

 private:
  std::shared_ptr<const CovarianceModel> kernel_;
  Dataset data_;
  std::vector<double> log_params_;
  GramFactor factor_;
  double mu_ = 0.0;
  double prior_var_ = 0.0;
  double nll_ = 0.0;
  double one_phiinv_one_ = 0.0;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd phiinv_one_;
};

/// Multi-start bounded quasi-Newton maximum likelihood. Candidate start
/// points are uniform over the log-parameter box and screened by objective
/// value before the local searches. Throws FitFailure only if no start
/// point can be factored.
FittedGP fit(std::shared_ptr<const CovarianceModel> kernel, const Dataset& data, const FitOptions& opts,
             RngStream rng);

/// EzGP fit on the dataset's own design space.
FittedGP fit_ezgp(const Dataset& data, const FitOptions& opts, RngStream rng);

/// Audit document: kernel, parameters, mean, jitter, nll, seed.
nlohmann::json to_json(const FittedGP& model);

}  // namespace amix
