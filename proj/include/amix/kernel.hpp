#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "amix/design_space.hpp"

namespace amix {

/// Natural-scale parameter ranges. Variance ranges are multiples of the
/// response sample variance.
struct ParamRanges {
  double theta_lower = 1e-3;
  double theta_upper = 1e3;
  double var_lower = 1e-6;
  double var_upper = 1e2;
  double rho_lower = 1e-3;
  double rho_upper = 0.999;
};

/// Box constraints on a log-scale parameter vector.
struct LogBounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

/// A mixed-input covariance family with a log-scale parameter vector. The
/// constant mean is not part of the vector; it is profiled out by the fit.
class CovarianceModel {
 public:
  virtual ~CovarianceModel() = default;

  virtual std::string name() const = 0;
  virtual const DesignSpace& space() const = 0;
  virtual std::size_t num_params() const = 0;
  /// Bounds given the sample variance of the responses.
  virtual LogBounds bounds(double response_variance, const ParamRanges& ranges = {}) const = 0;

  /// Covariance at zero distance; identical for every point.
  virtual double prior_variance(std::span<const double> log_params) const = 0;
  /// d prior_variance / d log_params.
  virtual Eigen::VectorXd prior_variance_gradient(std::span<const double> log_params) const = 0;

  /// rows(a) x rows(b) covariance block.
  virtual Eigen::MatrixXd cross(std::span<const MixedPoint> a, std::span<const MixedPoint> b,
                                std::span<const double> log_params) const = 0;

  /// Symmetric Gram matrix on `pts`, no jitter.
  virtual Eigen::MatrixXd gram(std::span<const MixedPoint> pts, std::span<const double> log_params) const;

  /// g_j = sum_{a,b} weights(a,b) * dK(pts_a, pts_b) / d log_params_j for symmetric `weights`.
  virtual Eigen::VectorXd weighted_gradient(std::span<const MixedPoint> pts, std::span<const double> log_params,
                                            const Eigen::MatrixXd& weights) const = 0;
};

/// EzGP parameters on their natural scale.
struct EzGPParams {
  struct FactorBlock {
    double var = 1.0;
    Eigen::MatrixXd theta;  // p x m_h, column l-1 holds the length-scale weights for level l
  };

  double mu = 0.0;
  double var0 = 1.0;
  Eigen::VectorXd theta0;
  std::vector<FactorBlock> factors;

  /// 2 + p + q + p * sum(m_h).
  std::size_t count() const;
};

/// Additive EzGP covariance: a shared Gaussian component on x plus, for each
/// factor, a level-specific Gaussian component switched on only when both
/// points share that level.
///
/// Log-parameter layout: [log var0, log theta0(1..p), then per factor h:
/// log var_h, log Theta_h column by column].
class EzGPKernel final : public CovarianceModel {
 public:
  explicit EzGPKernel(DesignSpace space);

  std::string name() const override { return "ezgp"; }
  const DesignSpace& space() const override { return space_; }
  std::size_t num_params() const override { return num_params_; }
  LogBounds bounds(double response_variance, const ParamRanges& ranges = {}) const override;
  double prior_variance(std::span<const double> log_params) const override;
  Eigen::VectorXd prior_variance_gradient(std::span<const double> log_params) const override;
  Eigen::MatrixXd cross(std::span<const MixedPoint> a, std::span<const MixedPoint> b,
                        std::span<const double> log_params) const override;
  Eigen::VectorXd weighted_gradient(std::span<const MixedPoint> pts, std::span<const double> log_params,
                                    const Eigen::MatrixXd& weights) const override;

  /// Natural-scale view; mu is supplied separately since it is not a kernel parameter.
  EzGPParams unpack(std::span<const double> log_params, double mu = 0.0) const;
  std::vector<double> pack(const EzGPParams& params) const;

  std::size_t var_index(std::size_t factor) const { return block_offset_[factor]; }

 private:
  DesignSpace space_;
  std::size_t num_params_;
  std::vector<std::size_t> block_offset_;  // start of factor h's block
};

/// Multiplicative covariance: var * exp(-sum theta_k dx_k^2) * prod_h c_h, with
/// c_h = 1 on equal levels and rho_h in (0,1) otherwise.
///
/// Log-parameter layout: [log var, log theta(1..p), log rho(1..q)].
class MultiplicativeKernel final : public CovarianceModel {
 public:
  explicit MultiplicativeKernel(DesignSpace space);

  std::string name() const override { return "multiplicative"; }
  const DesignSpace& space() const override { return space_; }
  std::size_t num_params() const override { return 1 + space_.p() + space_.q(); }
  LogBounds bounds(double response_variance, const ParamRanges& ranges = {}) const override;
  double prior_variance(std::span<const double> log_params) const override;
  Eigen::VectorXd prior_variance_gradient(std::span<const double> log_params) const override;
  Eigen::MatrixXd cross(std::span<const MixedPoint> a, std::span<const MixedPoint> b,
                        std::span<const double> log_params) const override;
  Eigen::VectorXd weighted_gradient(std::span<const MixedPoint> pts, std::span<const double> log_params,
                                    const Eigen::MatrixXd& weights) const override;

 private:
  DesignSpace space_;
};

/// EzGP covariance between two points for explicit parameters.
double kernel_phi(const DesignSpace& space, const MixedPoint& wi, const MixedPoint& wj, const EzGPParams& params);

}  // namespace amix
