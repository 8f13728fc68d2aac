#include "amix/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace amix {

namespace {

inline double sqdist(const std::vector<double>& a, const std::vector<double>& b, std::size_t k) {
  const double d = a[k] - b[k];
  return d * d;
}

}  // namespace

Eigen::MatrixXd CovarianceModel::gram(std::span<const MixedPoint> pts, std::span<const double> log_params) const {
  Eigen::MatrixXd k = cross(pts, pts, log_params);
  // cross() evaluates both triangles; force exact symmetry
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j) k(j, i) = k(i, j);
  return k;
}

std::size_t EzGPParams::count() const {
  std::size_t n = 2 + static_cast<std::size_t>(theta0.size()) + factors.size();
  for (const auto& f : factors) n += static_cast<std::size_t>(f.theta.size());
  return n;
}

// ---------------------------------------------------------------- EzGP

EzGPKernel::EzGPKernel(DesignSpace space) : space_(std::move(space)) {
  const std::size_t p = space_.p();
  std::size_t off = 1 + p;
  for (std::size_t h = 0; h < space_.q(); ++h) {
    block_offset_.push_back(off);
    off += 1 + p * static_cast<std::size_t>(space_.levels(h));
  }
  num_params_ = off;
  std::size_t sum_m = 0;
  for (int m : space_.levels()) sum_m += static_cast<std::size_t>(m);
  // mu is the one parameter not carried in the log vector
  if (num_params_ + 1 != 2 + p + space_.q() + p * sum_m)
    throw std::logic_error("EzGP parameter count mismatch");
}

LogBounds EzGPKernel::bounds(double response_variance, const ParamRanges& r) const {
  const double v = response_variance > 0.0 ? response_variance : 1.0;
  const double vlo = std::log(r.var_lower * v), vhi = std::log(r.var_upper * v);
  const double tlo = std::log(r.theta_lower), thi = std::log(r.theta_upper);
  LogBounds b{std::vector<double>(num_params_, tlo), std::vector<double>(num_params_, thi)};
  b.lower[0] = vlo;
  b.upper[0] = vhi;
  for (std::size_t off : block_offset_) {
    b.lower[off] = vlo;
    b.upper[off] = vhi;
  }
  return b;
}

EzGPParams EzGPKernel::unpack(std::span<const double> lp, double mu) const {
  if (lp.size() != num_params_) throw std::invalid_argument("EzGP: wrong parameter vector length");
  const std::size_t p = space_.p();
  EzGPParams out;
  out.mu = mu;
  out.var0 = std::exp(lp[0]);
  out.theta0.resize(static_cast<Eigen::Index>(p));
  for (std::size_t k = 0; k < p; ++k) out.theta0(static_cast<Eigen::Index>(k)) = std::exp(lp[1 + k]);
  for (std::size_t h = 0; h < space_.q(); ++h) {
    const std::size_t off = block_offset_[h];
    const auto m = static_cast<std::size_t>(space_.levels(h));
    EzGPParams::FactorBlock blk;
    blk.var = std::exp(lp[off]);
    blk.theta.resize(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(m));
    for (std::size_t l = 0; l < m; ++l)
      for (std::size_t k = 0; k < p; ++k)
        blk.theta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) = std::exp(lp[off + 1 + l * p + k]);
    out.factors.push_back(std::move(blk));
  }
  if (out.count() != num_params_ + 1) throw std::logic_error("EzGP parameter count mismatch");
  return out;
}

std::vector<double> EzGPKernel::pack(const EzGPParams& params) const {
  const std::size_t p = space_.p();
  if (params.count() != num_params_ + 1 || static_cast<std::size_t>(params.theta0.size()) != p)
    throw std::invalid_argument("EzGP: parameter shape does not match the design space");
  std::vector<double> lp(num_params_);
  lp[0] = std::log(params.var0);
  for (std::size_t k = 0; k < p; ++k) lp[1 + k] = std::log(params.theta0(static_cast<Eigen::Index>(k)));
  for (std::size_t h = 0; h < space_.q(); ++h) {
    const std::size_t off = block_offset_[h];
    const auto& blk = params.factors[h];
    lp[off] = std::log(blk.var);
    for (Eigen::Index l = 0; l < blk.theta.cols(); ++l)
      for (Eigen::Index k = 0; k < blk.theta.rows(); ++k)
        lp[off + 1 + static_cast<std::size_t>(l) * p + static_cast<std::size_t>(k)] = std::log(blk.theta(k, l));
  }
  return lp;
}

double EzGPKernel::prior_variance(std::span<const double> lp) const {
  double v = std::exp(lp[0]);
  for (std::size_t off : block_offset_) v += std::exp(lp[off]);
  return v;
}

Eigen::VectorXd EzGPKernel::prior_variance_gradient(std::span<const double> lp) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_params_));
  g(0) = std::exp(lp[0]);
  for (std::size_t off : block_offset_) g(static_cast<Eigen::Index>(off)) = std::exp(lp[off]);
  return g;
}

Eigen::MatrixXd EzGPKernel::cross(std::span<const MixedPoint> a, std::span<const MixedPoint> b,
                                  std::span<const double> lp) const {
  const EzGPParams par = unpack(lp);
  const std::size_t p = space_.p(), q = space_.q();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  std::vector<double> d2(p);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      double s0 = 0.0;
      for (std::size_t k = 0; k < p; ++k) {
        d2[k] = sqdist(a[i].x, b[j].x, k);
        s0 += par.theta0(static_cast<Eigen::Index>(k)) * d2[k];
      }
      double v = par.var0 * std::exp(-s0);
      for (std::size_t h = 0; h < q; ++h) {
        if (a[i].z[h] != b[j].z[h]) continue;
        const auto col = par.factors[h].theta.col(a[i].z[h] - 1);
        double s = 0.0;
        for (std::size_t k = 0; k < p; ++k) s += col(static_cast<Eigen::Index>(k)) * d2[k];
        v += par.factors[h].var * std::exp(-s);
      }
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return out;
}

Eigen::VectorXd EzGPKernel::weighted_gradient(std::span<const MixedPoint> pts, std::span<const double> lp,
                                              const Eigen::MatrixXd& weights) const {
  const EzGPParams par = unpack(lp);
  const std::size_t p = space_.p(), q = space_.q();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_params_));
  std::vector<double> d2(p);
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double w = (i == j ? 1.0 : 2.0) * weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      double s0 = 0.0;
      for (std::size_t k = 0; k < p; ++k) {
        d2[k] = sqdist(pts[i].x, pts[j].x, k);
        s0 += par.theta0(static_cast<Eigen::Index>(k)) * d2[k];
      }
      const double t0 = par.var0 * std::exp(-s0);
      g(0) += w * t0;
      for (std::size_t k = 0; k < p; ++k)
        g(static_cast<Eigen::Index>(1 + k)) -= w * t0 * par.theta0(static_cast<Eigen::Index>(k)) * d2[k];
      for (std::size_t h = 0; h < q; ++h) {
        if (pts[i].z[h] != pts[j].z[h]) continue;
        const auto l = static_cast<std::size_t>(pts[i].z[h] - 1);
        const auto col = par.factors[h].theta.col(static_cast<Eigen::Index>(l));
        double s = 0.0;
        for (std::size_t k = 0; k < p; ++k) s += col(static_cast<Eigen::Index>(k)) * d2[k];
        const double th = par.factors[h].var * std::exp(-s);
        const std::size_t off = block_offset_[h];
        g(static_cast<Eigen::Index>(off)) += w * th;
        for (std::size_t k = 0; k < p; ++k)
          g(static_cast<Eigen::Index>(off + 1 + l * p + k)) -= w * th * col(static_cast<Eigen::Index>(k)) * d2[k];
      }
    }
  }
  return g;
}

double kernel_phi(const DesignSpace& space, const MixedPoint& wi, const MixedPoint& wj, const EzGPParams& params) {
  const EzGPKernel kernel(space);
  const auto lp = kernel.pack(params);
  const MixedPoint a[] = {wi};
  const MixedPoint b[] = {wj};
  return kernel.cross(a, b, lp)(0, 0);
}

// ---------------------------------------------------------------- multiplicative

MultiplicativeKernel::MultiplicativeKernel(DesignSpace space) : space_(std::move(space)) {}

LogBounds MultiplicativeKernel::bounds(double response_variance, const ParamRanges& r) const {
  const double v = response_variance > 0.0 ? response_variance : 1.0;
  const std::size_t p = space_.p();
  LogBounds b{std::vector<double>(num_params()), std::vector<double>(num_params())};
  b.lower[0] = std::log(r.var_lower * v);
  b.upper[0] = std::log(r.var_upper * v);
  for (std::size_t k = 0; k < p; ++k) {
    b.lower[1 + k] = std::log(r.theta_lower);
    b.upper[1 + k] = std::log(r.theta_upper);
  }
  for (std::size_t h = 0; h < space_.q(); ++h) {
    b.lower[1 + p + h] = std::log(r.rho_lower);
    b.upper[1 + p + h] = std::log(r.rho_upper);
  }
  return b;
}

double MultiplicativeKernel::prior_variance(std::span<const double> lp) const { return std::exp(lp[0]); }

Eigen::VectorXd MultiplicativeKernel::prior_variance_gradient(std::span<const double> lp) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_params()));
  g(0) = std::exp(lp[0]);
  return g;
}

Eigen::MatrixXd MultiplicativeKernel::cross(std::span<const MixedPoint> a, std::span<const MixedPoint> b,
                                            std::span<const double> lp) const {
  const std::size_t p = space_.p(), q = space_.q();
  const double var = std::exp(lp[0]);
  std::vector<double> theta(p), rho(q);
  for (std::size_t k = 0; k < p; ++k) theta[k] = std::exp(lp[1 + k]);
  for (std::size_t h = 0; h < q; ++h) rho[h] = std::exp(lp[1 + p + h]);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < p; ++k) s += theta[k] * sqdist(a[i].x, b[j].x, k);
      double c = var * std::exp(-s);
      for (std::size_t h = 0; h < q; ++h)
        if (a[i].z[h] != b[j].z[h]) c *= rho[h];
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
    }
  }
  return out;
}

Eigen::VectorXd MultiplicativeKernel::weighted_gradient(std::span<const MixedPoint> pts, std::span<const double> lp,
                                                        const Eigen::MatrixXd& weights) const {
  const std::size_t p = space_.p(), q = space_.q();
  const double var = std::exp(lp[0]);
  std::vector<double> theta(p), rho(q);
  for (std::size_t k = 0; k < p; ++k) theta[k] = std::exp(lp[1 + k]);
  for (std::size_t h = 0; h < q; ++h) rho[h] = std::exp(lp[1 + p + h]);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_params()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double w = (i == j ? 1.0 : 2.0) * weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      double s = 0.0;
      for (std::size_t k = 0; k < p; ++k) s += theta[k] * sqdist(pts[i].x, pts[j].x, k);
      double c = var * std::exp(-s);
      for (std::size_t h = 0; h < q; ++h)
        if (pts[i].z[h] != pts[j].z[h]) c *= rho[h];
      g(0) += w * c;
      for (std::size_t k = 0; k < p; ++k)
        g(static_cast<Eigen::Index>(1 + k)) -= w * c * theta[k] * sqdist(pts[i].x, pts[j].x, k);
      for (std::size_t h = 0; h < q; ++h)
        if (pts[i].z[h] != pts[j].z[h]) g(static_cast<Eigen::Index>(1 + p + h)) += w * c;
    }
  }
  return g;
}

}  // namespace amix
