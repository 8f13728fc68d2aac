#include "amix/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace amix {

namespace {

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

BoxResult minimize_box(const Objective& f, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper, const BoxOptions& opts) {
  const Eigen::Index n = x0.size();
  BoxResult res;
  res.x = project(x0, lower, upper);
  Eigen::VectorXd g(n);
  res.value = f(res.x, g);
  res.evaluations = 1;
  if (!std::isfinite(res.value)) throw std::domain_error("minimize_box: infeasible start point");

  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd g_new(n);
  int stalls = 0;
  for (int it = 0; it < opts.max_iters; ++it) {
    res.iterations = it + 1;
    const Eigen::VectorXd pg = res.x - project(res.x - g, lower, upper);
    if (pg.lpNorm<Eigen::Infinity>() < opts.gradient_tol) {
      res.converged = true;
      break;
    }

    std::vector<bool> fixed(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
      fixed[static_cast<std::size_t>(i)] =
          (res.x(i) <= lower(i) && g(i) > 0.0) || (res.x(i) >= upper(i) && g(i) < 0.0);

    auto masked = [&](Eigen::VectorXd d) {
      for (Eigen::Index i = 0; i < n; ++i)
        if (fixed[static_cast<std::size_t>(i)]) d(i) = 0.0;
      return d;
    };
    Eigen::VectorXd gf = masked(g);
    Eigen::VectorXd d = masked(-(h * gf));
    if (gf.dot(d) >= 0.0) {
      h.setIdentity();
      d = -gf;
    }
    const double dn = d.lpNorm<Eigen::Infinity>();
    if (dn == 0.0) {
      res.converged = true;
      break;
    }
    double t = dn > opts.max_step ? opts.max_step / dn : 1.0;

    bool accepted = false;
    Eigen::VectorXd x_new(n);
    double f_new = 0.0;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = project(res.x + t * d, lower, upper);
      f_new = f(x_new, g_new);
      ++res.evaluations;
      if (std::isfinite(f_new) && f_new <= res.value + 1e-4 * g.dot(x_new - res.x)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;

    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = h * y;
      h += (rho * rho * y.dot(hy) + rho) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
    }

    const double decrease = res.value - f_new;
    res.x = x_new;
    g = g_new;
    res.value = f_new;
    if (decrease <= opts.value_tol * (std::abs(res.value) + 1.0)) {
      if (++stalls >= 3) {
        res.converged = true;
        break;
      }
    } else {
      stalls = 0;
    }
  }
  return res;
}

}  // namespace amix
