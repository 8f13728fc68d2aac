#include "amix/gp.hpp"

#include <cmath>
#include <algorithm>
#include <limits>

#include "amix/optimizer.hpp"

namespace amix {

namespace {

Eigen::VectorXd response_vector(const Dataset& data) {
  return Eigen::Map<const Eigen::VectorXd>(data.responses().data(), static_cast<Eigen::Index>(data.size()));
}

double sample_variance(const Dataset& data) {
  const Eigen::VectorXd y = response_vector(data);
  if (y.size() < 2) return 0.0;
  return (y.array() - y.mean()).square().mean();
}

struct Profiled {
  double mu;
  double value;
  Eigen::VectorXd alpha;
  Eigen::VectorXd phiinv_one;
  double one_phiinv_one;
};

Profiled profile(const GramFactor& f, const Eigen::VectorXd& y) {
  const auto llt = f.lower.triangularView<Eigen::Lower>();
  const Eigen::Index n = y.size();
  Profiled out;
  out.phiinv_one = llt.transpose().solve(llt.solve(Eigen::VectorXd::Ones(n)));
  out.one_phiinv_one = out.phiinv_one.sum();
  out.mu = out.phiinv_one.dot(y) / out.one_phiinv_one;
  const Eigen::VectorXd r = y.array() - out.mu;
  out.alpha = llt.transpose().solve(llt.solve(r));
  out.value = 2.0 * f.lower.diagonal().array().log().sum() + r.dot(out.alpha);
  return out;
}

}  // namespace

GramFactor gram_matrix(const CovarianceModel& kernel, std::span<const MixedPoint> pts,
                       std::span<const double> log_params, double relative_jitter, double jitter_cap) {
  if (pts.empty()) throw std::invalid_argument("gram_matrix: empty dataset");
  GramFactor f;
  const Eigen::MatrixXd k = kernel.gram(pts, log_params);
  const double scale = kernel.prior_variance(log_params);
  for (double rel = relative_jitter; rel <= jitter_cap * (1.0 + 1e-12); rel *= 10.0) {
    f.gram = k;
    f.jitter = rel * scale;
    f.gram.diagonal().array() += f.jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(f.gram);
    if (llt.info() == Eigen::Success) {
      f.lower = llt.matrixL();
      return f;
    }
  }
  throw FactorizationFailure("Gram matrix is not positive definite at the jitter cap");
}

double profile_mu(const GramFactor& factor, const Eigen::VectorXd& y) { return profile(factor, y).mu; }

double neg_log_likelihood(const CovarianceModel& kernel, const Dataset& data, std::span<const double> log_params,
                          double relative_jitter, double jitter_cap) {
  try {
    const auto f = gram_matrix(kernel, data.points(), log_params, relative_jitter, jitter_cap);
    return profile(f, response_vector(data)).value;
  } catch (const FactorizationFailure&) {
    return std::numeric_limits<double>::infinity();
  }
}

double neg_log_likelihood(const CovarianceModel& kernel, const Dataset& data, std::span<const double> log_params,
                          double relative_jitter, double jitter_cap, Eigen::VectorXd& grad) {
  GramFactor f;
  try {
    f = gram_matrix(kernel, data.points(), log_params, relative_jitter, jitter_cap);
  } catch (const FactorizationFailure&) {
    grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(kernel.num_params()));
    return std::numeric_limits<double>::infinity();
  }
  const Profiled pr = profile(f, response_vector(data));
  // mu is at its optimum, so d/dt = tr(Phi^-1 dPhi) - alpha' dPhi alpha
  const Eigen::Index n = static_cast<Eigen::Index>(data.size());
  const auto llt = f.lower.triangularView<Eigen::Lower>();
  const Eigen::MatrixXd linv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd w = linv.transpose() * linv;
  const double jitter_weight = w.trace() - pr.alpha.squaredNorm();
  w.noalias() -= pr.alpha * pr.alpha.transpose();
  grad = kernel.weighted_gradient(data.points(), log_params, w);
  // jitter is proportional to the prior variance
  const double rel = f.jitter / kernel.prior_variance(log_params);
  grad += rel * jitter_weight * kernel.prior_variance_gradient(log_params);
  return pr.value;
}

// ---------------------------------------------------------------- FittedGP

FittedGP::FittedGP(std::shared_ptr<const CovarianceModel> kernel, Dataset data, std::vector<double> log_params,
                   double relative_jitter, double jitter_cap)
    : kernel_(std::move(kernel)), data_(std::move(data)), log_params_(std::move(log_params)) {
  if (log_params_.size() != kernel_->num_params()) throw std::invalid_argument("FittedGP: parameter length mismatch");
  factor_ = gram_matrix(*kernel_, data_.points(), log_params_, relative_jitter, jitter_cap);
  const Profiled pr = profile(factor_, response_vector(data_));
  mu_ = pr.mu;
  nll_ = pr.value;
  alpha_ = pr.alpha;
  phiinv_one_ = pr.phiinv_one;
  one_phiinv_one_ = pr.one_phiinv_one;
  prior_var_ = kernel_->prior_variance(log_params_);
}

std::vector<double> FittedGP::raw_variance(std::span<const MixedPoint> ws) const {
  const Eigen::MatrixXd r0 = kernel_->cross(data_.points(), ws, log_params_);
  const Eigen::MatrixXd v = factor_.lower.triangularView<Eigen::Lower>().solve(r0);
  const Eigen::VectorXd u = r0.transpose() * phiinv_one_;
  std::vector<double> out(ws.size());
  for (std::size_t j = 0; j < ws.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double c = 1.0 - u(jj);
    out[j] = prior_var_ - v.col(jj).squaredNorm() + c * c / one_phiinv_one_;
  }
  return out;
}

std::vector<Posterior> FittedGP::predict(std::span<const MixedPoint> ws) const {
  std::vector<Posterior> out(ws.size());
  if (ws.empty()) return out;
  const Eigen::MatrixXd r0 = kernel_->cross(data_.points(), ws, log_params_);
  const Eigen::MatrixXd v = factor_.lower.triangularView<Eigen::Lower>().solve(r0);
  const Eigen::VectorXd mean = (r0.transpose() * alpha_).array() + mu_;
  const Eigen::VectorXd u = r0.transpose() * phiinv_one_;
  for (std::size_t j = 0; j < ws.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double c = 1.0 - u(jj);
    const double var = prior_var_ - v.col(jj).squaredNorm() + c * c / one_phiinv_one_;
    out[j] = {mean(jj), std::sqrt(std::max(var, 0.0))};
  }
  return out;
}

Posterior FittedGP::predict(const MixedPoint& w) const {
  return predict(std::span<const MixedPoint>(&w, 1)).front();
}

// ---------------------------------------------------------------- fitting

FittedGP fit(std::shared_ptr<const CovarianceModel> kernel, const Dataset& data, const FitOptions& opts,
             RngStream rng) {
  if (data.size() < 2) throw FitFailure("fit needs at least two observations");
  if (opts.restarts < 1 || !(opts.jitter > 0.0)) throw std::invalid_argument("fit: invalid options");
  const LogBounds b = kernel->bounds(sample_variance(data), opts.ranges);
  const Eigen::Index np = static_cast<Eigen::Index>(kernel->num_params());
  const Eigen::VectorXd lo = Eigen::Map<const Eigen::VectorXd>(b.lower.data(), np);
  const Eigen::VectorXd hi = Eigen::Map<const Eigen::VectorXd>(b.upper.data(), np);

  const Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    return neg_log_likelihood(*kernel, data, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                              opts.jitter, opts.jitter_cap, g);
  };
  BoxOptions bo;
  bo.max_iters = opts.max_iters;
  bo.gradient_tol = opts.tolerance;

  std::vector<std::pair<double, Eigen::VectorXd>> starts;
  const int draws = opts.restarts * std::max(1, opts.screen_factor);
  for (int r = 0; r < draws; ++r) {
    Eigen::VectorXd x0(np);
    for (Eigen::Index i = 0; i < np; ++i) x0(i) = rng.uniform(lo(i), hi(i));
    const double v = neg_log_likelihood(*kernel, data, std::span<const double>(x0.data(), static_cast<std::size_t>(np)),
                                        opts.jitter, opts.jitter_cap);
    if (std::isfinite(v)) starts.emplace_back(v, std::move(x0));
  }
  // stable: equal values keep draw order
  std::stable_sort(starts.begin(), starts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  if (starts.size() > static_cast<std::size_t>(opts.restarts)) starts.resize(static_cast<std::size_t>(opts.restarts));

  bool any = false;
  BoxResult best;
  for (const auto& [v0, x0] : starts) {
    try {
      BoxResult res = minimize_box(objective, x0, lo, hi, bo);
      if (!any || res.value < best.value) {
        best = std::move(res);
        any = true;
      }
    } catch (const std::domain_error&) {
    }
  }
  if (!any) throw FitFailure("every restart failed to factor the Gram matrix at its start point");
  std::vector<double> lp(best.x.data(), best.x.data() + np);
  FittedGP out(std::move(kernel), data, std::move(lp), opts.jitter, opts.jitter_cap);
  out.seed = rng.seed();
  out.stream = rng.stream();
  return out;
}

FittedGP fit_ezgp(const Dataset& data, const FitOptions& opts, RngStream rng) {
  return fit(std::make_shared<EzGPKernel>(data.space()), data, opts, std::move(rng));
}

nlohmann::json to_json(const FittedGP& model) {
  nlohmann::json j;
  j["schema"] = "amix.model/1";
  j["kernel"] = model.kernel().name();
  j["p"] = model.kernel().space().p();
  j["levels"] = model.kernel().space().levels();
  j["n"] = model.data().size();
  j["mu"] = model.mu();
  j["log_params"] = model.log_params();
  j["jitter"] = model.jitter();
  j["nll"] = model.nll();
  j["seed"] = model.seed;
  j["stream"] = model.stream;
  if (const auto* ez = dynamic_cast<const EzGPKernel*>(&model.kernel())) {
    const EzGPParams par = ez->unpack(model.log_params(), model.mu());
    j["var0"] = par.var0;
    j["theta0"] = std::vector<double>(par.theta0.data(), par.theta0.data() + par.theta0.size());
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& blk : par.factors) {
      nlohmann::json bj;
      bj["var"] = blk.var;
      nlohmann::json cols = nlohmann::json::array();
      for (Eigen::Index l = 0; l < blk.theta.cols(); ++l) {
        std::vector<double> col(static_cast<std::size_t>(blk.theta.rows()));
        for (Eigen::Index k = 0; k < blk.theta.rows(); ++k) col[static_cast<std::size_t>(k)] = blk.theta(k, l);
        cols.push_back(col);
      }
      bj["theta_by_level"] = cols;
      blocks.push_back(bj);
    }
    j["factors"] = blocks;
  }
  return j;
}

}  // namespace amix
