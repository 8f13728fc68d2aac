#include <doctest.h>

#include <cmath>

#include "amix/gp.hpp"
#include "amix/sampling.hpp"
#include "oracles.hpp"

using namespace amix;

namespace {

EzGPParams random_params(const DesignSpace& s, RngStream& rng, double lo = 0.1, double hi = 10.0) {
  EzGPParams p;
  p.var0 = std::exp(rng.uniform(std::log(0.2), std::log(2.0)));
  p.theta0.resize(static_cast<Eigen::Index>(s.p()));
  for (auto& t : p.theta0) t = std::exp(rng.uniform(std::log(lo), std::log(hi)));
  for (std::size_t h = 0; h < s.q(); ++h) {
    EzGPParams::FactorBlock b;
    b.var = std::exp(rng.uniform(std::log(0.2), std::log(2.0)));
    b.theta.resize(static_cast<Eigen::Index>(s.p()), s.levels(h));
    for (Eigen::Index i = 0; i < b.theta.size(); ++i) b.theta(i) = std::exp(rng.uniform(std::log(lo), std::log(hi)));
    p.factors.push_back(b);
  }
  return p;
}

Dataset random_dataset(const DesignSpace& s, std::size_t n, RngStream& rng) {
  Dataset d(s);
  for (const auto& w : oneshot_design(s, n, rng)) d.add(w, rng.normal());
  return d;
}

}  // namespace

TEST_CASE("kernel_phi") {
  const DesignSpace s(1, {2});
  EzGPParams par;
  par.var0 = 1.0;
  par.theta0 = Eigen::VectorXd::Constant(1, 1.0);
  EzGPParams::FactorBlock b;
  b.var = 2.0;
  b.theta.resize(1, 2);
  b.theta << 3.0, 5.0;
  par.factors.push_back(b);

  SUBCASE("hand-evaluated value") {
    // e^{-0.25} + 2 e^{-0.75}
    CHECK(kernel_phi(s, {{0.0}, {1}}, {{0.5}, {1}}, par) == doctest::Approx(1.72353).epsilon(1e-5));
    CHECK(kernel_phi(s, {{0.0}, {1}}, {{0.5}, {1}}, par) ==
          doctest::Approx(oracle::ezgp_cov({{0.0}, {1}}, {{0.5}, {1}}, par)).epsilon(1e-14));
  }
  SUBCASE("identical points give the total prior variance") {
    CHECK(kernel_phi(s, {{0.3}, {2}}, {{0.3}, {2}}, par) == doctest::Approx(3.0));
  }
  SUBCASE("different levels keep only the shared component") {
    CHECK(kernel_phi(s, {{0.0}, {1}}, {{0.5}, {2}}, par) == doctest::Approx(std::exp(-0.25)));
  }
  SUBCASE("level-specific length scales use the shared level") {
    CHECK(kernel_phi(s, {{0.0}, {2}}, {{0.5}, {2}}, par) ==
          doctest::Approx(std::exp(-0.25) + 2.0 * std::exp(-1.25)));
  }
}

TEST_CASE("EzGP parameter count and packing") {
  for (const auto& s : {DesignSpace(1, {3}), DesignSpace(2, {3, 3}), DesignSpace(3, {3, 3, 3}), DesignSpace(2, {})}) {
    EzGPKernel k(s);
    std::size_t sum_m = 0;
    for (int m : s.levels()) sum_m += static_cast<std::size_t>(m);
    CHECK(k.num_params() + 1 == 2 + s.p() + s.q() + s.p() * sum_m);
    RngStream rng(4, 0);
    const auto par = random_params(s, rng);
    CHECK(par.count() == k.num_params() + 1);
    const auto back = k.unpack(k.pack(par));
    CHECK(back.var0 == doctest::Approx(par.var0));
    CHECK((back.theta0 - par.theta0).norm() < 1e-12);
  }
}

TEST_CASE("Gram matrix") {
  const DesignSpace s(2, {3, 3});
  EzGPKernel k(s);
  RngStream rng(21, 0);

  SUBCASE("single point") {
    const auto par = random_params(s, rng);
    Dataset d(s);
    d.add({{0.2, 0.4}, {1, 2}}, 1.0);
    const auto lp = k.pack(par);
    const auto f = gram_matrix(k, d.points(), lp, 1e-8, 1e-4);
    CHECK(f.gram.rows() == 1);
    CHECK(f.gram(0, 0) == doctest::Approx(oracle::total_var(par) * (1.0 + 1e-8)).epsilon(1e-14));
  }
  SUBCASE("exact symmetry and positive eigenvalues after jitter") {
    for (int t = 0; t < 20; ++t) {
      const auto n = static_cast<std::size_t>(2 + t % 19);
      const Dataset d = random_dataset(s, n, rng);
      const auto lp = k.pack(random_params(s, rng, 1e-3, 1e3));
      const auto f = gram_matrix(k, d.points(), lp, 1e-8, 1e-4);
      CHECK((f.gram - f.gram.transpose()).cwiseAbs().maxCoeff() == 0.0);
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(f.gram);
      CHECK(eig.eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("profiled negative log likelihood") {
  const DesignSpace s(1, {3});
  EzGPKernel k(s);
  RngStream rng(31, 0);

  SUBCASE("one observation") {
    const auto par = random_params(s, rng);
    Dataset d(s);
    d.add({{0.4}, {2}}, 3.7);
    const double tv = oracle::total_var(par);
    CHECK(neg_log_likelihood(k, d, k.pack(par), 1e-8) == doctest::Approx(std::log(tv * (1.0 + 1e-8))).epsilon(1e-12));
  }
  SUBCASE("matches the explicit-inverse objective") {
    for (int t = 0; t < 10; ++t) {
      const Dataset d = random_dataset(s, 3 + static_cast<std::size_t>(t % 4), rng);
      const auto par = random_params(s, rng);
      const double abs_jit = 1e-8 * oracle::total_var(par);
      CHECK(neg_log_likelihood(k, d, k.pack(par), 1e-8) ==
            doctest::Approx(oracle::dense_nll(d, par, abs_jit)).epsilon(1e-8));
    }
  }
  SUBCASE("jitter is not cached") {
    const Dataset d = random_dataset(s, 6, rng);
    const auto lp = k.pack(random_params(s, rng));
    CHECK(neg_log_likelihood(k, d, lp, 1e-8) != neg_log_likelihood(k, d, lp, 2e-8));
  }
  SUBCASE("gradient matches central differences") {
    for (const auto& sp : {DesignSpace(1, {3}), DesignSpace(2, {2, 3})}) {
      EzGPKernel kk(sp);
      MultiplicativeKernel mk(sp);
      const Dataset d = random_dataset(sp, 8, rng);
      for (const CovarianceModel* kern : {static_cast<const CovarianceModel*>(&kk), static_cast<const CovarianceModel*>(&mk)}) {
        std::vector<double> lp(kern->num_params());
        const auto bd = kern->bounds(1.0);
        for (std::size_t j = 0; j < lp.size(); ++j) lp[j] = std::min(rng.uniform(-1.0, 1.5), bd.upper[j] - 1e-3);
        Eigen::VectorXd g;
        neg_log_likelihood(*kern, d, lp, 1e-8, 1e-4, g);
        for (std::size_t j = 0; j < lp.size(); ++j) {
          const double h = 1e-5;
          auto up = lp, dn = lp;
          up[j] += h;
          dn[j] -= h;
          const double fd = (neg_log_likelihood(*kern, d, up, 1e-8) - neg_log_likelihood(*kern, d, dn, 1e-8)) / (2 * h);
          CHECK(g(static_cast<Eigen::Index>(j)) == doctest::Approx(fd).epsilon(1e-4).scale(1e-3));
        }
      }
    }
  }
}

TEST_CASE("profile_mu") {
  const DesignSpace s(1, {3});
  EzGPKernel k(s);
  RngStream rng(41, 0);

  SUBCASE("one observation") {
    Dataset d(s);
    d.add({{0.1}, {1}}, -2.5);
    const auto f = gram_matrix(k, d.points(), k.pack(random_params(s, rng)), 1e-8, 1e-4);
    CHECK(profile_mu(f, Eigen::VectorXd::Constant(1, -2.5)) == doctest::Approx(-2.5));
  }
  SUBCASE("identity covariance gives the arithmetic mean") {
    GramFactor f;
    f.gram = 4.0 * Eigen::MatrixXd::Identity(4, 4);
    f.lower = 2.0 * Eigen::MatrixXd::Identity(4, 4);
    Eigen::VectorXd y(4);
    y << 1.0, 2.0, 6.0, -1.0;
    CHECK(profile_mu(f, y) == doctest::Approx(2.0));
  }
  SUBCASE("matches the explicit-inverse estimate") {
    const Dataset d = random_dataset(s, 4, rng);
    const auto par = random_params(s, rng);
    const auto f = gram_matrix(k, d.points(), k.pack(par), 1e-8, 1e-4);
    CHECK(profile_mu(f, oracle::yvec(d)) ==
          doctest::Approx(oracle::dense_mu(d, par, 1e-8 * oracle::total_var(par))).epsilon(1e-9));
  }
}

TEST_CASE("predict") {
  RngStream rng(51, 0);

  SUBCASE("matches the explicit-inverse posterior") {
    const DesignSpace s(2, {3, 3});
    EzGPKernel k(s);
    for (int t = 0; t < 10; ++t) {
      const Dataset d = random_dataset(s, 5, rng);
      const auto par = random_params(s, rng);
      const FittedGP gp(std::make_shared<EzGPKernel>(s), d, k.pack(par));
      for (const auto& w : candidate_set(s, 2, rng)) {
        const auto a = gp.predict(w);
        const auto b = oracle::dense_predict(d, par, gp.jitter(), w);
        CHECK(std::abs(a.mean - b.mean) < 1e-8);
        CHECK(std::abs(a.sd * a.sd - b.sd * b.sd) < 1e-8);
      }
    }
  }
  SUBCASE("interpolates training points") {
    const DesignSpace s(1, {3});
    const Dataset d = random_dataset(s, 9, rng);
    const auto lp = EzGPKernel(s).pack(random_params(s, rng));
    const FittedGP gp(std::make_shared<EzGPKernel>(s), d, lp);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto post = gp.predict(d.point(i));
      CHECK(post.mean == doctest::Approx(d.response(i)).epsilon(1e-5));
      CHECK(post.sd <= 10.0 * std::sqrt(gp.jitter()));
    }
  }
  SUBCASE("reverts to the prior far from the data") {
    const DesignSpace s(1, {2});
    Dataset d(s);
    d.add({{0.0}, {1}}, 1.0);
    d.add({{0.05}, {1}}, 2.0);
    d.add({{0.1}, {2}}, 0.5);
    EzGPParams par;
    par.var0 = 1.0;
    par.theta0 = Eigen::VectorXd::Constant(1, 1000.0);
    EzGPParams::FactorBlock b;
    b.var = 0.5;
    b.theta = Eigen::MatrixXd::Constant(1, 2, 1000.0);
    par.factors.push_back(b);
    const FittedGP gp(std::make_shared<EzGPKernel>(s), d, EzGPKernel(s).pack(par));
    const auto post = gp.predict({{1.0}, {1}});
    CHECK(post.mean == doctest::Approx(gp.mu()).epsilon(1e-12));
    CHECK(post.sd * post.sd == doctest::Approx(1.5 + 1.0 / gp.phiinv_one().sum()).epsilon(1e-10));
  }
  SUBCASE("q = 0 reduces to ordinary kriging") {
    const DesignSpace s(2, {});
    EzGPKernel k(s);
    for (int t = 0; t < 5; ++t) {
      const Dataset d = random_dataset(s, 7, rng);
      const auto par = random_params(s, rng);
      const FittedGP gp(std::make_shared<EzGPKernel>(s), d, k.pack(par));
      std::vector<std::vector<double>> xs;
      for (const auto& w : d.points()) xs.push_back(w.x);
      const std::vector<double> theta(par.theta0.data(), par.theta0.data() + par.theta0.size());
      for (const auto& w : candidate_set(s, 5, rng)) {
        const auto a = gp.predict(w);
        const auto b = oracle::ordinary_kriging(xs, oracle::yvec(d), theta, par.var0, 1e-8, w.x);
        CHECK(std::abs(a.mean - b.mean) < 1e-10);
        CHECK(std::abs(a.sd * a.sd - b.sd * b.sd) < 1e-10);
      }
    }
  }
  SUBCASE("pre-clamp variance is never materially negative") {
    const DesignSpace s(2, {3, 3});
    for (int t = 0; t < 10; ++t) {
      const Dataset d = random_dataset(s, 10 + static_cast<std::size_t>(4 * t), rng);
      const FittedGP gp(std::make_shared<EzGPKernel>(s), d, EzGPKernel(s).pack(random_params(s, rng, 1e-3, 1e2)));
      const auto cand = candidate_set(s, 20, rng);
      for (double v : gp.raw_variance(cand)) CHECK(v >= -1e-6 * gp.prior_variance());
      for (double v : gp.raw_variance(d.points())) CHECK(v >= -1e-6 * gp.prior_variance());
    }
  }
  SUBCASE("conditioning on more data never inflates the variance") {
    const DesignSpace s(1, {3});
    const auto lp = EzGPKernel(s).pack(random_params(s, rng));
    const Dataset d = random_dataset(s, 12, rng);
    const auto cand = candidate_set(s, 10, rng);
    for (std::size_t n = 2; n < d.size(); ++n) {
      const FittedGP a(std::make_shared<EzGPKernel>(s), d.prefix(n), lp, 1e-10);
      const FittedGP b(std::make_shared<EzGPKernel>(s), d.prefix(n + 1), lp, 1e-10);
      const auto va = a.raw_variance(cand);
      const auto vb = b.raw_variance(cand);
      for (std::size_t i = 0; i < cand.size(); ++i) CHECK(vb[i] <= va[i] + 1e-6);
    }
  }
}

TEST_CASE("fit") {
  RngStream rng(61, 0);
  FitOptions opts;

  SUBCASE("constant surface") {
    const DesignSpace s(1, {3});
    Dataset d(s);
    for (const auto& w : oneshot_design(s, 9, rng)) d.add(w, 4.2);
    const FittedGP gp = fit_ezgp(d, opts, RngStream(1, 0));
    CHECK(gp.mu() == doctest::Approx(4.2).epsilon(1e-3 / 4.2));
    for (const auto& w : candidate_set(s, 5, rng)) CHECK(gp.predict(w).sd < 1e-2 * (4.2 + 1.0));
  }
  SUBCASE("fitted objective beats the generating parameters") {
    const DesignSpace s(1, {2});
    EzGPKernel k(s);
    EzGPParams truth;
    truth.mu = 1.0;
    truth.var0 = 1.0;
    truth.theta0 = Eigen::VectorXd::Constant(1, 5.0);
    EzGPParams::FactorBlock b;
    b.var = 0.5;
    b.theta.resize(1, 2);
    b.theta << 10.0, 20.0;
    truth.factors.push_back(b);
    for (int rep = 0; rep < 3; ++rep) {
      const auto pts = oneshot_design(s, 20, rng);
      Dataset shape(s);
      for (const auto& w : pts) shape.add(w, 0.0);
      const auto f = gram_matrix(k, pts, k.pack(truth), 1e-8, 1e-4);
      Eigen::VectorXd e(20);
      for (auto& v : e) v = rng.normal();
      const Eigen::VectorXd y = (f.lower * e).array() + truth.mu;
      Dataset d(s);
      for (std::size_t i = 0; i < pts.size(); ++i) d.add(pts[i], y(static_cast<Eigen::Index>(i)));
      const FittedGP gp = fit_ezgp(d, opts, RngStream(2, static_cast<std::uint64_t>(rep)));
      CHECK(gp.nll() <= neg_log_likelihood(k, d, k.pack(truth), opts.jitter) + 1e-9);
    }
  }
  SUBCASE("refit with the same stream is bit-identical") {
    const DesignSpace s(2, {3, 3});
    Dataset d(s);
    for (const auto& w : oneshot_design(s, 12, rng)) d.add(w, std::sin(6 * w.x[0]) + w.x[1] * w.z[0]);
    const FittedGP a = fit_ezgp(d, opts, RngStream(9, 9));
    const FittedGP b = fit_ezgp(d, opts, RngStream(9, 9));
    CHECK(a.log_params() == b.log_params());
    CHECK(a.mu() == b.mu());
    CHECK(to_json(a) == to_json(b));
  }
  SUBCASE("needs two observations") {
    Dataset d(DesignSpace(1, {2}));
    d.add({{0.5}, {1}}, 1.0);
    CHECK_THROWS_AS(fit_ezgp(d, opts, RngStream(1, 1)), FitFailure);
  }
}

TEST_CASE("audit document") {
  const DesignSpace s(1, {3});
  RngStream rng(71, 0);
  Dataset d(s);
  for (const auto& w : oneshot_design(s, 6, rng)) d.add(w, w.x[0] * w.z[0]);
  const FittedGP gp = fit_ezgp(d, FitOptions{}, RngStream(5, 6));
  const auto j = to_json(gp);
  CHECK(j["kernel"] == "ezgp");
  CHECK(j["seed"] == 5);
  CHECK(j["stream"] == 6);
  CHECK(j["factors"].size() == 1);
  CHECK(j["factors"][0]["theta_by_level"].size() == 3);
  CHECK(j["log_params"].size() == EzGPKernel(s).num_params());
}
