#include "cnev/sim.hpp"

#include <cmath>

#include <doctest.h>

#include "cnev/errors.hpp"
#include "cnev/stdf.hpp"
#include "oracles.hpp"

using namespace cnev;

namespace {

LinkingFamily rcl(double t) { return make_family(Family::ReflectedClayton, t); }
LinkingFamily gum(double t) { return make_family(Family::Gumbel, t); }
LinkingFamily cl(double t) { return make_family(Family::Clayton, t); }

// Ferreira's tail dependence estimator, used here as an analysis oracle.
double ferreira(const Eigen::VectorXd& u1, const Eigen::VectorXd& u2) {
  const double mean_max = u1.cwiseMax(u2).mean();
  return 3.0 - 1.0 / (1.0 - mean_max);
}

std::vector<double> column(const Eigen::MatrixXd& m, int j) {
  return std::vector<double>(m.col(j).data(), m.col(j).data() + m.rows());
}

} // namespace

TEST_CASE("rng streams are deterministic and independent") {
  RngStream a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  RngStream c = RngStream::substream(42, 1);
  RngStream d = RngStream::substream(42, 2);
  int same = 0;
  for (int i = 0; i < 64; ++i) same += (c.next_u64() == d.next_u64());
  CHECK(same == 0);
  RngStream e(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = e.uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("sample_base independence limit") {
  const int d = 3;
  std::vector<LinkingFamily> fams(d, cl(1e-8));
  const auto model = make_model(fams, identity_structure(d));
  const auto s = sample_base(model, 10000, 99);
  REQUIRE(s.n() == 10000);
  for (int j = 0; j < d; ++j) {
    CHECK(oracle::ks_uniform_pvalue(column(s.values, j)) > 0.01);
  }
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      const Eigen::VectorXd cj = s.values.col(j).array() - s.values.col(j).mean();
      const Eigen::VectorXd ck = s.values.col(k).array() - s.values.col(k).mean();
      const double r = cj.dot(ck) / std::sqrt(cj.squaredNorm() * ck.squaredNorm());
      CHECK(std::abs(r) < 0.02);
    }
  }
}

TEST_CASE("sample_base marginals are uniform for every family") {
  const LinkingFamily registry[] = {rcl(1.5), gum(2.0), cl(0.8),
                                    make_family(Family::Fgm, -0.5),
                                    make_family(Family::Frank, 3.0)};
  int seed = 1000;
  for (const auto& fam : registry) {
    const auto model =
        make_model({fam, fam}, ar1_structure(2, 0.4));
    const auto s = sample_base(model, 10000, seed++);
    for (int j = 0; j < 2; ++j) {
      CHECK(oracle::ks_uniform_pvalue(column(s.values, j)) > 0.01);
    }
  }
}

TEST_CASE("sample_base determinism and loop closure through block maxima") {
  const auto model = make_model({rcl(1.0), rcl(1.0)}, identity_structure(2));
  const auto s1 = sample_base(model, 500, 31);
  const auto s2 = sample_base(model, 500, 31);
  CHECK((s1.values - s2.values).cwiseAbs().maxCoeff() == 0.0);

  // Ferreira lambda on block maxima approaches the model lambda_U
  const auto big = sample_base(model, 60000, 77);
  const auto bm = block_maxima(big.values, 200);
  const auto scores = to_uniform_ranks(bm);
  const double lam_hat = ferreira(scores.values.col(0), scores.values.col(1));
  PairEvaluator pair(rcl(1.0), rcl(1.0), 0.0);
  CHECK(std::abs(lam_hat - lambda_U(pair)) < 0.03);
}

TEST_CASE("gumbel linking pair against brute-force block maxima") {
  const auto model = make_model({gum(2.0), gum(2.5)}, identity_structure(2));
  const auto ev = sample_ev_approx(model, 40000, 5, 500);
  const double lam_hat = ferreira(ev.values.col(0), ev.values.col(1));
  PairEvaluator pair(gum(2.0), gum(2.5), 0.0);
  CHECK(std::abs(lam_hat - lambda_U(pair)) < 0.02);
}

TEST_CASE("block_maxima") {
  Eigen::MatrixXd m(2, 2);
  m << 0.1, 0.9, 0.8, 0.2;
  const Eigen::MatrixXd bm = block_maxima(m, 2);
  REQUIRE(bm.rows() == 1);
  CHECK(bm(0, 0) == doctest::Approx(0.8));
  CHECK(bm(0, 1) == doctest::Approx(0.9));

  Eigen::MatrixXd big = Eigen::MatrixXd::Random(10000, 3);
  CHECK(block_maxima(big, 1) == big);
  CHECK(block_maxima(big, 25).rows() == 400);
  CHECK_THROWS_AS(block_maxima(m, 3), std::domain_error);
}

TEST_CASE("block maxima of exchangeable input stay exchangeable") {
  const auto model = make_model({cl(1.2), cl(1.2), cl(1.2)}, ones_structure(3));
  const auto s = sample_base(model, 30000, 4242);
  const auto scores = to_uniform_ranks(block_maxima(s.values, 10));
  const double l01 = ferreira(scores.values.col(0), scores.values.col(1));
  const double l02 = ferreira(scores.values.col(0), scores.values.col(2));
  const double l12 = ferreira(scores.values.col(1), scores.values.col(2));
  CHECK(std::abs(l01 - l02) < 0.05);
  CHECK(std::abs(l01 - l12) < 0.05);
}

TEST_CASE("spectral sampler hits the degenerate model") {
  // identical families: comonotone limit
  {
    const std::vector<LinkingFamily> fams = {cl(1.5), cl(1.5)};
    const auto s = sample_ev_degenerate(fams, 5000, 11);
    const auto r = to_uniform_ranks(s.values);
    CHECK(ferreira(r.values.col(0), r.values.col(1)) > 0.98);
  }
  // Clayton (2,1): closed-form lambda = 23/27
  {
    const std::vector<LinkingFamily> fams = {cl(2.0), cl(1.0)};
    const auto s = sample_ev_degenerate(fams, 5000, 12);
    const auto r = to_uniform_ranks(s.values);
    const double lam = ferreira(r.values.col(0), r.values.col(1));
    CHECK(std::abs(lam - 23.0 / 27.0) < 0.03);

    // support: u2 in (u1^xi_L, u1^xi_U)
    const auto [xi_l, xi_u] = support_exponents(cl(2.0), cl(1.0));
    for (int i = 0; i < s.n(); ++i) {
      const double u1 = s.values(i, 0), u2 = s.values(i, 1);
      CHECK(u2 >= std::pow(u1, xi_l) - 1e-9);
      if (xi_u > 0.0) CHECK(u2 <= std::pow(u1, xi_u) + 1e-9);
    }
  }
  CHECK_THROWS_AS(sample_ev_degenerate({rcl(1.0), cl(1.0)}, 10, 1),
                  capability_error);
}

TEST_CASE("spectral sampler output is max-stable") {
  const std::vector<LinkingFamily> fams = {cl(2.0), cl(1.0)};
  const auto s = sample_ev_degenerate(fams, 25000, 13);
  const int t = 5, m = 5000;
  Eigen::MatrixXd maxed(m, 2);
  for (int g = 0; g < m; ++g) {
    maxed.row(g) = s.values.middleRows(g * t, t).colwise().maxCoeff();
  }
  // margins of the t-fold maxima, rescaled by u -> u^t, are uniform again
  Eigen::MatrixXd rescaled = maxed.array().pow(static_cast<double>(t));
  CHECK(oracle::ks_uniform_pvalue(column(rescaled, 0)) > 0.01);
  CHECK(oracle::ks_uniform_pvalue(column(rescaled, 1)) > 0.01);
  // and the copula is unchanged
  const auto r = to_uniform_ranks(rescaled);
  const double lam = ferreira(r.values.col(0), r.values.col(1));
  CHECK(std::abs(lam - 23.0 / 27.0) < 0.04);
}

TEST_CASE("large-block approximation") {
  // rho = 0, common theta: pairwise lambda matches the exponent function
  const auto model = make_model({rcl(1.5), rcl(1.5)}, identity_structure(2));
  const auto ev = sample_ev_approx(model, 5000, 21);
  const double lam = ferreira(ev.values.col(0), ev.values.col(1));
  PairEvaluator pair(rcl(1.5), rcl(1.5), 0.0);
  CHECK(std::abs(lam - lambda_U(pair)) < 0.03);

  // block = 1 consumes the same stream as the base sampler
  const auto one = sample_ev_approx(model, 300, 5, 1);
  const auto base = to_uniform_ranks(sample_base(model, 300, 5).values);
  CHECK((one.values - base.values).cwiseAbs().maxCoeff() < 1e-15);

  // determinism
  const auto again = sample_ev_approx(model, 5000, 21);
  CHECK((again.values - ev.values).cwiseAbs().maxCoeff() == 0.0);

  // halving the block bias: moving from block 50 to 100 barely moves lambda
  const auto b50 = sample_ev_approx(model, 50000, 303, 50);
  const auto b100 = sample_ev_approx(model, 50000, 304, 100);
  const double l50 = ferreira(b50.values.col(0), b50.values.col(1));
  const double l100 = ferreira(b100.values.col(0), b100.values.col(1));
  CHECK(std::abs(l50 - l100) < 0.01);

  CHECK_THROWS_AS(sample_ev_approx(model, 1000000, 1, 2000, 1000000ull),
                  std::length_error);
}

TEST_CASE("marginal models") {
  const MarginalModel frechet{MarginalModel::Kind::Frechet, 3.0, 1.0};
  CHECK(marginal_quantile(frechet, std::exp(-1.0)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  const MarginalModel pareto{MarginalModel::Kind::Pareto, 3.0, 1.0};
  for (double p : {0.05, 0.4, 0.9}) {
    CHECK(marginal_cdf(frechet, marginal_quantile(frechet, p)) ==
          doctest::Approx(p).epsilon(1e-12));
    CHECK(marginal_cdf(pareto, marginal_quantile(pareto, p)) ==
          doctest::Approx(p).epsilon(1e-12));
  }
  CHECK_THROWS_AS(marginal_cdf(frechet, -1.0), std::domain_error);
  CHECK_THROWS_AS(marginal_cdf(pareto, 0.5), std::domain_error);

  // rank scores
  Eigen::MatrixXd col(3, 1);
  col << 3.2, 1.1, 2.7;
  const auto ranks = to_uniform_ranks(col);
  CHECK(ranks.values(0, 0) == doctest::Approx(0.75));
  CHECK(ranks.values(1, 0) == doctest::Approx(0.25));
  CHECK(ranks.values(2, 0) == doctest::Approx(0.5));
  CHECK(ranks.provenance == Provenance::Ranks);
}

TEST_CASE("frechet maximum likelihood recovery") {
  RngStream rng(555);
  const MarginalModel truth{MarginalModel::Kind::Frechet, 3.0, 1.0};
  Eigen::VectorXd z(10000);
  for (int i = 0; i < z.size(); ++i) {
    z[i] = marginal_quantile(truth, rng.uniform());
  }
  const auto fit = fit_marginal(z, MarginalModel::Kind::Frechet);
  CHECK(std::abs(fit.alpha - 3.0) < 0.1);
  CHECK(std::abs(fit.sigma - 1.0) < 0.05);
}

TEST_CASE("marginal round trip") {
  const auto model = make_model({rcl(1.2), rcl(0.9)}, ar1_structure(2, 0.3));
  const auto u = sample_base(model, 200, 8);
  const MarginalModel m{MarginalModel::Kind::Frechet, 2.5, 1.3};
  const Eigen::MatrixXd z = apply_marginal(u, m);
  const auto back = to_uniform(z, {m, m});
  CHECK((back.values - u.values).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(back.provenance == Provenance::ParametricFitted);
}
