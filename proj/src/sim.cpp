#include "cnev/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cnev/errors.hpp"
#include "cnev/gauss.hpp"

namespace cnev {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

constexpr double kInteriorLo = 1e-12;
constexpr double kInteriorHi = 1.0 - 1e-12;

// Cholesky-style factor, with a spectral fallback for semidefinite
// structures such as the all-ones matrix.
Eigen::MatrixXd corr_factor(const CorrStructure& structure) {
  const Eigen::MatrixXd sigma = corr_matrix(structure);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() == Eigen::Success) {
    return llt.matrixL();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.eigenvalues().minCoeff() < -1e-8) {
    throw numeric_error("sim: correlation matrix is not positive semidefinite");
  }
  return es.eigenvectors() *
         es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

} // namespace

CnevModel make_model(std::vector<LinkingFamily> families,
                     CorrStructure structure) {
  if (static_cast<int>(families.size()) != structure.dim) {
    throw std::domain_error("sim: model dimension mismatch between families and structure");
  }
  return CnevModel{std::move(families), std::move(structure)};
}

// xoshiro256++ seeded through splitmix64.
RngStream::RngStream(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& s : s_) s = splitmix64(sm);
}

RngStream RngStream::substream(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t sm = seed;
  const std::uint64_t a = splitmix64(sm);
  sm = index ^ 0xa3c59ac2ee58d741ull;
  const std::uint64_t b = splitmix64(sm);
  return RngStream(a ^ (b * 0xd1342543de82ef95ull + 0x2545f4914f6cdd1dull));
}

std::uint64_t RngStream::next_u64() {
  const auto rotl = [](std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  };
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
}

double RngStream::normal() { return std_normal_quantile(uniform()); }

double RngStream::exponential() { return -std::log(uniform()); }

UniformSample sample_base(const CnevModel& model, int n, std::uint64_t seed) {
  if (n < 1) throw std::domain_error("sim: sample size must be positive");
  for (const auto& fam : model.families) {
    if (!has_base_copula(fam)) {
      throw capability_error("sim: family '" + family_code(fam.family) +
                             "' has no base copula to sample from");
    }
  }
  const int d = model.dim();
  const Eigen::MatrixXd factor = corr_factor(model.structure);
  RngStream rng(seed);

  UniformSample out;
  out.values.resize(n, d);
  out.provenance = Provenance::Known;
  Eigen::VectorXd z(d), corr(d);
  for (int i = 0; i < n; ++i) {
    const double v0 = rng.uniform();
    for (int j = 0; j < d; ++j) z[j] = rng.normal();
    corr.noalias() = factor * z;
    for (int j = 0; j < d; ++j) {
      const double p = std_normal_cdf(corr[j]);
      out.values(i, j) = std::clamp(
          cond_inverse(model.families[j], p, v0), kInteriorLo, kInteriorHi);
    }
  }
  return out;
}

Eigen::MatrixXd block_maxima(const Eigen::MatrixXd& raw, int n_B) {
  if (n_B < 1) throw std::domain_error("sim: block size must be >= 1");
  const int n = static_cast<int>(raw.rows());
  if (n < n_B) throw std::domain_error("sim: fewer rows than one block");
  const int m = n / n_B;
  Eigen::MatrixXd out(m, raw.cols());
  for (int b = 0; b < m; ++b) {
    out.row(b) = raw.middleRows(b * n_B, n_B).colwise().maxCoeff();
  }
  return out;
}

UniformSample sample_ev_degenerate(const std::vector<LinkingFamily>& fams,
                                   int n, std::uint64_t seed) {
  if (n < 1) throw std::domain_error("sim: sample size must be positive");
  const int d = static_cast<int>(fams.size());
  for (const auto& fam : fams) {
    if (!has_boundary_density(fam)) {
      throw capability_error(
          "sim: the spectral sampler needs boundary-continuous families");
    }
  }
  // spectral densities f_j(v) = c_j(1, v); the stopping rule needs their sup
  double sup_f = 0.0;
  for (const auto& fam : fams) {
    for (int g = 0; g <= 100000; ++g) {
      sup_f = std::max(sup_f, boundary_density(fam, g / 100000.0));
    }
  }
  if (!(sup_f < 1e6)) {
    throw capability_error("sim: unbounded spectral density");
  }

  RngStream rng(seed);
  UniformSample out;
  out.values.resize(n, d);
  out.provenance = Provenance::Known;
  Eigen::VectorXd x(d);
  for (int i = 0; i < n; ++i) {
    x.setZero();
    double gamma = 0.0;
    while (true) {
      gamma += rng.exponential();
      const double v = rng.uniform();
      for (int j = 0; j < d; ++j) {
        x[j] = std::max(x[j], boundary_density(fams[j], v) / gamma);
      }
      if (sup_f / gamma < x.minCoeff()) break;
    }
    for (int j = 0; j < d; ++j) {
      out.values(i, j) =
          std::clamp(std::exp(-1.0 / x[j]), kInteriorLo, kInteriorHi);
    }
  }
  return out;
}

UniformSample sample_ev_approx(const CnevModel& model, int n,
                               std::uint64_t seed, int block,
                               std::uint64_t cell_cap) {
  if (n < 1 || block < 1) {
    throw std::domain_error("sim: sample size and block must be positive");
  }
  const int d = model.dim();
  const std::uint64_t cells = static_cast<std::uint64_t>(n) *
                              static_cast<std::uint64_t>(block) *
                              static_cast<std::uint64_t>(d);
  if (cells > cell_cap) {
    throw std::length_error("sim: n * block * d exceeds the configured cap");
  }
  for (const auto& fam : model.families) {
    if (!has_base_copula(fam)) {
      throw capability_error("sim: family '" + family_code(fam.family) +
                             "' has no base copula to sample from");
    }
  }
  const Eigen::MatrixXd factor = corr_factor(model.structure);
  RngStream rng(seed);

  Eigen::MatrixXd maxima(n, d);
  Eigen::VectorXd z(d), corr(d);
  for (int i = 0; i < n; ++i) {
    maxima.row(i).setZero();
    for (int b = 0; b < block; ++b) {
      const double v0 = rng.uniform();
      for (int j = 0; j < d; ++j) z[j] = rng.normal();
      corr.noalias() = factor * z;
      for (int j = 0; j < d; ++j) {
        const double u =
            cond_inverse(model.families[j], std_normal_cdf(corr[j]), v0);
        maxima(i, j) = std::max(maxima(i, j), u);
      }
    }
  }
  UniformSample out = to_uniform_ranks(maxima);
  return out;
}

double marginal_cdf(const MarginalModel& m, double z) {
  switch (m.kind) {
    case MarginalModel::Kind::Frechet:
      if (!(z > 0.0)) {
        throw std::domain_error("sim: Frechet data must be positive");
      }
      return std::exp(-std::pow(z / m.sigma, -m.alpha));
    case MarginalModel::Kind::Pareto:
      if (!(z > m.sigma)) {
        throw std::domain_error("sim: Pareto data must exceed the scale");
      }
      return 1.0 - std::pow(z / m.sigma, -m.alpha);
  }
  return 0.0;
}

double marginal_quantile(const MarginalModel& m, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("sim: quantile level must be in (0,1)");
  }
  switch (m.kind) {
    case MarginalModel::Kind::Frechet:
      return m.sigma * std::pow(-std::log(p), -1.0 / m.alpha);
    case MarginalModel::Kind::Pareto:
      return m.sigma * std::pow(1.0 - p, -1.0 / m.alpha);
  }
  return 0.0;
}

MarginalModel fit_marginal(const Eigen::VectorXd& column,
                           MarginalModel::Kind kind) {
  const int n = static_cast<int>(column.size());
  if (n < 2) throw std::domain_error("sim: marginal fit needs n >= 2");
  if (!(column.minCoeff() > 0.0)) {
    throw std::domain_error("sim: marginal fit needs positive data");
  }
  if (kind == MarginalModel::Kind::Pareto) {
    const double sigma = column.minCoeff();
    const double alpha = n / (column.array() / sigma).log().sum();
    return {kind, alpha, sigma};
  }
  // Frechet via the Weibull reduction y = 1/z: shape solves
  // sum y^k ln y / sum y^k - 1/k = mean(ln y)
  const Eigen::ArrayXd y = column.array().inverse();
  const Eigen::ArrayXd ly = y.log();
  const double mean_ly = ly.mean();
  const auto g = [&](double k) {
    const Eigen::ArrayXd yk = (k * ly).exp();
    return (yk * ly).sum() / yk.sum() - 1.0 / k - mean_ly;
  };
  double lo = 1e-3, hi = 1.0;
  while (g(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e6) throw numeric_error("sim: Frechet MLE failed to bracket");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-12 * hi) break;
  }
  const double k = 0.5 * (lo + hi);
  const double lambda = std::pow((k * ly).exp().mean(), 1.0 / k);
  return {kind, k, 1.0 / lambda};
}

Eigen::MatrixXd apply_marginal(const UniformSample& sample,
                               const MarginalModel& m) {
  Eigen::MatrixXd out(sample.n(), sample.d());
  for (int j = 0; j < sample.d(); ++j) {
    for (int i = 0; i < sample.n(); ++i) {
      out(i, j) = marginal_quantile(m, sample.values(i, j));
    }
  }
  return out;
}

UniformSample to_uniform(const Eigen::MatrixXd& data,
                         const std::vector<MarginalModel>& marginals) {
  if (static_cast<int>(marginals.size()) != data.cols()) {
    throw std::domain_error("sim: one marginal model per column required");
  }
  UniformSample out;
  out.values.resize(data.rows(), data.cols());
  out.provenance = Provenance::ParametricFitted;
  for (int j = 0; j < data.cols(); ++j) {
    for (int i = 0; i < data.rows(); ++i) {
      out.values(i, j) = std::clamp(marginal_cdf(marginals[j], data(i, j)),
                                    kInteriorLo, kInteriorHi);
    }
  }
  return out;
}

UniformSample to_uniform_ranks(const Eigen::MatrixXd& data) {
  const int n = static_cast<int>(data.rows());
  const int d = static_cast<int>(data.cols());
  UniformSample out;
  out.values.resize(n, d);
  out.provenance = Provenance::Ranks;
  std::vector<int> idx(n);
  for (int j = 0; j < d; ++j) {
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return data(a, j) < data(b, j);
    });
    for (int r = 0; r < n; ++r) {
      out.values(idx[r], j) = (r + 1.0) / (n + 1.0);
    }
  }
  return out;
}

} // namespace cnev
