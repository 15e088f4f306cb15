#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "cnev/corr.hpp"
#include "cnev/linking.hpp"

namespace cnev {

// Full model of the conditional-normal construction: d linking copulas plus
// the latent Gaussian correlation structure.
struct CnevModel {
  std::vector<LinkingFamily> families;
  CorrStructure structure;

  int dim() const { return static_cast<int>(families.size()); }
};

CnevModel make_model(std::vector<LinkingFamily> families, CorrStructure structure);

enum class Provenance { Known, ParametricFitted, Ranks };

struct UniformSample {
  Eigen::MatrixXd values; // n x d, strictly inside (0,1)
  Provenance provenance = Provenance::Known;

  int n() const { return static_cast<int>(values.rows()); }
  int d() const { return static_cast<int>(values.cols()); }
};

// Deterministic stream: any (seed, stream index) pair yields an independent,
// order-independent sequence.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);
  static RngStream substream(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64();
  double uniform();  // open interval (0,1)
  double normal();
  double exponential();

 private:
  std::uint64_t s_[4];
};

// Draws from the base conditional-normal copula: v0 ~ U(0,1),
// Z ~ N_d(0, Sigma), u_j = C_{j|0}^{-1}(Phi(Z_j) | v0).
UniformSample sample_base(const CnevModel& model, int n, std::uint64_t seed);

// Componentwise maxima over consecutive blocks of n_B rows; a trailing
// partial block is dropped.
Eigen::MatrixXd block_maxima(const Eigen::MatrixXd& raw, int n_B);

// Exact sampler for the degenerate-Sigma extreme-value limit, via the Poisson
// spectral representation with spectral densities c_j(1, .).
UniformSample sample_ev_degenerate(const std::vector<LinkingFamily>& fams,
                                   int n, std::uint64_t seed);

// Large-block approximation to the extreme-value limit for non-degenerate
// Sigma: block maxima of `block` base draws per output row, rank-transformed.
UniformSample sample_ev_approx(const CnevModel& model, int n,
                               std::uint64_t seed, int block = 2000,
                               std::uint64_t cell_cap = 4000000000ull);

// ---- univariate marginals -------------------------------------------------

struct MarginalModel {
  enum class Kind { Frechet, Pareto };
  Kind kind = Kind::Frechet;
  double alpha = 1.0; // shape, > 0
  double sigma = 1.0; // scale, > 0
};

double marginal_cdf(const MarginalModel& m, double z);
double marginal_quantile(const MarginalModel& m, double p);

// Maximum likelihood fit of one column.
MarginalModel fit_marginal(const Eigen::VectorXd& column, MarginalModel::Kind kind);

// Applies the same marginal quantile transform to every entry.
Eigen::MatrixXd apply_marginal(const UniformSample& sample, const MarginalModel& m);

// Probability integral transform with known or fitted marginals (one per
// column), or nonparametric rank scores rank/(n+1).
UniformSample to_uniform(const Eigen::MatrixXd& data,
                         const std::vector<MarginalModel>& marginals);
UniformSample to_uniform_ranks(const Eigen::MatrixXd& data);

} // namespace cnev
