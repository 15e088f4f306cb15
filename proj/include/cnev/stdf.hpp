#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cnev/corr.hpp"
#include "cnev/linking.hpp"

namespace cnev {

// Gauss-Legendre rule on (0, 1); cached per node count, thread safe.
struct QuadratureRule {
  Eigen::ArrayXd nodes;
  Eigen::ArrayXd weights;
};
const QuadratureRule& gauss_legendre_01(int n);

// Everything needed to evaluate the exponent function V_{j,k} of one
// bivariate margin: the two linking tail functions, the latent correlation,
// and the precomputed quadrature layout of the split
//   V = int_0^1 I(w0) dw0 + alpha int_0^1 I(z^-alpha) z^{-alpha-1} dz.
class PairEvaluator {
 public:
  PairEvaluator(LinkingFamily fam_j, LinkingFamily fam_k, double rho,
                int n_q = 35);

  const LinkingFamily& fam_j() const { return fam_j_; }
  const LinkingFamily& fam_k() const { return fam_k_; }
  double rho() const { return rho_; }
  int n_q() const { return n_q_; }
  double alpha() const { return alpha_; }

  // Quadrature node abscissae (both segments) and their effective weights.
  const Eigen::ArrayXd& abscissae() const { return w0_; }
  const Eigen::ArrayXd& log_abscissae() const { return logw0_; }
  const Eigen::ArrayXd& node_weights() const { return wt_; }

  // Cached correlation-path kernel of the rectangle-probability rule.
  const Eigen::ArrayXd& path_sin() const { return path_sin_; }
  const Eigen::ArrayXd& path_weight() const { return path_weight_; }

 private:
  LinkingFamily fam_j_, fam_k_;
  double rho_;
  int n_q_;
  double alpha_;
  Eigen::ArrayXd w0_, logw0_, wt_;
  Eigen::ArrayXd path_sin_, path_weight_;
};

struct VDerivs {
  double v;   // V(w_j, w_k)
  double dj;  // dV/dw_j
  double dk;  // dV/dw_k
  double djk; // d2V/dw_j dw_k  (<= 0)
};

// Exponent function; 1-homogeneous by construction (arguments are rescaled
// to a common magnitude before quadrature).
double V(const PairEvaluator& pair, double w_j, double w_k);

VDerivs V_partials(const PairEvaluator& pair, double w_j, double w_k);

// C^EV(u_j, u_k) = exp{-V(-ln u_j, -ln u_k)} and its density.
double ev_cdf(const PairEvaluator& pair, double u_j, double u_k);
double ev_density(const PairEvaluator& pair, double u_j, double u_k);
double ev_logdensity(const PairEvaluator& pair, double u_j, double u_k);

// Upper tail dependence coefficient 2 - V(1,1).
double lambda_U(const PairEvaluator& pair);

// Degenerate-Sigma (all-ones) exponent function
//   V(w) = int_0^1 max_j { w_j c_j(1, v) } dv,
// computed by locating the kinks of the upper envelope and applying
// Gauss-Legendre on each smooth segment.
double V_degenerate(const std::vector<LinkingFamily>& fams,
                    const Eigen::VectorXd& w);

// Closed form for the degenerate path with two Clayton linking copulas.
double clayton_degenerate_V11(double theta_j, double theta_k);
double clayton_degenerate_lambda(double theta_j, double theta_k);

// (xi_L, xi_U): the density support of the degenerate pair is
// { u_1^{xi_L} < u_2 < u_1^{xi_U} }, from the extrema of c_1(1,v)/c_2(1,v).
std::pair<double, double> support_exponents(const LinkingFamily& fam_1,
                                            const LinkingFamily& fam_2);

} // namespace cnev
