#pragma once

namespace cnev {

// Probabilities are clamped to this range before quantile transforms so that
// quadrature integrands never produce infinities.
inline constexpr double kProbFloor = 1e-300;
inline constexpr double kProbCeil = 1.0 - 1e-16;

double clamp_prob(double p);

double std_normal_pdf(double x);

// Phi(x); saturates at 0/1 in the extreme tails, never throws.
double std_normal_cdf(double x);

// Phi^{-1}(p) for p in (0,1); throws std::domain_error outside.
double std_normal_quantile(double p);

// P(X > h, Y > k) for a standard bivariate normal pair with correlation r.
// Computed without cancellation, so it is accurate deep in the joint tail.
double bvn_upper(double h, double k, double r);

// Bivariate Gaussian copula C_N(u, v; rho).  Exact at rho = 0, +1, -1 and on
// the boundary of the unit square.
double bvn_copula_cdf(double u, double v, double rho);

// Conditional cdf C_N(u | v; rho) = Phi({Phi^{-1}(u) - rho Phi^{-1}(v)} / sqrt(1-rho^2)).
// Requires |rho| < 1.
double bvn_copula_cond(double u, double v, double rho);

// Copula density c_N(u, v; rho); requires u, v in (0,1) and |rho| < 1.
double bvn_copula_density(double u, double v, double rho);

// Density evaluated from normal scores x = Phi^{-1}(u), y = Phi^{-1}(v).
double bvn_copula_density_scores(double x, double y, double rho);

} // namespace cnev
