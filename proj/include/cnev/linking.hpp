#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cnev/errors.hpp"

namespace cnev {

enum class Family {
  ReflectedClayton, // "rcl": theta > 0, upper tail dependent
  Gumbel,           // "gum": theta >= 1, upper tail dependent
  Clayton,          // "cl":  theta > 0, boundary-continuous density
  Fgm,              // "fgm": theta in [-1,1], boundary-continuous density
  Frank,            // "frk": theta != 0, boundary-continuous density
  HuslerReissTail,  // "hr":  alpha > 0, tail functions only
};

// A one-parameter bivariate linking copula C_{j,0}.  Immutable after
// construction; all evaluation below is pure.
struct LinkingFamily {
  Family family;
  double theta;
};

// Validates the parameter against the family domain; throws std::domain_error.
LinkingFamily make_family(Family family, double theta);

// Parses "code:param", e.g. "rcl:1.5", "gum:2.0", "cl:0.8", "fgm:-0.5",
// "frk:3.0", "hr:1.0".  Throws std::invalid_argument on bad input.
LinkingFamily parse_family(std::string_view spec);

// Comma-separated list with an optional repeat suffix: "rcl:1.0x3,rcl:2.5x4".
std::vector<LinkingFamily> parse_family_list(std::string_view spec);

std::string family_code(Family family);
std::string family_spec(const LinkingFamily& fam);

// Capability flags deciding which exponent-function path a family supports.
bool has_upper_tail_dep(const LinkingFamily& fam);
bool has_boundary_density(const LinkingFamily& fam);
bool has_base_copula(const LinkingFamily& fam);

// Base copula surface.  u is the observed coordinate, v the latent one.
double cdf(const LinkingFamily& fam, double u, double v);
double density(const LinkingFamily& fam, double u, double v);

// C(u | v) = d C(u, v) / d v, and its inverse in u for fixed v in (0,1).
double cond_cdf(const LinkingFamily& fam, double u, double v);
double cond_inverse(const LinkingFamily& fam, double p, double v);

// Upper tail function b(w | w0) and its partial derivative in w.
double tail_b(const LinkingFamily& fam, double w, double w0);
double tail_b_partial(const LinkingFamily& fam, double w, double w0);

// Both at once, sharing the power-law work; the quadrature hot path.
void tail_b_and_partial(const LinkingFamily& fam, double w, double w0,
                        double& b, double& b_partial);

// Boundary density c(1, v), for families continuous on (0,1]^2.
double boundary_density(const LinkingFamily& fam, double v);

// phi such that b(w|w0) decays like w0^{-phi}; the Husler-Reiss tail decays
// faster than any polynomial and reports a nominal exponent of 2.
double tail_decay_exponent(const LinkingFamily& fam);

// Transform exponent 1/(min(phi_j, phi_k) - 1) of the tail change of
// variables used by the exponent-function quadrature.
double quadrature_alpha(const LinkingFamily& fam_j, const LinkingFamily& fam_k);

} // namespace cnev
