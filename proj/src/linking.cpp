#include "cnev/linking.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <cstdlib>
#include <limits>

#include "cnev/gauss.hpp"

namespace cnev {

namespace {

struct FamilyRecord {
  const char* code;
  Family family;
  bool upper_tail_dep;
  bool boundary_density;
  bool base_copula;
  const char* domain;
  bool (*valid)(double);
};

// One record per family; new families plug in here.
constexpr FamilyRecord kRegistry[] = {
    {"rcl", Family::ReflectedClayton, true, false, true, "theta > 0",
     [](double t) { return t > 0.0; }},
    {"gum", Family::Gumbel, true, false, true, "theta >= 1",
     [](double t) { return t >= 1.0; }},
    {"cl", Family::Clayton, false, true, true, "theta > 0",
     [](double t) { return t > 0.0; }},
    {"fgm", Family::Fgm, false, true, true, "theta in [-1,1]",
     [](double t) { return t >= -1.0 && t <= 1.0; }},
    {"frk", Family::Frank, false, true, true, "theta != 0",
     [](double t) { return t != 0.0 && std::isfinite(t); }},
    {"hr", Family::HuslerReissTail, true, false, false, "alpha > 0",
     [](double t) { return t > 0.0; }},
};

const FamilyRecord& record(Family f) {
  for (const auto& r : kRegistry) {
    if (r.family == f) return r;
  }
  throw std::logic_error("linking: unknown family tag");
}

[[noreturn]] void no_capability(const LinkingFamily& fam, const char* what) {
  throw capability_error("linking: family '" + family_code(fam.family) +
                         "' does not support " + what);
}

// ---- Clayton ----------------------------------------------------------

double cl_cdf(double th, double u, double v) {
  if (u <= 0.0 || v <= 0.0) return 0.0;
  if (u >= 1.0) return v;
  if (v >= 1.0) return u;
  return std::pow(std::pow(u, -th) + std::pow(v, -th) - 1.0, -1.0 / th);
}

double cl_cond(double th, double u, double v) {
  const double t = std::pow(u, -th) + std::pow(v, -th) - 1.0;
  return std::pow(t, -1.0 / th - 1.0) * std::pow(v, -th - 1.0);
}

double cl_cond_inverse(double th, double p, double v) {
  const double vt = std::pow(v, -th);
  const double t = std::pow(p * std::pow(v, th + 1.0), -th / (th + 1.0));
  const double ut = t + 1.0 - vt;
  if (ut <= 1.0) return 1.0; // p above the conditional mass reachable by u<1
  return std::pow(ut, -1.0 / th);
}

double cl_density(double th, double u, double v) {
  const double t = std::pow(u, -th) + std::pow(v, -th) - 1.0;
  return (th + 1.0) * std::pow(u * v, -th - 1.0) * std::pow(t, -1.0 / th - 2.0);
}

// ---- Gumbel -----------------------------------------------------------

double gum_cdf(double th, double u, double v) {
  if (u <= 0.0 || v <= 0.0) return 0.0;
  if (u >= 1.0) return v;
  if (v >= 1.0) return u;
  const double xu = -std::log(u), xv = -std::log(v);
  return std::exp(-std::pow(std::pow(xu, th) + std::pow(xv, th), 1.0 / th));
}

double gum_cond(double th, double u, double v) {
  const double xu = -std::log(u), xv = -std::log(v);
  const double s = std::pow(xu, th) + std::pow(xv, th);
  const double z = std::pow(s, 1.0 / th);
  return std::exp(xv - z) * std::pow(z, 1.0 - th) * std::pow(xv, th - 1.0);
}

// Solve cond(u|v) = p for u via monotone Newton on z = (x_u^th + x_v^th)^{1/th},
// with a bisection bracket as safeguard.
double gum_cond_inverse(double th, double p, double v) {
  const double x = -std::log(v);
  const double de1 = th - 1.0;
  const double con = std::log(p) - x - de1 * std::log(x);
  // g(z) = z + de1*ln z + con is increasing with g(x) = ln p < 0.
  double lo = x, hi = x * std::pow(2.0, 1.0 / th);
  while (hi + de1 * std::log(hi) + con < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) break;
  }
  double z = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double g = z + de1 * std::log(z) + con;
    if (std::abs(g) < 1e-14) break;
    if (g > 0.0) {
      hi = z;
    } else {
      lo = z;
    }
    if (hi - lo < 1e-13 * hi) break;
    const double gp = 1.0 + de1 / z;
    double zn = z - g / gp;
    if (!(zn > lo && zn < hi)) zn = 0.5 * (lo + hi);
    z = zn;
  }
  const double yt = std::pow(z, th) - std::pow(x, th);
  if (yt <= 0.0) return 1.0;
  return std::exp(-std::pow(yt, 1.0 / th));
}

double gum_density(double th, double u, double v) {
  const double xu = -std::log(u), xv = -std::log(v);
  const double s = std::pow(xu, th) + std::pow(xv, th);
  const double z = std::pow(s, 1.0 / th);
  return std::exp(-z) * std::pow(xu * xv, th - 1.0) *
         std::pow(s, 1.0 / th - 2.0) * (z + th - 1.0) / (u * v);
}

// ---- FGM --------------------------------------------------------------

double fgm_cond_inverse(double th, double p, double v) {
  const double a = th * (1.0 - 2.0 * v);
  if (std::abs(a) < 1e-12) return p;
  const double disc = (1.0 + a) * (1.0 + a) - 4.0 * a * p;
  return 2.0 * p / (1.0 + a + std::sqrt(disc));
}

// ---- Frank ------------------------------------------------------------

double frk_g(double th, double t) { return std::expm1(-th * t); }

double frk_cdf(double th, double u, double v) {
  if (u <= 0.0 || v <= 0.0) return 0.0;
  if (u >= 1.0) return v;
  if (v >= 1.0) return u;
  return -std::log1p(frk_g(th, u) * frk_g(th, v) / frk_g(th, 1.0)) / th;
}

double frk_cond(double th, double u, double v) {
  const double gu = frk_g(th, u), gv = frk_g(th, v), g1 = frk_g(th, 1.0);
  return std::exp(-th * v) * gu / (g1 + gu * gv);
}

double frk_cond_inverse(double th, double p, double v) {
  const double gv = frk_g(th, v), g1 = frk_g(th, 1.0);
  const double gu = p * g1 / (std::exp(-th * v) - p * gv);
  return -std::log1p(gu) / th;
}

double frk_density(double th, double u, double v) {
  const double gu = frk_g(th, u), gv = frk_g(th, v), g1 = frk_g(th, 1.0);
  const double den = g1 + gu * gv;
  return -th * g1 * std::exp(-th * (u + v)) / (den * den);
}

} // namespace

LinkingFamily make_family(Family family, double theta) {
  const auto& r = record(family);
  if (!std::isfinite(theta) || !r.valid(theta)) {
    throw std::domain_error(std::string("linking: parameter out of range for '") +
                            r.code + "' (" + r.domain + "), got " +
                            std::to_string(theta));
  }
  return LinkingFamily{family, theta};
}

LinkingFamily parse_family(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("linking: family spec '" + std::string(spec) +
                                "' is not of the form code:param");
  }
  const std::string_view code = spec.substr(0, colon);
  const std::string param(spec.substr(colon + 1));
  for (const auto& r : kRegistry) {
    if (code == r.code) {
      char* end = nullptr;
      const double theta = std::strtod(param.c_str(), &end);
      if (end == param.c_str() || *end != '\0') {
        throw std::invalid_argument("linking: bad parameter '" + param +
                                    "' in family spec");
      }
      return make_family(r.family, theta);
    }
  }
  throw std::invalid_argument("linking: unknown family code '" +
                              std::string(code) + "'");
}

std::vector<LinkingFamily> parse_family_list(std::string_view spec) {
  std::vector<LinkingFamily> out;
  size_t pos = 0;
  while (pos <= spec.size()) {
    size_t comma = spec.find(',', pos);
    if (comma == std::string_view::npos) comma = spec.size();
    std::string_view item = spec.substr(pos, comma - pos);
    int repeat = 1;
    if (const auto xm = item.rfind('x'); xm != std::string_view::npos &&
                                         xm > item.find(':') &&
                                         item.find(':') != std::string_view::npos) {
      const std::string count(item.substr(xm + 1));
      char* end = nullptr;
      const long n = std::strtol(count.c_str(), &end, 10);
      if (end != count.c_str() && *end == '\0' && n >= 1) {
        repeat = static_cast<int>(n);
        item = item.substr(0, xm);
      }
    }
    if (!item.empty()) {
      const LinkingFamily fam = parse_family(item);
      for (int i = 0; i < repeat; ++i) out.push_back(fam);
    }
    pos = comma + 1;
  }
  if (out.empty()) {
    throw std::invalid_argument("linking: empty family list");
  }
  return out;
}

std::string family_code(Family family) { return record(family).code; }

std::string family_spec(const LinkingFamily& fam) {
  return family_code(fam.family) + ":" + std::to_string(fam.theta);
}

bool has_upper_tail_dep(const LinkingFamily& fam) {
  return record(fam.family).upper_tail_dep;
}

bool has_boundary_density(const LinkingFamily& fam) {
  return record(fam.family).boundary_density;
}

bool has_base_copula(const LinkingFamily& fam) {
  return record(fam.family).base_copula;
}

double cdf(const LinkingFamily& fam, double u, double v) {
  u = std::clamp(u, 0.0, 1.0);
  v = std::clamp(v, 0.0, 1.0);
  switch (fam.family) {
    case Family::Clayton:
      return cl_cdf(fam.theta, u, v);
    case Family::ReflectedClayton:
      return u + v - 1.0 + cl_cdf(fam.theta, 1.0 - u, 1.0 - v);
    case Family::Gumbel:
      return gum_cdf(fam.theta, u, v);
    case Family::Fgm:
      return u * v * (1.0 + fam.theta * (1.0 - u) * (1.0 - v));
    case Family::Frank:
      return frk_cdf(fam.theta, u, v);
    case Family::HuslerReissTail:
      no_capability(fam, "a base copula cdf");
  }
  return 0.0;
}

double density(const LinkingFamily& fam, double u, double v) {
  if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0)) {
    throw std::domain_error("linking: density requires u, v in (0,1)");
  }
  switch (fam.family) {
    case Family::Clayton:
      return cl_density(fam.theta, u, v);
    case Family::ReflectedClayton:
      return cl_density(fam.theta, 1.0 - u, 1.0 - v);
    case Family::Gumbel:
      return gum_density(fam.theta, u, v);
    case Family::Fgm:
      return 1.0 + fam.theta * (1.0 - 2.0 * u) * (1.0 - 2.0 * v);
    case Family::Frank:
      return frk_density(fam.theta, u, v);
    case Family::HuslerReissTail:
      no_capability(fam, "a base copula density");
  }
  return 0.0;
}

double cond_cdf(const LinkingFamily& fam, double u, double v) {
  if (!(v > 0.0 && v < 1.0)) {
    throw std::domain_error("linking: cond_cdf requires v in (0,1)");
  }
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  switch (fam.family) {
    case Family::Clayton:
      return cl_cond(fam.theta, u, v);
    case Family::ReflectedClayton:
      return 1.0 - cl_cond(fam.theta, 1.0 - u, 1.0 - v);
    case Family::Gumbel:
      return gum_cond(fam.theta, u, v);
    case Family::Fgm:
      return u * (1.0 + fam.theta * (1.0 - u) * (1.0 - 2.0 * v));
    case Family::Frank:
      return frk_cond(fam.theta, u, v);
    case Family::HuslerReissTail:
      no_capability(fam, "a conditional cdf");
  }
  return 0.0;
}

double cond_inverse(const LinkingFamily& fam, double p, double v) {
  if (!(v > 0.0 && v < 1.0)) {
    throw std::domain_error("linking: cond_inverse requires v in (0,1)");
  }
  p = std::clamp(p, 1e-12, 1.0 - 1e-12);
  switch (fam.family) {
    case Family::Clayton:
      return cl_cond_inverse(fam.theta, p, v);
    case Family::ReflectedClayton:
      return 1.0 - cl_cond_inverse(fam.theta, 1.0 - p, 1.0 - v);
    case Family::Gumbel:
      return gum_cond_inverse(fam.theta, p, v);
    case Family::Fgm:
      return fgm_cond_inverse(fam.theta, p, v);
    case Family::Frank:
      return frk_cond_inverse(fam.theta, p, v);
    case Family::HuslerReissTail:
      no_capability(fam, "a conditional inverse");
  }
  return 0.0;
}

double tail_b(const LinkingFamily& fam, double w, double w0) {
  if (!(w >= 0.0) || !(w0 > 0.0)) {
    throw std::domain_error("linking: tail_b requires w >= 0, w0 > 0");
  }
  switch (fam.family) {
    case Family::ReflectedClayton: {
      if (w == 0.0) return 0.0;
      const double r = std::pow(w0 / w, fam.theta);
      return std::exp(-(1.0 + 1.0 / fam.theta) * std::log1p(r));
    }
    case Family::Gumbel: {
      if (w == 0.0) return 0.0;
      const double g = std::pow(w / w0, fam.theta);
      // 1 - (1+g)^{1/theta - 1}, cancellation-free for small g
      return -std::expm1((1.0 / fam.theta - 1.0) * std::log1p(g));
    }
    case Family::HuslerReissTail: {
      if (w == 0.0) return 0.0;
      const double a = fam.theta;
      return std_normal_cdf(a * std::log(w / w0) - 0.5 / a);
    }
    default:
      no_capability(fam, "an upper tail function");
  }
}

double tail_b_partial(const LinkingFamily& fam, double w, double w0) {
  if (!(w > 0.0) || !(w0 > 0.0)) {
    throw std::domain_error("linking: tail_b_partial requires w, w0 > 0");
  }
  double b, bp;
  tail_b_and_partial(fam, w, w0, b, bp);
  return bp;
}

void tail_b_and_partial(const LinkingFamily& fam, double w, double w0,
                        double& b, double& b_partial) {
  switch (fam.family) {
    case Family::ReflectedClayton: {
      const double th = fam.theta;
      const double r = std::pow(w0 / w, th);
      b = std::exp(-(1.0 + 1.0 / th) * std::log1p(r));
      b_partial = (th + 1.0) * r * b / ((1.0 + r) * w);
      return;
    }
    case Family::Gumbel: {
      const double th = fam.theta;
      const double g = std::pow(w / w0, th);
      const double lg = std::log1p(g);
      b = -std::expm1((1.0 / th - 1.0) * lg);
      b_partial = (th - 1.0) * (g / w) * std::exp((1.0 / th - 2.0) * lg);
      return;
    }
    case Family::HuslerReissTail: {
      const double a = fam.theta;
      const double z = a * std::log(w / w0) - 0.5 / a;
      b = std_normal_cdf(z);
      b_partial = std_normal_pdf(z) * a / w;
      return;
    }
    default:
      no_capability(fam, "an upper tail function");
  }
}

double boundary_density(const LinkingFamily& fam, double v) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::domain_error("linking: boundary_density requires v in [0,1]");
  }
  switch (fam.family) {
    case Family::Clayton:
      return (fam.theta + 1.0) * std::pow(v, fam.theta);
    case Family::Fgm:
      return 1.0 - fam.theta * (1.0 - 2.0 * v);
    case Family::Frank: {
      const double th = fam.theta;
      return th * std::exp(-th) * std::exp(th * v) / (1.0 - std::exp(-th));
    }
    default:
      no_capability(fam, "a boundary density c(1,.)");
  }
}

double tail_decay_exponent(const LinkingFamily& fam) {
  switch (fam.family) {
    case Family::ReflectedClayton:
      return 1.0 + fam.theta;
    case Family::Gumbel:
      return fam.theta;
    case Family::HuslerReissTail:
      // b(1|w0) decays faster than any polynomial here, so every transform
      // exponent keeps the folded integrand bounded; this nominal value
      // matches the fold to the log-normal tail scale 1/alpha^2.
      return 1.0 + fam.theta;
    default:
      no_capability(fam, "a tail decay exponent");
  }
}

double quadrature_alpha(const LinkingFamily& fam_j, const LinkingFamily& fam_k) {
  const double phi =
      std::min(tail_decay_exponent(fam_j), tail_decay_exponent(fam_k));
  if (phi <= 1.0 + 1e-12) {
    throw std::domain_error(
        "linking: degenerate tail exponent (phi <= 1); Gumbel needs theta > 1");
  }
  return 1.0 / (phi - 1.0);
}

} // namespace cnev
