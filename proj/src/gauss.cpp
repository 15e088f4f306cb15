#include "cnev/gauss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cnev {

namespace {
constexpr double kSqrt2 = 1.4142135623730950488;
constexpr double kTwoPi = 6.2831853071795864769;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
} // namespace

double clamp_prob(double p) { return std::clamp(p, kProbFloor, kProbCeil); }

double std_normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

// Wichura's algorithm AS 241 (PPND16), accurate to ~1e-16 over (0,1).
double std_normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("std_normal_quantile: p must be in (0,1)");
  }
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        q * (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                   6.7265770927008700853e4) *
                      r +
                  4.5921953931549871457e4) *
                     r +
                 1.3731693765509461125e4) *
                    r +
                1.9715909503065514427e3) *
                   r +
               1.3314166789178437745e2) *
                  r +
              3.3871328727963666080e0);
    const double den =
        (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
              3.9307895800092710610e4) *
                 r +
             2.1213794301586595867e4) *
                r +
            5.3941960214247511077e3) *
               r +
           6.8718700749205790830e2) *
              r +
          4.2313330701600911252e1) *
             r +
         1.0);
    return num / den;
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    const double num =
        (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) *
                 r +
             1.27045825245236838258e0) *
                r +
            3.64784832476320460504e0) *
               r +
           5.76949722146069140550e0) *
              r +
          4.63033784615654529590e0) *
             r +
         1.42343711074968357734e0);
    const double den =
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) *
                 r +
             1.48103976427480074590e-1) *
                r +
            6.89767334985100004550e-1) *
               r +
           1.67638483018380384940e0) *
              r +
          2.05319162663775882187e0) *
             r +
         1.0);
    val = num / den;
  } else {
    r -= 5.0;
    const double num =
        (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) *
                 r +
             2.65321895265761230930e-2) *
                r +
            2.96560571828504891230e-1) *
               r +
           1.78482653991729133580e0) *
              r +
          5.46378491116411436990e0) *
             r +
         6.65790464350110377720e0);
    const double den =
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) *
                 r +
             7.86869131145613259100e-4) *
                r +
            1.48753612908506148525e-2) *
               r +
           1.36929880922735805310e-1) *
              r +
          5.99832206555887937690e-1) *
             r +
         1.0);
    val = num / den;
  }
  return (q < 0.0) ? -val : val;
}

// Genz (2004) rectangle-probability scheme: Gauss-Legendre quadrature along
// the correlation path, 6/12/20 nodes depending on |r|.
double bvn_upper(double h, double k, double r) {
  static const double w6[] = {0.1713244923791705, 0.3607615730481384,
                              0.4679139345726904};
  static const double x6[] = {0.9324695142031522, 0.6612093864662647,
                              0.2386191860831970};
  static const double w12[] = {0.04717533638651177, 0.1069393259953183,
                               0.1600783285433464,  0.2031674267230659,
                               0.2334925365383547,  0.2491470458134029};
  static const double x12[] = {0.9815606342467191, 0.9041172563704750,
                               0.7699026741943050, 0.5873179542866171,
                               0.3678314989981802, 0.1252334085114692};
  static const double w20[] = {0.01761400713915212, 0.04060142980038694,
                               0.06267204833410906, 0.08327674157670475,
                               0.1019301198172404,  0.1181945319615184,
                               0.1316886384491766,  0.1420961093183821,
                               0.1491729864726037,  0.1527533871307259};
  static const double x20[] = {0.9931285991850949, 0.9639719272779138,
                               0.9122344282513259, 0.8391169718222188,
                               0.7463319064601508, 0.6360536807265150,
                               0.5108670019508271, 0.3737060887154196,
                               0.2277858511416451, 0.07652652113349733};

  const double* w;
  const double* x;
  int lg;
  const double ar = std::abs(r);
  if (ar < 0.3) {
    lg = 3;
    w = w6;
    x = x6;
  } else if (ar < 0.75) {
    lg = 6;
    w = w12;
    x = x12;
  } else {
    lg = 10;
    w = w20;
    x = x20;
  }

  double hk = h * k;
  double bvn = 0.0;
  if (ar < 0.925) {
    if (ar > 0.0) {
      const double hs = 0.5 * (h * h + k * k);
      const double asr = std::asin(r);
      for (int i = 0; i < lg; ++i) {
        for (int is = -1; is <= 1; is += 2) {
          const double sn = std::sin(0.5 * asr * (is * x[i] + 1.0));
          bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
        }
      }
      bvn = bvn * asr / (2.0 * kTwoPi);
    }
    return bvn + std_normal_cdf(-h) * std_normal_cdf(-k);
  }

  double kk = k;
  if (r < 0.0) {
    kk = -kk;
    hk = -hk;
  }
  if (ar < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - kk) * (h - kk);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    double asr = -(bs / as + hk) / 2.0;
    if (asr > -100.0) {
      bvn = a * std::exp(asr) *
            (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 +
             c * d * as * as / 5.0);
    }
    if (-hk < 100.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * std_normal_cdf(-b / a) *
             b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (int i = 0; i < lg; ++i) {
      for (int is = -1; is <= 1; is += 2) {
        const double xs = a * (is * x[i] + 1.0);
        const double xs2 = xs * xs;
        asr = -(bs / xs2 + hk) / 2.0;
        if (asr > -100.0) {
          const double rs = std::sqrt(1.0 - xs2);
          bvn += a * w[i] * std::exp(asr) *
                 (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
                  (1.0 + c * xs2 * (1.0 + d * xs2)));
        }
      }
    }
    bvn = -bvn / kTwoPi;
  }
  if (r > 0.0) {
    return bvn + std_normal_cdf(-std::max(h, kk));
  }
  bvn = -bvn;
  if (kk > h) {
    bvn += std_normal_cdf(kk) - std_normal_cdf(h);
  }
  return bvn;
}

double bvn_copula_cdf(double u, double v, double rho) {
  if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0)) {
    throw std::domain_error("bvn_copula_cdf: u, v must be in [0,1]");
  }
  if (std::abs(rho) > 1.0) {
    throw std::domain_error("bvn_copula_cdf: |rho| must be <= 1");
  }
  if (u == 0.0 || v == 0.0) return 0.0;
  if (u == 1.0) return v;
  if (v == 1.0) return u;
  if (rho == 1.0) return std::min(u, v);
  if (rho == -1.0) return std::max(u + v - 1.0, 0.0);
  const double x = std_normal_quantile(u);
  const double y = std_normal_quantile(v);
  return bvn_upper(-x, -y, rho);
}

double bvn_copula_cond(double u, double v, double rho) {
  if (!(v > 0.0 && v < 1.0)) {
    throw std::domain_error("bvn_copula_cond: conditioning v must be in (0,1)");
  }
  if (std::abs(rho) >= 1.0) {
    throw std::domain_error("bvn_copula_cond: degenerate correlation |rho| = 1");
  }
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  const double x = std_normal_quantile(clamp_prob(u));
  const double y = std_normal_quantile(clamp_prob(v));
  return std_normal_cdf((x - rho * y) / std::sqrt(1.0 - rho * rho));
}

double bvn_copula_density_scores(double x, double y, double rho) {
  const double s = 1.0 - rho * rho;
  return std::exp(-0.5 * (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / s) /
         std::sqrt(s);
}

double bvn_copula_density(double u, double v, double rho) {
  if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0)) {
    throw std::domain_error("bvn_copula_density: u, v must be in (0,1)");
  }
  if (std::abs(rho) >= 1.0) {
    throw std::domain_error("bvn_copula_density: degenerate correlation");
  }
  return bvn_copula_density_scores(std_normal_quantile(u),
                                   std_normal_quantile(v), rho);
}

} // namespace cnev
