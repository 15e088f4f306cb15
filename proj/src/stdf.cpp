#include "cnev/stdf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <functional>
#include <limits>
#include <mutex>
#include <string>

#include "cnev/errors.hpp"
#include "cnev/gauss.hpp"

namespace cnev {

namespace {

QuadratureRule make_gauss_legendre_01(int n) {
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int m = (n + 1) / 2;
  for (int i = 1; i <= m; ++i) {
    double z = std::cos(M_PI * (i - 0.25) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    rule.nodes[i - 1] = 0.5 * (1.0 - z);
    rule.nodes[n - i] = 0.5 * (1.0 + z);
    rule.weights[i - 1] = 1.0 / ((1.0 - z * z) * pp * pp);
    rule.weights[n - i] = rule.weights[i - 1];
  }
  return rule;
}

// Tail values feed the normal quantile; the deep floor keeps the joint
// survival term honest where the fold Jacobian is large.
const double kTailClampLo = 1e-300;
const double kTailClampHi = 1.0 - 1e-15;

[[noreturn]] void quadrature_failure(const PairEvaluator& pair, double w_j,
                                     double w_k, int node, double w0) {
  throw numeric_error("stdf: non-finite quadrature term for pair (" +
                      family_spec(pair.fam_j()) + ", " +
                      family_spec(pair.fam_k()) + "), rho=" +
                      std::to_string(pair.rho()) + " at (w_j, w_k)=(" +
                      std::to_string(w_j) + ", " + std::to_string(w_k) +
                      "), node " + std::to_string(node) + " (w0=" +
                      std::to_string(w0) + ")");
}

// Scratch arrays for the batched node sweep, reused across calls.
struct PairScratch {
  Eigen::ArrayXd bj, bpj, bk, bpk, qj, qk, joint, tmp;
  void resize(int n) {
    if (bj.size() != n) {
      bj.resize(n); bpj.resize(n); bk.resize(n); bpk.resize(n);
      qj.resize(n); qk.resize(n); joint.resize(n); tmp.resize(n);
    }
  }
};

PairScratch& scratch() {
  thread_local PairScratch ws;
  return ws;
}

// Vectorized tail function over all quadrature nodes of one side.
void tail_batch(const LinkingFamily& fam, double w, const Eigen::ArrayXd& logw0,
                Eigen::ArrayXd& b, Eigen::ArrayXd& bp, Eigen::ArrayXd& tmp,
                bool want_bp) {
  const double th = fam.theta;
  const double logw = std::log(w);
  switch (fam.family) {
    case Family::ReflectedClayton: {
      tmp = (th * (logw0 - logw)).exp();             // r = (w0/w)^theta
      b = (-(1.0 + 1.0 / th) * tmp.log1p()).exp();
      if (want_bp) bp = (th + 1.0) / w * tmp * b / (1.0 + tmp);
      return;
    }
    case Family::Gumbel: {
      tmp = (th * (logw - logw0)).exp();             // g = (w/w0)^theta
      Eigen::ArrayXd lg = tmp.log1p();
      b = -((1.0 / th - 1.0) * lg).expm1();
      if (want_bp) bp = (th - 1.0) / w * tmp * ((1.0 / th - 2.0) * lg).exp();
      return;
    }
    case Family::HuslerReissTail: {
      tmp = th * (logw - logw0) - 0.5 / th;
      for (int i = 0; i < tmp.size(); ++i) {
        b[i] = std_normal_cdf(tmp[i]);
        if (want_bp) bp[i] = std_normal_pdf(tmp[i]) * th / w;
      }
      return;
    }
    default:
      throw capability_error("stdf: family lacks a tail function");
  }
}

// One sweep over both quadrature segments; fills V and, when requested, all
// three partial derivatives of the Prop-4 integral representation.
VDerivs integrate_pair(const PairEvaluator& pair, double w_j, double w_k,
                       bool partials) {
  const auto& wts = pair.node_weights();
  const double rho = pair.rho();
  const int n = static_cast<int>(wts.size());

  PairScratch& ws = scratch();
  ws.resize(n);
  tail_batch(pair.fam_j(), w_j, pair.log_abscissae(), ws.bj, ws.bpj, ws.tmp,
             partials);
  tail_batch(pair.fam_k(), w_k, pair.log_abscissae(), ws.bk, ws.bpk, ws.tmp,
             partials);
  for (int i = 0; i < n; ++i) {
    ws.qj[i] = std_normal_quantile(std::clamp(ws.bj[i], kTailClampLo, kTailClampHi));
    ws.qk[i] = std_normal_quantile(std::clamp(ws.bk[i], kTailClampLo, kTailClampHi));
  }

  // joint survival bvn term, Gauss-Legendre along the correlation path with
  // the path kernel cached per pair; Phi(-h)Phi(-k) is just bj*bk
  if (rho == 0.0) {
    ws.joint = ws.bj * ws.bk;
  } else if (std::abs(rho) < 0.925) {
    ws.joint = ws.bj * ws.bk;
    const auto& sn = pair.path_sin();
    const auto& cw = pair.path_weight();
    ws.tmp = -0.5 * (ws.qj.square() + ws.qk.square());
    for (int t = 0; t < sn.size(); ++t) {
      ws.joint += cw[t] * ((ws.qj * ws.qk * sn[t] + ws.tmp) /
                           (1.0 - sn[t] * sn[t])).exp();
    }
  } else {
    for (int i = 0; i < n; ++i) {
      ws.joint[i] = bvn_upper(-ws.qj[i], -ws.qk[i], rho);
    }
  }

  double acc_v = ((ws.bj + ws.bk - ws.joint) * wts).sum();
  double acc_j = 0.0, acc_k = 0.0, acc_jk = 0.0;
  if (partials) {
    const double s2 = 1.0 - rho * rho;
    const double s = std::sqrt(s2);
    for (int i = 0; i < n; ++i) {
      acc_j += wts[i] * ws.bpj[i] * std_normal_cdf((rho * ws.qj[i] - ws.qk[i]) / s);
      acc_k += wts[i] * ws.bpk[i] * std_normal_cdf((rho * ws.qk[i] - ws.qj[i]) / s);
    }
    ws.tmp = (-0.5 / s2 * (rho * rho * (ws.qj.square() + ws.qk.square()) -
                           2.0 * rho * ws.qj * ws.qk)).exp();
    acc_jk = -(wts * ws.bpj * ws.bpk * ws.tmp).sum() / s;
  }
  if (!std::isfinite(acc_v) ||
      (partials && !(std::isfinite(acc_j) && std::isfinite(acc_k) &&
                     std::isfinite(acc_jk)))) {
    quadrature_failure(pair, w_j, w_k, -1, 0.0);
  }
  return {acc_v, acc_j, acc_k, acc_jk};
}

void check_positive_args(double w_j, double w_k, const char* who) {
  if (!(w_j > 0.0 && w_k > 0.0)) {
    throw std::domain_error(std::string(who) + ": arguments must be positive");
  }
}

double golden_section(const std::function<double(double)>& f, double a,
                      double b, bool maximize, double tol = 1e-10) {
  const double gr = 0.61803398874989485;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    const bool pick_c = maximize ? (fc > fd) : (fc < fd);
    if (pick_c) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return f(0.5 * (a + b));
}

} // namespace

const QuadratureRule& gauss_legendre_01(int n) {
  static std::map<int, QuadratureRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, make_gauss_legendre_01(n)).first;
  }
  return it->second;
}

PairEvaluator::PairEvaluator(LinkingFamily fam_j, LinkingFamily fam_k,
                             double rho, int n_q)
    : fam_j_(fam_j), fam_k_(fam_k), rho_(rho), n_q_(n_q) {
  if (!(has_upper_tail_dep(fam_j) && has_upper_tail_dep(fam_k))) {
    throw capability_error(
        "stdf: PairEvaluator needs upper-tail-dependent linking families");
  }
  if (n_q < 10) throw std::domain_error("stdf: n_q must be at least 10");
  if (!(std::abs(rho) <= 1.0)) {
    throw std::domain_error("stdf: |rho| must be <= 1");
  }
  if (std::abs(rho) == 1.0 &&
      (fam_j.family != fam_k.family || fam_j.theta != fam_k.theta)) {
    throw std::domain_error(
        "stdf: rho = 1 with distinct linking copulas is not supported");
  }
  alpha_ = quadrature_alpha(fam_j, fam_k);

  // The A.5 identity holds for any fold exponent >= alpha_{j,k}; scaling it
  // up adds vanishing orders at z = 0, which cures the fractional-power kink
  // the minimal exponent leaves behind.  Segment 1 is graded by w0 = y^3 for
  // the same reason at its w0 -> 0 end.
  const double fold = 2.5 * alpha_;
  const double grade = 3.0;
  const QuadratureRule& rule = gauss_legendre_01(n_q);
  w0_.resize(2 * n_q);
  wt_.resize(2 * n_q);
  for (int i = 0; i < n_q; ++i) {
    const double y = rule.nodes[i];
    w0_[i] = std::pow(y, grade);
    wt_[i] = rule.weights[i] * grade * std::pow(y, grade - 1.0);
    w0_[n_q + i] = std::pow(y, -fold);
    wt_[n_q + i] = rule.weights[i] * fold * std::pow(y, -fold - 1.0);
  }
  logw0_ = w0_.log();

  if (std::abs(rho_) > 0.0 && std::abs(rho_) < 0.925) {
    // Gauss-Legendre nodes of the correlation-path integral; only the
    // per-node exponentials depend on the arguments.
    const int lg = std::abs(rho_) < 0.3 ? 6 : (std::abs(rho_) < 0.75 ? 12 : 20);
    const QuadratureRule& path = gauss_legendre_01(lg);
    const double asr = std::asin(rho_);
    path_sin_.resize(lg);
    path_weight_.resize(lg);
    for (int i = 0; i < lg; ++i) {
      path_sin_[i] = std::sin(asr * path.nodes[i]);
      path_weight_[i] = path.weights[i] * asr / (2.0 * M_PI);
    }
  }
}

double V(const PairEvaluator& pair, double w_j, double w_k) {
  check_positive_args(w_j, w_k, "stdf: V");
  const double scale = 0.5 * (w_j + w_k);
  return scale * integrate_pair(pair, w_j / scale, w_k / scale, false).v;
}

VDerivs V_partials(const PairEvaluator& pair, double w_j, double w_k) {
  check_positive_args(w_j, w_k, "stdf: V_partials");
  if (std::abs(pair.rho()) >= 1.0) {
    throw std::domain_error("stdf: V_partials needs |rho| < 1");
  }
  const double scale = 0.5 * (w_j + w_k);
  VDerivs d = integrate_pair(pair, w_j / scale, w_k / scale, true);
  d.v *= scale;      // V is 1-homogeneous
  d.djk /= scale;    // cross partial is (-1)-homogeneous
  return d;
}

double ev_cdf(const PairEvaluator& pair, double u_j, double u_k) {
  if (!(u_j > 0.0 && u_j < 1.0 && u_k > 0.0 && u_k < 1.0)) {
    throw std::domain_error("stdf: ev_cdf needs u in (0,1)");
  }
  return std::exp(-V(pair, -std::log(u_j), -std::log(u_k)));
}

double ev_logdensity(const PairEvaluator& pair, double u_j, double u_k) {
  if (!(u_j > 0.0 && u_j < 1.0 && u_k > 0.0 && u_k < 1.0)) {
    throw std::domain_error("stdf: ev_density needs u in (0,1)");
  }
  const double w_j = -std::log(u_j), w_k = -std::log(u_k);
  const VDerivs d = V_partials(pair, w_j, w_k);
  const double bracket = d.dj * d.dk - d.djk;
  if (!(bracket > 0.0)) return -std::numeric_limits<double>::infinity();
  return -d.v + std::log(bracket) + w_j + w_k;
}

double ev_density(const PairEvaluator& pair, double u_j, double u_k) {
  return std::exp(ev_logdensity(pair, u_j, u_k));
}

double lambda_U(const PairEvaluator& pair) {
  return 2.0 - V(pair, 1.0, 1.0);
}

double V_degenerate(const std::vector<LinkingFamily>& fams,
                    const Eigen::VectorXd& w) {
  const int d = static_cast<int>(fams.size());
  if (d < 1 || w.size() != d) {
    throw std::domain_error("stdf: V_degenerate dimension mismatch");
  }
  for (const auto& fam : fams) {
    if (!has_boundary_density(fam)) {
      throw capability_error(
          "stdf: V_degenerate needs boundary-continuous linking families");
    }
  }
  if (!(w.minCoeff() > 0.0)) {
    throw std::domain_error("stdf: V_degenerate needs positive weights");
  }

  const auto envelope_arg = [&](double v) {
    int best = 0;
    double best_val = w[0] * boundary_density(fams[0], v);
    for (int j = 1; j < d; ++j) {
      const double val = w[j] * boundary_density(fams[j], v);
      if (val > best_val) {
        best_val = val;
        best = j;
      }
    }
    return best;
  };
  const auto envelope = [&](double v) {
    double best = 0.0;
    for (int j = 0; j < d; ++j) {
      best = std::max(best, w[j] * boundary_density(fams[j], v));
    }
    return best;
  };

  // locate the kinks of the upper envelope, then integrate smooth segments
  std::vector<double> cuts = {0.0};
  const int m = 2048;
  int prev = envelope_arg(0.0);
  for (int i = 1; i <= m; ++i) {
    const double v = static_cast<double>(i) / m;
    const int cur = envelope_arg(v);
    if (cur != prev) {
      double lo = (i - 1.0) / m, hi = v;
      const auto diff = [&](double t) {
        return w[prev] * boundary_density(fams[prev], t) -
               w[cur] * boundary_density(fams[cur], t);
      };
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (diff(mid) >= 0.0) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const double cut = 0.5 * (lo + hi);
      // argmax flips from a tie at v = 0 produce cuts collapsing onto the
      // endpoint; the graded first panel covers those
      if (cut > 1e-10) cuts.push_back(cut);
      prev = cur;
    }
  }
  cuts.push_back(1.0);

  const QuadratureRule& rule = gauss_legendre_01(40);
  double total = 0.0;
  for (size_t seg = 0; seg + 1 < cuts.size(); ++seg) {
    const double a = cuts[seg], b = cuts[seg + 1];
    if (b - a < 1e-15) continue;
    double acc = 0.0;
    if (a == 0.0) {
      // grade v = b y^10: Clayton boundary densities have a v^theta kink
      // here, and theta can be well below one
      for (int i = 0; i < rule.nodes.size(); ++i) {
        const double y = rule.nodes[i];
        acc += rule.weights[i] * 10.0 * std::pow(y, 9.0) *
               envelope(b * std::pow(y, 10.0));
      }
    } else {
      for (int i = 0; i < rule.nodes.size(); ++i) {
        acc += rule.weights[i] * envelope(a + (b - a) * rule.nodes[i]);
      }
    }
    total += acc * (b - a);
  }
  return total;
}

double clayton_degenerate_V11(double theta_j, double theta_k) {
  if (!(theta_j > 0.0 && theta_k > 0.0)) {
    throw std::domain_error("stdf: Clayton parameters must be positive");
  }
  if (theta_j == theta_k) return 1.0;
  const double hi = std::max(theta_j, theta_k);
  const double lo = std::min(theta_j, theta_k);
  const double vt = (hi + 1.0) / (hi - lo);
  // (vt-1)^(vt-1) / vt^vt, in logs to survive vt -> infinity
  const double log_term = (vt - 1.0) * std::log(vt - 1.0) - vt * std::log(vt);
  return 1.0 + std::exp(log_term);
}

double clayton_degenerate_lambda(double theta_j, double theta_k) {
  return 2.0 - clayton_degenerate_V11(theta_j, theta_k);
}

std::pair<double, double> support_exponents(const LinkingFamily& fam_1,
                                            const LinkingFamily& fam_2) {
  if (!has_boundary_density(fam_1) || !has_boundary_density(fam_2)) {
    throw capability_error(
        "stdf: support exponents need boundary-continuous families");
  }
  const auto ratio = [&](double v) {
    const double c2 = boundary_density(fam_2, v);
    const double c1 = boundary_density(fam_1, v);
    if (c2 <= 0.0) return c1 <= 0.0 ? 1.0 : 1e300;
    return c1 / c2;
  };

  const int m = 2001;
  int arg_max = 1, arg_min = 1;
  double best_max = -1.0, best_min = 1e300;
  for (int i = 1; i <= m; ++i) {
    const double r = ratio(static_cast<double>(i) / m);
    if (r > best_max) {
      best_max = r;
      arg_max = i;
    }
    if (r < best_min) {
      best_min = r;
      arg_min = i;
    }
  }
  const auto refine = [&](int idx, bool maximize) {
    const double lo = std::max(1e-14, (idx - 1.0) / m);
    const double hi = std::min(1.0, (idx + 1.0) / m);
    return golden_section(ratio, lo, hi, maximize);
  };
  double xi_l = refine(arg_max, true);
  double xi_u = refine(arg_min, false);
  if (xi_u < 1e-8) xi_u = 0.0;
  if (xi_l < 1e-8) xi_l = 0.0;
  return {xi_l, xi_u};
}

} // namespace cnev
