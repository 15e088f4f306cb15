#include "cnev/corr.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace cnev {

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double atanh_clamped(double r) {
  return std::atanh(std::clamp(r, -1.0 + 1e-15, 1.0 - 1e-15));
}

void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) {
    throw std::domain_error(std::string("corr: non-finite ") + what);
  }
}

std::vector<double> split_params(std::string_view s) {
  std::vector<double> out;
  size_t pos = 0;
  while (pos <= s.size()) {
    size_t comma = s.find(',', pos);
    if (comma == std::string_view::npos) comma = s.size();
    const std::string item(s.substr(pos, comma - pos));
    if (!item.empty()) {
      char* end = nullptr;
      const double x = std::strtod(item.c_str(), &end);
      if (end == item.c_str() || *end != '\0') {
        throw std::invalid_argument("corr: bad number '" + item +
                                    "' in structure spec");
      }
      out.push_back(x);
    }
    pos = comma + 1;
  }
  return out;
}

} // namespace

CorrStructure ar1_structure(int d, double rho) {
  if (d < 1) throw std::domain_error("corr: dimension must be positive");
  if (!(std::abs(rho) < 1.0)) {
    throw std::domain_error("corr: AR1 needs |rho| < 1");
  }
  CorrStructure s;
  s.kind = CorrKind::Ar1;
  s.dim = d;
  s.params = Eigen::VectorXd::Constant(1, rho);
  return s;
}

CorrStructure powexp_structure(double eta, double gamma, double alpha,
                               Eigen::MatrixXd distances) {
  if (!(eta > 0.0 && eta < 1.0)) throw std::domain_error("corr: powexp needs 0 < eta < 1");
  if (!(gamma > 0.0)) throw std::domain_error("corr: powexp needs gamma > 0");
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw std::domain_error("corr: powexp needs 0 < alpha <= 2");
  }
  if (distances.rows() != distances.cols() || distances.rows() < 1) {
    throw std::domain_error("corr: distance matrix must be square");
  }
  if (!distances.isApprox(distances.transpose(), 1e-12) ||
      distances.diagonal().cwiseAbs().maxCoeff() > 1e-12) {
    throw std::domain_error("corr: distance matrix must be symmetric with zero diagonal");
  }
  CorrStructure s;
  s.kind = CorrKind::PowExp;
  s.dim = static_cast<int>(distances.rows());
  s.params = Eigen::Vector3d(eta, gamma, alpha);
  s.distances = std::move(distances);
  return s;
}

CorrStructure one_factor_structure(Eigen::VectorXd rhos) {
  check_finite(rhos, "factor loadings");
  if (rhos.cwiseAbs().maxCoeff() >= 1.0) {
    throw std::domain_error("corr: one-factor needs |rho_j| < 1");
  }
  CorrStructure s;
  s.kind = CorrKind::OneFactor;
  s.dim = static_cast<int>(rhos.size());
  s.params = std::move(rhos);
  return s;
}

CorrStructure bifactor_structure(std::vector<int> groups,
                                 Eigen::VectorXd rhos) {
  check_finite(rhos, "factor loadings");
  if (static_cast<int>(groups.size()) != rhos.size()) {
    throw std::domain_error("corr: bifactor group labels and loadings disagree");
  }
  if (rhos.cwiseAbs().maxCoeff() > 1.0) {
    throw std::domain_error("corr: bifactor needs |rho_j| <= 1");
  }
  CorrStructure s;
  s.kind = CorrKind::Bifactor;
  s.dim = static_cast<int>(rhos.size());
  s.params = std::move(rhos);
  s.groups = std::move(groups);
  return s;
}

CorrStructure ones_structure(int d) {
  if (d < 1) throw std::domain_error("corr: dimension must be positive");
  CorrStructure s;
  s.kind = CorrKind::Ones;
  s.dim = d;
  return s;
}

CorrStructure identity_structure(int d) {
  if (d < 1) throw std::domain_error("corr: dimension must be positive");
  CorrStructure s;
  s.kind = CorrKind::Identity;
  s.dim = d;
  return s;
}

CorrStructure fixed_structure(Eigen::MatrixXd sigma) {
  if (sigma.rows() != sigma.cols() || sigma.rows() < 1) {
    throw std::domain_error("corr: fixed matrix must be square");
  }
  if ((sigma.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12 ||
      !sigma.isApprox(sigma.transpose(), 1e-12)) {
    throw std::domain_error("corr: fixed matrix must be symmetric with unit diagonal");
  }
  CorrStructure s;
  s.kind = CorrKind::Fixed;
  s.dim = static_cast<int>(sigma.rows());
  s.fixed = std::move(sigma);
  return s;
}

double entry(const CorrStructure& s, int j, int k) {
  if (j < 0 || k < 0 || j >= s.dim || k >= s.dim) {
    throw std::out_of_range("corr: index out of range");
  }
  if (j == k) return 1.0;
  switch (s.kind) {
    case CorrKind::Ar1:
      return std::pow(s.params[0], std::abs(j - k));
    case CorrKind::PowExp:
      return (1.0 - s.params[0]) *
             std::exp(-s.params[1] * std::pow(s.distances(j, k), s.params[2]));
    case CorrKind::OneFactor:
      return s.params[j] * s.params[k];
    case CorrKind::Bifactor:
      return s.groups[j] == s.groups[k] ? s.params[j] * s.params[k] : 0.0;
    case CorrKind::Ones:
      return 1.0;
    case CorrKind::Identity:
      return 0.0;
    case CorrKind::Fixed:
      return s.fixed(j, k);
  }
  return 0.0;
}

Eigen::MatrixXd corr_matrix(const CorrStructure& s) {
  Eigen::MatrixXd m(s.dim, s.dim);
  for (int j = 0; j < s.dim; ++j) {
    m(j, j) = 1.0;
    for (int k = 0; k < j; ++k) {
      m(j, k) = m(k, j) = entry(s, j, k);
    }
  }
  return m;
}

bool is_degenerate(const CorrStructure& s) { return s.kind == CorrKind::Ones; }

int packed_size(const CorrStructure& s) {
  switch (s.kind) {
    case CorrKind::Ar1:
      return 1;
    case CorrKind::PowExp:
      return 3;
    case CorrKind::OneFactor:
    case CorrKind::Bifactor:
      return s.dim;
    default:
      return 0;
  }
}

Eigen::VectorXd pack(const CorrStructure& s) {
  Eigen::VectorXd out(packed_size(s));
  switch (s.kind) {
    case CorrKind::Ar1:
      out[0] = atanh_clamped(s.params[0]);
      break;
    case CorrKind::PowExp:
      out[0] = logit(s.params[0]);
      out[1] = std::log(s.params[1]);
      out[2] = logit(std::min(s.params[2] / 2.0, 1.0 - 1e-9));
      break;
    case CorrKind::OneFactor:
    case CorrKind::Bifactor:
      for (int j = 0; j < s.dim; ++j) out[j] = atanh_clamped(s.params[j]);
      break;
    default:
      break;
  }
  check_finite(out, "packed parameters");
  return out;
}

CorrStructure unpack(const Eigen::VectorXd& packed, const CorrStructure& proto) {
  if (packed.size() != packed_size(proto)) {
    throw std::domain_error("corr: packed vector has wrong size");
  }
  check_finite(packed, "packed parameters");
  CorrStructure s = proto;
  switch (proto.kind) {
    case CorrKind::Ar1:
      s.params[0] = std::tanh(packed[0]);
      break;
    case CorrKind::PowExp:
      s.params[0] = sigmoid(packed[0]);
      s.params[1] = std::exp(packed[1]);
      s.params[2] = 2.0 * sigmoid(packed[2]);
      break;
    case CorrKind::OneFactor:
    case CorrKind::Bifactor:
      for (int j = 0; j < s.dim; ++j) s.params[j] = std::tanh(packed[j]);
      break;
    default:
      break;
  }
  return s;
}

CorrStructure parse_structure(std::string_view spec, int d,
                              const Eigen::MatrixXd* distances,
                              const std::vector<int>* groups) {
  const auto colon = spec.find(':');
  const std::string_view name = spec.substr(0, colon);
  const std::string_view rest =
      colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  if (name == "ones") return ones_structure(d);
  if (name == "identity") return identity_structure(d);
  if (name == "ar1") {
    const auto p = split_params(rest);
    if (p.size() != 1) throw std::invalid_argument("corr: ar1 takes one parameter");
    return ar1_structure(d, p[0]);
  }
  if (name == "powexp") {
    const auto p = split_params(rest);
    if (p.size() != 3) {
      throw std::invalid_argument("corr: powexp takes eta,gamma,alpha");
    }
    if (distances == nullptr) {
      throw std::invalid_argument("corr: powexp needs a distance matrix (--distances)");
    }
    if (distances->rows() != d) {
      throw std::invalid_argument("corr: distance matrix dimension mismatch");
    }
    return powexp_structure(p[0], p[1], p[2], *distances);
  }
  if (name == "factor" || name == "bifactor") {
    const auto p = split_params(rest);
    if (static_cast<int>(p.size()) != d) {
      throw std::invalid_argument("corr: factor loadings must list d values");
    }
    Eigen::VectorXd rhos = Eigen::Map<const Eigen::VectorXd>(p.data(), d);
    if (name == "factor") return one_factor_structure(std::move(rhos));
    if (groups == nullptr) {
      throw std::invalid_argument("corr: bifactor needs group labels (--groups)");
    }
    return bifactor_structure(*groups, std::move(rhos));
  }
  throw std::invalid_argument("corr: unknown structure '" + std::string(name) + "'");
}

std::string structure_spec(const CorrStructure& s) {
  auto join = [&](int from, int to) {
    std::string out;
    for (int j = from; j < to; ++j) {
      if (j > from) out += ",";
      out += std::to_string(s.params[j]);
    }
    return out;
  };
  switch (s.kind) {
    case CorrKind::Ar1:
      return "ar1:" + std::to_string(s.params[0]);
    case CorrKind::PowExp:
      return "powexp:" + join(0, 3);
    case CorrKind::OneFactor:
      return "factor:" + join(0, s.dim);
    case CorrKind::Bifactor:
      return "bifactor:" + join(0, s.dim);
    case CorrKind::Ones:
      return "ones";
    case CorrKind::Identity:
      return "identity";
    case CorrKind::Fixed:
      return "fixed";
  }
  return "";
}

} // namespace cnev
