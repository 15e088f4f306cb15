#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace cnev {

enum class CorrKind { Ar1, PowExp, OneFactor, Bifactor, Ones, Identity, Fixed };

// A parameterized correlation matrix.  Immutable value; builders below
// validate their parameter domains.
struct CorrStructure {
  CorrKind kind = CorrKind::Identity;
  int dim = 0;
  Eigen::VectorXd params;    // Ar1: rho; PowExp: eta, gamma, alpha;
                             // OneFactor/Bifactor: rho_1..rho_d
  Eigen::MatrixXd distances; // PowExp only
  std::vector<int> groups;   // Bifactor only
  Eigen::MatrixXd fixed;     // Fixed only
};

CorrStructure ar1_structure(int d, double rho);
CorrStructure powexp_structure(double eta, double gamma, double alpha,
                               Eigen::MatrixXd distances);
CorrStructure one_factor_structure(Eigen::VectorXd rhos);
CorrStructure bifactor_structure(std::vector<int> groups, Eigen::VectorXd rhos);
CorrStructure ones_structure(int d);
CorrStructure identity_structure(int d);
CorrStructure fixed_structure(Eigen::MatrixXd sigma);

// Sigma_{jk} with 0-based indices; throws std::out_of_range.
double entry(const CorrStructure& s, int j, int k);

Eigen::MatrixXd corr_matrix(const CorrStructure& s);

// True exactly for the all-ones kind, which routes to the degenerate
// exponent-function path.
bool is_degenerate(const CorrStructure& s);

// Unconstrained packing for optimizers: atanh for correlations, log for
// gamma, logit for eta and alpha/2.  unpack(pack(s)) == s to ~1e-12 away
// from parameter bounds.
int packed_size(const CorrStructure& s);
Eigen::VectorXd pack(const CorrStructure& s);
CorrStructure unpack(const Eigen::VectorXd& packed, const CorrStructure& proto);

// CLI spec: "ar1:0.5", "powexp:eta,gamma,alpha", "factor:r1,...,rd",
// "bifactor:r1,...,rd", "ones", "identity".
CorrStructure parse_structure(std::string_view spec, int d,
                              const Eigen::MatrixXd* distances = nullptr,
                              const std::vector<int>* groups = nullptr);
std::string structure_spec(const CorrStructure& s);

} // namespace cnev
