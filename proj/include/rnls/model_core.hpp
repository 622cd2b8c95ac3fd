#ifndef RNLS_MODEL_CORE_HPP
#define RNLS_MODEL_CORE_HPP

#include <utility>
#include <vector>

#include "rnls/params.hpp"

// Closed-form parameter algebra: branch values on the line/ellipse system,
// region classification, and the elementary-geometry verifiers. No
// discretization dependency; all functions are pure.
namespace rnls {

// Tolerance for the measure-zero boundary regions (J3, K3). Boundaries are
// codimension-1, so classification treats them as thin bands of this width.
inline constexpr double kBoundaryTol = 1e-12;

JRegion classify_J(const CouplingParams& p);
KRegion classify_K(const CouplingParams& p);

// kappa_c(gamma) = (gamma+2)*sqrt(1-gamma)/2 on (0,1); strictly decreasing,
// kappa_c(0+)=1, kappa_c(1-)=0.
double kappa_c(double gamma);

// Inverse of kappa_c, by bisection on (0,1).
double gamma_c(double kappa);

// Both roots of 2*g*(1-g) = kappa^2, for 0 < kappa <= 1/sqrt(2).
// Returns (gamma_minus, gamma_plus) with gamma_minus <= gamma_plus.
std::pair<double, double> gamma_pm(double kappa);

// The set S_{kappa,gamma}: empty on J0, one point on J1/J3, two on J2.
// Ordered by ascending alpha.
std::vector<BranchPoint> branch_points(const CouplingParams& p);

// Independent oracle: intersections of the line kappa*x + gamma*y = 1 with
// the ellipse gamma*x^2 + 2y^2 = 2y in the open first quadrant, found by
// parameterizing the ellipse and bisecting sign changes of the line residual.
std::vector<std::pair<double, double>> branch_points_bruteforce(const CouplingParams& p,
                                                                int resolution);

// ell = alpha_+^2 + beta_-^2 on K1, exactly 1 on K2 and K3.
double ell(const CouplingParams& p);

struct E1E2Result {
    bool empty = true;
    double x = 0.0;
    double y = 0.0;
};

// Grid-scans (0, sqrt(ell)]^2 for the set E1 cap E2 and refines. Empty on K2,
// a single point near (alpha_+, beta_-) on K1 and K3.
E1E2Result verify_E1E2(const CouplingParams& p, int resolution);

}  // namespace rnls

#endif
