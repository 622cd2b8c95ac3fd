#ifndef RNLS_GROUND_STATE_HPP
#define RNLS_GROUND_STATE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "rnls/field.hpp"
#include "rnls/grid.hpp"
#include "rnls/params.hpp"

namespace rnls {

enum class ProfileMethod { closed_form_1d, shooting_radial, imaginary_time };

// Positive radial soliton phi_omega of the scalar problem
// -Lap(phi) + omega*phi = phi^2, sampled on the box grid.
struct ScalarProfile {
    double omega = 1.0;
    int dim = 1;
    Grid grid;
    std::vector<double> values;
    ProfileMethod method = ProfileMethod::closed_form_1d;

    double l2norm2() const;
    double l3cubed() const;
    double h1omega2() const;  // |grad phi|^2 + omega*|phi|^2
};

ScalarProfile phi_closed_form_1d(double omega, const Grid& grid);
ScalarProfile phi_radial(double omega, int dim, const Grid& grid);
ScalarProfile phi_imaginary_time(double omega, const Grid& grid, std::uint64_t seed = 0);

// relative L2 residual of -Lap(phi) + omega*phi - phi^2
double profile_residual(const ScalarProfile& p);
// relative gap in |phi|_{H1_omega}^2 = |phi|_{L3}^3
double pohozaev_gap(const ScalarProfile& p);

Field2 scaled_pair(const ScalarProfile& phi, double alpha, double beta);
Field2 branch_state(const BranchPoint& bp, const ScalarProfile& phi);

// relative L2 residual of the stationary system
//   -Lap(u1) + omega*u1 - kappa*|u1|u1 - gamma*conj(u1)u2 = 0
//   -2Lap(u2) + 2omega*u2 - 2|u2|u2 - gamma*u1^2 = 0
double stationary_residual(const Field2& f, const CouplingParams& p, double omega);

enum class Family { semitrivial_G0, branch_G1, both };
std::string to_string(Family f);

struct GroundStateVerdict {
    Field2 minimizer;
    double action_value = 0.0;
    Family family = Family::semitrivial_G0;
    double match_error = 0.0;
    int iterations = 0;
    double projected_gradient = 0.0;
};

GroundStateVerdict nehari_minimize(const CouplingParams& p, double omega, const Grid& grid,
                                   std::uint64_t seed);

double d_omega(const CouplingParams& p, double omega, const Grid& grid);

}  // namespace rnls

#endif
