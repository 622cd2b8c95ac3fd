#ifndef RNLS_FIELD_HPP
#define RNLS_FIELD_HPP

#include <array>
#include <random>
#include <string>
#include <vector>

#include "rnls/grid.hpp"
#include "rnls/params.hpp"

namespace rnls {

// Two-component complex field on a periodic grid. Value-semantic; operations
// never mutate their inputs.
struct Field2 {
    Grid grid;
    std::vector<cplx> u1, u2;

    static Field2 zero(const Grid& g) {
        Field2 f;
        f.grid = g;
        f.u1.assign(g.size(), cplx{});
        f.u2.assign(g.size(), cplx{});
        return f;
    }
    bool finite() const;
};

// Evaluations of all the conserved/variational functionals of one field.
struct FunctionalReport {
    double energy = 0.0;  // E
    double charge = 0.0;  // Q
    double action = 0.0;  // S_omega = E + omega*Q
    double nehari = 0.0;  // K_omega = xnorm2 - cubic
    double cubic = 0.0;   // V
    double xnorm2 = 0.0;  // |u|_{X_omega}^2
};

// Shared per-grid FFT, cached per thread.
const Fft& fft_for(const Grid& g);

double energy(const Field2& f, const CouplingParams& p);
double charge(const Field2& f);
FunctionalReport action_report(const Field2& f, const CouplingParams& p, double omega);

// gradient-squared integral |grad u|^2 summed over both components
double grad_norm2(const Field2& f);
double mass1(const Field2& f);  // |u1|_{L2}^2
double mass2(const Field2& f);

Field2 apply_gauge(const Field2& f, double theta);
Field2 apply_J(const Field2& f);
Field2 translate(const Field2& f, const std::array<double, 3>& y);

// real H and X inner products of the stability analysis
double inner_H(const Field2& a, const Field2& b);
double inner_X(const Field2& a, const Field2& b);
double norm_X(const Field2& f);

struct OrbitalFit {
    double dist = 0.0;
    double theta = 0.0;
    std::array<double, 3> y{0.0, 0.0, 0.0};
};

// min over theta, y of |f - G(theta) tau_y phi|_X (unweighted H^1 product
// norm). Coarse search over all grid shifts via FFT cross-correlation, then
// coordinate-descent refinement in continuous (theta, y).
OrbitalFit orbital_distance(const Field2& f, const Field2& phi);

// gauge-only fit: min over theta at fixed y = 0
OrbitalFit gauge_distance(const Field2& f, const Field2& phi);

// Fraction of |u|^2 mass at max-norm distance > L/4 from the origin.
double tail_mass_fraction(const Field2& f);

// Smooth random field: Gaussian Fourier amplitudes with decay exp(-|k|^2/k0^2).
std::vector<cplx> random_smooth(const Grid& g, std::mt19937_64& rng, double k0 = 1.5,
                                bool even = false, bool real_valued = false);
Field2 random_smooth_field2(const Grid& g, std::mt19937_64& rng, double k0 = 1.5,
                            bool even = false, bool real_valued = false);

struct SnapshotMeta {
    double omega = 0.0;
    double kappa = 0.0;
    double gamma = 0.0;
    double time = 0.0;
};

// Binary snapshot: "RNLS", version, dim, n, L, omega, kappa, gamma, time,
// then u1 and u2 as little-endian f64 (re, im) in row-major order.
void save_snapshot(const std::string& path, const Field2& f, const SnapshotMeta& meta);
Field2 load_snapshot(const std::string& path, SnapshotMeta* meta = nullptr);

}  // namespace rnls

#endif
