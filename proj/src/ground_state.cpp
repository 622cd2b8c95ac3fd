#include "rnls/ground_state.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "rnls/model_core.hpp"
#include "rnls/rng.hpp"

namespace rnls {

namespace {

double sum_sq(const std::vector<double>& v, double dv) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s * dv;
}

double sum_cube(const std::vector<double>& v, double dv) {
    double s = 0.0;
    for (double x : v) s += std::abs(x) * x * x;
    return s * dv;
}

// spectral Laplacian of a real scalar sampled on the box grid
std::vector<double> laplacian(const Grid& g, const std::vector<double>& v) {
    const Fft& fft = fft_for(g);
    const std::size_t sz = g.size();
    std::vector<cplx> buf(sz), hat(sz);
    for (std::size_t i = 0; i < sz; ++i) buf[i] = v[i];
    fft.forward(buf.data(), hat.data());
    for (std::size_t i = 0; i < sz; ++i) hat[i] *= -g.k2(i);
    fft.inverse(hat.data(), buf.data());
    std::vector<double> out(sz);
    for (std::size_t i = 0; i < sz; ++i) out[i] = buf[i].real();
    return out;
}

double radial_distance(const Grid& g, std::size_t flat) {
    double x[3];
    g.coords(flat, x);
    double s = 0.0;
    for (int d = 0; d < g.dim; ++d) s += x[d] * x[d];
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Radial shooting for dim 2, 3 at omega = 1; general omega follows from the
// scaling phi_omega(r) = omega * psi(sqrt(omega) r).
// ---------------------------------------------------------------------------

constexpr double kDr = 0.02;
constexpr double kRMax = 30.0;

// decaying linear far-field solution: exact for dim 3, asymptotic K_0 series
// for dim 2
double tail_f(int dim, double r) {
    if (dim == 3) return std::exp(-r) / r;
    const double ir = 1.0 / r;
    const double series = 1.0 - 0.125 * ir + (9.0 / 128.0) * ir * ir -
                          (225.0 / 3072.0) * ir * ir * ir;
    return std::exp(-r) / std::sqrt(r) * series;
}

struct OdeState {
    double r, psi, dpsi;
};

enum class ShotClass { cross, rebound };

// one adaptive Dormand-Prince 5(4) step of psi'' + (dim-1)/r psi' = psi - psi^2
struct RadialRhs {
    int dim;
    void operator()(double r, const double y[2], double dy[2]) const {
        dy[0] = y[1];
        dy[1] = y[0] - y[0] * y[0] - (dim - 1) / r * y[1];
    }
};

class DormandPrince {
  public:
    explicit DormandPrince(RadialRhs rhs) : rhs_(rhs) {}

    // advances from (r, y) to exactly r_to, adapting internal substeps
    void advance(double& r, double y[2], double r_to) {
        while (r < r_to - 1e-14) {
            double hstep = std::min(h_, r_to - r);
            double ynew[2], err;
            step(r, y, hstep, ynew, err);
            const double tol = 1e-12 + 1e-11 * std::abs(y[0]);
            if (err > tol && hstep > 1e-6) {
                h_ = std::max(1e-6, 0.9 * hstep * std::pow(tol / err, 0.2));
                continue;
            }
            r += hstep;
            y[0] = ynew[0];
            y[1] = ynew[1];
            if (err > 0.0)
                h_ = std::min(kDr, 0.9 * hstep * std::pow(tol / err, 0.2));
            else
                h_ = kDr;
        }
        r = r_to;
    }

  private:
    void step(double r, const double y[2], double h, double ynew[2], double& err) {
        static const double a[7][6] = {
            {},
            {1.0 / 5},
            {3.0 / 40, 9.0 / 40},
            {44.0 / 45, -56.0 / 15, 32.0 / 9},
            {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
            {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
            {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
        static const double c[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
        static const double b5[7] = {35.0 / 384,     0.0,  500.0 / 1113, 125.0 / 192,
                                     -2187.0 / 6784, 11.0 / 84, 0.0};
        static const double b4[7] = {5179.0 / 57600,  0.0,          7571.0 / 16695,
                                     393.0 / 640,     -92097.0 / 339200,
                                     187.0 / 2100,    1.0 / 40};
        double k[7][2];
        for (int s = 0; s < 7; ++s) {
            double ys[2] = {y[0], y[1]};
            for (int j = 0; j < s; ++j) {
                ys[0] += h * a[s][j] * k[j][0];
                ys[1] += h * a[s][j] * k[j][1];
            }
            rhs_(r + c[s] * h, ys, k[s]);
        }
        err = 0.0;
        for (int d = 0; d < 2; ++d) {
            double y5 = y[d], y4 = y[d];
            for (int s = 0; s < 7; ++s) {
                y5 += h * b5[s] * k[s][d];
                y4 += h * b4[s] * k[s][d];
            }
            ynew[d] = y5;
            err = std::max(err, std::abs(y5 - y4));
        }
    }

    RadialRhs rhs_;
    double h_ = kDr;
};

// series start psi = a + c2 r^2 + c4 r^4 near the regular singular point
void series_start(int dim, double a, double r0, double y[2]) {
    const double c2 = (a - a * a) / (2.0 * dim);
    const double c4 = (1.0 - 2.0 * a) * c2 / (8.0 + 4.0 * dim);
    y[0] = a + c2 * r0 * r0 + c4 * r0 * r0 * r0 * r0;
    y[1] = 2.0 * c2 * r0 + 4.0 * c4 * r0 * r0 * r0;
}

// integrates a shot; when record != nullptr, fills psi values at multiples of
// kDr until the trajectory stops decaying, and reports the cutoff index
ShotClass shoot(int dim, double a, std::vector<double>* record = nullptr,
                int* cut_index = nullptr) {
    DormandPrince dp{RadialRhs{dim}};
    double r = kDr, y[2];
    series_start(dim, a, r, y);
    if (record) {
        record->assign(static_cast<std::size_t>(kRMax / kDr) + 1, 0.0);
        (*record)[0] = a;
        (*record)[1] = y[0];
    }
    int j = 1;
    const int jmax = static_cast<int>(kRMax / kDr);
    bool decayed = false;
    while (j < jmax) {
        dp.advance(r, y, (j + 1) * kDr);
        ++j;
        if (record) (*record)[j] = y[0];
        if (y[0] < 0.0) {
            if (cut_index) *cut_index = j;
            return ShotClass::cross;
        }
        if (y[0] < 0.5 * a) decayed = true;
        if (decayed && (y[1] > 0.0 || y[0] < 1e-9 * a)) {
            if (cut_index) *cut_index = j;
            return ShotClass::rebound;
        }
    }
    if (cut_index) *cut_index = jmax;
    return y[1] > 0.0 ? ShotClass::rebound : ShotClass::cross;
}

struct RadialSolution {
    int dim = 3;
    std::vector<double> psi;  // values at r = j*kDr, j = 0..M
    double c_tail = 0.0;      // far-field constant, psi ~ c_tail * tail_f(r)
};

// 6th-order finite-difference Newton polish of the radial BVP on the kDr mesh
void newton_polish(int dim, std::vector<double>& psi, double c_tail) {
    const int m = static_cast<int>(psi.size()) - 1;
    static const double d2[7] = {1.0 / 90, -3.0 / 20, 3.0 / 2, -49.0 / 18,
                                 3.0 / 2,  -3.0 / 20, 1.0 / 90};
    static const double d1[7] = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0,
                                 3.0 / 4,   -3.0 / 20, 1.0 / 60};
    using Trip = Eigen::Triplet<double>;
    for (int iter = 0; iter < 6; ++iter) {
        Eigen::VectorXd rhs(m + 1);
        std::vector<Trip> trips;
        trips.reserve(7 * (m + 1));
        auto value = [&](int idx) {
            if (idx < 0) idx = -idx;
            if (idx <= m) return psi[idx];
            return c_tail * tail_f(dim, idx * kDr);
        };
        for (int j = 0; j <= m; ++j) {
            const double r = j * kDr;
            double lap = 0.0, res;
            std::array<double, 7> row{};
            for (int s = 0; s < 7; ++s) {
                const int idx = j + s - 3;
                double coef;
                if (j == 0) {
                    // at the origin Lap = dim * psi''
                    coef = dim * d2[s] / (kDr * kDr);
                } else {
                    coef = d2[s] / (kDr * kDr) + (dim - 1) / r * d1[s] / kDr;
                }
                lap += coef * value(idx);
                const int fold = idx < 0 ? -idx : idx;
                if (fold <= m) row[s] = coef;
            }
            res = -lap + psi[j] - psi[j] * psi[j];
            rhs(j) = -res;
            for (int s = 0; s < 7; ++s) {
                const int idx = j + s - 3;
                const int fold = idx < 0 ? -idx : idx;
                if (fold <= m && row[s] != 0.0) trips.emplace_back(j, fold, -row[s]);
            }
            trips.emplace_back(j, j, 1.0 - 2.0 * psi[j]);
        }
        Eigen::SparseMatrix<double> jac(m + 1, m + 1);
        jac.setFromTriplets(trips.begin(), trips.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(jac);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error("phi_radial: Newton factorization failed");
        Eigen::VectorXd delta = lu.solve(rhs);
        double dmax = 0.0;
        for (int j = 0; j <= m; ++j) {
            psi[j] += delta(j);
            dmax = std::max(dmax, std::abs(delta(j)));
        }
        if (dmax < 1e-13) break;
    }
}

const RadialSolution& radial_solution(int dim) {
    static std::mutex mu;
    static std::map<int, RadialSolution> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(dim);
    if (it != cache.end()) return it->second;

    // bracket the ground-state amplitude between rebound (low) and zero
    // crossing (high)
    double lo = 0.0, hi = 0.0;
    ShotClass prev = shoot(dim, 1.2);
    for (double a = 1.4; a <= 6.05; a += 0.2) {
        ShotClass cur = shoot(dim, a);
        if (cur != prev) {
            lo = a - 0.2;
            hi = a;
            if (prev == ShotClass::cross) std::swap(lo, hi);
            break;
        }
        prev = cur;
    }
    if (hi == lo)
        throw std::runtime_error("phi_radial: no shooting bracket in [1.2, 6]");
    int iters = 0;
    while (iters < 200) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        ++iters;
        if (shoot(dim, mid) == ShotClass::rebound)
            lo = mid;
        else
            hi = mid;
    }
    if (iters >= 200) {
        std::ostringstream os;
        os << "phi_radial: shooting did not converge after 200 bisections; "
           << "bracket [" << lo << ", " << hi << "]";
        throw std::runtime_error(os.str());
    }

    RadialSolution sol;
    sol.dim = dim;
    int cut = 0;
    shoot(dim, 0.5 * (lo + hi), &sol.psi, &cut);
    // replace the contaminated far field with the matched decaying solution,
    // then let Newton repair the seam
    const int match = std::max(8, cut - 100);
    const double c0 = sol.psi[match] / tail_f(dim, match * kDr);
    const int m = static_cast<int>(sol.psi.size()) - 1;
    for (int j = match; j <= m; ++j) sol.psi[j] = c0 * tail_f(dim, j * kDr);
    newton_polish(dim, sol.psi, c0);
    const int jref = static_cast<int>((kRMax - 1.0) / kDr);
    sol.c_tail = sol.psi[jref] / tail_f(dim, jref * kDr);

    // exponential decay certificate at the matching radius
    const double ld_num = (sol.psi[match + 1] - sol.psi[match - 1]) / (2.0 * kDr);
    const double ld_tail = (tail_f(dim, (match + 1) * kDr) - tail_f(dim, (match - 1) * kDr)) /
                           (2.0 * kDr) * sol.psi[match] / tail_f(dim, match * kDr);
    if (std::abs(ld_num - ld_tail) > 1e-10 * std::abs(ld_num) + 1e-10)
        throw std::runtime_error("phi_radial: tail does not match exponential decay");

    return cache.emplace(dim, std::move(sol)).first->second;
}

double eval_psi(const RadialSolution& sol, double s) {
    const int m = static_cast<int>(sol.psi.size()) - 1;
    const double r_interp = (m - 3) * kDr;
    if (s >= r_interp) return sol.c_tail * tail_f(sol.dim, s);
    // 6-point Lagrange interpolation with even reflection at the origin
    int j0 = static_cast<int>(std::floor(s / kDr)) - 2;
    double out = 0.0;
    for (int s6 = 0; s6 < 6; ++s6) {
        const int idx = j0 + s6;
        double w = 1.0;
        for (int t = 0; t < 6; ++t) {
            if (t == s6) continue;
            w *= (s - (j0 + t) * kDr) / ((idx - (j0 + t)) * kDr);
        }
        out += w * sol.psi[idx < 0 ? -idx : idx];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Nehari-projected preconditioned descent
// ---------------------------------------------------------------------------

void precondition(const Grid& g, double omega, std::vector<cplx>& v) {
    const Fft& fft = fft_for(g);
    std::vector<cplx> hat(v.size());
    fft.forward(v.data(), hat.data());
    for (std::size_t i = 0; i < v.size(); ++i) hat[i] /= omega + g.k2(i);
    fft.inverse(hat.data(), v.data());
}

// X_omega-gradient of S_omega: (omega - Lap)^{-1} applied to the L^2 gradient
Field2 action_gradient(const Field2& u, const CouplingParams& p, double omega) {
    const Grid& g = u.grid;
    const Fft& fft = fft_for(g);
    const std::size_t sz = g.size();
    Field2 grad = Field2::zero(g);
    std::vector<cplx> hat(sz);
    fft.forward(u.u1.data(), hat.data());
    for (std::size_t i = 0; i < sz; ++i) hat[i] *= (omega + g.k2(i));
    fft.inverse(hat.data(), grad.u1.data());
    fft.forward(u.u2.data(), hat.data());
    for (std::size_t i = 0; i < sz; ++i) hat[i] *= (omega + g.k2(i));
    fft.inverse(hat.data(), grad.u2.data());
    for (std::size_t i = 0; i < sz; ++i) {
        const cplx a = u.u1[i], b = u.u2[i];
        grad.u1[i] -= p.kappa * std::abs(a) * a + p.gamma * std::conj(a) * b;
        grad.u2[i] -= std::abs(b) * b + 0.5 * p.gamma * a * a;
    }
    precondition(g, omega, grad.u1);
    precondition(g, omega, grad.u2);
    return grad;
}

// X_omega-gradient of K_omega
Field2 nehari_gradient(const Field2& u, const CouplingParams& p, double omega) {
    const Grid& g = u.grid;
    const std::size_t sz = g.size();
    Field2 grad = Field2::zero(g);
    for (std::size_t i = 0; i < sz; ++i) {
        const cplx a = u.u1[i], b = u.u2[i];
        grad.u1[i] = -3.0 * (p.kappa * std::abs(a) * a + p.gamma * std::conj(a) * b);
        grad.u2[i] = -3.0 * (std::abs(b) * b + 0.5 * p.gamma * a * a);
    }
    precondition(g, omega, grad.u1);
    precondition(g, omega, grad.u2);
    for (std::size_t i = 0; i < sz; ++i) {
        grad.u1[i] += 2.0 * u.u1[i];
        grad.u2[i] += 2.0 * u.u2[i];
    }
    return grad;
}

double dot_l2(const Field2& a, const Field2& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.u1.size(); ++i) {
        s += a.u1[i].real() * b.u1[i].real() + a.u1[i].imag() * b.u1[i].imag();
        s += a.u2[i].real() * b.u2[i].real() + a.u2[i].imag() * b.u2[i].imag();
    }
    return s * a.grid.cell_volume();
}

void axpy(Field2& y, double c, const Field2& x) {
    for (std::size_t i = 0; i < y.u1.size(); ++i) {
        y.u1[i] += c * x.u1[i];
        y.u2[i] += c * x.u2[i];
    }
}

// rescale onto K_omega = 0; returns false when cubic <= 0
bool nehari_project(Field2& u, const CouplingParams& p, double omega) {
    const auto r = action_report(u, p, omega);
    if (!(r.cubic > 0.0)) return false;
    const double t = r.xnorm2 / r.cubic;
    for (std::size_t i = 0; i < u.u1.size(); ++i) {
        u.u1[i] *= t;
        u.u2[i] *= t;
    }
    return true;
}

double projected_gradient_norm(const Field2& g, const Field2& n) {
    Field2 pg = g;
    const double nn = dot_l2(n, n);
    if (nn > 0.0) axpy(pg, -dot_l2(g, n) / nn, n);
    return std::sqrt(dot_l2(pg, pg));
}

// weight1/weight2 skew the mass between the components so that independent
// starts explore both candidate basins
Field2 positive_seed(double omega, const Grid& g, std::uint64_t seed, std::uint64_t attempt,
                     double weight1, double weight2) {
    auto rng = make_rng(seed, 101, attempt);
    Field2 f = Field2::zero(g);
    auto r1 = random_smooth(g, rng, 1.0, false, true);
    auto r2 = random_smooth(g, rng, 1.0, false, true);
    const double sq = std::sqrt(omega);
    for (std::size_t i = 0; i < g.size(); ++i) {
        double x[3];
        g.coords(i, x);
        double rr = 0.0;
        for (int d = 0; d < g.dim; ++d) rr += x[d] * x[d];
        const double env = 1.5 * omega / std::pow(std::cosh(0.5 * sq * std::sqrt(rr)), 2);
        f.u1[i] = weight1 * env * std::max(0.1, 1.0 + 2.0 * r1[i].real());
        f.u2[i] = weight2 * env * std::max(0.1, 1.0 + 2.0 * r2[i].real());
    }
    return f;
}

ScalarProfile reference_profile(double omega, const Grid& g) {
    return g.dim == 1 ? phi_closed_form_1d(omega, g) : phi_radial(omega, g.dim, g);
}

}  // namespace

// ---------------------------------------------------------------------------

double ScalarProfile::l2norm2() const { return sum_sq(values, grid.cell_volume()); }
double ScalarProfile::l3cubed() const { return sum_cube(values, grid.cell_volume()); }

double ScalarProfile::h1omega2() const {
    Field2 f = Field2::zero(grid);
    for (std::size_t i = 0; i < values.size(); ++i) f.u1[i] = values[i];
    return grad_norm2(f) + omega * l2norm2();
}

ScalarProfile phi_closed_form_1d(double omega, const Grid& grid) {
    if (grid.dim != 1) throw std::invalid_argument("phi_closed_form_1d: grid.dim must be 1");
    if (!(omega > 0.0)) throw std::invalid_argument("phi_closed_form_1d: omega must be > 0");
    ScalarProfile p;
    p.omega = omega;
    p.dim = 1;
    p.grid = grid;
    p.method = ProfileMethod::closed_form_1d;
    p.values.resize(grid.size());
    const double sq = std::sqrt(omega);
    for (int i = 0; i < grid.n; ++i) {
        const double x = grid.coord(i);
        p.values[i] = 1.5 * omega / std::pow(std::cosh(0.5 * sq * x), 2);
    }
    return p;
}

ScalarProfile phi_radial(double omega, int dim, const Grid& grid) {
    if (dim != 2 && dim != 3) throw std::invalid_argument("phi_radial: dim must be 2 or 3");
    if (grid.dim != dim) throw std::invalid_argument("phi_radial: grid.dim mismatch");
    if (!(omega > 0.0)) throw std::invalid_argument("phi_radial: omega must be > 0");
    const RadialSolution& sol = radial_solution(dim);
    ScalarProfile p;
    p.omega = omega;
    p.dim = dim;
    p.grid = grid;
    p.method = ProfileMethod::shooting_radial;
    p.values.resize(grid.size());
    const double sq = std::sqrt(omega);
    for (std::size_t i = 0; i < grid.size(); ++i)
        p.values[i] = omega * eval_psi(sol, sq * radial_distance(grid, i));
    return p;
}

ScalarProfile phi_imaginary_time(double omega, const Grid& grid, std::uint64_t seed) {
    if (!(omega > 0.0)) throw std::invalid_argument("phi_imaginary_time: omega must be > 0");
    // scalar problem as the u2-only system with gamma ~ 0
    const CouplingParams p{0.0, 1e-300};
    auto rng = make_rng(seed, 77);
    Field2 u = Field2::zero(grid);
    const double sq = std::sqrt(omega);
    for (std::size_t i = 0; i < grid.size(); ++i)
        u.u2[i] = 1.3 * omega / std::pow(std::cosh(0.45 * sq * radial_distance(grid, i)), 2);
    if (!nehari_project(u, p, omega))
        throw std::runtime_error("phi_imaginary_time: seed has nonpositive cubic term");
    Field2 g = action_gradient(u, p, omega);
    double step = 0.1;
    for (int it = 0; it < 200000; ++it) {
        Field2 unew = u;
        axpy(unew, -step, g);
        if (!nehari_project(unew, p, omega)) {
            step *= 0.5;
            continue;
        }
        Field2 gnew = action_gradient(unew, p, omega);
        Field2 du = unew, dg = gnew;
        axpy(du, -1.0, u);
        axpy(dg, -1.0, g);
        const double denom = dot_l2(du, dg);
        step = denom > 0.0 ? std::clamp(dot_l2(du, du) / denom, 1e-4, 1e3) : 0.1;
        u = std::move(unew);
        g = std::move(gnew);
        if ((it & 15) == 0) {
            ScalarProfile prof;
            prof.omega = omega;
            prof.dim = grid.dim;
            prof.grid = grid;
            prof.method = ProfileMethod::imaginary_time;
            prof.values.resize(grid.size());
            for (std::size_t i = 0; i < grid.size(); ++i) prof.values[i] = u.u2[i].real();
            if (profile_residual(prof) < 1e-9) return prof;
        }
    }
    throw std::runtime_error("phi_imaginary_time: no convergence after 200000 iterations");
}

double profile_residual(const ScalarProfile& p) {
    auto lap = laplacian(p.grid, p.values);
    double s = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        const double r = -lap[i] + p.omega * p.values[i] - p.values[i] * p.values[i];
        s += r * r;
    }
    return std::sqrt(s * p.grid.cell_volume()) / std::sqrt(p.l2norm2());
}

double pohozaev_gap(const ScalarProfile& p) {
    const double h1 = p.h1omega2();
    return std::abs(h1 - p.l3cubed()) / h1;
}

Field2 scaled_pair(const ScalarProfile& phi, double alpha, double beta) {
    Field2 f = Field2::zero(phi.grid);
    for (std::size_t i = 0; i < phi.values.size(); ++i) {
        f.u1[i] = alpha * phi.values[i];
        f.u2[i] = beta * phi.values[i];
    }
    return f;
}

Field2 branch_state(const BranchPoint& bp, const ScalarProfile& phi) {
    if (std::abs(bp.residual_line) > 1e-9 || std::abs(bp.residual_ellipse) > 1e-9)
        throw std::invalid_argument("branch_state: branch point residuals out of tolerance");
    return scaled_pair(phi, bp.alpha, bp.beta);
}

double stationary_residual(const Field2& f, const CouplingParams& p, double omega) {
    const Grid& g = f.grid;
    const Fft& fft = fft_for(g);
    const std::size_t sz = g.size();
    std::vector<cplx> hat(sz), lap1(sz), lap2(sz);
    fft.forward(f.u1.data(), hat.data());
    for (std::size_t i = 0; i < sz; ++i) hat[i] *= -g.k2(i);
    fft.inverse(hat.data(), lap1.data());
    fft.forward(f.u2.data(), hat.data());
    for (std::size_t i = 0; i < sz; ++i) hat[i] *= -g.k2(i);
    fft.inverse(hat.data(), lap2.data());
    double s = 0.0;
    for (std::size_t i = 0; i < sz; ++i) {
        const cplx a = f.u1[i], b = f.u2[i];
        const cplx r1 = -lap1[i] + omega * a - p.kappa * std::abs(a) * a -
                        p.gamma * std::conj(a) * b;
        const cplx r2 = -2.0 * lap2[i] + 2.0 * omega * b - 2.0 * std::abs(b) * b -
                        p.gamma * a * a;
        s += std::norm(r1) + std::norm(r2);
    }
    const double nrm = std::sqrt(mass1(f) + mass2(f));
    return std::sqrt(s * g.cell_volume()) / nrm;
}

std::string to_string(Family f) {
    switch (f) {
        case Family::semitrivial_G0: return "semitrivial_G0";
        case Family::branch_G1: return "branch_G1";
        case Family::both: return "both";
    }
    return "?";
}

namespace {

struct DescentResult {
    Field2 u;
    int iterations = 0;
    double projected_gradient = 0.0;
};

DescentResult nehari_descend(Field2 u, const CouplingParams& p, double omega) {
    DescentResult res;
    Field2 g = action_gradient(u, p, omega);
    double step = 0.1;
    bool converged = false;
    int it = 0;
    for (; it < 100000; ++it) {
        Field2 n = nehari_gradient(u, p, omega);
        res.projected_gradient = projected_gradient_norm(g, n);
        if (res.projected_gradient < 1e-7) {
            converged = true;
            break;
        }
        Field2 unew = u;
        axpy(unew, -step, g);
        if (!nehari_project(unew, p, omega)) {
            step *= 0.5;
            if (step < 1e-12) throw std::runtime_error("nehari_minimize: step underflow");
            continue;
        }
        Field2 gnew = action_gradient(unew, p, omega);
        Field2 du = unew, dg = gnew;
        axpy(du, -1.0, u);
        axpy(dg, -1.0, g);
        const double denom = dot_l2(du, dg);
        step = denom > 0.0 ? std::clamp(dot_l2(du, du) / denom, 1e-5, 1e3) : 0.1;
        u = std::move(unew);
        g = std::move(gnew);
    }
    if (!converged)
        throw std::runtime_error("nehari_minimize: no convergence after 100000 iterations");
    res.u = std::move(u);
    res.iterations = it;
    return res;
}

}  // namespace

GroundStateVerdict nehari_minimize(const CouplingParams& p, double omega, const Grid& grid,
                                   std::uint64_t seed) {
    p.validate();
    if (!(omega > 0.0)) throw std::invalid_argument("nehari_minimize: omega must be > 0");

    // both candidate families are critical points, so descend from one
    // u1-heavy and one u2-heavy start and keep the lower action
    static const double kWeights[2][2] = {{1.2, 0.4}, {0.3, 1.2}};
    GroundStateVerdict v;
    double best = std::numeric_limits<double>::infinity();
    int total_it = 0;
    int starts_used = 0;
    for (int start = 0; start < 2; ++start) {
        Field2 u = Field2::zero(grid);
        bool seeded = false;
        for (std::uint64_t attempt = 0; attempt < 8 && !seeded; ++attempt) {
            u = positive_seed(omega, grid, seed, 8 * start + attempt, kWeights[start][0],
                             kWeights[start][1]);
            seeded = nehari_project(u, p, omega);
        }
        // a strongly defocusing u1 can keep one exploratory basin off the
        // Nehari manifold entirely; the other start still brackets the minimum
        if (!seeded) continue;
        ++starts_used;
        DescentResult res = nehari_descend(std::move(u), p, omega);
        total_it += res.iterations;
        const double s = action_report(res.u, p, omega).action;
        if (s < best) {
            best = s;
            v.minimizer = std::move(res.u);
            v.projected_gradient = res.projected_gradient;
        }
    }
    if (starts_used == 0)
        throw std::runtime_error("nehari_minimize: could not seed with positive cubic term");
    v.iterations = total_it;
    v.action_value = best;

    // match against the two candidate families
    ScalarProfile phi = reference_profile(omega, grid);
    const double unit = phi.l3cubed() / 6.0;
    Field2 cand0 = scaled_pair(phi, 0.0, 1.0);
    const double dist0 = orbital_distance(v.minimizer, cand0).dist;
    double dist1 = std::numeric_limits<double>::infinity();
    double s1 = std::numeric_limits<double>::infinity();
    for (const BranchPoint& bp : branch_points(p)) {
        if (bp.kind != BranchKind::plus_minus) continue;
        Field2 cand1 = scaled_pair(phi, bp.alpha, bp.beta);
        dist1 = orbital_distance(v.minimizer, cand1).dist;
        s1 = (bp.alpha * bp.alpha + bp.beta * bp.beta) * unit;
    }
    if (std::isfinite(s1) && std::abs(s1 - unit) < 1e-8 * unit) {
        v.family = Family::both;
        v.match_error = std::min(dist0, dist1);
    } else if (dist1 < dist0) {
        v.family = Family::branch_G1;
        v.match_error = dist1;
    } else {
        v.family = Family::semitrivial_G0;
        v.match_error = dist0;
    }
    return v;
}

double d_omega(const CouplingParams& p, double omega, const Grid& grid) {
    p.validate();
    if (!(omega > 0.0)) throw std::invalid_argument("d_omega: omega must be > 0");
    ScalarProfile phi = reference_profile(omega, grid);
    const double unit = phi.l3cubed() / 6.0;
    double best = unit;  // semitrivial family (0, phi)
    for (const BranchPoint& bp : branch_points(p))
        if (bp.kind == BranchKind::plus_minus)
            best = std::min(best, (bp.alpha * bp.alpha + bp.beta * bp.beta) * unit);
    return best;
}

}  // namespace rnls
