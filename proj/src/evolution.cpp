#include "rnls/evolution.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "rnls/rng.hpp"

namespace rnls {

namespace {

struct Stepper {
    const Grid g;
    const Fft& fft;
    std::vector<cplx> ph1, ph2;  // half-step linear phases per flat index
    std::vector<cplx> ph1b, ph2b;  // second half, with the dealias mask folded in

    Stepper(const Grid& grid, double dt, bool dealias)
        : g(grid), fft(fft_for(grid)) {
        const std::size_t m = g.size();
        ph1.resize(m);
        ph2.resize(m);
        ph1b.resize(m);
        ph2b.resize(m);
        const double kcut = (2.0 / 3.0) * g.wavenumbers[g.n / 2 - 1];
        for (std::size_t i = 0; i < m; ++i) {
            const double k2 = g.k2(i);
            ph1[i] = std::polar(1.0, -k2 * dt / 2.0);
            ph2[i] = std::polar(1.0, -2.0 * k2 * dt / 2.0);
            double mask = 1.0;
            if (dealias) {
                std::size_t rest = i;
                for (int d = g.dim - 1; d >= 0; --d) {
                    const double k = g.wavenumbers[rest % g.n];
                    rest /= g.n;
                    if (std::abs(k) > kcut) mask = 0.0;
                }
            }
            ph1b[i] = mask * ph1[i];
            ph2b[i] = mask * ph2[i];
        }
    }

    void half_linear(Field2& f, bool second) const {
        fft.forward(f.u1);
        fft.forward(f.u2);
        const auto& p1 = second ? ph1b : ph1;
        const auto& p2 = second ? ph2b : ph2;
        for (std::size_t i = 0; i < f.u1.size(); ++i) {
            f.u1[i] *= p1[i];
            f.u2[i] *= p2[i];
        }
        fft.inverse(f.u1);
        fft.inverse(f.u2);
    }

    static void rhs(const CouplingParams& p, const cplx& a, const cplx& b, cplx& da,
                    cplx& db) {
        const cplx i(0.0, 1.0);
        da = i * (p.kappa * std::abs(a) * a + p.gamma * std::conj(a) * b);
        db = i * (2.0 * std::abs(b) * b + p.gamma * a * a);
    }

    void nonlinear(Field2& f, const CouplingParams& p, double dt, int substeps) const {
        const double tau = dt / substeps;
        for (std::size_t i = 0; i < f.u1.size(); ++i) {
            cplx a = f.u1[i], b = f.u2[i];
            for (int s = 0; s < substeps; ++s) {
                cplx k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
                rhs(p, a, b, k1a, k1b);
                rhs(p, a + 0.5 * tau * k1a, b + 0.5 * tau * k1b, k2a, k2b);
                rhs(p, a + 0.5 * tau * k2a, b + 0.5 * tau * k2b, k3a, k3b);
                rhs(p, a + tau * k3a, b + tau * k3b, k4a, k4b);
                a += (tau / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
                b += (tau / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
            }
            f.u1[i] = a;
            f.u2[i] = b;
        }
    }

    void advance(Field2& f, const CouplingParams& p, const EvolutionConfig& cfg) const {
        half_linear(f, false);
        nonlinear(f, p, cfg.dt, cfg.nonlinear_substeps);
        half_linear(f, true);
    }
};

}  // namespace

void EvolutionConfig::validate() const {
    if (!(dt > 0.0) && !(dt < 0.0))
        throw std::invalid_argument("EvolutionConfig: dt must be nonzero and finite");
    if (!(t_final > 0.0)) throw std::invalid_argument("EvolutionConfig: t_final must be > 0");
    if (nonlinear_substeps < 1)
        throw std::invalid_argument("EvolutionConfig: nonlinear_substeps must be >= 1");
    if (monitor_stride < 1)
        throw std::invalid_argument("EvolutionConfig: monitor_stride must be >= 1");
}

const char* to_string(Stability s) {
    switch (s) {
        case Stability::stable_bounded: return "stable_bounded";
        case Stability::unstable_growth: return "unstable_growth";
        case Stability::inconclusive: return "inconclusive";
    }
    return "?";
}

const char* to_string(ProbeDirection d) {
    switch (d) {
        case ProbeDirection::random_even: return "random_even";
        case ProbeDirection::psi_first_component: return "psi_first_component";
        case ProbeDirection::phase_kick: return "phase_kick";
    }
    return "?";
}

Field2 step(const Field2& f, const CouplingParams& p, const EvolutionConfig& cfg) {
    if (!f.finite()) throw std::invalid_argument("step: field is not finite");
    Stepper st(f.grid, cfg.dt, cfg.dealias);
    Field2 out = f;
    st.advance(out, p, cfg);
    return out;
}

TrajectorySeries evolve(const Field2& f, const CouplingParams& p, const EvolutionConfig& cfg,
                        const Field2* reference) {
    cfg.validate();
    if (cfg.dt < 0.0) throw std::invalid_argument("evolve: dt must be > 0");
    Stepper st(f.grid, cfg.dt, cfg.dealias);
    Field2 u = f;
    TrajectorySeries series;

    const long nsteps = std::lround(cfg.t_final / cfg.dt);
    auto sample = [&](double t) -> bool {
        if (!u.finite()) {
            series.aborted = true;
            series.abort_time = series.times.empty() ? 0.0 : series.times.back();
            return false;
        }
        const FunctionalReport r = action_report(u, p, 1.0);
        if (!std::isfinite(r.energy)) {
            series.aborted = true;
            series.abort_time = series.times.empty() ? 0.0 : series.times.back();
            return false;
        }
        series.times.push_back(t);
        series.energy.push_back(r.energy);
        series.charge.push_back(r.charge);
        series.mass1.push_back(mass1(u));
        series.mass2.push_back(mass2(u));
        if (reference) {
            const OrbitalFit fit = orbital_distance(u, *reference);
            series.orbital_dist.push_back(fit.dist);
            series.theta_track.push_back(fit.theta);
        } else {
            series.orbital_dist.push_back(0.0);
            series.theta_track.push_back(0.0);
        }
        return true;
    };

    if (!sample(0.0)) {
        series.final_state = u;
        return series;
    }
    for (long s = 1; s <= nsteps; ++s) {
        st.advance(u, p, cfg);
        if (s % cfg.monitor_stride == 0 || s == nsteps) {
            if (!sample(s * cfg.dt)) break;
        }
    }
    series.final_state = u;
    return series;
}

StabilityVerdict stability_probe(const BranchPoint& bp, const CouplingParams& p, double omega,
                                 double delta, ProbeDirection dir, const EvolutionConfig& cfg,
                                 const Grid& grid, std::uint64_t seed,
                                 TrajectorySeries* series) {
    cfg.validate();
    if (!(delta >= 1e-4 && delta <= 1e-2))
        throw std::invalid_argument("stability_probe: delta must lie in [1e-4, 1e-2]");
    if (cfg.dt > 0.01 / omega)
        throw std::invalid_argument("stability_probe: dt exceeds the 0.01/omega ceiling");

    ScalarProfile phi = grid.dim == 1 ? phi_closed_form_1d(omega, grid)
                                      : phi_radial(omega, grid.dim, grid);
    Field2 ref = branch_state(bp, phi);

    Field2 pert = Field2::zero(grid);
    switch (dir) {
        case ProbeDirection::random_even: {
            auto rng = make_rng(seed, 7001);
            pert = random_smooth_field2(grid, rng, 1.5, true, false);
            break;
        }
        case ProbeDirection::psi_first_component:
            for (std::size_t i = 0; i < pert.u1.size(); ++i) pert.u1[i] = phi.values[i];
            break;
        case ProbeDirection::phase_kick:
            for (std::size_t i = 0; i < pert.u1.size(); ++i) {
                pert.u1[i] = cplx(0.0, 1.0) * ref.u1[i];
                pert.u2[i] = cplx(0.0, 2.0) * ref.u2[i];
            }
            break;
    }
    const double pn = norm_X(pert);
    if (!(pn > 0.0)) throw std::invalid_argument("stability_probe: zero direction");

    Field2 u = ref;
    for (std::size_t i = 0; i < u.u1.size(); ++i) {
        u.u1[i] += delta / pn * pert.u1[i];
        u.u2[i] += delta / pn * pert.u2[i];
    }

    Stepper st(grid, cfg.dt, cfg.dealias);
    StabilityVerdict v;
    v.perturbation_size = delta;
    const long nsteps = std::lround(cfg.t_final / cfg.dt);
    bool bad = false;
    auto record = [&](double t, double dist, double theta) {
        if (!series) return;
        const FunctionalReport r = action_report(u, p, omega);
        series->times.push_back(t);
        series->energy.push_back(r.energy);
        series->charge.push_back(r.charge);
        series->mass1.push_back(mass1(u));
        series->mass2.push_back(mass2(u));
        series->orbital_dist.push_back(dist);
        series->theta_track.push_back(theta);
    };
    for (long s = 0; s <= nsteps; ++s) {
        if (s > 0) st.advance(u, p, cfg);
        if (s % cfg.monitor_stride != 0 && s != nsteps) continue;
        if (!u.finite()) {
            bad = true;
            if (series) {
                series->aborted = true;
                series->abort_time = series->times.empty() ? 0.0 : series->times.back();
            }
            break;
        }
        const OrbitalFit fit = orbital_distance(u, ref);
        record(s * cfg.dt, fit.dist, fit.theta);
        v.max_dist = std::max(v.max_dist, fit.dist);
        if (fit.dist >= 10.0 * delta) {
            v.verdict = Stability::unstable_growth;
            v.growth_time = s * cfg.dt;
            if (series) series->final_state = u;
            return v;
        }
    }
    if (!bad && v.max_dist <= 3.0 * delta) v.verdict = Stability::stable_bounded;
    if (series) series->final_state = u;
    return v;
}

std::pair<std::vector<double>, std::vector<double>> phase_track(
    const std::vector<Field2>& snapshots, const Field2& phi) {
    std::vector<double> theta, residual;
    theta.reserve(snapshots.size());
    residual.reserve(snapshots.size());
    for (const Field2& f : snapshots) {
        if (!(f.grid == phi.grid)) throw std::invalid_argument("phase_track: grid mismatch");
        const OrbitalFit fit = gauge_distance(f, phi);
        theta.push_back(fit.theta);
        residual.push_back(fit.dist);
    }
    return {theta, residual};
}

std::string series_csv(const TrajectorySeries& s) {
    std::string out = "time,energy,charge,mass1,mass2,orbital_dist,theta_track\n";
    char buf[192];
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        std::snprintf(buf, sizeof(buf),
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.times[i],
                      s.energy[i], s.charge[i], s.mass1[i], s.mass2[i], s.orbital_dist[i],
                      s.theta_track[i]);
        out += buf;
    }
    return out;
}

}  // namespace rnls
