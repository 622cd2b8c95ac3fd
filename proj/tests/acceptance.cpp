// Acceptance gate: one criterion per invocation (argv[1] in 1..10).
// Prints exactly one PASS/FAIL line per criterion and exits 0/1.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "rnls/evolution.hpp"
#include "rnls/field.hpp"
#include "rnls/ground_state.hpp"
#include "rnls/manifest.hpp"
#include "rnls/model_core.hpp"
#include "rnls/rng.hpp"
#include "rnls/spectra.hpp"

using namespace rnls;

namespace {

struct Gate {
    int id;
    bool ok = true;
    std::string detail;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    explicit Gate(int n) : id(n) {}

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }

    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    }

    int finish(const std::string& summary) {
        std::printf("criterion %d %s: %s (%.1f s)\n", id, ok ? "PASS" : "FAIL",
                    ok ? summary.c_str() : detail.c_str(), elapsed());
        return ok ? 0 : 1;
    }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), f, a, b, c);
    return buf;
}

Grid grid1d() { return Grid::make(1, 80.0, 1024); }

double xdiff(const Field2& a, const Field2& b) {
    Field2 d = Field2::zero(a.grid);
    for (std::size_t i = 0; i < d.u1.size(); ++i) {
        d.u1[i] = a.u1[i] - b.u1[i];
        d.u2[i] = a.u2[i] - b.u2[i];
    }
    return norm_X(d);
}

Field2 run_steps(const Field2& f, const CouplingParams& p, double dt, double t_final) {
    EvolutionConfig cfg;
    cfg.dt = dt;
    cfg.t_final = t_final;
    cfg.monitor_stride = 1 << 30;
    return evolve(f, p, cfg).final_state;
}

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return std::abs(a.dot(b)) / (a.norm() * b.norm());
}

Eigen::VectorXd nodal(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<long>(v.size()));
}

Eigen::VectorXd spectral_derivative(const ScalarProfile& phi) {
    const Grid& g = phi.grid;
    const Fft& fft = fft_for(g);
    std::vector<cplx> buf(g.n);
    for (int i = 0; i < g.n; ++i) buf[i] = phi.values[i];
    fft.forward(buf);
    for (int i = 0; i < g.n; ++i) buf[i] *= cplx(0.0, g.wavenumbers[i]);
    fft.inverse(buf);
    Eigen::VectorXd out(g.n);
    for (int i = 0; i < g.n; ++i) out(i) = buf[i].real();
    return out;
}

// 1. Branch algebra on the full parameter grid against Proposition 1.
int criterion_1() {
    Gate gate(1);
    double worst_res = 0.0;
    for (int i = 0; i < 200 && gate.ok; ++i) {
        for (int j = 0; j < 200; ++j) {
            CouplingParams p{-2.0 + 4.0 * i / 199.0, 0.015 + (3.0 - 0.015) * j / 199.0};
            const JRegion r = classify_J(p);
            const auto pts = branch_points(p);
            const std::size_t expect = r == JRegion::J0 ? 0 : r == JRegion::J2 ? 2 : 1;
            gate.require(pts.size() == expect,
                         fmt("count mismatch at kappa=%g gamma=%g", p.kappa, p.gamma));
            for (const auto& bp : pts) {
                worst_res = std::max({worst_res, std::abs(bp.residual_line),
                                      std::abs(bp.residual_ellipse)});
            }
            // geometric cross-check on a coarse sub-lattice
            if (i % 7 == 0 && j % 7 == 0) {
                const auto brute = branch_points_bruteforce(p, 600);
                gate.require(brute.size() == pts.size(),
                             fmt("brute-force count mismatch at kappa=%g gamma=%g",
                                 p.kappa, p.gamma));
            }
            if (!gate.ok) break;
        }
    }
    gate.require(worst_res <= 1e-12, fmt("worst residual %.3g > 1e-12", worst_res));
    gate.require(gate.elapsed() < 5.0, fmt("runtime %.1f s >= 5 s", gate.elapsed()));
    return gate.finish(fmt("200x200 grid, worst residual %.2g", worst_res));
}

// 2. Inequality lemmas on sampled region points, equalities on J3/K3.
int criterion_2() {
    Gate gate(2);
    int strict = 0;
    for (int i = 0; i < 60 && gate.ok; ++i) {
        for (int j = 0; j < 60; ++j) {
            CouplingParams p{-2.0 + 4.0 * i / 59.0, 0.02 + 2.98 * j / 59.0};
            const JRegion r = classify_J(p);
            const auto pts = branch_points(p);
            const std::string at = fmt(" at kappa=%g gamma=%g", p.kappa, p.gamma);
            if (r == JRegion::J1 || r == JRegion::J2) {
                const BranchPoint& bm = pts.back();  // (alpha_+, beta_-)
                gate.require((2.0 - p.gamma) * bm.beta < 1.0, "(2-g)b- >= 1" + at);
                gate.require((1.0 - 2.0 * p.gamma) * bm.beta < 1.0, "(1-2g)b- >= 1" + at);
                gate.require(p.gamma * bm.alpha > p.kappa * bm.beta,
                             "g*a+ <= k*b-" + at);
                strict += 3;
            }
            if (r == JRegion::J2) {
                const BranchPoint& bp = pts.front();  // (alpha_-, beta_+)
                gate.require((2.0 - p.gamma) * bp.beta > 1.0, "(2-g)b+ <= 1" + at);
                gate.require((2.0 - p.gamma) * bp.beta < 2.0, "(2-g)b+ >= 2" + at);
                gate.require((1.0 - 2.0 * p.gamma) * bp.beta < 1.0, "(1-2g)b+ >= 1" + at);
                strict += 3;
            }
            if (classify_K(p) == KRegion::K1) {
                gate.require(ell(p) < 1.0, "a+^2+b-^2 >= 1 on K1" + at);
                ++strict;
            } else {
                gate.require(ell(p) == 1.0, "ell != 1 off K1" + at);
            }
            if (!gate.ok) break;
        }
    }
    for (double g : {0.2, 0.4, 0.5, 0.7, 0.9}) {
        CouplingParams p{std::sqrt(2.0 * g * (1.0 - g)), g};  // J3 boundary
        const auto pts = branch_points(p);
        gate.require(pts.size() == 1 &&
                         std::abs((2.0 - g) * pts[0].beta - 1.0) <= 1e-12,
                     fmt("(2-g)b0 != 1 on J3 at gamma=%g", g));
        CouplingParams q{kappa_c(g), g};  // K3 boundary
        const BranchPoint bp = branch_points(q).back();
        gate.require(std::abs(bp.alpha * bp.alpha + bp.beta * bp.beta - 1.0) <= 1e-12,
                     fmt("a+^2+b-^2 != 1 on K3 at gamma=%g", g));
    }
    gate.require(gate.elapsed() < 5.0, fmt("runtime %.1f s >= 5 s", gate.elapsed()));
    return gate.finish(fmt("%g strict inequalities + 10 boundary equalities",
                           static_cast<double>(strict)));
}

// 3. Scalar soliton closed-form oracle.
int criterion_3() {
    Gate gate(3);
    const ScalarProfile phi = phi_closed_form_1d(1.0, grid1d());
    double peak = 0.0;
    for (double v : phi.values) peak = std::max(peak, v);
    gate.require(peak == 1.5, fmt("phi(0) = %.17g != 1.5", peak));
    const double l3 = phi.l3cubed(), l2 = phi.l2norm2();
    gate.require(std::abs(l3 - 7.2) <= 1e-10 * 7.2, fmt("|phi|_L3^3 = %.12g", l3));
    gate.require(std::abs(l2 - 6.0) <= 1e-10 * 6.0, fmt("|phi|_L2^2 = %.12g", l2));
    return gate.finish(fmt("phi(0)=1.5, L3^3 err %.2g, L2^2 err %.2g",
                           std::abs(l3 - 7.2), std::abs(l2 - 6.0)));
}

// 4. Poschl-Teller spectral oracle and Lemma 2.1 kernels.
int criterion_4() {
    Gate gate(4);
    Grid g = grid1d();
    const ScalarProfile phi = phi_closed_form_1d(1.0, g);
    const ScalarOperator l1 = assemble_La(1.0, phi, g);
    const ScalarOperator l2 = assemble_La(2.0, phi, g);
    const OperatorSpectrum s1 = eig_low(l1, 2);
    const OperatorSpectrum s2 = eig_low(l2, 3);
    const double t1[] = {0.0, 0.75};
    const double t2[] = {-1.25, 0.0, 0.75};
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) worst = std::max(worst, std::abs(s1.eigenvalues[i] - t1[i]));
    for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(s2.eigenvalues[i] - t2[i]));
    gate.require(worst <= 1e-6, fmt("worst eigenvalue error %.3g > 1e-6", worst));
    gate.require(s2.negative_count == 1,
                 fmt("L2 negative count %g != 1", double(s2.negative_count)));
    const double c1 = correlation(s1.eigenvectors.col(0), nodal(phi.values));
    const double c2 = correlation(s2.eigenvectors.col(1), spectral_derivative(phi));
    gate.require(c1 > 0.9999, fmt("ker L1 correlation %.6f", c1));
    gate.require(c2 > 0.9999, fmt("ker L2 correlation %.6f", c2));
    gate.require(gate.elapsed() < 30.0, fmt("runtime %.1f s >= 30 s", gate.elapsed()));
    return gate.finish(fmt("eig err %.2g, kernel corr %.6f / %.6f", worst, c1, c2));
}

// 5. Lemma 2.2 diagonalization at 10 branch points.
int criterion_5() {
    Gate gate(5);
    Grid g = grid1d();
    const ScalarProfile phi = phi_closed_form_1d(1.0, g);
    std::vector<std::pair<CouplingParams, BranchPoint>> points;
    for (double ga : {0.6, 0.8, 0.9, 1.2, 1.5, 2.0}) {
        for (double ka : {-1.0, -0.3, 0.4, 0.7, 1.0}) {
            for (const BranchPoint& bp : branch_points(CouplingParams{ka, ga}))
                if (bp.alpha > 0.0 && bp.beta > 0.0 && points.size() < 10)
                    points.push_back({CouplingParams{ka, ga}, bp});
        }
    }
    double worst_off = 0.0, worst_eig = 0.0;
    for (const auto& [p, bp] : points) {
        const DiagonalizationReport r = verify_diagonalization(bp, p, phi, 8);
        worst_off = std::max({worst_off, r.offdiag_R, r.offdiag_I});
        worst_eig = std::max({worst_eig, r.eig_err_R, r.eig_err_I});
    }
    gate.require(points.size() == 10, "fewer than 10 branch points collected");
    gate.require(worst_off <= 1e-10, fmt("off-diagonal norm %.3g > 1e-10", worst_off));
    gate.require(worst_eig <= 1e-8, fmt("merged-spectrum gap %.3g > 1e-8", worst_eig));
    return gate.finish(fmt("10 points, offdiag %.2g, spectrum gap %.2g", worst_off,
                           worst_eig));
}

// 6. Conservation and Strang order under dt halving.
int criterion_6() {
    Gate gate(6);
    Grid g = grid1d();
    CouplingParams p{0.8, 0.9};
    auto rng = make_rng(123, 9);
    double worst_e = 0.0, worst_q = 0.0;
    for (int trial = 0; trial < 5 && gate.ok; ++trial) {
        Field2 f = random_smooth_field2(g, rng);
        const double s0 = 0.6 / norm_X(f);
        for (std::size_t i = 0; i < f.u1.size(); ++i) {
            f.u1[i] *= s0;
            f.u2[i] *= s0;
        }
        EvolutionConfig cfg;
        cfg.t_final = 20.0;
        cfg.monitor_stride = 1000;
        const TrajectorySeries s = evolve(f, p, cfg);
        gate.require(!s.aborted, fmt("trial %g aborted", double(trial)));
        double de = 0.0, dq = 0.0;
        for (std::size_t i = 0; i < s.times.size(); ++i) {
            de = std::max(de, std::abs(s.energy[i] - s.energy[0]));
            dq = std::max(dq, std::abs(s.charge[i] - s.charge[0]));
        }
        worst_e = std::max(worst_e, de / std::abs(s.energy[0]));
        worst_q = std::max(worst_q, dq / s.charge[0]);
    }
    gate.require(worst_e <= 1e-8, fmt("energy drift %.3g > 1e-8", worst_e));
    gate.require(worst_q <= 1e-10, fmt("charge drift %.3g > 1e-10", worst_q));

    auto orng = make_rng(44, 0);
    const Field2 f = random_smooth_field2(g, orng);
    const Field2 ref = run_steps(f, p, 1.25e-4, 0.5);
    const double ratio = xdiff(run_steps(f, p, 1e-3, 0.5), ref) /
                         xdiff(run_steps(f, p, 5e-4, 0.5), ref);
    gate.require(ratio >= 3.2 && ratio <= 4.8,
                 fmt("halving factor %.3f outside 4 +/- 20%%", ratio));
    return gate.finish(fmt("dE/E %.2g, dQ/Q %.2g, halving factor %.2f", worst_e,
                           worst_q, ratio));
}

// 7. Standing-wave fidelity at t = 5.
int criterion_7() {
    Gate gate(7);
    Grid g = grid1d();
    const ScalarProfile phi = phi_closed_form_1d(1.0, g);
    CouplingParams p{1.0, 0.8};
    const Field2 coupled0 = branch_state(branch_points(p).back(), phi);
    const double ec = xdiff(run_steps(coupled0, p, 1e-3, 5.0), apply_gauge(coupled0, 5.0));
    gate.require(ec <= 1e-6, fmt("coupled state X error %.3g > 1e-6", ec));

    CouplingParams ps{0.5, 0.7};
    const BranchPoint semi{0.0, 1.0, BranchKind::semitrivial, 0.0, 0.0};
    const Field2 semi0 = branch_state(semi, phi);
    // the doubled u2 dispersion raises the splitting error ~5x; shrink dt
    const double es = xdiff(run_steps(semi0, ps, 2.5e-4, 5.0), apply_gauge(semi0, 5.0));
    gate.require(es <= 1e-6, fmt("semitrivial X error %.3g > 1e-6", es));
    return gate.finish(fmt("X errors: coupled %.2g, semitrivial %.2g", ec, es));
}

// 8. Stability phase map: Theorems 1-5 as probe experiments.
int criterion_8() {
    Gate gate(8);
    Grid g = grid1d();
    struct Probe {
        const char* tag;
        double kappa, gamma;
        BranchKind state;
        ProbeDirection dir;
        double horizon;
        Stability expect;
    };
    const BranchKind semi = BranchKind::semitrivial;
    const auto re = ProbeDirection::random_even;
    const auto st = Stability::stable_bounded;
    const auto un = Stability::unstable_growth;
    const Probe probes[] = {
        {"thm1 gamma=0.3", -1.0, 0.3, semi, re, 100.0, st},
        {"thm1 gamma=0.5", 0.5, 0.5, semi, re, 100.0, st},
        {"thm1 gamma=0.8", 1.0, 0.8, semi, re, 100.0, st},
        {"thm1 gamma=1.2", -1.0, 1.2, semi, re, 50.0, un},
        {"thm1 gamma=1.5", 0.5, 1.5, semi, re, 50.0, un},
        {"thm1 gamma=2.0", 1.0, 2.0, semi, re, 50.0, un},
        {"thm2 (1,0.8)", 1.0, 0.8, BranchKind::plus_minus, re, 100.0, st},
        {"thm2 (-0.5,1.5)", -0.5, 1.5, BranchKind::plus_minus, re, 100.0, st},
        {"thm3 (1,0.8)", 1.0, 0.8, BranchKind::minus_plus, re, 50.0, un},
        {"thm3 (0.7,0.9)", 0.7, 0.9, BranchKind::minus_plus, re, 50.0, un},
        // gamma = 1 is the bifurcation point: (phi, 0) sits in ker LR with
        // L_{-1} > 0, so a generic perturbation drifts linearly along the
        // Jordan chain at a delta-independent rate and crosses any fixed
        // multiple of delta. The theorems' dichotomy is about the psi = (phi, 0)
        // mechanism itself, so probe along psi: kappa > 0 grows (crossing near
        // t = 70 at delta = 1e-3, hence the T = 100 horizon), kappa <= 0 stays
        // put.
        {"thm4 (1,1)", 1.0, 1.0, semi, ProbeDirection::psi_first_component, 100.0, un},
        {"thm5 (-1,1)", -1.0, 1.0, semi, ProbeDirection::psi_first_component, 100.0, st},
        {"thm5 (0,1)", 0.0, 1.0, semi, ProbeDirection::psi_first_component, 100.0, st},
    };
    int hits = 0;
    for (const Probe& pr : probes) {
        CouplingParams p{pr.kappa, pr.gamma};
        BranchPoint bp{0.0, 1.0, semi, 0.0, 0.0};
        if (pr.state != semi) {
            bool found = false;
            for (const BranchPoint& q : branch_points(p))
                if (q.kind == pr.state) {
                    bp = q;
                    found = true;
                }
            gate.require(found, std::string(pr.tag) + ": branch point missing");
            if (!found) continue;
        }
        EvolutionConfig cfg;
        cfg.dt = 1e-3;
        cfg.t_final = pr.horizon;
        cfg.monitor_stride = 100;
        const StabilityVerdict v =
            stability_probe(bp, p, 1.0, 1e-3, pr.dir, cfg, g, 20260823);
        gate.require(v.verdict != Stability::inconclusive,
                     std::string(pr.tag) + ": inconclusive");
        gate.require(v.verdict == pr.expect,
                     std::string(pr.tag) + ": got " + to_string(v.verdict) +
                         fmt(", max_dist/delta %.2f", v.max_dist / 1e-3));
        if (v.verdict == pr.expect) ++hits;
    }
    gate.require(gate.elapsed() < 1800.0, fmt("runtime %.0f s >= 30 min", gate.elapsed()));
    return gate.finish(fmt("%g/13 theorem probes verified", double(hits)));
}

// 9. Ground-state classification and d(omega).
int criterion_9() {
    Gate gate(9);
    Grid g = grid1d();
    const CouplingParams pts[] = {{1.0, 0.8},  {0.8, 1.2}, {1.0, 2.0},
                                  {0.5, 0.8},  {-1.0, 0.5}, {-0.5, 1.1}};
    double worst_match = 0.0, worst_d = 0.0;
    int k1 = 0, k2 = 0;
    for (const CouplingParams& p : pts) {
        const KRegion reg = classify_K(p);
        const GroundStateVerdict v = nehari_minimize(p, 1.0, g, 17);
        const Family expect =
            reg == KRegion::K1 ? Family::branch_G1 : Family::semitrivial_G0;
        const std::string at = fmt(" at kappa=%g gamma=%g", p.kappa, p.gamma);
        gate.require(reg != KRegion::K3, "sample fell on the K3 boundary" + at);
        gate.require(v.family == expect,
                     "family " + to_string(v.family) + " mismatches " +
                         to_string(reg) + at);
        gate.require(v.match_error <= 1e-4, fmt("match error %.3g > 1e-4", v.match_error) + at);
        worst_match = std::max(worst_match, v.match_error);
        (reg == KRegion::K1 ? k1 : k2)++;

        double a = 0.0, b = 1.0;  // semitrivial scaling
        if (reg == KRegion::K1) {
            const BranchPoint bp = branch_points(p).back();
            a = bp.alpha;
            b = bp.beta;
        }
        const double closed = (a * a + b * b) * 7.2 / 6.0;
        const double d1 = d_omega(p, 1.0, g);
        gate.require(std::abs(d1 - closed) <= 1e-5 * closed,
                     fmt("d(1) = %.8g vs closed form %.8g", d1, closed) + at);
        worst_d = std::max(worst_d, std::abs(d1 - closed) / closed);
    }
    gate.require(k1 >= 2 && k2 >= 2, "samples do not span K1 and K2");

    const CouplingParams p{1.0, 0.8};
    const double scaling = d_omega(p, 4.0, g) / d_omega(p, 1.0, g);
    gate.require(std::abs(scaling - 32.0) <= 1e-4 * 32.0,
                 fmt("d(4)/d(1) = %.8g != 32", scaling));
    return gate.finish(fmt("6 points, match err %.2g, d err %.2g, d(4)/d(1) gap %.2g",
                           worst_match, worst_d, std::abs(scaling - 32.0)));
}

// 10. Determinism of sweeps and persisted runs across parallelism.
int criterion_10() {
    Gate gate(10);
    RunInputs base;
    base.command = "sweep";
    base.n = 256;
    base.evo.dt = 1e-3;
    base.evo.t_final = 0.5;
    base.evo.monitor_stride = 50;

    SweepSpec spec;
    spec.kappa_lo = -1.0;
    spec.kappa_hi = 1.0;
    spec.kappa_count = 3;
    spec.gamma_lo = 0.5;
    spec.gamma_hi = 1.5;
    spec.gamma_count = 3;
    for (SweepExperiment e :
         {SweepExperiment::branch, SweepExperiment::ground_state, SweepExperiment::probe}) {
        spec.experiment = e;
        spec.parallelism = 1;
        const std::string seq = sweep_csv(spec, base, 404);
        spec.parallelism = 8;
        gate.require(sweep_csv(spec, base, 404) == seq,
                     std::string("parallelism 1 vs 8 differs for ") + to_string(e));
    }

    RunInputs in = base;
    in.command = "probe";
    in.kappa = 1.0;
    in.gamma = 0.8;
    in.seed = 12;
    const std::string out1 = "acceptance_out/a", out2 = "acceptance_out/b";
    const RunManifest m1 = run_probe(in, out1);
    const RunManifest m2 = run_probe(in, out2);
    gate.require(m1.id() == m2.id(), "run ids differ for identical inputs");
    auto slurp = [](const std::string& path) {
        std::string buf;
        if (FILE* f = std::fopen(path.c_str(), "rb")) {
            char tmp[4096];
            std::size_t got;
            while ((got = std::fread(tmp, 1, sizeof(tmp), f)) > 0) buf.append(tmp, got);
            std::fclose(f);
        }
        return buf;
    };
    const std::string s1 = slurp(out1 + "/runs/" + m1.id() + "/series.csv");
    gate.require(!s1.empty() && s1 == slurp(out2 + "/runs/" + m2.id() + "/series.csv"),
                 "series.csv differs between identical runs");
    return gate.finish("3 sweep experiments and rerun series byte-identical");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: acceptance <criterion 1..10>\n");
        return 2;
    }
    switch (std::atoi(argv[1])) {
        case 1: return criterion_1();
        case 2: return criterion_2();
        case 3: return criterion_3();
        case 4: return criterion_4();
        case 5: return criterion_5();
        case 6: return criterion_6();
        case 7: return criterion_7();
        case 8: return criterion_8();
        case 9: return criterion_9();
        case 10: return criterion_10();
    }
    std::fprintf(stderr, "unknown criterion\n");
    return 2;
}
