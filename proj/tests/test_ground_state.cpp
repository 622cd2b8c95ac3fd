#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "rnls/ground_state.hpp"
#include "rnls/model_core.hpp"
#include "rnls/rng.hpp"

using namespace rnls;

namespace {
Grid grid1d() { return Grid::make(1, 80.0, 1024); }
}  // namespace

TEST_CASE("closed-form 1d profile") {
    Grid g = grid1d();
    ScalarProfile p = phi_closed_form_1d(1.0, g);
    CHECK(p.values[g.n / 2] == doctest::Approx(1.5).epsilon(1e-14));  // x = 0
    CHECK(p.l3cubed() == doctest::Approx(7.2).epsilon(1e-12));
    CHECK(p.l2norm2() == doctest::Approx(6.0).epsilon(1e-12));
    CHECK(*std::min_element(p.values.begin(), p.values.end()) > 0.0);
    CHECK(profile_residual(p) <= 1e-8);
    CHECK(pohozaev_gap(p) <= 1e-8);

    SUBCASE("omega = 4 scaling") {
        ScalarProfile p4 = phi_closed_form_1d(4.0, g);
        CHECK(p4.values[g.n / 2] == doctest::Approx(6.0).epsilon(1e-14));
        // phi_4(x) = 4 phi_1(2x): half width
        const int i1 = g.n / 2 + 32;                      // x = 2.5
        const int i2 = g.n / 2 + 16;                      // x = 1.25
        CHECK(p4.values[i2] == doctest::Approx(4.0 * p.values[i1]).epsilon(1e-12));
        CHECK(profile_residual(p4) <= 1e-8);
        CHECK(pohozaev_gap(p4) <= 1e-8);
        CHECK(p4.l3cubed() == doctest::Approx(7.2 * std::pow(4.0, 2.5)).epsilon(1e-10));
    }
    SUBCASE("rejects bad input") {
        CHECK_THROWS(phi_closed_form_1d(-1.0, g));
        CHECK_THROWS(phi_closed_form_1d(1.0, Grid::make(2, 40.0, 64)));
    }
}

TEST_CASE("radial shooting dim 3") {
    Grid g = Grid::make(3, 48.0, 256);
    ScalarProfile p = phi_radial(1.0, 3, g);
    CHECK(*std::min_element(p.values.begin(), p.values.end()) > 0.0);
    // decreasing along the positive x axis
    const std::size_t origin = (static_cast<std::size_t>(g.n / 2) * g.n + g.n / 2) * g.n + g.n / 2;
    double prev = p.values[origin];
    CHECK(prev > 2.0);
    for (int i = 1; i < g.n / 2; ++i) {
        const double cur = p.values[origin + i];
        CHECK(cur < prev);
        prev = cur;
    }
    CHECK(profile_residual(p) <= 1e-8);
    CHECK(pohozaev_gap(p) <= 1e-8);

    SUBCASE("action scaling omega = 4") {
        // omega = 4 halves both the decay length and the core width
        ScalarProfile p4 = phi_radial(4.0, 3, Grid::make(3, 24.0, 256));
        CHECK(profile_residual(p4) <= 1e-8);
        // d(omega) = omega^{3 - N/2} d(1): ratio 8 at N = 3
        CHECK(p4.l3cubed() / p.l3cubed() == doctest::Approx(8.0).epsilon(1e-8));
    }
}

TEST_CASE("radial shooting dim 2") {
    Grid g = Grid::make(2, 60.0, 256);
    ScalarProfile p = phi_radial(1.0, 2, g);
    CHECK(*std::min_element(p.values.begin(), p.values.end()) > 0.0);
    CHECK(profile_residual(p) <= 1e-8);
    CHECK(pohozaev_gap(p) <= 1e-8);
    CHECK_THROWS(phi_radial(1.0, 1, grid1d()));
    CHECK_THROWS(phi_radial(-2.0, 2, g));
}

TEST_CASE("imaginary-time cross-check") {
    Grid g = grid1d();
    ScalarProfile p = phi_imaginary_time(1.0, g);
    ScalarProfile ref = phi_closed_form_1d(1.0, g);
    CHECK(profile_residual(p) <= 1e-8);
    double worst = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i)
        worst = std::max(worst, std::abs(p.values[i] - ref.values[i]));
    CHECK(worst <= 1e-6);
}

TEST_CASE("branch states") {
    Grid g = grid1d();
    ScalarProfile phi = phi_closed_form_1d(1.0, g);

    SUBCASE("kappa=0 gamma=2 symmetric branch") {
        BranchPoint bp{0.5, 0.5, BranchKind::plus_minus, 0.0, 0.0};
        Field2 f = branch_state(bp, phi);
        CHECK(stationary_residual(f, CouplingParams{0.0, 2.0}, 1.0) <= 1e-8);
    }
    SUBCASE("semitrivial state") {
        BranchPoint bp{0.0, 1.0, BranchKind::semitrivial, 0.0, 0.0};
        Field2 f = branch_state(bp, phi);
        CHECK(stationary_residual(f, CouplingParams{0.7, 1.9}, 1.0) <= 1e-10);
    }
    SUBCASE("kappa=1 gamma=1 action value") {
        BranchPoint bp{2.0 / 3.0, 1.0 / 3.0, BranchKind::plus_minus, 0.0, 0.0};
        Field2 f = branch_state(bp, phi);
        CouplingParams p{1.0, 1.0};
        CHECK(stationary_residual(f, p, 1.0) <= 1e-8);
        const double s = action_report(f, p, 1.0).action;
        CHECK(s == doctest::Approx((4.0 / 9.0 + 1.0 / 9.0) * 7.2 / 6.0).epsilon(1e-10));
    }
    SUBCASE("rejects sloppy branch point") {
        BranchPoint bp{0.5, 0.5, BranchKind::plus_minus, 1e-3, 0.0};
        CHECK_THROWS(branch_state(bp, phi));
    }
}

TEST_CASE("nehari minimization examples") {
    Grid g = grid1d();

    SUBCASE("K2 point goes semitrivial") {
        CouplingParams p{0.5, 0.8};
        REQUIRE(classify_K(p) == KRegion::K2);
        auto v = nehari_minimize(p, 1.0, g, 4242);
        CHECK(v.family == Family::semitrivial_G0);
        CHECK(v.match_error <= 1e-4);
        CHECK(v.action_value == doctest::Approx(1.2).epsilon(1e-6));
        CHECK(std::abs(action_report(v.minimizer, p, 1.0).nehari) <=
              1e-8 * action_report(v.minimizer, p, 1.0).xnorm2);
    }
    SUBCASE("K1 point goes to the branch family") {
        CouplingParams p{1.0, 0.8};
        REQUIRE(classify_K(p) == KRegion::K1);
        auto v = nehari_minimize(p, 1.0, g, 7);
        CHECK(v.family == Family::branch_G1);
        CHECK(v.match_error <= 1e-4);
        CHECK(v.action_value == doctest::Approx(ell(p) * 1.2).epsilon(1e-6));
    }
    SUBCASE("kappa=0 gamma=2") {
        CouplingParams p{0.0, 2.0};
        REQUIRE(classify_K(p) == KRegion::K1);
        auto v = nehari_minimize(p, 1.0, g, 99);
        CHECK(v.family == Family::branch_G1);
        CHECK(v.match_error <= 1e-4);
        CHECK(v.action_value == doctest::Approx(0.6).epsilon(1e-6));
    }
    SUBCASE("phase lock of the coupled minimizer") {
        CouplingParams p{1.0, 0.8};
        auto v = nehari_minimize(p, 1.0, g, 13);
        Field2 m = apply_gauge(v.minimizer, 0.9876);
        const double peak = std::abs(m.u1[g.n / 2]);
        for (int i = 0; i < g.n; ++i) {
            if (std::abs(m.u1[i]) < 1e-3 * peak || std::abs(m.u2[i]) < 1e-3 * peak) continue;
            const cplx lock = m.u1[i] * m.u1[i] * std::conj(m.u2[i]);
            CHECK(std::abs(std::arg(lock)) <= 1e-6);
        }
    }
}

TEST_CASE("d_omega") {
    Grid g = grid1d();
    SUBCASE("K2 point") {
        CHECK(d_omega(CouplingParams{0.5, 0.8}, 1.0, g) == doctest::Approx(1.2).epsilon(1e-10));
    }
    SUBCASE("K3 tie") {
        CouplingParams p{kappa_c(0.5), 0.5};
        REQUIRE(classify_K(p) == KRegion::K3);
        CHECK(d_omega(p, 1.0, g) == doctest::Approx(1.2).epsilon(1e-9));
    }
    SUBCASE("omega scaling, N = 1") {
        CouplingParams p{1.0, 0.8};
        CHECK(d_omega(p, 4.0, g) / d_omega(p, 1.0, g) == doctest::Approx(32.0).epsilon(1e-9));
    }
}

TEST_CASE("action-vs-ell inequality across regions") {
    Grid g = grid1d();
    const double l3 = phi_closed_form_1d(1.0, g).l3cubed();
    for (double gamma : {0.3, 0.6, 0.9, 1.2, 1.8}) {
        for (double kappa : {0.1, 0.4, 0.8, 1.2, 1.6}) {
            CouplingParams p{kappa, gamma};
            const double lhs = 6.0 * d_omega(p, 1.0, g);
            const double rhs = ell(p) * l3;
            CHECK(lhs <= rhs * (1.0 + 1e-6));
            const KRegion kr = classify_K(p);
            if (kr == KRegion::K2 || kr == KRegion::K3)
                CHECK(lhs == doctest::Approx(rhs).epsilon(1e-6));
        }
    }
}

TEST_CASE("Gagliardo-Nirenberg bound from the soliton") {
    Grid g = grid1d();
    ScalarProfile phi = phi_closed_form_1d(1.0, g);
    const double bound = std::cbrt(phi.l3cubed());
    auto rng = make_rng(57, 0);
    for (int trial = 0; trial < 50; ++trial) {
        Field2 v = Field2::zero(g);
        auto w = random_smooth(g, rng);
        v.u1 = w;
        const double h1 = grad_norm2(v) + mass1(v);
        double c3 = 0.0;
        for (const cplx& z : v.u1) c3 += std::abs(z) * std::norm(z);
        c3 *= g.cell_volume();
        CHECK(h1 / std::pow(c3, 2.0 / 3.0) >= bound * (1.0 - 1e-9));
    }
    // equality at the minimizer itself
    Field2 v = Field2::zero(g);
    for (int i = 0; i < g.n; ++i) v.u1[i] = phi.values[i];
    const double h1 = grad_norm2(v) + mass1(v);
    CHECK(h1 / std::pow(phi.l3cubed(), 2.0 / 3.0) ==
          doctest::Approx(bound).epsilon(1e-6));
}

TEST_CASE("family assignment matches classify_K on a 5x5 sweep") {
    Grid g = Grid::make(1, 80.0, 256);
    int checked = 0;
    std::uint64_t seed = 1000;
    for (double gamma : {0.3, 0.5, 0.7, 0.85, 1.2}) {
        for (double kappa : {0.2, 0.5, 0.8, 1.1, 1.4}) {
            CouplingParams p{kappa, gamma};
            const KRegion kr = classify_K(p);
            if (kr == KRegion::K3) continue;
            auto v = nehari_minimize(p, 1.0, g, seed++);
            CHECK(v.match_error <= 1e-4);
            if (kr == KRegion::K1)
                CHECK(v.family == Family::branch_G1);
            else
                CHECK(v.family == Family::semitrivial_G0);
            ++checked;
        }
    }
    CHECK(checked >= 20);
}
