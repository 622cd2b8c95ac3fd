#include "rnls/model_core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rnls {

namespace {

double discriminant(const CouplingParams& p) {
    return p.kappa * p.kappa + 2.0 * p.gamma * (p.gamma - 1.0);
}

BranchPoint make_point(const CouplingParams& p, double alpha, double beta, BranchKind kind) {
    BranchPoint bp;
    bp.alpha = alpha;
    bp.beta = beta;
    bp.kind = kind;
    bp.residual_line = p.kappa * alpha + p.gamma * beta - 1.0;
    bp.residual_ellipse = p.gamma * alpha * alpha + 2.0 * beta * beta - 2.0 * beta;
    return bp;
}

}  // namespace

JRegion classify_J(const CouplingParams& p) {
    p.validate();
    const double k = p.kappa, g = p.gamma;
    if ((k <= 0.0 && g > 1.0) || (k > 0.0 && g >= 1.0)) return JRegion::J1;
    if (g < 1.0 && k > 0.0) {
        const double kc = std::sqrt(2.0 * g * (1.0 - g));
        if (std::abs(k - kc) <= kBoundaryTol) return JRegion::J3;
        if (k > kc) return JRegion::J2;
    }
    return JRegion::J0;
}

KRegion classify_K(const CouplingParams& p) {
    p.validate();
    const double k = p.kappa, g = p.gamma;
    if (k >= 1.0) return KRegion::K1;
    if (k <= 0.0) return g > 1.0 ? KRegion::K1 : KRegion::K2;
    // 0 < kappa < 1
    if (g >= 1.0) return KRegion::K1;
    const double kc = kappa_c(g);
    if (std::abs(k - kc) <= kBoundaryTol) return KRegion::K3;
    return k > kc ? KRegion::K1 : KRegion::K2;
}

double kappa_c(double gamma) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::domain_error("kappa_c: gamma must lie in (0,1)");
    return 0.5 * (gamma + 2.0) * std::sqrt(1.0 - gamma);
}

double gamma_c(double kappa) {
    if (!(kappa > 0.0 && kappa < 1.0))
        throw std::domain_error("gamma_c: kappa must lie in (0,1)");
    // kappa_c is strictly decreasing, so the root is unique and bracketed.
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200 && hi - lo > 1e-16; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double v = 0.5 * (mid + 2.0) * std::sqrt(1.0 - mid);
        if (v > kappa)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::pair<double, double> gamma_pm(double kappa) {
    if (!(kappa > 0.0 && kappa <= 1.0 / std::sqrt(2.0) + 1e-15))
        throw std::domain_error("gamma_pm: kappa must lie in (0, 1/sqrt(2)]");
    const double disc = std::max(0.0, 1.0 - 2.0 * kappa * kappa);
    const double s = std::sqrt(disc);
    return {0.5 * (1.0 - s), 0.5 * (1.0 + s)};
}

std::vector<BranchPoint> branch_points(const CouplingParams& p) {
    p.validate();
    const double k = p.kappa, g = p.gamma;
    const JRegion region = classify_J(p);
    std::vector<BranchPoint> out;
    if (region == JRegion::J0) return out;

    const double denom = 2.0 * k * k + g * g * g;
    if (region == JRegion::J3) {
        const double a0 = (2.0 - g) * k / denom;
        const double b0 = (k * k + g * g) / denom;
        out.push_back(make_point(p, a0, b0, BranchKind::degenerate));
        return out;
    }

    const double sqrtD = std::sqrt(std::max(0.0, discriminant(p)));
    const double ap = ((2.0 - g) * k + g * sqrtD) / denom;
    const double bm = (k * k + g * g - k * sqrtD) / denom;
    out.push_back(make_point(p, ap, bm, BranchKind::plus_minus));
    if (region == JRegion::J2) {
        const double am = ((2.0 - g) * k - g * sqrtD) / denom;
        const double bp = (k * k + g * g + k * sqrtD) / denom;
        out.push_back(make_point(p, am, bp, BranchKind::minus_plus));
    }
    std::sort(out.begin(), out.end(),
              [](const BranchPoint& a, const BranchPoint& b) { return a.alpha < b.alpha; });
    return out;
}

std::vector<std::pair<double, double>> branch_points_bruteforce(const CouplingParams& p,
                                                                int resolution) {
    p.validate();
    if (resolution < 100) throw std::invalid_argument("branch_points_bruteforce: resolution >= 100");
    const double k = p.kappa, g = p.gamma;
    // Ellipse g*x^2 + 2(y-1/2)^2 = 1/2, parameterized on t in (0,pi) so x > 0.
    const auto ex = [&](double t) { return std::sin(t) / std::sqrt(2.0 * g); };
    const auto ey = [&](double t) { return 0.5 + 0.5 * std::cos(t); };
    const auto line = [&](double t) { return k * ex(t) + g * ey(t) - 1.0; };

    std::vector<std::pair<double, double>> out;
    const double pi = std::acos(-1.0);
    const double dt = pi / resolution;
    double prev = line(dt * 0.5);
    for (int i = 1; i < resolution; ++i) {
        const double t1 = dt * (i + 0.5);
        const double cur = line(t1);
        const double t0 = t1 - dt;
        if (prev == 0.0) {
            out.emplace_back(ex(t0), ey(t0));
        } else if (prev * cur < 0.0) {
            double lo = t0, hi = t1, flo = prev;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = line(mid);
                if (flo * fm <= 0.0)
                    hi = mid;
                else {
                    lo = mid;
                    flo = fm;
                }
            }
            const double t = 0.5 * (lo + hi);
            out.emplace_back(ex(t), ey(t));
        } else if (i + 1 < resolution) {
            // Tangency: a local minimum of line(t)^2 touching zero without a
            // sign change. Polish by golden-section around the sample.
            const double nxt = line(t1 + dt);
            if (std::abs(cur) < std::abs(prev) && std::abs(cur) < std::abs(nxt) &&
                std::abs(cur) < 1e-4) {
                const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
                double a = t0, b = t1 + dt;
                double c = b - gr * (b - a), d = a + gr * (b - a);
                while (b - a > 1e-14) {
                    if (std::abs(line(c)) < std::abs(line(d)))
                        b = d;
                    else
                        a = c;
                    c = b - gr * (b - a);
                    d = a + gr * (b - a);
                }
                const double t = 0.5 * (a + b);
                if (std::abs(line(t)) < 1e-10) out.emplace_back(ex(t), ey(t));
            }
        }
        prev = cur;
    }
    // Drop near-duplicate roots (a bisected root next to a polished tangency).
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(),
                          [](const auto& a, const auto& b) {
                              return std::abs(a.first - b.first) < 1e-7 &&
                                     std::abs(a.second - b.second) < 1e-7;
                          }),
              out.end());
    return out;
}

double ell(const CouplingParams& p) {
    p.validate();
    const KRegion region = classify_K(p);
    if (region != KRegion::K1) return 1.0;
    // K1 is contained in J1 u J2, so the (alpha_+, beta_-) point exists.
    for (const BranchPoint& bp : branch_points(p))
        if (bp.kind == BranchKind::plus_minus)
            return bp.alpha * bp.alpha + bp.beta * bp.beta;
    throw std::logic_error("ell: no (alpha_+, beta_-) point on K1");
}

E1E2Result verify_E1E2(const CouplingParams& p, int resolution) {
    p.validate();
    if (resolution < 200) throw std::invalid_argument("verify_E1E2: resolution >= 200");
    const double k = p.kappa, g = p.gamma;
    const double l = ell(p);
    const double side = std::sqrt(l);
    const double tol = 1e-9;

    const auto violation = [&](double x, double y) {
        // Max constraint violation; <= 0 means inside E1 cap E2.
        double v = 1.0 - (k * x + g * y);                       // E1: kx+gy >= 1
        v = std::max(v, 2.0 * y - (g * x * x + 2.0 * y * y));   // outside-ellipse part of E2
        v = std::max(v, x * x + y * y - l);                     // disc part of E2
        return v;
    };

    // Scan for the minimizer of the worst violation, then shrink the window
    // around it. The set is at most one point, so a feasible minimizer after
    // refinement is the singleton.
    double cx = 0.0, cy = 0.0, best = 1e300;
    double x0 = 0.0, x1 = side, y0 = 0.0, y1 = side;
    int res = resolution;
    for (int pass = 0; pass < 10; ++pass) {
        const double dx = (x1 - x0) / res, dy = (y1 - y0) / res;
        for (int i = 1; i <= res; ++i) {
            const double x = x0 + dx * i;
            for (int j = 1; j <= res; ++j) {
                const double y = y0 + dy * j;
                const double v = violation(x, y);
                if (v < best) {
                    best = v;
                    cx = x;
                    cy = y;
                }
            }
        }
        const double wx = 2.0 * dx, wy = 2.0 * dy;
        x0 = std::max(0.0, cx - wx);
        x1 = std::min(side, cx + wx);
        y0 = std::max(0.0, cy - wy);
        y1 = std::min(side, cy + wy);
        res = 64;
    }
    E1E2Result r;
    if (best <= tol) {
        r.empty = false;
        r.x = cx;
        r.y = cy;
    }
    return r;
}

}  // namespace rnls
