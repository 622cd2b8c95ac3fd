#include "rnls/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"
#include "rnls/rng.hpp"

namespace rnls {

namespace {

// potential values of phi along the positive last axis, for radial assembly
std::vector<double> axis_values(const ScalarProfile& phi) {
    const Grid& g = phi.grid;
    std::size_t base = 0;
    for (int d = 0; d < g.dim - 1; ++d) base = (base + g.n / 2) * g.n;
    std::vector<double> out(g.n / 2);
    for (int j = 0; j < g.n / 2; ++j) out[j] = phi.values[base + g.n / 2 + j];
    return out;
}

// 4-point Lagrange interpolation on the h-mesh with even reflection at 0
double axis_interp(const std::vector<double>& a, double h, double r) {
    const int j0 = static_cast<int>(std::floor(r / h)) - 1;
    double out = 0.0;
    for (int s = 0; s < 4; ++s) {
        const int idx = j0 + s;
        double w = 1.0;
        for (int t = 0; t < 4; ++t) {
            if (t == s) continue;
            w *= (r - (j0 + t) * h) / ((idx - (j0 + t)) * h);
        }
        int fold = idx < 0 ? -idx : idx;
        if (fold >= static_cast<int>(a.size())) fold = static_cast<int>(a.size()) - 1;
        out += w * a[fold];
    }
    return out;
}

std::vector<double> radial_potential(const ScalarProfile& phi, int nodes, double dr) {
    auto axis = axis_values(phi);
    std::vector<double> pot(nodes);
    for (int i = 0; i < nodes; ++i) pot[i] = axis_interp(axis, phi.grid.h, (i + 0.5) * dr);
    return pot;
}

// circulant first row of the spectral Laplacian, exactly symmetric
std::vector<double> laplacian_row(const Grid& g) {
    const int n = g.n;
    std::vector<double> c(n);
    for (int d = 0; d <= n / 2; ++d) {
        double s = 0.0;
        for (int m = 0; m < n; ++m) {
            const double k = g.wavenumbers[m];
            s += k * k * std::cos(2.0 * M_PI * m * d / n);
        }
        c[d] = s / n;
        if (d > 0 && d < n) c[n - d] = c[d];
    }
    return c;
}

OperatorSpectrum eig_low_impl(const Eigen::MatrixXd& m, const Eigen::VectorXd& sqrtw, int k) {
    if (k < 1) throw std::invalid_argument("eig_low: k must be >= 1");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eig_low: eigensolver failed to converge");
    const auto& vals = es.eigenvalues();
    const int total = static_cast<int>(vals.size());
    k = std::min(k, total);
    OperatorSpectrum out;
    out.kernel_tol = 1e-6 * std::max(std::abs(vals(0)), std::abs(vals(total - 1)));
    for (int i = 0; i < total; ++i) {
        if (vals(i) < -out.kernel_tol) ++out.negative_count;
        if (std::abs(vals(i)) <= out.kernel_tol) ++out.kernel_dim;
    }
    out.eigenvalues.assign(vals.data(), vals.data() + k);
    out.eigenvectors.resize(m.rows(), k);
    out.residuals.resize(k);
    for (int i = 0; i < k; ++i) {
        Eigen::VectorXd v = es.eigenvectors().col(i);
        out.residuals[i] = (m * v - vals(i) * v).norm() / v.norm();
        out.eigenvectors.col(i) = v.cwiseQuotient(sqrtw);
    }
    return out;
}

void check_branch_point(const BranchPoint& bp) {
    if (bp.kind == BranchKind::semitrivial) return;
    if (std::abs(bp.residual_line) > 1e-9 || std::abs(bp.residual_ellipse) > 1e-9)
        throw std::invalid_argument("branch point residuals out of tolerance");
}

}  // namespace

ScalarOperator assemble_La(double a, const ScalarProfile& phi, const Grid& grid) {
    if (!(grid == phi.grid)) throw std::invalid_argument("assemble_La: grid/profile mismatch");
    ScalarOperator op;
    op.a = a;
    op.omega = phi.omega;
    op.dim = grid.dim;
    if (grid.dim == 1) {
        op.boundary = Boundary::periodic_1d;
        const int n = grid.n;
        op.spacing = grid.h;
        auto c = laplacian_row(grid);
        op.matrix.resize(n, n);
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) op.matrix(j, l) = c[(j - l + n) % n];
        for (int j = 0; j < n; ++j) op.matrix(j, j) += op.omega - a * phi.values[j];
        op.weight = Eigen::VectorXd::Constant(n, grid.h);
        op.sqrtw = Eigen::VectorXd::Ones(n);
    } else {
        op.boundary = Boundary::radial_regular;
        const double dr = grid.h / 2.0;
        const int nodes = static_cast<int>(std::floor(grid.extent / 2.0 / dr));
        op.spacing = dr;
        auto pot = radial_potential(phi, nodes, dr);
        op.matrix = Eigen::MatrixXd::Zero(nodes, nodes);
        op.weight.resize(nodes);
        op.sqrtw.resize(nodes);
        const int p = grid.dim - 1;
        auto w = [&](double r) { return std::pow(r, p); };
        for (int i = 0; i < nodes; ++i) {
            const double r = (i + 0.5) * dr;
            const double wl = w(r - 0.5 * dr), wr = w(r + 0.5 * dr), wc = w(r);
            op.weight(i) = wc * dr;
            op.sqrtw(i) = std::sqrt(wc);
            op.matrix(i, i) = (wl + wr) / (wc * dr * dr) + op.omega - a * pot[i];
            if (i + 1 < nodes) {
                const double off = -wr / (dr * dr * std::sqrt(wc * w(r + dr)));
                op.matrix(i, i + 1) = off;
                op.matrix(i + 1, i) = off;
            }
        }
    }
    return op;
}

OperatorSpectrum eig_low(const ScalarOperator& op, int k) {
    return eig_low_impl(op.matrix, op.sqrtw, k);
}

OperatorSpectrum eig_low(const BlockOperator& op, int k) {
    Eigen::VectorXd sw(2 * op.n);
    sw << op.sqrtw, op.sqrtw;
    return eig_low_impl(op.matrix, sw, k);
}

std::pair<BlockOperator, BlockOperator> assemble_blocks(const BranchPoint& bp,
                                                        const CouplingParams& p,
                                                        const ScalarProfile& phi) {
    check_branch_point(bp);
    const double al = bp.alpha, be = bp.beta, ga = p.gamma, ka = p.kappa;
    // first-component potentials carry the kappa of the u1 nonlinearity;
    // on the line kappa*alpha + gamma*beta = 1 they reduce to (2 - gamma*beta)
    // and (1 - 2*gamma*beta), which is what the diagonalization needs
    ScalarOperator d11r = assemble_La(2.0 * ka * al + ga * be, phi, phi.grid);
    ScalarOperator d22r = assemble_La(2.0 * be, phi, phi.grid);
    ScalarOperator d11i = assemble_La(ka * al - ga * be, phi, phi.grid);
    ScalarOperator d22i = assemble_La(be, phi, phi.grid);
    const int n = static_cast<int>(d11r.matrix.rows());

    std::vector<double> pot(n);
    if (phi.grid.dim == 1)
        for (int i = 0; i < n; ++i) pot[i] = phi.values[i];
    else
        pot = radial_potential(phi, n, d11r.spacing);

    auto build = [&](BlockKind kind, const ScalarOperator& d11, const ScalarOperator& d22) {
        BlockOperator b;
        b.kind = kind;
        b.alpha = al;
        b.beta = be;
        b.n = n;
        b.weight = d11.weight;
        b.sqrtw = d11.sqrtw;
        b.spacing = d11.spacing;
        b.matrix = Eigen::MatrixXd::Zero(2 * n, 2 * n);
        b.matrix.topLeftCorner(n, n) = d11.matrix;
        b.matrix.bottomRightCorner(n, n) = d22.matrix;
        for (int i = 0; i < n; ++i) {
            b.matrix(i, n + i) = -ga * al * pot[i];
            b.matrix(n + i, i) = -ga * al * pot[i];
        }
        return b;
    };
    return {build(BlockKind::LR, d11r, d22r), build(BlockKind::LI, d11i, d22i)};
}

DiagonalizationReport verify_diagonalization(const BranchPoint& bp, const CouplingParams& p,
                                             const ScalarProfile& phi, int k) {
    if (!(bp.alpha > 0.0) || !(bp.beta > 0.0))
        throw std::invalid_argument(
            "verify_diagonalization: needs alpha > 0 and beta > 0 (semitrivial case decouples)");
    auto [lr, li] = assemble_blocks(bp, p, phi);
    const int n = lr.n;
    DiagonalizationReport rep;

    auto conjugate = [&](const BlockOperator& b, double pp, double qq, double a_top,
                         double a_bot, double& offdiag, double& eig_err) {
        const auto m11 = b.matrix.topLeftCorner(n, n);
        const auto m12 = b.matrix.topRightCorner(n, n);
        const auto m22 = b.matrix.bottomRightCorner(n, n);
        Eigen::MatrixXd t12 = pp * qq * (m22 - m11) + (pp * pp - qq * qq) * m12;
        offdiag = t12.cwiseAbs().maxCoeff();
        // merged scalar spectra vs block spectrum
        ScalarOperator top = assemble_La(a_top, phi, phi.grid);
        ScalarOperator bot = assemble_La(a_bot, phi, phi.grid);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> e1(top.matrix, Eigen::EigenvaluesOnly),
            e2(bot.matrix, Eigen::EigenvaluesOnly), eb(b.matrix, Eigen::EigenvaluesOnly);
        std::vector<double> merged(e1.eigenvalues().data(),
                                   e1.eigenvalues().data() + e1.eigenvalues().size());
        merged.insert(merged.end(), e2.eigenvalues().data(),
                      e2.eigenvalues().data() + e2.eigenvalues().size());
        std::sort(merged.begin(), merged.end());
        eig_err = 0.0;
        for (int i = 0; i < std::min<int>(k, 2 * n); ++i)
            eig_err = std::max(eig_err, std::abs(merged[i] - eb.eigenvalues()(i)));
    };

    const double al = bp.alpha, be = bp.beta;
    {
        const double nr = std::sqrt(al * al + be * be);
        const double pp = al / nr, qq = be / nr;
        rep.orthogonality = std::abs(pp * pp + qq * qq - 1.0);
        conjugate(lr, pp, qq, 2.0, (2.0 - p.gamma) * be, rep.offdiag_R, rep.eig_err_R);
    }
    {
        const double nr = std::sqrt(al * al + 4.0 * be * be);
        const double pp = al / nr, qq = 2.0 * be / nr;
        rep.orthogonality = std::max(rep.orthogonality, std::abs(pp * pp + qq * qq - 1.0));
        conjugate(li, pp, qq, 1.0, (1.0 - 2.0 * p.gamma) * be, rep.offdiag_I, rep.eig_err_I);
    }
    return rep;
}

double quadratic_form(const ScalarOperator& op, const Eigen::VectorXd& v) {
    if (v.size() != op.matrix.rows()) throw std::invalid_argument("quadratic_form: shape mismatch");
    Eigen::VectorXd s = v.cwiseProduct(op.sqrtw);
    Eigen::VectorXd ms = op.matrix * s;
    double q = 0.0;
    for (int i = 0; i < v.size(); ++i) q += op.weight(i) / op.sqrtw(i) * v(i) * ms(i);
    return q;
}

double quadratic_form(const BlockOperator& op, const Eigen::VectorXd& v) {
    if (v.size() != 2 * op.n) throw std::invalid_argument("quadratic_form: shape mismatch");
    Eigen::VectorXd sw(2 * op.n), wt(2 * op.n);
    sw << op.sqrtw, op.sqrtw;
    wt << op.weight, op.weight;
    Eigen::VectorXd s = v.cwiseProduct(sw);
    Eigen::VectorXd ms = op.matrix * s;
    double q = 0.0;
    for (int i = 0; i < v.size(); ++i) q += wt(i) / sw(i) * v(i) * ms(i);
    return q;
}

Eigen::VectorXd apply(const ScalarOperator& op, const Eigen::VectorXd& v) {
    if (v.size() != op.matrix.rows()) throw std::invalid_argument("apply: shape mismatch");
    return (op.matrix * v.cwiseProduct(op.sqrtw)).cwiseQuotient(op.sqrtw);
}

Eigen::VectorXd apply(const BlockOperator& op, const Eigen::VectorXd& v) {
    if (v.size() != 2 * op.n) throw std::invalid_argument("apply: shape mismatch");
    Eigen::VectorXd sw(2 * op.n);
    sw << op.sqrtw, op.sqrtw;
    return (op.matrix * v.cwiseProduct(sw)).cwiseQuotient(sw);
}

double coercivity_probe(CoercivityKind kind, const BranchPoint& bp, const CouplingParams& p,
                        const ScalarProfile& phi, int trials, std::uint64_t seed) {
    if (phi.grid.dim != 1)
        throw std::invalid_argument("coercivity_probe: 1-d grids only (radial = even symmetry)");
    if (trials < 1) throw std::invalid_argument("coercivity_probe: trials must be >= 1");
    const double gb = (2.0 - p.gamma) * bp.beta;
    if (kind == CoercivityKind::Lr1 && !(gb < 1.0))
        throw std::invalid_argument("coercivity_probe: Lemma Lr1 requires (2-gamma)*beta < 1");
    if (kind == CoercivityKind::Lr2 && !(gb >= 1.0 && gb < 2.0))
        throw std::invalid_argument(
            "coercivity_probe: Lemma Lr2 requires 1 <= (2-gamma)*beta < 2");

    auto [lr, li] = assemble_blocks(bp, p, phi);
    const BlockOperator& op = kind == CoercivityKind::Li1 ? li : lr;
    const Grid& g = phi.grid;
    const int n = g.n;

    // spectral derivative of phi for the grad-Phi constraint
    const Fft& fft = fft_for(g);
    std::vector<cplx> buf(n), hat(n);
    for (int i = 0; i < n; ++i) buf[i] = phi.values[i];
    fft.forward(buf.data(), hat.data());
    for (int i = 0; i < n; ++i) hat[i] *= cplx(0.0, g.wavenumbers[i]);
    fft.inverse(hat.data(), buf.data());
    Eigen::VectorXd dphi(n), pv(n);
    for (int i = 0; i < n; ++i) {
        dphi(i) = buf[i].real();
        pv(i) = phi.values[i];
    }

    auto pair_vec = [&](double c1, const Eigen::VectorXd& v1, double c2,
                        const Eigen::VectorXd& v2) {
        Eigen::VectorXd v(2 * n);
        v << c1 * v1, c2 * v2;
        return v;
    };
    std::vector<Eigen::VectorXd> constraints;
    switch (kind) {
        case CoercivityKind::Lr1:
            constraints.push_back(pair_vec(bp.alpha, pv, bp.beta, pv));
            constraints.push_back(pair_vec(bp.alpha, dphi, bp.beta, dphi));
            break;
        case CoercivityKind::Lr2:
            constraints.push_back(pair_vec(bp.alpha, pv, bp.beta, pv));
            constraints.push_back(pair_vec(-bp.beta, pv, bp.alpha, pv));
            break;
        case CoercivityKind::Li1:
            constraints.push_back(pair_vec(bp.alpha, pv, 2.0 * bp.beta, pv));
            break;
    }
    // H-orthonormalize the constraint set
    auto dot_h = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return g.h * a.dot(b);
    };
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j)
            constraints[i] -= dot_h(constraints[i], constraints[j]) * constraints[j];
        constraints[i] /= std::sqrt(dot_h(constraints[i], constraints[i]));
    }

    auto xnorm2 = [&](const Eigen::VectorXd& v) {
        double s = 0.0;
        for (int c = 0; c < 2; ++c) {
            for (int i = 0; i < n; ++i) buf[i] = v(c * n + i);
            fft.forward(buf.data(), hat.data());
            for (int i = 0; i < n; ++i)
                s += (1.0 + g.k2(i)) * std::norm(hat[i]) * g.h / n;
        }
        return s;
    };

    auto rng = make_rng(seed, 301);
    double best = std::numeric_limits<double>::infinity();
    for (int t = 0; t < trials; ++t) {
        auto r1 = random_smooth(g, rng, 2.0, false, true);
        auto r2 = random_smooth(g, rng, 2.0, false, true);
        Eigen::VectorXd v(2 * n);
        for (int i = 0; i < n; ++i) {
            v(i) = r1[i].real();
            v(n + i) = r2[i].real();
        }
        if (kind == CoercivityKind::Lr2) {
            // even subspace: v(x) <- (v(x) + v(-x)) / 2
            for (int c = 0; c < 2; ++c)
                for (int i = 1; i < n; ++i) {
                    const int j = n - i;
                    if (i < j) {
                        const double m = 0.5 * (v(c * n + i) + v(c * n + j));
                        v(c * n + i) = m;
                        v(c * n + j) = m;
                    }
                }
        }
        for (const auto& c : constraints) v -= dot_h(v, c) * c;
        const double nx = xnorm2(v);
        if (nx < 1e-12) continue;
        best = std::min(best, quadratic_form(op, v) / nx);
    }
    return best;
}

std::string spectrum_json(const OperatorSpectrum& s, double a, double omega, const Grid& grid) {
    nlohmann::json j;
    j["params"] = {{"a", a}, {"omega", omega}};
    j["grid"] = {{"dim", grid.dim}, {"n", grid.n}, {"L", grid.extent}};
    j["eigenvalues"] = s.eigenvalues;
    j["negative_count"] = s.negative_count;
    j["kernel_dim"] = s.kernel_dim;
    j["residuals"] = s.residuals;
    return j.dump(2);
}

}  // namespace rnls
