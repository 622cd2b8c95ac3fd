#include "rnls/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <memory>
#include <stdexcept>

namespace rnls {

namespace {

void check_finite(const Field2& f, const char* where) {
    if (!f.finite()) throw std::invalid_argument(std::string(where) + ": field contains NaN/Inf");
}

double lp3(const std::vector<cplx>& u, double dv) {
    double s = 0.0;
    for (const cplx& z : u) {
        const double a = std::abs(z);
        s += a * a * a;
    }
    return s * dv;
}

double l2sq(const std::vector<cplx>& u, double dv) {
    double s = 0.0;
    for (const cplx& z : u) s += std::norm(z);
    return s * dv;
}

// Re int u1^2 conj(u2)
double cross_term(const Field2& f, double dv) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.u1.size(); ++i)
        s += (f.u1[i] * f.u1[i] * std::conj(f.u2[i])).real();
    return s * dv;
}

}  // namespace

bool Field2::finite() const {
    for (const cplx& z : u1)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    for (const cplx& z : u2)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

const Fft& fft_for(const Grid& g) {
    thread_local std::map<std::tuple<int, int, double>, std::unique_ptr<Fft>> cache;
    auto key = std::make_tuple(g.dim, g.n, g.extent);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, std::make_unique<Fft>(g)).first;
    return *it->second;
}

double grad_norm2(const Field2& f) {
    const Fft& fft = fft_for(f.grid);
    const std::size_t sz = f.grid.size();
    const double scale = f.grid.cell_volume() / static_cast<double>(sz);
    std::vector<cplx> hat(sz);
    double s = 0.0;
    for (const auto* comp : {&f.u1, &f.u2}) {
        fft.forward(comp->data(), hat.data());
        for (std::size_t i = 0; i < sz; ++i) s += f.grid.k2(i) * std::norm(hat[i]);
    }
    return s * scale;
}

double mass1(const Field2& f) { return l2sq(f.u1, f.grid.cell_volume()); }
double mass2(const Field2& f) { return l2sq(f.u2, f.grid.cell_volume()); }

double energy(const Field2& f, const CouplingParams& p) {
    check_finite(f, "energy");
    const double dv = f.grid.cell_volume();
    return 0.5 * grad_norm2(f) - (p.kappa / 3.0) * lp3(f.u1, dv) - (1.0 / 3.0) * lp3(f.u2, dv) -
           0.5 * p.gamma * cross_term(f, dv);
}

double charge(const Field2& f) {
    check_finite(f, "charge");
    const double dv = f.grid.cell_volume();
    return 0.5 * (l2sq(f.u1, dv) + l2sq(f.u2, dv));
}

FunctionalReport action_report(const Field2& f, const CouplingParams& p, double omega) {
    if (!(omega > 0.0)) throw std::invalid_argument("action_report: omega must be > 0");
    check_finite(f, "action_report");
    const double dv = f.grid.cell_volume();
    FunctionalReport r;
    const double gn = grad_norm2(f);
    const double m = l2sq(f.u1, dv) + l2sq(f.u2, dv);
    const double c3_1 = lp3(f.u1, dv), c3_2 = lp3(f.u2, dv), cr = cross_term(f, dv);
    r.charge = 0.5 * m;
    r.energy = 0.5 * gn - (p.kappa / 3.0) * c3_1 - (1.0 / 3.0) * c3_2 - 0.5 * p.gamma * cr;
    r.action = r.energy + omega * r.charge;
    r.xnorm2 = gn + omega * m;
    r.cubic = p.kappa * c3_1 + c3_2 + 1.5 * p.gamma * cr;
    r.nehari = r.xnorm2 - r.cubic;
    return r;
}

Field2 apply_gauge(const Field2& f, double theta) {
    Field2 out = f;
    const cplx e1 = std::polar(1.0, theta), e2 = std::polar(1.0, 2.0 * theta);
    for (cplx& z : out.u1) z *= e1;
    for (cplx& z : out.u2) z *= e2;
    return out;
}

Field2 apply_J(const Field2& f) {
    Field2 out = f;
    const cplx i1(0.0, 1.0), i2(0.0, 2.0);
    for (cplx& z : out.u1) z *= i1;
    for (cplx& z : out.u2) z *= i2;
    return out;
}

Field2 translate(const Field2& f, const std::array<double, 3>& y) {
    const Fft& fft = fft_for(f.grid);
    const Grid& g = f.grid;
    const std::size_t sz = g.size();
    Field2 out = f;
    std::vector<cplx> hat(sz);
    for (auto* comp : {&out.u1, &out.u2}) {
        fft.forward(comp->data(), hat.data());
        for (std::size_t i = 0; i < sz; ++i) {
            std::size_t rem = i;
            double phase = 0.0;
            for (int d = g.dim - 1; d >= 0; --d) {
                phase += g.wavenumbers[rem % g.n] * y[d];
                rem /= g.n;
            }
            hat[i] *= std::polar(1.0, -phase);
        }
        fft.inverse(hat.data(), comp->data());
    }
    return out;
}

double inner_H(const Field2& a, const Field2& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("inner_H: grid mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.u1.size(); ++i)
        s += (a.u1[i] * std::conj(b.u1[i])).real() + (a.u2[i] * std::conj(b.u2[i])).real();
    return s * a.grid.cell_volume();
}

double inner_X(const Field2& a, const Field2& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("inner_X: grid mismatch");
    const Fft& fft = fft_for(a.grid);
    const std::size_t sz = a.grid.size();
    const double scale = a.grid.cell_volume() / static_cast<double>(sz);
    std::vector<cplx> ha(sz), hb(sz);
    double s = 0.0;
    for (int c = 0; c < 2; ++c) {
        fft.forward(c == 0 ? a.u1.data() : a.u2.data(), ha.data());
        fft.forward(c == 0 ? b.u1.data() : b.u2.data(), hb.data());
        for (std::size_t i = 0; i < sz; ++i)
            s += (1.0 + a.grid.k2(i)) * (ha[i] * std::conj(hb[i])).real();
    }
    return s * scale;
}

double norm_X(const Field2& f) { return std::sqrt(std::max(0.0, inner_X(f, f))); }

namespace {

// Correlation arrays for the orbital fit: A(y) = sum_k (1+|k|^2) f1_k
// conj(phi1_k) e^{ik.y} * dV/size, and B likewise for the second component.
struct Correlator {
    const Grid* g = nullptr;
    std::vector<cplx> c1, c2;  // spectral weights

    cplx eval(const std::vector<cplx>& c, const std::array<double, 3>& y) const {
        cplx s{};
        const std::size_t sz = g->size();
        for (std::size_t i = 0; i < sz; ++i) {
            std::size_t rem = i;
            double phase = 0.0;
            for (int d = g->dim - 1; d >= 0; --d) {
                phase += g->wavenumbers[rem % g->n] * y[d];
                rem /= g->n;
            }
            s += c[i] * std::polar(1.0, phase);
        }
        return s;
    }

    // objective to maximize: Re(A e^{-i theta} + B e^{-2i theta})
    static double objective(cplx A, cplx B, double theta) {
        return (A * std::polar(1.0, -theta)).real() + (B * std::polar(1.0, -2.0 * theta)).real();
    }

    static double best_theta(cplx A, cplx B) {
        const double pi = std::acos(-1.0);
        double bt = 0.0, bv = -1e300;
        for (int s = 0; s < 64; ++s) {
            const double t = 2.0 * pi * s / 64.0;
            const double v = objective(A, B, t);
            if (v > bv) {
                bv = v;
                bt = t;
            }
        }
        // Newton polish on g(t) = Re(A e^{-it}) + Re(B e^{-2it})
        double t = bt;
        for (int it = 0; it < 50; ++it) {
            const cplx ea = A * std::polar(1.0, -t), eb = B * std::polar(1.0, -2.0 * t);
            const double g1 = ea.imag() + 2.0 * eb.imag();
            const double g2 = -ea.real() - 4.0 * eb.real();
            if (std::abs(g2) < 1e-300) break;
            const double step = g1 / g2;
            t -= step;
            if (std::abs(step) < 1e-14) break;
        }
        return objective(A, B, t) >= bv ? t : bt;
    }
};

}  // namespace

OrbitalFit orbital_distance(const Field2& f, const Field2& phi) {
    if (!(f.grid == phi.grid)) throw std::invalid_argument("orbital_distance: grid mismatch");
    const Grid& g = f.grid;
    const Fft& fft = fft_for(g);
    const std::size_t sz = g.size();
    const double scale = g.cell_volume() / static_cast<double>(sz);

    Correlator corr;
    corr.g = &g;
    corr.c1.resize(sz);
    corr.c2.resize(sz);
    {
        std::vector<cplx> hf(sz), hp(sz);
        fft.forward(f.u1.data(), hf.data());
        fft.forward(phi.u1.data(), hp.data());
        for (std::size_t i = 0; i < sz; ++i)
            corr.c1[i] = (1.0 + g.k2(i)) * hf[i] * std::conj(hp[i]) * scale;
        fft.forward(f.u2.data(), hf.data());
        fft.forward(phi.u2.data(), hp.data());
        for (std::size_t i = 0; i < sz; ++i)
            corr.c2[i] = (1.0 + g.k2(i)) * hf[i] * std::conj(hp[i]) * scale;
    }

    // Coarse stage: every grid shift at once via inverse FFT.
    std::vector<cplx> A(sz), B(sz);
    fft.inverse(corr.c1.data(), A.data());
    fft.inverse(corr.c2.data(), B.data());
    const double szd = static_cast<double>(sz);
    std::size_t best_j = 0;
    double best_val = -1e300, best_theta = 0.0;
    const double pi = std::acos(-1.0);
    for (std::size_t j = 0; j < sz; ++j) {
        const cplx Aj = A[j] * szd, Bj = B[j] * szd;
        for (int s = 0; s < 16; ++s) {
            const double t = 2.0 * pi * s / 16.0;
            const double v = Correlator::objective(Aj, Bj, t);
            if (v > best_val) {
                best_val = v;
                best_theta = t;
                best_j = j;
            }
        }
    }

    // translate(f, y) shifts f by +y, so matching tau_y phi at grid offset j
    // means y_d = j_d * h.
    std::array<double, 3> y{0.0, 0.0, 0.0};
    {
        std::size_t rem = best_j;
        for (int d = g.dim - 1; d >= 0; --d) {
            const int jd = static_cast<int>(rem % g.n);
            y[d] = g.h * (jd < g.n / 2 ? jd : jd - g.n);
            rem /= g.n;
        }
    }

    // Refinement: coordinate descent on (y, theta).
    cplx Ay = corr.eval(corr.c1, y), By = corr.eval(corr.c2, y);
    double theta = Correlator::best_theta(Ay, By);
    double val = Correlator::objective(Ay, By, theta);
    double span = g.h;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    while (span > 1e-10) {
        for (int d = 0; d < g.dim; ++d) {
            double lo = y[d] - span, hi = y[d] + span;
            double c = hi - gr * (hi - lo), dd = lo + gr * (hi - lo);
            auto score = [&](double yy) {
                std::array<double, 3> yt = y;
                yt[d] = yy;
                const cplx Aa = corr.eval(corr.c1, yt), Bb = corr.eval(corr.c2, yt);
                return Correlator::objective(Aa, Bb, Correlator::best_theta(Aa, Bb));
            };
            double fc = score(c), fd = score(dd);
            for (int it = 0; it < 60 && hi - lo > 1e-11; ++it) {
                if (fc > fd) {
                    hi = dd;
                    dd = c;
                    fd = fc;
                    c = hi - gr * (hi - lo);
                    fc = score(c);
                } else {
                    lo = c;
                    c = dd;
                    fc = fd;
                    dd = lo + gr * (hi - lo);
                    fd = score(dd);
                }
            }
            y[d] = 0.5 * (lo + hi);
        }
        Ay = corr.eval(corr.c1, y);
        By = corr.eval(corr.c2, y);
        theta = Correlator::best_theta(Ay, By);
        const double nv = Correlator::objective(Ay, By, theta);
        if (nv <= val + 1e-15) break;
        val = nv;
        span *= 0.25;
    }

    OrbitalFit fit;
    const double nf2 = inner_X(f, f), np2 = inner_X(phi, phi);
    fit.dist = std::sqrt(std::max(0.0, nf2 + np2 - 2.0 * val));
    const double two_pi = 2.0 * pi;
    fit.theta = theta - two_pi * std::floor(theta / two_pi);
    fit.y = y;
    return fit;
}

OrbitalFit gauge_distance(const Field2& f, const Field2& phi) {
    if (!(f.grid == phi.grid)) throw std::invalid_argument("gauge_distance: grid mismatch");
    const Grid& g = f.grid;
    const Fft& fft = fft_for(g);
    const std::size_t sz = g.size();
    const double scale = g.cell_volume() / static_cast<double>(sz);
    cplx A{}, B{};
    std::vector<cplx> hf(sz), hp(sz);
    fft.forward(f.u1.data(), hf.data());
    fft.forward(phi.u1.data(), hp.data());
    for (std::size_t i = 0; i < sz; ++i) A += (1.0 + g.k2(i)) * hf[i] * std::conj(hp[i]) * scale;
    fft.forward(f.u2.data(), hf.data());
    fft.forward(phi.u2.data(), hp.data());
    for (std::size_t i = 0; i < sz; ++i) B += (1.0 + g.k2(i)) * hf[i] * std::conj(hp[i]) * scale;
    OrbitalFit fit;
    const double theta = Correlator::best_theta(A, B);
    const double val = Correlator::objective(A, B, theta);
    fit.dist = std::sqrt(std::max(0.0, inner_X(f, f) + inner_X(phi, phi) - 2.0 * val));
    const double two_pi = 2.0 * std::acos(-1.0);
    fit.theta = theta - two_pi * std::floor(theta / two_pi);
    return fit;
}

double tail_mass_fraction(const Field2& f) {
    const Grid& g = f.grid;
    const std::size_t sz = g.size();
    double total = 0.0, tail = 0.0;
    double x[3];
    for (std::size_t i = 0; i < sz; ++i) {
        const double m = std::norm(f.u1[i]) + std::norm(f.u2[i]);
        total += m;
        g.coords(i, x);
        double maxc = 0.0;
        for (int d = 0; d < g.dim; ++d) maxc = std::max(maxc, std::abs(x[d]));
        if (maxc > 0.25 * g.extent) tail += m;
    }
    return total > 0.0 ? tail / total : 0.0;
}

std::vector<cplx> random_smooth(const Grid& g, std::mt19937_64& rng, double k0, bool even,
                                bool real_valued) {
    const std::size_t sz = g.size();
    std::vector<cplx> hat(sz);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < sz; ++i) {
        const double decay = std::exp(-g.k2(i) / (k0 * k0));
        hat[i] = cplx(gauss(rng), gauss(rng)) * decay;
    }
    auto mirror_index = [&](std::size_t i) {
        // index of -k
        std::size_t out = 0, mul = 1, rem = i;
        for (int d = g.dim - 1; d >= 0; --d) {
            const std::size_t jd = rem % g.n;
            const std::size_t mj = (g.n - jd) % g.n;
            out += mj * mul;
            mul *= g.n;
            rem /= g.n;
        }
        return out;
    };
    if (even) {
        // u(-x) = u(x) <=> hat_k = hat_{-k}
        for (std::size_t i = 0; i < sz; ++i) {
            const std::size_t m = mirror_index(i);
            if (m > i) {
                const cplx avg = 0.5 * (hat[i] + hat[m]);
                hat[i] = avg;
                hat[m] = avg;
            }
        }
    }
    if (real_valued) {
        // real u <=> hat_{-k} = conj(hat_k)
        for (std::size_t i = 0; i < sz; ++i) {
            const std::size_t m = mirror_index(i);
            if (m == i)
                hat[i] = cplx(hat[i].real(), 0.0);
            else if (m > i)
                hat[m] = std::conj(hat[i]);
        }
        if (even)
            for (std::size_t i = 0; i < sz; ++i) hat[i] = cplx(hat[i].real(), 0.0);
    }
    std::vector<cplx> out(sz);
    fft_for(g).inverse(hat.data(), out.data());
    // normalize to unit L2 norm
    double n2 = 0.0;
    for (const cplx& z : out) n2 += std::norm(z);
    n2 = std::sqrt(n2 * g.cell_volume());
    if (n2 > 0.0)
        for (cplx& z : out) z /= n2;
    return out;
}

Field2 random_smooth_field2(const Grid& g, std::mt19937_64& rng, double k0, bool even,
                            bool real_valued) {
    Field2 f;
    f.grid = g;
    f.u1 = random_smooth(g, rng, k0, even, real_valued);
    f.u2 = random_smooth(g, rng, k0, even, real_valued);
    return f;
}

namespace {
void write_u32(std::FILE* fp, std::uint32_t v) { std::fwrite(&v, 4, 1, fp); }
void write_f64(std::FILE* fp, double v) { std::fwrite(&v, 8, 1, fp); }
std::uint32_t read_u32(std::FILE* fp) {
    std::uint32_t v = 0;
    if (std::fread(&v, 4, 1, fp) != 1) throw std::runtime_error("snapshot: truncated header");
    return v;
}
double read_f64(std::FILE* fp) {
    double v = 0;
    if (std::fread(&v, 8, 1, fp) != 1) throw std::runtime_error("snapshot: truncated header");
    return v;
}
}  // namespace

void save_snapshot(const std::string& path, const Field2& f, const SnapshotMeta& meta) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp) throw std::runtime_error("save_snapshot: cannot open " + path);
    std::fwrite("RNLS", 1, 4, fp);
    write_u32(fp, 1);
    write_u32(fp, static_cast<std::uint32_t>(f.grid.dim));
    write_u32(fp, static_cast<std::uint32_t>(f.grid.n));
    write_f64(fp, f.grid.extent);
    write_f64(fp, meta.omega);
    write_f64(fp, meta.kappa);
    write_f64(fp, meta.gamma);
    write_f64(fp, meta.time);
    for (const auto* comp : {&f.u1, &f.u2})
        for (const cplx& z : *comp) {
            write_f64(fp, z.real());
            write_f64(fp, z.imag());
        }
    std::fclose(fp);
}

Field2 load_snapshot(const std::string& path, SnapshotMeta* meta) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp) throw std::runtime_error("load_snapshot: cannot open " + path);
    char magic[4];
    if (std::fread(magic, 1, 4, fp) != 4 || std::memcmp(magic, "RNLS", 4) != 0) {
        std::fclose(fp);
        throw std::runtime_error("load_snapshot: bad magic");
    }
    const std::uint32_t version = read_u32(fp);
    if (version != 1) {
        std::fclose(fp);
        throw std::runtime_error("load_snapshot: unsupported version");
    }
    const int dim = static_cast<int>(read_u32(fp));
    const int n = static_cast<int>(read_u32(fp));
    const double L = read_f64(fp);
    SnapshotMeta m;
    m.omega = read_f64(fp);
    m.kappa = read_f64(fp);
    m.gamma = read_f64(fp);
    m.time = read_f64(fp);
    Field2 f = Field2::zero(Grid::make(dim, L, n));
    for (auto* comp : {&f.u1, &f.u2})
        for (cplx& z : *comp) {
            const double re = read_f64(fp);
            const double im = read_f64(fp);
            z = cplx(re, im);
        }
    std::fclose(fp);
    if (meta) *meta = m;
    return f;
}

}  // namespace rnls
