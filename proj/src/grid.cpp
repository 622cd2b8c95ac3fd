#include "rnls/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <stdexcept>

namespace rnls {

Grid Grid::make(int dim, double extent, int n) {
    if (dim < 1 || dim > 3) throw std::invalid_argument("Grid: dim must be 1, 2 or 3");
    if (!(extent > 0.0)) throw std::invalid_argument("Grid: extent must be > 0");
    if (n < 64 || (n & (n - 1)) != 0)
        throw std::invalid_argument("Grid: n must be a power of two >= 64");
    Grid g;
    g.dim = dim;
    g.extent = extent;
    g.n = n;
    g.h = extent / n;
    g.wavenumbers.resize(n);
    const double base = 2.0 * std::acos(-1.0) / extent;
    for (int j = 0; j < n; ++j) {
        const int freq = (j < n / 2) ? j : j - n;
        g.wavenumbers[j] = base * freq;
    }
    return g;
}

std::size_t Grid::size() const {
    std::size_t s = 1;
    for (int d = 0; d < dim; ++d) s *= static_cast<std::size_t>(n);
    return s;
}

double Grid::cell_volume() const {
    double v = 1.0;
    for (int d = 0; d < dim; ++d) v *= h;
    return v;
}

void Grid::coords(std::size_t flat, double* x) const {
    for (int d = dim - 1; d >= 0; --d) {
        x[d] = coord(static_cast<int>(flat % n));
        flat /= n;
    }
}

double Grid::k2(std::size_t flat) const {
    double s = 0.0;
    for (int d = dim - 1; d >= 0; --d) {
        const double k = wavenumbers[flat % n];
        s += k * k;
        flat /= n;
    }
    return s;
}

namespace {
// FFTW planning is not thread-safe.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

Fft::Fft(const Grid& g) : grid_(g) {
    const std::size_t sz = g.size();
    buf_ = reinterpret_cast<cplx*>(fftw_malloc(sizeof(fftw_complex) * sz));
    if (!buf_) throw std::bad_alloc();
    int dims[3] = {g.n, g.n, g.n};
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto* b = reinterpret_cast<fftw_complex*>(buf_);
    plan_fwd_ = fftw_plan_dft(g.dim, dims, b, b, FFTW_FORWARD, FFTW_ESTIMATE);
    plan_bwd_ = fftw_plan_dft(g.dim, dims, b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
    if (!plan_fwd_ || !plan_bwd_) throw std::runtime_error("Fft: plan creation failed");
}

Fft::~Fft() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    if (plan_fwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_bwd_) fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
    fftw_free(buf_);
}

void Fft::forward(const cplx* in, cplx* out) const {
    const std::size_t sz = grid_.size();
    std::memcpy(buf_, in, sz * sizeof(cplx));
    fftw_execute(static_cast<fftw_plan>(plan_fwd_));
    std::memcpy(out, buf_, sz * sizeof(cplx));
}

void Fft::inverse(const cplx* in, cplx* out) const {
    const std::size_t sz = grid_.size();
    std::memcpy(buf_, in, sz * sizeof(cplx));
    fftw_execute(static_cast<fftw_plan>(plan_bwd_));
    const double scale = 1.0 / static_cast<double>(sz);
    for (std::size_t i = 0; i < sz; ++i) out[i] = buf_[i] * scale;
}

}  // namespace rnls
