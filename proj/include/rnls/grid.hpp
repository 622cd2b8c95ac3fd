#ifndef RNLS_GRID_HPP
#define RNLS_GRID_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace rnls {

using cplx = std::complex<double>;

// Periodic tensor grid on [-L/2, L/2)^dim with n points per axis (power of
// two). Wavenumbers follow the standard FFT frequency ordering.
struct Grid {
    int dim = 1;
    double extent = 0.0;       // L
    int n = 0;                 // points per axis
    double h = 0.0;            // L / n
    std::vector<double> wavenumbers;  // per-axis, size n: 2*pi*freq/L

    static Grid make(int dim, double extent, int n);

    std::size_t size() const;                    // n^dim
    double cell_volume() const;                  // h^dim
    double coord(int index) const { return -0.5 * extent + h * index; }
    // physical coordinates of a flat index, row-major axis order
    void coords(std::size_t flat, double* x) const;
    // squared wavenumber |k|^2 of a flat index
    double k2(std::size_t flat) const;

    bool operator==(const Grid& o) const {
        return dim == o.dim && extent == o.extent && n == o.n;
    }
};

// Unnormalized forward / normalized inverse DFT on a Grid, all dims.
// Thread-safe across distinct Fft objects; plan creation is serialized.
class Fft {
  public:
    explicit Fft(const Grid& g);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    // out may alias in
    void forward(const cplx* in, cplx* out) const;
    void inverse(const cplx* in, cplx* out) const;

    void forward(std::vector<cplx>& io) const { forward(io.data(), io.data()); }
    void inverse(std::vector<cplx>& io) const { inverse(io.data(), io.data()); }

    const Grid& grid() const { return grid_; }

  private:
    Grid grid_;
    void* plan_fwd_ = nullptr;
    void* plan_bwd_ = nullptr;
    cplx* buf_ = nullptr;
};

}  // namespace rnls

#endif
