// Periodic pseudo-spectral grid on [0,L]^2 with FFTW-backed transforms.
//
// Conventions used throughout:
//   real layout      value(iy, ix) at index iy*n + ix, x = ix*L/n, y = iy*L/n
//   spectral layout  coef(iy, jx) at index iy*(n/2+1) + jx  (real-to-complex,
//                    the x frequency axis is halved; jx = 0..n/2)
//   normalization    forward() divides by n^2, so coefficients are true
//                    Fourier coefficients: f(x) = sum_k fhat_k exp(i k.x)
//   wavenumbers      k = (2*pi/L) * m with integer modes m in
//                    {0, 1, ..., n/2-1, -n/2, ..., -1}
//   dealiasing       a mode m survives iff 3*|m| <= n on each axis (2/3 rule)

#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

#include <fftw3.h>

namespace chb {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Allocator backed by fftw_malloc so every buffer shares FFTW's alignment
// (required for the new-array execute interface).
template <class T>
struct FftwAllocator {
  using value_type = T;
  FftwAllocator() = default;
  template <class U>
  FftwAllocator(const FftwAllocator<U>&) {}
  T* allocate(std::size_t count) {
    void* p = fftw_malloc(count * sizeof(T));
    if (!p) throw std::bad_alloc();
    return static_cast<T*>(p);
  }
  void deallocate(T* p, std::size_t) { fftw_free(p); }
  template <class U>
  bool operator==(const FftwAllocator<U>&) const { return true; }
};

using RealBuffer = std::vector<double, FftwAllocator<double>>;
using ComplexBuffer = std::vector<Complex, FftwAllocator<Complex>>;

class SpectralGrid;
using GridPtr = std::shared_ptr<const SpectralGrid>;

// n must be a power of two, n >= 4; length > 0.
GridPtr make_grid(int n, double length = kTwoPi);

class SpectralGrid {
 public:
  ~SpectralGrid();
  SpectralGrid(const SpectralGrid&) = delete;
  SpectralGrid& operator=(const SpectralGrid&) = delete;

  int n() const { return n_; }
  double length() const { return length_; }
  double spacing() const { return length_ / n_; }
  double cell_area() const { return spacing() * spacing(); }
  int spec_nx() const { return n_ / 2 + 1; }
  std::size_t real_size() const { return static_cast<std::size_t>(n_) * n_; }
  std::size_t spec_size() const {
    return static_cast<std::size_t>(n_) * spec_nx();
  }

  double node_x(int ix) const { return ix * spacing(); }
  double node_y(int iy) const { return iy * spacing(); }

  // Integer mode for a wrapped axis index (the y axis and any full axis).
  int mode_of(int index) const { return index <= n_ / 2 ? index : index - n_; }
  double kx(int jx) const { return k_scale_ * jx; }
  double ky(int iy) const { return k_scale_ * mode_of(iy); }
  bool mode_in_mask(int m) const { return 3 * std::abs(m) <= n_; }

  // Out-of-place transforms; the input array is never clobbered. Safe to
  // call concurrently on distinct buffers.
  void forward(const double* in, Complex* out) const;
  void inverse(const Complex* in, double* out) const;

 private:
  SpectralGrid(int n, double length);
  friend GridPtr make_grid(int n, double length);

  int n_ = 0;
  double length_ = 0.0;
  double k_scale_ = 0.0;  // 2*pi/length
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

// Scalar field holding real samples and/or spectral coefficients, with lazy
// conversion.  Whichever representation was written last is authoritative.
// The lazy sync mutates cache members, so a single field must not be shared
// between threads; the grid itself may be.
class ScalarField {
 public:
  explicit ScalarField(GridPtr grid);  // zero field
  static ScalarField from_real(GridPtr grid, std::span<const double> values);
  static ScalarField from_spec(GridPtr grid, std::span<const Complex> coefs);

  const GridPtr& grid() const { return grid_; }

  std::span<const double> real() const;
  std::span<const Complex> spec() const;
  std::span<double> real_mut();  // invalidates the spectral view
  std::span<Complex> spec_mut();

  bool has_real() const { return real_ok_; }
  bool has_spec() const { return spec_ok_; }

  double mean() const;

  friend ScalarField scaled(const ScalarField& f, double factor);

 private:
  GridPtr grid_;
  mutable RealBuffer real_;
  mutable ComplexBuffer spec_;
  mutable bool real_ok_ = false;
  mutable bool spec_ok_ = false;
};

struct VectorField {
  ScalarField x;
  ScalarField y;

  explicit VectorField(GridPtr grid) : x(grid), y(grid) {}
  VectorField(ScalarField vx, ScalarField vy)
      : x(std::move(vx)), y(std::move(vy)) {}
  const GridPtr& grid() const { return x.grid(); }
};

void require_same_grid(const ScalarField& a, const ScalarField& b);

// Spectral derivatives.  First derivatives zero the Nyquist mode on their
// axis (it carries no sign information); even operators keep it.
ScalarField gradient_x(const ScalarField& f);
ScalarField gradient_y(const ScalarField& f);
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& v);
ScalarField laplacian(const ScalarField& f);
ScalarField biharmonic(const ScalarField& f);

ScalarField dealias(const ScalarField& f);

// (L/n)^2 * sum of samples == L^2 * fhat_0.
double integrate(const ScalarField& f);
// Parseval form of integrate(f*g); exact for grid functions.
double inner(const ScalarField& f, const ScalarField& g);
double l2_norm(const ScalarField& f);
// integral of |grad f|^2, evaluated spectrally.
double grad_squared_integral(const ScalarField& f);

ScalarField scaled(const ScalarField& f, double factor);
VectorField scaled(const VectorField& v, double factor);

}  // namespace chb
