#include "chb/spectral.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace chb {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

SpectralGrid::SpectralGrid(int n, double length)
    : n_(n), length_(length), k_scale_(kTwoPi / length) {
  // Plans are created once on throwaway buffers and executed later through
  // the new-array interface; FFTW_ESTIMATE keeps planning deterministic
  // run to run (measured plans depend on timing).
  RealBuffer r(real_size());
  ComplexBuffer c(spec_size());
  fwd_ = fftw_plan_dft_r2c_2d(n_, n_, r.data(), as_fftw(c.data()),
                              FFTW_ESTIMATE);
  inv_ = fftw_plan_dft_c2r_2d(n_, n_, as_fftw(c.data()), r.data(),
                              FFTW_ESTIMATE);
  if (!fwd_ || !inv_) throw std::runtime_error("fftw plan creation failed");
}

SpectralGrid::~SpectralGrid() {
  if (fwd_) fftw_destroy_plan(fwd_);
  if (inv_) fftw_destroy_plan(inv_);
}

GridPtr make_grid(int n, double length) {
  if (!is_pow2(n) || n < 4)
    throw std::invalid_argument("grid size must be a power of two, n >= 4");
  if (!(length > 0.0))
    throw std::invalid_argument("domain length must be positive");
  return GridPtr(new SpectralGrid(n, length));
}

void SpectralGrid::forward(const double* in, Complex* out) const {
  // r2c leaves its input intact, but a scratch copy keeps the API const.
  RealBuffer scratch(in, in + real_size());
  fftw_execute_dft_r2c(fwd_, scratch.data(), as_fftw(out));
  const double scale = 1.0 / (static_cast<double>(n_) * n_);
  for (std::size_t i = 0; i < spec_size(); ++i) out[i] *= scale;
}

void SpectralGrid::inverse(const Complex* in, double* out) const {
  // Multi-dimensional c2r destroys its input, so transform a copy.
  ComplexBuffer scratch(in, in + spec_size());
  fftw_execute_dft_c2r(inv_, as_fftw(scratch.data()), out);
}

ScalarField::ScalarField(GridPtr grid)
    : grid_(std::move(grid)),
      real_(grid_->real_size(), 0.0),
      spec_(grid_->spec_size(), Complex{0.0, 0.0}),
      real_ok_(true),
      spec_ok_(true) {
  if (!grid_) throw std::invalid_argument("null grid");
}

ScalarField ScalarField::from_real(GridPtr grid,
                                   std::span<const double> values) {
  ScalarField f(std::move(grid));
  if (values.size() != f.grid_->real_size())
    throw std::invalid_argument("real sample count does not match grid");
  std::memcpy(f.real_.data(), values.data(), values.size() * sizeof(double));
  f.real_ok_ = true;
  f.spec_ok_ = false;
  return f;
}

ScalarField ScalarField::from_spec(GridPtr grid,
                                   std::span<const Complex> coefs) {
  ScalarField f(std::move(grid));
  if (coefs.size() != f.grid_->spec_size())
    throw std::invalid_argument("coefficient count does not match grid");
  std::memcpy(f.spec_.data(), coefs.data(), coefs.size() * sizeof(Complex));
  f.spec_ok_ = true;
  f.real_ok_ = false;
  return f;
}

std::span<const double> ScalarField::real() const {
  if (!real_ok_) {
    grid_->inverse(spec_.data(), real_.data());
    real_ok_ = true;
  }
  return {real_.data(), real_.size()};
}

std::span<const Complex> ScalarField::spec() const {
  if (!spec_ok_) {
    grid_->forward(real_.data(), spec_.data());
    spec_ok_ = true;
  }
  return {spec_.data(), spec_.size()};
}

std::span<double> ScalarField::real_mut() {
  real();
  spec_ok_ = false;
  return {real_.data(), real_.size()};
}

std::span<Complex> ScalarField::spec_mut() {
  spec();
  real_ok_ = false;
  return {spec_.data(), spec_.size()};
}

double ScalarField::mean() const {
  if (spec_ok_) return spec_[0].real();
  double sum = 0.0;
  for (double v : real_) sum += v;
  return sum / static_cast<double>(real_.size());
}

void require_same_grid(const ScalarField& a, const ScalarField& b) {
  if (a.grid() != b.grid())
    throw std::invalid_argument("fields live on different grids");
}

namespace {

// Applies coef(iy, jx) *= op(kx, ky) over the spectral layout.
template <class Op>
ScalarField map_spectrum(const ScalarField& f, Op op) {
  const auto& g = *f.grid();
  ScalarField out = ScalarField::from_spec(f.grid(), f.spec());
  auto s = out.spec_mut();
  const int nxs = g.spec_nx();
  for (int iy = 0; iy < g.n(); ++iy) {
    const double ky = g.ky(iy);
    for (int jx = 0; jx < nxs; ++jx)
      s[static_cast<std::size_t>(iy) * nxs + jx] *= op(g.kx(jx), ky);
  }
  return out;
}

}  // namespace

ScalarField gradient_x(const ScalarField& f) {
  const double nyq = f.grid()->kx(f.grid()->n() / 2);
  return map_spectrum(f, [nyq](double kx, double) {
    if (kx == nyq) return Complex{0.0, 0.0};
    return Complex{0.0, kx};
  });
}

ScalarField gradient_y(const ScalarField& f) {
  const int half = f.grid()->n() / 2;
  const double nyq = f.grid()->ky(half);
  return map_spectrum(f, [nyq](double, double ky) {
    if (ky == nyq) return Complex{0.0, 0.0};
    return Complex{0.0, ky};
  });
}

VectorField gradient(const ScalarField& f) {
  return {gradient_x(f), gradient_y(f)};
}

ScalarField divergence(const VectorField& v) {
  require_same_grid(v.x, v.y);
  ScalarField dx = gradient_x(v.x);
  ScalarField dy = gradient_y(v.y);
  auto s = dx.spec_mut();
  auto t = dy.spec();
  for (std::size_t i = 0; i < s.size(); ++i) s[i] += t[i];
  return dx;
}

ScalarField laplacian(const ScalarField& f) {
  return map_spectrum(
      f, [](double kx, double ky) { return Complex{-(kx * kx + ky * ky), 0.0}; });
}

ScalarField biharmonic(const ScalarField& f) {
  return map_spectrum(f, [](double kx, double ky) {
    const double k2 = kx * kx + ky * ky;
    return Complex{k2 * k2, 0.0};
  });
}

ScalarField dealias(const ScalarField& f) {
  const auto& g = *f.grid();
  ScalarField out = ScalarField::from_spec(f.grid(), f.spec());
  auto s = out.spec_mut();
  const int nxs = g.spec_nx();
  for (int iy = 0; iy < g.n(); ++iy) {
    const bool ok_y = g.mode_in_mask(g.mode_of(iy));
    for (int jx = 0; jx < nxs; ++jx)
      if (!ok_y || !g.mode_in_mask(jx))
        s[static_cast<std::size_t>(iy) * nxs + jx] = Complex{0.0, 0.0};
  }
  return out;
}

double integrate(const ScalarField& f) {
  if (f.has_spec() && !f.has_real())
    return f.spec()[0].real() * f.grid()->length() * f.grid()->length();
  double sum = 0.0;
  for (double v : f.real()) sum += v;
  return sum * f.grid()->cell_area();
}

double inner(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f, g);
  const auto& gr = *f.grid();
  auto a = f.spec();
  auto b = g.spec();
  const int nxs = gr.spec_nx();
  const int n = gr.n();
  double sum = 0.0;
  for (int iy = 0; iy < n; ++iy) {
    for (int jx = 0; jx < nxs; ++jx) {
      const std::size_t i = static_cast<std::size_t>(iy) * nxs + jx;
      // jx = 0 and the Nyquist column appear once in the full spectrum,
      // every other column stands for a conjugate pair.
      const double mult = (jx == 0 || 2 * jx == n) ? 1.0 : 2.0;
      sum += mult * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
    }
  }
  return sum * gr.length() * gr.length();
}

double l2_norm(const ScalarField& f) { return std::sqrt(inner(f, f)); }

double grad_squared_integral(const ScalarField& f) {
  const auto& gr = *f.grid();
  auto a = f.spec();
  const int nxs = gr.spec_nx();
  const int n = gr.n();
  double sum = 0.0;
  for (int iy = 0; iy < n; ++iy) {
    const double ky = gr.ky(iy);
    for (int jx = 0; jx < nxs; ++jx) {
      const std::size_t i = static_cast<std::size_t>(iy) * nxs + jx;
      const double mult = (jx == 0 || 2 * jx == n) ? 1.0 : 2.0;
      const double kx = gr.kx(jx);
      sum += mult * (kx * kx + ky * ky) * std::norm(a[i]);
    }
  }
  return sum * gr.length() * gr.length();
}

ScalarField scaled(const ScalarField& f, double factor) {
  // Scales whichever representations are materialized, keeping both valid
  // so downstream users pay no extra transform.
  ScalarField out(f.grid());
  out.real_ok_ = f.real_ok_;
  out.spec_ok_ = f.spec_ok_;
  if (f.real_ok_)
    for (std::size_t i = 0; i < f.real_.size(); ++i)
      out.real_[i] = factor * f.real_[i];
  if (f.spec_ok_)
    for (std::size_t i = 0; i < f.spec_.size(); ++i)
      out.spec_[i] = factor * f.spec_[i];
  return out;
}

VectorField scaled(const VectorField& v, double factor) {
  return {scaled(v.x, factor), scaled(v.y, factor)};
}

}  // namespace chb
