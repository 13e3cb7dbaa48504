#include "icnet/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace icnet {

Spectral2D::Spectral2D(int nx, int ny, double lx, double ly)
    : nx_(nx), ny_(ny), lx_(lx), ly_(ly) {
  if (nx < 8 || ny < 8) throw std::invalid_argument("Spectral2D: grid must be at least 8x8");
  const double two_pi = 6.283185307179586477;
  kx_.resize(nx);
  for (int i = 0; i < nx; ++i) kx_[i] = two_pi / lx_ * (i <= nx / 2 ? i : i - nx);
  ky_.resize(ny / 2 + 1);
  for (int j = 0; j <= ny / 2; ++j) ky_[j] = two_pi / ly_ * j;

  const std::size_t nreal = static_cast<std::size_t>(nx) * ny;
  const std::size_t nspec = static_cast<std::size_t>(nx) * (ny / 2 + 1);
  real_buf_ = fftw_alloc_real(nreal);
  spec_buf_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(nspec));
  work_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(nspec));
  plan_fwd_ = fftw_plan_dft_r2c_2d(nx, ny, real_buf_,
                                   reinterpret_cast<fftw_complex*>(spec_buf_), FFTW_ESTIMATE);
  plan_inv_ = fftw_plan_dft_c2r_2d(nx, ny, reinterpret_cast<fftw_complex*>(work_), real_buf_,
                                   FFTW_ESTIMATE);
}

Spectral2D::~Spectral2D() {
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
  fftw_free(real_buf_);
  fftw_free(spec_buf_);
  fftw_free(work_);
}

void Spectral2D::forward(const double* f) {
  std::memcpy(real_buf_, f, sizeof(double) * nx_ * ny_);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
}

void Spectral2D::inverse(double* out) {
  fftw_execute(static_cast<fftw_plan>(plan_inv_));
  const double scale = 1.0 / (static_cast<double>(nx_) * ny_);
  for (int i = 0; i < nx_ * ny_; ++i) out[i] = real_buf_[i] * scale;
}

void Spectral2D::derivative(const double* f, int ox, int oy, double* out) {
  derivatives(f, {{ox, oy}}, {out});
}

void Spectral2D::derivatives(const double* f, const std::vector<std::pair<int, int>>& orders,
                             const std::vector<double*>& outs) {
  forward(f);
  for (std::size_t n = 0; n < orders.size(); ++n) apply_derivative(orders[n].first, orders[n].second, outs[n]);
}

void Spectral2D::apply_derivative(int ox, int oy, double* out) {
  const int nyh = ny_ / 2 + 1;
  const std::complex<double> iu(0.0, 1.0);
  const auto ipow = [&](double k, int order) {
    std::complex<double> m(1.0, 0.0);
    for (int r = 0; r < order; ++r) m *= iu * k;
    return m;
  };
  for (int ix = 0; ix < nx_; ++ix) {
    // the unpaired Nyquist mode carries no sign information for odd orders
    const bool kill_x = (ox % 2 == 1) && (nx_ % 2 == 0) && (ix == nx_ / 2);
    const std::complex<double> mx = kill_x ? 0.0 : ipow(kx_[ix], ox);
    for (int jy = 0; jy < nyh; ++jy) {
      const bool kill_y = (oy % 2 == 1) && (ny_ % 2 == 0) && (jy == ny_ / 2);
      const std::complex<double> my = kill_y ? 0.0 : ipow(ky_[jy], oy);
      work_[static_cast<std::size_t>(ix) * nyh + jy] =
          spec_buf_[static_cast<std::size_t>(ix) * nyh + jy] * mx * my;
    }
  }
  inverse(out);
}

void Spectral2D::dealias(const double* f, double* out) {
  forward(f);
  const int nyh = ny_ / 2 + 1;
  const int cutx = nx_ / 3;
  const int cuty = ny_ / 3;
  for (int ix = 0; ix < nx_; ++ix) {
    const int kx_int = ix <= nx_ / 2 ? ix : ix - nx_;
    for (int jy = 0; jy < nyh; ++jy) {
      const bool keep = std::abs(kx_int) <= cutx && jy <= cuty;
      work_[static_cast<std::size_t>(ix) * nyh + jy] =
          keep ? spec_buf_[static_cast<std::size_t>(ix) * nyh + jy] : 0.0;
    }
  }
  inverse(out);
}

}  // namespace icnet
