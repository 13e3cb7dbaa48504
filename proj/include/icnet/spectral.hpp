#pragma once

#include <complex>
#include <utility>
#include <vector>

namespace icnet {

/// Fourier pseudo-spectral derivatives on a periodic 2D grid.
/// Wraps FFTW r2c/c2r plans for one (nx, ny, Lx, Ly) geometry.
class Spectral2D {
 public:
  Spectral2D(int nx, int ny, double lx, double ly);
  ~Spectral2D();
  Spectral2D(const Spectral2D&) = delete;
  Spectral2D& operator=(const Spectral2D&) = delete;

  int nx() const { return nx_; }
  int ny() const { return ny_; }

  /// d^(ox+oy) f / dx^ox dy^oy, any non-negative orders.
  void derivative(const double* f, int ox, int oy, double* out);

  /// Several derivatives of the same field with a single forward transform.
  void derivatives(const double* f, const std::vector<std::pair<int, int>>& orders,
                   const std::vector<double*>& outs);

  /// Zero all modes with |kx| > nx/3 or |ky| > ny/3 (2/3 rule).
  void dealias(const double* f, double* out);

  void laplacian(const double* f, double* out) {
    derivative(f, 2, 0, out);
    std::vector<double> tmp(static_cast<std::size_t>(nx_) * ny_);
    derivative(f, 0, 2, tmp.data());
    for (std::size_t i = 0; i < tmp.size(); ++i) out[i] += tmp[i];
  }

 private:
  void forward(const double* f);
  void inverse(double* out);
  void apply_derivative(int ox, int oy, double* out);

  int nx_, ny_;
  double lx_, ly_;
  std::vector<double> kx_, ky_;
  double* real_buf_;
  std::complex<double>* spec_buf_;
  std::complex<double>* work_;
  void* plan_fwd_;
  void* plan_inv_;
};

}  // namespace icnet
