#pragma once

// Thin RAII layer over FFTW plus the two transform-based utilities the rest of
// the code leans on: spectral derivatives of even radial fields and
// band-limited evaluation of periodic samples at off-grid points
// (zero-padding upsample + local Lagrange interpolation).

#include <complex>
#include <cstddef>
#include <vector>

namespace hnls::fft {

using cvec = std::vector<std::complex<double>>;

// In-place forward/backward c2c transform. sign = -1 forward, +1 backward.
// Backward includes the 1/n normalization. Plans are cached per size.
void transform(cvec& data, int sign);

// 2D in-place transform of a row-major n0 x n1 array.
void transform_2d(cvec& data, std::size_t n0, std::size_t n1, int sign);

// Derivative of a smooth periodic sample set (period = n*spacing).
cvec periodic_derivative(const cvec& data, double spacing);

// Given samples of a periodic function, return samples on a grid refined by
// `factor` (trigonometric interpolation via spectrum zero-padding).
cvec upsample_periodic(const cvec& data, int factor);

// Evaluates a periodic function anywhere from its equispaced samples:
// spectral upsample once, then 8-point Lagrange interpolation on the fine
// grid. Accurate to near round-off for band-limited data.
class PeriodicInterpolant {
public:
    PeriodicInterpolant(const cvec& samples, double period, int upsample_factor = 8);
    std::complex<double> operator()(double x) const;
    double period() const { return period_; }

private:
    cvec fine_;
    double period_ = 0.0;
    double fine_spacing_ = 0.0;
};

// Tensor-product analogue on an n x n periodic box (row-major samples).
class PeriodicInterpolant2D {
public:
    PeriodicInterpolant2D(const cvec& samples, std::size_t n, double period,
                          int upsample_factor = 4);
    std::complex<double> operator()(double x, double y) const;

private:
    cvec fine_;
    std::size_t m_ = 0;
    double period_ = 0.0;
    double fine_spacing_ = 0.0;
};

}  // namespace hnls::fft
