#pragma once

// Radial grids, quadrature, differential operators and norms. All fields are
// stored on uniform nodes r_i = i*h on [0, R] and treated as even in r
// (regular radial functions). The quadrature weights carry the full
// N-dimensional measure omega_N r^{N-1}, so sums against them approximate
// integrals over R^N.

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "hnls/fft_utils.hpp"

namespace hnls {

using Complex = std::complex<double>;

struct RadialGrid {
    int dimension = 1;          // N in {1,2,3}
    double extent = 30.0;       // R
    int cells = 4096;           // nodes = cells + 1
    double spacing = 0.0;       // h = R / cells
    std::vector<double> r;      // nodes, r[0] = 0
    std::vector<double> w;      // quadrature weights, trapezoid x omega_N r^{N-1}

    int nodes() const { return cells + 1; }
    static double sphere_area(int dimension);  // omega_N: 2, 2*pi, 4*pi
};

std::shared_ptr<const RadialGrid> make_radial_grid(int dimension, double extent, int cells);

struct RadialField {
    std::shared_ptr<const RadialGrid> grid;
    std::vector<Complex> v;
    bool even = true;  // even radial extension across r = 0

    RadialField() = default;
    explicit RadialField(std::shared_ptr<const RadialGrid> g)
        : grid(std::move(g)), v(grid->nodes(), Complex(0.0, 0.0)) {}

    int nodes() const { return static_cast<int>(v.size()); }
    bool all_finite() const;
};

void assert_same_grid(const RadialField& f, const RadialField& g, const char* where);

// (u,v)_2 = Re sum w_i u_i conj(v_i); symmetric, real-bilinear.
double inner(const RadialField& f, const RadialField& g);

struct FieldNorms {
    double l2_sq = 0.0;        // ||f||_2^2
    double grad_sq = 0.0;      // ||grad f||_2^2 (centered differences)
    double weighted_sq = 0.0;  // |||y| f||_2^2
    double h1_sq() const { return l2_sq + grad_sq; }
    double sigma1_sq() const { return l2_sq + grad_sq + weighted_sq; }
};
FieldNorms norms(const RadialField& f);

// Lambda f = (N/2) f + r f', the L^2-scaling generator. Centered differences,
// even reflection at r = 0, one-sided at r = R.
RadialField apply_lambda(const RadialField& f);

// Second-order finite differences.
RadialField derivative_fd(const RadialField& f);
RadialField laplacian_fd(const RadialField& f);  // f'' + (N-1)/r f'

// Transform-based versions (even extension, spectrally accurate for smooth
// fields that decay at R). Used where h^2 error would mask the quantity
// being measured.
RadialField derivative_spectral(const RadialField& f);
RadialField laplacian_spectral(const RadialField& f);

// Even periodic extension of the node values, length 2*cells, period 2R.
fft::cvec even_extension(const RadialField& f);

// Evaluate a radial field at arbitrary radii (0 beyond R).
class RadialEvaluator {
public:
    explicit RadialEvaluator(const RadialField& f, int upsample_factor = 8);
    Complex operator()(double radius) const;

private:
    fft::PeriodicInterpolant interp_;
    double extent_;
};

RadialField resample(const RadialField& f, std::shared_ptr<const RadialGrid> target);

// Radius where |f| first drops to half of |f(0)| (linear interpolation).
double half_max_radius(const RadialField& f);

// Least-squares slope of log|f| vs r over the tail; returns the fitted
// exponential decay rate (positive for decaying fields).
double exp_decay_rate(const RadialField& f);

// Two-column (or three-column for complex) CSV with header.
void write_csv(const RadialField& f, const std::string& path);
RadialField read_csv(const std::string& path, int dimension);

}  // namespace hnls
