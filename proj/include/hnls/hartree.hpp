#pragma once

// Riesz-potential convolution |x|^{-2 sigma} * density and the nonlocal
// functionals built on it:
//   G(v) = 1/4 int (|x|^{-2s} * |v|^2) |v|^2,   g(v) = (|x|^{-2s} * |v|^2) v.
// Radial path: reduction to a 1-D integral (exact angular kernel for N = 1, 3;
// adaptive angular quadrature for N = 2). Cartesian path: zero-padded linear
// convolution against the tabulated real-space kernel. Kernel cells containing
// the singularity carry the exact cell average of |x|^{-2 sigma}.

#include <vector>

#include "hnls/cartesian.hpp"
#include "hnls/radial.hpp"

namespace hnls {

struct RieszKernel {
    double sigma = 0.3;
    int dimension = 1;
    bool valid_h1 = false;  // 0 < sigma < min{N/2, 2}
    bool valid_h2 = false;  // 0 < sigma < min{N/2, 1}
};

// Throws DomainError unless the H1 condition holds.
RieszKernel make_riesz_kernel(double sigma, int dimension);

// Potential of a real radial density: h(r) = int |x-y|^{-2s} density(|y|) dy.
RadialField conv_radial(const RadialField& density, const RieszKernel& kernel);

struct CartesianConvResult {
    CartesianField potential;
    bool padding_warning = false;
    double boundary_mass_fraction = 0.0;
};

// Potential of |u|^2 on the box.
CartesianConvResult conv_cartesian(const CartesianField& u, const RieszKernel& kernel);

// Stateful version for time stepping: the padded kernel transform is built
// once. apply() maps a real density (box layout) to its potential.
class CartesianConvolver {
public:
    CartesianConvolver(int dimension, double extent, int cells, const RieszKernel& kernel);
    void apply(const std::vector<double>& density, std::vector<double>& potential) const;
    int cells() const { return cells_; }

private:
    int dimension_, cells_;
    double extent_;
    fft::cvec kernel_hat_;  // padded, transformed, includes cell volume factor
};

double G_radial(const RadialField& v, const RieszKernel& kernel);
RadialField g_apply_radial(const RadialField& v, const RieszKernel& kernel);
double G_cartesian(const CartesianField& v, const RieszKernel& kernel);
CartesianField g_apply_cartesian(const CartesianField& v, const RieszKernel& kernel);

}  // namespace hnls
