#include "hnls/hartree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>

#include "hnls/errors.hpp"

namespace hnls {

namespace {

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                            double fa, double fm, double fb, double whole, double tol,
                            int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int depth = 40) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

// int_{-1}^{1} style Gauss-Legendre 8-point panel
constexpr double kGL8x[4] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                             0.9602898564975363};
constexpr double kGL8w[4] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                             0.1012285362903763};

double gl8_panel(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
    double acc = 0.0;
    for (int i = 0; i < 4; ++i)
        acc += kGL8w[i] * (f(c + hw * kGL8x[i]) + f(c - hw * kGL8x[i]));
    return acc * hw;
}

// Composite Gauss-Legendre, panel count doubled until the relative increment
// drops below tol.
double adaptive_gauss(const std::function<double(double)>& f, double a, double b, double tol) {
    double prev = gl8_panel(f, a, b);
    for (int panels = 2; panels <= (1 << 14); panels *= 2) {
        double acc = 0.0;
        const double step = (b - a) / panels;
        for (int k = 0; k < panels; ++k) acc += gl8_panel(f, a + k * step, a + (k + 1) * step);
        if (std::abs(acc - prev) <= tol * std::abs(acc)) return acc;
        prev = acc;
    }
    return prev;
}

// Antiderivative of |v|^{-2s}: sign(v) |v|^{1-2s} / (1-2s).
double power_antiderivative(double v, double two_sigma) {
    const double e = 1.0 - two_sigma;
    return (v >= 0.0 ? 1.0 : -1.0) * std::pow(std::abs(v), e) / e;
}

// Exact average of |u|^{-2s} over [u0-h/2, u0+h/2] (valid for 2s < 1).
double cell_averaged_kernel_1d(double u0, double h, double two_sigma) {
    return (power_antiderivative(u0 + 0.5 * h, two_sigma) -
            power_antiderivative(u0 - 0.5 * h, two_sigma)) / h;
}

// Angular factor A_N(r,s) = int_{S^{N-1}} |r e1 - s w|^{-2s} dw.
double angular_kernel(int N, double sigma, double r, double s) {
    const double two_sigma = 2.0 * sigma;
    if (r == 0.0 || s == 0.0) {
        const double d = std::max(r, s);
        return RadialGrid::sphere_area(N) * std::pow(d, -two_sigma);
    }
    switch (N) {
        case 1:
            return std::pow(std::abs(r - s), -two_sigma) + std::pow(r + s, -two_sigma);
        case 2: {
            auto f = [&](double phi) {
                return std::pow(r * r + s * s - 2.0 * r * s * std::cos(phi), -sigma);
            };
            return 2.0 * adaptive_gauss(f, 0.0, M_PI, 1e-10);
        }
        case 3: {
            const double alpha = 2.0 - two_sigma;
            if (std::abs(1.0 - sigma) < 1e-8)
                return 2.0 * M_PI * std::log((r + s) / std::abs(r - s)) / (r * s);
            return 2.0 * M_PI *
                   (std::pow(r + s, alpha) - std::pow(std::abs(r - s), alpha)) /
                   (2.0 * r * s * (1.0 - sigma));
        }
        default:
            throw DomainError("angular_kernel: dimension must be 1, 2 or 3");
    }
}

// Average of f over [lo, hi] where f has an integrable power singularity at
// c in [lo, hi]: graded substitution u = w * tau^6 on each side of c.
double graded_cell_average(const std::function<double(double)>& f, double lo, double hi,
                           double c) {
    double total = 0.0;
    const double sides[2] = {lo - c, hi - c};  // signed widths
    for (double w : sides) {
        if (w == 0.0) continue;
        auto g = [&](double tau) {
            const double t5 = tau * tau * tau * tau * tau;
            const double u = w * t5 * tau;
            if (u == 0.0) return 0.0;  // integrand vanishes at the graded endpoint
            return f(c + u) * 6.0 * std::abs(w) * t5;
        };
        total += adaptive_simpson(g, 0.0, 1.0, 1e-11);
    }
    return total / (hi - lo);
}

std::size_t wrap_index(long d, std::size_t m) {
    long r = d % static_cast<long>(m);
    if (r < 0) r += static_cast<long>(m);
    return static_cast<std::size_t>(r);
}

void check_nonnegative_consistency(const std::vector<Complex>& density,
                                   const std::vector<Complex>& potential, const char* where) {
    double dmin = 0.0, dmax = 0.0, pmin = 0.0, pmax = 0.0;
    for (const auto& z : density) {
        dmin = std::min(dmin, z.real());
        dmax = std::max(dmax, z.real());
    }
    if (dmin < -1e-14 * std::max(dmax, 1e-300)) return;  // signed density: nothing to check
    for (const auto& z : potential) {
        pmin = std::min(pmin, z.real());
        pmax = std::max(pmax, z.real());
    }
    if (pmin < -1e-10 * std::max(pmax, 1e-300))
        throw SolverError(std::string(where) +
                          ": negative potential from nonnegative density (internal consistency)");
}

}  // namespace

RieszKernel make_riesz_kernel(double sigma, int dimension) {
    if (dimension < 1 || dimension > 3)
        throw DomainError("make_riesz_kernel: dimension must be 1, 2 or 3");
    RieszKernel k;
    k.sigma = sigma;
    k.dimension = dimension;
    const double half_n = 0.5 * dimension;
    k.valid_h1 = (sigma > 0.0) && (sigma < std::min(half_n, 2.0));
    k.valid_h2 = (sigma > 0.0) && (sigma < std::min(half_n, 1.0));
    if (!k.valid_h1) {
        std::ostringstream msg;
        msg << "make_riesz_kernel: sigma = " << sigma << " violates 0 < sigma < min{N/2, 2} = "
            << std::min(half_n, 2.0) << " for N = " << dimension;
        throw DomainError(msg.str());
    }
    return k;
}

RadialField conv_radial(const RadialField& density, const RieszKernel& kernel) {
    const auto& g = *density.grid;
    if (g.dimension != kernel.dimension)
        throw UsageError("conv_radial: kernel and density dimensions differ");
    const int n = density.nodes();
    const int c = g.cells;
    const double h = g.spacing;
    const double two_sigma = 2.0 * kernel.sigma;
    RadialField out(density.grid);

    if (g.dimension == 1) {
        // Even-extend to the line and run one zero-padded linear convolution.
        const std::size_t M = 8u * static_cast<std::size_t>(c);
        fft::cvec D(M, {0.0, 0.0}), K(M, {0.0, 0.0});
        for (int j = -c; j <= c; ++j) D[static_cast<std::size_t>(j + c)] = density.v[std::abs(j)];
        for (int d = -2 * c; d <= 2 * c; ++d) {
            const double val = h * cell_averaged_kernel_1d(d * h, h, two_sigma);
            K[wrap_index(d, M)] = val;
        }
        fft::transform(D, -1);
        fft::transform(K, -1);
        for (std::size_t i = 0; i < M; ++i) D[i] *= K[i];
        fft::transform(D, +1);
        for (int i = 0; i < n; ++i) out.v[i] = D[static_cast<std::size_t>(i + c)].real();
    } else {
        if (c > 8192)
            throw UsageError("conv_radial: N >= 2 path is dense; use at most 8192 cells");
        const double area = RadialGrid::sphere_area(g.dimension);
        for (int i = 0; i < n; ++i) {
            const double r = g.r[i];
            double acc = 0.0;
            for (int j = 0; j < n; ++j) {
                if (g.w[j] == 0.0) continue;
                double a;
                if (j == i && i > 0) {
                    const double lo = std::max(0.0, g.r[j] - 0.5 * h);
                    const double hi = std::min(g.extent, g.r[j] + 0.5 * h);
                    auto f = [&](double s) { return angular_kernel(g.dimension, kernel.sigma, r, s); };
                    a = graded_cell_average(f, lo, hi, r);
                } else {
                    a = angular_kernel(g.dimension, kernel.sigma, r, g.r[j]);
                }
                acc += a / area * g.w[j] * density.v[j].real();
            }
            out.v[i] = acc;
        }
    }
    check_nonnegative_consistency(density.v, out.v, "conv_radial");
    return out;
}

CartesianConvolver::CartesianConvolver(int dimension, double extent, int cells,
                                       const RieszKernel& kernel)
    : dimension_(dimension), cells_(cells), extent_(extent) {
    if (dimension != kernel.dimension)
        throw UsageError("CartesianConvolver: kernel dimension mismatch");
    const double h = extent / cells;
    const double two_sigma = 2.0 * kernel.sigma;
    const std::size_t M = 2u * static_cast<std::size_t>(cells);
    if (dimension == 1) {
        kernel_hat_.assign(M, {0.0, 0.0});
        for (int d = -(cells - 1); d <= cells - 1; ++d)
            kernel_hat_[wrap_index(d, M)] =
                h * cell_averaged_kernel_1d(d * h, h, two_sigma);
        fft::transform(kernel_hat_, -1);
    } else {
        // origin cell: exact average of |x|^{-2s} over the square cell
        auto f = [&](double phi) {
            return std::pow(0.5 * h / std::cos(phi), 2.0 - two_sigma) / (2.0 - two_sigma);
        };
        const double origin_avg = 8.0 / (h * h) * adaptive_simpson(f, 0.0, 0.25 * M_PI, 1e-12);
        kernel_hat_.assign(M * M, {0.0, 0.0});
        for (int dx = -(cells - 1); dx <= cells - 1; ++dx)
            for (int dy = -(cells - 1); dy <= cells - 1; ++dy) {
                const double rr = std::hypot(dx * h, dy * h);
                const double val = (dx == 0 && dy == 0) ? origin_avg : std::pow(rr, -two_sigma);
                const std::size_t ix = wrap_index(dx, M);
                const std::size_t iy = wrap_index(dy, M);
                kernel_hat_[ix * M + iy] = h * h * val;
            }
        fft::transform_2d(kernel_hat_, M, M, -1);
    }
}

void CartesianConvolver::apply(const std::vector<double>& density,
                               std::vector<double>& potential) const {
    const std::size_t M = 2u * static_cast<std::size_t>(cells_);
    if (dimension_ == 1) {
        fft::cvec D(M, {0.0, 0.0});
        for (int i = 0; i < cells_; ++i) D[i] = density[i];
        fft::transform(D, -1);
        for (std::size_t i = 0; i < M; ++i) D[i] *= kernel_hat_[i];
        fft::transform(D, +1);
        potential.resize(cells_);
        for (int i = 0; i < cells_; ++i) potential[i] = D[i].real();
    } else {
        fft::cvec D(M * M, {0.0, 0.0});
        for (int i = 0; i < cells_; ++i)
            for (int j = 0; j < cells_; ++j)
                D[static_cast<std::size_t>(i) * M + j] =
                    density[static_cast<std::size_t>(i) * cells_ + j];
        fft::transform_2d(D, M, M, -1);
        for (std::size_t i = 0; i < M * M; ++i) D[i] *= kernel_hat_[i];
        fft::transform_2d(D, M, M, +1);
        potential.resize(static_cast<std::size_t>(cells_) * cells_);
        for (int i = 0; i < cells_; ++i)
            for (int j = 0; j < cells_; ++j)
                potential[static_cast<std::size_t>(i) * cells_ + j] =
                    D[static_cast<std::size_t>(i) * M + j].real();
    }
}

CartesianConvResult conv_cartesian(const CartesianField& u, const RieszKernel& kernel) {
    if (u.dimension == 2 && u.cells > 2048)
        throw UsageError("conv_cartesian: 2-D path limited to 2048 cells per axis");
    CartesianConvolver conv(u.dimension, u.extent, u.cells, kernel);
    std::vector<double> density(u.v.size());
    for (std::size_t i = 0; i < u.v.size(); ++i) density[i] = std::norm(u.v[i]);
    std::vector<double> pot;
    conv.apply(density, pot);

    CartesianConvResult res;
    res.potential = make_cartesian_field(u.dimension, u.extent, u.cells);
    res.potential.time = u.time;
    for (std::size_t i = 0; i < pot.size(); ++i) res.potential.v[i] = pot[i];
    res.boundary_mass_fraction = boundary_mass_fraction(u);
    res.padding_warning = res.boundary_mass_fraction > 1e-6;
    double pmin = 0.0, pmax = 0.0;
    for (double p : pot) {
        pmin = std::min(pmin, p);
        pmax = std::max(pmax, p);
    }
    if (pmin < -1e-10 * std::max(pmax, 1e-300))
        throw SolverError("conv_cartesian: negative potential from |u|^2 (internal consistency)");
    return res;
}

double G_radial(const RadialField& v, const RieszKernel& kernel) {
    RadialField density(v.grid);
    for (int i = 0; i < v.nodes(); ++i) density.v[i] = std::norm(v.v[i]);
    RadialField pot = conv_radial(density, kernel);
    double acc = 0.0;
    for (int i = 0; i < v.nodes(); ++i)
        acc += v.grid->w[i] * pot.v[i].real() * density.v[i].real();
    return 0.25 * acc;
}

RadialField g_apply_radial(const RadialField& v, const RieszKernel& kernel) {
    RadialField density(v.grid);
    for (int i = 0; i < v.nodes(); ++i) density.v[i] = std::norm(v.v[i]);
    RadialField pot = conv_radial(density, kernel);
    RadialField out(v.grid);
    for (int i = 0; i < v.nodes(); ++i) out.v[i] = pot.v[i].real() * v.v[i];
    return out;
}

double G_cartesian(const CartesianField& v, const RieszKernel& kernel) {
    CartesianConvResult res = conv_cartesian(v, kernel);
    double acc = 0.0;
    for (std::size_t i = 0; i < v.v.size(); ++i)
        acc += res.potential.v[i].real() * std::norm(v.v[i]);
    return 0.25 * acc * v.cell_volume();
}

CartesianField g_apply_cartesian(const CartesianField& v, const RieszKernel& kernel) {
    CartesianConvResult res = conv_cartesian(v, kernel);
    CartesianField out = make_cartesian_field(v.dimension, v.extent, v.cells);
    out.time = v.time;
    for (std::size_t i = 0; i < v.v.size(); ++i) out.v[i] = res.potential.v[i].real() * v.v[i];
    return out;
}

}  // namespace hnls
