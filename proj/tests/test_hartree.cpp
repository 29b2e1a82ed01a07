#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hnls/errors.hpp"
#include "hnls/hartree.hpp"
#include "oracles.hpp"

using namespace hnls;

namespace {

RadialField gaussian_density(std::shared_ptr<const RadialGrid> grid, double width = 1.0) {
    RadialField f(grid);
    for (int i = 0; i < f.nodes(); ++i)
        f.v[i] = std::exp(-(grid->r[i] * grid->r[i]) / (width * width));
    return f;
}

}  // namespace

TEST_CASE("index conditions gate the kernel") {
    RieszKernel k1 = make_riesz_kernel(0.3, 1);
    CHECK(k1.valid_h1);
    CHECK(k1.valid_h2);
    CHECK_THROWS_AS(make_riesz_kernel(0.5, 1), DomainError);   // min{1/2, 2} = 1/2
    CHECK_THROWS_AS(make_riesz_kernel(-0.1, 2), DomainError);
    RieszKernel k3 = make_riesz_kernel(1.2, 3);  // inside (1.2), outside (1.3)
    CHECK(k3.valid_h1);
    CHECK_FALSE(k3.valid_h2);
}

TEST_CASE("radial convolution, N = 1: zero, Gaussian oracle, scaling") {
    auto grid = make_radial_grid(1, 30.0, 8192);
    RieszKernel kernel = make_riesz_kernel(0.3, 1);

    RadialField zero(grid);
    RadialField pz = conv_radial(zero, kernel);
    for (int i = 0; i < pz.nodes(); i += 101) CHECK(pz.v[i] == Complex(0.0, 0.0));

    // value at the origin: integral of |y|^{-0.6} e^{-y^2} = Gamma(0.2)
    RadialField g = gaussian_density(grid);
    RadialField pot = conv_radial(g, kernel);
    const double target_gamma = std::tgamma(0.2);
    // adaptive quadrature with the singular head integrated in closed form
    const double delta = 1e-4;
    const double head = 2.0 * (std::pow(delta, 0.4) / 0.4);  // e^{-y^2} = 1 + O(delta^2) there
    const double target_quad =
        head + 2.0 * oracle::integrate(
                         [](double y) { return std::pow(y, -0.6) * std::exp(-y * y); }, delta,
                         40.0, 1e-13);
    CHECK(target_quad == doctest::Approx(target_gamma).epsilon(1e-7));
    CHECK(pot.v[0].real() == doctest::Approx(target_gamma).epsilon(1e-6));

    // homogeneity: conv(density_lam)(x) = lam^{-2s} conv(density)(x/lam)
    const double lam = 0.7;
    RadialField gl(grid);
    for (int i = 0; i < gl.nodes(); ++i) {
        const double y = grid->r[i] / lam;
        gl.v[i] = std::exp(-y * y) / lam;  // lam^{-N} density(y/lam)
    }
    RadialField potl = conv_radial(gl, kernel);
    RadialEvaluator eval(pot);
    for (double r : {0.0, 0.5, 1.3, 2.9, 6.1}) {
        const int idx = static_cast<int>(std::round(r / grid->spacing));
        const double lhs = potl.v[idx].real();
        const double rhs = std::pow(lam, -0.6) * eval(grid->r[idx] / lam).real();
        CHECK(lhs == doctest::Approx(rhs).epsilon(2e-6));
    }
}

TEST_CASE("radial convolution, N = 3 closed angular kernel vs brute force") {
    auto grid = make_radial_grid(3, 16.0, 1024);
    const double sigma = 0.7;
    RieszKernel kernel = make_riesz_kernel(sigma, 3);
    RadialField g = gaussian_density(grid);
    RadialField pot = conv_radial(g, kernel);

    for (double r : {0.4, 1.6, 3.2}) {
        // the t-integral is elementary; the s-integral is adaptive with a
        // split at the |r - s| kink
        auto outer = [&](double s) {
            const double a = (r - s) * (r - s), bb = 2.0 * r * s;
            const double inner_t =
                (std::pow(a + 2.0 * bb, 1.0 - sigma) - std::pow(a, 1.0 - sigma)) /
                (bb * (1.0 - sigma));
            return 2.0 * M_PI * s * s * std::exp(-s * s) * inner_t;
        };
        const double target = oracle::integrate(outer, 1e-9, r, 1e-10) +
                              oracle::integrate(outer, r, 12.0, 1e-10);
        const int idx = static_cast<int>(std::round(r / grid->spacing));
        CHECK(pot.v[idx].real() == doctest::Approx(target).epsilon(5e-4));
    }
}

TEST_CASE("radial convolution, N = 2 angular quadrature vs brute force") {
    auto grid = make_radial_grid(2, 14.0, 512);
    const double sigma = 0.35;
    RieszKernel kernel = make_riesz_kernel(sigma, 2);
    RadialField g = gaussian_density(grid);
    RadialField pot = conv_radial(g, kernel);

    for (double r : {0.8, 2.2}) {
        auto outer = [&](double s) {
            // phi = w^4 grading regularizes the near-diagonal angular endpoint
            auto inner_w = [&](double w) {
                const double phi = w * w * w * w;
                return 4.0 * w * w * w *
                       std::pow(r * r + s * s - 2.0 * r * s * std::cos(phi), -sigma);
            };
            const double wmax = std::pow(M_PI, 0.25);
            return 2.0 * s * std::exp(-s * s) * oracle::integrate(inner_w, 0.0, wmax, 1e-10);
        };
        const double target = oracle::integrate(outer, 1e-9, r, 1e-9) +
                              oracle::integrate(outer, r, 10.0, 1e-9);
        const int idx = static_cast<int>(std::round(r / grid->spacing));
        CHECK(pot.v[idx].real() == doctest::Approx(target).epsilon(2e-3));
    }
}

TEST_CASE("G and g: positivity, scaling, pairing") {
    auto grid = make_radial_grid(1, 30.0, 8192);
    RieszKernel kernel = make_riesz_kernel(0.3, 1);

    RadialField zero(grid);
    CHECK(G_radial(zero, kernel) == 0.0);

    RadialField v(grid);
    for (int i = 0; i < v.nodes(); ++i) {
        const double r = grid->r[i];
        v.v[i] = Complex(std::exp(-r * r / 2.0), 0.4 * std::exp(-r * r));
    }
    const double G0 = G_radial(v, kernel);
    CHECK(G0 > 0.0);

    // (g(v), v)_2 = 4 G(v)
    CHECK(inner(g_apply_radial(v, kernel), v) == doctest::Approx(4.0 * G0).epsilon(1e-12));

    // G(v_lam) = lam^{-2s} G(v) for the L^2 scaling
    for (double lam : {0.5, 1.0, 2.0}) {
        RadialField vl(grid);
        for (int i = 0; i < vl.nodes(); ++i) {
            const double y = grid->r[i] / lam;
            vl.v[i] = std::pow(lam, -0.5) *
                      Complex(std::exp(-y * y / 2.0), 0.4 * std::exp(-y * y));
        }
        CHECK(G_radial(vl, kernel) ==
              doctest::Approx(std::pow(lam, -0.6) * G0).epsilon(1e-6));
    }

    // grid-refinement stability of G (5 digits)
    auto fine = make_radial_grid(1, 30.0, 16384);
    RadialField vf(fine);
    for (int i = 0; i < vf.nodes(); ++i) {
        const double r = fine->r[i];
        vf.v[i] = Complex(std::exp(-r * r / 2.0), 0.4 * std::exp(-r * r));
    }
    CHECK(G_radial(vf, kernel) == doctest::Approx(G0).epsilon(1e-5));
}

TEST_CASE("cartesian convolution: zero, point mass, agreement with radial") {
    RieszKernel kernel = make_riesz_kernel(0.3, 1);

    CartesianField z = make_cartesian_field(1, 40.0, 2048);
    CartesianConvResult rz = conv_cartesian(z, kernel);
    for (int i = 0; i < z.cells; i += 111) CHECK(rz.potential.v[i] == Complex(0.0, 0.0));
    CHECK_FALSE(rz.padding_warning);

    // single hot cell: potential profile follows |x|^{-2s} away from the cell
    CartesianField hot = make_cartesian_field(1, 40.0, 2048);
    const int c = hot.cells / 2;
    hot.v[c] = 1.0;
    CartesianConvResult rh = conv_cartesian(hot, kernel);
    const double h = hot.spacing();
    for (int d : {5, 9, 40, 250}) {
        const double expect = h * std::pow(d * h, -0.6);  // cell mass x kernel
        CHECK(rh.potential.v[c + d].real() == doctest::Approx(expect).epsilon(0.01));
    }

    // shared radial density: radial and Cartesian paths agree
    auto grid = make_radial_grid(1, 30.0, 8192);
    RadialField g = gaussian_density(grid);
    RadialField pr = conv_radial(g, kernel);
    CartesianField gb = make_cartesian_field(1, 40.0, 4096);
    for (int i = 0; i < gb.cells; ++i) {
        const double x = gb.coord(i);
        gb.v[i] = std::exp(-0.5 * x * x);  // |u|^2 = e^{-x^2}
    }
    CartesianConvResult rb = conv_cartesian(gb, kernel);
    RadialEvaluator eval(pr);
    double worst = 0.0;
    for (int i = 0; i < gb.cells; ++i) {
        const double x = std::abs(gb.coord(i));
        if (x > 8.0) continue;
        worst = std::max(worst, std::abs(rb.potential.v[i].real() - eval(x).real()) /
                                    eval(0.0).real());
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("cartesian G: translation invariance and Fubini duality") {
    RieszKernel kernel = make_riesz_kernel(0.3, 1);
    CartesianField u = make_cartesian_field(1, 60.0, 4096);
    for (int i = 0; i < u.cells; ++i) {
        const double x = u.coord(i);
        u.v[i] = Complex(std::exp(-x * x), 0.3 * std::exp(-(x - 0.5) * (x - 0.5)));
    }
    const double G0 = G_cartesian(u, kernel);

    CartesianField us = make_cartesian_field(1, 60.0, 4096);
    const double a = 3.0;
    for (int i = 0; i < us.cells; ++i) {
        const double x = us.coord(i) - a;
        us.v[i] = Complex(std::exp(-x * x), 0.3 * std::exp(-(x - 0.5) * (x - 0.5)));
    }
    CHECK(G_cartesian(us, kernel) == doctest::Approx(G0).epsilon(1e-9));

    // Fubini: int (K*|v|^2) Re(v conj w) = int (K*Re(v conj w)) |v|^2
    CartesianField w = make_cartesian_field(1, 60.0, 4096);
    for (int i = 0; i < w.cells; ++i) {
        const double x = w.coord(i);
        w.v[i] = Complex(std::cos(x) * std::exp(-x * x / 4.0), std::sin(0.3 * x) * std::exp(-x * x / 4.0));
    }
    CartesianConvolver conv(1, 60.0, 4096, kernel);
    std::vector<double> dv(u.cells), dm(u.cells), pv, pm;
    for (int i = 0; i < u.cells; ++i) {
        dv[i] = std::norm(u.v[i]);
        dm[i] = (u.v[i] * std::conj(w.v[i])).real();
    }
    conv.apply(dv, pv);
    conv.apply(dm, pm);
    double t1 = 0.0, t2 = 0.0;
    for (int i = 0; i < u.cells; ++i) {
        t1 += pv[i] * dm[i];
        t2 += pm[i] * dv[i];
    }
    CHECK(t1 == doctest::Approx(t2).epsilon(1e-10));
}

TEST_CASE("2-D cartesian convolution against the radial path") {
    RieszKernel kernel = make_riesz_kernel(0.4, 2);
    auto grid = make_radial_grid(2, 12.0, 1024);
    RadialField g = gaussian_density(grid);
    RadialField pr = conv_radial(g, kernel);

    CartesianField u = make_cartesian_field(2, 24.0, 512);
    for (int i = 0; i < u.cells; ++i)
        for (int j = 0; j < u.cells; ++j) {
            const double x = u.coord(i), y = u.coord(j);
            u.v[static_cast<std::size_t>(i) * u.cells + j] =
                std::exp(-0.5 * (x * x + y * y));  // |u|^2 Gaussian
        }
    CartesianConvResult rb = conv_cartesian(u, kernel);
    RadialEvaluator eval(pr);
    double worst = 0.0;
    for (int i = 0; i < u.cells; ++i) {
        const double x = std::abs(u.coord(i));
        if (x > 6.0) continue;
        const std::size_t idx = static_cast<std::size_t>(i) * u.cells + u.cells / 2;
        worst = std::max(worst,
                         std::abs(rb.potential.v[idx].real() - eval(x).real()) / eval(0.0).real());
    }
    CHECK(worst < 2e-3);
}

TEST_CASE("usage errors") {
    RieszKernel k1 = make_riesz_kernel(0.3, 1);
    auto grid2 = make_radial_grid(2, 10.0, 256);
    RadialField f(grid2);
    CHECK_THROWS_AS(conv_radial(f, k1), UsageError);  // dimension mismatch
    auto big = make_radial_grid(2, 10.0, static_cast<int>(16384));
    RadialField fb(big);
    RieszKernel k2 = make_riesz_kernel(0.4, 2);
    CHECK_THROWS_AS(conv_radial(fb, k2), UsageError);  // dense path guard
}
