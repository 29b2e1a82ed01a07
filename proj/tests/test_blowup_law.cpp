#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hnls/blowup_law.hpp"
#include "hnls/errors.hpp"
#include "oracles.hpp"

using namespace hnls;

namespace {

struct Lab {
    GroundStateBundle bundle;
    RieszKernel kernel;
    ProfileCoeffs coeffs;
    BlowupLawConstants consts;
};

const Lab& lab() {
    static Lab L = [] {
        Lab l{solve_ground_state(make_radial_grid(1, 30.0, 8192), 1e-10),
              make_riesz_kernel(0.3, 1), {}, {}};
        l.coeffs = solve_profile(l.bundle, l.kernel, 1);
        l.consts = make_blowup_constants(1, 0.3, l.coeffs.beta00(), l.bundle.variance_sq);
        return l;
    }();
    return L;
}

}  // namespace

TEST_CASE("alpha_of: values, limits, index condition") {
    CHECK(alpha_of(0.3, 1) == doctest::Approx(1.4).epsilon(1e-15));
    CHECK(alpha_of(1e-12, 2) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK_THROWS_AS(alpha_of(0.5, 1), DomainError);  // min{1/2, 1} bound
    CHECK_THROWS_AS(alpha_of(1.2, 3), DomainError);  // min{3/2, 1} = 1
    CHECK_THROWS_AS(alpha_of(-0.2, 1), DomainError);
}

TEST_CASE("exponent identities hold to machine precision") {
    for (double sigma : {0.05, 0.15, 0.25, 0.35, 0.45}) {
        const double a = alpha_of(sigma, 1);
        CHECK(2.0 / (4.0 - a) == doctest::Approx(1.0 / (1.0 + sigma)).epsilon(1e-15));
        CHECK(a / (4.0 - a) == doctest::Approx((1.0 - sigma) / (1.0 + sigma)).epsilon(1e-14));
    }
}

TEST_CASE("approximate law: printed instances and ODE residuals") {
    const auto& L = lab();
    // alpha = 1.4, s = 10: b_app = 2/14
    AppLawValue v = app_law(L.consts, 10.0);
    CHECK(v.b == doctest::Approx(2.0 / 14.0).epsilon(1e-15));

    // synthetic alpha = 1, beta = 1/2 (sigma = 1/2 is admissible for N = 2):
    // lambda_app(s) = 4 s^{-2}
    BlowupLawConstants syn = make_blowup_constants(2, 0.5, 0.5, 1.0);
    CHECK(app_law(syn, 10.0).lambda == doctest::Approx(0.04).epsilon(1e-13));

    // analytic ODE residuals at 100 log-spaced s
    const double a = L.consts.alpha, beta = L.consts.beta;
    for (int m = 0; m < 100; ++m) {
        const double s = std::pow(10.0, 0.5 + 2.5 * m / 99.0);
        AppLawValue w = app_law(L.consts, s);
        const double b_s = -2.0 / (a * s * s);
        const double lam_s = -2.0 / (a * s) * w.lambda;
        CHECK(std::abs(b_s + w.b * w.b - beta * std::pow(w.lambda, a)) < 1e-12);
        CHECK(std::abs(lam_s / w.lambda + w.b) < 1e-12);
    }
    CHECK_THROWS_AS(app_law(L.consts, -1.0), UsageError);
}

TEST_CASE("F: empty integral, closed form at E0 = 0, asymptotic ratio") {
    const auto& L = lab();
    const double lambda0 = default_lambda0(0.0, L.consts);
    CHECK(F_of_lambda(lambda0, 0.0, L.consts, lambda0) == 0.0);

    const double a = L.consts.alpha, beta = L.consts.beta;
    const double pref = 2.0 / (a * std::sqrt(2.0 * beta / (2.0 - a)));
    for (double lam : {0.3, 0.05, 0.004}) {
        const double closed =
            pref * (std::pow(lam, -0.5 * a) - std::pow(lambda0, -0.5 * a));
        CHECK(F_of_lambda(lam, 0.0, L.consts, lambda0) ==
              doctest::Approx(closed).epsilon(1e-11));
    }

    // ratio F(lambda) * (a lam^{a/2} sqrt(2 beta/(2-a)) / 2) -> 1
    double prev_dev = 1e9;
    for (double lam : {1e-2, 1e-4, 1e-6}) {
        const double ratio = F_of_lambda(lam, 1.0, L.consts, default_lambda0(1.0, L.consts)) /
                             (pref * std::pow(lam, -0.5 * a));
        const double dev = std::abs(ratio - 1.0);
        CHECK(dev < prev_dev);
        prev_dev = dev;
    }
    CHECK(prev_dev < 1e-3);

    // strongly negative energy makes the radicand fail
    CHECK_THROWS_AS(F_of_lambda(0.4, -1e6, L.consts, 0.5), DomainError);
}

TEST_CASE("init_params: closed-form inversion, energy match, monotonicity") {
    const auto& L = lab();
    const double s1 = 20.0;
    InitParams ip = init_params(0.0, s1, L.consts, L.coeffs);

    // E0 = 0: lambda1 inverts the closed-form F
    const double a = L.consts.alpha;
    const double pref = 2.0 / (a * std::sqrt(2.0 * L.consts.beta / (2.0 - a)));
    const double closed_lambda =
        std::pow((s1 + pref * std::pow(ip.lambda0, -0.5 * a)) / pref, -2.0 / a);
    CHECK(std::abs(ip.lambda1 - closed_lambda) / closed_lambda < 1e-9);

    // recomputing the energy returns E0 within tolerance of the natural scale
    const double scale =
        L.consts.variance_sq * 2.0 * L.consts.beta / (2.0 - a) * std::pow(ip.lambda1, a - 2.0) / 8.0;
    CHECK(std::abs(ip.energy_check - 0.0) < 1e-9 * scale);

    // deviation from the app law decays between s1 and 4 s1
    auto dev = [&](double s) {
        InitParams p = init_params(0.0, s, L.consts, L.coeffs);
        AppLawValue w = app_law(L.consts, s);
        return std::abs(std::pow(p.lambda1 / w.lambda, 0.5 * a) - 1.0) +
               std::abs(p.b1 / w.b - 1.0);
    };
    CHECK(dev(4.0 * s1) < dev(s1));

    // monotone: larger s1 gives smaller lambda1
    InitParams ip2 = init_params(0.0, 2.0 * s1, L.consts, L.coeffs);
    CHECK(ip2.lambda1 < ip.lambda1);

    // nonzero energy level is matched too
    InitParams ip3 = init_params(0.5, s1, L.consts, L.coeffs);
    CHECK(std::abs(ip3.energy_check - 0.5) < 1e-8 * std::max(1.0, scale));
}

TEST_CASE("s <-> t conversion") {
    const auto& L = lab();
    for (double t : {-1e-3, -1e-5, -2e-8}) {
        const double s = s_of_t(L.consts, t);
        CHECK(std::abs(t_of_s(L.consts, s) - t) / std::abs(t) < 1e-12);
    }
    CHECK_THROWS_AS(s_of_t(L.consts, 0.1), DomainError);
    CHECK_THROWS_AS(s_of_t(L.consts, 0.0), DomainError);

    // s ~ |t|^{-(1-sigma)/(1+sigma)}: exponent check via two decades
    const double e = std::log(s_of_t(L.consts, -1e-6) / s_of_t(L.consts, -1e-4)) /
                     std::log(1e-4 / 1e-6);
    CHECK(e == doctest::Approx((1.0 - 0.3) / (1.0 + 0.3)).epsilon(1e-12));

    // lambda_app(s(t)) = C_lambda |t|^{1/(1+sigma)} exactly
    for (double t : {-1e-4, -3e-7}) {
        const double lam = app_law(L.consts, s_of_t(L.consts, t)).lambda;
        const double law = L.consts.C_lambda * std::pow(std::abs(t), 1.0 / 1.3);
        CHECK(lam == doctest::Approx(law).epsilon(1e-12));
    }
}

TEST_CASE("constants: positivity and guard rails") {
    const auto& L = lab();
    CHECK(L.consts.C_time > 0.0);
    CHECK(L.consts.C_lambda > 0.0);
    CHECK(L.consts.C_b > 0.0);
    CHECK_THROWS_AS(make_blowup_constants(1, 0.3, -1.0, 1.0), DomainError);
    CHECK_THROWS_AS(make_blowup_constants(1, 0.3, 1.0, 0.0), DomainError);
}
