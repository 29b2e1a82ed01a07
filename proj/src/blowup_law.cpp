#include "hnls/blowup_law.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "hnls/errors.hpp"

namespace hnls {

namespace {

double adaptive_simpson_rec(const std::function<double(double)>& f, double a, double b,
                            double fa, double fm, double fb, double whole, double tol,
                            int depth) {
    const double m = 0.5 * (a + b);
    const double flm = f(0.5 * (a + m)), frm = f(0.5 * (m + b));
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double rel_tol) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double tol = rel_tol * std::max(std::abs(whole), 1e-30);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// Bracketed bisection/secant hybrid; xtol is relative on the root.
double find_root(const std::function<double(double)>& f, double lo, double hi, double xtol,
                 const char* where) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) {
        std::ostringstream msg;
        msg << where << ": no sign change on [" << lo << ", " << hi << "] (f = " << flo << ", "
            << fhi << ")";
        throw SolverError(msg.str());
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        // secant proposal, accepted only if it stays inside the bracket
        const double denom = fhi - flo;
        if (denom != 0.0) {
            const double sec = hi - fhi * (hi - lo) / denom;
            if (sec > lo + 0.1 * (hi - lo) && sec < hi - 0.1 * (hi - lo)) mid = sec;
        }
        const double fmid = f(mid);
        if (fmid == 0.0) return mid;
        if (flo * fmid < 0.0) {
            hi = mid;
            fhi = fmid;
        } else {
            lo = mid;
            flo = fmid;
        }
        if (hi - lo <= xtol * std::max(std::abs(lo), std::abs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double alpha_of(double sigma, int dimension) {
    if (dimension < 1 || dimension > 3)
        throw DomainError("alpha_of: dimension must be 1, 2 or 3");
    const double bound = std::min(0.5 * dimension, 1.0);
    if (!(sigma > 0.0) || !(sigma < bound)) {
        std::ostringstream msg;
        msg << "alpha_of: sigma = " << sigma << " violates 0 < sigma < min{N/2, 1} = " << bound
            << " for N = " << dimension;
        throw DomainError(msg.str());
    }
    return 2.0 - 2.0 * sigma;
}

BlowupLawConstants make_blowup_constants(int dimension, double sigma, double beta,
                                         double variance_sq) {
    BlowupLawConstants c;
    c.dimension = dimension;
    c.sigma = sigma;
    c.alpha = alpha_of(sigma, dimension);
    if (!(beta > 0.0)) throw DomainError("make_blowup_constants: beta must be positive");
    if (!(variance_sq > 0.0))
        throw DomainError("make_blowup_constants: |||y|Q||^2 must be positive");
    c.beta = beta;
    c.variance_sq = variance_sq;
    const double a = c.alpha;
    const double kappa = 0.5 * a * std::sqrt(2.0 * beta / (2.0 - a));
    c.C_time = a / (4.0 - a) * std::pow(kappa, -4.0 / a);
    c.C_lambda = std::pow(c.C_time, -2.0 / (4.0 - a)) * std::pow(kappa, -2.0 / a);
    c.C_b = 2.0 / a * std::pow(c.C_time, -a / (4.0 - a));
    return c;
}

AppLawValue app_law(const BlowupLawConstants& c, double s) {
    if (!(s > 0.0)) throw UsageError("app_law: s must be positive");
    const double a = c.alpha;
    const double kappa = 0.5 * a * std::sqrt(2.0 * c.beta / (2.0 - a));
    AppLawValue v;
    v.lambda = std::pow(kappa, -2.0 / a) * std::pow(s, -2.0 / a);
    v.b = 2.0 / (a * s);
    return v;
}

double default_lambda0(double E0, const BlowupLawConstants& c) {
    const double C0 = 8.0 * E0 / c.variance_sq;
    double lambda0 = 0.5;
    if (C0 < 0.0) {
        const double bound =
            std::pow(-2.0 * c.beta / ((2.0 - c.alpha) * C0), 1.0 / (2.0 - c.alpha));
        lambda0 = std::min(lambda0, 0.9 * bound);
    }
    return lambda0;
}

double F_of_lambda(double lambda, double E0, const BlowupLawConstants& c, double lambda0) {
    if (!(lambda > 0.0) || lambda > lambda0)
        throw UsageError("F_of_lambda: need 0 < lambda <= lambda0");
    const double a = c.alpha;
    const double C0 = 8.0 * E0 / c.variance_sq;
    const double base = 2.0 * c.beta / (2.0 - a);
    // radicand is monotone in mu; checking the endpoints covers the interval
    for (double mu : {lambda, lambda0})
        if (base + C0 * std::pow(mu, 2.0 - a) <= 0.0)
            throw DomainError("F_of_lambda: radicand nonpositive on the integration interval");
    auto integrand = [&](double tau) {
        const double mu = lambda * std::exp(tau);
        return std::pow(mu, -0.5 * a) / std::sqrt(base + C0 * std::pow(mu, 2.0 - a));
    };
    return adaptive_simpson(integrand, 0.0, std::log(lambda0 / lambda), 1e-13);
}

InitParams init_params(double E0, double s1, const BlowupLawConstants& c,
                       const ProfileCoeffs& coeffs) {
    if (!(s1 > 0.0)) throw UsageError("init_params: s1 must be positive");
    InitParams out;
    out.lambda0 = default_lambda0(E0, c);

    // lambda1: F is 0 at lambda0 and increases as lambda decreases
    double lo = out.lambda0;
    int halvings = 0;
    while (F_of_lambda(lo, E0, c, out.lambda0) < s1) {
        lo *= 0.5;
        if (++halvings > 60) {
            std::ostringstream msg;
            msg << "init_params: no bracket for F(lambda) = " << s1 << " down to lambda = " << lo;
            throw SolverError(msg.str());
        }
    }
    out.lambda1 = find_root(
        [&](double l) { return F_of_lambda(l, E0, c, out.lambda0) - s1; }, lo, 2.0 * lo, 1e-13,
        "init_params(lambda1)");

    // b1 > 0: E(P_{lambda1, b, 0}) grows monotonically in b
    auto energy_of_b = [&](double b) { return profile_energy(coeffs, out.lambda1, b); };
    const double b_app = 2.0 / (c.alpha * s1);
    double b_hi = 2.0 * b_app;
    int doublings = 0;
    while (energy_of_b(b_hi) < E0) {
        b_hi *= 2.0;
        if (++doublings > 40)
            throw SolverError("init_params: could not bracket b1 (energy never reaches E0)");
    }
    if (energy_of_b(0.0) >= E0)
        throw SolverError("init_params: E(P_{lambda1,0,0}) >= E0; s1 is too small for this E0");
    out.b1 = find_root([&](double b) { return energy_of_b(b) - E0; }, 0.0, b_hi, 1e-13,
                       "init_params(b1)");
    out.energy_check = energy_of_b(out.b1);
    return out;
}

double s_of_t(const BlowupLawConstants& c, double t) {
    if (!(t < 0.0)) throw DomainError("s_of_t: t must be negative (pre-blow-up)");
    return std::pow(std::abs(t) / c.C_time, -c.alpha / (4.0 - c.alpha));
}

double t_of_s(const BlowupLawConstants& c, double s) {
    if (!(s > 0.0)) throw DomainError("t_of_s: s must be positive");
    return -c.C_time * std::pow(s, -(4.0 - c.alpha) / c.alpha);
}

}  // namespace hnls
