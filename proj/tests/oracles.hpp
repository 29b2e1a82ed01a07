#pragma once

// Test-side oracles, independent of the library's numerical paths.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

// N = 1 ground state of -Q'' + Q = Q^5 in closed form.
inline double closed_q(double x) {
    return std::pow(3.0, 0.25) * std::sqrt(1.0 / std::cosh(2.0 * x));
}

inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double flm = f(0.5 * (a + m)), frm = f(0.5 * (m + b));
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12, int depth = 48) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol * std::max(1.0, std::abs(whole)), depth);
}

// integral over the whole line of a decaying integrand; panelled so the
// initial coarse samples cannot miss off-center support
inline double integrate_line(const std::function<double(double)>& f, double half_width = 40.0,
                             double tol = 1e-12) {
    double acc = 0.0;
    const double cuts[5] = {-half_width, -2.0, 0.0, 2.0, half_width};
    for (int k = 0; k < 4; ++k) acc += integrate(f, cuts[k], cuts[k + 1], tol);
    return acc;
}

// log-log least squares slope
inline double loglog_slope(const std::vector<std::pair<double, double>>& xy) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(xy.size());
    for (const auto& [x, y] : xy) {
        const double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
