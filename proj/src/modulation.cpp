#include "hnls/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hnls/errors.hpp"

namespace hnls {

namespace {

struct Residuals {
    std::array<double, 3> g{0.0, 0.0, 0.0};
    double max_abs() const {
        return std::max({std::abs(g[0]), std::abs(g[1]), std::abs(g[2])});
    }
};

// Shared evaluation state for one snapshot: band-limited access to u plus the
// rescaled sampling machinery.
class SnapshotSampler {
public:
    SnapshotSampler(const CartesianField& u, const ModulationSetup& setup)
        : u_(u), setup_(setup) {
        if (u.dimension == 1) {
            const int factor = u.cells >= (1 << 17) ? 4 : 8;
            line_ = std::make_unique<fft::PeriodicInterpolant>(u.v, u.extent, factor);
        } else {
            plane_ = std::make_unique<fft::PeriodicInterpolant2D>(
                u.v, static_cast<std::size_t>(u.cells), u.extent, 4);
        }
    }

    // w(y) = lambda^{N/2} <u(lambda y)>_ang e^{i(b y^2/4 - gamma)} on the grid;
    // odd_out (N = 1) receives the discarded odd component.
    void rescaled_samples(double lambda, double b, double gamma, std::vector<Complex>& w,
                          std::vector<Complex>* odd_out) const {
        const auto& g = *setup_.grid;
        const int n = g.nodes();
        w.resize(n);
        if (odd_out) odd_out->assign(n, Complex(0.0, 0.0));
        const double amp = std::pow(lambda, 0.5 * u_.dimension);
        const double half = 0.5 * u_.extent;
        for (int i = 0; i < n; ++i) {
            const double y = g.r[i];
            const double x = lambda * y;
            Complex avg(0.0, 0.0), odd(0.0, 0.0);
            if (u_.dimension == 1) {
                const Complex up = (*line_)(x + half);
                const Complex um = (*line_)(-x + half);
                avg = 0.5 * (up + um);
                odd = 0.5 * (up - um);
            } else {
                // fixed-order angular average (profile-relative products are radial)
                constexpr int kAngles = 16;
                for (int a = 0; a < kAngles; ++a) {
                    const double phi = 2.0 * M_PI * (a + 0.5) / kAngles;
                    avg += (*plane_)(x * std::cos(phi) + half, x * std::sin(phi) + half);
                }
                avg /= static_cast<double>(kAngles);
            }
            const Complex phase = std::exp(Complex(0.0, 0.25 * b * y * y - gamma));
            w[i] = amp * avg * phase;
            if (odd_out) (*odd_out)[i] = amp * odd * phase;
        }
    }

private:
    const CartesianField& u_;
    const ModulationSetup& setup_;
    std::unique_ptr<fft::PeriodicInterpolant> line_;
    std::unique_ptr<fft::PeriodicInterpolant2D> plane_;
};

Residuals orthogonality_residuals(const SnapshotSampler& sampler, const ModulationSetup& setup,
                                  double lambda, double b, double gamma, RadialField* eps_out,
                                  std::vector<Complex>* odd_out) {
    const auto& grid = setup.grid;
    std::vector<Complex> w;
    sampler.rescaled_samples(lambda, b, gamma, w, odd_out);

    RadialField P = assemble_profile(setup.coeffs, lambda, b);
    RadialField eps(grid);
    for (int i = 0; i < P.nodes(); ++i) eps.v[i] = w[i] - P.v[i];

    RadialField LP = apply_lambda(P);
    Residuals res;
    double g1 = 0.0, g2 = 0.0, g3 = 0.0;
    for (int i = 0; i < P.nodes(); ++i) {
        const double wt = grid->w[i];
        const Complex e = eps.v[i];
        // (e, i f)_2 = Im( e conj(f) )
        g1 += wt * std::imag(e * std::conj(LP.v[i]));
        g2 += wt * (e.real() * (grid->r[i] * grid->r[i] * P.v[i]).real() +
                    e.imag() * (grid->r[i] * grid->r[i] * P.v[i]).imag());
        g3 += wt * std::imag(e * std::conj(setup.rho.v[i]));
    }
    res.g = {g1, g2, g3};
    if (eps_out) *eps_out = std::move(eps);
    return res;
}

}  // namespace

ModulationSetup make_modulation_setup(const ProfileCoeffs& coeffs,
                                      const GroundStateBundle& bundle, int cells,
                                      double extent) {
    ModulationSetup s;
    s.grid = make_radial_grid(bundle.grid->dimension, extent, cells);
    s.coeffs = resample_coeffs(coeffs, s.grid);
    s.rho = resample(bundle.rho, s.grid);
    return s;
}

ModulationState decompose(const CartesianField& u, const ModulationSetup& setup,
                          const DecomposeGuess& guess) {
    if (u.dimension != setup.grid->dimension)
        throw UsageError("decompose: snapshot and setup dimensions differ");
    if (!(guess.lambda > 0.0)) throw UsageError("decompose: guess.lambda must be positive");

    SnapshotSampler sampler(u, setup);
    double lam = guess.lambda, b = guess.b, gam = guess.gamma;
    Residuals res = orthogonality_residuals(sampler, setup, lam, b, gam, nullptr, nullptr);
    std::vector<double> trace{res.max_abs()};
    int iters = 0;

    while (res.max_abs() > setup.newton_tol) {
        if (iters++ >= setup.max_newton) {
            std::ostringstream msg;
            msg << "decompose: Newton stalled at residual " << res.max_abs() << " after "
                << setup.max_newton << " iterations";
            throw SolverError(msg.str(), trace);
        }
        // forward-difference Jacobian
        const double dl = 1e-7 * lam;
        const double db = 1e-7 * std::max(std::abs(b), 0.1);
        const double dg = 1e-7;
        Residuals rl = orthogonality_residuals(sampler, setup, lam + dl, b, gam, nullptr, nullptr);
        Residuals rb = orthogonality_residuals(sampler, setup, lam, b + db, gam, nullptr, nullptr);
        Residuals rg = orthogonality_residuals(sampler, setup, lam, b, gam + dg, nullptr, nullptr);
        double J[3][3];
        for (int i = 0; i < 3; ++i) {
            J[i][0] = (rl.g[i] - res.g[i]) / dl;
            J[i][1] = (rb.g[i] - res.g[i]) / db;
            J[i][2] = (rg.g[i] - res.g[i]) / dg;
        }
        // solve J step = -g (Gaussian elimination with partial pivoting)
        double rhs[3] = {-res.g[0], -res.g[1], -res.g[2]};
        int perm[3] = {0, 1, 2};
        for (int c = 0; c < 3; ++c) {
            int piv = c;
            for (int rr = c + 1; rr < 3; ++rr)
                if (std::abs(J[perm[rr]][c]) > std::abs(J[perm[piv]][c])) piv = rr;
            std::swap(perm[c], perm[piv]);
            const double d = J[perm[c]][c];
            if (d == 0.0) throw SolverError("decompose: singular Jacobian", trace);
            for (int rr = c + 1; rr < 3; ++rr) {
                const double f = J[perm[rr]][c] / d;
                for (int cc = c; cc < 3; ++cc) J[perm[rr]][cc] -= f * J[perm[c]][cc];
                rhs[perm[rr]] -= f * rhs[perm[c]];
            }
        }
        double step[3];
        for (int c = 2; c >= 0; --c) {
            double acc = rhs[perm[c]];
            for (int cc = c + 1; cc < 3; ++cc) acc -= J[perm[c]][cc] * step[cc];
            step[c] = acc / J[perm[c]][c];
        }
        // damped update: halve on residual increase or on leaving lambda > 0
        double scale = 1.0;
        Residuals next;
        for (int attempt = 0; attempt < 8; ++attempt) {
            const double lam2 = lam + scale * step[0];
            const double b2 = b + scale * step[1];
            const double gam2 = gam + scale * step[2];
            if (lam2 > 0.0) {
                next = orthogonality_residuals(sampler, setup, lam2, b2, gam2, nullptr, nullptr);
                if (next.max_abs() < res.max_abs() || next.max_abs() <= setup.newton_tol) {
                    lam = lam2;
                    b = b2;
                    gam = gam2;
                    break;
                }
            }
            scale *= 0.5;
            if (attempt == 7) {
                lam = std::max(lam + scale * step[0], 1e-12);
                b += scale * step[1];
                gam += scale * step[2];
                next = orthogonality_residuals(sampler, setup, lam, b, gam, nullptr, nullptr);
            }
        }
        res = next;
        trace.push_back(res.max_abs());
    }

    ModulationState out;
    out.t = u.time;
    out.lambda = lam;
    out.b = b;
    gam = std::fmod(gam, 2.0 * M_PI);
    if (gam < 0.0) gam += 2.0 * M_PI;
    out.gamma = gam;
    out.newton_iters = iters;
    out.ortho_residual = {std::abs(res.g[0]), std::abs(res.g[1]), std::abs(res.g[2])};

    std::vector<Complex> odd;
    Residuals final_res =
        orthogonality_residuals(sampler, setup, lam, b, gam, &out.eps, &odd);
    (void)final_res;
    const FieldNorms nn = norms(out.eps);
    out.eps_h1 = std::sqrt(nn.h1_sq());
    out.eps_weighted = std::sqrt(nn.weighted_sq);
    double odd_sq = 0.0;
    for (int i = 0; i < setup.grid->nodes(); ++i)
        odd_sq += setup.grid->w[i] * std::norm(odd[i]);
    out.nonradial_l2 = std::sqrt(odd_sq);
    out.tube_ok = out.eps_h1 < setup.tube_threshold;
    return out;
}

std::vector<std::array<double, 3>> mod_series(const std::vector<ModulationState>& states,
                                              const ModulationSetup& setup) {
    if (states.size() < 3) throw UsageError("mod_series: need at least 3 states");
    for (std::size_t i = 1; i < states.size(); ++i)
        if (!(states[i].s > states[i - 1].s))
            throw UsageError("mod_series: states must have strictly increasing s");

    // unwrap gamma across snapshots
    std::vector<double> gam(states.size());
    gam[0] = states[0].gamma;
    for (std::size_t i = 1; i < states.size(); ++i) {
        double d = states[i].gamma - states[i - 1].gamma;
        d = std::remainder(d, 2.0 * M_PI);
        gam[i] = gam[i - 1] + d;
    }

    std::vector<std::array<double, 3>> out;
    for (std::size_t i = 1; i + 1 < states.size(); ++i) {
        const double ds = states[i + 1].s - states[i - 1].s;
        const double lam_s = (states[i + 1].lambda - states[i - 1].lambda) / ds;
        const double b_s = (states[i + 1].b - states[i - 1].b) / ds;
        const double gam_s = (gam[i + 1] - gam[i - 1]) / ds;
        const auto& st = states[i];
        const double th = theta_of(setup.coeffs, st.lambda, st.b);
        out.push_back({lam_s / st.lambda + st.b, b_s + st.b * st.b - th, 1.0 - gam_s});
    }
    return out;
}

double H_diagnostic(const ModulationState& state, const ModulationSetup& setup) {
    const auto& grid = setup.grid;
    const int n = grid->nodes();
    const int N = grid->dimension;
    RadialField P = assemble_profile(setup.coeffs, state.lambda, state.b);
    RadialField Pe(grid);
    for (int i = 0; i < n; ++i) Pe.v[i] = P.v[i] + state.eps.v[i];

    const double p_exp = 2.0 + 4.0 / N;
    double f_part = 0.0;
    for (int i = 0; i < n; ++i) {
        const double Fpe = std::pow(std::abs(Pe.v[i]), p_exp) / p_exp;
        const double Fp = std::pow(std::abs(P.v[i]), p_exp) / p_exp;
        const Complex fP = std::pow(std::abs(P.v[i]), p_exp - 2.0) * P.v[i];
        const double dF = (fP * std::conj(state.eps.v[i])).real();
        f_part += grid->w[i] * (Fpe - Fp - dF);
    }
    const double Gpe = G_radial(Pe, setup.coeffs.kernel);
    const double Gp = G_radial(P, setup.coeffs.kernel);
    const double dG = inner(g_apply_radial(P, setup.coeffs.kernel), state.eps);
    const double g_part = std::pow(state.lambda, setup.coeffs.alpha) * (Gpe - Gp - dG);

    const FieldNorms nn = norms(state.eps);
    return 0.5 * nn.h1_sq() + state.b * state.b * nn.weighted_sq - f_part - g_part;
}

ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& t_vs_value) {
    if (t_vs_value.size() < 3) throw UsageError("fit_exponent: need at least 3 samples");
    double vmin = 1e300, vmax = 0.0;
    for (const auto& [t, v] : t_vs_value) {
        if (!(t < 0.0)) throw UsageError("fit_exponent: all t must be negative");
        if (!(v > 0.0)) throw UsageError("fit_exponent: values must be positive");
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    if (vmax < 3.0 * vmin)
        throw UsageError("fit_exponent: series must span at least a factor of 3");

    const double n = static_cast<double>(t_vs_value.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (const auto& [t, v] : t_vs_value) {
        const double x = std::log(std::abs(t)), y = std::log(v);
        sx += x; sy += y; sxx += x * x; sxy += x * y; syy += y * y;
    }
    ExponentFit fit;
    const double denom = n * sxx - sx * sx;
    fit.exponent = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - fit.exponent * sx) / n;
    fit.prefactor = std::exp(intercept);
    double ss_res = 0.0;
    const double ss_tot = syy - sy * sy / n;
    for (const auto& [t, v] : t_vs_value) {
        const double pred = intercept + fit.exponent * std::log(std::abs(t));
        ss_res += (std::log(v) - pred) * (std::log(v) - pred);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

}  // namespace hnls
