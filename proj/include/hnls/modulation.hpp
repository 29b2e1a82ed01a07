#pragma once

// Modulation decomposition: given a box snapshot u close to the rescaled
// profile family, find (lambda~, b~, gamma~) such that
//   u(x) = lambda~^{-N/2} (P + eps)(x/lambda~) e^{-i b~ |x|^2/(4 lambda~^2) + i gamma~}
// with eps satisfying the three orthogonality conditions
//   (eps, i Lambda P)_2 = (eps, |y|^2 P)_2 = (eps, i rho)_2 = 0.
// Also: finite-difference Mod(s) series, the H energy diagnostic, and the
// power-law exponent fit used to grade blow-up rates.

#include <array>
#include <memory>
#include <utility>
#include <vector>

#include "hnls/cartesian.hpp"
#include "hnls/ground_state.hpp"
#include "hnls/profile.hpp"

namespace hnls {

struct ModulationSetup {
    std::shared_ptr<const RadialGrid> grid;  // decomposition grid (coarser than the solve grid)
    ProfileCoeffs coeffs;                    // profile resampled onto `grid`
    RadialField rho;                         // rho resampled onto `grid`
    double newton_tol = 1e-10;               // absolute, per orthogonality residual
    int max_newton = 50;
    double tube_threshold = 0.5;  // operational surrogate for the lemma's delta-tube
};

ModulationSetup make_modulation_setup(const ProfileCoeffs& coeffs,
                                      const GroundStateBundle& bundle, int cells = 2048,
                                      double extent = 25.0);

struct ModulationState {
    double t = 0.0, s = 0.0;
    double lambda = 1.0, b = 0.0, gamma = 0.0;  // gamma reduced to [0, 2 pi)
    RadialField eps;                            // radialized, on the setup grid
    double eps_h1 = 0.0;                        // ||eps||_{H^1}
    double eps_weighted = 0.0;                  // |||y| eps||_2
    double nonradial_l2 = 0.0;                  // discarded non-radial residue
    std::array<double, 3> ortho_residual{0.0, 0.0, 0.0};
    bool tube_ok = true;
    int newton_iters = 0;
};

struct DecomposeGuess {
    double lambda = 0.1, b = 0.0, gamma = 0.0;
};

ModulationState decompose(const CartesianField& u, const ModulationSetup& setup,
                          const DecomposeGuess& guess);

// Centered finite differences of (lambda, b, gamma) in s; returns
// (lambda_s/lambda + b, b_s + b^2 - theta, 1 - gamma_s) per interior state.
std::vector<std::array<double, 3>> mod_series(const std::vector<ModulationState>& states,
                                              const ModulationSetup& setup);

double H_diagnostic(const ModulationState& state, const ModulationSetup& setup);

struct ExponentFit {
    double exponent = 0.0, prefactor = 0.0, r2 = 0.0;
};
// Least squares of log(value) against log|t|; requires t < 0 and a value span
// of at least a factor of 3.
ExponentFit fit_exponent(const std::vector<std::pair<double, double>>& t_vs_value);

}  // namespace hnls
