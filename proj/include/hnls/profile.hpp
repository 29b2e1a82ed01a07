#pragma once

// Blow-up profile construction. P is an expansion
//   P = Q + sum_{j+k<=K} ( b^{2j} lam^{(k+1)a} P+_{jk} + i b^{2j+1} lam^{(k+1)a} P-_{jk} )
// whose coefficient pairs solve, order by order in the formal variables
// (b, lam^a), the systems
//   L+ P+_{jk} = beta_{jk} |y|^2 Q / 4 + F+_{jk}
//   L- P-_{jk} = F-_{jk} - ((k+1)a + 2j) P+_{jk},
// with beta_{jk} fixed by orthogonality of the L- source to Q. The sources
// F come from the s-derivative bookkeeping under the ideal flow
// (db/ds = theta - b^2, dlam/ds = -b lam), the Taylor expansion of the local
// nonlinearity around Q, the Hartree cross terms and the theta |y|^2/4 term.

#include <memory>
#include <vector>

#include "hnls/cartesian.hpp"
#include "hnls/ground_state.hpp"
#include "hnls/hartree.hpp"
#include "hnls/radial.hpp"

namespace hnls {

struct ProfileCoeffs {
    int truncation = 1;  // K
    double sigma = 0.3;
    double alpha = 1.4;  // 2 - 2 sigma
    std::shared_ptr<const RadialGrid> grid;
    RieszKernel kernel;
    RadialField Q;
    double variance_sq = 0.0;  // |||y| Q||_2^2
    double mass_sq = 0.0;

    // indexed [j][k]; valid when j + k <= truncation
    std::vector<std::vector<RadialField>> p_plus, p_minus;
    std::vector<std::vector<double>> beta;
    std::vector<std::vector<double>> solvability_residual;  // |(L- source, Q)_2|
    std::vector<std::vector<int>> decay_ok;

    Complex mu00{0.0, 0.0};          // multiplier closing the (0,0) orthogonality
    double structure_residual = 0.0; // leakage into the wrong parity channel

    bool in_set(int j, int k) const { return j >= 0 && k >= 0 && j + k <= truncation; }
    double beta00() const { return beta[0][0]; }
};

struct S00Result {
    RadialField p_plus, p_minus;
    double beta = 0.0;
    Complex mu{0.0, 0.0};
    double solvability_residual = 0.0;
};

S00Result solve_S00(const GroundStateBundle& bundle, const RieszKernel& kernel);

// Solves every (S_{j,k}) with j + k <= K (K <= 2).
ProfileCoeffs solve_profile(const GroundStateBundle& bundle, const RieszKernel& kernel, int K);

double theta_of(const ProfileCoeffs& c, double lambda, double b);
RadialField assemble_profile(const ProfileCoeffs& c, double lambda, double b);

struct ProfileResidual {
    RadialField psi;
    double weighted_h1 = 0.0;  // || e^{eps' |y|} Psi ||_{H^1}
};
// Psi of the profile equation with dP/ds taken along the ideal flow.
ProfileResidual profile_residual(const ProfileCoeffs& c, double lambda, double b,
                                 double eps_weight = 0.1);

// Samples P_{lambda,b,gamma} on a periodic box.
CartesianField rescale_profile(const ProfileCoeffs& c, double lambda, double b, double gamma,
                               int dimension, double extent, int cells);

// E(P_{lambda,b,gamma}) for the +-sign equation, evaluated radially.
double profile_energy(const ProfileCoeffs& c, double lambda, double b);
double profile_mass(const ProfileCoeffs& c, double lambda, double b);

struct EnergyExpansionCheck {
    double lhs = 0.0;  // 8 E(P_{lambda,b,gamma})
    double rhs = 0.0;  // |||y|Q||^2 (b^2/lam^2 - 2 beta/(2-a) lam^{a-2})
    double gap = 0.0;
};
EnergyExpansionCheck energy_expansion_check(const ProfileCoeffs& c, double lambda, double b);

// |f| <= C (1+r)^kappa Q surrogate for membership in the paper's decay class.
struct DecayFit {
    bool pass = false;
    double C = 0.0, kappa = 0.0;
};
DecayFit decay_check(const RadialField& f, const RadialField& Q);

// Resample every stored field onto another radial grid (used by the
// modulation machinery, which runs on a coarser grid than the solves).
ProfileCoeffs resample_coeffs(const ProfileCoeffs& c, std::shared_ptr<const RadialGrid> target);

}  // namespace hnls
