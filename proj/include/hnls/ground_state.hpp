#pragma once

// Ground state Q of -lap Q + Q - Q^{1+4/N} = 0 and the operators linearized
// at Q:
//   L+ = -lap + 1 - (1+4/N) Q^{4/N}     (real channel)
//   L- = -lap + 1 - Q^{4/N}             (imaginary channel)
// Q is computed by Petviashvili-type spectral renormalization and
// cross-checked against an independent shooting integration. rho is the
// radial solution of L+ rho = |y|^2 Q.

#include <memory>
#include <vector>

#include "hnls/radial.hpp"

namespace hnls {

struct GroundStateBundle {
    std::shared_ptr<const RadialGrid> grid;
    RadialField Q;         // positive, decreasing
    RadialField LambdaQ;   // (N/2) Q + r Q'
    RadialField r2Q;       // |y|^2 Q
    RadialField rho;       // L+ rho = |y|^2 Q, Dirichlet at R
    std::vector<double> q_pow_4n;  // Q^{4/N} tabulated

    double mass_sq = 0.0;      // ||Q||_2^2
    double variance_sq = 0.0;  // |||y| Q||_2^2
    double grad_sq = 0.0;      // ||grad Q||_2^2

    double equation_residual = 0.0;  // ||-lap Q + Q - Q^{1+4/N}||_2
    double rho_residual = 0.0;       // relative L2 residual of L+ rho = r^2 Q
    double shooting_gap = 0.0;       // |mass - mass_shooting| / mass
    std::vector<double> residual_history;
};

// tol bounds the stationary-equation residual. Throws SolverError (carrying
// the residual history) on non-convergence or if the shooting cross-check
// disagrees at the 1e-3 level (spurious fixed point guard).
GroundStateBundle solve_ground_state(std::shared_ptr<const RadialGrid> grid, double tol = 1e-10);

RadialField apply_lplus(const GroundStateBundle& b, const RadialField& f);
RadialField apply_lminus(const GroundStateBundle& b, const RadialField& f);

// Independent shooting integration of the radial ODE. Returns the center
// value Q(0); mass_sq_out receives ||Q||_2^2 accumulated along the shot.
double shooting_ground_state(int dimension, double r_max, double* mass_sq_out);

// Direct banded solves of the discretized L+/L- with a Dirichlet condition
// at R. The `orthogonal` variants solve the bordered system that additionally
// enforces (solution, Q)_2 = 0 through a Lagrange multiplier; the multiplier
// column is r^2 Q for L+ (so mu acts as a correction to the |y|^2 Q/4 source
// coefficient) and Q itself for L- (whose radial kernel is spanned by Q).
class LinearizedSolver {
public:
    enum class Kind { Plus, Minus };
    LinearizedSolver(const GroundStateBundle& bundle, Kind kind);
    ~LinearizedSolver();
    LinearizedSolver(const LinearizedSolver&) = delete;
    LinearizedSolver& operator=(const LinearizedSolver&) = delete;

    RadialField solve(const RadialField& rhs) const;
    RadialField solve_orthogonal(const RadialField& rhs, Complex* multiplier = nullptr) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace hnls
