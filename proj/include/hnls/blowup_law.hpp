#pragma once

// Parameter machinery for the blow-up rate: the approximate law
// (lambda_app, b_app), the integral F used to pick lambda_1 from s_1, the
// initial pair (lambda_1, b_1) matching a prescribed energy, and the
// constants converting rescaled-time asymptotics into |t| power laws:
//   lambda(t) ~ C_lambda |t|^{2/(4-a)} = C_lambda |t|^{1/(1+sigma)},
//   b(t)      ~ C_b      |t|^{a/(4-a)} = C_b |t|^{(1-sigma)/(1+sigma)}.

#include "hnls/profile.hpp"

namespace hnls {

struct BlowupLawConstants {
    int dimension = 1;
    double sigma = 0.3;
    double alpha = 1.4;        // 2 - 2 sigma
    double beta = 0.0;         // beta_{0,0} from the profile
    double variance_sq = 0.0;  // |||y| Q||_2^2
    double C_time = 0.0;       // script-C of the s_1 <-> t_1 map
    double C_lambda = 0.0;     // C_1(sigma)
    double C_b = 0.0;          // C_2(sigma)
};

// Validates the H2-level index condition 0 < sigma < min{N/2, 1}; the thrown
// DomainError names the violated bound.
double alpha_of(double sigma, int dimension);

BlowupLawConstants make_blowup_constants(int dimension, double sigma, double beta,
                                         double variance_sq);

struct AppLawValue {
    double lambda = 0.0, b = 0.0;
};
// lambda_app(s) = ((a/2) sqrt(2 beta/(2-a)))^{-2/a} s^{-2/a}, b_app(s) = 2/(a s).
AppLawValue app_law(const BlowupLawConstants& c, double s);

// F(lambda) = int_lambda^{lambda0} mu^{-a/2-1} / sqrt(2b/(2-a) + C0 mu^{2-a}) dmu,
// C0 = 8 E0 / |||y|Q||^2. Adaptive quadrature after mu = lambda e^tau.
double F_of_lambda(double lambda, double E0, const BlowupLawConstants& c, double lambda0);

// Largest admissible upper limit (keeps the radicand positive with margin).
double default_lambda0(double E0, const BlowupLawConstants& c);

struct InitParams {
    double lambda1 = 0.0, b1 = 0.0;
    double lambda0 = 0.0;       // upper limit used inside F
    double energy_check = 0.0;  // E(P_{lambda1, b1, 0}) recomputed
};
// lambda1 solves F(lambda1) = s1; b1 > 0 solves E(P_{lambda1,b1,0}) = E0.
InitParams init_params(double E0, double s1, const BlowupLawConstants& c,
                       const ProfileCoeffs& coeffs);

double s_of_t(const BlowupLawConstants& c, double t);  // t < 0
double t_of_s(const BlowupLawConstants& c, double s);  // s > 0

}  // namespace hnls
