#pragma once

// Strang split-step evolution of
//   i u_t + lap u + |u|^{4/N} u +- (|x|^{-2s} * |u|^2) u = 0
// on a periodic box. Half kinetic step as a spectral multiplier, full
// nonlinear step exact in closed form (the potential V = |u|^{4/N} +- K*|u|^2
// preserves |u| pointwise), half kinetic step. Mass is conserved to round-off;
// the 2/3-rule mask, when enabled, is applied with each kinetic substep.

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "hnls/cartesian.hpp"
#include "hnls/hartree.hpp"

namespace hnls {

struct SimConfig {
    int dimension = 1;
    double sigma = 0.3;
    int hartree_sign = +1;   // the +- in front of the Hartree term
    bool hartree_on = true;
    bool power_nl_on = true;
    bool dealias = true;

    double extent = 50.0;
    int cells = 1 << 13;

    double c_dt = 0.05;   // dt = c_dt * lambda~^2
    double dt_min = 1e-13;
    double dt_max = 0.05;

    double stop_t_end = std::numeric_limits<double>::infinity();
    double stop_lambda_min = 0.0;
    double diag_cadence_s = 0.5;  // rescaled-time spacing of diagnostics rows
    double boundary_mass_threshold = 1e-6;
    long max_steps = 100000000;

    double s_init = 0.0;
    double grad_norm_ref = 0.0;       // ||grad Q||_2, powers the lambda~ proxy
    double core_half_radius = 1.03;   // half-max radius of Q in rescaled units

    void validate() const;  // index condition, sign, geometry
};

// Optional modulation hook: called at diagnostic cadence; fills the scale used
// for time stepping and the diagnostics columns.
struct TrackSample {
    bool valid = false;
    double lambda = 1.0, b = 0.0, gamma = 0.0, eps_h1 = 0.0;
};
using TrackCallback = std::function<TrackSample(const CartesianField&, double s)>;

struct DiagnosticsRow {
    double t = 0, s = 0, mass = 0, energy = 0;
    double lambda = 1, b = 0, gamma = 0, eps_h1 = 0, grad_norm = 0;
};

struct Trajectory {
    std::vector<DiagnosticsRow> rows;
    CartesianField final_state;
    std::string stop_reason;  // t_end | lambda_min | resolution | boundary | max_steps
    long steps = 0;
    double mass_initial = 0, mass_drift_rel = 0;
    double energy_initial = 0, energy_drift_rel = 0;
    double max_grad_ratio = 1.0;
};

class SplitStepper {
public:
    explicit SplitStepper(const SimConfig& cfg);
    // advances u by dt; returns ||grad u||_2 of the advanced state
    double step(CartesianField& u, double dt) const;
    double grad_norm(const CartesianField& u) const;
    double energy(const CartesianField& u) const;
    const SimConfig& config() const { return cfg_; }

private:
    void kinetic_half(std::vector<Complex>& v, double dt, double* grad_out) const;
    SimConfig cfg_;
    RieszKernel kernel_;
    std::unique_ptr<CartesianConvolver> conv_;
    std::vector<double> ksq_axis_;  // squared wavenumber per axis index
    std::vector<char> keep_axis_;   // 2/3-rule keep mask per axis index
};

double mass(const CartesianField& u);
double energy(const CartesianField& u, const SimConfig& cfg);

Trajectory run(const SimConfig& cfg, CartesianField initial, const TrackCallback& tracker = {});

// Sample a radial field onto a box, optionally displaced along the first axis.
CartesianField sample_radial_to_box(const RadialField& f, int dimension, double extent,
                                    int cells, double shift = 0.0);

}  // namespace hnls
