#include "hnls/nls_solver.hpp"

#include <algorithm>
#include <cmath>

#include "hnls/errors.hpp"

namespace hnls {

void SimConfig::validate() const {
    if (dimension != 1 && dimension != 2)
        throw DomainError("SimConfig: Cartesian evolution supports N = 1 or 2");
    if (hartree_sign != 1 && hartree_sign != -1)
        throw DomainError("SimConfig: hartree_sign must be +1 or -1");
    if (hartree_on) make_riesz_kernel(sigma, dimension);  // throws outside (1.2)
    if (cells < 8 || (cells & (cells - 1)) != 0)
        throw UsageError("SimConfig: cells must be a power of two >= 8");
    if (extent <= 0.0 || c_dt <= 0.0 || dt_max <= 0.0)
        throw UsageError("SimConfig: extent, c_dt and dt_max must be positive");
}

SplitStepper::SplitStepper(const SimConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    kernel_ = make_riesz_kernel(cfg_.sigma, cfg_.dimension);
    if (cfg_.hartree_on)
        conv_ = std::make_unique<CartesianConvolver>(cfg_.dimension, cfg_.extent, cfg_.cells,
                                                     kernel_);
    const int n = cfg_.cells;
    const double dk = 2.0 * M_PI / cfg_.extent;
    ksq_axis_.resize(n);
    keep_axis_.resize(n);
    for (int m = 0; m < n; ++m) {
        const double mm = (m <= n / 2) ? m : m - n;
        ksq_axis_[m] = (dk * mm) * (dk * mm);
        keep_axis_[m] = (std::abs(mm) <= n / 3) ? 1 : 0;  // 2/3-rule
    }
}

void SplitStepper::kinetic_half(std::vector<Complex>& v, double dt, double* grad_out) const {
    const int n = cfg_.cells;
    double grad_acc = 0.0;
    if (cfg_.dimension == 1) {
        fft::transform(v, -1);
        for (int m = 0; m < n; ++m) {
            if (cfg_.dealias && !keep_axis_[m]) {
                v[m] = 0.0;
                continue;
            }
            v[m] *= std::exp(Complex(0.0, -0.5 * ksq_axis_[m] * dt));
            grad_acc += ksq_axis_[m] * std::norm(v[m]);
        }
        fft::transform(v, +1);
        if (grad_out)
            *grad_out = std::sqrt(grad_acc * cfg_.extent / (static_cast<double>(n) * n));
    } else {
        const std::size_t nn = static_cast<std::size_t>(n);
        fft::transform_2d(v, nn, nn, -1);
        for (int a = 0; a < n; ++a)
            for (int bx = 0; bx < n; ++bx) {
                Complex& z = v[static_cast<std::size_t>(a) * n + bx];
                if (cfg_.dealias && (!keep_axis_[a] || !keep_axis_[bx])) {
                    z = 0.0;
                    continue;
                }
                const double k2 = ksq_axis_[a] + ksq_axis_[bx];
                z *= std::exp(Complex(0.0, -0.5 * k2 * dt));
                grad_acc += k2 * std::norm(z);
            }
        fft::transform_2d(v, nn, nn, +1);
        if (grad_out) {
            const double npts = static_cast<double>(n) * n;
            *grad_out = std::sqrt(grad_acc * cfg_.extent * cfg_.extent / (npts * npts));
        }
    }
}

double SplitStepper::grad_norm(const CartesianField& u) const {
    std::vector<Complex> v = u.v;
    double g = 0.0;
    kinetic_half(v, 0.0, &g);
    return g;
}

double SplitStepper::step(CartesianField& u, double dt) const {
    kinetic_half(u.v, dt, nullptr);

    const double pw = 4.0 / cfg_.dimension;
    std::vector<double> pot;
    if (cfg_.hartree_on) {
        std::vector<double> density(u.v.size());
        for (std::size_t i = 0; i < u.v.size(); ++i) density[i] = std::norm(u.v[i]);
        conv_->apply(density, pot);
    }
    for (std::size_t i = 0; i < u.v.size(); ++i) {
        double V = 0.0;
        if (cfg_.power_nl_on) V += std::pow(std::norm(u.v[i]), 0.5 * pw);
        if (cfg_.hartree_on) V += cfg_.hartree_sign * pot[i];
        u.v[i] *= std::exp(Complex(0.0, V * dt));
    }

    double grad = 0.0;
    kinetic_half(u.v, dt, &grad);
    u.time += dt;
    return grad;
}

double SplitStepper::energy(const CartesianField& u) const {
    std::vector<Complex> v = u.v;
    double grad = 0.0;
    kinetic_half(v, 0.0, &grad);

    const double p_exp = 2.0 + 4.0 / cfg_.dimension;
    const double vol = u.cell_volume();
    double pot_p = 0.0;
    for (const auto& z : u.v) pot_p += std::pow(std::abs(z), p_exp);
    pot_p *= vol;

    double hartree = 0.0;
    if (cfg_.hartree_on) {
        std::vector<double> density(u.v.size()), pot;
        for (std::size_t i = 0; i < u.v.size(); ++i) density[i] = std::norm(u.v[i]);
        conv_->apply(density, pot);
        for (std::size_t i = 0; i < u.v.size(); ++i) hartree += pot[i] * density[i];
        hartree *= 0.25 * vol;
    }
    // energy sign convention opposes the equation's Hartree sign
    return 0.5 * grad * grad - pot_p / p_exp - cfg_.hartree_sign * hartree;
}

double mass(const CartesianField& u) { return box_mass(u); }

double energy(const CartesianField& u, const SimConfig& cfg) {
    SplitStepper st(cfg);
    return st.energy(u);
}

Trajectory run(const SimConfig& cfg, CartesianField initial, const TrackCallback& tracker) {
    SplitStepper st(cfg);
    Trajectory traj;
    CartesianField& u = initial;

    traj.mass_initial = mass(u);
    traj.energy_initial = st.energy(u);
    const double grad0 = st.grad_norm(u);

    double s = cfg.s_init;
    double lambda_tilde =
        cfg.grad_norm_ref > 0.0 && grad0 > 0.0 ? cfg.grad_norm_ref / grad0 : 1.0;
    TrackSample last_track;
    double grad = grad0;
    double max_energy_drift = 0.0, max_mass_drift = 0.0;
    double next_diag_s = s;

    auto emit = [&](bool with_track) {
        if (with_track && tracker) {
            TrackSample ts = tracker(u, s);
            if (ts.valid) {
                last_track = ts;
                lambda_tilde = ts.lambda;
            }
        }
        DiagnosticsRow row;
        row.t = u.time;
        row.s = s;
        row.mass = mass(u);
        row.energy = st.energy(u);
        row.lambda = lambda_tilde;
        row.b = last_track.b;
        row.gamma = last_track.gamma;
        row.eps_h1 = last_track.eps_h1;
        row.grad_norm = grad;
        traj.rows.push_back(row);
        max_mass_drift = std::max(max_mass_drift,
                                  std::abs(row.mass - traj.mass_initial) / traj.mass_initial);
        if (traj.energy_initial != 0.0)
            max_energy_drift =
                std::max(max_energy_drift, std::abs(row.energy - traj.energy_initial) /
                                               std::abs(traj.energy_initial));
    };

    emit(true);
    double last_emit_s = s;
    while (true) {
        if (u.time >= cfg.stop_t_end - 1e-15) {
            traj.stop_reason = "t_end";
            break;
        }
        if (cfg.stop_lambda_min > 0.0 && lambda_tilde <= cfg.stop_lambda_min) {
            traj.stop_reason = "lambda_min";
            break;
        }
        const double core_width = 2.0 * cfg.core_half_radius * lambda_tilde;
        if (core_width < 16.0 * u.spacing()) {
            traj.stop_reason = "resolution";
            break;
        }
        if (traj.steps >= cfg.max_steps) {
            traj.stop_reason = "max_steps";
            break;
        }

        double dt = std::clamp(cfg.c_dt * lambda_tilde * lambda_tilde, cfg.dt_min, cfg.dt_max);
        if (std::isfinite(cfg.stop_t_end)) dt = std::min(dt, cfg.stop_t_end - u.time);
        grad = st.step(u, dt);
        s += dt / (lambda_tilde * lambda_tilde);
        ++traj.steps;

        if (!tracker && cfg.grad_norm_ref > 0.0 && grad > 0.0)
            lambda_tilde = cfg.grad_norm_ref / grad;
        traj.max_grad_ratio = std::max(traj.max_grad_ratio, grad / grad0);

        if (s >= next_diag_s + cfg.diag_cadence_s - 1e-12) {
            next_diag_s = s;
            emit(true);
            last_emit_s = s;
            if (boundary_mass_fraction(u) > cfg.boundary_mass_threshold) {
                traj.stop_reason = "boundary";
                break;
            }
        }
    }
    if (s > last_emit_s + 1e-12) emit(true);
    traj.final_state = u;
    traj.mass_drift_rel = max_mass_drift;
    traj.energy_drift_rel = max_energy_drift;
    return traj;
}

CartesianField sample_radial_to_box(const RadialField& f, int dimension, double extent,
                                    int cells, double shift) {
    RadialEvaluator eval(f);
    CartesianField out = make_cartesian_field(dimension, extent, cells);
    if (dimension == 1) {
        for (int i = 0; i < cells; ++i) out.v[i] = eval(std::abs(out.coord(i) - shift));
    } else {
        for (int i = 0; i < cells; ++i)
            for (int j = 0; j < cells; ++j)
                out.v[static_cast<std::size_t>(i) * cells + j] =
                    eval(std::hypot(out.coord(i) - shift, out.coord(j)));
    }
    return out;
}

}  // namespace hnls
