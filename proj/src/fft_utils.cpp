#include "hnls/fft_utils.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace hnls::fft {

namespace {

// FFTW's planner is not thread safe; executions on distinct buffers are.
std::mutex planner_mutex;

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

fftw_plan get_plan_1d(std::size_t n, int sign) {
    static std::map<std::size_t, PlanPair> cache;
    std::lock_guard<std::mutex> lock(planner_mutex);
    auto& entry = cache[n];
    fftw_plan& plan = (sign == FFTW_FORWARD) ? entry.fwd : entry.bwd;
    if (!plan) {
        // Dummy buffer just for planning; FFTW_ESTIMATE keeps plans
        // deterministic run-to-run.
        std::vector<std::complex<double>> buf(n);
        auto* p = reinterpret_cast<fftw_complex*>(buf.data());
        plan = fftw_plan_dft_1d(static_cast<int>(n), p, p, sign,
                                FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    return plan;
}

fftw_plan get_plan_2d(std::size_t n0, std::size_t n1, int sign) {
    static std::map<std::pair<std::size_t, std::size_t>, PlanPair> cache;
    std::lock_guard<std::mutex> lock(planner_mutex);
    auto& entry = cache[{n0, n1}];
    fftw_plan& plan = (sign == FFTW_FORWARD) ? entry.fwd : entry.bwd;
    if (!plan) {
        std::vector<std::complex<double>> buf(n0 * n1);
        auto* p = reinterpret_cast<fftw_complex*>(buf.data());
        plan = fftw_plan_dft_2d(static_cast<int>(n0), static_cast<int>(n1), p, p,
                                sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    return plan;
}

}  // namespace

void transform(cvec& data, int sign) {
    if (data.empty()) return;
    const int fsign = (sign < 0) ? FFTW_FORWARD : FFTW_BACKWARD;
    fftw_plan plan = get_plan_1d(data.size(), fsign);
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
    if (fsign == FFTW_BACKWARD) {
        const double inv = 1.0 / static_cast<double>(data.size());
        for (auto& z : data) z *= inv;
    }
}

void transform_2d(cvec& data, std::size_t n0, std::size_t n1, int sign) {
    if (data.size() != n0 * n1) throw std::invalid_argument("transform_2d: size mismatch");
    const int fsign = (sign < 0) ? FFTW_FORWARD : FFTW_BACKWARD;
    fftw_plan plan = get_plan_2d(n0, n1, fsign);
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
    if (fsign == FFTW_BACKWARD) {
        const double inv = 1.0 / static_cast<double>(data.size());
        for (auto& z : data) z *= inv;
    }
}

cvec periodic_derivative(const cvec& data, double spacing) {
    const std::size_t n = data.size();
    cvec hat = data;
    transform(hat, -1);
    const double length = spacing * static_cast<double>(n);
    const double dk = 2.0 * M_PI / length;
    for (std::size_t m = 0; m < n; ++m) {
        const double mm = (m <= n / 2) ? static_cast<double>(m)
                                       : static_cast<double>(m) - static_cast<double>(n);
        double k = mm * dk;
        if (2 * m == n) k = 0.0;  // Nyquist mode has no well-defined odd part
        hat[m] *= std::complex<double>(0.0, k);
    }
    transform(hat, +1);
    return hat;
}

cvec upsample_periodic(const cvec& data, int factor) {
    const std::size_t n = data.size();
    if (factor <= 1) return data;
    cvec hat = data;
    transform(hat, -1);
    const std::size_t m = n * static_cast<std::size_t>(factor);
    cvec big(m, {0.0, 0.0});
    const std::size_t half = n / 2;
    for (std::size_t j = 0; j < n; ++j) {
        if (j < half) {
            big[j] = hat[j];
        } else if (j == half && n % 2 == 0) {
            // split the Nyquist mode symmetrically
            big[half] = 0.5 * hat[j];
            big[m - half] = 0.5 * hat[j];
        } else {
            big[m - (n - j)] = hat[j];
        }
    }
    transform(big, +1);
    const double scale = static_cast<double>(factor);
    for (auto& z : big) z *= scale;
    return big;
}

PeriodicInterpolant::PeriodicInterpolant(const cvec& samples, double period, int upsample_factor)
    : period_(period) {
    fine_ = upsample_periodic(samples, upsample_factor);
    fine_spacing_ = period_ / static_cast<double>(fine_.size());
}

std::complex<double> PeriodicInterpolant::operator()(double x) const {
    const std::size_t m = fine_.size();
    double u = std::fmod(x, period_);
    if (u < 0) u += period_;
    const double tau = u / fine_spacing_;
    const long base = static_cast<long>(std::floor(tau)) - 3;  // 8-point stencil
    // Lagrange weights on the uniform stencil base..base+7.
    double t = tau - static_cast<double>(base);
    std::complex<double> acc(0.0, 0.0);
    for (int a = 0; a < 8; ++a) {
        double w = 1.0;
        for (int c = 0; c < 8; ++c) {
            if (c == a) continue;
            w *= (t - static_cast<double>(c)) / static_cast<double>(a - c);
        }
        long idx = (base + a) % static_cast<long>(m);
        if (idx < 0) idx += static_cast<long>(m);
        acc += w * fine_[static_cast<std::size_t>(idx)];
    }
    return acc;
}

PeriodicInterpolant2D::PeriodicInterpolant2D(const cvec& samples, std::size_t n, double period,
                                             int upsample_factor)
    : period_(period) {
    if (samples.size() != n * n)
        throw std::invalid_argument("PeriodicInterpolant2D: size mismatch");
    // zero-pad the 2-D spectrum axis by axis
    cvec hat = samples;
    transform_2d(hat, n, n, -1);
    m_ = n * static_cast<std::size_t>(upsample_factor);
    fine_.assign(m_ * m_, {0.0, 0.0});
    const std::size_t half = n / 2;
    auto dest = [&](std::size_t j) -> std::size_t { return (j < half) ? j : m_ - (n - j); };
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            // halve shared Nyquist rows/columns
            double w = 1.0;
            if (a == half) w *= 0.5;
            if (b == half) w *= 0.5;
            const std::complex<double> val = hat[a * n + b] * w;
            const std::size_t ia = dest(a), ib = dest(b);
            fine_[ia * m_ + ib] += val;
            if (a == half) fine_[(m_ - half) * m_ + ib] += val;
            if (b == half) fine_[ia * m_ + (m_ - half)] += val;
            if (a == half && b == half) fine_[(m_ - half) * m_ + (m_ - half)] += val;
        }
    transform_2d(fine_, m_, m_, +1);
    const double scale = static_cast<double>(upsample_factor) * upsample_factor;
    for (auto& z : fine_) z *= scale;
    fine_spacing_ = period_ / static_cast<double>(m_);
}

std::complex<double> PeriodicInterpolant2D::operator()(double x, double y) const {
    auto reduce = [&](double u) {
        double r = std::fmod(u, period_);
        if (r < 0) r += period_;
        return r / fine_spacing_;
    };
    const double tx = reduce(x), ty = reduce(y);
    const long bx = static_cast<long>(std::floor(tx)) - 2;  // 6-point stencil
    const long by = static_cast<long>(std::floor(ty)) - 2;
    double wx[6], wy[6];
    for (int a = 0; a < 6; ++a) {
        double w1 = 1.0, w2 = 1.0;
        const double ux = tx - static_cast<double>(bx), uy = ty - static_cast<double>(by);
        for (int c = 0; c < 6; ++c) {
            if (c == a) continue;
            w1 *= (ux - c) / static_cast<double>(a - c);
            w2 *= (uy - c) / static_cast<double>(a - c);
        }
        wx[a] = w1;
        wy[a] = w2;
    }
    std::complex<double> acc(0.0, 0.0);
    for (int a = 0; a < 6; ++a) {
        long ia = (bx + a) % static_cast<long>(m_);
        if (ia < 0) ia += static_cast<long>(m_);
        std::complex<double> rowacc(0.0, 0.0);
        for (int c = 0; c < 6; ++c) {
            long ib = (by + c) % static_cast<long>(m_);
            if (ib < 0) ib += static_cast<long>(m_);
            rowacc += wy[c] * fine_[static_cast<std::size_t>(ia) * m_ + ib];
        }
        acc += wx[a] * rowacc;
    }
    return acc;
}

}  // namespace hnls::fft
