#include "hnls/profile.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <tuple>

#include "hnls/errors.hpp"

namespace hnls {

namespace {

constexpr int kMaxTruncation = 2;

using Vec = std::vector<Complex>;

// Polynomial in the formal variables (b, ell = lambda^alpha) with node-value
// coefficient fields. Truncated multiplication: powers only ascend, so kept
// coefficients stay exact.
class FieldSeries {
public:
    FieldSeries(int max_b, int max_ell, int nodes)
        : max_b_(max_b), max_ell_(max_ell), nodes_(nodes),
          slots_(static_cast<std::size_t>((max_b + 1) * (max_ell + 1))) {}

    int max_b() const { return max_b_; }
    int max_ell() const { return max_ell_; }
    int nodes() const { return nodes_; }

    bool has(int p, int q) const {
        return in_range(p, q) && !slots_[idx(p, q)].empty();
    }
    const Vec* get(int p, int q) const {
        if (!has(p, q)) return nullptr;
        return &slots_[idx(p, q)];
    }
    // out-of-range additions are silently truncated
    void add(int p, int q, const Vec& f, Complex scale) {
        if (!in_range(p, q)) return;
        Vec& slot = slots_[idx(p, q)];
        if (slot.empty()) slot.assign(nodes_, Complex(0.0, 0.0));
        for (int i = 0; i < nodes_; ++i) slot[i] += scale * f[i];
    }
    template <typename Fn>
    void for_each(Fn&& fn) const {  // fn(p, q, const Vec&)
        for (int p = 0; p <= max_b_; ++p)
            for (int q = 0; q <= max_ell_; ++q)
                if (has(p, q)) fn(p, q, slots_[idx(p, q)]);
    }

    FieldSeries conjugated() const {
        FieldSeries out(max_b_, max_ell_, nodes_);
        for_each([&](int p, int q, const Vec& f) {
            Vec c(f.size());
            for (std::size_t i = 0; i < f.size(); ++i) c[i] = std::conj(f[i]);
            out.add(p, q, c, 1.0);
        });
        return out;
    }

    FieldSeries product(const FieldSeries& other) const {
        FieldSeries out(max_b_, max_ell_, nodes_);
        for_each([&](int pa, int qa, const Vec& fa) {
            other.for_each([&](int pb, int qb, const Vec& fb) {
                if (pa + pb > max_b_ || qa + qb > max_ell_) return;
                Vec prod(fa.size());
                for (std::size_t i = 0; i < fa.size(); ++i) prod[i] = fa[i] * fb[i];
                out.add(pa + pb, qa + qb, prod, 1.0);
            });
        });
        return out;
    }

private:
    bool in_range(int p, int q) const { return p >= 0 && q >= 0 && p <= max_b_ && q <= max_ell_; }
    std::size_t idx(int p, int q) const {
        return static_cast<std::size_t>(p * (max_ell_ + 1) + q);
    }
    int max_b_, max_ell_, nodes_;
    std::vector<Vec> slots_;
};

struct ThetaTerm {
    int p, q;
    double beta;
};

Vec lap_minus_one(const RadialGrid& g, const Vec& f) {
    RadialField tmp;
    tmp.grid = std::shared_ptr<const RadialGrid>(&g, [](const RadialGrid*) {});
    tmp.v = f;
    RadialField lap = laplacian_fd(tmp);
    Vec out(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = lap.v[i] - f[i];
    return out;
}

// T = i dP/ds + (lap - 1) P + f(P) + ell (K * |P|^2) P + theta |y|^2/4 P,
// with dP/ds along the ideal flow treated formally.
FieldSeries equation_series(const FieldSeries& P, const std::vector<ThetaTerm>& theta,
                            const GroundStateBundle& bundle, const RieszKernel& kernel,
                            double alpha) {
    const auto& g = *bundle.grid;
    const int n = g.nodes();
    FieldSeries T(P.max_b(), P.max_ell(), n);

    // i dP/ds: d(b^p ell^q)/ds = p b^{p-1} theta ell^q - (p + q alpha) b^{p+1} ell^q
    P.for_each([&](int p, int q, const Vec& f) {
        if (p == 0 && q == 0) return;
        T.add(p + 1, q, f, Complex(0.0, -(p + q * alpha)));
        if (p >= 1)
            for (const auto& th : theta)
                T.add(p - 1 + th.p, q + th.q, f, Complex(0.0, p * th.beta));
    });

    // (lap - 1) P
    P.for_each([&](int p, int q, const Vec& f) { T.add(p, q, lap_minus_one(g, f), 1.0); });

    // |P|^2 as a series (real coefficients up to round-off)
    const FieldSeries PP = P.product(P.conjugated());

    // f(P) = Q^{4/N} (1 + u)^{2/N} P with u = (|P|^2 - Q^2)/Q^2
    {
        FieldSeries u(P.max_b(), P.max_ell(), n);
        Vec q2(n);
        for (int i = 0; i < n; ++i) q2[i] = bundle.Q.v[i] * bundle.Q.v[i];
        PP.for_each([&](int p, int q, const Vec& f) {
            Vec scaled(f.size());
            for (int i = 0; i < n; ++i) {
                const double qq = q2[i].real();
                scaled[i] = (qq > 1e-250) ? (f[i] - (p == 0 && q == 0 ? q2[i] : Complex(0.0, 0.0))) / qq
                                          : Complex(0.0, 0.0);
            }
            u.add(p, q, scaled, 1.0);
        });
        // binomial series of (1 + u)^{2/N}; u carries at least one power of ell
        const double expnt = 2.0 / g.dimension;
        FieldSeries bin(P.max_b(), P.max_ell(), n);
        Vec ones(n, Complex(1.0, 0.0));
        bin.add(0, 0, ones, 1.0);
        FieldSeries upow = u;
        double coef = 1.0;
        for (int m = 1; m <= P.max_ell(); ++m) {
            coef *= (expnt - (m - 1)) / m;
            if (coef != 0.0)
                upow.for_each([&](int p, int q, const Vec& f) { bin.add(p, q, f, coef); });
            if (m < P.max_ell()) upow = upow.product(u);
        }
        FieldSeries fP = bin.product(P);
        fP.for_each([&](int p, int q, const Vec& f) {
            Vec scaled(f.size());
            for (int i = 0; i < n; ++i)
                scaled[i] = f[i] * std::pow(std::abs(bundle.Q.v[i].real()), 4.0 / g.dimension);
            T.add(p, q, scaled, 1.0);
        });
    }

    // ell (K * |P|^2) P
    {
        FieldSeries H(P.max_b(), P.max_ell(), n);
        PP.for_each([&](int p, int q, const Vec& f) {
            RadialField dens(bundle.grid);
            for (int i = 0; i < n; ++i) dens.v[i] = f[i].real();
            RadialField pot = conv_radial(dens, kernel);
            H.add(p, q, pot.v, 1.0);
        });
        const FieldSeries HP = H.product(P);
        HP.for_each([&](int p, int q, const Vec& f) { T.add(p, q + 1, f, 1.0); });
    }

    // theta |y|^2/4 P
    P.for_each([&](int p, int q, const Vec& f) {
        Vec scaled(f.size());
        for (int i = 0; i < n; ++i) scaled[i] = 0.25 * g.r[i] * g.r[i] * f[i];
        for (const auto& th : theta) T.add(p + th.p, q + th.q, scaled, th.beta);
    });

    return T;
}

RadialField series_coeff_real(const FieldSeries& T, int p, int q,
                              std::shared_ptr<const RadialGrid> grid, double* imag_leak) {
    RadialField out(grid);
    if (const Vec* f = T.get(p, q)) {
        double leak = 0.0;
        for (int i = 0; i < out.nodes(); ++i) {
            out.v[i] = (*f)[i].real();
            leak = std::max(leak, std::abs((*f)[i].imag()));
        }
        if (imag_leak) *imag_leak = std::max(*imag_leak, leak);
    }
    return out;
}

RadialField series_coeff_imag(const FieldSeries& T, int p, int q,
                              std::shared_ptr<const RadialGrid> grid, double* real_leak) {
    RadialField out(grid);
    if (const Vec* f = T.get(p, q)) {
        double leak = 0.0;
        for (int i = 0; i < out.nodes(); ++i) {
            out.v[i] = (*f)[i].imag();
            leak = std::max(leak, std::abs((*f)[i].real()));
        }
        if (real_leak) *real_leak = std::max(*real_leak, leak);
    }
    return out;
}

void warn_validity_cone(double lambda, double b, double alpha, const char* where) {
    if (b * b + std::pow(lambda, alpha) > 0.1) {
        static bool warned = false;
        if (!warned) {
            std::fprintf(stderr, "[hnls] %s: (lambda, b) = (%g, %g) outside the validity cone "
                                 "b^2 + lambda^alpha <= 0.1\n", where, lambda, b);
            warned = true;
        }
    }
}

double canonical_phase(double gamma) {
    // gamma enters only through e^{i gamma}; reduce to [0, 2 pi) and snap to a
    // 2^-44 grid so that gamma and gamma + 2 pi k give identical samples.
    long double g = fmodl(static_cast<long double>(gamma), 2.0L * M_PIl);
    if (g < 0.0L) g += 2.0L * M_PIl;
    const long double scale = 17592186044416.0L;  // 2^44
    return static_cast<double>(nearbyintl(g * scale) / scale);
}

}  // namespace

S00Result solve_S00(const GroundStateBundle& bundle, const RieszKernel& kernel) {
    if (bundle.grid->dimension != kernel.dimension)
        throw UsageError("solve_S00: kernel dimension mismatch");
    const int n = bundle.grid->nodes();
    const double sigma = kernel.sigma;
    const double alpha = 2.0 - 2.0 * sigma;

    // Hartree source (K * Q^2) Q
    RadialField q2(bundle.grid);
    for (int i = 0; i < n; ++i) q2.v[i] = bundle.Q.v[i] * bundle.Q.v[i];
    RadialField pot = conv_radial(q2, kernel);
    RadialField source(bundle.grid);
    for (int i = 0; i < n; ++i) source.v[i] = pot.v[i].real() * bundle.Q.v[i];

    S00Result res;
    res.beta = 2.0 * sigma * inner(source, bundle.Q) / bundle.variance_sq;

    RadialField rhs(bundle.grid);
    for (int i = 0; i < n; ++i) rhs.v[i] = 0.25 * res.beta * bundle.r2Q.v[i] + source.v[i];

    LinearizedSolver plus(bundle, LinearizedSolver::Kind::Plus);
    // With the printed beta the orthogonality (P+, Q)_2 = 0 holds analytically;
    // the bordered solve closes the residual discretization leaves behind and
    // reports it through the multiplier.
    res.p_plus = plus.solve_orthogonal(rhs, &res.mu);

    RadialField rhs_minus(bundle.grid);
    for (int i = 0; i < n; ++i) rhs_minus.v[i] = -alpha * res.p_plus.v[i];
    res.solvability_residual = std::abs(inner(rhs_minus, bundle.Q));
    if (res.solvability_residual > 1e-6 * bundle.mass_sq)
        throw SolverError("solve_S00: L- source not orthogonal to Q (beta miscomputed?)");

    LinearizedSolver minus(bundle, LinearizedSolver::Kind::Minus);
    res.p_minus = minus.solve_orthogonal(rhs_minus);
    return res;
}

ProfileCoeffs solve_profile(const GroundStateBundle& bundle, const RieszKernel& kernel, int K) {
    if (K < 0) throw UsageError("solve_profile: K must be nonnegative");
    if (K > kMaxTruncation)
        throw UsageError("solve_profile: truncation cap exceeded (K <= 2)");
    if (bundle.grid->dimension != kernel.dimension)
        throw UsageError("solve_profile: kernel dimension mismatch");

    const int n = bundle.grid->nodes();
    ProfileCoeffs c;
    c.truncation = K;
    c.sigma = kernel.sigma;
    c.alpha = 2.0 - 2.0 * kernel.sigma;
    c.grid = bundle.grid;
    c.kernel = kernel;
    c.Q = bundle.Q;
    c.variance_sq = bundle.variance_sq;
    c.mass_sq = bundle.mass_sq;
    c.p_plus.assign(K + 1, std::vector<RadialField>(K + 1));
    c.p_minus.assign(K + 1, std::vector<RadialField>(K + 1));
    c.beta.assign(K + 1, std::vector<double>(K + 1, 0.0));
    c.solvability_residual.assign(K + 1, std::vector<double>(K + 1, 0.0));
    c.decay_ok.assign(K + 1, std::vector<int>(K + 1, 0));

    LinearizedSolver plus(bundle, LinearizedSolver::Kind::Plus);
    LinearizedSolver minus(bundle, LinearizedSolver::Kind::Minus);
    RadialField A(bundle.grid);  // L+ A = r^2 Q / 4, reusing rho
    for (int i = 0; i < n; ++i) A.v[i] = 0.25 * bundle.rho.v[i];
    const double innerAQ = inner(A, bundle.Q);

    const int max_b = 2 * K + 1, max_ell = K + 1;
    FieldSeries P(max_b, max_ell, n);
    P.add(0, 0, bundle.Q.v, 1.0);
    std::vector<ThetaTerm> theta;

    for (int k = 0; k <= K; ++k) {
        for (int j = 0; j + k <= K; ++j) {
            const double csys = (k + 1) * c.alpha + 2 * j;
            RadialField Pp(bundle.grid), Pm(bundle.grid);
            double beta_jk = 0.0;
            if (j == 0 && k == 0) {
                S00Result s = solve_S00(bundle, kernel);
                Pp = s.p_plus;
                Pm = s.p_minus;
                beta_jk = s.beta;
                c.mu00 = s.mu;
                c.solvability_residual[0][0] = s.solvability_residual;
            } else {
                FieldSeries T = equation_series(P, theta, bundle, kernel, c.alpha);
                RadialField Fp = series_coeff_real(T, 2 * j, k + 1, bundle.grid,
                                                   &c.structure_residual);
                RadialField Fm = series_coeff_imag(T, 2 * j + 1, k + 1, bundle.grid,
                                                   &c.structure_residual);
                RadialField B = plus.solve(Fp);
                beta_jk = (inner(Fm, bundle.Q) / csys - inner(B, bundle.Q)) / innerAQ;
                for (int i = 0; i < n; ++i) Pp.v[i] = beta_jk * A.v[i] + B.v[i];
                RadialField rhs_minus(bundle.grid);
                for (int i = 0; i < n; ++i) rhs_minus.v[i] = Fm.v[i] - csys * Pp.v[i];
                c.solvability_residual[j][k] = std::abs(inner(rhs_minus, bundle.Q));
                if (c.solvability_residual[j][k] > 1e-6 * bundle.mass_sq)
                    throw SolverError("solve_profile: L- solvability residual above tolerance");
                Pm = minus.solve_orthogonal(rhs_minus);
            }
            c.p_plus[j][k] = Pp;
            c.p_minus[j][k] = Pm;
            c.beta[j][k] = beta_jk;
            c.decay_ok[j][k] =
                decay_check(Pp, bundle.Q).pass && decay_check(Pm, bundle.Q).pass ? 1 : 0;
            P.add(2 * j, k + 1, Pp.v, 1.0);
            P.add(2 * j + 1, k + 1, Pm.v, Complex(0.0, 1.0));
            theta.push_back({2 * j, k + 1, beta_jk});
        }
    }
    return c;
}

double theta_of(const ProfileCoeffs& c, double lambda, double b) {
    double acc = 0.0;
    for (int j = 0; j <= c.truncation; ++j)
        for (int k = 0; j + k <= c.truncation; ++k)
            acc += c.beta[j][k] * std::pow(b, 2 * j) * std::pow(lambda, (k + 1) * c.alpha);
    return acc;
}

RadialField assemble_profile(const ProfileCoeffs& c, double lambda, double b) {
    if (lambda <= 0.0) throw UsageError("assemble_profile: lambda must be positive");
    warn_validity_cone(lambda, b, c.alpha, "assemble_profile");
    RadialField P = c.Q;
    for (int j = 0; j <= c.truncation; ++j)
        for (int k = 0; j + k <= c.truncation; ++k) {
            const double le = std::pow(lambda, (k + 1) * c.alpha);
            const double cr = std::pow(b, 2 * j) * le;
            const double ci = std::pow(b, 2 * j + 1) * le;
            for (int i = 0; i < P.nodes(); ++i)
                P.v[i] += cr * c.p_plus[j][k].v[i] + Complex(0.0, ci) * c.p_minus[j][k].v[i];
        }
    return P;
}

ProfileResidual profile_residual(const ProfileCoeffs& c, double lambda, double b,
                                 double eps_weight) {
    const auto& g = *c.grid;
    const int n = g.nodes();
    const int N = g.dimension;
    const double decay = exp_decay_rate(c.Q);
    if (eps_weight >= decay)
        throw UsageError("profile_residual: weight exponent must stay below the decay rate of Q");

    const double th = theta_of(c, lambda, b);
    const double lambda_s = -b * lambda;
    const double b_s = th - b * b;

    RadialField P = assemble_profile(c, lambda, b);
    RadialField dPds(c.grid);
    for (int j = 0; j <= c.truncation; ++j)
        for (int k = 0; j + k <= c.truncation; ++k) {
            const double ka = (k + 1) * c.alpha;
            const double le = std::pow(lambda, ka);
            // d/ds [ b^{2j} lam^{ka} ] and d/ds [ b^{2j+1} lam^{ka} ]
            const double dr = (j > 0 ? 2 * j * std::pow(b, 2 * j - 1) * b_s * le : 0.0) +
                              std::pow(b, 2 * j) * ka * le / lambda * lambda_s;
            const double di = (2 * j + 1) * std::pow(b, 2 * j) * b_s * le +
                              std::pow(b, 2 * j + 1) * ka * le / lambda * lambda_s;
            for (int i = 0; i < n; ++i)
                dPds.v[i] += dr * c.p_plus[j][k].v[i] + Complex(0.0, di) * c.p_minus[j][k].v[i];
        }

    RadialField dens(c.grid);
    for (int i = 0; i < n; ++i) dens.v[i] = std::norm(P.v[i]);
    RadialField pot = conv_radial(dens, c.kernel);
    RadialField lap = laplacian_spectral(P);
    const double ell = std::pow(lambda, c.alpha);

    ProfileResidual out;
    out.psi = RadialField(c.grid);
    for (int i = 0; i < n; ++i) {
        const Complex p = P.v[i];
        const Complex fp = std::pow(std::abs(p), 4.0 / N) * p;
        out.psi.v[i] = Complex(0.0, 1.0) * dPds.v[i] + lap.v[i] - p + fp +
                       ell * pot.v[i].real() * p + th * 0.25 * g.r[i] * g.r[i] * p;
    }
    RadialField dpsi = derivative_spectral(out.psi);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double wgt = std::exp(2.0 * eps_weight * g.r[i]);
        acc += g.w[i] * wgt * (std::norm(out.psi.v[i]) + std::norm(dpsi.v[i]));
    }
    out.weighted_h1 = std::sqrt(acc);
    return out;
}

CartesianField rescale_profile(const ProfileCoeffs& c, double lambda, double b, double gamma,
                               int dimension, double extent, int cells) {
    if (lambda <= 0.0) throw UsageError("rescale_profile: lambda must be positive");
    RadialField P = assemble_profile(c, lambda, b);

    const double h = extent / cells;
    const double core_width = 2.0 * half_max_radius(P) * lambda;
    if (core_width < 16.0 * h) {
        const int suggested = 1 << static_cast<int>(
            std::ceil(std::log2(16.0 * extent / core_width)));
        std::ostringstream msg;
        msg << "rescale_profile: core width " << core_width << " spans fewer than 16 cells (h = "
            << h << "); suggest cells >= " << suggested << " or extent <= "
            << extent * core_width / (16.0 * h);
        throw ResolutionError(msg.str());
    }

    RadialEvaluator eval(P);
    CartesianField out = make_cartesian_field(dimension, extent, cells);
    const double amp = std::pow(lambda, -0.5 * dimension);
    const double gq = canonical_phase(gamma);
    const double phase_curv = -b / (4.0 * lambda * lambda);
    if (dimension == 1) {
        for (int i = 0; i < cells; ++i) {
            const double x = out.coord(i);
            const Complex ph = std::exp(Complex(0.0, phase_curv * x * x + gq));
            out.v[i] = amp * eval(std::abs(x) / lambda) * ph;
        }
    } else {
        for (int i = 0; i < cells; ++i)
            for (int jx = 0; jx < cells; ++jx) {
                const double x = out.coord(i), y = out.coord(jx);
                const double r2 = x * x + y * y;
                const Complex ph = std::exp(Complex(0.0, phase_curv * r2 + gq));
                out.v[static_cast<std::size_t>(i) * cells + jx] =
                    amp * eval(std::sqrt(r2) / lambda) * ph;
            }
    }
    return out;
}

double profile_mass(const ProfileCoeffs& c, double lambda, double b) {
    RadialField P = assemble_profile(c, lambda, b);
    double acc = 0.0;
    for (int i = 0; i < P.nodes(); ++i) acc += c.grid->w[i] * std::norm(P.v[i]);
    return acc;
}

double profile_energy(const ProfileCoeffs& c, double lambda, double b) {
    const auto& g = *c.grid;
    const int N = g.dimension;
    RadialField P = assemble_profile(c, lambda, b);
    RadialField dP = derivative_spectral(P);
    const double p_exp = 2.0 + 4.0 / N;
    double grad_sq = 0.0, pot_p = 0.0;
    for (int i = 0; i < P.nodes(); ++i) {
        const double r = g.r[i];
        const Complex z = P.v[i], dz = dP.v[i];
        grad_sq += g.w[i] * (std::norm(dz) + 0.25 * b * b * r * r * std::norm(z) -
                             b * r * std::imag(dz * std::conj(z)));
        pot_p += g.w[i] * std::pow(std::abs(z), p_exp);
    }
    const double G = G_radial(P, c.kernel);
    return (0.5 * grad_sq - pot_p / p_exp) / (lambda * lambda) -
           std::pow(lambda, c.alpha - 2.0) * G;
}

EnergyExpansionCheck energy_expansion_check(const ProfileCoeffs& c, double lambda, double b) {
    warn_validity_cone(lambda, b, c.alpha, "energy_expansion_check");
    EnergyExpansionCheck out;
    out.lhs = 8.0 * profile_energy(c, lambda, b);
    out.rhs = c.variance_sq * (b * b / (lambda * lambda) -
                               2.0 * c.beta[0][0] / (2.0 - c.alpha) *
                                   std::pow(lambda, c.alpha - 2.0));
    out.gap = std::abs(out.lhs - out.rhs);
    return out;
}

DecayFit decay_check(const RadialField& f, const RadialField& Q) {
    DecayFit fit;
    const double q0 = std::abs(Q.v[0]);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    std::vector<std::pair<double, double>> pts;
    for (int i = 0; i < f.nodes(); ++i) {
        const double q = std::abs(Q.v[i]);
        const double a = std::abs(f.v[i]);
        if (q < 1e-8 * q0 || a <= 0.0) continue;
        const double x = std::log1p(f.grid->r[i]);
        const double y = std::log(a / q);
        pts.emplace_back(x, y);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++count;
    }
    if (count < 16) return fit;
    const double denom = count * sxx - sx * sx;
    double slope = (count * sxy - sx * sy) / denom;
    slope = std::max(slope, 0.0);
    const double intercept = (sy - slope * sx) / count;
    double worst = 0.0;
    for (const auto& [x, y] : pts) worst = std::max(worst, y - (intercept + slope * x));
    fit.kappa = slope;
    fit.C = std::exp(intercept + worst);
    fit.pass = (slope <= 20.0) && (worst <= std::log(50.0));
    return fit;
}

ProfileCoeffs resample_coeffs(const ProfileCoeffs& c, std::shared_ptr<const RadialGrid> target) {
    ProfileCoeffs out = c;
    out.grid = target;
    out.Q = resample(c.Q, target);
    for (int j = 0; j <= c.truncation; ++j)
        for (int k = 0; j + k <= c.truncation; ++k) {
            out.p_plus[j][k] = resample(c.p_plus[j][k], target);
            out.p_minus[j][k] = resample(c.p_minus[j][k], target);
        }
    return out;
}

}  // namespace hnls
