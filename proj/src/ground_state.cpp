#include "hnls/ground_state.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <sstream>

#include "hnls/errors.hpp"

namespace hnls {

namespace {

// (-lap + 1)^{-1} through the even-extension transform; N = 1 only.
RadialField apply_minv_spectral(const RadialField& f) {
    const auto& g = *f.grid;
    fft::cvec ext = even_extension(f);
    fft::transform(ext, -1);
    const std::size_t m = ext.size();
    const double dk = 2.0 * M_PI / (2.0 * g.extent);
    for (std::size_t j = 0; j < m; ++j) {
        const double mm = (j <= m / 2) ? static_cast<double>(j)
                                       : static_cast<double>(j) - static_cast<double>(m);
        const double k = mm * dk;
        ext[j] /= (1.0 + k * k);
    }
    fft::transform(ext, +1);
    RadialField out(f.grid);
    for (int i = 0; i < f.nodes(); ++i) out.v[i] = ext[i];
    return out;
}

RadialField apply_m_spectral(const RadialField& f) {
    RadialField lap = laplacian_spectral(f);
    RadialField out(f.grid);
    for (int i = 0; i < f.nodes(); ++i) out.v[i] = -lap.v[i] + f.v[i];
    return out;
}

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Rows of (-lap_fd + 1 - V) with even reflection at r=0 and Dirichlet at R.
void operator_triplets(const RadialGrid& g, const std::vector<double>& V,
                       std::vector<Triplet>& trip) {
    const int n = g.nodes();
    const double h = g.spacing;
    const int N = g.dimension;
    trip.emplace_back(0, 0, 2.0 * N / (h * h) + 1.0 - V[0]);
    trip.emplace_back(0, 1, -2.0 * N / (h * h));
    for (int i = 1; i < n - 1; ++i) {
        const double a = static_cast<double>(N - 1) / (2.0 * h * g.r[i]);
        trip.emplace_back(i, i - 1, -(1.0 / (h * h) - a));
        trip.emplace_back(i, i, 2.0 / (h * h) + 1.0 - V[i]);
        trip.emplace_back(i, i + 1, -(1.0 / (h * h) + a));
    }
    trip.emplace_back(n - 1, n - 1, 1.0);  // Dirichlet row
}

// b - A x accumulated in long double (the inputs are exact in long double, so
// this evaluates the true residual of the stored solution without the
// ulp/h^2 cancellation floor of a double-precision stencil).
Eigen::VectorXd residual_ld(const SpMat& A, const Eigen::VectorXd& x, const Eigen::VectorXd& b) {
    std::vector<long double> acc(static_cast<std::size_t>(b.size()));
    for (Eigen::Index i = 0; i < b.size(); ++i) acc[i] = static_cast<long double>(b[i]);
    for (int col = 0; col < A.outerSize(); ++col)
        for (SpMat::InnerIterator it(A, col); it; ++it)
            acc[it.row()] -= static_cast<long double>(it.value()) * x[col];
    Eigen::VectorXd r(b.size());
    for (Eigen::Index i = 0; i < b.size(); ++i) r[i] = static_cast<double>(acc[i]);
    return r;
}

struct FdOperator {
    SpMat mat;
    Eigen::SparseLU<SpMat> lu;
    void build(const RadialGrid& g, const std::vector<double>& V) {
        std::vector<Triplet> trip;
        operator_triplets(g, V, trip);
        mat.resize(g.nodes(), g.nodes());
        mat.setFromTriplets(trip.begin(), trip.end());
        lu.analyzePattern(mat);
        lu.factorize(mat);
        if (lu.info() != Eigen::Success)
            throw SolverError("radial operator factorization failed; refine the grid");
    }
    std::vector<double> solve(const std::vector<double>& rhs) const {
        Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), rhs.size());
        b[rhs.size() - 1] = 0.0;
        Eigen::VectorXd x = lu.solve(b);
        x += lu.solve(residual_ld(mat, x, b));  // one refinement step
        return std::vector<double>(x.data(), x.data() + x.size());
    }
};

std::vector<double> potential_for(const GroundStateBundle& b, LinearizedSolver::Kind kind) {
    const double coef =
        (kind == LinearizedSolver::Kind::Plus) ? 1.0 + 4.0 / b.grid->dimension : 1.0;
    std::vector<double> V(b.q_pow_4n.size());
    for (std::size_t i = 0; i < V.size(); ++i) V[i] = coef * b.q_pow_4n[i];
    return V;
}

}  // namespace

double shooting_ground_state(int dimension, double r_max, double* mass_sq_out) {
    const int N = dimension;
    const double p = 1.0 + 4.0 / N;
    const double h = 5e-4;
    const double area = RadialGrid::sphere_area(N);

    // 0 = undershoot (u turns back up), 1 = overshoot (u crosses zero)
    auto classify = [&](double a, double* mass) -> int {
        double r = h;
        // series start: u''(0) = (a - a^p)/N
        const double upp0 = (a - std::pow(a, p)) / N;
        double u = a + 0.5 * upp0 * r * r;
        double du = upp0 * r;
        // trapezoid accumulation of omega_N r^{N-1} u^2
        double prev_f = (N == 1) ? a * a : 0.0;
        double m = 0.5 * (prev_f + std::pow(r, N - 1) * u * u) * h;
        prev_f = std::pow(r, N - 1) * u * u;
        auto f = [&](double rr, double uu, double dd) {
            const double curv = uu - std::pow(std::abs(uu), p - 1.0) * uu;
            return curv - (N - 1) / rr * dd;
        };
        while (r < r_max) {
            const double k1u = du, k1d = f(r, u, du);
            const double k2u = du + 0.5 * h * k1d, k2d = f(r + 0.5 * h, u + 0.5 * h * k1u, du + 0.5 * h * k1d);
            const double k3u = du + 0.5 * h * k2d, k3d = f(r + 0.5 * h, u + 0.5 * h * k2u, du + 0.5 * h * k2d);
            const double k4u = du + h * k3d, k4d = f(r + h, u + h * k3u, du + h * k3d);
            u += h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
            du += h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d);
            r += h;
            if (u <= 0.0) {
                if (mass) *mass = area * m;
                return 1;
            }
            const double cur_f = std::pow(r, N - 1) * u * u;
            m += 0.5 * (prev_f + cur_f) * h;
            prev_f = cur_f;
            if (du > 0.0 && u < 0.9 * a) {
                if (mass) *mass = area * m;
                return 0;
            }
        }
        if (mass) *mass = area * m;
        return 0;
    };

    double lo = 1.0, hi = 1.5;
    while (classify(hi, nullptr) == 0) {
        hi *= 1.5;
        if (hi > 64.0) throw SolverError("shooting_ground_state: no overshoot bracket found");
    }
    while (classify(lo, nullptr) == 1) {
        lo *= 0.7;
        if (lo < 1e-2) throw SolverError("shooting_ground_state: no undershoot bracket found");
    }
    for (int it = 0; it < 64; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (classify(mid, nullptr) == 1)
            hi = mid;
        else
            lo = mid;
    }
    const double a_star = 0.5 * (lo + hi);
    if (mass_sq_out) {
        double m = 0.0;
        classify(lo, &m);  // lo side stays positive over the whole range
        *mass_sq_out = m;
    }
    return a_star;
}

GroundStateBundle solve_ground_state(std::shared_ptr<const RadialGrid> grid, double tol) {
    if (tol <= 0.0) throw UsageError("solve_ground_state: tol must be positive");
    if (grid->extent < 15.0)
        throw UsageError("solve_ground_state: extent too small to resolve Q (need R >= 15)");

    const int N = grid->dimension;
    const int n = grid->nodes();
    const double p = 1.0 + 4.0 / N;
    const double gamma = p / (p - 1.0);
    const bool spectral = (N == 1);

    GroundStateBundle b;
    b.grid = grid;
    b.Q = RadialField(grid);
    for (int i = 0; i < n; ++i) b.Q.v[i] = 1.5 * std::exp(-grid->r[i] * grid->r[i]);

    // (-lap_fd + 1) for the N >= 2 path
    FdOperator minv_fd;
    if (!spectral) {
        std::vector<double> zero(n, 0.0);
        minv_fd.build(*grid, zero);
    }
    auto apply_m = [&](const RadialField& f) {
        if (spectral) return apply_m_spectral(f);
        RadialField lap = laplacian_fd(f);
        RadialField out(grid);
        for (int i = 0; i < n; ++i) out.v[i] = -lap.v[i] + f.v[i];
        return out;
    };
    auto apply_minv = [&](const RadialField& f) {
        if (spectral) return apply_minv_spectral(f);
        std::vector<double> rhs(n);
        for (int i = 0; i < n; ++i) rhs[i] = f.v[i].real();
        auto x = minv_fd.solve(rhs);
        RadialField out(grid);
        for (int i = 0; i < n; ++i) out.v[i] = x[i];
        return out;
    };

    const int max_iter = 2000;
    double residual = 1.0;
    for (int it = 0; it < max_iter; ++it) {
        RadialField G(grid);
        for (int i = 0; i < n; ++i) {
            const double q = b.Q.v[i].real();
            G.v[i] = std::pow(std::abs(q), p - 1.0) * q;
        }
        const RadialField MQ = apply_m(b.Q);
        const double s = inner(MQ, b.Q) / inner(G, b.Q);
        const double sg = std::pow(s, gamma);
        RadialField next = apply_minv(G);
        for (int i = 0; i < n; ++i) next.v[i] = sg * next.v[i].real();
        b.Q = next;

        // M Q_{n+1} = s^gamma Q_n^p by construction of the update, so the
        // stationary residual of the new iterate is s^gamma Q_n^p - Q_{n+1}^p;
        // evaluating it this way avoids the k^2 noise amplification a fresh
        // application of M would add.
        double res_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double q = b.Q.v[i].real();
            const double g = std::pow(std::abs(q), p - 1.0) * q;
            const double d = sg * G.v[i].real() - g;
            res_sq += grid->w[i] * d * d;
        }
        residual = std::sqrt(res_sq);
        b.residual_history.push_back(residual);
        if (residual <= tol && std::abs(s - 1.0) < 1e-12) break;
    }
    if (residual > tol) {
        std::ostringstream msg;
        msg << "solve_ground_state: residual " << residual << " above tol " << tol << " after "
            << max_iter << " iterations";
        throw SolverError(msg.str(), b.residual_history);
    }
    b.equation_residual = residual;

    if (spectral) {
        // The iterate carries ~eps-level noise across the whole spectrum; the
        // true spectrum of Q is below round-off beyond a few hundred modes.
        // Truncating there leaves a smooth tail (the noise would otherwise be
        // amplified by 1/h^2 in every stencil applied to Q downstream).
        fft::cvec ext = even_extension(b.Q);
        fft::transform(ext, -1);
        const std::size_t m = ext.size();
        double peak = 0.0;
        for (const auto& z : ext) peak = std::max(peak, std::abs(z));
        std::size_t last = 0;
        for (std::size_t j = 0; j + 1 <= m / 2; ++j)
            if (std::abs(ext[j]) >= 1e-15 * peak) last = j;
        const std::size_t cut = std::min(m / 2, 2 * last + 8);
        for (std::size_t j = 0; j < m; ++j)
            if (std::min(j, m - j) > cut) ext[j] = 0.0;
        fft::transform(ext, +1);
        for (int i = 0; i < n; ++i) b.Q.v[i] = ext[i].real();

        // re-measure the stationary residual of the stored (filtered) field;
        // safe now, M amplifies nothing beyond the retained band
        const RadialField MQ = apply_m_spectral(b.Q);
        double res_sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double q = b.Q.v[i].real();
            const double d = MQ.v[i].real() - std::pow(std::abs(q), p - 1.0) * q;
            res_sq += grid->w[i] * d * d;
        }
        b.equation_residual = std::sqrt(res_sq);
        if (b.equation_residual > std::max(tol, 1e-11))
            throw SolverError("solve_ground_state: residual grew after spectral truncation",
                              b.residual_history);
    }

    b.q_pow_4n.resize(n);
    for (int i = 0; i < n; ++i)
        b.q_pow_4n[i] = std::pow(std::abs(b.Q.v[i].real()), 4.0 / N);

    b.LambdaQ = apply_lambda(b.Q);
    b.r2Q = RadialField(grid);
    for (int i = 0; i < n; ++i) b.r2Q.v[i] = grid->r[i] * grid->r[i] * b.Q.v[i];

    const FieldNorms nn = norms(b.Q);
    b.mass_sq = nn.l2_sq;
    b.variance_sq = nn.weighted_sq;
    b.grad_sq = nn.grad_sq;

    // independent cross-check against the shooting integration
    double shoot_mass = 0.0;
    shooting_ground_state(N, grid->extent, &shoot_mass);
    b.shooting_gap = std::abs(b.mass_sq - shoot_mass) / b.mass_sq;
    if (b.shooting_gap > 1e-3) {
        std::ostringstream msg;
        msg << "solve_ground_state: shooting cross-check mass gap " << b.shooting_gap
            << " suggests a spurious fixed point";
        throw SolverError(msg.str(), b.residual_history);
    }

    // rho: direct banded solve of L+ rho = r^2 Q (L+ is invertible on radials)
    {
        FdOperator lplus;
        lplus.build(*grid, potential_for(b, LinearizedSolver::Kind::Plus));
        std::vector<double> rhs(n);
        for (int i = 0; i < n; ++i) rhs[i] = b.r2Q.v[i].real();
        auto x = lplus.solve(rhs);
        b.rho = RadialField(grid);
        for (int i = 0; i < n; ++i) b.rho.v[i] = x[i];
        // residual of the interior equations (the last row is the imposed
        // Dirichlet condition), accumulated in long double
        Eigen::VectorXd xv = Eigen::Map<const Eigen::VectorXd>(x.data(), n);
        Eigen::VectorXd bv(n);
        for (int i = 0; i < n; ++i) bv[i] = rhs[i];
        bv[n - 1] = 0.0;
        Eigen::VectorXd res = residual_ld(lplus.mat, xv, bv);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < n - 1; ++i) {
            num += grid->w[i] * res[i] * res[i];
            den += grid->w[i] * std::norm(b.r2Q.v[i]);
        }
        b.rho_residual = std::sqrt(num / den);
        if (!(b.rho_residual < 1e-6))
            throw SolverError("solve_ground_state: rho solve residual too large; refine the grid");
    }
    return b;
}

RadialField apply_lplus(const GroundStateBundle& b, const RadialField& f) {
    assert_same_grid(b.Q, f, "apply_lplus");
    RadialField lap = laplacian_fd(f);
    RadialField out(f.grid);
    const double c = 1.0 + 4.0 / b.grid->dimension;
    for (int i = 0; i < f.nodes(); ++i)
        out.v[i] = -lap.v[i] + f.v[i] - c * b.q_pow_4n[i] * f.v[i];
    return out;
}

RadialField apply_lminus(const GroundStateBundle& b, const RadialField& f) {
    assert_same_grid(b.Q, f, "apply_lminus");
    RadialField lap = laplacian_fd(f);
    RadialField out(f.grid);
    for (int i = 0; i < f.nodes(); ++i)
        out.v[i] = -lap.v[i] + f.v[i] - b.q_pow_4n[i] * f.v[i];
    return out;
}

struct LinearizedSolver::Impl {
    std::shared_ptr<const RadialGrid> grid;
    Kind kind;
    RadialField Q;
    SpMat plain_mat, bordered_mat;
    Eigen::SparseLU<SpMat> plain, bordered;
    bool have_plain = false, have_bordered = false;
    std::vector<double> multiplier_column;
};

LinearizedSolver::LinearizedSolver(const GroundStateBundle& bundle, Kind kind)
    : impl_(new Impl) {
    impl_->grid = bundle.grid;
    impl_->kind = kind;
    impl_->Q = bundle.Q;
    const int n = bundle.grid->nodes();
    const auto V = potential_for(bundle, kind);

    std::vector<Triplet> trip;
    operator_triplets(*bundle.grid, V, trip);
    impl_->plain_mat.resize(n, n);
    impl_->plain_mat.setFromTriplets(trip.begin(), trip.end());
    impl_->plain.analyzePattern(impl_->plain_mat);
    impl_->plain.factorize(impl_->plain_mat);
    impl_->have_plain = (impl_->plain.info() == Eigen::Success);

    // bordered system: [A  m; (wQ)^T  0], multiplier column m as in the header
    impl_->multiplier_column.resize(n);
    for (int i = 0; i < n; ++i) {
        const double base = (kind == Kind::Plus) ? bundle.r2Q.v[i].real() : bundle.Q.v[i].real();
        impl_->multiplier_column[i] = base;
    }
    impl_->multiplier_column[n - 1] = 0.0;  // keep the Dirichlet row exact
    std::vector<Triplet> btrip = trip;
    for (int i = 0; i < n; ++i) {
        if (impl_->multiplier_column[i] != 0.0) btrip.emplace_back(i, n, impl_->multiplier_column[i]);
        const double wq = bundle.grid->w[i] * bundle.Q.v[i].real();
        if (wq != 0.0) btrip.emplace_back(n, i, wq);
    }
    impl_->bordered_mat.resize(n + 1, n + 1);
    impl_->bordered_mat.setFromTriplets(btrip.begin(), btrip.end());
    impl_->bordered.analyzePattern(impl_->bordered_mat);
    impl_->bordered.factorize(impl_->bordered_mat);
    impl_->have_bordered = (impl_->bordered.info() == Eigen::Success);
}

LinearizedSolver::~LinearizedSolver() = default;

RadialField LinearizedSolver::solve(const RadialField& rhs) const {
    if (!impl_->have_plain)
        throw SolverError("LinearizedSolver: plain factorization unavailable (near-singular operator)");
    const int n = impl_->grid->nodes();
    RadialField out(impl_->grid);
    Eigen::VectorXd b(n);
    for (int part = 0; part < 2; ++part) {
        for (int i = 0; i < n; ++i) b[i] = (part == 0) ? rhs.v[i].real() : rhs.v[i].imag();
        b[n - 1] = 0.0;
        Eigen::VectorXd x = impl_->plain.solve(b);
        x += impl_->plain.solve(residual_ld(impl_->plain_mat, x, b));
        for (int i = 0; i < n; ++i)
            out.v[i] += (part == 0) ? Complex(x[i], 0.0) : Complex(0.0, x[i]);
    }
    return out;
}

RadialField LinearizedSolver::solve_orthogonal(const RadialField& rhs, Complex* multiplier) const {
    if (!impl_->have_bordered)
        throw SolverError("LinearizedSolver: bordered factorization failed; refine the grid");
    const int n = impl_->grid->nodes();
    RadialField out(impl_->grid);
    Complex mu(0.0, 0.0);
    Eigen::VectorXd b(n + 1);
    for (int part = 0; part < 2; ++part) {
        for (int i = 0; i < n; ++i) b[i] = (part == 0) ? rhs.v[i].real() : rhs.v[i].imag();
        b[n - 1] = 0.0;
        b[n] = 0.0;
        Eigen::VectorXd x = impl_->bordered.solve(b);
        x += impl_->bordered.solve(residual_ld(impl_->bordered_mat, x, b));
        for (int i = 0; i < n; ++i)
            out.v[i] += (part == 0) ? Complex(x[i], 0.0) : Complex(0.0, x[i]);
        mu += (part == 0) ? Complex(x[n], 0.0) : Complex(0.0, x[n]);
    }
    if (multiplier) *multiplier = mu;
    return out;
}

}  // namespace hnls
