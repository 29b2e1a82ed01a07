#include "hnls/radial.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hnls/errors.hpp"

namespace hnls {

double RadialGrid::sphere_area(int dimension) {
    switch (dimension) {
        case 1: return 2.0;
        case 2: return 2.0 * M_PI;
        case 3: return 4.0 * M_PI;
        default: throw DomainError("sphere_area: dimension must be 1, 2 or 3");
    }
}

std::shared_ptr<const RadialGrid> make_radial_grid(int dimension, double extent, int cells) {
    if (dimension < 1 || dimension > 3)
        throw DomainError("make_radial_grid: dimension must be 1, 2 or 3");
    if (extent <= 0.0) throw UsageError("make_radial_grid: extent must be positive");
    if (cells < 8) throw UsageError("make_radial_grid: need at least 8 cells");

    auto g = std::make_shared<RadialGrid>();
    g->dimension = dimension;
    g->extent = extent;
    g->cells = cells;
    g->spacing = extent / static_cast<double>(cells);
    const int n = cells + 1;
    g->r.resize(n);
    g->w.resize(n);
    const double area = RadialGrid::sphere_area(dimension);
    for (int i = 0; i < n; ++i) {
        g->r[i] = g->spacing * static_cast<double>(i);
        double trap = (i == 0 || i == n - 1) ? 0.5 : 1.0;
        g->w[i] = area * std::pow(g->r[i], dimension - 1) * g->spacing * trap;
    }
    return g;
}

bool RadialField::all_finite() const {
    for (const auto& z : v)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
}

void assert_same_grid(const RadialField& f, const RadialField& g, const char* where) {
    if (f.grid != g.grid) {
        if (!f.grid || !g.grid || f.grid->dimension != g.grid->dimension ||
            f.grid->cells != g.grid->cells || f.grid->extent != g.grid->extent)
            throw UsageError(std::string(where) + ": fields live on different grids");
    }
}

double inner(const RadialField& f, const RadialField& g) {
    assert_same_grid(f, g, "inner");
    double acc = 0.0;
    const auto& w = f.grid->w;
    for (int i = 0; i < f.nodes(); ++i)
        acc += w[i] * (f.v[i].real() * g.v[i].real() + f.v[i].imag() * g.v[i].imag());
    return acc;
}

RadialField derivative_fd(const RadialField& f) {
    const auto& g = *f.grid;
    const int n = f.nodes();
    const double h = g.spacing;
    RadialField d(f.grid);
    // even reflection: f(-h) = f(h)
    d.v[0] = Complex(0.0, 0.0);
    for (int i = 1; i < n - 1; ++i) d.v[i] = (f.v[i + 1] - f.v[i - 1]) / (2.0 * h);
    d.v[n - 1] = (3.0 * f.v[n - 1] - 4.0 * f.v[n - 2] + f.v[n - 3]) / (2.0 * h);
    d.even = false;
    return d;
}

RadialField laplacian_fd(const RadialField& f) {
    const auto& g = *f.grid;
    const int n = f.nodes();
    const double h = g.spacing;
    const int N = g.dimension;
    RadialField out(f.grid);
    // r = 0: lap f = N f''(0), with f(-h) = f(h)
    out.v[0] = static_cast<double>(N) * 2.0 * (f.v[1] - f.v[0]) / (h * h);
    for (int i = 1; i < n - 1; ++i) {
        const Complex d2 = (f.v[i + 1] - 2.0 * f.v[i] + f.v[i - 1]) / (h * h);
        const Complex d1 = (f.v[i + 1] - f.v[i - 1]) / (2.0 * h);
        out.v[i] = d2 + static_cast<double>(N - 1) / g.r[i] * d1;
    }
    // r = R: fields vanish beyond R
    {
        const int i = n - 1;
        const Complex d2 = (-2.0 * f.v[i] + f.v[i - 1]) / (h * h);
        const Complex d1 = (-f.v[i - 1]) / (2.0 * h);
        out.v[i] = d2 + static_cast<double>(N - 1) / g.r[i] * d1;
    }
    return out;
}

RadialField apply_lambda(const RadialField& f) {
    const auto& g = *f.grid;
    RadialField d = derivative_fd(f);
    RadialField out(f.grid);
    const double half_n = 0.5 * static_cast<double>(g.dimension);
    for (int i = 0; i < f.nodes(); ++i) out.v[i] = half_n * f.v[i] + g.r[i] * d.v[i];
    return out;
}

FieldNorms norms(const RadialField& f) {
    FieldNorms out;
    const auto& g = *f.grid;
    RadialField d = derivative_fd(f);
    for (int i = 0; i < f.nodes(); ++i) {
        const double a2 = std::norm(f.v[i]);
        out.l2_sq += g.w[i] * a2;
        out.grad_sq += g.w[i] * std::norm(d.v[i]);
        out.weighted_sq += g.w[i] * g.r[i] * g.r[i] * a2;
    }
    return out;
}

fft::cvec even_extension(const RadialField& f) {
    const int n = f.nodes();
    const int m = 2 * (n - 1);
    fft::cvec ext(m);
    for (int i = 0; i < n; ++i) ext[i] = f.v[i];
    for (int i = 1; i < n - 1; ++i) ext[m - i] = f.v[i];
    return ext;
}

namespace {

// Spectrum of the even extension with round-off-level coefficients zeroed.
// The transform operators are meant for smooth fields whose true spectra
// decay below round-off inside the band; masking keeps the k^2 multiplier
// from amplifying transform noise at empty modes.
fft::cvec masked_spectrum(const RadialField& f) {
    fft::cvec hat = even_extension(f);
    fft::transform(hat, -1);
    double peak = 0.0;
    for (const auto& z : hat) peak = std::max(peak, std::abs(z));
    const double floor = 3e-15 * peak;
    for (auto& z : hat)
        if (std::abs(z) < floor) z = 0.0;
    return hat;
}

double wavenumber(std::size_t j, std::size_t m, double extent) {
    const double mm = (j <= m / 2) ? static_cast<double>(j)
                                   : static_cast<double>(j) - static_cast<double>(m);
    return M_PI * mm / extent;  // period 2 R
}

}  // namespace

RadialField derivative_spectral(const RadialField& f) {
    fft::cvec hat = masked_spectrum(f);
    const std::size_t m = hat.size();
    for (std::size_t j = 0; j < m; ++j) {
        double k = wavenumber(j, m, f.grid->extent);
        if (2 * j == m) k = 0.0;
        hat[j] *= Complex(0.0, k);
    }
    fft::transform(hat, +1);
    RadialField out(f.grid);
    for (int i = 0; i < f.nodes(); ++i) out.v[i] = hat[i];
    out.even = false;
    return out;
}

RadialField laplacian_spectral(const RadialField& f) {
    const auto& g = *f.grid;
    fft::cvec hat = masked_spectrum(f);
    const std::size_t m = hat.size();
    fft::cvec hat1 = hat;
    for (std::size_t j = 0; j < m; ++j) {
        double k = wavenumber(j, m, g.extent);
        if (2 * j == m) k = 0.0;
        hat1[j] *= Complex(0.0, k);
        hat[j] *= -k * k;
    }
    fft::transform(hat, +1);
    RadialField out(f.grid);
    const int N = g.dimension;
    if (N == 1) {
        for (int i = 0; i < f.nodes(); ++i) out.v[i] = hat[i];
        return out;
    }
    fft::transform(hat1, +1);
    out.v[0] = static_cast<double>(N) * hat[0];
    for (int i = 1; i < f.nodes(); ++i)
        out.v[i] = hat[i] + static_cast<double>(N - 1) / g.r[i] * hat1[i];
    return out;
}

RadialEvaluator::RadialEvaluator(const RadialField& f, int upsample_factor)
    : interp_(even_extension(f), 2.0 * f.grid->extent, upsample_factor),
      extent_(f.grid->extent) {}

Complex RadialEvaluator::operator()(double radius) const {
    const double r = std::abs(radius);
    if (r > extent_) return Complex(0.0, 0.0);
    return interp_(r);
}

RadialField resample(const RadialField& f, std::shared_ptr<const RadialGrid> target) {
    RadialEvaluator eval(f);
    RadialField out(std::move(target));
    for (int i = 0; i < out.nodes(); ++i) out.v[i] = eval(out.grid->r[i]);
    return out;
}

double half_max_radius(const RadialField& f) {
    const double peak = std::abs(f.v[0]);
    if (peak <= 0.0) return 0.0;
    for (int i = 1; i < f.nodes(); ++i) {
        const double a = std::abs(f.v[i]);
        if (a <= 0.5 * peak) {
            const double prev = std::abs(f.v[i - 1]);
            const double t = (prev - 0.5 * peak) / (prev - a);
            return f.grid->r[i - 1] + t * f.grid->spacing;
        }
    }
    return f.grid->extent;
}

double exp_decay_rate(const RadialField& f) {
    // fit log|f| ~ a - rate*r over the outer region where f is resolved
    const double peak = std::abs(f.v[0]);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (int i = 0; i < f.nodes(); ++i) {
        const double a = std::abs(f.v[i]);
        if (f.grid->r[i] < 0.3 * f.grid->extent) continue;
        if (a < peak * 1e-12 || a <= 0.0) continue;
        const double x = f.grid->r[i];
        const double y = std::log(a);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
        ++count;
    }
    if (count < 8) return 0.0;
    const double denom = count * sxx - sx * sx;
    if (denom == 0.0) return 0.0;
    return -(count * sxy - sx * sy) / denom;
}

void write_csv(const RadialField& f, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw UsageError("write_csv: cannot open " + path);
    bool complex_valued = false;
    for (const auto& z : f.v)
        if (z.imag() != 0.0) { complex_valued = true; break; }
    out << (complex_valued ? "r,value_real,value_imag\n" : "r,value_real\n");
    char buf[96];
    for (int i = 0; i < f.nodes(); ++i) {
        if (complex_valued)
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", f.grid->r[i],
                          f.v[i].real(), f.v[i].imag());
        else
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", f.grid->r[i], f.v[i].real());
        out << buf;
    }
}

RadialField read_csv(const std::string& path, int dimension) {
    std::ifstream in(path);
    if (!in) throw UsageError("read_csv: cannot open " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<double> rs;
    std::vector<Complex> vs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        double cols[3] = {0, 0, 0};
        int c = 0;
        while (std::getline(ss, tok, ',') && c < 3) cols[c++] = std::stod(tok);
        rs.push_back(cols[0]);
        vs.emplace_back(cols[1], c > 2 ? cols[2] : 0.0);
    }
    if (rs.size() < 9) throw UsageError("read_csv: too few rows in " + path);
    auto grid = make_radial_grid(dimension, rs.back(), static_cast<int>(rs.size()) - 1);
    RadialField f(grid);
    f.v = vs;
    return f;
}

}  // namespace hnls
