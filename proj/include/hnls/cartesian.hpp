#pragma once

// Complex solution samples on a uniform periodic box [-L/2, L/2)^N with
// physical time attached. N is 1 or 2; storage is row-major for N = 2.
// Snapshots serialize as little-endian complex64 with a JSON sidecar.

#include <complex>
#include <string>
#include <vector>

#include "hnls/radial.hpp"

namespace hnls {

struct CartesianField {
    int dimension = 1;
    double extent = 50.0;  // L per axis
    int cells = 8192;      // n per axis, power of two
    double time = 0.0;
    std::vector<Complex> v;

    double spacing() const { return extent / static_cast<double>(cells); }
    double coord(int i) const { return -0.5 * extent + spacing() * static_cast<double>(i); }
    std::size_t expected_size() const {
        return dimension == 1 ? static_cast<std::size_t>(cells)
                              : static_cast<std::size_t>(cells) * cells;
    }
    double cell_volume() const {
        const double h = spacing();
        return dimension == 1 ? h : h * h;
    }
};

CartesianField make_cartesian_field(int dimension, double extent, int cells);

double box_mass(const CartesianField& u);  // ||u||_2^2
// Fraction of ||u||_2^2 sitting in the outer 1/8 of the box (per side).
double boundary_mass_fraction(const CartesianField& u);

// base path without suffix; writes base.bin and base.json ({N, n, L, t}).
void write_snapshot(const CartesianField& u, const std::string& base_path);
CartesianField read_snapshot(const std::string& base_path);

}  // namespace hnls
