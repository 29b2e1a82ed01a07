#include "hnls/cartesian.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>

#include <nlohmann/json.hpp>

#include "hnls/errors.hpp"

namespace hnls {

CartesianField make_cartesian_field(int dimension, double extent, int cells) {
    if (dimension != 1 && dimension != 2)
        throw DomainError("make_cartesian_field: dimension must be 1 or 2");
    if (extent <= 0.0) throw UsageError("make_cartesian_field: extent must be positive");
    if (cells < 8 || (cells & (cells - 1)) != 0)
        throw UsageError("make_cartesian_field: cells must be a power of two >= 8");
    CartesianField f;
    f.dimension = dimension;
    f.extent = extent;
    f.cells = cells;
    f.v.assign(f.expected_size(), Complex(0.0, 0.0));
    return f;
}

double box_mass(const CartesianField& u) {
    double acc = 0.0;
    for (const auto& z : u.v) acc += std::norm(z);
    return acc * u.cell_volume();
}

double boundary_mass_fraction(const CartesianField& u) {
    const int n = u.cells;
    const int edge = n / 8;
    double total = 0.0, boundary = 0.0;
    if (u.dimension == 1) {
        for (int i = 0; i < n; ++i) {
            const double a = std::norm(u.v[i]);
            total += a;
            if (i < edge || i >= n - edge) boundary += a;
        }
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double a = std::norm(u.v[static_cast<std::size_t>(i) * n + j]);
                total += a;
                if (i < edge || i >= n - edge || j < edge || j >= n - edge) boundary += a;
            }
    }
    return total > 0.0 ? boundary / total : 0.0;
}

void write_snapshot(const CartesianField& u, const std::string& base_path) {
    {
        std::ofstream bin(base_path + ".bin", std::ios::binary);
        if (!bin) throw UsageError("write_snapshot: cannot open " + base_path + ".bin");
        std::vector<float> buf(2 * u.v.size());
        for (std::size_t i = 0; i < u.v.size(); ++i) {
            buf[2 * i] = static_cast<float>(u.v[i].real());
            buf[2 * i + 1] = static_cast<float>(u.v[i].imag());
        }
        bin.write(reinterpret_cast<const char*>(buf.data()),
                  static_cast<std::streamsize>(buf.size() * sizeof(float)));
    }
    nlohmann::ordered_json side;
    side["N"] = u.dimension;
    side["n"] = u.cells;
    side["L"] = u.extent;
    side["t"] = u.time;
    std::ofstream js(base_path + ".json");
    if (!js) throw UsageError("write_snapshot: cannot open " + base_path + ".json");
    js << side.dump(2) << "\n";
}

CartesianField read_snapshot(const std::string& base_path) {
    std::ifstream js(base_path + ".json");
    if (!js) throw UsageError("read_snapshot: cannot open " + base_path + ".json");
    nlohmann::json side = nlohmann::json::parse(js);
    CartesianField u = make_cartesian_field(side.at("N").get<int>(), side.at("L").get<double>(),
                                            side.at("n").get<int>());
    u.time = side.at("t").get<double>();

    std::ifstream bin(base_path + ".bin", std::ios::binary);
    if (!bin) throw UsageError("read_snapshot: cannot open " + base_path + ".bin");
    std::vector<float> buf(2 * u.expected_size());
    bin.read(reinterpret_cast<char*>(buf.data()),
             static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (static_cast<std::size_t>(bin.gcount()) != buf.size() * sizeof(float))
        throw UsageError("read_snapshot: truncated binary payload in " + base_path + ".bin");
    for (std::size_t i = 0; i < u.v.size(); ++i) u.v[i] = Complex(buf[2 * i], buf[2 * i + 1]);
    return u;
}

}  // namespace hnls
