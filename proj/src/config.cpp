#include "hnls/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "hnls/errors.hpp"

namespace hnls {

const std::map<std::string, std::string>& Config::schema() {
    static const std::map<std::string, std::string> kSchema = {
        // problem
        {"dimension", "1"},
        {"sigma", "0.3"},
        {"sign", "+1"},
        {"truncation", "1"},       // K
        {"energy_level", "0"},     // E0
        {"t1", "0"},               // 0 -> choose s1 from the validity-cone margin
        {"cone_margin", "0.04"},   // b_app^2 + lambda_app^alpha at the auto-chosen s1
        // radial solve grid
        {"radial_extent", "30"},
        {"radial_cells", "262144"},
        {"gs_tol", "1e-10"},
        // modulation grid
        {"mod_extent", "25"},
        {"mod_cells", "2048"},
        // box + stepping
        {"box_extent", "25"},
        {"box_cells", "262144"},
        {"c_dt", "0.05"},
        {"dt_min", "1e-13"},
        {"dt_max", "0.05"},
        {"dealias", "true"},
        {"hartree", "true"},
        {"power_nl", "true"},
        {"track_modulation", "true"},
        {"diag_cadence_s", "0.5"},
        {"boundary_mass_threshold", "1e-6"},
        {"lambda_min_factor", "0.1"},  // stop after one decade of lambda~ decrease
        {"fit_skip_rows", "3"},        // transient rows excluded from the rate fit
        // global (boundedness) experiment
        {"global_t_end", "10"},
        {"global_dt", "0.004"},
        {"global_extent", "100"},
        {"global_cells", "8192"},
        {"global_shift", "0"},   // u0 = Q(. - a)
        {"mass_factor", "1"},    // != 1 -> report only (outside the theorem)
        // bookkeeping
        {"seed", "0"},
        {"snapshot_cadence", "0"},  // write every k-th diagnostics snapshot; 0 = none
    };
    return kSchema;
}

Config Config::defaults() {
    Config c;
    c.kv_ = schema();
    return c;
}

Config Config::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("Config: cannot open " + path);
    Config c = defaults();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream msg;
            msg << "Config: " << path << ":" << lineno << ": expected key = value";
            throw UsageError(msg.str());
        }
        c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
}

void Config::set(const std::string& key, const std::string& value) {
    if (schema().find(key) == schema().end())
        throw UsageError("Config: unknown key '" + key + "'");
    if (value.empty()) throw UsageError("Config: empty value for key '" + key + "'");
    kv_[key] = value;
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

const std::string& Config::str(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw UsageError("Config: unknown key '" + key + "'");
    return it->second;
}

double Config::num(const std::string& key) const {
    const std::string& v = str(key);
    if (v == "inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw UsageError("Config: key '" + key + "' is not a number: '" + v + "'");
    }
}

long Config::integer(const std::string& key) const {
    const double x = num(key);
    if (x != std::floor(x)) throw UsageError("Config: key '" + key + "' is not an integer");
    return static_cast<long>(x);
}

bool Config::flag(const std::string& key) const {
    const std::string& v = str(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw UsageError("Config: key '" + key + "' is not a boolean: '" + v + "'");
}

int Config::sign(const std::string& key) const {
    const std::string& v = str(key);
    if (v == "+" || v == "+1" || v == "1") return 1;
    if (v == "-" || v == "-1") return -1;
    throw UsageError("Config: key '" + key + "' must be + or -");
}

}  // namespace hnls
