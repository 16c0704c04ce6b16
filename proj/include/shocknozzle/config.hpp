#pragma once

// Flat sectioned key-value configuration for the solver and its CLI. The file
// format is INI-like: [section] headers, key = value lines, '#' comments.
// Serialization uses 17 significant digits so parse -> serialize -> parse is
// the identity.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "shocknozzle/background.hpp"
#include "shocknozzle/errors.hpp"
#include "shocknozzle/gas.hpp"
#include "shocknozzle/grid.hpp"
#include "shocknozzle/perturbation.hpp"

namespace shocknozzle {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct SolverConfig {
    // [gas]
    double gamma = 1.4;
    double entropy_const = 1.0;
    // [nozzle]
    double L0 = 0.0, L1 = 1.0, rho0 = 1.0, u0 = 2.0;
    // [force]
    std::vector<double> force_coeffs{0.1};
    // [exit] background selector: exactly one of exit_pressure / shock_position
    std::optional<double> exit_pressure;
    std::optional<double> shock_position;
    // [exit] perturbation
    double epsilon = 0.0;
    std::string pex = "cosine"; // cosine | samples
    int pex_mode = 1;
    std::vector<double> pex_samples;
    // [grid]
    int n1 = 129, n2 = 129;
    // [tolerances]
    double tol_shoot = 1e-10;
    double tol_fp = 1e-10;
    double sonic_guard = 1e-8;
    int max_iter = 50;
    double eps_max = 1e-2;
    // [background]
    int steps = 2000;
    double delta0_frac = 0.1;
    // [iteration]
    std::string char_interp = "bicubic"; // bicubic | bilinear
    // [output]
    std::string output_dir = "out";

    bool operator==(const SolverConfig&) const = default;

    // ---- construction of solver inputs -------------------------------------

    NozzleSetup make_setup() const {
        NozzleSetup s;
        s.L0 = L0;
        s.L1 = L1;
        s.rho0 = rho0;
        s.u0 = u0;
        try {
            s.gas = GasModel(gamma, entropy_const);
        } catch (const Error& e) {
            throw ValidationError(std::string("[gas] ") + e.what());
        }
        s.force = ForceField(force_coeffs, L0);
        s.opts.steps_per_branch = steps;
        s.opts.sonic_guard = sonic_guard;
        s.opts.tol_shoot = tol_shoot;
        s.opts.delta0_frac = delta0_frac;
        try {
            s.validate();
        } catch (const Error& e) {
            throw ValidationError(std::string("[nozzle] ") + e.what());
        }
        return s;
    }

    GridQ make_grid(double Ls) const {
        try {
            return GridQ(n1, n2, Ls, L1);
        } catch (const Error& e) {
            throw ValidationError(std::string("[grid] ") + e.what());
        }
    }

    ExitPerturbation make_exit(const GridQ& grid) const {
        ExitPerturbation e;
        e.epsilon = epsilon;
        if (pex == "cosine") {
            e = ExitPerturbation::cosine(epsilon, grid, pex_mode);
        } else if (pex == "samples") {
            if (static_cast<int>(pex_samples.size()) != grid.n2)
                throw ValidationError("[exit] pex_samples: expected " + std::to_string(grid.n2) +
                                      " values for the configured grid, got " +
                                      std::to_string(pex_samples.size()));
            e.pex_hat = pex_samples;
        } else {
            throw ValidationError("[exit] pex: unknown profile '" + pex +
                                  "' (expected cosine or samples)");
        }
        try {
            e.validate(grid);
        } catch (const Error& err) {
            throw ValidationError(std::string("[exit] ") + err.what());
        }
        return e;
    }

    Interp char_interp_kind() const {
        if (char_interp == "bicubic") return Interp::Cubic;
        if (char_interp == "bilinear") return Interp::Linear;
        throw ValidationError("[iteration] char_interp: expected bicubic or bilinear, got '" +
                              char_interp + "'");
    }

    void validate_background_selector() const {
        if (exit_pressure && shock_position)
            throw ValidationError("[exit] specify either exit_pressure or shock_position, "
                                  "not both");
        if (!exit_pressure && !shock_position)
            throw ValidationError("[exit] one of exit_pressure or shock_position is required");
    }

    // ---- parse / serialize ---------------------------------------------------

    static SolverConfig parse(const std::string& text);
    std::string serialize() const;
};

namespace detail {

inline double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    auto r = std::from_chars(b, e, v);
    if (r.ec != std::errc() || r.ptr != e)
        throw ValidationError(where + ": not a number: '" + s + "'");
    return v;
}

inline int parse_int(const std::string& s, const std::string& where) {
    int v = 0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw ValidationError(where + ": not an integer: '" + s + "'");
    return v;
}

inline std::vector<double> parse_list(const std::string& s, const std::string& where) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(parse_double(tok, where));
    if (out.empty()) throw ValidationError(where + ": empty list");
    return out;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace detail

inline SolverConfig SolverConfig::parse(const std::string& text) {
    SolverConfig c;
    std::map<std::string, std::string> kv; // "section.key" -> value
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ValidationError("config line " + std::to_string(lineno) +
                                      ": malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("config line " + std::to_string(lineno) +
                                  ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (section.empty())
            throw ValidationError("config line " + std::to_string(lineno) +
                                  ": key outside of any [section]");
        kv[section + "." + key] = val;
    }

    auto take = [&](const char* name) -> std::optional<std::string> {
        auto it = kv.find(name);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second;
        kv.erase(it);
        return v;
    };
    auto dbl = [&](const char* name, double& slot) {
        if (auto v = take(name)) slot = detail::parse_double(*v, std::string("[") + name + "]");
    };
    auto intg = [&](const char* name, int& slot) {
        if (auto v = take(name)) slot = detail::parse_int(*v, std::string("[") + name + "]");
    };
    auto str = [&](const char* name, std::string& slot) {
        if (auto v = take(name)) slot = *v;
    };

    dbl("gas.gamma", c.gamma);
    dbl("gas.entropy_const", c.entropy_const);
    dbl("nozzle.L0", c.L0);
    dbl("nozzle.L1", c.L1);
    dbl("nozzle.rho0", c.rho0);
    dbl("nozzle.u0", c.u0);
    if (auto v = take("force.coeffs")) c.force_coeffs = detail::parse_list(*v, "[force.coeffs]");
    if (auto v = take("exit.exit_pressure"))
        c.exit_pressure = detail::parse_double(*v, "[exit.exit_pressure]");
    if (auto v = take("exit.shock_position"))
        c.shock_position = detail::parse_double(*v, "[exit.shock_position]");
    dbl("exit.epsilon", c.epsilon);
    str("exit.pex", c.pex);
    intg("exit.pex_mode", c.pex_mode);
    if (auto v = take("exit.pex_samples")) c.pex_samples = detail::parse_list(*v, "[exit.pex_samples]");
    intg("grid.n1", c.n1);
    intg("grid.n2", c.n2);
    dbl("tolerances.tol_shoot", c.tol_shoot);
    dbl("tolerances.tol_fp", c.tol_fp);
    dbl("tolerances.sonic_guard", c.sonic_guard);
    intg("tolerances.max_iter", c.max_iter);
    dbl("tolerances.eps_max", c.eps_max);
    intg("background.steps", c.steps);
    dbl("background.delta0_frac", c.delta0_frac);
    str("iteration.char_interp", c.char_interp);
    str("output.dir", c.output_dir);

    if (!kv.empty())
        throw ValidationError("config: unknown key [" + kv.begin()->first + "]");
    return c;
}

inline std::string SolverConfig::serialize() const {
    std::ostringstream os;
    os << "# shocknozzle configuration\n";
    os << "[gas]\n";
    os << "gamma = " << format_double(gamma) << "\n";
    os << "entropy_const = " << format_double(entropy_const) << "\n\n";
    os << "[nozzle]\n";
    os << "L0 = " << format_double(L0) << "\n";
    os << "L1 = " << format_double(L1) << "\n";
    os << "rho0 = " << format_double(rho0) << "\n";
    os << "u0 = " << format_double(u0) << "\n\n";
    os << "[force]\n";
    os << "coeffs =";
    for (double v : force_coeffs) os << " " << format_double(v);
    os << "\n\n";
    os << "[exit]\n";
    if (exit_pressure) os << "exit_pressure = " << format_double(*exit_pressure) << "\n";
    if (shock_position) os << "shock_position = " << format_double(*shock_position) << "\n";
    os << "epsilon = " << format_double(epsilon) << "\n";
    os << "pex = " << pex << "\n";
    os << "pex_mode = " << pex_mode << "\n";
    if (!pex_samples.empty()) {
        os << "pex_samples =";
        for (double v : pex_samples) os << " " << format_double(v);
        os << "\n";
    }
    os << "\n[grid]\n";
    os << "n1 = " << n1 << "\n";
    os << "n2 = " << n2 << "\n\n";
    os << "[tolerances]\n";
    os << "tol_shoot = " << format_double(tol_shoot) << "\n";
    os << "tol_fp = " << format_double(tol_fp) << "\n";
    os << "sonic_guard = " << format_double(sonic_guard) << "\n";
    os << "max_iter = " << max_iter << "\n";
    os << "eps_max = " << format_double(eps_max) << "\n\n";
    os << "[background]\n";
    os << "steps = " << steps << "\n";
    os << "delta0_frac = " << format_double(delta0_frac) << "\n\n";
    os << "[iteration]\n";
    os << "char_interp = " << char_interp << "\n\n";
    os << "[output]\n";
    os << "dir = " << output_dir << "\n";
    return os.str();
}

} // namespace shocknozzle
