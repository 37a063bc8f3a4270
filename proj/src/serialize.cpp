#include "m2hs/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace m2hs {

namespace {

json grid_json(int n, double slope, const std::vector<double>& re,
               const std::vector<double>* im) {
    json j;
    j["n"] = n;
    j["slope"] = slope;
    j["values_re"] = re;
    if (im) {
        j["values_im"] = *im;
    } else {
        j["values_im"] = std::vector<double>(static_cast<size_t>(n), 0.0);
    }
    return j;
}

std::pair<int, int> line_column(const std::string& text, size_t byte) {
    int line = 1, col = 1;
    for (size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

}  // namespace

json to_json(const RealGridFunction& f) {
    return grid_json(f.size(), 0.0, f.values(), nullptr);
}

json to_json(const ComplexGridFunction& f) {
    std::vector<double> re(static_cast<size_t>(f.size())), im(static_cast<size_t>(f.size()));
    for (int j = 0; j < f.size(); ++j) {
        re[j] = f[j].real();
        im[j] = f[j].imag();
    }
    return grid_json(f.size(), 0.0, re, &im);
}

json to_json(const RampFunction& f) {
    return grid_json(f.size(), f.slope, f.periodic.values(), nullptr);
}

RealGridFunction real_grid_from_json(const json& j) {
    const int n = j.at("n").get<int>();
    auto re = j.at("values_re").get<std::vector<double>>();
    RealGridFunction g(n, std::move(re));
    if (!g.all_finite()) throw ConfigError("grid function contains non-finite values");
    return g;
}

ComplexGridFunction complex_grid_from_json(const json& j) {
    const int n = j.at("n").get<int>();
    auto re = j.at("values_re").get<std::vector<double>>();
    auto im = j.at("values_im").get<std::vector<double>>();
    if (static_cast<int>(re.size()) != n || static_cast<int>(im.size()) != n)
        throw ConfigError("grid value arrays must have length n");
    ComplexGridFunction g(n);
    for (int k = 0; k < n; ++k) g[k] = complex(re[k], im[k]);
    if (!g.all_finite()) throw ConfigError("grid function contains non-finite values");
    return g;
}

RampFunction ramp_from_json(const json& j) {
    RampFunction f;
    f.slope = j.at("slope").get<double>();
    f.periodic = real_grid_from_json(j);
    return f;
}

json to_json(const LagrangianState& state) {
    json j;
    j["phi_remainder"] = to_json(state.phi_remainder);
    j["tau"] = to_json(state.tau.periodic);
    j["tau_winding"] = state.tau_winding();
    return j;
}

LagrangianState lagrangian_from_json(const json& j) {
    RealGridFunction rem = real_grid_from_json(j.at("phi_remainder"));
    RealGridFunction tau_periodic = real_grid_from_json(j.at("tau"));
    const long winding = j.at("tau_winding").get<long>();
    RampFunction tau{4.0 * std::numbers::pi * winding, std::move(tau_periodic)};
    return LagrangianState(std::move(rem), std::move(tau));
}

json to_json(const ReducedGeodesic& rg) {
    json j;
    j["e1"] = to_json(rg.e1());
    if (rg.e2()) j["e2"] = to_json(*rg.e2());
    auto pair_json = [](const std::array<complex, 2>& p) {
        return json{{"re", {p[0].real(), p[1].real()}}, {"im", {p[0].imag(), p[1].imag()}}};
    };
    j["gamma0"] = pair_json(rg.a0());
    j["gamma0_dot"] = pair_json(rg.b0());
    j["coef_a"] = pair_json(rg.coef_a());
    j["coef_b"] = pair_json(rg.coef_b());
    j["theta1"] = rg.theta1();
    j["theta2"] = rg.theta2();
    j["strength"] = rg.strength();
    j["speed"] = rg.speed();
    j["ctilde"] = rg.ctilde();
    j["degenerate"] = rg.degenerate();
    return j;
}

json to_json(const BlowupReport& report) {
    json j;
    j["occurs"] = report.occurs;
    j["reeb_degenerate"] = report.reeb_degenerate;
    j["witnesses_x"] = report.witnesses_x;
    j["first_time"] = report.first_time ? json(*report.first_time) : json(nullptr);
    j["min_phix_lower_bound"] = report.min_phi_prime_lower_bound
                                    ? json(*report.min_phi_prime_lower_bound)
                                    : json(nullptr);
    j["scan_horizon"] = report.scan_horizon;
    return j;
}

json to_json(const Classification& c) {
    json j;
    j["classification"] = to_string(c.outcome);
    j["h_re"] = c.h.real();
    j["h_im"] = c.h.imag();
    j["threshold"] = c.threshold;
    return j;
}

RealGridFunction FourierSpec::build(int n) const {
    RealGridFunction f(n, mean);
    for (const auto& [mode, amp] : sin_modes) {
        for (int j = 0; j < n; ++j)
            f[j] += amp * std::sin(2.0 * std::numbers::pi * mode * (static_cast<double>(j) / n));
    }
    for (const auto& [mode, amp] : cos_modes) {
        for (int j = 0; j < n; ++j)
            f[j] += amp * std::cos(2.0 * std::numbers::pi * mode * (static_cast<double>(j) / n));
    }
    return f;
}

namespace {

json fourier_json(const FourierSpec& s, bool with_mean) {
    json j;
    j["sin"] = json::array();
    for (const auto& [m, a] : s.sin_modes) j["sin"].push_back(json::array({m, a}));
    j["cos"] = json::array();
    for (const auto& [m, a] : s.cos_modes) j["cos"].push_back(json::array({m, a}));
    if (with_mean) j["mean"] = s.mean;
    return j;
}

FourierSpec fourier_from_json(const json& j, bool allow_mean) {
    FourierSpec s;
    auto read_list = [&](const char* key, std::vector<std::pair<int, double>>& out) {
        if (!j.contains(key)) return;
        for (const auto& item : j.at(key)) {
            if (!item.is_array() || item.size() != 2)
                throw ConfigError(std::string("each ") + key + " entry must be [mode, amplitude]");
            const int mode = item[0].get<int>();
            if (mode < 1) throw ConfigError("Fourier modes must be >= 1");
            out.emplace_back(mode, item[1].get<double>());
        }
    };
    read_list("sin", s.sin_modes);
    read_list("cos", s.cos_modes);
    if (j.contains("mean")) {
        if (!allow_mean) throw ConfigError("u0 cannot carry a mean (zero-mean gauge)");
        s.mean = j.at("mean").get<double>();
    }
    return s;
}

}  // namespace

json ExperimentConfig::resolved() const {
    json j;
    j["n"] = n;
    j["strength"] = strength;
    j["u0"] = fourier_json(u0, false);
    j["rho0"] = fourier_json(rho0, true);
    j["time"] = json{{"dt", dt}, {"t_end", t_end}, {"stride", stride}};
    j["solver"] = solver == SolverChoice::Geometric ? "geometric"
                  : solver == SolverChoice::Pde     ? "pde"
                                                    : "both";
    j["tolerances"] = json{{"eps_mono", eps_mono},
                           {"eps_zero", eps_zero},
                           {"tol_connect", tol_connect},
                           {"blowup_cap", blowup_cap}};
    j["seed"] = seed;
    return j;
}

EulerianState ExperimentConfig::initial_state() const {
    return EulerianState(u0.build(n), rho0.build(n), strength);
}

json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
        throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": " + e.what());
    }
}

ExperimentConfig parse_config(const std::string& text) {
    const json j = parse_json_text(text, "config");
    ExperimentConfig c;
    try {
        if (j.contains("n")) c.n = j.at("n").get<int>();
        if (!valid_grid_size(c.n)) throw ConfigError("n must be a power of two >= 8");
        if (j.contains("strength")) c.strength = j.at("strength").get<double>();
        if (j.contains("u0")) c.u0 = fourier_from_json(j.at("u0"), false);
        if (j.contains("rho0")) c.rho0 = fourier_from_json(j.at("rho0"), true);
        if (j.contains("time")) {
            const json& t = j.at("time");
            if (t.contains("dt")) c.dt = t.at("dt").get<double>();
            if (t.contains("t_end")) c.t_end = t.at("t_end").get<double>();
            if (t.contains("stride")) c.stride = t.at("stride").get<int>();
        }
        if (!(c.dt > 0.0)) throw ConfigError("time.dt must be > 0");
        if (!(c.t_end > 0.0)) throw ConfigError("time.t_end must be > 0");
        if (c.stride < 1) throw ConfigError("time.stride must be >= 1");
        if (j.contains("solver")) {
            const std::string s = j.at("solver").get<std::string>();
            if (s == "geometric")
                c.solver = SolverChoice::Geometric;
            else if (s == "pde")
                c.solver = SolverChoice::Pde;
            else if (s == "both")
                c.solver = SolverChoice::Both;
            else
                throw ConfigError("solver must be geometric | pde | both");
        }
        if (j.contains("tolerances")) {
            const json& t = j.at("tolerances");
            if (t.contains("eps_mono")) c.eps_mono = t.at("eps_mono").get<double>();
            if (t.contains("eps_zero")) c.eps_zero = t.at("eps_zero").get<double>();
            if (t.contains("tol_connect")) c.tol_connect = t.at("tol_connect").get<double>();
            if (t.contains("blowup_cap")) c.blowup_cap = t.at("blowup_cap").get<double>();
        }
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_text_file(path));
}

std::string config_hash_hex(const json& resolved) {
    // FNV-1a over the canonical dump
    const std::string s = resolved.dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf);
}

namespace {

void open_csv(std::ofstream& out, const std::filesystem::path& path, const std::string& hash) {
    out.open(path, std::ios::binary);  // '\n' line endings on every platform
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << "# config_hash=" << hash << "\n";
}

}  // namespace

void write_field_csv(const std::filesystem::path& path, const Trajectory& traj,
                     const RealGridFunction EulerianState::* field, const std::string& hash) {
    std::ofstream out;
    open_csv(out, path, hash);
    const int n = traj.size() > 0 ? (traj.states[0].*field).size() : 0;
    out << "t";
    for (int j = 0; j < n; ++j) out << ",x" << j;
    out << "\n";
    for (int i = 0; i < traj.size(); ++i) {
        out << format_double(traj.times[i]);
        const RealGridFunction& f = traj.states[i].*field;
        for (int j = 0; j < n; ++j) out << "," << format_double(f[j]);
        out << "\n";
    }
}

void write_diagnostics_csv(const std::filesystem::path& path, const Trajectory& traj,
                           const std::vector<double>* comparison, const std::string& hash) {
    std::ofstream out;
    open_csv(out, path, hash);
    out << "t,c2,delta,min_phix,residual_u,residual_rho";
    if (comparison) out << ",max_diff_u";
    out << "\n";

    std::vector<double> res_u(traj.size(), std::nan("")), res_rho(traj.size(), std::nan(""));
    if (traj.size() >= 3) {
        for (const auto& r : residual_m2hs(traj)) {
            for (int i = 0; i < traj.size(); ++i)
                if (std::abs(traj.times[i] - r.t) < 1e-14) {
                    res_u[i] = r.res_u;
                    res_rho[i] = r.res_rho;
                }
        }
    }
    for (int i = 0; i < traj.size(); ++i) {
        out << format_double(traj.times[i]) << "," << format_double(traj.diagnostics[i].c2)
            << "," << format_double(traj.diagnostics[i].delta) << ","
            << format_double(traj.has_lagrangian() ? traj.min_phi_prime[i] : std::nan(""))
            << "," << format_double(res_u[i]) << "," << format_double(res_rho[i]);
        if (comparison) out << "," << format_double((*comparison)[i]);
        out << "\n";
    }
}

void write_grid_csv(const std::filesystem::path& path, const ComplexGridFunction& f,
                    const std::string& hash) {
    std::ofstream out;
    open_csv(out, path, hash);
    out << "x,re,im\n";
    for (int j = 0; j < f.size(); ++j)
        out << format_double(f.node(j)) << "," << format_double(f[j].real()) << ","
            << format_double(f[j].imag()) << "\n";
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << text;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace m2hs
