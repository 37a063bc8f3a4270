#ifndef M2HS_SERIALIZE_HPP
#define M2HS_SERIALIZE_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "m2hs/blowup.hpp"
#include "m2hs/connectivity.hpp"
#include "m2hs/m2hs.hpp"

namespace m2hs {

using json = nlohmann::json;

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Grid functions serialize as {"n", "slope", "values_re", "values_im"}.
json to_json(const RealGridFunction& f);
json to_json(const ComplexGridFunction& f);
json to_json(const RampFunction& f);
RealGridFunction real_grid_from_json(const json& j);
ComplexGridFunction complex_grid_from_json(const json& j);
RampFunction ramp_from_json(const json& j);

json to_json(const LagrangianState& state);
LagrangianState lagrangian_from_json(const json& j);

json to_json(const ReducedGeodesic& rg);
json to_json(const BlowupReport& report);
json to_json(const Classification& c);

/// Fourier mode list: pairs [mode, amplitude] for sin and cos plus a mean.
struct FourierSpec {
    std::vector<std::pair<int, double>> sin_modes;
    std::vector<std::pair<int, double>> cos_modes;
    double mean = 0.0;

    RealGridFunction build(int n) const;
};

enum class SolverChoice { Geometric, Pde, Both };

struct ExperimentConfig {
    int n = 512;
    double strength = 0.0;
    FourierSpec u0;    // mean forced to zero
    FourierSpec rho0;
    double dt = 1e-3;
    double t_end = 1.0;
    int stride = 1;
    SolverChoice solver = SolverChoice::Geometric;
    double eps_mono = kEpsMono;
    double eps_zero = kEpsZero;
    double tol_connect = 1e-6;
    double blowup_cap = 1e4;
    std::uint64_t seed = 0;

    json resolved() const;
    EulerianState initial_state() const;
};

/// Parses and validates a config document; errors carry line/column positions.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Parse any JSON document with line/column diagnostics.
json parse_json_text(const std::string& text, const std::string& origin);

std::string config_hash_hex(const json& resolved);
std::string format_double(double x);  // shortest round-trip decimal, '.' separator

/// One CSV per field with rows (t, x_0 .. x_{n-1}); '\n' line endings,
/// a config-hash comment line, then the header row.
void write_field_csv(const std::filesystem::path& path, const Trajectory& traj,
                     const RealGridFunction EulerianState::* field, const std::string& hash);

/// Columns (t, c2, delta, min_phix, residual_u, residual_rho [, max_diff_u]).
void write_diagnostics_csv(const std::filesystem::path& path, const Trajectory& traj,
                           const std::vector<double>* comparison, const std::string& hash);

void write_grid_csv(const std::filesystem::path& path, const ComplexGridFunction& f,
                    const std::string& hash);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace m2hs

#endif
