#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>

#include <CLI11.hpp>

#include "m2hs/blowup.hpp"
#include "m2hs/connectivity.hpp"
#include "m2hs/serialize.hpp"

namespace fs = std::filesystem;
using namespace m2hs;

namespace {

constexpr const char* kVersion = "0.1.0";

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBreakdown = 3;
constexpr int kExitVerification = 4;

int env_threads() {
    const char* v = std::getenv("M2HS_THREADS");
    if (!v) return 1;
    const int t = std::atoi(v);
    return t >= 1 ? t : 1;
}

std::vector<double> output_times(const ExperimentConfig& cfg) {
    std::vector<double> times{0.0};
    const double step = cfg.dt * cfg.stride;
    for (double t = step; t < cfg.t_end + 1e-12; t += step) times.push_back(std::min(t, cfg.t_end));
    if (times.back() < cfg.t_end - 1e-12) times.push_back(cfg.t_end);
    return times;
}

void write_manifest(const fs::path& dir, const ExperimentConfig& cfg, const std::string& hash) {
    json m;
    m["version"] = kVersion;
    m["config_hash"] = hash;
    m["config"] = cfg.resolved();
    write_text_file(dir / "manifest.json", m.dump(2) + "\n");
}

void write_weak_flags_csv(const fs::path& path, const Trajectory& traj, const std::string& hash) {
    std::string text = "# config_hash=" + hash + "\nt,weak,min_phix\n";
    for (int i = 0; i < traj.size(); ++i) {
        text += format_double(traj.times[i]);
        text += ",";
        text += traj.weak_flag[i] ? "1" : "0";
        text += ",";
        text += format_double(traj.min_phi_prime[i]);
        text += "\n";
    }
    write_text_file(path, text);
}

int cmd_solve(const fs::path& config_path, const fs::path& out_dir) {
    const ExperimentConfig cfg = load_config(config_path);
    const std::string hash = config_hash_hex(cfg.resolved());
    fs::create_directories(out_dir);
    write_manifest(out_dir, cfg, hash);
    const EulerianState s0 = cfg.initial_state();
    const std::vector<double> times = output_times(cfg);

    Trajectory geo, pde;
    const bool want_geo = cfg.solver != SolverChoice::Pde;
    const bool want_pde = cfg.solver != SolverChoice::Geometric;
    if (want_geo) {
        GeometricOptions gopts;
        gopts.eps_mono = cfg.eps_mono;
        geo = geometric_solve(s0, times, gopts);
    }
    if (want_pde) {
        PdeOptions popts;
        popts.blowup_cap = cfg.blowup_cap;
        popts.output_stride = cfg.stride;
        pde = evolve_pde(s0, cfg.dt, cfg.t_end, popts);
    }

    if (want_geo && want_pde) {
        write_field_csv(out_dir / "u_geometric.csv", geo, &EulerianState::u, hash);
        write_field_csv(out_dir / "rho_geometric.csv", geo, &EulerianState::rho, hash);
        write_field_csv(out_dir / "u_pde.csv", pde, &EulerianState::u, hash);
        write_field_csv(out_dir / "rho_pde.csv", pde, &EulerianState::rho, hash);
        // comparison column at the common output times
        std::vector<double> diff(geo.size(), std::nan(""));
        for (int i = 0; i < geo.size(); ++i) {
            for (int j = 0; j < pde.size(); ++j) {
                if (std::abs(pde.times[j] - geo.times[i]) < 1e-12) {
                    double m = 0.0;
                    for (int x = 0; x < geo.states[i].size(); ++x)
                        m = std::max(m, std::abs(geo.states[i].u[x] - pde.states[j].u[x]));
                    diff[i] = m;
                }
            }
        }
        write_diagnostics_csv(out_dir / "diagnostics.csv", geo, &diff, hash);
        write_diagnostics_csv(out_dir / "diagnostics_pde.csv", pde, nullptr, hash);
    } else {
        const Trajectory& traj = want_geo ? geo : pde;
        write_field_csv(out_dir / "u.csv", traj, &EulerianState::u, hash);
        write_field_csv(out_dir / "rho.csv", traj, &EulerianState::rho, hash);
        write_diagnostics_csv(out_dir / "diagnostics.csv", traj, nullptr, hash);
    }
    if (want_geo && geo.has_lagrangian())
        write_weak_flags_csv(out_dir / "weak_flags.csv", geo, hash);

    if (want_pde && pde.breakdown) {
        std::cerr << "pde solver breakdown at t = " << format_double(pde.breakdown->t) << ": "
                  << pde.breakdown->reason << " (partial output retained)\n";
        if (!want_geo) return kExitBreakdown;
    }
    return kExitOk;
}

int cmd_blowup(const fs::path& config_path, const fs::path& out_dir) {
    const ExperimentConfig cfg = load_config(config_path);
    const std::string hash = config_hash_hex(cfg.resolved());
    fs::create_directories(out_dir);
    write_manifest(out_dir, cfg, hash);
    const EulerianState s0 = cfg.initial_state();

    const BlowupReport report = predict_blowup(s0);
    json j = to_json(report);
    j["config_hash"] = hash;

    if (report.occurs) {
        // cross-check against trajectory detection; the dip tolerance matches
        // the sampling rate, the refinement then localizes the touch itself
        const double horizon = *report.first_time * 1.5;
        std::vector<double> times;
        for (int i = 0; i <= 400; ++i) times.push_back(horizon * i / 400);
        const Trajectory traj = weak_continue(s0, times);
        const auto detected = detect_blowup(traj, 1e-3);
        j["detected_time"] = detected ? json(*detected) : json(nullptr);
        j["predicted_vs_detected"] =
            detected ? json(std::abs(*detected - *report.first_time)) : json(nullptr);
    }
    write_text_file(out_dir / "blowup.json", j.dump(2) + "\n");
    std::cout << j.dump(2) << "\n";
    return kExitOk;
}

int cmd_continue(const fs::path& config_path, const fs::path& out_dir) {
    const ExperimentConfig cfg = load_config(config_path);
    const std::string hash = config_hash_hex(cfg.resolved());
    fs::create_directories(out_dir);
    write_manifest(out_dir, cfg, hash);
    const EulerianState s0 = cfg.initial_state();

    GeometricOptions gopts;
    gopts.eps_mono = cfg.eps_mono;
    const Trajectory traj = weak_continue(s0, output_times(cfg), gopts);
    write_field_csv(out_dir / "u.csv", traj, &EulerianState::u, hash);
    write_field_csv(out_dir / "rho.csv", traj, &EulerianState::rho, hash);
    write_diagnostics_csv(out_dir / "diagnostics.csv", traj, nullptr, hash);
    write_weak_flags_csv(out_dir / "weak_flags.csv", traj, hash);

    const WeakVerification v = verify_weak(traj);
    json report;
    report["config_hash"] = hash;
    report["passed"] = v.passed();
    report["h1_identity_ok"] = v.h1_identity_ok;
    report["conserve_ok"] = v.conserve_ok;
    report["time_continuity_ok"] = v.time_continuity_ok;
    report["bounded_ok"] = v.bounded_ok;
    report["residual_ok"] = v.residual_ok;
    report["max_c2_drift"] = v.max_c2_drift;
    report["max_delta_drift"] = v.max_delta_drift;
    report["max_residual_u"] = v.max_residual_u;
    report["max_residual_rho"] = v.max_residual_rho;
    report["nonsingular_samples"] = v.nonsingular_count;
    write_text_file(out_dir / "verification.json", report.dump(2) + "\n");
    std::cout << report.dump(2) << "\n";
    return v.passed() ? kExitOk : kExitVerification;
}

int cmd_connect(const fs::path& q0_path, const fs::path& q1_path, bool lagrangian, double k,
                const std::string& out_path) {
    Classification cls;
    SpherePoint q0, q1;
    if (lagrangian) {
        const LagrangianState p0 = lagrangian_from_json(
            parse_json_text(read_text_file(q0_path), q0_path.string()));
        const LagrangianState p1 = lagrangian_from_json(
            parse_json_text(read_text_file(q1_path), q1_path.string()));
        q0 = madelung(p0);
        q1 = madelung(p1);
        cls = classify_lagrangian(p0, p1, k);
    } else {
        q0 = SpherePoint::normalized(complex_grid_from_json(
            parse_json_text(read_text_file(q0_path), q0_path.string())));
        q1 = SpherePoint::normalized(complex_grid_from_json(
            parse_json_text(read_text_file(q1_path), q1_path.string())));
        cls = classify(ConnectivityQuery{q0, q1, k});
    }

    json j = to_json(cls);
    j["k"] = k;
    if (cls.outcome == ConnectCase::AtManeEmpty) {
        j["shooting_skipped"] = true;
        j["found"] = false;
    } else {
        ShootOptions opts;
        opts.threads = env_threads();
        const ShootingResult r = shoot(ConnectivityQuery{q0, q1, k}, opts);
        j["found"] = r.found;
        j["T"] = r.arrival_time;
        j["residual"] = r.residual;
        j["evaluations"] = r.evaluations;
    }
    const std::string text = j.dump(2) + "\n";
    if (!out_path.empty())
        write_text_file(out_path, text);
    else
        std::cout << text;
    return kExitOk;
}

int cmd_mane(double k, int loops, std::uint64_t seed, int n, const std::string& out_path) {
    Rng rng(seed);
    const int time_nodes = 128;
    double min_action = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (int i = 0; i < loops; ++i) {
        const SphereLoop loop = random_sphere_loop(n, time_nodes, rng.uniform(0.5, 20.0), rng);
        const double a = mane_action(loop, k);
        min_action = std::min(min_action, a);
        sum += a;
    }
    json j;
    j["k"] = k;
    j["loops"] = loops;
    j["seed"] = seed;
    j["min_action"] = min_action;
    j["mean_action"] = loops > 0 ? sum / loops : 0.0;
    j["certificate_nonnegative"] = min_action >= -1e-8;
    if (k < kManeCriticalValue) {
        const double wa = mane_action(mane_witness(k, n), k);
        j["witness_action"] = wa;
        j["witness_negative"] = wa < 0.0;
    } else {
        j["witness_action"] = nullptr;
    }
    const std::string text = j.dump(2) + "\n";
    if (!out_path.empty())
        write_text_file(out_path, text);
    else
        std::cout << text;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for the magnetic two-component Hunter-Saxton system"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    std::string q0_path, q1_path, out_path;
    bool lagrangian = false;
    double k = 0.2;
    int loops = 1000;
    int n = 256;
    std::uint64_t seed = 0;

    CLI::App* solve = app.add_subcommand("solve", "run the selected solver(s) on a config");
    solve->add_option("--config", config_path)->required();
    solve->add_option("--out", out_dir);

    CLI::App* blowup = app.add_subcommand("blowup", "closed-form blow-up prediction + detection");
    blowup->add_option("--config", config_path)->required();
    blowup->add_option("--out", out_dir);

    CLI::App* cont = app.add_subcommand("continue", "global conservative weak continuation");
    cont->add_option("--config", config_path)->required();
    cont->add_option("--out", out_dir);

    CLI::App* connect = app.add_subcommand("connect", "Hopf-Rinow classification + shooting");
    connect->add_option("--q0", q0_path)->required();
    connect->add_option("--q1", q1_path)->required();
    connect->add_flag("--lagrangian", lagrangian, "inputs are Lagrangian states");
    connect->add_option("--k", k, "prescribed kinetic energy")->required();
    connect->add_option("--out", out_path);

    CLI::App* mane = app.add_subcommand("mane", "action statistics and the Mane certificate");
    mane->add_option("--k", k)->required();
    mane->add_option("--loops", loops);
    mane->add_option("--seed", seed);
    mane->add_option("--n", n);
    mane->add_option("--out", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (solve->parsed()) return cmd_solve(config_path, out_dir);
        if (blowup->parsed()) return cmd_blowup(config_path, out_dir);
        if (cont->parsed()) return cmd_continue(config_path, out_dir);
        if (connect->parsed()) return cmd_connect(q0_path, q1_path, lagrangian, k, out_path);
        if (mane->parsed()) return cmd_mane(k, loops, seed, n, out_path);
    } catch (const BlowupEncounteredError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBreakdown;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitOk;
}
