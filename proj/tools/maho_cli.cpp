// Command-line front end: spectrum tables, classical trajectories, action
// evaluation, kernel values and maps, wave-packet evolution, and the
// self-verification suites. Every run writes a manifest describing what was
// done; all numeric artifacts are deterministic for identical inputs.

#include <complex>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"

#include "maho/action.hpp"
#include "maho/classical.hpp"
#include "maho/common.hpp"
#include "maho/evolve.hpp"
#include "maho/grid.hpp"
#include "maho/io.hpp"
#include "maho/model.hpp"
#include "maho/oracle.hpp"
#include "maho/propagator.hpp"
#include "maho/spectrum.hpp"
#include "maho/verify.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = ".";
    int threads = 0;
    std::optional<long long> seed;  // recorded only; every operation is deterministic
};

std::string out_path(const GlobalOpts& g, const std::string& name) {
    return (fs::path(g.out_dir) / name).string();
}

void apply_threads(const GlobalOpts& g) {
#ifdef _OPENMP
    if (g.threads > 0) omp_set_num_threads(g.threads);
#else
    (void)g;
#endif
}

maho::RunManifest base_manifest(const GlobalOpts& g, const maho::OscillatorConfig& cfg,
                                const std::string& command) {
    maho::RunManifest m;
    m.command = command;
    m.config = cfg;
    m.parameters["threads"] = g.threads;
    if (g.seed) m.parameters["seed"] = *g.seed;
    return m;
}

void finish_manifest(const GlobalOpts& g, maho::RunManifest& m) {
    const std::string path = out_path(g, m.command + "_manifest.json");
    maho::write_manifest(path, m);
    std::cout << "manifest: " << path << "\n";
}

std::vector<double> parse_times(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        const double v = std::stod(item, &pos);
        if (pos != item.size())
            throw CLI::ValidationError("--times", "not a number: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw CLI::ValidationError("--times", "no times given");
    return out;
}

/// Print nearby conjugate times so the user can step around the exclusion
/// zone instead of guessing.
int report_caustic(const maho::CausticError& e, const maho::OscillatorConfig& cfg) {
    const maho::DerivedFrequencies d = maho::derive(cfg);
    std::cerr << "error: " << e.what() << "\n";
    std::cerr << "the requested time lies in a caustic exclusion zone; adjacent"
                 " conjugate times:\n";
    const double horizon = std::max(1.5 * e.time(), e.time() + 2.0);
    for (double r : maho::caustics(d, horizon)) {
        if (std::abs(r - e.time()) < 0.3 * horizon)
            std::cerr << "  t = " << maho::format_double(r) << "\n";
    }
    std::cerr << "choose a time away from these, or evolve with the split method.\n";
    return 2;
}

int run_spectrum(const GlobalOpts& g, const maho::OscillatorConfig& cfg, int levels) {
    const auto rows = maho::levels_sorted(cfg, levels);
    const std::string csv = out_path(g, "spectrum.csv");
    std::ofstream os(csv);
    maho::write_spectrum_csv(os, rows);
    std::cout << "wrote " << csv << " (" << rows.size() << " levels)\n";
    for (std::size_t i = 0; i < rows.size() && i < 8; ++i)
        std::cout << "  (n1=" << rows[i].idx.n1 << ", n2=" << rows[i].idx.n2
                  << ")  E = " << maho::format_double(rows[i].energy_canonical) << "\n";
    auto m = base_manifest(g, cfg, "spectrum");
    m.parameters["levels"] = levels;
    m.outputs.push_back(csv);
    finish_manifest(g, m);
    return 0;
}

int run_trajectory(const GlobalOpts& g, const maho::OscillatorConfig& cfg,
                   const maho::Endpoints& ep, int samples) {
    const maho::DerivedFrequencies d = maho::derive(cfg);
    const maho::ModeCoefficients mc = maho::solve_modes(ep, d);
    const auto pts = maho::trajectory(mc, d, ep.T, samples);
    const std::string csv = out_path(g, "trajectory.csv");
    std::ofstream os(csv);
    maho::write_trajectory_csv(os, pts);
    const double e0 = maho::energy(pts.front(), cfg);
    const double e1 = maho::energy(pts.back(), cfg);
    std::cout << "wrote " << csv << " (" << pts.size() << " samples)\n";
    std::cout << "energy: " << maho::format_double(e0)
              << " (drift " << maho::format_double(std::abs(e1 - e0)) << ")\n";
    auto m = base_manifest(g, cfg, "trajectory");
    m.parameters["endpoints"] = {{"x1", ep.x1}, {"y1", ep.y1},
                                 {"x2", ep.x2}, {"y2", ep.y2}, {"T", ep.T}};
    m.parameters["samples"] = samples;
    m.outputs.push_back(csv);
    finish_manifest(g, m);
    return 0;
}

int run_action(const GlobalOpts& g, const maho::OscillatorConfig& cfg,
               const maho::Endpoints& ep, int coeff_samples) {
    const maho::DerivedFrequencies d = maho::derive(cfg);
    const double s_closed = maho::action_closed(ep, cfg, d);
    const double s_boundary = maho::action_boundary(ep, cfg, d);
    const maho::EndpointVelocities v = maho::endpoint_velocities(ep, d);
    std::cout << "S (closed form)   = " << maho::format_double(s_closed) << "\n";
    std::cout << "S (boundary form) = " << maho::format_double(s_boundary) << "\n";
    std::cout << "v1 = (" << maho::format_double(v.vx1) << ", "
              << maho::format_double(v.vy1) << ")\n";
    std::cout << "v2 = (" << maho::format_double(v.vx2) << ", "
              << maho::format_double(v.vy2) << ")\n";

    std::vector<maho::ActionCoefficients> rows;
    for (int i = 1; i <= coeff_samples; ++i)
        rows.push_back(maho::coefficients(d, ep.T * i / coeff_samples));
    const std::string csv = out_path(g, "coefficients.csv");
    std::ofstream os(csv);
    maho::write_coefficients_csv(os, rows);
    std::cout << "wrote " << csv << "\n";

    auto m = base_manifest(g, cfg, "action");
    m.parameters["endpoints"] = {{"x1", ep.x1}, {"y1", ep.y1},
                                 {"x2", ep.x2}, {"y2", ep.y2}, {"T", ep.T}};
    m.parameters["action_closed"] = s_closed;
    m.parameters["action_boundary"] = s_boundary;
    m.outputs.push_back(csv);
    finish_manifest(g, m);
    return 0;
}

int run_kernel(const GlobalOpts& g, const maho::OscillatorConfig& cfg,
               const maho::Endpoints& ep, const std::string& gauge_name, bool grid_mode,
               int grid_n, double grid_half, const std::string& format) {
    const maho::DerivedFrequencies d = maho::derive(cfg);
    const maho::Gauge gauge =
        gauge_name == "weighted" ? maho::Gauge::weighted : maho::Gauge::symmetric;
    auto m = base_manifest(g, cfg, "kernel");
    m.parameters["gauge"] = gauge_name;
    if (!grid_mode) {
        const maho::KernelValue kv = maho::kernel(ep, cfg, d, gauge);
        std::cout << "K = " << maho::format_double(kv.value.real()) << " + "
                  << maho::format_double(kv.value.imag()) << "i\n";
        std::cout << "|K| = " << maho::format_double(std::abs(kv.value))
                  << ", phase = " << maho::format_double(std::arg(kv.value)) << "\n";
        m.parameters["endpoints"] = {{"x1", ep.x1}, {"y1", ep.y1},
                                     {"x2", ep.x2}, {"y2", ep.y2}, {"T", ep.T}};
        m.parameters["value"] = {kv.value.real(), kv.value.imag()};
        finish_manifest(g, m);
        return 0;
    }
    // Grid mode: map r2 -> K(r2, T; r1) for a fixed source point.
    const maho::Grid2D grid = maho::Grid2D::centered(grid_half, grid_n);
    maho::WaveField f(grid);
    for (int ix = 0; ix < grid.nx; ++ix)
        for (int iy = 0; iy < grid.ny; ++iy) {
            maho::Endpoints e2{ep.x1, ep.y1, grid.x(ix), grid.y(iy), ep.T};
            f.at(ix, iy) = maho::kernel(e2, cfg, d, gauge).value;
        }
    std::string path;
    if (format == "bin") {
        path = out_path(g, "kernel.bin");
        maho::write_field(path, f);
    } else {
        path = out_path(g, "kernel.csv");
        std::ofstream os(path);
        maho::write_field_csv(os, f);
    }
    std::cout << "wrote " << path << "\n";
    m.parameters["source"] = {{"x1", ep.x1}, {"y1", ep.y1}, {"T", ep.T}};
    m.parameters["grid"] = {{"n", grid_n}, {"half_width", grid_half}};
    m.outputs.push_back(path);
    finish_manifest(g, m);
    return 0;
}

int run_evolve(const GlobalOpts& g, const maho::OscillatorConfig& cfg,
               const std::string& state, const maho::GaussianSpec& gspec, double a0,
               int grid_n, double grid_half, const std::string& times_csv,
               const std::string& method_name, bool save_fields) {
    const maho::DerivedFrequencies d = maho::derive(cfg);
    const std::vector<double> times = parse_times(times_csv);
    const maho::Method method = method_name == "direct" ? maho::Method::exact_kernel
                                                        : maho::Method::exact_kernel_split;
    const maho::Grid2D grid = maho::Grid2D::centered(grid_half, grid_n);
    const maho::WaveField psi0 = state == "cat" ? maho::cat_state(grid, a0, gspec.sigma)
                                                : maho::gaussian(grid, gspec, cfg);

    auto m = base_manifest(g, cfg, "evolve");
    m.parameters["state"] = state;
    m.parameters["sigma"] = gspec.sigma;
    if (state == "cat") {
        m.parameters["a0"] = a0;
    } else {
        m.parameters["center"] = {gspec.x0, gspec.y0};
        m.parameters["momentum"] = {gspec.px, gspec.py};
    }
    m.parameters["grid"] = {{"n", grid_n}, {"half_width", grid_half}};
    m.parameters["method"] = method_name;
    m.parameters["times"] = times;

    std::vector<maho::Observables> obs;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const maho::PropagationResult pr = maho::propagate(psi0, cfg, d, times[i], method);
        obs.push_back(maho::observables(pr.field, times[i], &psi0));
        if (pr.escape_warning) {
            const std::string w = "probability reached the window edge at t=" +
                                  maho::format_double(times[i]) + " (edge fraction " +
                                  maho::format_double(pr.edge_fraction) + ")";
            std::cerr << "warning: " << w << "\n";
            m.warnings.push_back(w);
        }
        if (save_fields) {
            char name[32];
            std::snprintf(name, sizeof name, "field_%03zu.bin", i);
            const std::string path = out_path(g, name);
            maho::write_field(path, pr.field);
            m.outputs.push_back(path);
        }
        std::cout << "t = " << maho::format_double(times[i])
                  << "  norm = " << maho::format_double(obs.back().norm)
                  << "  <r> = (" << maho::format_double(obs.back().x_mean) << ", "
                  << maho::format_double(obs.back().y_mean) << ")"
                  << "  |autocorr| = " << maho::format_double(obs.back().autocorr)
                  << (pr.segments > 1 ? "  [" + std::to_string(pr.segments) + " steps]" : "")
                  << "\n";
    }
    const std::string csv = out_path(g, "observables.csv");
    std::ofstream os(csv);
    maho::write_observables_csv(os, obs);
    std::cout << "wrote " << csv << "\n";
    m.outputs.push_back(csv);
    finish_manifest(g, m);
    return 0;
}

int run_verify(const GlobalOpts& g, const maho::OscillatorConfig& cfg, bool heavy) {
    const maho::VerifyReport rep = maho::run_verification(cfg, heavy);
    for (const maho::Check& c : rep.checks) {
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << "  measured "
                  << maho::format_double(c.measured) << "  tolerance "
                  << maho::format_double(c.tolerance) << "\n";
    }
    const std::string path = out_path(g, "verify.json");
    maho::write_verify_report(path, rep);
    std::cout << "wrote " << path << "\n";
    auto m = base_manifest(g, cfg, "verify");
    m.parameters["heavy"] = heavy;
    m.parameters["all_pass"] = rep.all_pass;
    m.outputs.push_back(path);
    finish_manifest(g, m);
    return rep.all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"anisotropic charged-oscillator toolkit: spectra, classical"
                 " paths, exact kernels, wave-packet evolution"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON file with m, omega1, omega2, omega0, hbar")
        ->required();
    app.add_option("--out-dir", g.out_dir, "directory for output artifacts");
    app.add_option("--threads", g.threads,
                   "worker threads for grid operations (results are identical"
                   " for any value)");
    long long seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value,
                                    "recorded in the manifest; no operation is stochastic");

    // spectrum
    auto* sp = app.add_subcommand("spectrum", "lowest energy levels");
    int levels = 10;
    sp->add_option("--levels", levels, "number of levels")->check(CLI::PositiveNumber);

    // shared endpoint options
    maho::Endpoints ep;
    auto add_endpoints = [&ep](CLI::App* cmd, bool need_target) {
        cmd->add_option("--x1", ep.x1, "source x")->required();
        cmd->add_option("--y1", ep.y1, "source y")->required();
        auto* x2 = cmd->add_option("--x2", ep.x2, "target x");
        auto* y2 = cmd->add_option("--y2", ep.y2, "target y");
        if (need_target) {
            x2->required();
            y2->required();
        }
        cmd->add_option("--time", ep.T, "elapsed time")->required();
    };

    // trajectory
    auto* tr = app.add_subcommand("trajectory", "classical boundary-value path");
    int samples = 201;
    add_endpoints(tr, true);
    tr->add_option("--samples", samples, "sample count")->check(CLI::Range(2, 1000000));

    // action
    auto* ac = app.add_subcommand("action", "classical action and endpoint velocities");
    int coeff_samples = 200;
    add_endpoints(ac, true);
    ac->add_option("--coeff-samples", coeff_samples, "rows in coefficients.csv")
        ->check(CLI::Range(1, 1000000));

    // kernel
    auto* kn = app.add_subcommand("kernel", "kernel value at a point or map over targets");
    std::string gauge_name = "symmetric";
    int grid_n = 128;
    double grid_half = 0;
    std::string format = "csv";
    add_endpoints(kn, false);
    kn->add_option("--gauge", gauge_name, "symmetric | weighted")
        ->check(CLI::IsMember({"symmetric", "weighted"}));
    auto* gh = kn->add_option("--grid-half", grid_half,
                              "half width of the target map (enables grid mode)");
    kn->add_option("--grid-n", grid_n, "points per axis in grid mode")
        ->check(CLI::Range(2, 4096));
    kn->add_option("--format", format, "csv | bin")->check(CLI::IsMember({"csv", "bin"}));

    // evolve
    auto* ev = app.add_subcommand("evolve", "propagate a packet with the exact kernel");
    std::string state = "gaussian";
    maho::GaussianSpec gspec;
    gspec.sigma = 0.5;
    double a0 = 0;
    std::string times_csv;
    std::string method_name = "split";
    bool save_fields = false;
    int ev_n = 128;
    double ev_half = 0;
    ev->add_option("--state", state, "gaussian | cat")
        ->check(CLI::IsMember({"gaussian", "cat"}));
    ev->add_option("--sigma", gspec.sigma, "packet width")->check(CLI::PositiveNumber);
    ev->add_option("--x0", gspec.x0, "gaussian center x");
    ev->add_option("--y0", gspec.y0, "gaussian center y");
    ev->add_option("--px", gspec.px, "gaussian mean momentum x");
    ev->add_option("--py", gspec.py, "gaussian mean momentum y");
    ev->add_option("--a0", a0, "cat lobe separation")->check(CLI::NonNegativeNumber);
    ev->add_option("--grid-n", ev_n, "points per axis")->check(CLI::Range(2, 4096));
    ev->add_option("--grid-half", ev_half, "half width of the window")
        ->required()
        ->check(CLI::PositiveNumber);
    ev->add_option("--times", times_csv, "comma-separated times (t=0 allowed)")
        ->required();
    ev->add_option("--method", method_name, "direct | split")
        ->check(CLI::IsMember({"direct", "split"}));
    ev->add_flag("--save-fields", save_fields, "write field_NNN.bin per time");

    // verify
    auto* vf = app.add_subcommand("verify", "run consistency suites");
    bool heavy = false;
    vf->add_flag("--heavy", heavy, "include eigensolver and reference-evolution suites");

    CLI11_PARSE(app, argc, argv);

    try {
        const maho::OscillatorConfig cfg = maho::load_config(g.config_path);
        if (seed_opt->count()) g.seed = seed_value;
        apply_threads(g);
        fs::create_directories(g.out_dir);

        if (sp->parsed()) return run_spectrum(g, cfg, levels);
        if (tr->parsed()) return run_trajectory(g, cfg, ep, samples);
        if (ac->parsed()) return run_action(g, cfg, ep, coeff_samples);
        if (kn->parsed())
            return run_kernel(g, cfg, ep, gauge_name, gh->count() > 0, grid_n, grid_half,
                              format);
        if (ev->parsed())
            return run_evolve(g, cfg, state, gspec, a0, ev_n, ev_half, times_csv,
                              method_name, save_fields);
        if (vf->parsed()) return run_verify(g, cfg, heavy);
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const maho::CausticError& e) {
        try {
            return report_caustic(e, maho::load_config(g.config_path));
        } catch (...) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
