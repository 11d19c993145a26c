#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "maho/action.hpp"
#include "maho/classical.hpp"
#include "maho/common.hpp"
#include "maho/evolve.hpp"
#include "maho/grid.hpp"
#include "maho/model.hpp"
#include "maho/oracle.hpp"
#include "maho/spectrum.hpp"

namespace maho {

using json = nlohmann::json;

/// Parse an oscillator configuration from JSON. Required keys: omega1,
/// omega2, omega0. Optional: m, hbar (default 1). Anything else is rejected
/// so that typos cannot silently fall back to defaults.
inline OscillatorConfig config_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
    static const char* known[] = {"m", "omega1", "omega2", "omega0", "hbar"};
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw std::invalid_argument("config: unknown key '" + key + "'");
        if (!value.is_number())
            throw std::invalid_argument("config: key '" + key + "' must be a number");
    }
    for (const char* k : {"omega1", "omega2", "omega0"})
        if (!j.contains(k))
            throw std::invalid_argument("config: missing required key '" + std::string(k) + "'");
    OscillatorConfig cfg;
    cfg.m = j.value("m", 1.0);
    cfg.hbar = j.value("hbar", 1.0);
    cfg.omega1 = j.at("omega1").get<double>();
    cfg.omega2 = j.at("omega2").get<double>();
    cfg.omega0 = j.at("omega0").get<double>();
    validate(cfg);
    return cfg;
}

inline json config_to_json(const OscillatorConfig& cfg) {
    return json{{"m", cfg.m},
                {"omega1", cfg.omega1},
                {"omega2", cfg.omega2},
                {"omega0", cfg.omega0},
                {"hbar", cfg.hbar}};
}

inline OscillatorConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error("config: " + path + ": " + e.what());
    }
    return config_from_json(j);
}

// ---------------------------------------------------------------------------
// CSV artifacts. All writers emit a header row, '\n' line endings, and the
// shortest decimal representation that round-trips each double, so repeated
// runs on identical inputs produce byte-identical files.

namespace detail {

inline void csv_row(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << cells[i];
    }
    os << '\n';
}

} // namespace detail

inline void write_spectrum_csv(std::ostream& os, const std::vector<Level>& levels) {
    os << "n1,n2,n_r,m,energy_printed,energy_canonical\n";
    for (const Level& lv : levels) {
        const LandauLabel lab = landau_map(lv.idx);
        detail::csv_row(os, {std::to_string(lv.idx.n1), std::to_string(lv.idx.n2),
                             std::to_string(lab.n_r), std::to_string(lab.m),
                             format_double(lv.energy_printed),
                             format_double(lv.energy_canonical)});
    }
}

inline void write_trajectory_csv(std::ostream& os, const std::vector<PhasePoint>& pts) {
    os << "t,x,y,vx,vy\n";
    for (const PhasePoint& p : pts)
        detail::csv_row(os, {format_double(p.t), format_double(p.x), format_double(p.y),
                             format_double(p.vx), format_double(p.vy)});
}

inline void write_coefficients_csv(std::ostream& os,
                                   const std::vector<ActionCoefficients>& rows) {
    os << "t,a1,a2,b1,b2,c1,c2,f1,f2,D\n";
    for (const ActionCoefficients& c : rows)
        detail::csv_row(os, {format_double(c.T), format_double(c.a1), format_double(c.a2),
                             format_double(c.b1), format_double(c.b2), format_double(c.c1),
                             format_double(c.c2), format_double(c.f1), format_double(c.f2),
                             format_double(c.D)});
}

inline void write_field_csv(std::ostream& os, const WaveField& f) {
    os << "x,y,re,im,abs,phase\n";
    for (int ix = 0; ix < f.grid.nx; ++ix)
        for (int iy = 0; iy < f.grid.ny; ++iy) {
            const auto v = f.at(ix, iy);
            detail::csv_row(os, {format_double(f.grid.x(ix)), format_double(f.grid.y(iy)),
                                 format_double(v.real()), format_double(v.imag()),
                                 format_double(std::abs(v)), format_double(std::arg(v))});
        }
}

inline void write_observables_csv(std::ostream& os, const std::vector<Observables>& rows) {
    os << "t,norm,x_mean,y_mean,x2_mean,y2_mean,autocorr\n";
    for (const Observables& ob : rows)
        detail::csv_row(os, {format_double(ob.t), format_double(ob.norm),
                             format_double(ob.x_mean), format_double(ob.y_mean),
                             format_double(ob.x2_mean), format_double(ob.y2_mean),
                             format_double(ob.autocorr)});
}

// ---------------------------------------------------------------------------
// Binary field snapshots: explicit little-endian layout independent of host
// byte order.
//
//   bytes 0..7   magic "MAHOFLD1"
//   u32          nx, ny
//   f64          x_min, x_max, y_min, y_max
//   f64 pairs    re, im for each sample, index = ix * ny + iy

inline constexpr char kFieldMagic[8] = {'M', 'A', 'H', 'O', 'F', 'L', 'D', '1'};

namespace detail {

inline void put_u32le(std::ostream& os, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8),
                       static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
    os.write(b, 4);
}

inline void put_f64le(std::ostream& os, double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>(v >> (8 * i));
    os.write(b, 8);
}

inline std::uint32_t get_u32le(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error("field: truncated file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
}

inline double get_f64le(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw std::runtime_error("field: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(v);
}

} // namespace detail

inline void write_field(std::ostream& os, const WaveField& f) {
    os.write(kFieldMagic, sizeof kFieldMagic);
    detail::put_u32le(os, static_cast<std::uint32_t>(f.grid.nx));
    detail::put_u32le(os, static_cast<std::uint32_t>(f.grid.ny));
    detail::put_f64le(os, f.grid.x_min);
    detail::put_f64le(os, f.grid.x_max);
    detail::put_f64le(os, f.grid.y_min);
    detail::put_f64le(os, f.grid.y_max);
    for (const auto& v : f.data) {
        detail::put_f64le(os, v.real());
        detail::put_f64le(os, v.imag());
    }
}

inline void write_field(const std::string& path, const WaveField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("field: cannot open " + path + " for writing");
    write_field(os, f);
    if (!os) throw std::runtime_error("field: write failed for " + path);
}

inline WaveField read_field(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || !std::equal(magic, magic + 8, kFieldMagic))
        throw std::runtime_error("field: bad magic");
    Grid2D g;
    g.nx = static_cast<int>(detail::get_u32le(is));
    g.ny = static_cast<int>(detail::get_u32le(is));
    if (g.nx < 2 || g.ny < 2 || static_cast<long long>(g.nx) * g.ny > (1LL << 28))
        throw std::runtime_error("field: implausible dimensions");
    g.x_min = detail::get_f64le(is);
    g.x_max = detail::get_f64le(is);
    g.y_min = detail::get_f64le(is);
    g.y_max = detail::get_f64le(is);
    WaveField f(g);
    for (auto& v : f.data) {
        const double re = detail::get_f64le(is);
        const double im = detail::get_f64le(is);
        v = {re, im};
    }
    return f;
}

inline WaveField read_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("field: cannot open " + path);
    return read_field(is);
}

// ---------------------------------------------------------------------------
// JSON artifacts.

/// Record of one tool invocation: what ran, with which inputs, what it wrote
/// and what it warned about. Contains no timestamps so identical runs give
/// identical manifests.
struct RunManifest {
    std::string command;
    OscillatorConfig config;
    json parameters = json::object();
    std::vector<std::string> outputs;
    std::vector<std::string> warnings;
};

inline json to_json(const RunManifest& m) {
    return json{{"command", m.command},
                {"config", config_to_json(m.config)},
                {"parameters", m.parameters},
                {"outputs", m.outputs},
                {"warnings", m.warnings}};
}

inline void write_manifest(const std::string& path, const RunManifest& m) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("manifest: cannot open " + path);
    os << to_json(m).dump(2) << '\n';
}

inline json to_json(const CalibrationReport& r) {
    return json{{"chosen_prefactor", r.chosen_prefactor},
                {"residual_chosen", r.residual_chosen},
                {"residual_alternative", r.residual_alternative},
                {"numeric", r.numeric},
                {"predicted", r.predicted}};
}

inline json to_json(const CrossFactorReport& r) {
    return json{{"chosen", r.chosen},
                {"residual_chosen", r.residual_chosen},
                {"residual_alternative", r.residual_alternative}};
}

} // namespace maho
