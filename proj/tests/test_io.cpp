#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "maho/io.hpp"

using namespace maho;

namespace {

const OscillatorConfig kFlagship{1.0, 2.0, 2.0, 3.0, 1.0};

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

} // namespace

TEST_CASE("configuration parsing enforces its schema") {
    const json full = {{"m", 2.0}, {"omega1", 1.5}, {"omega2", 0.5},
                       {"omega0", 0.8}, {"hbar", 0.9}};
    const OscillatorConfig cfg = config_from_json(full);
    REQUIRE(cfg.m == 2.0);
    REQUIRE(cfg.omega1 == 1.5);
    REQUIRE(cfg.omega2 == 0.5);
    REQUIRE(cfg.omega0 == 0.8);
    REQUIRE(cfg.hbar == 0.9);

    const OscillatorConfig defaults =
        config_from_json({{"omega1", 1.0}, {"omega2", 2.0}, {"omega0", 0.0}});
    REQUIRE(defaults.m == 1.0);
    REQUIRE(defaults.hbar == 1.0);

    auto reject = [](const json& j) {
        REQUIRE_THROWS_AS(config_from_json(j), std::invalid_argument);
    };
    reject(json::array({1, 2, 3}));
    reject({{"omega1", 1.0}, {"omega2", 2.0}});             // missing omega0
    reject({{"omega1", 1.0}, {"omega2", 2.0}, {"omega0", 0.0}, {"omega3", 1.0}});
    reject({{"omega1", "fast"}, {"omega2", 2.0}, {"omega0", 0.0}});
    reject({{"omega1", -1.0}, {"omega2", 2.0}, {"omega0", 0.0}});  // validate()
}

TEST_CASE("configuration JSON round trip") {
    OscillatorConfig cfg{0.7, 1.1, 0.4, 0.2, 2.5};
    const OscillatorConfig back = config_from_json(config_to_json(cfg));
    REQUIRE(back.m == cfg.m);
    REQUIRE(back.omega1 == cfg.omega1);
    REQUIRE(back.omega2 == cfg.omega2);
    REQUIRE(back.omega0 == cfg.omega0);
    REQUIRE(back.hbar == cfg.hbar);
}

TEST_CASE("config file loading reports parse failures with the path") {
    const auto path = temp_file("maho_io_cfg.json");
    {
        std::ofstream out(path);
        out << config_to_json(kFlagship).dump();
    }
    const OscillatorConfig cfg = load_config(path.string());
    REQUIRE(cfg.omega0 == 3.0);

    {
        std::ofstream out(path);
        out << "{ not json";
    }
    REQUIRE_THROWS_WITH(load_config(path.string()),
                        Catch::Matchers::StartsWith("config: "));
    REQUIRE_THROWS_WITH(load_config("/nonexistent/maho.json"),
                        Catch::Matchers::StartsWith("config: cannot open"));
    std::filesystem::remove(path);
}

TEST_CASE("spectrum CSV matches the checked-in reference bytes") {
    const auto levels = levels_sorted(kFlagship, 10);
    std::ostringstream ss;
    write_spectrum_csv(ss, levels);
    const std::string golden =
        slurp(std::filesystem::path(MAHO_GOLDEN_DIR) / "spectrum_flagship.csv");
    REQUIRE(ss.str() == golden);
}

TEST_CASE("doubles are printed in shortest round-trip form") {
    REQUIRE(format_double(1.0) == "1");
    REQUIRE(format_double(0.1) == "0.1");
    REQUIRE(format_double(-2.5) == "-2.5");
    REQUIRE(format_double(0.0) == "0");

    std::mt19937_64 rng(91219);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 200; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 13) - 6);
        REQUIRE(std::stod(format_double(v)) == v);
    }
}

TEST_CASE("binary field snapshots round trip bitwise") {
    const Grid2D g{5, 7, -1.25, 2.0, 0.5, 3.5};
    WaveField f(g);
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (auto& v : f.data) v = {u(rng), u(rng)};
    f.data[3] = {0.0, -0.0};
    f.data[4] = {5e-324, -5e-324};  // denormals survive too

    std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
    write_field(ss, f);
    const WaveField back = read_field(ss);
    REQUIRE(back.grid == f.grid);
    REQUIRE(back.data.size() == f.data.size());
    REQUIRE(std::memcmp(back.data.data(), f.data.data(),
                        f.data.size() * sizeof(f.data[0])) == 0);
}

TEST_CASE("binary field snapshots round trip through a file") {
    const auto path = temp_file("maho_io_field.bin");
    WaveField f(Grid2D::centered(2.0, 6));
    for (std::size_t i = 0; i < f.data.size(); ++i)
        f.data[i] = {static_cast<double>(i), -0.5 * static_cast<double>(i)};
    write_field(path.string(), f);
    const WaveField back = read_field(path.string());
    REQUIRE(back.grid == f.grid);
    REQUIRE(back.data == f.data);
    std::filesystem::remove(path);
}

TEST_CASE("binary field reader rejects malformed input") {
    WaveField f(Grid2D::centered(1.0, 4));
    std::stringstream good(std::ios::in | std::ios::out | std::ios::binary);
    write_field(good, f);
    const std::string bytes = good.str();

    {
        std::string corrupt = bytes;
        corrupt[0] = 'X';
        std::istringstream is(corrupt, std::ios::binary);
        REQUIRE_THROWS_WITH(read_field(is), "field: bad magic");
    }
    {
        std::istringstream is(bytes.substr(0, bytes.size() - 5), std::ios::binary);
        REQUIRE_THROWS_WITH(read_field(is), "field: truncated file");
    }
    {
        std::istringstream is(bytes.substr(0, 4), std::ios::binary);
        REQUIRE_THROWS_WITH(read_field(is), "field: bad magic");
    }
    {
        // Header claiming 2^15 x 2^15 samples: over the plausibility cap.
        std::stringstream is(std::ios::in | std::ios::out | std::ios::binary);
        is.write(kFieldMagic, sizeof kFieldMagic);
        detail::put_u32le(is, 1u << 15);
        detail::put_u32le(is, 1u << 15);
        REQUIRE_THROWS_WITH(read_field(is), "field: implausible dimensions");
    }
}

TEST_CASE("field CSV lists one labeled row per sample") {
    WaveField f(Grid2D{2, 2, 0.0, 1.0, 0.0, 2.0});
    f.at(0, 0) = {1.0, 0.0};
    f.at(0, 1) = {0.0, -1.0};
    f.at(1, 0) = {0.5, 0.5};
    f.at(1, 1) = {0.0, 0.0};
    std::ostringstream ss;
    write_field_csv(ss, f);
    std::istringstream lines(ss.str());
    std::string line;
    std::getline(lines, line);
    REQUIRE(line == "x,y,re,im,abs,phase");
    std::getline(lines, line);
    REQUIRE(line == "0,0,1,0,1,0");
    std::getline(lines, line);
    REQUIRE(line == "0,2,0,-1,1," + format_double(std::arg(std::complex<double>(0, -1))));
    int rows = 2;
    while (std::getline(lines, line)) ++rows;
    REQUIRE(rows == 4);
}

TEST_CASE("trajectory, coefficient, and observable CSV headers are stable") {
    std::ostringstream t;
    write_trajectory_csv(t, {PhasePoint{0.0, 1.0, 0.0, 0.0, -1.5}});
    REQUIRE(t.str() == "t,x,y,vx,vy\n0,1,0,0,-1.5\n");

    std::ostringstream o;
    write_observables_csv(o, {});
    REQUIRE(o.str() == "t,norm,x_mean,y_mean,x2_mean,y2_mean,autocorr\n");

    std::ostringstream c;
    write_coefficients_csv(c, {});
    REQUIRE(c.str() == "t,a1,a2,b1,b2,c1,c2,f1,f2,D\n");
}

TEST_CASE("run manifests are deterministic and carry the configuration") {
    RunManifest m;
    m.command = "spectrum";
    m.config = kFlagship;
    m.parameters = {{"levels", 10}, {"seed", 42}};
    m.outputs = {"spectrum.csv"};
    m.warnings = {};

    const json j = to_json(m);
    REQUIRE(j.at("command") == "spectrum");
    REQUIRE(j.at("config").at("omega0") == 3.0);
    REQUIRE(j.at("parameters").at("seed") == 42);
    REQUIRE(j.at("outputs")[0] == "spectrum.csv");

    const auto p1 = temp_file("maho_manifest_a.json");
    const auto p2 = temp_file("maho_manifest_b.json");
    write_manifest(p1.string(), m);
    write_manifest(p2.string(), m);
    REQUIRE(slurp(p1) == slurp(p2));
    REQUIRE(json::parse(slurp(p1)) == j);
    std::filesystem::remove(p1);
    std::filesystem::remove(p2);
}

TEST_CASE("analysis reports serialize their decision fields") {
    CalibrationReport cal;
    cal.chosen_prefactor = 0.5;
    cal.residual_chosen = 1e-5;
    cal.residual_alternative = 0.4;
    cal.numeric = {2.5, 3.5};
    cal.predicted = {2.5, 3.5};
    const json jc = to_json(cal);
    REQUIRE(jc.at("chosen_prefactor") == 0.5);
    REQUIRE(jc.at("numeric").size() == 2);

    CrossFactorReport cf;
    cf.chosen = 4.0;
    cf.residual_chosen = 1e-12;
    cf.residual_alternative = 0.02;
    const json jf = to_json(cf);
    REQUIRE(jf.at("chosen") == 4.0);
    REQUIRE(jf.at("residual_alternative") == 0.02);
}
