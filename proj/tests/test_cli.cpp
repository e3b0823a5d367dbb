#include "mirrorqed/runconfig.hpp"

#include "mirrorqed/errors.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

using namespace mirrorqed;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("mirrorqed_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

std::string slurp(const std::string& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config validation") {
    SUBCASE("unknown keys are rejected") {
        json cfg{{"task", "couplings"}, {"bogus", 1}};
        CHECK_THROWS_AS(run_task("couplings", cfg), ConfigError);
    }
    SUBCASE("unknown nested keys are rejected") {
        json cfg{{"array", {{"positions", {1.25, 2.25, 3.25}}, {"oops", 0}}}};
        CHECK_THROWS_AS(run_task("couplings", cfg), ConfigError);
    }
    SUBCASE("task mismatch is rejected") {
        json cfg{{"task", "gate"}};
        CHECK_THROWS_AS(run_task("couplings", cfg), ConfigError);
    }
    SUBCASE("unknown task is rejected") {
        CHECK_THROWS_AS(run_task("frobnicate", json::object()), ConfigError);
    }
    SUBCASE("empty sweep range is rejected") {
        TempDir tmp;
        json cfg{{"Omega_values", json::array()}, {"out", tmp.path.string()}};
        CHECK_THROWS_AS(run_task("sweep-fig3a", cfg), ConfigError);
    }
    SUBCASE("missing required sections are rejected") {
        CHECK_THROWS_AS(run_task("gate", json::object()), ConfigError);
        CHECK_THROWS_AS(run_task("cz", json::object()), ConfigError);
    }
}

TEST_CASE("config hash is canonical") {
    const json a{{"x", 1}, {"y", 2}};
    const json b{{"y", 2}, {"x", 1}};
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a) != config_hash(json{{"x", 1}, {"y", 3}}));
    CHECK(config_hash(a).size() == 16);
}

TEST_CASE("couplings task writes deterministic artifacts with a manifest") {
    TempDir tmp1, tmp2;
    json cfg{{"task", "couplings"}};
    CliOverrides o1;
    o1.out = tmp1.path.string();
    const auto arts = run_task("couplings", cfg, o1);
    REQUIRE(arts.size() == 3);

    const std::string csv = slurp((tmp1.path / "couplings.csv").string());
    CHECK(csv.find("n,m,J_nm,Gamma_nm") != std::string::npos);
    // First data row: J at the rounding floor, Gamma = gamma0.
    std::istringstream lines(csv.substr(csv.find("1,1,")));
    std::string row;
    std::getline(lines, row);
    double jval = 1.0, gval = 0.0;
    CHECK(std::sscanf(row.c_str(), "1,1,%lf,%lf", &jval, &gval) == 2);
    CHECK(std::abs(jval) < 1e-12);
    CHECK(gval == doctest::Approx(1.0).epsilon(1e-12));

    const json manifest = json::parse(slurp((tmp1.path / "manifest.json").string()));
    CHECK(manifest["task"] == "couplings");
    CHECK(manifest["config_hash"] == config_hash(cfg));
    CHECK(manifest.contains("code_version"));
    CHECK(manifest.contains("wall_time_s"));
    CHECK(manifest["artifacts"].size() == 2);

    // Byte-identical artifacts for identical configs.
    CliOverrides o2;
    o2.out = tmp2.path.string();
    run_task("couplings", cfg, o2);
    CHECK(slurp((tmp1.path / "couplings.csv").string()) ==
          slurp((tmp2.path / "couplings.csv").string()));
    CHECK(slurp((tmp1.path / "jump_operator.json").string()) ==
          slurp((tmp2.path / "jump_operator.json").string()));
}

TEST_CASE("gate task emits fidelity and the error model") {
    TempDir tmp;
    json cfg{{"gate",
              {{"kind", "R_DG"}, {"theta", 0.7853981633974483},
               {"phi", -1.5707963267948966}, {"Omega", 0.05}, {"J", 10.0}}}};
    CliOverrides o;
    o.out = tmp.path.string();
    run_task("gate", cfg, o);
    const json out = json::parse(slurp((tmp.path / "gate.json").string()));
    CHECK(out["fidelity"].get<double>() > 0.999);
    CHECK(out["error_model"]["gamma_d"].get<double>() > 0.0);
    CHECK(out["leakage"].get<double>() < 1e-3);
}

TEST_CASE("cz task reports numerical and closed-form overlaps") {
    TempDir tmp;
    json cfg{{"packet", {{"kind", "gaussian"}, {"tau", 4.0}, {"dt", 0.02}}}, {"J", 10.0}};
    CliOverrides o;
    o.out = tmp.path.string();
    run_task("cz", cfg, o);
    const json out = json::parse(slurp((tmp.path / "cz.json").string()));
    CHECK(std::abs(out["O_G"]["re"].get<double>() - out["O_G_closed"]["re"].get<double>()) < 1e-3);
    CHECK(out["zero_bandwidth_infidelity"].get<double>() ==
          doctest::Approx(0.6 / 1601.0).epsilon(1e-9));
}

TEST_CASE("protocol task round-trips through JSON") {
    TempDir tmp;
    json cfg{{"protocol", {{"kind", "cluster_1d"}, {"m", 3}}}};
    CliOverrides o;
    o.out = tmp.path.string();
    run_task("protocol", cfg, o);
    const json out = json::parse(slurp((tmp.path / "protocol.json").string()));
    CHECK(out["fidelity"].get<double>() > 1.0 - 1e-9);
    CHECK(out["matter_purity"].get<double>() > 1.0 - 1e-9);
    CHECK(out["stabilizers"].size() == 3);
    CHECK(out.contains("amplitudes"));
}

TEST_CASE("emit task artifacts") {
    TempDir tmp;
    json cfg{{"target", {{"kind", "gaussian"}, {"tau", 1.75}}}};
    CliOverrides o;
    o.out = tmp.path.string();
    const auto arts = run_task("emit", cfg, o);
    CHECK(fs::exists(tmp.path / "wavepacket.csv"));
    CHECK(fs::exists(tmp.path / "coupling.csv"));
    const json out = json::parse(slurp((tmp.path / "emit_summary.json").string()));
    CHECK(out["target_overlap_fidelity"].get<double>() > 0.99);
}

TEST_CASE("sweep determinism with a thread pool") {
    TempDir tmp1, tmp2;
    json cfg{{"J", 10.0}, {"Omega_values", {0.2, 0.1, 0.05}}, {"gamma_prime_values", {0.0}}};
    CliOverrides o1;
    o1.out = tmp1.path.string();
    o1.threads = 3;
    run_task("sweep-fig3a", cfg, o1);
    CliOverrides o2;
    o2.out = tmp2.path.string();
    o2.threads = 1;
    run_task("sweep-fig3a", cfg, o2);
    CHECK(slurp((tmp1.path / "fig3a.csv").string()) == slurp((tmp2.path / "fig3a.csv").string()));
}
