#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <filesystem>
#include <random>

#include "shocknozzle/cli.hpp"
#include "shocknozzle/config.hpp"
#include "shocknozzle/io.hpp"

using namespace shocknozzle;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("shocknozzle_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
};

std::string standard_config(const fs::path& out, const std::string& exit_line) {
    return "[gas]\ngamma = 2.0\nentropy_const = 1.0\n"
           "[nozzle]\nL0 = 0\nL1 = 1\nrho0 = 1\nu0 = 2\n"
           "[force]\ncoeffs = 0.1\n"
           "[exit]\n" + exit_line + "\nepsilon = 0\npex = cosine\npex_mode = 1\n"
           "[grid]\nn1 = 33\nn2 = 33\n"
           "[tolerances]\ntol_shoot = 1e-10\ntol_fp = 1e-10\n"
           "[background]\nsteps = 800\n"
           "[output]\ndir = " + out.string() + "\n";
}

int run(std::vector<std::string> args) {
    std::vector<const char*> argv;
    argv.push_back("shocknozzle");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

} // namespace

TEST_CASE("config parse/serialize round-trip is the identity") {
    SolverConfig c;
    c.gamma = 1.7320508075688772;
    c.entropy_const = 0.123456789012345678;
    c.force_coeffs = {0.1, -0.05, 1.0 / 3.0};
    c.exit_pressure = 2.6926258228076068;
    c.epsilon = 1e-3;
    c.pex_samples = {0.1, 0.2, 0.3};
    c.pex = "samples";
    c.n1 = 65;
    c.n2 = 129;
    const SolverConfig back = SolverConfig::parse(c.serialize());
    CHECK(back == c);
    CHECK(SolverConfig::parse(back.serialize()) == back);
}

TEST_CASE("config errors carry precise locations") {
    CHECK_THROWS_WITH(SolverConfig::parse("[gas]\ngamma = abc\n"),
                      Catch::Matchers::ContainsSubstring("gas.gamma"));
    CHECK_THROWS_WITH(SolverConfig::parse("[gas]\nunknown_key = 1\n"),
                      Catch::Matchers::ContainsSubstring("unknown"));
    CHECK_THROWS_WITH(SolverConfig::parse("gamma = 1.4\n"),
                      Catch::Matchers::ContainsSubstring("section"));
    SolverConfig c = SolverConfig::parse("[gas]\ngamma = 5\n");
    CHECK_THROWS_WITH(c.make_setup(), Catch::Matchers::ContainsSubstring("[gas]"));
}

TEST_CASE("tables reload bit-identically") {
    TempDir tmp;
    CsvTable t;
    t.comments = {"bit-exactness check"};
    t.columns = {"a", "b"};
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1e20, 1e20);
    t.data.assign(2, {});
    for (int k = 0; k < 200; ++k) {
        t.data[0].push_back(u(rng));
        t.data[1].push_back(u(rng) * 1e-300);
    }
    t.data[0].push_back(1.0 / 3.0);
    t.data[1].push_back(2.6926258228076068);
    write_csv(tmp.path / "t.csv", t);
    const CsvTable back = read_csv(tmp.path / "t.csv");
    REQUIRE(back.rows() == t.rows());
    for (std::size_t c = 0; c < 2; ++c)
        for (std::size_t r = 0; r < t.rows(); ++r) {
            const double x = t.data[c][r], y = back.data[c][r];
            CHECK(std::memcmp(&x, &y, sizeof(double)) == 0);
        }
}

TEST_CASE("corrupted tables report the byte offset") {
    TempDir tmp;
    write_text_file(tmp.path / "bad.csv", "# c\na,b\n1.0,2.0\n1.0,zap\n");
    CHECK_THROWS_WITH(read_csv(tmp.path / "bad.csv"),
                      Catch::Matchers::ContainsSubstring("byte"));
}

TEST_CASE("cli background: bundle written and invariants hold") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "c.ini";
    const fs::path out = tmp.path / "out";
    write_text_file(cfg, standard_config(out, "shock_position = 0.5"));
    CHECK(run({"--config", cfg.string(), "--quiet", "background"}) == ExitOk);
    CHECK(fs::exists(out / "background_branches.csv"));
    const json s = read_json(out / "background_summary.json");
    CHECK(s["Ls"].get<double>() == Catch::Approx(0.5));
    CHECK(s["rh_residuals"]["mass"].get<double>() <= 1e-10);
    CHECK(run({"--config", cfg.string(), "--quiet", "verify", (out).string()}) == ExitOk);
}

TEST_CASE("cli background: exit pressure inside and outside the window") {
    TempDir tmp;
    const fs::path cfg_in = tmp.path / "in.ini";
    const fs::path cfg_out = tmp.path / "outside.ini";
    write_text_file(cfg_in, standard_config(tmp.path / "a", "exit_pressure = 2.69"));
    write_text_file(cfg_out, standard_config(tmp.path / "b", "exit_pressure = 3.5"));
    CHECK(run({"--config", cfg_in.string(), "--quiet", "background"}) == ExitOk);
    CHECK(run({"--config", cfg_out.string(), "--quiet", "background"}) == ExitValidation);
}

TEST_CASE("cli window: degenerate window reported for zero force") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "c.ini";
    const fs::path out = tmp.path / "out";
    std::string text = standard_config(out, "shock_position = 0.5");
    text.replace(text.find("coeffs = 0.1"), std::strlen("coeffs = 0.1"), "coeffs = 0.0");
    write_text_file(cfg, text);
    CHECK(run({"--config", cfg.string(), "--quiet", "window"}) == ExitOk);
    const json w = read_json(out / "window.json");
    CHECK(w["degenerate"].get<bool>());
}

TEST_CASE("cli perturb: zero amplitude bundle verifies clean") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "c.ini";
    const fs::path out = tmp.path / "out";
    write_text_file(cfg, standard_config(out, "shock_position = 0.5"));
    CHECK(run({"--config", cfg.string(), "--quiet", "perturb"}) == ExitOk);
    const json rep = read_json(out / "iteration_report.json");
    CHECK(rep["iterations"].get<int>() == 1);
    const json res = read_json(out / "residual_summary.json");
    CHECK(res["eq_density"].get<double>() <= 1e-10);
    CHECK(res["exit_pressure"].get<double>() <= 1e-10);
    CHECK(run({"--config", cfg.string(), "--quiet", "verify", out.string()}) == ExitOk);
}

TEST_CASE("cli perturb honours --epsilon and --grid overrides") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "c.ini";
    const fs::path out = tmp.path / "out";
    write_text_file(cfg, standard_config(out, "shock_position = 0.5"));
    CHECK(run({"--config", cfg.string(), "--quiet", "--epsilon", "1e-3", "--grid", "33x49",
               "perturb"}) == ExitOk);
    const json meta = read_json(out / "fields_computational.csv.meta.json");
    CHECK(meta["grid"]["n1"].get<int>() == 33);
    CHECK(meta["grid"]["n2"].get<int>() == 49);
    CHECK(run({"--config", cfg.string(), "--quiet", "--epsilon", "1e-3", "--grid", "33x49",
               "verify", out.string()}) == ExitOk);
}

TEST_CASE("cli perturb: malformed exit profile is a validation error") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "c.ini";
    std::string text = standard_config(tmp.path / "out", "shock_position = 0.5");
    // 33 samples of a profile with nonzero wall slope
    std::string samples = "pex_samples =";
    for (int j = 0; j < 33; ++j) samples += " " + format_double(-1.0 + 2.0 * j / 32.0);
    text.replace(text.find("pex = cosine"), std::strlen("pex = cosine"), "pex = samples");
    text.replace(text.find("pex_mode = 1"), std::strlen("pex_mode = 1"), samples);
    write_text_file(cfg, text);
    CHECK(run({"--config", cfg.string(), "--quiet", "--epsilon", "1e-3", "perturb"}) ==
          ExitValidation);
}

TEST_CASE("cli verify detects tampered tables with coordinates") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "c.ini";
    const fs::path out = tmp.path / "out";
    write_text_file(cfg, standard_config(out, "shock_position = 0.5"));
    REQUIRE(run({"--config", cfg.string(), "--quiet", "background"}) == ExitOk);
    // flip one density negative
    CsvTable t = read_csv(out / "background_branches.csv");
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        if (t.columns[c] == "rho") t.data[c][t.rows() / 2] *= -1.0;
    write_csv(out / "background_branches.csv", t);
    CHECK(run({"--config", cfg.string(), "--quiet", "verify", out.string()}) == ExitValidation);
    const json rep = read_json(out / "verify_report.json");
    bool found = false;
    for (const auto& c : rep["checks"])
        if (c["name"] == "density_positive") {
            CHECK_FALSE(c["pass"].get<bool>());
            CHECK(c["detail"].get<std::string>().find("x1") != std::string::npos);
            found = true;
        }
    CHECK(found);
}

TEST_CASE("cli verify: missing results give an I/O error") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "c.ini";
    write_text_file(cfg, standard_config(tmp.path / "none", "shock_position = 0.5"));
    CHECK(run({"--config", cfg.string(), "--quiet", "verify", (tmp.path / "none").string()}) ==
          ExitIo);
}

TEST_CASE("cli sweep over the shock position produces a monotone pressure column") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "c.ini";
    const fs::path out = tmp.path / "out";
    write_text_file(cfg, standard_config(out, "shock_position = 0.5"));
    CHECK(run({"--config", cfg.string(), "--quiet", "sweep", "--param", "shock_position",
               "--from", "0.1", "--to", "0.9", "--count", "11"}) == ExitOk);
    const CsvTable t = read_csv(out / "sweep_summary.csv");
    const auto& pe = t.column("Pe");
    REQUIRE(pe.size() == 11);
    for (std::size_t k = 1; k < pe.size(); ++k) CHECK(pe[k] < pe[k - 1]);
}

TEST_CASE("cli perturb: exhausted iteration budget maps to the divergence exit code") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "c.ini";
    std::string text = standard_config(tmp.path / "out", "shock_position = 0.5");
    text.replace(text.find("tol_fp = 1e-10"), std::strlen("tol_fp = 1e-10"),
                 "tol_fp = 1e-30\nmax_iter = 2");
    write_text_file(cfg, text);
    CHECK(run({"--config", cfg.string(), "--quiet", "--epsilon", "1e-3", "perturb"}) ==
          ExitDivergence);
}

TEST_CASE("cli sweep over epsilon reports a stable linear response") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "c.ini";
    const fs::path out = tmp.path / "out";
    write_text_file(cfg, standard_config(out, "shock_position = 0.5"));
    CHECK(run({"--config", cfg.string(), "--quiet", "sweep", "--param", "epsilon", "--values",
               "1e-3,5e-4"}) == ExitOk);
    const CsvTable t = read_csv(out / "sweep_summary.csv");
    const auto& ratio = t.column("norm_V_over_eps");
    REQUIRE(ratio.size() == 2);
    CHECK(std::abs(ratio[0] / ratio[1] - 1.0) <= 0.1);
}

TEST_CASE("cli sweep: empty range writes an empty summary and exits cleanly") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "c.ini";
    const fs::path out = tmp.path / "out";
    write_text_file(cfg, standard_config(out, "shock_position = 0.5"));
    CHECK(run({"--config", cfg.string(), "--quiet", "sweep", "--param", "epsilon"}) == ExitOk);
    const CsvTable t = read_csv(out / "sweep_summary.csv");
    CHECK(t.rows() == 0);
}

TEST_CASE("cli sweep isolates per-run failures") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "c.ini";
    const fs::path out = tmp.path / "out";
    write_text_file(cfg, standard_config(out, "shock_position = 0.5"));
    // 1.5 lies outside the nozzle: that run fails, the others succeed
    CHECK(run({"--config", cfg.string(), "--quiet", "sweep", "--param", "shock_position",
               "--values", "0.3,1.5,0.7"}) == ExitOk);
    const CsvTable t = read_csv(out / "sweep_summary.csv");
    CHECK(t.rows() == 2);
    CHECK(fs::exists(out / "sweep_failures.json"));
}

TEST_CASE("cli rejects configs with both or neither background selector") {
    TempDir tmp;
    const fs::path cfg = tmp.path / "c.ini";
    std::string both = standard_config(tmp.path / "out",
                                       "exit_pressure = 2.69\nshock_position = 0.5");
    write_text_file(cfg, both);
    CHECK(run({"--config", cfg.string(), "--quiet", "background"}) == ExitValidation);
    std::string neither = standard_config(tmp.path / "out", "# no selector");
    write_text_file(cfg, neither);
    CHECK(run({"--config", cfg.string(), "--quiet", "background"}) == ExitValidation);
}
