#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <sys/wait.h>
#include <fstream>
#include <sstream>

#include "qjscc/experiment.hpp"

using namespace qjscc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("qjscc_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(QJSCC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

const char* kSmallConfig = R"(
[source]
sigma_v = 1.0
[channel]
branches = 1
sigma_w = 1.0
[criterion]
kind = mse
[scheme]
kind = linear
[sweep]
gamma_db = 0,10
schemes = linear,bpsk
[grid]
points = 201
[sim]
enabled = true
n_samples = 20000
seed = 4242
)";

}  // namespace

TEST_CASE("ini parsing round trip and errors") {
    const IniDoc doc = IniDoc::parse_text("[a]\nx = 1 # comment\ny=2\n\n[b]\nz = hello\n");
    CHECK(doc.get("a", "x", "") == "1");
    CHECK(doc.get("a", "y", "") == "2");
    CHECK(doc.get("b", "z", "") == "hello");
    CHECK(doc.get("b", "missing", "d") == "d");
    CHECK_THROWS_AS(doc.require("b", "missing"), ConfigError);
    CHECK_THROWS_AS(IniDoc::parse_text("[oops\n"), ConfigError);
    CHECK_THROWS_AS(IniDoc::parse_text("keyvalue\n"), ConfigError);

    const IniDoc again = IniDoc::parse_text(doc.render());
    CHECK(again.render() == doc.render());
}

TEST_CASE("experiment config parsing and scheme validation") {
    const ExperimentConfig cfg = ExperimentConfig::from_ini(IniDoc::parse_text(kSmallConfig));
    CHECK(cfg.source.sigma_v == 1.0);
    CHECK(cfg.levels == 2);
    CHECK(cfg.sweep_schemes == std::vector<std::string>{"linear", "bpsk"});
    CHECK(cfg.sim.n_samples == 20000);

    // config round trip through the manifest form
    const ExperimentConfig back = ExperimentConfig::from_ini(cfg.to_ini());
    CHECK(back.to_ini().render() == cfg.to_ini().render());

    CHECK_THROWS_AS(ExperimentConfig::from_ini(IniDoc::parse_text(
                        "[channel]\nbranches = 2\n[scheme]\nkind = prop1\n")),
                    ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_ini(IniDoc::parse_text(
                        "[quantizer]\nlevels = 4\n")),
                    ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_ini(IniDoc::parse_text(
                        "[criterion]\nkind = dop\n")),
                    ConfigError);
}

TEST_CASE("sweep artifacts are reproducible and manifests re-run bit-identically") {
    const fs::path dir_a = fresh_dir("sweep_a");
    const fs::path dir_b = fresh_dir("sweep_b");
    const fs::path cfg_path = dir_a / "config.ini";
    {
        std::ofstream out(cfg_path);
        out << kSmallConfig;
    }
    REQUIRE(run_cli("sweep --config " + cfg_path.string() + " --out " + dir_a.string()) == 0);
    REQUIRE(run_cli("sweep --config " + cfg_path.string() + " --out " + dir_b.string()) == 0);
    CHECK(slurp(dir_a / "sweep.csv") == slurp(dir_b / "sweep.csv"));

    // re-run from the emitted manifest: identical CSV bytes
    const fs::path dir_c = fresh_dir("sweep_c");
    REQUIRE(run_cli("sweep --config " + (dir_a / "manifest.ini").string() + " --out " +
                    dir_c.string()) == 0);
    CHECK(slurp(dir_a / "sweep.csv") == slurp(dir_c / "sweep.csv"));

    const std::string csv = slurp(dir_a / "sweep.csv");
    CHECK(csv.rfind("gamma_db,power,criterion,scheme,analytical,mc_value,mc_stderr,mc_n\n", 0) ==
          0);
}

TEST_CASE("design writes mapping and decoder tables") {
    const fs::path dir = fresh_dir("design");
    const fs::path cfg_path = dir / "config.ini";
    {
        std::ofstream out(cfg_path);
        out << "[scheme]\nkind = prop1\n[sweep]\ngamma_db = 0\n[grid]\npoints = 201\n";
    }
    REQUIRE(run_cli("design --config " + cfg_path.string() + " --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "mapping_prop1_g0.csv"));
    CHECK(fs::exists(dir / "decoder_prop1_g0.csv"));
    CHECK(fs::exists(dir / "manifest.ini"));
    const std::string mapping = slurp(dir / "mapping_prop1_g0.csv");
    CHECK(mapping.rfind("v,f\n", 0) == 0);
    CHECK(std::count(mapping.begin(), mapping.end(), '\n') == 202);  // header + grid rows
}

TEST_CASE("compare flags ordering violations and handles identical inputs") {
    const fs::path dir = fresh_dir("compare");
    const fs::path cfg_path = dir / "config.ini";
    {
        std::ofstream out(cfg_path);
        out << kSmallConfig;
    }
    REQUIRE(run_cli("sweep --config " + cfg_path.string() + " --out " + dir.string()) == 0);
    const std::string sweep = (dir / "sweep.csv").string();

    // identical sweeps: zero delta, success
    CHECK(run_cli("compare " + sweep + " " + sweep + " --expect-le") == 0);

    // split by scheme: bpsk is dominated by linear at these SNRs, so
    // expecting bpsk <= linear must fail
    std::ifstream in(sweep);
    std::string header, line, a_rows, b_rows;
    std::getline(in, header);
    while (std::getline(in, line)) {
        if (line.find(",bpsk,") != std::string::npos) a_rows += line + "\n";
        if (line.find(",linear,") != std::string::npos) b_rows += line + "\n";
    }
    const fs::path fa = dir / "a.csv", fb = dir / "b.csv";
    {
        std::ofstream oa(fa), ob(fb);
        oa << header << "\n" << a_rows;
        ob << header << "\n" << b_rows;
    }
    CHECK(run_cli("compare " + fb.string() + " " + fa.string() + " --expect-le") == 0);
    CHECK(run_cli("compare " + fa.string() + " " + fb.string() + " --expect-le") == 1);
}

TEST_CASE("config errors exit with status 2") {
    const fs::path dir = fresh_dir("badconfig");
    const fs::path cfg_path = dir / "config.ini";
    {
        std::ofstream out(cfg_path);
        out << "[scheme]\nkind = warp_drive\n";
    }
    CHECK(run_cli("design --config " + cfg_path.string() + " --out " + dir.string()) == 2);
    CHECK(run_cli("design --config /nonexistent.ini") == 2);
}

TEST_CASE("simulate command emits an estimate") {
    const fs::path dir = fresh_dir("simcmd");
    const fs::path cfg_path = dir / "config.ini";
    {
        std::ofstream out(cfg_path);
        out << "[scheme]\nkind = linear\n[sweep]\ngamma_db = 0\n[grid]\npoints = 201\n"
               "[sim]\nn_samples = 50000\nseed = 7\n";
    }
    REQUIRE(run_cli("simulate --config " + cfg_path.string() + " --out " + dir.string()) == 0);
    CHECK(fs::exists(dir / "simulate.csv"));
}
