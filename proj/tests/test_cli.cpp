#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;
};

fs::path work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "scfqkd_cli_test";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

RunResult run_cli(const std::string& args) {
    const char* bin = std::getenv("SCFQKD_CLI_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "SCFQKD_CLI_BIN must point at the CLI binary");
    static int counter = 0;
    const fs::path capture = work_dir() / ("out_" + std::to_string(counter++) + ".txt");
    const std::string cmd = std::string(bin) + " " + args + " > " + capture.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(capture);
    std::stringstream buffer;
    buffer << in.rdbuf();
    result.output = buffer.str();
    return result;
}

std::string write_file(const std::string& name, const std::string& content) {
    const fs::path path = work_dir() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

const std::string kGoodConfig = R"({
  "nu_upper_A": 1e-8, "nu_upper_B": 1e-8,
  "mu_upper_A": 1e-3, "mu_upper_B": 1e-3,
  "p0": 0.97, "r": 0.0, "N": 1,
  "distance_km": 100.0, "alpha_f": 0.2, "eta_d": 0.6,
  "p_d": 1e-9, "E_d": 0.04, "f": 1.1
})";

const std::string kMcConfig = R"({
  "nu_upper_A": 1e-8, "nu_upper_B": 1e-8,
  "mu_upper_A": 0.01, "mu_upper_B": 0.01,
  "p0": 0.9, "r": 0.1, "N": 200000,
  "distance_km": 50.0, "alpha_f": 0.2, "eta_d": 0.6,
  "p_d": 1e-9, "E_d": 0.04, "f": 1.1
})";

int count_lines(const std::string& text) {
    int lines = 0;
    for (const char c : text)
        if (c == '\n') ++lines;
    return lines;
}

}  // namespace

TEST_CASE("rate: positive key rate at the reference point") {
    const std::string config = write_file("good.json", kGoodConfig);
    const RunResult result = run_cli("rate --config " + config);
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("key_rate") != std::string::npos);
    CHECK(result.output.find("no_key") == std::string::npos);
}

TEST_CASE("rate: beyond the secure range the no-key flag surfaces") {
    const std::string config = write_file("good2.json", kGoodConfig);
    const RunResult result = run_cli("rate --config " + config + " --distance 400");
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("no_key") != std::string::npos);
}

TEST_CASE("config errors exit with code 2 and name the field") {
    const std::string bad_value =
        write_file("bad_value.json", R"({"p0": 1.2, "mu_upper_A": 0.1})");
    RunResult result = run_cli("rate --config " + bad_value);
    CHECK(result.exit_code == 2);
    CHECK(result.output.find("p0") != std::string::npos);

    const std::string unknown_key = write_file("unknown.json", R"({"pp0": 0.5})");
    result = run_cli("rate --config " + unknown_key);
    CHECK(result.exit_code == 2);
    CHECK(result.output.find("pp0") != std::string::npos);

    const std::string not_json = write_file("broken.json", "{nope");
    result = run_cli("rate --config " + not_json);
    CHECK(result.exit_code == 2);
}

TEST_CASE("sweep: fixed-params CSV schema, sidecar, ordering") {
    const std::string config = write_file("sweep.json", kGoodConfig);
    const std::string csv = (work_dir() / "sweep.csv").string();
    const RunResult result =
        run_cli("sweep --config " + config +
                " --d-min 0 --d-max 20 --step 10 --nu 0,1e-8 --mode aopp,original"
                " --fixed-params --out " + csv);
    CHECK(result.exit_code == 0);
    const std::string body = read_file(csv);
    CHECK(body.rfind("distance_km,nu,mode,p0_opt,mu_opt,key_rate,e_ph,E_K,flags\n", 0) == 0);
    CHECK(count_lines(body) == 1 + 3 * 2 * 2);
    // modes are emitted in canonical order inside each (distance, nu) block
    const auto first_orig = body.find(",original,");
    const auto first_aopp = body.find(",aopp,");
    CHECK(first_orig != std::string::npos);
    CHECK(first_aopp != std::string::npos);
    CHECK(first_orig < first_aopp);
    const std::string sidecar = read_file(csv + ".config.json");
    CHECK(sidecar.find("\"distance_km\"") != std::string::npos);
    CHECK(sidecar.find("\"command\"") != std::string::npos);
}

TEST_CASE("sweep: identical output independent of worker count") {
    const std::string config = write_file("sweep_w.json", kGoodConfig);
    const std::string csv1 = (work_dir() / "w1.csv").string();
    const std::string csv4 = (work_dir() / "w4.csv").string();
    CHECK(run_cli("sweep --config " + config +
                  " --d-min 0 --d-max 30 --step 15 --mode original,twcc --fixed-params"
                  " --workers 1 --out " + csv1)
              .exit_code == 0);
    CHECK(run_cli("sweep --config " + config +
                  " --d-min 0 --d-max 30 --step 15 --mode original,twcc --fixed-params"
                  " --workers 4 --out " + csv4)
              .exit_code == 0);
    CHECK(read_file(csv1) == read_file(csv4));
}

TEST_CASE("sweep: empty range emits a header-only CSV") {
    const std::string config = write_file("sweep_empty.json", kGoodConfig);
    const std::string csv = (work_dir() / "empty.csv").string();
    const RunResult result = run_cli("sweep --config " + config +
                                     " --d-min 50 --d-max 40 --step 10 --fixed-params --out " + csv);
    CHECK(result.exit_code == 0);
    CHECK(read_file(csv) == "distance_km,nu,mode,p0_opt,mu_opt,key_rate,e_ph,E_K,flags\n");
}

TEST_CASE("sweep: plot helper script is emitted on request") {
    const std::string config = write_file("sweep_plot.json", kGoodConfig);
    const std::string csv = (work_dir() / "plot.csv").string();
    const std::string script = (work_dir() / "plot.py").string();
    const RunResult result =
        run_cli("sweep --config " + config + " --d-min 0 --d-max 10 --step 10 --fixed-params"
                " --out " + csv + " --emit-plot-script " + script);
    CHECK(result.exit_code == 0);
    CHECK(read_file(script).find("matplotlib") != std::string::npos);
}

TEST_CASE("optimize: reports the optimum") {
    const std::string config = write_file("opt.json", kGoodConfig);
    const RunResult result = run_cli("optimize --config " + config + " --distance 60 --nu 1e-8");
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("p0_opt") != std::string::npos);
    CHECK(result.output.find("key_rate") != std::string::npos);
}

TEST_CASE("mc: deterministic bytes for a repeated seed") {
    const std::string config = write_file("mc.json", kMcConfig);
    const RunResult first = run_cli("mc --config " + config + " --seed 9");
    const RunResult second = run_cli("mc --config " + config + " --seed 9");
    CHECK(first.exit_code == 0);
    CHECK(first.output == second.output);
    CHECK(first.output.find("mc-vs-analytic: PASS") != std::string::npos);
}

TEST_CASE("mc: r = 0 is rejected with a diagnostic") {
    const std::string config = write_file("mc_r0.json", kGoodConfig);  // r = 0 in this config
    const RunResult result = run_cli("mc --config " + config + " --seed 1");
    CHECK(result.exit_code == 2);
    CHECK(result.output.find("'r'") != std::string::npos);
}

TEST_CASE("oracle-check: passes on the default model") {
    const RunResult result = run_cli("oracle-check --grid 4 --ed 0,0.04");
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("PASS") != std::string::npos);
}

TEST_CASE("oracle-check: injected perturbation is detected") {
    const RunResult result = run_cli("oracle-check --grid 3 --ed 0.04 --inject-error 1e-6");
    CHECK(result.exit_code == 3);
    CHECK(result.output.find("FAIL") != std::string::npos);
}

TEST_CASE("oracle-check: refuses an over-aggressive truncation") {
    const RunResult result = run_cli("oracle-check --grid 3 --ed 0 --n-max 3 --max-intensity 1.0");
    CHECK(result.exit_code == 3);
    CHECK(result.output.find("tail mass") != std::string::npos);
}

TEST_CASE("unknown subcommand is a usage error") {
    const RunResult result = run_cli("frobnicate");
    CHECK(result.exit_code == 2);
}
