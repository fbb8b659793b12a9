#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "doctest.h"
#include "hdmetric/io.hpp"

using namespace hdmetric;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("hdmetric_cli_" + std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int exit_code(const std::string& args) {
    const std::string cmd = std::string(HDMETRIC_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

cli::ExitCode error_code(const std::string& command, const json& params) {
    try {
        cli::run_command(command, params);
    } catch (const cli::CommandError& e) {
        return e.code();
    }
    return cli::kOk;
}

}  // namespace

TEST_CASE("bound writes its result and a manifest") {
    TempDir tmp;
    const auto out = cli::run_command("bound", {{"L", 8}, {"out", tmp.file("b.json")}});
    const json j = json::parse(out.stdout_text);
    CHECK(std::abs(j.at("rho_star").get<double>() - 0.150024) < 2e-4);
    CHECK(io::read_text(tmp.file("b.json")) == out.stdout_text);
    const json m = json::parse(io::read_text(tmp.file("b.json.manifest.json")));
    CHECK(m.at("command") == "bound");
    CHECK(m.at("params").at("L") == 8);
    CHECK(m.at("version") == cli::kVersion);
    for (const char* key : {"seed", "started_at", "wall_clock_seconds"}) CHECK(m.contains(key));

    const json h = json::parse(cli::run_command("bound", {{"hamming", true}, {"out", tmp.file("h.json")}}).stdout_text);
    CHECK(std::abs(h.at("rho_star").get<double>() - 0.125) < 1e-6);
}

TEST_CASE("table") {
    TempDir tmp;
    const std::string csv = cli::run_command("table", {{"Ls", "8,16,32"}, {"out", tmp.file("t.csv")}}).stdout_text;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "L,rho_star");
    std::vector<double> rhos;
    while (std::getline(in, line)) rhos.push_back(std::stod(line.substr(line.find(',') + 1)));
    REQUIRE(rhos.size() == 3);
    CHECK(std::is_sorted(rhos.begin(), rhos.end()));
    CHECK(std::abs(rhos[1] - 0.152182) < 2e-4);

    const std::string one = cli::run_command("table", {{"Ls", "8"}, {"out", tmp.file("t1.csv")}}).stdout_text;
    CHECK(std::count(one.begin(), one.end(), '\n') == 2);
    CHECK(error_code("table", {{"Ls", "8,x"}, {"out", tmp.file("t2.csv")}}) == cli::kFlagError);
    CHECK(error_code("table", {{"Ls", ""}, {"out", tmp.file("t2.csv")}}) == cli::kFlagError);
}

TEST_CASE("metric") {
    TempDir tmp;
    SUBCASE("small instance") {
        const json j = json::parse(cli::run_command("metric", {{"L", 2}, {"rho", 0.05}, {"out", tmp.file("m.csv")}}).stdout_text);
        CHECK(j.at("axioms_ok") == true);
        std::ifstream in(tmp.file("m.csv"));
        const PiecewiseMetric m = io::read_metric_csv(in);
        CHECK(m.cells() == 2);
        CHECK(json::parse(io::read_text(tmp.file("m.csv.axioms.json"))).at("ok") == true);
        const std::string report = io::read_text(tmp.file("m.csv.report.csv"));
        CHECK(report.rfind("lambda_right,d,residual,tight,analytic\n", 0) == 0);
        CHECK(std::count(report.begin(), report.end(), '\n') == 3);
    }
    SUBCASE("near the bound") {
        const json j = json::parse(cli::run_command("metric", {{"L", 256}, {"rho", 0.1544}, {"out", tmp.file("m.csv")}}).stdout_text);
        CHECK(j.at("axioms_ok") == true);
        CHECK(j.at("tight_lambda_max").get<double>() <= 2.0);
        CHECK(j.at("tight_lambda_max").get<double>() > 1.9);
        CHECK(j.at("max_analytic_error").get<double>() < 5e-3);
    }
    SUBCASE("infeasible density") {
        CHECK(error_code("metric", {{"L", 64}, {"rho", 0.2}, {"out", tmp.file("m.csv")}}) == cli::kInfeasible);
        CHECK(error_code("metric", {{"L", 64}, {"rho", 0.0}, {"out", tmp.file("m.csv")}}) == cli::kInfeasible);
        CHECK(error_code("metric", {{"L", 64}, {"out", tmp.file("m.csv")}}) == cli::kFlagError);
    }
}

TEST_CASE("simulate is deterministic") {
    TempDir tmp;
    const json p{{"n", 64}, {"rho", 0.15}, {"steps", 50000}, {"seed", 7}, {"audit_every", 10000},
                 {"snapshot", tmp.file("snap.csv")}, {"out", tmp.file("s1.json")}};
    const auto a = cli::run_command("simulate", p);
    json q = p;
    q["out"] = tmp.file("s2.json");
    q["threads"] = 3;
    const auto b = cli::run_command("simulate", q);
    CHECK(a.stdout_text == b.stdout_text);
    const json j = json::parse(a.stdout_text);
    CHECK(j.at("valid") == true);
    CHECK(j.at("audits") == 5);
    CHECK(j.at("accepted").get<int>() + j.at("rejected").get<int>() == 50000);

    std::ifstream csv(tmp.file("snap.csv"));
    const Configuration snap = io::read_config(csv, json::parse(io::read_text(tmp.file("snap.csv.json"))));
    CHECK(snap.size() == 64);
}

TEST_CASE("couple is deterministic across thread counts") {
    TempDir tmp;
    cli::run_command("metric", {{"L", 64}, {"rho", 0.15}, {"out", tmp.file("m.csv")}});
    std::string first;
    for (int threads : {1, 2, 4}) {
        const json p{{"n", 16}, {"rho", 0.12}, {"ell", 2.0}, {"trials", 3000}, {"seed", 7},
                     {"metric", tmp.file("m.csv")}, {"threads", threads}, {"out", tmp.file("c.json")}};
        const std::string text = cli::run_command("couple", p).stdout_text;
        if (first.empty()) first = text;
        CHECK(text == first);
    }
    const json j = json::parse(first);
    CHECK(j.at("trials") == 3000);
    CHECK(j.at("mean_delta_exact").get<double>() <= j.at("mean_delta_bound").get<double>());
    CHECK(error_code("couple", {{"n", 16}, {"rho", 0.12}, {"ell", 2.0}, {"trials", 10}, {"metric", tmp.file("missing.csv")},
                                {"out", tmp.file("c.json")}}) == cli::kIoError);
    CHECK(error_code("couple", {{"n", 16}, {"rho", 0.12}, {"ell", 5.0}, {"trials", 10}, {"metric", tmp.file("m.csv")},
                                {"out", tmp.file("c.json")}}) == cli::kInfeasible);
}

TEST_CASE("replay reproduces the output") {
    TempDir tmp;
    cli::run_command("simulate", {{"n", 32}, {"rho", 0.1}, {"steps", 20000}, {"seed", 3}, {"out", tmp.file("s.json")}});
    const auto again = cli::replay(tmp.file("s.json.manifest.json"), tmp.file("s2.json"));
    CHECK(again.out_path == tmp.file("s2.json"));
    CHECK(io::read_text(tmp.file("s.json")) == io::read_text(tmp.file("s2.json")));

    cli::run_command("table", {{"Ls", "8,16"}, {"out", tmp.file("t.csv")}});
    cli::replay(tmp.file("t.csv.manifest.json"), tmp.file("t2.csv"));
    CHECK(io::read_text(tmp.file("t.csv")) == io::read_text(tmp.file("t2.csv")));

    try {
        cli::replay(tmp.file("nope.json"), "");
        FAIL("replay of a missing manifest succeeded");
    } catch (const cli::CommandError& e) {
        CHECK(e.code() == cli::kIoError);
    }
}

TEST_CASE("binary exit codes") {
    TempDir tmp;
    const std::string out = " --out " + tmp.file("x.json");
    CHECK(exit_code("bound --L 8" + out) == 0);
    CHECK(exit_code("--threads 2 bound --L 8" + out) == 0);
    CHECK(exit_code("--version") == 0);
    CHECK(exit_code("") == 2);
    CHECK(exit_code("bound --L 0" + out) == 2);
    CHECK(exit_code("bound --bogus" + out) == 2);
    CHECK(exit_code("bound --variant sideways" + out) == 2);
    CHECK(exit_code("metric --L 8 --rho 0.2" + out) == 3);
    CHECK(exit_code("couple --n 8 --rho 0.1 --metric /nonexistent.csv" + out) == 4);
    CHECK(exit_code("bound --L 8 --out /nonexistent/dir/b.json") == 4);
    CHECK(exit_code("replay --manifest /nonexistent.json") == 4);
}
