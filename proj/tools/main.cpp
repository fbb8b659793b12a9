// hdmetric: density bounds, metric export and Monte Carlo checks for the
// hard disk coupling.

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

using nlohmann::json;
namespace cli = hdmetric::cli;

namespace {

struct Flags {
    int L = 256;
    double tol = 1e-6;
    std::string variant = "clamped";
    int order = 16;
    bool hamming = false;
    std::string Ls = "8,16,32,64,128,256";
    double rho = 0.0;
    int n = 64;
    std::uint64_t steps = 1000000;
    std::uint64_t seed = 1;
    std::uint64_t audit_every = 0;
    std::string snapshot;
    double ell = 1.0;
    std::uint64_t trials = 1000000;
    std::string metric;
    std::uint64_t burn_in = 0;
    int threads = 0;
    std::string out;
    std::string manifest;
};

void add_grid_flags(CLI::App* app, Flags& f) {
    app->add_option("--variant", f.variant, "Savings integral: clamped | as-written")
        ->check(CLI::IsMember({"clamped", "as-written"}));
    app->add_option("--order", f.order, "Gauss-Legendre order per cell piece")->check(CLI::Range(2, 256));
    app->add_option("--tol", f.tol, "Density resolution of the binary search")->check(CLI::Range(1e-9, 1.0));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Path-coupling metric optimizer and hard disk simulator"};
    app.set_version_flag("--version", cli::kVersion);
    app.require_subcommand(1);
    app.fallthrough();
    Flags f;
    app.add_option("--threads", f.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    app.add_option("--out", f.out, "Primary output file");

    auto* bound = app.add_subcommand("bound", "Largest density with a feasible contraction metric");
    bound->add_option("--L", f.L, "Number of grid cells on [0, 4r]")->check(CLI::PositiveNumber);
    bound->add_flag("--hamming", f.hamming, "Force d == 1 and disable savings");
    add_grid_flags(bound, f);

    auto* table = app.add_subcommand("table", "Bounds for several grid sizes as CSV");
    table->add_option("--Ls", f.Ls, "Comma-separated grid sizes");
    add_grid_flags(table, f);

    auto* metric = app.add_subcommand("metric", "Export the optimized metric and its slack report");
    metric->add_option("--L", f.L, "Number of grid cells")->check(CLI::PositiveNumber);
    metric->add_option("--rho", f.rho, "Density")->required()->check(CLI::Range(0.0, 0.25));
    add_grid_flags(metric, f);

    auto* simulate = app.add_subcommand("simulate", "Run the single-disk global-move chain");
    simulate->add_option("--n", f.n, "Number of disks")->check(CLI::PositiveNumber);
    simulate->add_option("--rho", f.rho, "Density")->required()->check(CLI::Range(0.0, 0.25));
    simulate->add_option("--steps", f.steps, "Chain steps");
    simulate->add_option("--seed", f.seed, "Generator seed");
    simulate->add_option("--audit-every", f.audit_every, "Full validity audit interval (0 = at end)");
    simulate->add_option("--snapshot", f.snapshot, "Write the final configuration CSV (+ .json sidecar)");

    auto* couple = app.add_subcommand("couple", "Monte Carlo estimate of the one-step metric change");
    couple->add_option("--n", f.n, "Number of disks")->check(CLI::PositiveNumber);
    couple->add_option("--rho", f.rho, "Density")->required()->check(CLI::Range(0.0, 0.25));
    couple->add_option("--ell", f.ell, "Initial displacement in units of r, in (0, 4]")->check(CLI::Range(0.0, 4.0));
    couple->add_option("--trials", f.trials, "Independent one-step trials");
    couple->add_option("--metric", f.metric, "Metric CSV or JSON")->required();
    couple->add_option("--seed", f.seed, "Generator seed");
    couple->add_option("--burn-in", f.burn_in, "Chain steps before each pair (0 = 10 n)");

    auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
    replay->add_option("--manifest", f.manifest, "Manifest JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kFlagError;
    }

    try {
        cli::CommandOutput result;
        if (replay->parsed()) {
            result = cli::replay(f.manifest, f.out);
        } else {
            json p = {{"out", f.out}, {"threads", f.threads}};
            std::string command;
            if (bound->parsed()) {
                command = "bound";
                p.update({{"L", f.L}, {"tol", f.tol}, {"variant", f.variant}, {"order", f.order}, {"hamming", f.hamming}});
            } else if (table->parsed()) {
                command = "table";
                p.update({{"Ls", f.Ls}, {"tol", f.tol}, {"variant", f.variant}, {"order", f.order}});
            } else if (metric->parsed()) {
                command = "metric";
                p.update({{"L", f.L}, {"rho", f.rho}, {"tol", f.tol}, {"variant", f.variant}, {"order", f.order}});
            } else if (simulate->parsed()) {
                command = "simulate";
                p.update({{"n", f.n}, {"rho", f.rho}, {"steps", f.steps}, {"seed", f.seed},
                          {"audit_every", f.audit_every}, {"snapshot", f.snapshot}});
            } else {
                command = "couple";
                p.update({{"n", f.n}, {"rho", f.rho}, {"ell", f.ell}, {"trials", f.trials}, {"metric", f.metric},
                          {"seed", f.seed}, {"burn_in", f.burn_in}});
            }
            result = cli::run_command(command, p);
        }
        std::cout << result.stdout_text;
        return cli::kOk;
    } catch (const cli::CommandError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code();
    }
}
