#include "commands.hpp"

#include <chrono>
#include <ctime>
#include <sstream>

#include "hdmetric/contraction.hpp"
#include "hdmetric/coupling.hpp"
#include "hdmetric/dynamics.hpp"
#include "hdmetric/io.hpp"

namespace hdmetric::cli {

using nlohmann::json;

namespace {

std::vector<int> parse_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const int v = std::stoi(item, &used);
            if (used != item.size()) throw std::invalid_argument(item);
            out.push_back(v);
        } catch (const std::exception&) {
            throw CommandError(kFlagError, "bad entry in --Ls: '" + item + "'");
        }
    }
    if (out.empty()) throw CommandError(kFlagError, "--Ls must list at least one grid size");
    return out;
}

FeasibilityOptions feasibility_options(const json& p) {
    FeasibilityOptions o;
    try {
        o.variant = parse_variant(p.value("variant", std::string("clamped")));
    } catch (const std::invalid_argument& e) {
        throw CommandError(kFlagError, e.what());
    }
    o.quadrature_order = p.value("order", 16);
    o.hamming = p.value("hamming", false);
    o.threads = p.value("threads", 0);
    return o;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json cmd_bound(const json& p) {
    const int L = p.value("L", 256);
    const double tol = p.value("tol", 1e-6);
    if (L < 1) throw CommandError(kFlagError, "--L must be positive");
    if (!(tol >= 1e-9)) throw CommandError(kFlagError, "--tol must be at least 1e-9");
    const BoundResult result = max_density(L, tol, feasibility_options(p));
    return io::bound_json(result);
}

std::string cmd_table(const json& p) {
    const std::vector<int> Ls = parse_list(p.value("Ls", std::string("8,16,32,64,128,256")));
    const double tol = p.value("tol", 1e-6);
    std::string csv = "L,rho_star\n";
    for (int L : Ls) {
        if (L < 1) throw CommandError(kFlagError, "grid sizes must be positive");
        const BoundResult result = max_density(L, tol, feasibility_options(p));
        csv += std::to_string(L) + "," + io::format_number(result.rho_star) + "\n";
    }
    return csv;
}

json cmd_metric(const json& p, const std::string& out) {
    const int L = p.value("L", 256);
    const double rho = p.at("rho").get<double>();
    if (L < 1) throw CommandError(kFlagError, "--L must be positive");
    FeasibilityOptions options = feasibility_options(p);
    const SavingsKernel kernel = build_kernel(L, options.quadrature_order, options.variant, options.threads);
    const Feasibility f = feasible(kernel, rho, options);
    if (!f.feasible || !f.metric)
        throw CommandError(kInfeasible, "density " + io::format_number(rho) + " is infeasible for L = " + std::to_string(L));
    const ConstraintSystem system(kernel, rho, options.epsilon_hat, !options.hamming);
    const SlackReport slack = slack_report(system, f.metric->values());
    const AxiomReport axioms = check_axioms(*f.metric);

    std::ostringstream metric_csv;
    io::write_metric_csv(metric_csv, *f.metric);
    io::write_text(out, metric_csv.str());
    std::ostringstream report;
    io::write_metric_report_csv(report, system, *f.metric, slack);
    io::write_text(out + ".report.csv", report.str());
    io::write_text(out + ".axioms.json", dump(io::axioms_json(axioms)));

    double overlay_err = 0.0;
    for (int i = 0; i < L; ++i) {
        const double lambda = f.metric->right_endpoint(i);
        if (lambda > 1.0 + 1e-12) break;
        overlay_err = std::max(overlay_err, std::abs(f.metric->value(i) - analytic_small_ell(std::min(lambda, 1.0), rho)));
    }
    json tight = json::array();
    for (const auto& [a, b] : slack.tight_ranges) tight.push_back({io::round12(a), io::round12(b)});
    return {{"L", L},
            {"rho", io::round12(rho)},
            {"feasible", true},
            {"axioms_ok", axioms.ok()},
            {"tight_ranges", tight},
            {"tight_lambda_max", io::round12(slack.tight_lambda_max)},
            {"min_residual", io::round12(slack.min_residual)},
            {"max_analytic_error", io::round12(overlay_err)},
            {"metric_csv", out}};
}

json cmd_simulate(const json& p) {
    const int n = p.at("n").get<int>();
    const double rho = p.at("rho").get<double>();
    const auto steps = p.value("steps", std::uint64_t{1000000});
    const auto seed = p.value("seed", std::uint64_t{1});
    const auto audit_every = p.value("audit_every", std::uint64_t{0});
    if (n < 1) throw CommandError(kFlagError, "--n must be positive");

    Rng rng(seed);
    Chain chain(random_config(n, rho, rng));
    bool valid = true;
    std::uint64_t audits = 0;
    std::uint64_t done = 0;
    while (done < steps) {
        const std::uint64_t chunk = audit_every > 0 ? std::min(audit_every, steps - done) : steps - done;
        chain.run(chunk, rng);
        done += chunk;
        valid = valid && chain.config().is_valid();
        ++audits;
    }
    if (steps == 0) valid = chain.config().is_valid();

    json out = io::stats_json(chain.stats(), n, rho, seed);
    out["valid"] = valid;
    out["audits"] = audits;
    const std::string snapshot = p.value("snapshot", std::string());
    if (!snapshot.empty()) {
        std::ostringstream csv;
        io::write_config_csv(csv, chain.config());
        io::write_text(snapshot, csv.str());
        io::write_text(snapshot + ".json", dump(io::config_sidecar(chain.config(), seed)));
    }
    return out;
}

json cmd_couple(const json& p) {
    const int n = p.at("n").get<int>();
    const double rho = p.at("rho").get<double>();
    const double ell = p.at("ell").get<double>();
    const auto trials = p.value("trials", std::uint64_t{1000000});
    const auto seed = p.value("seed", std::uint64_t{1});
    const std::string metric_path = p.at("metric").get<std::string>();
    if (n < 2) throw CommandError(kFlagError, "--n must be at least 2");
    if (trials < 1) throw CommandError(kFlagError, "--trials must be positive");
    const PiecewiseMetric metric = io::load_metric(metric_path);
    ContractionOptions options;
    options.burn_in = p.value("burn_in", std::uint64_t{0});
    options.threads = p.value("threads", 0);
    return io::contraction_json(estimate_contraction(n, rho, ell, metric, trials, seed, options));
}

std::string default_out(const std::string& command) {
    if (command == "table") return "table.csv";
    if (command == "metric") return "metric.csv";
    return command + ".json";
}

std::string iso_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

}  // namespace

CommandOutput run_command(const std::string& command, const json& params) {
    const auto start = std::chrono::steady_clock::now();
    json p = params;
    if (!p.contains("out") || p["out"].get<std::string>().empty()) p["out"] = default_out(command);
    const std::string out = p["out"].get<std::string>();

    CommandOutput result;
    result.out_path = out;
    try {
        if (command == "bound") {
            result.stdout_text = dump(cmd_bound(p));
            io::write_text(out, result.stdout_text);
        } else if (command == "table") {
            result.stdout_text = cmd_table(p);
            io::write_text(out, result.stdout_text);
        } else if (command == "metric") {
            result.stdout_text = dump(cmd_metric(p, out));
        } else if (command == "simulate") {
            result.stdout_text = dump(cmd_simulate(p));
            io::write_text(out, result.stdout_text);
        } else if (command == "couple") {
            result.stdout_text = dump(cmd_couple(p));
            io::write_text(out, result.stdout_text);
        } else {
            throw CommandError(kFlagError, "unknown command '" + command + "'");
        }
    } catch (const CommandError&) {
        throw;
    } catch (const io::FormatError& e) {
        throw CommandError(kIoError, e.what());
    } catch (const json::exception& e) {
        throw CommandError(kFlagError, std::string("bad parameters: ") + e.what());
    } catch (const InsertionFailure& e) {
        throw CommandError(kInfeasible, e.what());
    } catch (const std::invalid_argument& e) {
        throw CommandError(kInfeasible, e.what());
    } catch (const std::domain_error& e) {
        throw CommandError(kInfeasible, e.what());
    }

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const json manifest = {{"command", command},
                           {"params", p},
                           {"seed", p.value("seed", std::uint64_t{0})},
                           {"version", kVersion},
                           {"started_at", iso_now()},
                           {"wall_clock_seconds", seconds}};
    try {
        io::write_text(out + ".manifest.json", manifest.dump(2) + "\n");
    } catch (const io::FormatError& e) {
        throw CommandError(kIoError, e.what());
    }
    return result;
}

CommandOutput replay(const std::string& manifest_path, const std::string& out_override) {
    json manifest;
    try {
        manifest = json::parse(io::read_text(manifest_path));
    } catch (const io::FormatError& e) {
        throw CommandError(kIoError, e.what());
    } catch (const json::exception& e) {
        throw CommandError(kIoError, std::string("bad manifest: ") + e.what());
    }
    if (!manifest.contains("command") || !manifest.contains("params"))
        throw CommandError(kIoError, "manifest lacks command or params");
    json params = manifest["params"];
    if (!out_override.empty()) params["out"] = out_override;
    return run_command(manifest["command"].get<std::string>(), params);
}

}  // namespace hdmetric::cli
