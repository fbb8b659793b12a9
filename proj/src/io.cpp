#include "hdmetric/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace hdmetric::io {

using nlohmann::json;

std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    return {buf, res.ptr};
}

double round12(double v) {
    if (!std::isfinite(v)) return v;
    const std::string s = format_number(v);
    double out = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), out);
    return out;
}

namespace {

double parse_double(const std::string& field, const char* what) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    while (first < last && *first == ' ') ++first;
    while (last > first && (last[-1] == ' ' || last[-1] == '\r')) --last;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) throw FormatError(std::string("bad number in ") + what + ": '" + field + "'");
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

std::string trim_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

json rounded(const std::vector<double>& v) {
    json arr = json::array();
    for (double x : v) arr.push_back(round12(x));
    return arr;
}

}  // namespace

void write_metric_csv(std::ostream& out, const PiecewiseMetric& metric) {
    out << "lambda_right,d\n";
    for (int i = 0; i < metric.cells(); ++i)
        out << format_number(metric.right_endpoint(i)) << ',' << format_number(metric.value(i)) << '\n';
}

json metric_json(const PiecewiseMetric& metric, double rho) {
    return {{"L", metric.cells()},
            {"rho", round12(rho)},
            {"values", rounded(std::vector<double>(metric.values().begin(), metric.values().end()))}};
}

PiecewiseMetric read_metric_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim_cr(line) != "lambda_right,d")
        throw FormatError("metric CSV: expected header 'lambda_right,d'");
    std::vector<double> lambdas;
    std::vector<double> values;
    while (std::getline(in, line)) {
        line = trim_cr(line);
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 2) throw FormatError("metric CSV: expected two columns, got '" + line + "'");
        lambdas.push_back(parse_double(fields[0], "metric CSV"));
        values.push_back(parse_double(fields[1], "metric CSV"));
    }
    if (values.empty()) throw FormatError("metric CSV: no rows");
    const double L = static_cast<double>(values.size());
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (std::abs(lambdas[i] - 4.0 * static_cast<double>(i + 1) / L) > 1e-9)
            throw FormatError("metric CSV: lambda_right column is not the uniform grid 4i/L");
    }
    return PiecewiseMetric(std::move(values));
}

PiecewiseMetric read_metric_json(const json& j) {
    try {
        auto values = j.at("values").get<std::vector<double>>();
        if (j.contains("L") && j.at("L").get<std::size_t>() != values.size())
            throw FormatError("metric JSON: L does not match values[]");
        return PiecewiseMetric(std::move(values));
    } catch (const json::exception& e) {
        throw FormatError(std::string("metric JSON: ") + e.what());
    }
}

PiecewiseMetric load_metric(const std::string& path) {
    const std::string text = read_text(path);
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
        try {
            return read_metric_json(json::parse(text));
        } catch (const json::parse_error& e) {
            throw FormatError(std::string("metric JSON: ") + e.what());
        }
    }
    std::istringstream in(text);
    return read_metric_csv(in);
}

json bound_json(const BoundResult& result) {
    return {{"L", result.cells},
            {"rho_star", round12(result.rho_star)},
            {"tol", round12(result.tol)},
            {"variant", to_string(result.variant)},
            {"epsilon_hat", round12(result.epsilon_hat)},
            {"quadrature_order", result.quadrature_order},
            {"hamming", result.hamming},
            {"iterations", result.iterations},
            {"metric", {{"values", rounded(std::vector<double>(result.metric.values().begin(), result.metric.values().end()))}}},
            {"tight_lambda_max", round12(result.slack.tight_lambda_max)}};
}

void write_metric_report_csv(std::ostream& out, const ConstraintSystem& system, const PiecewiseMetric& metric,
                             const SlackReport& slack) {
    out << "lambda_right,d,residual,tight,analytic\n";
    for (int i = 0; i < metric.cells(); ++i) {
        const double lambda = metric.right_endpoint(i);
        const double res = slack.residuals[static_cast<std::size_t>(i)];
        out << format_number(lambda) << ',' << format_number(metric.value(i)) << ',' << format_number(res) << ','
            << (res < 1e-8 ? 1 : 0) << ',';
        if (lambda <= 1.0 + 1e-12) out << format_number(analytic_small_ell(std::min(lambda, 1.0), system.rho()));
        out << '\n';
    }
}

json axioms_json(const AxiomReport& report) {
    using Kind = AxiomViolation::Kind;
    json violations = json::array();
    for (const auto& v : report.violations) {
        const char* kind = v.kind == Kind::Range           ? "range"
                           : v.kind == Kind::Monotonicity  ? "monotonicity"
                           : v.kind == Kind::Subadditivity ? "subadditivity"
                                                           : "tail";
        violations.push_back({{"kind", kind}, {"i", v.i}, {"j", v.j}, {"excess", round12(v.excess)}});
    }
    return {{"ok", report.ok()}, {"violations", violations}};
}

void write_config_csv(std::ostream& out, const Configuration& config) {
    out << "x,y\n";
    for (const auto& c : config.centers()) out << format_number(c.x()) << ',' << format_number(c.y()) << '\n';
}

json config_sidecar(const Configuration& config, std::uint64_t seed) {
    return {{"n", config.size()}, {"r", round12(config.radius())}, {"rho", round12(config.density())}, {"seed", seed}};
}

Configuration read_config(std::istream& csv, const json& sidecar) {
    std::string line;
    if (!std::getline(csv, line) || trim_cr(line) != "x,y") throw FormatError("configuration CSV: expected header 'x,y'");
    std::vector<TorusPoint> centers;
    while (std::getline(csv, line)) {
        line = trim_cr(line);
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 2) throw FormatError("configuration CSV: expected two columns");
        const double x = parse_double(fields[0], "configuration CSV");
        const double y = parse_double(fields[1], "configuration CSV");
        centers.emplace_back(x, y);
    }
    try {
        const auto n = sidecar.at("n").get<std::size_t>();
        if (n != centers.size()) throw FormatError("configuration: sidecar n does not match the CSV");
        return Configuration(sidecar.at("r").get<double>(), std::move(centers));
    } catch (const json::exception& e) {
        throw FormatError(std::string("configuration sidecar: ") + e.what());
    }
}

json stats_json(const ChainStats& stats, int n, double rho, std::uint64_t seed) {
    return {{"n", n},
            {"rho", round12(rho)},
            {"seed", seed},
            {"steps", stats.steps},
            {"accepted", stats.accepted},
            {"rejected", stats.rejected},
            {"acceptance_rate", round12(stats.acceptance_rate())}};
}

json contraction_json(const ContractionEstimate& e) {
    json counts = json::object();
    for (int k = 0; k < kOutcomeKinds; ++k)
        counts[to_string(static_cast<OutcomeKind>(k))] = e.outcome_counts[static_cast<std::size_t>(k)];
    return {{"n", e.n},
            {"rho", round12(e.rho)},
            {"ell_over_r", round12(e.ell_over_r)},
            {"trials", e.trials},
            {"burn_in", e.burn_in},
            {"mean_delta_bound", round12(e.mean_delta_bound)},
            {"mean_delta_exact", round12(e.mean_delta_exact)},
            {"ci99_bound", round12(e.ci99_bound)},
            {"ci99_exact", round12(e.ci99_exact)},
            {"outcome_counts", counts}};
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw FormatError("failed writing '" + path + "'");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace hdmetric::io
