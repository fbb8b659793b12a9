#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "hdmetric/contraction.hpp"
#include "hdmetric/coupling.hpp"
#include "hdmetric/dynamics.hpp"
#include "hdmetric/metric.hpp"

namespace hdmetric::io {

/// Raised for unreadable or malformed input files.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Locale-independent formatting with 12 significant digits.
std::string format_number(double v);
/// v rounded to 12 significant digits, for JSON output.
double round12(double v);

// Metric: CSV "lambda_right,d" or JSON {L, rho, values[]}.
void write_metric_csv(std::ostream& out, const PiecewiseMetric& metric);
nlohmann::json metric_json(const PiecewiseMetric& metric, double rho);
PiecewiseMetric read_metric_csv(std::istream& in);
PiecewiseMetric read_metric_json(const nlohmann::json& j);
/// Dispatches on the extension (.json or anything else as CSV).
PiecewiseMetric load_metric(const std::string& path);

nlohmann::json bound_json(const BoundResult& result);

/// Per-cell report for the metric command: value, residual, tightness and
/// the closed-form overlay on lambda <= 1.
void write_metric_report_csv(std::ostream& out, const ConstraintSystem& system, const PiecewiseMetric& metric,
                             const SlackReport& slack);
nlohmann::json axioms_json(const AxiomReport& report);

// Configuration snapshot: CSV "x,y" plus a JSON sidecar {n, r, rho, seed}.
void write_config_csv(std::ostream& out, const Configuration& config);
nlohmann::json config_sidecar(const Configuration& config, std::uint64_t seed);
Configuration read_config(std::istream& csv, const nlohmann::json& sidecar);

nlohmann::json stats_json(const ChainStats& stats, int n, double rho, std::uint64_t seed);
nlohmann::json contraction_json(const ContractionEstimate& estimate);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace hdmetric::io
