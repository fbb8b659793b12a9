#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hdmetric/metric.hpp"
#include "hdmetric/quadrature.hpp"

namespace hdmetric {

/// How the savings integral treats u in (2, lambda] for rows with lambda > 2.
enum class IntegralVariant {
    Clamped,    ///< zero weight for u > 2 (the crescent ends at distance 2 from y)
    AsWritten,  ///< integrate the law-of-cosines kernel all the way to lambda
};

std::string to_string(IntegralVariant v);
IntegralVariant parse_variant(const std::string& s);

/// Default contraction slack n*epsilon.
inline constexpr double kEpsilonHat = 1e-6;

/// Lower-triangular kernel of the savings integral, independent of rho:
/// K[i][j] = integral over cell j (truncated at lambda_i) of 2(pi - theta(u, lambda_i)) u du.
/// Rows are stored packed; row i (0-based) holds cells 0..i-1.
class SavingsKernel {
public:
    SavingsKernel(int cells, int quadrature_order, IntegralVariant variant, std::vector<double> packed,
                  std::vector<double> crescent);

    int cells() const { return cells_; }
    int quadrature_order() const { return order_; }
    IntegralVariant variant() const { return variant_; }

    double at(int i, int j) const { return packed_[offset(i) + static_cast<std::size_t>(j)]; }
    /// crescent_area(lambda_i) for each row.
    double crescent(int i) const { return crescent_[static_cast<std::size_t>(i)]; }
    double lambda(int i) const { return 4.0 * (i + 1) / cells_; }

    static std::size_t offset(int i) {
        const auto k = static_cast<std::size_t>(i);
        return k * (k - (k > 0 ? 1 : 0)) / 2;
    }

private:
    int cells_;
    int order_;
    IntegralVariant variant_;
    std::vector<double> packed_;
    std::vector<double> crescent_;
};

/// One kernel entry by quadrature, split at the kinks of the integrand.
double kernel_entry(int i, int j, int cells, IntegralVariant variant, const GaussLegendre& rule);

/// Serial reference assembly.
SavingsKernel build_kernel_serial(int cells, int quadrature_order, IntegralVariant variant);
/// OpenMP assembly over rows; bit-identical to the serial path. threads <= 0
/// uses the OpenMP default.
SavingsKernel build_kernel(int cells, int quadrature_order, IntegralVariant variant, int threads = 0);

/// Discretized contraction constraints
///   (c + W_i) d_i >= g_i + sum_{j<i} w_ij d_j,   c = 1 - 4 rho - eps_hat,
/// with g_i = (rho/pi) crescent_area(lambda_i) and w_ij = (rho/pi) K_ij.
class ConstraintSystem {
public:
    ConstraintSystem(const SavingsKernel& kernel, double rho, double epsilon_hat = kEpsilonHat,
                     bool savings = true);

    int cells() const { return cells_; }
    double rho() const { return rho_; }
    double epsilon_hat() const { return epsilon_hat_; }
    double margin() const { return margin_; }
    IntegralVariant variant() const { return variant_; }
    double lambda(int i) const { return 4.0 * (i + 1) / cells_; }

    double g(int i) const { return g_[static_cast<std::size_t>(i)]; }
    double w(int i, int j) const { return w_[SavingsKernel::offset(i) + static_cast<std::size_t>(j)]; }
    /// Row savings total W_i = sum_{j<i} w_ij.
    double row_weight(int i) const { return row_weight_[static_cast<std::size_t>(i)]; }

    /// (c + W_i) d_i - g_i - sum_{j<i} w_ij d_j
    double residual(int i, std::span<const double> d) const;

private:
    int cells_;
    double rho_;
    double epsilon_hat_;
    double margin_;
    IntegralVariant variant_;
    std::vector<double> g_;
    std::vector<double> w_;
    std::vector<double> row_weight_;
};

/// Builds the kernel and scales it; throws std::invalid_argument for rho
/// outside (0, 1/4), cells < 1, quadrature_order < 2 or a nonpositive margin.
ConstraintSystem assemble(double rho, int cells, int quadrature_order = 16,
                          IntegralVariant variant = IntegralVariant::Clamped, int threads = 0);

/// Pointwise-least nonnegative solution by forward substitution. Values may
/// exceed 1, which signals infeasibility.
std::vector<double> minimal_metric(const ConstraintSystem& system);

/// Independent feasibility check: phase-1 simplex (Bland's rule) over
/// d in [0,1]^L.
bool lp_feasible(const ConstraintSystem& system);

/// Cap at 1, then the largest monotone subadditive function below the input.
std::vector<double> metric_envelope(std::vector<double> d);

struct SlackReport {
    std::vector<double> residuals;
    /// Closed lambda ranges where the residual is below the tightness threshold.
    std::vector<std::pair<double, double>> tight_ranges;
    double min_residual = 0.0;
    /// Largest lambda_i with a tight row; 0 if none.
    double tight_lambda_max = 0.0;
};

SlackReport slack_report(const ConstraintSystem& system, std::span<const double> metric,
                         double tight_threshold = 1e-8);

struct Feasibility {
    bool feasible = false;
    std::vector<double> minimal;
    /// Selected metric: minimal solution on lambda <= 2, d_max beyond, then
    /// enveloped. Empty when the minimal solution already exceeds 1.
    std::optional<PiecewiseMetric> metric;
    std::vector<double> residuals;
};

struct FeasibilityOptions {
    IntegralVariant variant = IntegralVariant::Clamped;
    int quadrature_order = 16;
    double epsilon_hat = kEpsilonHat;
    bool hamming = false;
    int threads = 0;
};

Feasibility feasible(const SavingsKernel& kernel, double rho, const FeasibilityOptions& options = {});
Feasibility feasible(double rho, int cells, const FeasibilityOptions& options = {});

struct BoundResult {
    int cells = 0;
    double rho_star = 0.0;
    double tol = 0.0;
    IntegralVariant variant = IntegralVariant::Clamped;
    double epsilon_hat = kEpsilonHat;
    int quadrature_order = 16;
    bool hamming = false;
    int iterations = 0;
    PiecewiseMetric metric;
    SlackReport slack;
};

/// Largest feasible density by bisection on [1/8, 1/4) to resolution tol.
BoundResult max_density(int cells, double tol = 1e-6, const FeasibilityOptions& options = {});

}  // namespace hdmetric
