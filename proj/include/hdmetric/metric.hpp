#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hdmetric/geometry.hpp"

namespace hdmetric {

class Configuration;

/// Piecewise-constant distance function d(lambda) on [0, 4] (units of r).
/// Cell i (1-based) is ((i-1)*4/L, i*4/L] and holds values[i-1]; d(0) = 0 and
/// d = 1 beyond 4.
class PiecewiseMetric {
public:
    PiecewiseMetric() = default;
    explicit PiecewiseMetric(std::vector<double> values);

    /// d == 1 on every cell.
    static PiecewiseMetric hamming(int cells);

    int cells() const { return static_cast<int>(values_.size()); }
    std::span<const double> values() const { return values_; }
    double value(int cell) const { return values_.at(static_cast<std::size_t>(cell)); }

    /// Right endpoint of the 0-based cell, 4(cell+1)/L.
    double right_endpoint(int cell) const;
    double cell_width() const { return 4.0 / cells(); }

    /// Evaluate d(lambda); lambda must be nonnegative.
    double eval(double lambda) const;

private:
    std::vector<double> values_;
};

/// Closed-form metric on [0, 1] where no near move can save anything.
double analytic_small_ell(double lambda, double rho);

struct AxiomViolation {
    enum class Kind { Range, Monotonicity, Subadditivity, Tail };
    Kind kind;
    int i;  ///< 1-based cell indices
    int j;
    double excess;
};

struct AxiomReport {
    std::vector<AxiomViolation> violations;

    bool ok() const { return violations.empty(); }
    std::size_t count(AxiomViolation::Kind kind) const;
};

/// Range, monotonicity and grid subadditivity (including d_i + d_j >= 1 when
/// lambda_i + lambda_j > 4). Violations smaller than tol are ignored.
AxiomReport check_axioms(const PiecewiseMetric& metric, double tol = 1e-12);

/// Two configurations that differ in at most two disks.
class DisagreementPair {
public:
    struct Site {
        int index;
        TorusPoint x;
        TorusPoint y;
    };

    /// Throws std::invalid_argument if the configurations differ in more than
    /// two disks or do not share n and r.
    static DisagreementPair between(const Configuration& x, const Configuration& y);

    std::span<const Site> sites() const { return {sites_.data(), sites_.size()}; }
    double radius() const { return radius_; }

    /// Torus lengths of the stored pairings, same order as sites().
    std::vector<double> lengths() const;

private:
    std::vector<Site> sites_;
    double radius_ = 0.0;
};

/// Path distance between configurations differing in at most two disks; for
/// two disagreements the cheaper of the direct and crossed pairings is used.
double pair_distance(const DisagreementPair& pair, const PiecewiseMetric& metric);

}  // namespace hdmetric
