#include "hdmetric/metric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hdmetric/dynamics.hpp"

namespace hdmetric {

PiecewiseMetric::PiecewiseMetric(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("PiecewiseMetric: need at least one cell");
}

PiecewiseMetric PiecewiseMetric::hamming(int cells) {
    if (cells < 1) throw std::invalid_argument("PiecewiseMetric: need at least one cell");
    return PiecewiseMetric(std::vector<double>(static_cast<std::size_t>(cells), 1.0));
}

double PiecewiseMetric::right_endpoint(int cell) const { return 4.0 * (cell + 1) / cells(); }

double PiecewiseMetric::eval(double lambda) const {
    if (!(lambda >= 0.0)) throw std::invalid_argument("PiecewiseMetric::eval: negative length");
    if (lambda == 0.0) return 0.0;
    if (lambda > 4.0) return 1.0;
    // cell k covers ((k-1)w, kw]; the offset keeps right endpoints computed
    // as 4k/L in cell k despite rounding
    const int L = cells();
    int k = static_cast<int>(std::ceil(lambda * L / 4.0 - 1e-9));
    k = std::clamp(k, 1, L);
    return values_[static_cast<std::size_t>(k - 1)];
}

double analytic_small_ell(double lambda, double rho) {
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("analytic_small_ell: lambda must lie in [0, 1]");
    if (!(rho > 0.0 && rho < 0.25))
        throw std::invalid_argument("analytic_small_ell: rho must lie in (0, 1/4)");
    return rho / (std::numbers::pi * (1.0 - 4.0 * rho)) * crescent_area(lambda);
}

std::size_t AxiomReport::count(AxiomViolation::Kind kind) const {
    return static_cast<std::size_t>(std::count_if(
        violations.begin(), violations.end(), [kind](const AxiomViolation& v) { return v.kind == kind; }));
}

AxiomReport check_axioms(const PiecewiseMetric& metric, double tol) {
    using Kind = AxiomViolation::Kind;
    AxiomReport report;
    const int L = metric.cells();
    auto d = [&](int i) { return metric.value(i - 1); };

    for (int i = 1; i <= L; ++i) {
        if (d(i) < -tol) report.violations.push_back({Kind::Range, i, i, -d(i)});
        if (d(i) > 1.0 + tol) report.violations.push_back({Kind::Range, i, i, d(i) - 1.0});
    }
    for (int i = 1; i < L; ++i) {
        if (d(i) > d(i + 1) + tol) report.violations.push_back({Kind::Monotonicity, i, i + 1, d(i) - d(i + 1)});
    }
    for (int i = 1; i <= L; ++i) {
        for (int j = i; j <= L; ++j) {
            const double sum = d(i) + d(j);
            if (i + j <= L) {
                if (d(i + j) > sum + tol) report.violations.push_back({Kind::Subadditivity, i, j, d(i + j) - sum});
            } else if (1.0 > sum + tol) {
                report.violations.push_back({Kind::Tail, i, j, 1.0 - sum});
            }
        }
    }
    return report;
}

DisagreementPair DisagreementPair::between(const Configuration& x, const Configuration& y) {
    if (x.size() != y.size() || x.radius() != y.radius())
        throw std::invalid_argument("DisagreementPair: configurations do not share n and r");
    DisagreementPair pair;
    pair.radius_ = x.radius();
    for (int i = 0; i < x.size(); ++i) {
        if (x.center(i) == y.center(i)) continue;
        if (pair.sites_.size() == 2)
            throw std::invalid_argument("DisagreementPair: more than two disagreeing disks");
        pair.sites_.push_back({i, x.center(i), y.center(i)});
    }
    return pair;
}

std::vector<double> DisagreementPair::lengths() const {
    std::vector<double> out;
    for (const auto& s : sites_) out.push_back(torus_dist(s.x, s.y));
    return out;
}

double pair_distance(const DisagreementPair& pair, const PiecewiseMetric& metric) {
    const auto sites = pair.sites();
    const double r = pair.radius();
    auto d = [&](const TorusPoint& p, const TorusPoint& q) { return metric.eval(torus_dist(p, q) / r); };
    switch (sites.size()) {
        case 0:
            return 0.0;
        case 1:
            return d(sites[0].x, sites[0].y);
        default: {
            const double direct = d(sites[0].x, sites[0].y) + d(sites[1].x, sites[1].y);
            const double crossed = d(sites[0].x, sites[1].y) + d(sites[1].x, sites[0].y);
            return std::min(direct, crossed);
        }
    }
}

}  // namespace hdmetric
