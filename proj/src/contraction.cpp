#include "hdmetric/contraction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "hdmetric/geometry.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hdmetric {

namespace {

constexpr double kVerifyTol = 1e-12;

}  // namespace

std::string to_string(IntegralVariant v) {
    return v == IntegralVariant::Clamped ? "clamped" : "as-written";
}

IntegralVariant parse_variant(const std::string& s) {
    if (s == "clamped") return IntegralVariant::Clamped;
    if (s == "as-written") return IntegralVariant::AsWritten;
    throw std::invalid_argument("unknown integral variant '" + s + "'");
}

SavingsKernel::SavingsKernel(int cells, int quadrature_order, IntegralVariant variant, std::vector<double> packed,
                             std::vector<double> crescent)
    : cells_(cells), order_(quadrature_order), variant_(variant), packed_(std::move(packed)),
      crescent_(std::move(crescent)) {
    if (packed_.size() != offset(cells_) || crescent_.size() != static_cast<std::size_t>(cells_))
        throw std::invalid_argument("SavingsKernel: storage does not match the grid");
}

double kernel_entry(int i, int j, int cells, IntegralVariant variant, const GaussLegendre& rule) {
    const double lambda = 4.0 * (i + 1) / cells;
    const double lo = 4.0 * j / cells;
    const double hi = std::min(4.0 * (j + 1) / cells, lambda);
    const double upper = variant == IntegralVariant::Clamped ? std::min(hi, 2.0) : hi;
    if (!(upper > lo)) return 0.0;

    auto integrand = [lambda](double u) { return 2.0 * (std::numbers::pi - crescent_angle(u, lambda)) * u; };

    // Split at the kink where theta leaves 0 or pi.
    const double kink = std::abs(lambda - 2.0);
    if (kink > lo && kink < upper)
        return rule.integrate(integrand, lo, kink) + rule.integrate(integrand, kink, upper);
    return rule.integrate(integrand, lo, upper);
}

namespace {

void check_kernel_args(int cells, int quadrature_order) {
    if (cells < 1) throw std::invalid_argument("grid needs at least one cell");
    if (quadrature_order < 2) throw std::invalid_argument("quadrature order must be at least 2");
}

std::vector<double> crescent_column(int cells) {
    std::vector<double> out(static_cast<std::size_t>(cells));
    for (int i = 0; i < cells; ++i) out[static_cast<std::size_t>(i)] = crescent_area(std::min(4.0, 4.0 * (i + 1) / cells));
    return out;
}

}  // namespace

SavingsKernel build_kernel_serial(int cells, int quadrature_order, IntegralVariant variant) {
    check_kernel_args(cells, quadrature_order);
    const GaussLegendre rule(quadrature_order);
    std::vector<double> packed(SavingsKernel::offset(cells));
    for (int i = 1; i < cells; ++i) {
        const std::size_t base = SavingsKernel::offset(i);
        for (int j = 0; j < i; ++j) packed[base + static_cast<std::size_t>(j)] = kernel_entry(i, j, cells, variant, rule);
    }
    return SavingsKernel(cells, quadrature_order, variant, std::move(packed), crescent_column(cells));
}

SavingsKernel build_kernel(int cells, int quadrature_order, IntegralVariant variant, int threads) {
    check_kernel_args(cells, quadrature_order);
    const GaussLegendre rule(quadrature_order);
    std::vector<double> packed(SavingsKernel::offset(cells));
#ifdef _OPENMP
    const int nthreads = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(nthreads)
#endif
    for (int i = 1; i < cells; ++i) {
        const std::size_t base = SavingsKernel::offset(i);
        for (int j = 0; j < i; ++j) packed[base + static_cast<std::size_t>(j)] = kernel_entry(i, j, cells, variant, rule);
    }
    (void)threads;
    return SavingsKernel(cells, quadrature_order, variant, std::move(packed), crescent_column(cells));
}

ConstraintSystem::ConstraintSystem(const SavingsKernel& kernel, double rho, double epsilon_hat, bool savings)
    : cells_(kernel.cells()), rho_(rho), epsilon_hat_(epsilon_hat), margin_(1.0 - 4.0 * rho - epsilon_hat),
      variant_(kernel.variant()) {
    if (!(rho > 0.0 && rho < 0.25)) throw std::invalid_argument("density must lie in (0, 1/4)");
    if (!(epsilon_hat >= 0.0)) throw std::invalid_argument("epsilon_hat must be nonnegative");
    if (!(margin_ > 0.0)) throw std::invalid_argument("contraction margin 1 - 4 rho - eps_hat must be positive");
    const double scale = rho / std::numbers::pi;
    g_.resize(static_cast<std::size_t>(cells_));
    w_.assign(SavingsKernel::offset(cells_), 0.0);
    row_weight_.assign(static_cast<std::size_t>(cells_), 0.0);
    for (int i = 0; i < cells_; ++i) {
        g_[static_cast<std::size_t>(i)] = scale * kernel.crescent(i);
        if (!savings) continue;
        const std::size_t base = SavingsKernel::offset(i);
        double total = 0.0;
        for (int j = 0; j < i; ++j) {
            const double wij = scale * kernel.at(i, j);
            w_[base + static_cast<std::size_t>(j)] = wij;
            total += wij;
        }
        row_weight_[static_cast<std::size_t>(i)] = total;
    }
}

double ConstraintSystem::residual(int i, std::span<const double> d) const {
    const std::size_t base = SavingsKernel::offset(i);
    double savings = 0.0;
    for (int j = 0; j < i; ++j) savings += w_[base + static_cast<std::size_t>(j)] * d[static_cast<std::size_t>(j)];
    return (margin_ + row_weight(i)) * d[static_cast<std::size_t>(i)] - g(i) - savings;
}

ConstraintSystem assemble(double rho, int cells, int quadrature_order, IntegralVariant variant, int threads) {
    if (!(rho > 0.0 && rho < 0.25)) throw std::invalid_argument("density must lie in (0, 1/4)");
    return ConstraintSystem(build_kernel(cells, quadrature_order, variant, threads), rho);
}

std::vector<double> minimal_metric(const ConstraintSystem& system) {
    const int L = system.cells();
    std::vector<double> d(static_cast<std::size_t>(L), 0.0);
    for (int i = 0; i < L; ++i) {
        double rhs = system.g(i);
        for (int j = 0; j < i; ++j) rhs += system.w(i, j) * d[static_cast<std::size_t>(j)];
        d[static_cast<std::size_t>(i)] = std::max(0.0, rhs / (system.margin() + system.row_weight(i)));
    }
    return d;
}

std::vector<double> metric_envelope(std::vector<double> d) {
    for (double& v : d) v = std::clamp(v, 0.0, 1.0);
    // lower monotone envelope
    for (std::size_t i = d.size(); i-- > 1;) d[i - 1] = std::min(d[i - 1], d[i]);
    // shortest-path relaxation: e_k = min(d_k, min_{a+b=k} e_a + e_b), cells 1-based
    const std::size_t L = d.size();
    for (std::size_t k = 2; k <= L; ++k) {
        double best = d[k - 1];
        for (std::size_t a = 1; a <= k / 2; ++a) best = std::min(best, d[a - 1] + d[k - a - 1]);
        d[k - 1] = best;
    }
    return d;
}

SlackReport slack_report(const ConstraintSystem& system, std::span<const double> metric, double tight_threshold) {
    if (static_cast<int>(metric.size()) != system.cells())
        throw std::invalid_argument("slack_report: metric size does not match the system");
    SlackReport report;
    const int L = system.cells();
    report.residuals.resize(static_cast<std::size_t>(L));
    report.min_residual = std::numeric_limits<double>::infinity();
    bool open = false;
    for (int i = 0; i < L; ++i) {
        const double r = system.residual(i, metric);
        report.residuals[static_cast<std::size_t>(i)] = r;
        report.min_residual = std::min(report.min_residual, r);
        const double lambda = system.lambda(i);
        if (r < tight_threshold) {
            report.tight_lambda_max = lambda;
            if (open) {
                report.tight_ranges.back().second = lambda;
            } else {
                report.tight_ranges.emplace_back(lambda, lambda);
            }
            open = true;
        } else {
            open = false;
        }
    }
    return report;
}

Feasibility feasible(const SavingsKernel& kernel, double rho, const FeasibilityOptions& options) {
    const ConstraintSystem system(kernel, rho, options.epsilon_hat, !options.hamming);
    Feasibility out;
    out.minimal = minimal_metric(system);

    auto verify = [&](std::vector<double> d) {
        out.residuals.resize(d.size());
        double worst = std::numeric_limits<double>::infinity();
        for (int i = 0; i < system.cells(); ++i) {
            out.residuals[static_cast<std::size_t>(i)] = system.residual(i, d);
            worst = std::min(worst, out.residuals[static_cast<std::size_t>(i)]);
        }
        PiecewiseMetric metric(std::move(d));
        out.feasible = worst >= -kVerifyTol && check_axioms(metric, kVerifyTol).ok();
        out.metric = std::move(metric);
    };

    const std::vector<double> ones(out.minimal.size(), 1.0);
    if (options.hamming) {
        verify(ones);
        return out;
    }
    if (std::any_of(out.minimal.begin(), out.minimal.end(), [](double v) { return v > 1.0; })) return out;
    std::vector<double> d = out.minimal;
    for (int i = 0; i < system.cells(); ++i)
        if (system.lambda(i) > 2.0 + 1e-12) d[static_cast<std::size_t>(i)] = 1.0;
    verify(metric_envelope(std::move(d)));
    // coarse grids can miss the tail condition; d == 1 is the other candidate
    if (!out.feasible) {
        Feasibility first = out;
        verify(ones);
        if (!out.feasible) out = std::move(first);
    }
    return out;
}

Feasibility feasible(double rho, int cells, const FeasibilityOptions& options) {
    if (!(rho > 0.0 && rho < 0.25)) throw std::invalid_argument("density must lie in (0, 1/4)");
    return feasible(build_kernel(cells, options.quadrature_order, options.variant, options.threads), rho, options);
}

BoundResult max_density(int cells, double tol, const FeasibilityOptions& options) {
    if (!(tol >= 1e-9)) throw std::invalid_argument("tolerance must be at least 1e-9");
    const SavingsKernel kernel = build_kernel(cells, options.quadrature_order, options.variant, options.threads);

    // largest rho with a positive contraction margin
    const double upper = (1.0 - options.epsilon_hat) / 4.0;
    double lo = 0.125;
    double hi = upper;
    BoundResult result;
    result.iterations = 0;
    Feasibility best = feasible(kernel, lo, options);
    if (!best.feasible) {
        hi = lo;
        lo = 0.0;
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        ++result.iterations;
        Feasibility f = feasible(kernel, mid, options);
        if (f.feasible) {
            lo = mid;
            best = std::move(f);
        } else {
            hi = mid;
        }
    }
    if (lo == 0.0) throw std::runtime_error("max_density: no feasible density found");

    const ConstraintSystem system(kernel, lo, options.epsilon_hat, !options.hamming);
    result.cells = cells;
    result.rho_star = lo;
    result.tol = tol;
    result.variant = options.variant;
    result.epsilon_hat = options.epsilon_hat;
    result.quadrature_order = options.quadrature_order;
    result.hamming = options.hamming;
    result.metric = *best.metric;
    result.slack = slack_report(system, result.metric.values());
    return result;
}

}  // namespace hdmetric
