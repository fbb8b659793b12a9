#include "hdmetric/coupling.hpp"

#include <cmath>
#include <exception>
#include <vector>
#include <numbers>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hdmetric {

namespace {

constexpr int kDirectionAttempts = 1000;
constexpr int kFreshConfigs = 100;
constexpr std::uint64_t kBlock = 1024;
constexpr double kZ99 = 2.5758293035489004;

}  // namespace

std::string to_string(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::Coalesced: return "coalesced";
        case OutcomeKind::Unchanged: return "unchanged";
        case OutcomeKind::BothRejected: return "both_rejected";
        case OutcomeKind::FarMove: return "far_move";
        case OutcomeKind::NearMove: return "near_move";
    }
    return "unknown";
}

CoupledPair make_pair(int n, double rho, double ell_over_r, Rng& rng, std::uint64_t burn_in) {
    if (!(ell_over_r > 0.0 && ell_over_r <= 4.0)) throw std::invalid_argument("make_pair: ell/r must lie in (0, 4]");
    for (int fresh = 0; fresh < kFreshConfigs; ++fresh) {
        Chain chain(random_config(n, rho, rng));
        chain.run(burn_in, rng);
        const Configuration& x = chain.config();
        const double ell = ell_over_r * x.radius();
        for (int attempt = 0; attempt < kDirectionAttempts; ++attempt) {
            const double phi = 2.0 * std::numbers::pi * rng.uniform();
            const TorusPoint y0 = x.center(0).shifted({ell * std::cos(phi), ell * std::sin(phi)});
            if (chain.grid().blocked(x, y0, 0)) continue;
            Configuration y = x;
            y.place(0, y0);
            return {x, std::move(y), torus_dist(x.center(0), y0)};
        }
    }
    throw std::runtime_error("make_pair: no valid displacement found");
}

CoupledPair make_pair(int n, double rho, double ell_over_r, std::uint64_t seed, std::uint64_t burn_in) {
    Rng rng(seed);
    return make_pair(n, rho, ell_over_r, rng, burn_in);
}

CoupledStep coupled_step(const CoupledPair& pair, const PiecewiseMetric& metric, Rng& rng) {
    return coupled_step(pair, metric, propose(pair.x, rng));
}

CoupledStep coupled_step(const CoupledPair& pair, const PiecewiseMetric& metric, const Proposal& p) {
    const Configuration& x = pair.x;
    const Configuration& y = pair.y;
    const double r = x.radius();
    const double zone = 2.0 * r;
    const double d_ell = metric.eval(pair.ell / r);

    const int j = p.index;
    const TorusPoint z = p.point;

    CoupledStep out{x, y, {}};
    StepOutcome& o = out.outcome;
    o.index = j;
    o.proposal_x = z;
    o.proposal_y = z;

    const double dx = torus_dist(z, x.center(0));
    const double dy = torus_dist(z, y.center(0));
    const bool in_x = dx < zone;
    const bool in_y = dy < zone;
    if (in_y) o.s_over_r = dy / r;

    if (j == 0) {
        // all blockers coincide, so validity agrees in both chains
        if (!blocked_brute(x, z, 0)) {
            out.x.place(0, z);
            out.y.place(0, z);
            o.kind = OutcomeKind::Coalesced;
            o.delta_bound = -d_ell;
            o.delta_exact = -d_ell;
        }
        return out;
    }

    if (in_x == in_y) {
        // identical proposal; blocked in one chain iff blocked in the other
        if (!blocked_brute(x, z, j)) {
            out.x.place(j, z);
            out.y.place(j, z);
        }
        return out;
    }

    const TorusPoint zbar = reflect_across_bisector(z, x.center(0), y.center(0));
    o.proposal_y = zbar;

    if (in_x) {
        // mirror crescent: z blocked by x_0, zbar blocked by y_0
        o.kind = OutcomeKind::BothRejected;
        return out;
    }

    o.in_crescent = true;
    const bool ok_x = !blocked_brute(x, z, j);
    const bool ok_y = !blocked_brute(y, zbar, j);
    if (!ok_x && !ok_y) return out;

    if (dy >= pair.ell) {
        if (ok_x) out.x.place(j, z);
        if (ok_y) out.y.place(j, zbar);
        o.kind = OutcomeKind::FarMove;
        o.delta_bound = 1.0;
    } else {
        if (ok_x) {
            // x'_0 = z, x'_j = x_0; Y moves disk j normally
            out.x.place(j, z);
            out.x.swap_centers(0, j);
            if (ok_y) out.y.place(j, zbar);
        } else {
            // y'_0 = zbar, y'_j = y_0
            out.y.place(j, zbar);
            out.y.swap_centers(0, j);
        }
        o.kind = OutcomeKind::NearMove;
        o.delta_bound = 1.0 + metric.eval(dy / r) - d_ell;
    }
    o.delta_exact = pair_distance(DisagreementPair::between(out.x, out.y), metric) - d_ell;
    return out;
}

namespace {

struct Accumulator {
    double sum_bound = 0.0;
    double sumsq_bound = 0.0;
    double sum_exact = 0.0;
    double sumsq_exact = 0.0;
    std::array<std::uint64_t, kOutcomeKinds> counts{};
    std::uint64_t disk_zero = 0;
    std::uint64_t crescent = 0;
    double near_sum = 0.0;
    double near_sumsq = 0.0;
    bool dominance = true;

    void merge(const Accumulator& o) {
        sum_bound += o.sum_bound;
        sumsq_bound += o.sumsq_bound;
        sum_exact += o.sum_exact;
        sumsq_exact += o.sumsq_exact;
        for (int k = 0; k < kOutcomeKinds; ++k) counts[static_cast<std::size_t>(k)] += o.counts[static_cast<std::size_t>(k)];
        disk_zero += o.disk_zero;
        crescent += o.crescent;
        near_sum += o.near_sum;
        near_sumsq += o.near_sumsq;
        dominance = dominance && o.dominance;
    }
};

Accumulator run_block(int n, double rho, double ell_over_r, const PiecewiseMetric& metric, std::uint64_t first,
                      std::uint64_t last, const Rng& root, std::uint64_t burn_in) {
    Accumulator acc;
    for (std::uint64_t t = first; t < last; ++t) {
        Rng rng = root.split(t);
        const CoupledPair pair = make_pair(n, rho, ell_over_r, rng, burn_in);
        const StepOutcome o = coupled_step(pair, metric, rng).outcome;
        acc.sum_bound += o.delta_bound;
        acc.sumsq_bound += o.delta_bound * o.delta_bound;
        acc.sum_exact += o.delta_exact;
        acc.sumsq_exact += o.delta_exact * o.delta_exact;
        ++acc.counts[static_cast<std::size_t>(o.kind)];
        if (o.index == 0) ++acc.disk_zero;
        if (o.in_crescent) ++acc.crescent;
        if (o.kind == OutcomeKind::NearMove) {
            const double saving = metric.eval(pair.ell / pair.x.radius()) - metric.eval(o.s_over_r);
            acc.near_sum += saving;
            acc.near_sumsq += saving * saving;
        }
        if (o.delta_exact > o.delta_bound + 1e-12) acc.dominance = false;
    }
    return acc;
}

ContractionEstimate finish(int n, double rho, double ell_over_r, std::uint64_t trials, std::uint64_t burn_in,
                           const Accumulator& acc) {
    ContractionEstimate e;
    e.n = n;
    e.rho = rho;
    e.ell_over_r = ell_over_r;
    e.trials = trials;
    e.burn_in = burn_in;
    const double t = static_cast<double>(trials);
    e.mean_delta_bound = acc.sum_bound / t;
    e.mean_delta_exact = acc.sum_exact / t;
    auto se = [t](double sum, double sumsq) {
        if (t < 2) return 0.0;
        const double mean = sum / t;
        const double var = std::max(0.0, (sumsq - t * mean * mean) / (t - 1.0));
        return std::sqrt(var / t);
    };
    e.se_bound = se(acc.sum_bound, acc.sumsq_bound);
    e.se_exact = se(acc.sum_exact, acc.sumsq_exact);
    e.ci99_bound = kZ99 * e.se_bound;
    e.ci99_exact = kZ99 * e.se_exact;
    e.outcome_counts = acc.counts;
    e.disk_zero_moves = acc.disk_zero;
    e.crescent_hits = acc.crescent;
    e.near_savings_sum = acc.near_sum;
    e.near_savings_sumsq = acc.near_sumsq;
    e.dominance_held = acc.dominance;
    return e;
}

void check_trials(std::uint64_t trials) {
    if (trials < 1) throw std::invalid_argument("estimate_contraction: need at least one trial");
}

}  // namespace

ContractionEstimate estimate_contraction_serial(int n, double rho, double ell_over_r, const PiecewiseMetric& metric,
                                                std::uint64_t trials, std::uint64_t seed,
                                                const ContractionOptions& options) {
    check_trials(trials);
    const std::uint64_t burn_in = options.burn_in > 0 ? options.burn_in : 10ULL * static_cast<std::uint64_t>(n);
    const Rng root(seed);
    Accumulator total;
    for (std::uint64_t first = 0; first < trials; first += kBlock)
        total.merge(run_block(n, rho, ell_over_r, metric, first, std::min(trials, first + kBlock), root, burn_in));
    return finish(n, rho, ell_over_r, trials, burn_in, total);
}

ContractionEstimate estimate_contraction(int n, double rho, double ell_over_r, const PiecewiseMetric& metric,
                                         std::uint64_t trials, std::uint64_t seed, const ContractionOptions& options) {
    check_trials(trials);
    const std::uint64_t burn_in = options.burn_in > 0 ? options.burn_in : 10ULL * static_cast<std::uint64_t>(n);
    const Rng root(seed);
    const auto blocks = static_cast<std::int64_t>((trials + kBlock - 1) / kBlock);
    std::vector<Accumulator> partial(static_cast<std::size_t>(blocks));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(blocks));
#ifdef _OPENMP
    const int nthreads = options.threads > 0 ? options.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(nthreads)
#endif
    for (std::int64_t b = 0; b < blocks; ++b) {
        const auto first = static_cast<std::uint64_t>(b) * kBlock;
        try {
            partial[static_cast<std::size_t>(b)] =
                run_block(n, rho, ell_over_r, metric, first, std::min(trials, first + kBlock), root, burn_in);
        } catch (...) {
            errors[static_cast<std::size_t>(b)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    Accumulator total;
    for (const auto& a : partial) total.merge(a);
    return finish(n, rho, ell_over_r, trials, burn_in, total);
}

}  // namespace hdmetric
