#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "hdmetric/contraction.hpp"
#include "hdmetric/coupling.hpp"

using namespace hdmetric;
using std::numbers::pi;

namespace {

const PiecewiseMetric& optimized_64() {
    static const PiecewiseMetric m = max_density(64).metric;
    return m;
}

// disk 0 at (0.5, 0.5) in X and at (0.5 + ell, 0.5) in Y, plus distant disks
CoupledPair hand_pair(double r, double ell, std::vector<TorusPoint> others) {
    std::vector<TorusPoint> xs{TorusPoint(0.5, 0.5)};
    xs.insert(xs.end(), others.begin(), others.end());
    std::vector<TorusPoint> ys = xs;
    ys[0] = TorusPoint(0.5 + ell, 0.5);
    return {Configuration(r, xs), Configuration(r, ys), ell};
}

double theta_oracle(double u, double lambda) {
    if (u + 2.0 <= lambda) return 0.0;
    if (u + lambda <= 2.0) return pi;
    return std::acos(std::clamp((u * u + lambda * lambda - 4.0) / (2.0 * lambda * u), -1.0, 1.0));
}

void check_same_estimate(const ContractionEstimate& a, const ContractionEstimate& b) {
    CHECK(a.mean_delta_bound == b.mean_delta_bound);
    CHECK(a.mean_delta_exact == b.mean_delta_exact);
    CHECK(a.se_bound == b.se_bound);
    CHECK(a.se_exact == b.se_exact);
    CHECK(a.outcome_counts == b.outcome_counts);
    CHECK(a.crescent_hits == b.crescent_hits);
    CHECK(a.disk_zero_moves == b.disk_zero_moves);
    CHECK(a.near_savings_sum == b.near_savings_sum);
}

}  // namespace

TEST_CASE("make_pair invariants") {
    for (double ell : {0.5, 1.0, 2.0, 3.0, 4.0}) {
        const CoupledPair p = make_pair(32, 0.14, ell, 99, 320);
        const double r = p.x.radius();
        CHECK(p.x.is_valid());
        CHECK(p.y.is_valid());
        CHECK(std::abs(p.ell - ell * r) < 1e-12);
        CHECK(std::abs(torus_dist(p.x.center(0), p.y.center(0)) - ell * r) < 1e-12);
        for (int i = 1; i < p.x.size(); ++i) REQUIRE(p.x.center(i) == p.y.center(i));
    }
    const CoupledPair a = make_pair(16, 0.1, 2.0, 5, 100);
    const CoupledPair b = make_pair(16, 0.1, 2.0, 5, 100);
    CHECK(std::ranges::equal(a.y.centers(), b.y.centers()));
    CHECK_THROWS_AS(make_pair(16, 0.1, 0.0, 5, 10), std::invalid_argument);
    CHECK_THROWS_AS(make_pair(16, 0.1, 4.5, 5, 10), std::invalid_argument);
}

TEST_CASE("coupled_step: explicit cases") {
    const PiecewiseMetric& d = optimized_64();
    const double r = 0.02;

    SUBCASE("disk 0 to a valid point coalesces") {
        const CoupledPair p = hand_pair(r, 0.04, {TorusPoint(0.1, 0.1), TorusPoint(0.8, 0.2)});
        const CoupledStep s = coupled_step(p, d, Proposal{0, TorusPoint(0.3, 0.3)});
        CHECK(s.outcome.kind == OutcomeKind::Coalesced);
        CHECK(s.outcome.delta_exact == doctest::Approx(-d.eval(2.0)));
        CHECK(s.outcome.delta_bound == s.outcome.delta_exact);
        CHECK(std::ranges::equal(s.x.centers(), s.y.centers()));
    }
    SUBCASE("disk 0 to a blocked point changes nothing") {
        const CoupledPair p = hand_pair(r, 0.04, {TorusPoint(0.1, 0.1), TorusPoint(0.8, 0.2)});
        const CoupledStep s = coupled_step(p, d, Proposal{0, TorusPoint(0.11, 0.12)});
        CHECK(s.outcome.kind == OutcomeKind::Unchanged);
        CHECK(s.outcome.delta_exact == 0.0);
        CHECK(s.x.center(0) == p.x.center(0));
    }
    SUBCASE("proposal outside both zones moves the same disk in both chains") {
        const CoupledPair p = hand_pair(r, 0.04, {TorusPoint(0.1, 0.1), TorusPoint(0.8, 0.2)});
        const CoupledStep s = coupled_step(p, d, Proposal{2, TorusPoint(0.3, 0.7)});
        CHECK(s.outcome.kind == OutcomeKind::Unchanged);
        CHECK(s.x.center(2) == TorusPoint(0.3, 0.7));
        CHECK(s.y.center(2) == TorusPoint(0.3, 0.7));
        CHECK(s.outcome.delta_bound == 0.0);
        CHECK_FALSE(s.outcome.in_crescent);
    }
    SUBCASE("proposal in both zones is rejected in both chains") {
        const CoupledPair p = hand_pair(r, 0.04, {TorusPoint(0.1, 0.1)});
        const CoupledStep s = coupled_step(p, d, Proposal{1, TorusPoint(0.52, 0.51)});
        CHECK(s.outcome.kind == OutcomeKind::Unchanged);
        CHECK(s.x.center(1) == TorusPoint(0.1, 0.1));
        CHECK(s.y.center(1) == TorusPoint(0.1, 0.1));
    }
    SUBCASE("mirror crescent rejects in both chains") {
        const CoupledPair p = hand_pair(r, 0.04, {TorusPoint(0.1, 0.1)});
        const CoupledStep s = coupled_step(p, d, Proposal{1, TorusPoint(0.47, 0.5)});
        CHECK(s.outcome.kind == OutcomeKind::BothRejected);
        CHECK(s.outcome.delta_exact == 0.0);
        CHECK(s.outcome.delta_bound == 0.0);
        CHECK(s.outcome.proposal_y.x() == doctest::Approx(0.57));
        CHECK(s.outcome.proposal_y.y() == doctest::Approx(0.5));
        CHECK(s.x.center(1) == p.x.center(1));
        CHECK(s.y.center(1) == p.y.center(1));
    }
    SUBCASE("far move") {
        // ell = r; z at s = 1.75 r from y_0, its mirror at the same distance from x_0
        const CoupledPair p = hand_pair(r, 0.02, {TorusPoint(0.1, 0.1)});
        const CoupledStep s = coupled_step(p, d, Proposal{1, TorusPoint(0.555, 0.5)});
        CHECK(s.outcome.kind == OutcomeKind::FarMove);
        CHECK(s.outcome.in_crescent);
        CHECK(s.outcome.s_over_r == doctest::Approx(1.75));
        CHECK(s.outcome.delta_bound == 1.0);
        CHECK(s.x.center(1) == TorusPoint(0.555, 0.5));
        CHECK(s.y.center(1).x() == doctest::Approx(0.465));
        // labels kept: disagreements (x_0, y_0) at r and (z, zbar) at 4.5 r
        const double direct = d.eval(1.0) + d.eval(4.5);
        const double crossed = 2 * d.eval(1.75);
        CHECK(s.outcome.delta_exact == doctest::Approx(std::min(direct, crossed) - d.eval(1.0)));
        CHECK(s.outcome.delta_exact <= s.outcome.delta_bound);
    }
    SUBCASE("near move succeeding in both chains") {
        const CoupledPair p = hand_pair(r, 0.04, {TorusPoint(0.1, 0.1)});
        const CoupledStep s = coupled_step(p, d, Proposal{1, TorusPoint(0.55, 0.5)});
        CHECK(s.outcome.kind == OutcomeKind::NearMove);
        CHECK(s.outcome.s_over_r == doctest::Approx(0.5));
        CHECK(s.outcome.delta_bound == doctest::Approx(1.0 + d.eval(0.5) - d.eval(2.0)));
        // x'_0 = z, x'_1 = x_0, y'_0 = y_0, y'_1 = zbar
        CHECK(s.x.center(0) == TorusPoint(0.55, 0.5));
        CHECK(s.x.center(1) == TorusPoint(0.5, 0.5));
        CHECK(s.y.center(0) == p.y.center(0));
        CHECK(s.y.center(1).x() == doctest::Approx(0.49));
        CHECK(s.outcome.delta_exact == doctest::Approx(2 * d.eval(0.5) - d.eval(2.0)));
        CHECK(s.x.is_valid());
        CHECK(s.y.is_valid());
    }
    SUBCASE("near move succeeding only in Y swaps labels in Y") {
        const CoupledPair p = hand_pair(r, 0.04, {TorusPoint(0.57, 0.53), TorusPoint(0.1, 0.1)});
        const CoupledStep s = coupled_step(p, d, Proposal{2, TorusPoint(0.55, 0.5)});
        CHECK(s.outcome.kind == OutcomeKind::NearMove);
        CHECK(std::ranges::equal(s.x.centers(), p.x.centers()));
        CHECK(s.y.center(0).x() == doctest::Approx(0.49));
        CHECK(s.y.center(2) == p.y.center(0));
        // the disagreement at disk 2 is far, so the bound is attained
        CHECK(s.outcome.delta_exact == doctest::Approx(s.outcome.delta_bound));
        CHECK(s.y.is_valid());
    }
    SUBCASE("crescent proposal blocked in both chains") {
        const CoupledPair p = hand_pair(r, 0.04, {TorusPoint(0.57, 0.53), TorusPoint(0.47, 0.53), TorusPoint(0.1, 0.1)});
        const CoupledStep s = coupled_step(p, d, Proposal{3, TorusPoint(0.55, 0.5)});
        CHECK(s.outcome.kind == OutcomeKind::Unchanged);
        CHECK(s.outcome.in_crescent);
        CHECK(s.outcome.delta_bound == 0.0);
    }
}

TEST_CASE("Y-chain proposals stay uniform") {
    const CoupledPair p = hand_pair(0.02, 0.04, {TorusPoint(0.1, 0.1)});
    const PiecewiseMetric& d = optimized_64();
    Rng rng(606);
    // box of side 0.16 centred on the midpoint, symmetric about the bisector
    const double lo_x = 0.52 - 0.08, lo_y = 0.5 - 0.08;
    std::vector<int> counts(100, 0);
    const int draws = 300000;
    for (int k = 0; k < draws; ++k) {
        const TorusPoint z(lo_x + 0.16 * rng.uniform(), lo_y + 0.16 * rng.uniform());
        const TorusPoint zy = coupled_step(p, d, Proposal{1, z}).outcome.proposal_y;
        const int cx = std::clamp(static_cast<int>((zy.x() - lo_x) / 0.016), 0, 9);
        const int cy = std::clamp(static_cast<int>((zy.y() - lo_y) / 0.016), 0, 9);
        ++counts[static_cast<std::size_t>(cy * 10 + cx)];
    }
    const double expected = draws / 100.0;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 134.642);  // 99 dof, p = 0.01
}

TEST_CASE("estimate_contraction: accounting") {
    const double rho = 0.05;
    const int n = 32;
    const double ell = 3.0;
    const std::uint64_t trials = 100000;
    const PiecewiseMetric& d = optimized_64();
    // computed once, shared by the subcases
    static const ContractionEstimate e = estimate_contraction(n, rho, ell, d, trials, 17);

    std::uint64_t total = 0;
    for (auto c : e.outcome_counts) total += c;
    CHECK(total == trials);
    CHECK(e.dominance_held);
    CHECK(e.mean_delta_exact <= e.mean_delta_bound);
    CHECK(e.burn_in == 10u * n);

    const double t = static_cast<double>(trials);
    SUBCASE("disk 0 chosen with frequency 1/n") {
        const double p = 1.0 / n;
        CHECK(std::abs(e.disk_zero_moves - t * p) < 3 * std::sqrt(t * p * (1 - p)));
        CHECK(e.outcome_counts[static_cast<std::size_t>(OutcomeKind::Coalesced)] <= e.disk_zero_moves);
    }
    SUBCASE("crescent hits match the crescent area") {
        const double r = radius_for(n, rho);
        const double others = t - static_cast<double>(e.disk_zero_moves);
        const double p = r * r * crescent_area(ell);
        CHECK(std::abs(e.crescent_hits - others * p) < 3 * std::sqrt(others * p * (1 - p)));
    }
    SUBCASE("near-move savings match the kernel integral") {
        // E[d(ell) - d(s)] over the part of the crescent with s < ell
        const int steps = 200000;
        const double h = std::min(ell, 2.0) / steps;
        double num = 0.0, den = 0.0;
        for (int k = 0; k < steps; ++k) {
            const double u = (k + 0.5) * h;
            const double w = 2.0 * (pi - theta_oracle(u, ell)) * u;
            num += (d.eval(ell) - d.eval(u)) * w;
            den += w;
        }
        const double expected = num / den;
        const auto near = static_cast<double>(e.outcome_counts[static_cast<std::size_t>(OutcomeKind::NearMove)]);
        REQUIRE(near > 100);
        const double mean = e.near_savings_sum / near;
        const double var = e.near_savings_sumsq / near - mean * mean;
        CHECK(std::abs(mean - expected) < 3 * std::sqrt(var / near));
    }
}

TEST_CASE("Hamming metric contracts below 1/8") {
    const ContractionEstimate e = estimate_contraction(32, 0.10, 2.0, PiecewiseMetric::hamming(64), 20000, 3);
    CHECK(e.mean_delta_bound + e.ci99_bound < 0.0);
    CHECK(e.mean_delta_exact <= e.mean_delta_bound);
}

TEST_CASE("optimized metric contracts at rho = 0.14") {
    const ContractionEstimate e = estimate_contraction(32, 0.14, 1.0, optimized_64(), 20000, 4);
    CHECK(e.mean_delta_bound + e.ci99_bound < 0.0);
    CHECK(e.dominance_held);
}

TEST_CASE("estimate_contraction is deterministic across thread counts") {
    const PiecewiseMetric& d = optimized_64();
    const ContractionEstimate ref = estimate_contraction_serial(16, 0.12, 2.0, d, 5000, 77);
    for (int threads : {1, 2, 3, 8}) {
        ContractionOptions o;
        o.threads = threads;
        check_same_estimate(ref, estimate_contraction(16, 0.12, 2.0, d, 5000, 77, o));
    }
    const ContractionEstimate other = estimate_contraction(16, 0.12, 2.0, d, 5000, 78);
    CHECK(other.mean_delta_bound != ref.mean_delta_bound);
    CHECK_THROWS_AS(estimate_contraction(16, 0.12, 2.0, d, 0, 1), std::invalid_argument);
}
