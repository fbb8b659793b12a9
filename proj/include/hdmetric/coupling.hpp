#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "hdmetric/dynamics.hpp"
#include "hdmetric/metric.hpp"

namespace hdmetric {

/// Configurations X, Y that agree except at disk 0, with ell = |x_0 - y_0|.
struct CoupledPair {
    Configuration x;
    Configuration y;
    double ell;  ///< torus length, not normalized
};

/// Draw X by insertion plus burn_in chain steps, then move disk 0 to a uniform
/// valid point at distance ell_over_r * r. Throws std::runtime_error when no
/// valid displacement is found within the retry budget.
CoupledPair make_pair(int n, double rho, double ell_over_r, Rng& rng, std::uint64_t burn_in);
CoupledPair make_pair(int n, double rho, double ell_over_r, std::uint64_t seed, std::uint64_t burn_in);

enum class OutcomeKind : int {
    Coalesced = 0,
    Unchanged = 1,
    BothRejected = 2,
    FarMove = 3,
    NearMove = 4,
};

inline constexpr int kOutcomeKinds = 5;
std::string to_string(OutcomeKind k);

struct StepOutcome {
    OutcomeKind kind = OutcomeKind::Unchanged;
    double delta_bound = 0.0;
    double delta_exact = 0.0;
    /// |z - y_0| / r when z fell in Z(y_0), otherwise negative.
    double s_over_r = -1.0;
    int index = 0;
    TorusPoint proposal_x;
    TorusPoint proposal_y;
    bool in_crescent = false;
};

struct CoupledStep {
    Configuration x;
    Configuration y;
    StepOutcome outcome;
};

/// One step of the coupled chains. The returned configurations may differ in
/// up to two disks (zero after coalescence).
CoupledStep coupled_step(const CoupledPair& pair, const PiecewiseMetric& metric, Rng& rng);
/// Same step with the X-chain proposal supplied by the caller.
CoupledStep coupled_step(const CoupledPair& pair, const PiecewiseMetric& metric, const Proposal& proposal);

struct ContractionOptions {
    std::uint64_t burn_in = 0;  ///< 0 selects 10 n
    int threads = 0;
};

struct ContractionEstimate {
    int n = 0;
    double rho = 0.0;
    double ell_over_r = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t burn_in = 0;
    double mean_delta_bound = 0.0;
    double mean_delta_exact = 0.0;
    double se_bound = 0.0;
    double se_exact = 0.0;
    double ci99_bound = 0.0;  ///< half-width
    double ci99_exact = 0.0;
    std::array<std::uint64_t, kOutcomeKinds> outcome_counts{};

    std::uint64_t disk_zero_moves = 0;
    std::uint64_t crescent_hits = 0;
    /// Sums of d(ell) - d(s) over near moves.
    double near_savings_sum = 0.0;
    double near_savings_sumsq = 0.0;
    bool dominance_held = true;  ///< delta_exact <= delta_bound + 1e-12 on every trial
};

/// One-step estimator: each trial draws a fresh pair from a stream derived
/// from (seed, trial) and takes a single coupled step.
ContractionEstimate estimate_contraction(int n, double rho, double ell_over_r, const PiecewiseMetric& metric,
                                         std::uint64_t trials, std::uint64_t seed, const ContractionOptions& options = {});

/// Serial reference for estimate_contraction; identical output.
ContractionEstimate estimate_contraction_serial(int n, double rho, double ell_over_r, const PiecewiseMetric& metric,
                                                std::uint64_t trials, std::uint64_t seed,
                                                const ContractionOptions& options = {});

}  // namespace hdmetric
