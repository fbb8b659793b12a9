#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hdmetric/geometry.hpp"
#include "hdmetric/rng.hpp"

namespace hdmetric {

/// Random sequential insertion ran out of attempts.
class InsertionFailure : public std::runtime_error {
public:
    explicit InsertionFailure(const std::string& what) : std::runtime_error(what) {}
};

/// Disk radius for n disks at density rho on the unit torus.
double radius_for(int n, double rho);

/// n disk centers of radius r on the unit torus with pairwise distance >= 2r.
/// Construction enforces 8r < 1/2 and the hard-core constraint.
class Configuration {
public:
    Configuration(double radius, std::vector<TorusPoint> centers);

    int size() const { return static_cast<int>(centers_.size()); }
    double radius() const { return radius_; }
    double density() const;
    const TorusPoint& center(int i) const { return centers_[static_cast<std::size_t>(i)]; }
    std::span<const TorusPoint> centers() const { return centers_; }

    /// Move disk i without any validity check; the caller guarantees validity.
    void place(int i, const TorusPoint& p) { centers_[static_cast<std::size_t>(i)] = p; }
    void swap_centers(int i, int j);

    /// Full O(n^2) audit of the hard-core constraint.
    bool is_valid() const;

private:
    double radius_;
    std::vector<TorusPoint> centers_;
};

/// O(n) check: would p overlap any center other than `ignore`?
bool blocked_brute(const Configuration& config, const TorusPoint& p, int ignore);

/// Side count of the cell grid: cells at least 2r wide, at most ~4n cells.
int grid_side(double radius, int n);

/// Uniform cell grid over the torus with cell side >= 2r; a blocking query
/// scans the 3x3 block of cells around the query point.
class CellGrid {
public:
    explicit CellGrid(const Configuration& config);

    int cells_per_side() const { return m_; }
    bool blocked(const Configuration& config, const TorusPoint& p, int ignore) const;
    void move(int i, const TorusPoint& from, const TorusPoint& to);

private:
    int cell_of(const TorusPoint& p) const;
    void link(int i, int cell);
    void unlink(int i, int cell);

    int m_;
    std::vector<int> head_;  // first disk per cell, -1 if empty
    std::vector<int> next_;
    std::vector<int> prev_;
};

struct ChainStats {
    std::uint64_t steps = 0;
    std::uint64_t accepted = 0;
    std::uint64_t rejected = 0;

    double acceptance_rate() const { return steps == 0 ? 0.0 : static_cast<double>(accepted) / steps; }
};

struct Proposal {
    int index;
    TorusPoint point;
};

/// Uniform disk index and uniform torus point.
Proposal propose(const Configuration& config, Rng& rng);

/// Sequential random insertion; restarts from scratch when one disk cannot be
/// placed within the attempt budget.
Configuration random_config(int n, double rho, Rng& rng);
Configuration random_config(int n, double rho, std::uint64_t seed);

/// One step of the single-disk global-move dynamics on a value.
std::pair<Configuration, bool> step(const Configuration& config, Rng& rng);

/// Chain state with an attached cell grid; steps in place.
class Chain {
public:
    explicit Chain(Configuration config);

    const Configuration& config() const { return config_; }
    const CellGrid& grid() const { return grid_; }
    const ChainStats& stats() const { return stats_; }

    bool step(Rng& rng);
    /// Apply an already drawn proposal; returns whether it was accepted.
    bool apply(const Proposal& proposal);
    void run(std::uint64_t steps, Rng& rng);

private:
    Configuration config_;
    CellGrid grid_;
    ChainStats stats_;
};

std::pair<Configuration, ChainStats> run(const Configuration& config, std::uint64_t steps, std::uint64_t seed);

}  // namespace hdmetric
