#include "hdmetric/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hdmetric {

namespace {

constexpr int kInsertAttempts = 20000;
constexpr int kInsertRestarts = 100;

}  // namespace

double radius_for(int n, double rho) {
    if (n < 1) throw std::invalid_argument("need at least one disk");
    if (!(rho > 0.0 && rho < 0.25)) throw std::invalid_argument("density must lie in (0, 1/4)");
    return std::sqrt(rho / (std::numbers::pi * n));
}

Configuration::Configuration(double radius, std::vector<TorusPoint> centers)
    : radius_(radius), centers_(std::move(centers)) {
    if (!(radius > 0.0)) throw std::invalid_argument("Configuration: radius must be positive");
    if (!(8.0 * radius < 0.5)) throw std::invalid_argument("Configuration: requires 8r < 1/2");
    if (centers_.empty()) throw std::invalid_argument("Configuration: no disks");
    if (!is_valid()) throw std::invalid_argument("Configuration: overlapping disks");
}

double Configuration::density() const { return size() * std::numbers::pi * radius_ * radius_; }

void Configuration::swap_centers(int i, int j) {
    std::swap(centers_[static_cast<std::size_t>(i)], centers_[static_cast<std::size_t>(j)]);
}

bool Configuration::is_valid() const {
    const double min_d2 = 4.0 * radius_ * radius_;
    for (std::size_t i = 0; i < centers_.size(); ++i)
        for (std::size_t j = i + 1; j < centers_.size(); ++j)
            if (torus_dist2(centers_[i], centers_[j]) < min_d2) return false;
    return true;
}

bool blocked_brute(const Configuration& config, const TorusPoint& p, int ignore) {
    const double min_d2 = 4.0 * config.radius() * config.radius();
    for (int k = 0; k < config.size(); ++k) {
        if (k != ignore && torus_dist2(config.center(k), p) < min_d2) return true;
    }
    return false;
}

int grid_side(double radius, int n) {
    // cells never narrower than 2r, and at most ~4n of them
    const int by_radius = static_cast<int>(std::floor(1.0 / (2.0 * radius)));
    const int by_count = std::max(3, 2 * static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n)))));
    return std::max(1, std::min(by_radius, by_count));
}

CellGrid::CellGrid(const Configuration& config)
    : m_(grid_side(config.radius(), config.size())),
      head_(static_cast<std::size_t>(m_ * m_), -1),
      next_(static_cast<std::size_t>(config.size()), -1),
      prev_(static_cast<std::size_t>(config.size()), -1) {
    for (int i = 0; i < config.size(); ++i) link(i, cell_of(config.center(i)));
}

int CellGrid::cell_of(const TorusPoint& p) const {
    const int cx = std::min(static_cast<int>(p.x() * m_), m_ - 1);
    const int cy = std::min(static_cast<int>(p.y() * m_), m_ - 1);
    return cy * m_ + cx;
}

void CellGrid::link(int i, int cell) {
    const auto c = static_cast<std::size_t>(cell);
    const auto u = static_cast<std::size_t>(i);
    next_[u] = head_[c];
    prev_[u] = -1;
    if (head_[c] >= 0) prev_[static_cast<std::size_t>(head_[c])] = i;
    head_[c] = i;
}

void CellGrid::unlink(int i, int cell) {
    const auto u = static_cast<std::size_t>(i);
    if (prev_[u] >= 0)
        next_[static_cast<std::size_t>(prev_[u])] = next_[u];
    else
        head_[static_cast<std::size_t>(cell)] = next_[u];
    if (next_[u] >= 0) prev_[static_cast<std::size_t>(next_[u])] = prev_[u];
}

bool CellGrid::blocked(const Configuration& config, const TorusPoint& p, int ignore) const {
    const double min_d2 = 4.0 * config.radius() * config.radius();
    const int cx = std::min(static_cast<int>(p.x() * m_), m_ - 1);
    const int cy = std::min(static_cast<int>(p.y() * m_), m_ - 1);
    for (int dy = -1; dy <= 1; ++dy) {
        const int y = (cy + dy + m_) % m_;
        for (int dx = -1; dx <= 1; ++dx) {
            const int x = (cx + dx + m_) % m_;
            for (int k = head_[static_cast<std::size_t>(y * m_ + x)]; k >= 0; k = next_[static_cast<std::size_t>(k)]) {
                if (k != ignore && torus_dist2(config.center(k), p) < min_d2) return true;
            }
        }
    }
    return false;
}

void CellGrid::move(int i, const TorusPoint& from, const TorusPoint& to) {
    const int a = cell_of(from);
    const int b = cell_of(to);
    if (a == b) return;
    unlink(i, a);
    link(i, b);
}

Proposal propose(const Configuration& config, Rng& rng) {
    const int index = static_cast<int>(rng.index(static_cast<std::uint64_t>(config.size())));
    const double x = rng.uniform();
    const double y = rng.uniform();
    return {index, TorusPoint(x, y)};
}

Configuration random_config(int n, double rho, Rng& rng) {
    const double r = radius_for(n, rho);
    if (!(8.0 * r < 0.5)) throw std::invalid_argument("random_config: requires 8r < 1/2");
    const double min_dist = 2.0 * r;
    const double min_d2 = min_dist * min_dist;
    const int m = grid_side(r, n);

    std::vector<int> head(static_cast<std::size_t>(m * m));
    std::vector<int> next(static_cast<std::size_t>(n));
    std::vector<TorusPoint> centers;
    centers.reserve(static_cast<std::size_t>(n));
    auto cell = [m](double v) { return std::min(static_cast<int>(v * m), m - 1); };
    auto free_at = [&](const TorusPoint& p) {
        const int cx = cell(p.x());
        const int cy = cell(p.y());
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx)
                for (int k = head[static_cast<std::size_t>(((cy + dy + m) % m) * m + (cx + dx + m) % m)]; k >= 0;
                     k = next[static_cast<std::size_t>(k)])
                    if (torus_dist2(centers[static_cast<std::size_t>(k)], p) < min_d2) return false;
        return true;
    };

    for (int attempt = 0; attempt < kInsertRestarts; ++attempt) {
        std::fill(head.begin(), head.end(), -1);
        centers.clear();

        bool stuck = false;
        for (int i = 0; i < n && !stuck; ++i) {
            int tries = 0;
            for (; tries < kInsertAttempts; ++tries) {
                const double x = rng.uniform();
                const double y = rng.uniform();
                const TorusPoint p(x, y);
                if (free_at(p)) {
                    const auto c = static_cast<std::size_t>(cell(p.y()) * m + cell(p.x()));
                    next[static_cast<std::size_t>(i)] = head[c];
                    head[c] = i;
                    centers.push_back(p);
                    break;
                }
            }
            stuck = tries == kInsertAttempts;
        }
        if (!stuck) return Configuration(r, std::move(centers));
    }
    throw InsertionFailure("random_config: sequential insertion failed; density too high for this initializer");
}

Configuration random_config(int n, double rho, std::uint64_t seed) {
    Rng rng(seed);
    return random_config(n, rho, rng);
}

std::pair<Configuration, bool> step(const Configuration& config, Rng& rng) {
    const Proposal p = propose(config, rng);
    if (blocked_brute(config, p.point, p.index)) return {config, false};
    Configuration next = config;
    next.place(p.index, p.point);
    return {std::move(next), true};
}

Chain::Chain(Configuration config) : config_(std::move(config)), grid_(config_) {}

bool Chain::apply(const Proposal& proposal) {
    ++stats_.steps;
    if (grid_.blocked(config_, proposal.point, proposal.index)) {
        ++stats_.rejected;
        return false;
    }
    grid_.move(proposal.index, config_.center(proposal.index), proposal.point);
    config_.place(proposal.index, proposal.point);
    ++stats_.accepted;
    return true;
}

bool Chain::step(Rng& rng) { return apply(propose(config_, rng)); }

void Chain::run(std::uint64_t steps, Rng& rng) {
    for (std::uint64_t s = 0; s < steps; ++s) step(rng);
}

std::pair<Configuration, ChainStats> run(const Configuration& config, std::uint64_t steps, std::uint64_t seed) {
    Rng rng(seed);
    Chain chain(config);
    chain.run(steps, rng);
    return {chain.config(), chain.stats()};
}

}  // namespace hdmetric
