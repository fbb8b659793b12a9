#pragma once

#include <vector>

namespace hdmetric {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int order);

    int order() const { return static_cast<int>(nodes.size()); }

    /// Integrate f over [a, b]; returns 0 when b <= a.
    template <class F>
    double integrate(F&& f, double a, double b) const {
        if (!(b > a)) return 0.0;
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        double sum = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k) sum += weights[k] * f(mid + half * nodes[k]);
        return half * sum;
    }
};

}  // namespace hdmetric
