// Phase-1 simplex for the contraction constraints, dense tableau.

#include <cmath>
#include <vector>

#include "hdmetric/contraction.hpp"

namespace hdmetric {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kFeasTol = 1e-9;

class Tableau {
public:
    Tableau(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<std::size_t>((rows + 1) * (cols + 1)), 0.0) {}

    double& at(int r, int c) { return a_[static_cast<std::size_t>(r * (cols_ + 1) + c)]; }
    double& rhs(int r) { return at(r, cols_); }
    /// Row `rows_` holds the phase-1 reduced costs.
    double& cost(int c) { return at(rows_, c); }

    void pivot(int pr, int pc) {
        const double p = at(pr, pc);
        for (int c = 0; c <= cols_; ++c) at(pr, c) /= p;
        for (int r = 0; r <= rows_; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0.0) continue;
            for (int c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
        }
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

private:
    int rows_;
    int cols_;
    std::vector<double> a_;
};

}  // namespace

bool lp_feasible(const ConstraintSystem& system) {
    const int L = system.cells();
    // Columns: d (L) | surplus s (L) | slack t (L) | artificial a (L).
    // Rows 0..L-1:  (c+W_i) d_i - sum_j w_ij d_j - s_i + a_i = g_i
    // Rows L..2L-1: d_i + t_i = 1
    const int rows = 2 * L;
    const int cols = 4 * L;
    Tableau t(rows, cols);
    std::vector<int> basis(static_cast<std::size_t>(rows));

    for (int i = 0; i < L; ++i) {
        for (int j = 0; j < i; ++j) t.at(i, j) = -system.w(i, j);
        t.at(i, i) = system.margin() + system.row_weight(i);
        t.at(i, L + i) = -1.0;
        t.at(i, 3 * L + i) = 1.0;
        t.rhs(i) = system.g(i);
        basis[static_cast<std::size_t>(i)] = 3 * L + i;

        t.at(L + i, i) = 1.0;
        t.at(L + i, 2 * L + i) = 1.0;
        t.rhs(L + i) = 1.0;
        basis[static_cast<std::size_t>(L + i)] = 2 * L + i;
    }
    // Minimize the sum of artificials; reduced costs are minus the sum of the
    // artificial rows over the non-artificial columns.
    for (int c = 0; c <= cols; ++c) {
        if (c >= 3 * L && c < cols) continue;
        double sum = 0.0;
        for (int i = 0; i < L; ++i) sum += t.at(i, c);
        t.cost(c) = -sum;
    }

    for (int iter = 0; iter < 100000; ++iter) {
        // Bland: lowest-index improving column
        int enter = -1;
        for (int c = 0; c < cols; ++c) {
            if (t.cost(c) < -kPivotTol) {
                enter = c;
                break;
            }
        }
        if (enter < 0) break;
        int leave = -1;
        double best = 0.0;
        for (int r = 0; r < rows; ++r) {
            const double a = t.at(r, enter);
            if (a <= kPivotTol) continue;
            const double ratio = t.rhs(r) / a;
            if (leave < 0 || ratio < best - 1e-15 ||
                (std::abs(ratio - best) <= 1e-15 && basis[static_cast<std::size_t>(r)] < basis[static_cast<std::size_t>(leave)])) {
                leave = r;
                best = ratio;
            }
        }
        // unbounded cannot happen for a phase-1 objective bounded below by 0
        if (leave < 0) break;
        t.pivot(leave, enter);
        basis[static_cast<std::size_t>(leave)] = enter;
    }
    // Objective value is -cost(rhs)
    return -t.cost(cols) <= kFeasTol;
}

}  // namespace hdmetric
