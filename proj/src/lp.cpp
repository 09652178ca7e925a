#include "adpp/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace adpp {

const char* to_string(LpStatus status) {
    switch (status) {
        case LpStatus::Optimal: return "optimal";
        case LpStatus::Infeasible: return "infeasible";
        case LpStatus::Unbounded: return "unbounded";
    }
    return "unknown";
}

LinearProgram make_lp(const StrategyTable& table, std::span<const double> constraints, double relaxation) {
    if (table.rows() != constraints.size() + 1) throw ValidationError("constraint count does not match reward matrix");
    LinearProgram lp;
    auto r0 = table.row(0);
    lp.objective.assign(r0.begin(), r0.end());
    for (std::size_t k = 0; k < constraints.size(); ++k) {
        auto rk = table.row(k + 1);
        lp.constraints.emplace_back(rk.begin(), rk.end());
        lp.rhs.push_back(constraints[k] + relaxation);
    }
    return lp;
}

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kFeasEps = 1e-9;

void check_shape(const LinearProgram& lp) {
    if (lp.objective.empty()) throw ValidationError("LP needs at least one variable");
    if (lp.rhs.size() != lp.constraints.size()) throw ValidationError("LP rhs length mismatch");
    for (const auto& row : lp.constraints)
        if (row.size() != lp.objective.size()) throw ValidationError("LP constraint row length mismatch");
    for (double b : lp.rhs)
        if (!std::isfinite(b)) throw ValidationError("LP rhs must be finite");
}

// Dense tableau over columns [theta | slack | artificial].
class Tableau {
public:
    explicit Tableau(const LinearProgram& lp) : f_(lp.variables()), k_(lp.rows()) {
        rows_ = k_ + 1;
        // artificials: one per negative-rhs inequality plus the simplex row
        std::vector<bool> needs_art(rows_, false);
        for (std::size_t r = 0; r < k_; ++r) needs_art[r] = lp.rhs[r] < 0.0;
        needs_art[k_] = true;
        art_count_ = static_cast<std::size_t>(std::count(needs_art.begin(), needs_art.end(), true));
        cols_ = f_ + k_ + art_count_;
        a_.assign(rows_ * cols_, 0.0);
        b_.assign(rows_, 0.0);
        basis_.assign(rows_, 0);

        std::size_t art = f_ + k_;
        for (std::size_t r = 0; r < k_; ++r) {
            const double sign = needs_art[r] ? -1.0 : 1.0;
            for (std::size_t j = 0; j < f_; ++j) at(r, j) = sign * lp.constraints[r][j];
            at(r, f_ + r) = sign;
            b_[r] = sign * lp.rhs[r];
            if (needs_art[r]) {
                at(r, art) = 1.0;
                basis_[r] = art++;
            } else {
                basis_[r] = f_ + r;
            }
        }
        for (std::size_t j = 0; j < f_; ++j) at(k_, j) = 1.0;
        b_[k_] = 1.0;
        at(k_, art) = 1.0;
        basis_[k_] = art;
    }

    double& at(std::size_t r, std::size_t c) { return a_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return a_[r * cols_ + c]; }
    bool artificial(std::size_t c) const { return c >= f_ + k_; }

    // Runs simplex iterations for `cost` (one entry per column) with Bland's
    // rule. Columns flagged in `blocked` never enter.
    LpStatus optimize(const std::vector<double>& cost, const std::vector<bool>& blocked, std::size_t& iterations,
                      std::size_t max_iterations) {
        std::vector<double> dual(rows_);
        for (;;) {
            for (std::size_t r = 0; r < rows_; ++r) dual[r] = cost[basis_[r]];
            std::size_t entering = cols_;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (blocked[j]) continue;
                double d = cost[j];
                for (std::size_t r = 0; r < rows_; ++r) d -= dual[r] * at(r, j);
                if (d < -kPivotEps) {
                    entering = j;
                    break;
                }
            }
            if (entering == cols_) return LpStatus::Optimal;

            std::size_t leaving = rows_;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < rows_; ++r) {
                const double coef = at(r, entering);
                if (coef <= kPivotEps) continue;
                const double ratio = b_[r] / coef;
                const bool tie = leaving != rows_ && std::abs(ratio - best_ratio) <= kPivotEps;
                if ((!tie && ratio < best_ratio) || (tie && basis_[r] < basis_[leaving])) {
                    best_ratio = ratio;
                    leaving = r;
                }
            }
            if (leaving == rows_) return LpStatus::Unbounded;
            if (++iterations > max_iterations)
                throw LpIterationLimit("simplex exceeded " + std::to_string(max_iterations) + " pivots");
            pivot(leaving, entering);
        }
    }

    void pivot(std::size_t row, std::size_t col) {
        const double p = at(row, col);
        for (std::size_t j = 0; j < cols_; ++j) at(row, j) /= p;
        b_[row] /= p;
        at(row, col) = 1.0;
        for (std::size_t r = 0; r < rows_; ++r) {
            if (r == row) continue;
            const double factor = at(r, col);
            if (factor == 0.0) continue;
            for (std::size_t j = 0; j < cols_; ++j) at(r, j) -= factor * at(row, j);
            at(r, col) = 0.0;
            b_[r] -= factor * b_[row];
            if (b_[r] < 0.0 && b_[r] > -kPivotEps) b_[r] = 0.0;
        }
        basis_[row] = col;
    }

    // Pivots zero-level artificials out of the basis where a structural column allows.
    void expel_artificials() {
        for (std::size_t r = 0; r < rows_; ++r) {
            if (!artificial(basis_[r])) continue;
            for (std::size_t j = 0; j < f_ + k_; ++j) {
                if (std::abs(at(r, j)) > kPivotEps) {
                    pivot(r, j);
                    break;
                }
            }
        }
    }

    double basic_artificial_mass() const {
        double s = 0.0;
        for (std::size_t r = 0; r < rows_; ++r)
            if (artificial(basis_[r])) s += b_[r];
        return s;
    }

    std::vector<double> theta() const {
        std::vector<double> x(f_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r)
            if (basis_[r] < f_) x[basis_[r]] = std::max(0.0, b_[r]);
        return x;
    }

    std::size_t cols() const { return cols_; }
    std::size_t structural() const { return f_; }

private:
    std::size_t f_, k_, rows_ = 0, cols_ = 0, art_count_ = 0;
    std::vector<double> a_, b_;
    std::vector<std::size_t> basis_;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

bool feasible(const LinearProgram& lp, const std::vector<double>& theta) {
    double total = 0.0;
    for (double v : theta) {
        if (v < -kFeasEps) return false;
        total += v;
    }
    if (std::abs(total - 1.0) > kFeasEps) return false;
    for (std::size_t k = 0; k < lp.rows(); ++k)
        if (dot(lp.constraints[k], theta) > lp.rhs[k] + kFeasEps) return false;
    return true;
}

// Solves the square system in place by Gaussian elimination with partial
// pivoting. Returns false when singular.
bool solve_square(std::vector<std::vector<double>> m, std::vector<double> rhs, std::vector<double>& out) {
    const std::size_t n = rhs.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
        if (std::abs(m[piv][c]) < 1e-12) return false;
        std::swap(m[piv], m[c]);
        std::swap(rhs[piv], rhs[c]);
        for (std::size_t r = c + 1; r < n; ++r) {
            const double f = m[r][c] / m[c][c];
            for (std::size_t j = c; j < n; ++j) m[r][j] -= f * m[c][j];
            rhs[r] -= f * rhs[c];
        }
    }
    out.assign(n, 0.0);
    for (std::size_t c = n; c-- > 0;) {
        double s = rhs[c];
        for (std::size_t j = c + 1; j < n; ++j) s -= m[c][j] * out[j];
        out[c] = s / m[c][c];
    }
    return true;
}

// Calls fn(subset) for every k-subset of {0..n-1} in lexicographic order.
template <class Fn>
void for_each_subset(std::size_t n, std::size_t k, Fn&& fn) {
    if (k > n) return;
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
        fn(idx);
        std::size_t i = k;
        while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
}

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, std::size_t max_iterations) {
    check_shape(lp);
    Tableau tab(lp);
    LpSolution sol;

    std::vector<double> phase1(tab.cols(), 0.0);
    for (std::size_t j = 0; j < tab.cols(); ++j)
        if (tab.artificial(j)) phase1[j] = 1.0;
    std::vector<bool> none(tab.cols(), false);
    tab.optimize(phase1, none, sol.iterations, max_iterations);
    if (tab.basic_artificial_mass() > kFeasEps) {
        sol.status = LpStatus::Infeasible;
        return sol;
    }
    tab.expel_artificials();

    std::vector<double> phase2(tab.cols(), 0.0);
    std::copy(lp.objective.begin(), lp.objective.end(), phase2.begin());
    std::vector<bool> blocked(tab.cols(), false);
    for (std::size_t j = 0; j < tab.cols(); ++j) blocked[j] = tab.artificial(j);
    sol.status = tab.optimize(phase2, blocked, sol.iterations, max_iterations);
    if (sol.status != LpStatus::Optimal) return sol;
    sol.theta = tab.theta();
    sol.value = dot(lp.objective, sol.theta);
    return sol;
}

LpSolution brute_force_lp_oracle(const LinearProgram& lp) {
    check_shape(lp);
    const std::size_t f = lp.variables();
    const std::size_t k = lp.rows();
    if (f > 8 || k > 3) throw CapacityError("brute-force LP oracle is limited to F <= 8 and K <= 3");

    LpSolution best;
    best.status = LpStatus::Infeasible;
    best.value = std::numeric_limits<double>::infinity();
    for (std::size_t s = 1; s <= std::min(f, k + 1); ++s) {
        for_each_subset(f, s, [&](const std::vector<std::size_t>& support) {
            for_each_subset(k, s - 1, [&](const std::vector<std::size_t>& active) {
                std::vector<std::vector<double>> m(s, std::vector<double>(s));
                std::vector<double> rhs(s);
                for (std::size_t j = 0; j < s; ++j) m[0][j] = 1.0;
                rhs[0] = 1.0;
                for (std::size_t a = 0; a < active.size(); ++a) {
                    for (std::size_t j = 0; j < s; ++j) m[a + 1][j] = lp.constraints[active[a]][support[j]];
                    rhs[a + 1] = lp.rhs[active[a]];
                }
                std::vector<double> x;
                if (!solve_square(std::move(m), std::move(rhs), x)) return;
                std::vector<double> theta(f, 0.0);
                for (std::size_t j = 0; j < s; ++j) theta[support[j]] = x[j];
                if (!feasible(lp, theta)) return;
                for (double& v : theta) v = std::max(0.0, v);
                const double value = dot(lp.objective, theta);
                if (value < best.value) {
                    best.status = LpStatus::Optimal;
                    best.value = value;
                    best.theta = std::move(theta);
                }
            });
        });
    }
    if (!best.optimal()) best.value = 0.0;
    return best;
}

LpSolution perturbed_value(double x, const StrategyTable& table, std::span<const double> constraints) {
    if (!(x >= 0.0)) throw ValidationError("relaxation x must be >= 0");
    return solve_lp(make_lp(table, constraints, x));
}

double default_lipschitz_range(const StrategyTable& table, std::span<const double> constraints) {
    double slack = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < constraints.size(); ++k) {
        auto row = table.row(k + 1);
        slack = std::min(slack, constraints[k] - *std::min_element(row.begin(), row.end()));
    }
    if (!std::isfinite(slack) || slack <= 0.0) return 1.0;
    return 0.5 * slack;
}

std::vector<std::pair<double, double>> perturbed_value_grid(const StrategyTable& table,
                                                            std::span<const double> constraints, double x_max,
                                                            std::size_t grid) {
    if (grid < 2) throw ValidationError("Lipschitz grid needs at least 2 points");
    if (!(x_max > 0.0)) throw ValidationError("Lipschitz range must be positive");
    std::vector<std::pair<double, double>> out;
    out.reserve(grid);
    for (std::size_t i = 0; i < grid; ++i) {
        const double x = x_max * static_cast<double>(i) / static_cast<double>(grid - 1);
        auto sol = perturbed_value(x, table, constraints);
        if (!sol.optimal()) {
            if (i == 0) throw ValidationError("LP infeasible at x = 0; Lipschitz estimate undefined");
            throw std::runtime_error(std::string("relaxed LP not optimal: ") + to_string(sol.status));
        }
        out.emplace_back(x, sol.value);
    }
    return out;
}

double estimate_lipschitz(const StrategyTable& table, std::span<const double> constraints, double x_max,
                          std::size_t grid) {
    const auto points = perturbed_value_grid(table, constraints, x_max, grid);
    double c_hat = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double slope =
            std::abs(points[i].second - points[i - 1].second) / (points[i].first - points[i - 1].first);
        c_hat = std::max(c_hat, slope);
    }
    return c_hat;
}

double theorem2_gap(double distance, double nu, double b_max, double c_hat) {
    return (c_hat + 1.0) * b_max * (distance + nu);
}

}  // namespace adpp
