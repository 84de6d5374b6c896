#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace flexplan {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// One nonzero coefficient of a sparse row or objective.
struct Entry {
    int col = 0;
    double value = 0.0;
};

enum class Relation { LessEqual, GreaterEqual, Equal };

struct Constraint {
    std::vector<Entry> terms;
    Relation rel = Relation::LessEqual;
    double rhs = 0.0;
};

/// Sparse linear program in minimization form with per-variable bounds.
/// Upper bounds may be +inf, lower bounds may be -inf.
struct LinearProgram {
    int n_vars = 0;
    std::vector<Entry> objective;
    std::vector<Constraint> constraints;
    std::vector<double> lower;
    std::vector<double> upper;

    int add_variable(double lo, double up) {
        lower.push_back(lo);
        upper.push_back(up);
        return n_vars++;
    }
    void set_objective(int col, double coeff) {
        if (coeff != 0.0) objective.push_back({col, coeff});
    }
    Constraint& add_constraint(Relation rel, double rhs) {
        constraints.emplace_back();
        constraints.back().rel = rel;
        constraints.back().rhs = rhs;
        return constraints.back();
    }

    /// Throws std::invalid_argument on NaN coefficients, non-sentinel
    /// infinities or out-of-range indices.
    void check_valid() const;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> x;
    double objective_value = 0.0;
    long iterations = 0;
};

/// Simplex basis snapshot used to warm start related solves.  Columns
/// n_vars..n_vars+m-1 denote the logical (row) variables.
struct Basis {
    std::vector<int> basic;          // one column index per row
    std::vector<std::uint8_t> at_upper;  // nonbasic rest position, per column

    bool empty() const { return basic.empty(); }
};

/// Thrown when the anti-cycling guard gives up.
struct SimplexCycleError : std::runtime_error {
    explicit SimplexCycleError(long iters)
        : std::runtime_error("simplex exceeded iteration guard after " +
                             std::to_string(iters) + " iterations"),
          iterations(iters) {}
    long iterations;
};

LpSolution solve_lp(const LinearProgram& lp);

/// Warm-started variant.  `basis` is both input (may be empty or sized for
/// fewer rows than lp has; missing rows start on their logicals) and output.
LpSolution solve_lp(const LinearProgram& lp, Basis& basis);

/// Reusable solver state for a sequence of solves over one program whose
/// rows and objective are fixed and only the variable bounds move, the
/// pattern branch-and-bound produces.  When the incoming basis is the one
/// the previous call on this context returned, the solve continues from the
/// factorization already in memory and skips the dense refactorization that
/// dominates cold warm starts on large programs.
class SimplexContext {
  public:
    explicit SimplexContext(const LinearProgram& lp);
    ~SimplexContext();
    SimplexContext(SimplexContext&&) noexcept;
    SimplexContext& operator=(SimplexContext&&) noexcept;

    /// Solves under the given structural bounds; `basis` behaves as in
    /// solve_lp.  Bound vectors must match the program's n_vars.  When
    /// `objective` is given it replaces the program's objective densely for
    /// this call only; swapping costs keeps the factorization valid, which
    /// makes alternating-objective heuristics cheap.
    LpSolution solve(const std::vector<double>& lower,
                     const std::vector<double>& upper, Basis& basis,
                     const std::vector<double>* objective = nullptr);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl;
};

/// Debug dump in CPLEX LP text format, 12 significant digits.
void write_lp_format(const LinearProgram& lp, std::ostream& os);

}  // namespace flexplan
