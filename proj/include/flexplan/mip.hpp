#pragma once

#include <memory>
#include <string>
#include <vector>

#include "flexplan/lp.hpp"

namespace flexplan {

struct MixedIntegerProgram {
    LinearProgram lp;
    std::vector<int> binary_vars;  // sorted, bounds within [0,1]

    void check_valid() const;
};

enum class MipStatus { Optimal, Infeasible, NoIncumbent };

struct MipSolution {
    MipStatus status = MipStatus::Infeasible;
    std::vector<double> x;
    double objective_value = 0.0;
    double lower_bound = 0.0;
    long nodes_explored = 0;
};

struct MipOptions {
    double gap_tol = 1e-6;
    long node_limit = 1'000'000;
    /// Optional in/out basis: warm starts the root relaxation and receives
    /// the root's optimal basis back.  May be null.
    Basis* basis_io = nullptr;
    /// Optional point whose binary entries are tried as a starting incumbent
    /// (fix and repair by LP).  Indexed by column; may be null.
    const std::vector<double>* integer_hint = nullptr;
};

/// Thrown when the node limit is hit before the gap closes.
struct NodeLimitError : std::runtime_error {
    NodeLimitError(long nodes, bool incumbent_found, double incumbent)
        : std::runtime_error(
              "node limit reached after " + std::to_string(nodes) +
              " nodes" +
              (incumbent_found
                   ? " (best incumbent " + std::to_string(incumbent) + ")"
                   : " (no incumbent)")),
          nodes(nodes),
          has_incumbent(incumbent_found),
          incumbent_objective(incumbent) {}
    long nodes;
    bool has_incumbent;
    double incumbent_objective;
};

MipSolution solve_mip(const MixedIntegerProgram& mip, const MipOptions& opts = {});

/// Pluggable solver contract.  Backends must be deterministic for a fixed
/// configuration.  The built-in branch-and-bound registers as "internal".
class SolverBackend {
  public:
    virtual ~SolverBackend() = default;
    virtual std::string name() const = 0;
    virtual MipSolution solve(const MixedIntegerProgram& mip,
                              const MipOptions& opts) = 0;
};

void register_backend(std::unique_ptr<SolverBackend> backend);

/// Looks up a backend by name; throws std::invalid_argument if unknown.
SolverBackend& backend(const std::string& name = "internal");

std::vector<std::string> backend_names();

}  // namespace flexplan
