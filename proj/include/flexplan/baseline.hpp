#pragma once

#include <stdexcept>
#include <vector>

#include "flexplan/core.hpp"
#include "flexplan/mip.hpp"

namespace flexplan {

/// Flat column layout of the scheduling MILP, family-major:
/// buy | sell | charge | discharge | Y (machine-major) | I (silo-major).
struct VariableLayout {
    int n_slots = 0;
    int n_machines = 0;
    int n_silos = 0;
    bool has_soc = false;  // battery state-of-charge column family present

    int buy(int t) const { return t; }
    int sell(int t) const { return n_slots + t; }
    int charge(int t) const { return 2 * n_slots + t; }
    int discharge(int t) const { return 3 * n_slots + t; }
    int machine(int k, int t) const { return 4 * n_slots + k * n_slots + t; }
    int silo(int i, int t) const {
        return (4 + n_machines) * n_slots + i * n_slots + t;
    }
    int soc(int t) const { return (4 + n_machines + n_silos) * n_slots + t; }
    int total_columns() const {
        return n_slots * (4 + n_machines + n_silos + (has_soc ? 1 : 0));
    }
};

struct BaselineOptions {
    /// Enables sale revenue -P_s,t * pi_s,t * dt in the objective.  The base
    /// model sells spill for free.
    bool sell_revenue = false;
    std::vector<double> sell_prices;   // required when sell_revenue is set
    double battery_efficiency = 1.0;   // round-trip, applied on charge
};

struct InfeasibleModelError : std::runtime_error {
    explicit InfeasibleModelError(const std::string& why)
        : std::runtime_error("no feasible production plan: " + why) {}
};

std::pair<MixedIntegerProgram, VariableLayout> build_baseline_program(
    const PlantConfig& cfg, const std::vector<double>& dayahead,
    const BaselineOptions& opts = {});

Schedule decode_schedule(const PlantConfig& cfg, const VariableLayout& layout,
                         const std::vector<double>& x,
                         const std::vector<double>& dayahead,
                         const BaselineOptions& opts = {});

/// Computes the production cost of a schedule under the given prices.
double schedule_cost(const PlantConfig& cfg, const Schedule& s,
                     const std::vector<double>& dayahead,
                     const BaselineOptions& opts = {});

struct SolveOptions {
    double gap_tol = 1e-6;
    long node_limit = 1'000'000;
    std::string backend_name = "internal";
    Basis* basis_io = nullptr;  // optional warm-start handoff
};

/// Solves the baseline program and decodes the optimum.  Throws
/// InfeasibleModelError when no production plan satisfies the constraints.
Schedule solve_baseline(const PlantConfig& cfg,
                        const std::vector<double>& dayahead,
                        const BaselineOptions& opts = {},
                        const SolveOptions& solve_opts = {});

}  // namespace flexplan
