#pragma once

#include <functional>
#include <optional>

#include "flexplan/baseline.hpp"
#include "flexplan/core.hpp"
#include "flexplan/market.hpp"

namespace flexplan {

enum class Direction { Sell, Buy };

/// A requested grid-purchase perturbation: at slot tau (1-based, within the
/// flexibility window) the purchase moves by h relative to the baseline,
/// with all earlier decisions frozen.
struct FlexRequest {
    int tau = 1;
    double h_mw = 0;  // negative = sell
    double eps_min = 0.05;
    double eps_max = 0.05;
    bool equal_run_hours = false;
};

enum class TxStatus { Feasible, Infeasible, NotAvailable };

struct FlexTransaction {
    int tau = 0;
    double h_mw = 0;
    Direction direction = Direction::Sell;
    TxStatus status = TxStatus::Infeasible;
    double dayahead_price = 0;
    std::optional<double> tertiary_price;
    std::optional<double> spread;         // S+ or S-, EUR/MWh
    std::optional<double> flex_cost_eur;  // delta Phi, set whenever solvable
    std::optional<double> gross_eur;      // |h| * dt * spread
    std::optional<double> profit_eur;     // gross - flex cost

    bool feasible() const { return status == TxStatus::Feasible; }
    bool profitable() const {
        return feasible() && profit_eur && *profit_eur > 0;
    }
};

struct FlexError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Baseline program plus the perturbation, deviation-band and frozen-history
/// constraints.  Throws FlexError when the perturbed purchase leaves [0,
/// P_b,max]; throws std::invalid_argument on an invalid base schedule.
std::pair<MixedIntegerProgram, VariableLayout> build_flex_program(
    const PlantConfig& cfg, const std::vector<double>& dayahead,
    const Schedule& base, const FlexRequest& req,
    const BaselineOptions& opts = {});

struct FlexOutcome {
    bool feasible = false;
    Schedule schedule;       // valid when feasible
    double delta_cost = 0;   // Phi_flex - Phi_base, >= 0
};

FlexOutcome flexibility_cost(const PlantConfig& cfg,
                             const std::vector<double>& dayahead,
                             const Schedule& base, const FlexRequest& req,
                             const BaselineOptions& opts = {},
                             const SolveOptions& solve_opts = {});

/// Pure pricing arithmetic for one candidate trade.  `tertiary` absent
/// means the balancing market saw no transaction at tau.
FlexTransaction evaluate_transaction(std::optional<double> flex_cost, double h,
                                     double dt, double dayahead_price,
                                     std::optional<double> tertiary, int tau);

struct SweepEntry {
    FlexTransaction tx;
    std::optional<Schedule> schedule;  // flexible schedule when feasible
};

struct SweepOptions {
    double eps_min = 0.05;
    double eps_max = 0.05;
    bool equal_run_hours = false;
    SolveOptions solve;
    BaselineOptions model;
};

/// Number of slots in the flexibility window T1 (the first day).
int flex_window_slots(const Horizon& h);

/// Evaluates |h|=h_magnitude trades for every tau in [tau_begin, tau_end]
/// (1-based, inclusive); deterministic order by tau.
std::vector<SweepEntry> sweep_day(const PlantConfig& cfg, const PriceSet& prices,
                                  const Schedule& base, Direction direction,
                                  double h_magnitude,
                                  const SweepOptions& opts = {},
                                  int tau_begin = 1, int tau_end = -1);

using SweepFn = std::function<std::vector<SweepEntry>(
    const Schedule& base, int tau_begin, int tau_end)>;

/// Greedy acceptance: repeatedly take the most profitable feasible trade,
/// adopt its schedule as the new baseline and re-sweep the remaining slots.
/// Ties break toward the earliest tau; only strictly positive profit is
/// accepted, at most one trade per slot.
std::vector<FlexTransaction> greedy_select_with(const SweepFn& sweep,
                                                const Schedule& base,
                                                int tau_begin, int tau_end,
                                                Schedule* final_baseline = nullptr);

std::vector<FlexTransaction> greedy_select(const PlantConfig& cfg,
                                           const PriceSet& prices,
                                           const Schedule& base,
                                           Direction direction,
                                           double h_magnitude,
                                           const SweepOptions& opts = {},
                                           Schedule* final_baseline = nullptr);

}  // namespace flexplan
