#pragma once

#include <string>
#include <vector>

#include "flexplan/baseline.hpp"
#include "flexplan/core.hpp"
#include "flexplan/flex.hpp"
#include "flexplan/market.hpp"

namespace flexplan {

/// PV/battery capacity combinations under study, following the MXY naming:
/// the base plant, PV-only, battery-only and the matched PV+battery pairs.
struct ConfigurationGrid {
    std::vector<double> pv_capacities_mw;       // X values
    std::vector<double> battery_capacities_mwh; // Y values

    struct Config {
        std::string id;  // "M00", "M30", "M03", "M33", ...
        double pv_mw = 0;
        double battery_mwh = 0;
    };
    /// M00 first, then M0Y, MX0 and MXX in ascending capacity order.
    std::vector<Config> configurations() const;
};

struct CapitalCosts {
    double pv_eur_per_mw = 934'500;
    double battery_eur_per_mwh = 530'885;
};

struct ScenarioResult {
    std::string config_id;
    double pv_mw = 0;
    double battery_mwh = 0;
    double committed_cost_eur = 0;
    double flex_revenue_eur = 0;        // FR, month total
    double production_savings_eur = 0;  // PS vs M00
    double payback_years = 0;           // meaningful when amortizable
    bool amortizable = true;
    long n_accepted = 0;
    long n_feasible_hours = 0;
    double flexible_hours_avg = 0;  // feasible taus per day, averaged
    std::vector<FlexTransaction> accepted;
};

struct RollingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RollingOptions {
    bool reset_soc_per_window = false;
    SolveOptions solve;
    BaselineOptions model;
};

struct RollingDay {
    PlantConfig window_cfg;   // shrinking remainder of the week, with carry
    Schedule window_schedule; // baseline over the remaining window
};

struct RollingPlan {
    std::vector<RollingDay> days;
    Schedule committed;  // first-day slots of each window, stitched
};

/// Plans one week by daily re-optimization over the shrinking remainder,
/// committing only the first day of each window and carrying silo levels,
/// battery state and machine run history forward.
RollingPlan rolling_plan(const PlantConfig& week_cfg,
                         const std::vector<double>& week_dayahead,
                         const RollingOptions& opts = {});

struct StudySpec {
    PlantConfig base_cfg;                   // the M00 plant
    std::vector<double> pv_profile_per_mw;  // per-slot output of 1 MW of PV
    double battery_dod = 0.8;
    double battery_wear_cost = 1.0;
    double battery_c_rate = 1.0;  // charge/discharge cap per MWh of capacity
    ConfigurationGrid grid;
    CapitalCosts capital;
    Direction direction = Direction::Sell;
    double h_magnitude_mw = 0;
    SweepOptions sweep;
    RollingOptions rolling;
};

/// Runs the whole configuration sweep over a month of prices (whole weeks).
/// Results appear in ConfigurationGrid::configurations() order.
std::vector<ScenarioResult> run_study(const StudySpec& spec,
                                      const PriceSet& month_prices);

}  // namespace flexplan
