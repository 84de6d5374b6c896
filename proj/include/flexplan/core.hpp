#pragma once

#include <string>
#include <vector>

namespace flexplan {

struct Horizon {
    int n_slots = 0;        // N_T
    double slot_hours = 1;  // hours per slot
};

struct Machine {
    std::string id;
    double power_mw = 0;                 // rated electric power when on
    std::vector<double> production_tph;  // per slot; single value broadcasts
    int min_on_slots = 0;
    int min_off_slots = 0;

    double production_at(int t) const {
        if (production_tph.empty()) return 0.0;
        return production_tph.size() == 1 ? production_tph[0]
                                          : production_tph[static_cast<size_t>(t)];
    }
};

struct Silo {
    std::string id;
    double capacity_max_t = 0;
    double capacity_min_t = 0;
    double initial_t = 0;
    double storage_cost = 0;  // EUR per tonne-hour
};

struct Battery {
    double capacity_mwh = 0;  // rated capacity
    double dod = 0;           // usable fraction, in [0,1]
    double soc0_mwh = 0;
    double p_charge_max_mw = 0;
    double p_discharge_max_mw = 0;
    double wear_cost = 0;  // EUR/MWh, charged on both directions

    double soc_min() const { return capacity_mwh * (1.0 - dod); }
    double soc_max() const { return capacity_mwh * dod; }
};

struct GridContract {
    double p_buy_max_mw = 0;
};

/// Consecutive on/off slots committed just before the current horizon.
/// Used by the rolling planner to carry machine obligations across windows.
/// `tail` holds the most recent committed states, oldest first.
struct MachineHistory {
    std::vector<int> tail;
};

struct PlantConfig {
    Horizon horizon;
    std::vector<Machine> machines;
    std::vector<Silo> silos;
    Battery battery;
    GridContract grid;
    std::vector<double> pv_power_mw;  // per slot; single value broadcasts
    std::vector<double> demand_tph;   // per slot; single value broadcasts
    std::vector<MachineHistory> machine_history;  // optional, per machine

    double pv_at(int t) const {
        if (pv_power_mw.empty()) return 0.0;
        return pv_power_mw.size() == 1 ? pv_power_mw[0]
                                       : pv_power_mw[static_cast<size_t>(t)];
    }
    double demand_at(int t) const {
        if (demand_tph.empty()) return 0.0;
        return demand_tph.size() == 1 ? demand_tph[0]
                                      : demand_tph[static_cast<size_t>(t)];
    }
};

/// Per-slot decision values plus the realized cost.
struct Schedule {
    std::vector<double> buy_mw;
    std::vector<double> sell_mw;
    std::vector<double> charge_mw;
    std::vector<double> discharge_mw;
    std::vector<std::vector<int>> machine_on;     // [machine][slot]
    std::vector<std::vector<double>> silo_level_t;  // [silo][slot]
    double cost_eur = 0;
};

enum class Severity { Error, Warning };

struct Violation {
    Severity severity = Severity::Error;
    std::string what;   // field or constraint name
    int slot = -1;      // -1 when not slot-specific
    std::string detail;
};

std::vector<Violation> validate_config(const PlantConfig& cfg);

/// Checks the schedule against every plant constraint, slot by slot, with
/// tolerance 1e-6.  Throws std::invalid_argument on dimension mismatch.
std::vector<Violation> validate_schedule(const PlantConfig& cfg,
                                         const Schedule& s);

std::string describe(const std::vector<Violation>& violations);

}  // namespace flexplan
