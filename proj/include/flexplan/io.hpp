#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flexplan/core.hpp"
#include "flexplan/flex.hpp"
#include "flexplan/market.hpp"
#include "flexplan/scenario.hpp"

namespace flexplan {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Fixed-width numeric formatting used by every CSV writer:
/// EUR at 2 decimals, MW/MWh at 3, everything else full precision.
std::string fmt_eur(double v);
std::string fmt_mw(double v);
std::string fmt_full(double v);

PlantConfig load_plant_config(const std::string& path);
void save_plant_config(const PlantConfig& cfg, const std::string& path);

void write_schedule_json(const PlantConfig& cfg, const Schedule& s,
                         const std::string& path);
Schedule read_schedule_json(const std::string& path);
void write_schedule_csv(const PlantConfig& cfg, const Schedule& s,
                        const std::string& path);
Schedule read_schedule_csv(const PlantConfig& cfg, const std::string& path);

/// One row per candidate slot, Table-style columns:
/// tau,dayahead,tertiary,spread,h_mw,gross,flex_cost,profit,status.
void write_transactions_csv(const std::vector<FlexTransaction>& txs,
                            const std::string& path);
void write_transactions_json(const std::vector<FlexTransaction>& txs,
                             const std::string& path);
std::vector<FlexTransaction> read_transactions_csv(const std::string& path);

/// Everything cmd_sweep needs, loadable from one JSON file.
struct StudyManifest {
    std::string config_path;
    std::string prices_path;
    std::string pv_profile_path;  // optional CSV: one value per line or slot,value
    ConfigurationGrid grid;
    CapitalCosts capital;
    Direction direction = Direction::Sell;
    double h_magnitude_mw = 0;
    double eps_min = 0.05;
    double eps_max = 0.05;
    bool equal_run_hours = false;
    double gap_tol = 1e-6;
    std::string backend_name = "internal";
    bool reset_soc_per_window = false;
    std::string out_dir = ".";
};

StudyManifest load_study_manifest(const std::string& path);

std::vector<double> load_profile_csv(const std::string& path);

/// scenario_results.csv plus per-figure data files (revenue/savings,
/// flexible hours, transaction counts, payback) under `dir`.
void write_study_outputs(const std::vector<ScenarioResult>& results,
                         const std::string& dir);

}  // namespace flexplan
