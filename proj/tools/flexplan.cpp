// flexplan: batch planning and flexibility analysis for an electro-intensive
// plant.  Subcommands: baseline, flex, sweep, validate.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "flexplan/io.hpp"

namespace fs = std::filesystem;
using namespace flexplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitModel = 2;
constexpr int kExitIo = 3;

[[noreturn]] void fail(int code, const std::string& kind,
                       const std::string& message) {
    nlohmann::json j{{"error", kind}, {"message", message}};
    std::cerr << j.dump() << std::endl;
    std::exit(code);
}

struct CommonArgs {
    std::string config_path;
    std::string prices_path;
    std::string out_dir = ".";
    double gap_tol = 1e-6;
    std::string backend = "internal";
};

void add_common(CLI::App* cmd, CommonArgs& a, bool need_prices) {
    cmd->add_option("--config", a.config_path, "plant config JSON")
        ->required();
    auto* p = cmd->add_option("--prices", a.prices_path, "price CSV");
    if (need_prices) p->required();
    cmd->add_option("--out", a.out_dir, "output directory");
    cmd->add_option("--gap-tol", a.gap_tol, "MIP relative gap tolerance");
    cmd->add_option("--backend", a.backend, "solver backend name");
}

SolveOptions solve_options(const CommonArgs& a) {
    SolveOptions so;
    so.gap_tol = a.gap_tol;
    so.backend_name = a.backend;
    return so;
}

std::vector<double> dayahead_for(const PlantConfig& cfg, const PriceSet& ps) {
    if (ps.n_slots() < cfg.horizon.n_slots)
        fail(kExitModel, "model",
             "price file has " + std::to_string(ps.n_slots()) +
                 " slots but the horizon needs " +
                 std::to_string(cfg.horizon.n_slots));
    return {ps.dayahead.begin(), ps.dayahead.begin() + cfg.horizon.n_slots};
}

int cmd_baseline(const CommonArgs& a) {
    PlantConfig cfg = load_plant_config(a.config_path);
    PriceSet prices = load_prices(a.prices_path);
    auto dayahead = dayahead_for(cfg, prices);

    Schedule s = solve_baseline(cfg, dayahead, {}, solve_options(a));

    fs::create_directories(a.out_dir);
    write_schedule_json(cfg, s, (fs::path(a.out_dir) / "schedule.json").string());
    write_schedule_csv(cfg, s, (fs::path(a.out_dir) / "schedule.csv").string());

    double bought = 0;
    for (size_t t = 0; t < s.buy_mw.size(); ++t)
        bought += s.buy_mw[t] * cfg.horizon.slot_hours;
    std::cout << "baseline cost: " << fmt_eur(s.cost_eur) << " EUR over "
              << cfg.horizon.n_slots << " slots (" << fmt_mw(bought)
              << " MWh purchased)\n";
    return kExitOk;
}

int cmd_flex(const CommonArgs& a, const std::string& direction, double h_mw,
             double eps_min, double eps_max, bool equal_run_hours) {
    if (h_mw <= 0)
        fail(kExitUsage, "usage", "--h-mw must be a positive magnitude");
    Direction dir;
    if (direction == "sell")
        dir = Direction::Sell;
    else if (direction == "buy")
        dir = Direction::Buy;
    else
        fail(kExitUsage, "usage", "--direction must be 'sell' or 'buy'");

    PlantConfig cfg = load_plant_config(a.config_path);
    PriceSet prices = load_prices(a.prices_path);
    auto dayahead = dayahead_for(cfg, prices);

    SweepOptions opts;
    opts.eps_min = eps_min;
    opts.eps_max = eps_max;
    opts.equal_run_hours = equal_run_hours;
    opts.solve = solve_options(a);

    Schedule base = solve_baseline(cfg, dayahead, opts.model, opts.solve);
    auto entries = sweep_day(cfg, prices, base, dir, h_mw, opts);

    std::vector<FlexTransaction> txs;
    for (const auto& e : entries) txs.push_back(e.tx);

    fs::create_directories(a.out_dir);
    write_transactions_csv(txs,
                           (fs::path(a.out_dir) / "transactions.csv").string());
    write_transactions_json(txs,
                            (fs::path(a.out_dir) / "transactions.json").string());

    auto accepted = greedy_select(cfg, prices, base, dir, h_mw, opts);
    write_transactions_csv(accepted,
                           (fs::path(a.out_dir) / "accepted.csv").string());

    int feasible = 0;
    for (const auto& tx : txs)
        if (tx.status != TxStatus::Infeasible) ++feasible;
    double revenue = 0;
    for (const auto& tx : accepted) revenue += tx.profit_eur.value_or(0.0);
    std::cout << "baseline cost: " << fmt_eur(base.cost_eur) << " EUR\n"
              << feasible << "/" << txs.size() << " slots feasible, "
              << accepted.size() << " accepted, day revenue "
              << fmt_eur(revenue) << " EUR\n";
    return kExitOk;
}

int cmd_sweep(const std::string& manifest_path) {
    StudyManifest m = load_study_manifest(manifest_path);
    StudySpec spec;
    spec.base_cfg = load_plant_config(m.config_path);
    PriceSet prices = load_prices(m.prices_path);
    if (!m.pv_profile_path.empty())
        spec.pv_profile_per_mw = load_profile_csv(m.pv_profile_path);
    spec.grid = m.grid;
    spec.capital = m.capital;
    spec.direction = m.direction;
    spec.h_magnitude_mw = m.h_magnitude_mw;
    spec.sweep.eps_min = m.eps_min;
    spec.sweep.eps_max = m.eps_max;
    spec.sweep.equal_run_hours = m.equal_run_hours;
    spec.sweep.solve.gap_tol = m.gap_tol;
    spec.sweep.solve.backend_name = m.backend_name;
    spec.rolling.solve = spec.sweep.solve;
    spec.rolling.reset_soc_per_window = m.reset_soc_per_window;

    auto results = run_study(spec, prices);
    write_study_outputs(results, m.out_dir);
    std::cout << results.size() << " configurations written to " << m.out_dir
              << "\n";
    return kExitOk;
}

int cmd_validate(const CommonArgs& a, const std::string& schedule_path) {
    PlantConfig cfg = load_plant_config(a.config_path);
    std::vector<Violation> viols = validate_config(cfg);
    if (!schedule_path.empty()) {
        Schedule s = schedule_path.size() > 4 &&
                             schedule_path.substr(schedule_path.size() - 4) ==
                                 ".csv"
                         ? read_schedule_csv(cfg, schedule_path)
                         : read_schedule_json(schedule_path);
        auto sv = validate_schedule(cfg, s);
        viols.insert(viols.end(), sv.begin(), sv.end());
    }
    bool errors = false;
    for (const auto& v : viols)
        if (v.severity == Severity::Error) errors = true;
    if (viols.empty())
        std::cout << "ok\n";
    else
        std::cout << describe(viols) << "\n";
    return errors ? kExitModel : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"demand-flexibility planning toolkit"};
    app.require_subcommand(1);

    CommonArgs base_args, flex_args, val_args;
    std::string direction = "sell", manifest_path, schedule_path;
    double h_mw = 0, eps_min = 0.05, eps_max = 0.05;
    bool equal_run_hours = false;

    auto* b = app.add_subcommand("baseline", "solve the baseline schedule");
    add_common(b, base_args, true);

    auto* f = app.add_subcommand("flex", "sweep day-1 flexibility trades");
    add_common(f, flex_args, true);
    f->add_option("--direction", direction, "sell or buy");
    f->add_option("--h-mw", h_mw, "perturbation magnitude, MW")->required();
    f->add_option("--eps-min", eps_min, "lower procurement band");
    f->add_option("--eps-max", eps_max, "upper procurement band");
    f->add_flag("--equal-run-hours", equal_run_hours,
                "keep per-machine run hours equal to the baseline");

    auto* s = app.add_subcommand("sweep", "run the configuration study");
    s->add_option("--manifest", manifest_path, "study manifest JSON")
        ->required();

    auto* v = app.add_subcommand("validate", "check a config and/or schedule");
    add_common(v, val_args, false);
    v->add_option("--schedule", schedule_path, "schedule JSON or CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::ostringstream os;
        os << e.what();
        nlohmann::json j{{"error", "usage"}, {"message", os.str()}};
        std::cerr << j.dump() << std::endl;
        return kExitUsage;
    }

    try {
        if (b->parsed()) return cmd_baseline(base_args);
        if (f->parsed())
            return cmd_flex(flex_args, direction, h_mw, eps_min, eps_max,
                            equal_run_hours);
        if (s->parsed()) return cmd_sweep(manifest_path);
        if (v->parsed()) return cmd_validate(val_args, schedule_path);
    } catch (const InfeasibleModelError& e) {
        fail(kExitModel, "infeasible", e.what());
    } catch (const RollingError& e) {
        fail(kExitModel, "infeasible", e.what());
    } catch (const IoError& e) {
        fail(kExitIo, "io", e.what());
    } catch (const PriceError& e) {
        fail(kExitIo, "io", e.what());
    } catch (const std::invalid_argument& e) {
        fail(kExitUsage, "usage", e.what());
    } catch (const std::exception& e) {
        fail(kExitModel, "internal", e.what());
    }
    return kExitUsage;
}
