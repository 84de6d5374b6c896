#include "flexplan/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace flexplan {

namespace {

// Accumulates coefficients for one machine-run row, splitting committed
// history slots (negative indices) off into the right-hand side.
struct RowBuilder {
    std::map<int, double> coef;
    double rhs = 0.0;
    const std::vector<int>* hist;
    int hlen;

    void addY(int t, double c) {
        if (t >= 0) {
            coef[t] += c;
        } else {
            rhs -= c * (*hist)[static_cast<size_t>(hlen + t)];
        }
    }
};

}  // namespace

std::pair<MixedIntegerProgram, VariableLayout> build_baseline_program(
    const PlantConfig& cfg, const std::vector<double>& dayahead,
    const BaselineOptions& opts) {
    const int n = cfg.horizon.n_slots;
    const double dt = cfg.horizon.slot_hours;
    const int nk = static_cast<int>(cfg.machines.size());
    const int ns = static_cast<int>(cfg.silos.size());

    if (static_cast<int>(dayahead.size()) != n)
        throw std::invalid_argument("dayahead prices length must equal n_slots");
    if (opts.sell_revenue && static_cast<int>(opts.sell_prices.size()) != n)
        throw std::invalid_argument("sell prices length must equal n_slots");
    {
        auto viol = validate_config(cfg);
        for (const auto& v : viol)
            if (v.severity == Severity::Error)
                throw std::invalid_argument("invalid plant config: " + v.what +
                                            ": " + v.detail);
    }

    VariableLayout layout{n, nk, ns, cfg.battery.capacity_mwh > 0};
    MixedIntegerProgram mip;
    LinearProgram& lp = mip.lp;

    const Battery& bat = cfg.battery;
    const bool has_battery = bat.capacity_mwh > 0;

    for (int t = 0; t < n; ++t) lp.add_variable(0.0, cfg.grid.p_buy_max_mw);
    for (int t = 0; t < n; ++t) lp.add_variable(0.0, kInfinity);  // sell
    for (int t = 0; t < n; ++t)
        lp.add_variable(0.0, has_battery ? bat.p_charge_max_mw : 0.0);
    for (int t = 0; t < n; ++t)
        lp.add_variable(0.0, has_battery ? bat.p_discharge_max_mw : 0.0);
    for (int k = 0; k < nk; ++k)
        for (int t = 0; t < n; ++t) {
            int col = lp.add_variable(0.0, 1.0);
            mip.binary_vars.push_back(col);
        }
    for (int i = 0; i < ns; ++i)
        for (int t = 0; t < n; ++t)
            lp.add_variable(cfg.silos[i].capacity_min_t,
                            cfg.silos[i].capacity_max_t);
    if (has_battery)
        for (int t = 0; t < n; ++t)
            lp.add_variable(bat.soc_min(), bat.soc_max());

    // objective
    for (int t = 0; t < n; ++t) {
        lp.set_objective(layout.buy(t), dayahead[t] * dt);
        if (has_battery) {
            lp.set_objective(layout.charge(t), bat.wear_cost * dt);
            lp.set_objective(layout.discharge(t), bat.wear_cost * dt);
        }
        if (opts.sell_revenue)
            lp.set_objective(layout.sell(t), -opts.sell_prices[t] * dt);
    }
    for (int i = 0; i < ns; ++i)
        for (int t = 0; t < n; ++t)
            lp.set_objective(layout.silo(i, t), cfg.silos[i].storage_cost * dt);

    double initial_mass = 0;
    for (const auto& si : cfg.silos) initial_mass += si.initial_t;

    // mass balance, aggregated over silos
    for (int t = 0; t < n; ++t) {
        double rhs = -cfg.demand_at(t) * dt + (t == 0 ? initial_mass : 0.0);
        auto& row = lp.add_constraint(Relation::Equal, rhs);
        for (int i = 0; i < ns; ++i) {
            row.terms.push_back({layout.silo(i, t), 1.0});
            if (t > 0) row.terms.push_back({layout.silo(i, t - 1), -1.0});
        }
        for (int k = 0; k < nk; ++k) {
            double p = cfg.machines[k].production_at(t) * dt;
            if (p != 0.0) row.terms.push_back({layout.machine(k, t), -p});
        }
    }

    // power balance
    for (int t = 0; t < n; ++t) {
        auto& row = lp.add_constraint(Relation::Equal, -cfg.pv_at(t));
        row.terms.push_back({layout.buy(t), 1.0});
        row.terms.push_back({layout.discharge(t), 1.0});
        row.terms.push_back({layout.sell(t), -1.0});
        row.terms.push_back({layout.charge(t), -1.0});
        for (int k = 0; k < nk; ++k)
            row.terms.push_back({layout.machine(k, t), -cfg.machines[k].power_mw});
    }

    // demand cover: stored mass must exceed the slot's demand.  With a single
    // silo this folds into the level column's lower bound instead of a row.
    if (ns == 1) {
        for (int t = 0; t < n; ++t) {
            double need = cfg.demand_at(t) * dt;
            if (need > cfg.silos[0].capacity_max_t + 1e-9)
                throw InfeasibleModelError(
                    "slot demand exceeds the silo capacity");
            int col = layout.silo(0, t);
            lp.lower[static_cast<size_t>(col)] =
                std::max(lp.lower[static_cast<size_t>(col)], need);
        }
    } else {
        for (int t = 0; t < n; ++t) {
            auto& row =
                lp.add_constraint(Relation::GreaterEqual, cfg.demand_at(t) * dt);
            for (int i = 0; i < ns; ++i)
                row.terms.push_back({layout.silo(i, t), 1.0});
        }
    }

    // minimum on/off runs; ranges may extend back into committed history
    for (int k = 0; k < nk; ++k) {
        const auto& mk = cfg.machines[k];
        static const std::vector<int> no_hist;
        const std::vector<int>& hist = cfg.machine_history.empty()
                                           ? no_hist
                                           : cfg.machine_history[k].tail;
        int hlen = static_cast<int>(hist.size());

        int mon = mk.min_on_slots;
        if (mon >= 1) {
            for (int u = -std::min(hlen, mon); u <= n - mon - 1; ++u) {
                RowBuilder rb{{}, 0.0, &hist, hlen};
                rb.addY(u, -static_cast<double>(mon));
                rb.addY(u + 1, static_cast<double>(mon));
                for (int j = 1; j <= mon; ++j) rb.addY(u + j, -1.0);
                auto& row = lp.add_constraint(Relation::LessEqual, rb.rhs);
                for (const auto& [t, c] : rb.coef)
                    if (c != 0.0) row.terms.push_back({layout.machine(k, t), c});
            }
        }
        int moff = mk.min_off_slots;
        if (moff >= 1) {
            for (int u = -std::min(hlen, moff); u <= n - moff - 1; ++u) {
                RowBuilder rb{{}, 0.0, &hist, hlen};
                rb.rhs = static_cast<double>(moff);
                rb.addY(u, static_cast<double>(moff));
                rb.addY(u + 1, -static_cast<double>(moff));
                for (int j = 1; j <= moff; ++j) rb.addY(u + j, 1.0);
                auto& row = lp.add_constraint(Relation::LessEqual, rb.rhs);
                for (const auto& [t, c] : rb.coef)
                    if (c != 0.0) row.terms.push_back({layout.machine(k, t), c});
            }
        }
    }

    // PV envelope cut: with the machine on, at least P_k - PV_t has to come
    // from the grid or the battery.  The plain power balance lets a
    // fractional Y ride the PV output for free; this is the convex envelope
    // of that relationship over Y in {0,1} and removes the artifact.
    for (int t = 0; t < n; ++t) {
        double pv = cfg.pv_at(t);
        if (pv <= 1e-12) continue;
        for (int k = 0; k < nk; ++k) {
            double short_mw = cfg.machines[k].power_mw - pv;
            if (short_mw <= 1e-12) continue;
            auto& row = lp.add_constraint(Relation::GreaterEqual, 0.0);
            row.terms.push_back({layout.buy(t), 1.0});
            row.terms.push_back({layout.discharge(t), 1.0});
            row.terms.push_back({layout.machine(k, t), -short_mw});
        }
    }

    // round-up cut: the machines must jointly run often enough to cover the
    // week's demand plus the lowest admissible final inventory.  Dividing by
    // the best per-slot output and rounding up stays valid for any mix of
    // rates and tightens the relaxation dramatically under flat prices.
    {
        double best_slot = 0;
        for (int k = 0; k < nk; ++k)
            for (int t = 0; t < n; ++t)
                best_slot = std::max(best_slot,
                                     cfg.machines[k].production_at(t) * dt);
        double min_mass = 0;
        for (const auto& si : cfg.silos) min_mass += si.capacity_min_t;
        double final_floor =
            std::max(min_mass, n > 0 ? cfg.demand_at(n - 1) * dt : 0.0);
        double needed = final_floor - initial_mass;
        for (int t = 0; t < n; ++t) needed += cfg.demand_at(t) * dt;
        if (best_slot > 0 && needed > 0) {
            double slots = std::ceil(needed / best_slot - 1e-9);
            auto& row = lp.add_constraint(Relation::GreaterEqual, slots);
            for (int k = 0; k < nk; ++k)
                for (int t = 0; t < n; ++t)
                    row.terms.push_back({layout.machine(k, t), 1.0});
        }
    }

    // battery state of charge as a recurrence; the SoC columns carry the
    // usable window as plain variable bounds
    if (has_battery) {
        double eta = opts.battery_efficiency;
        for (int t = 0; t < n; ++t) {
            auto& row = lp.add_constraint(Relation::Equal,
                                          t == 0 ? bat.soc0_mwh : 0.0);
            row.terms.push_back({layout.soc(t), 1.0});
            if (t > 0) row.terms.push_back({layout.soc(t - 1), -1.0});
            row.terms.push_back({layout.charge(t), -eta * dt});
            row.terms.push_back({layout.discharge(t), dt});
        }

        // a slot can only discharge energy already in store and only charge
        // into the remaining headroom.  Feasible as stated only when charge
        // and discharge do not overlap within a slot, but any plan that does
        // overlap can shed the common part without raising its cost, so the
        // optimum is untouched while the relaxation loses the free
        // charge/discharge cycle it would otherwise use to dodge the PV
        // envelope cut.
        for (int t = 0; t < n; ++t) {
            double prev0 = t == 0 ? bat.soc0_mwh : 0.0;
            auto& drow =
                lp.add_constraint(Relation::LessEqual, prev0 - bat.soc_min());
            drow.terms.push_back({layout.discharge(t), dt});
            if (t > 0) drow.terms.push_back({layout.soc(t - 1), -1.0});
            auto& crow =
                lp.add_constraint(Relation::LessEqual, bat.soc_max() - prev0);
            crow.terms.push_back({layout.charge(t), eta * dt});
            if (t > 0) crow.terms.push_back({layout.soc(t - 1), 1.0});
        }
    }

    return {std::move(mip), layout};
}

Schedule decode_schedule(const PlantConfig& cfg, const VariableLayout& layout,
                         const std::vector<double>& x,
                         const std::vector<double>& dayahead,
                         const BaselineOptions& opts) {
    const int n = layout.n_slots;
    Schedule s;
    auto clamp0 = [](double v) { return v < 0 && v > -1e-6 ? 0.0 : v; };
    s.buy_mw.resize(n);
    s.sell_mw.resize(n);
    s.charge_mw.resize(n);
    s.discharge_mw.resize(n);
    for (int t = 0; t < n; ++t) {
        s.buy_mw[t] = clamp0(x[layout.buy(t)]);
        s.sell_mw[t] = clamp0(x[layout.sell(t)]);
        s.charge_mw[t] = clamp0(x[layout.charge(t)]);
        s.discharge_mw[t] = clamp0(x[layout.discharge(t)]);
    }
    s.machine_on.assign(layout.n_machines, std::vector<int>(n, 0));
    for (int k = 0; k < layout.n_machines; ++k)
        for (int t = 0; t < n; ++t)
            s.machine_on[k][t] =
                x[layout.machine(k, t)] >= 0.5 ? 1 : 0;
    s.silo_level_t.assign(layout.n_silos, std::vector<double>(n, 0.0));
    for (int i = 0; i < layout.n_silos; ++i)
        for (int t = 0; t < n; ++t)
            s.silo_level_t[i][t] = x[layout.silo(i, t)];
    s.cost_eur = schedule_cost(cfg, s, dayahead, opts);
    return s;
}

double schedule_cost(const PlantConfig& cfg, const Schedule& s,
                     const std::vector<double>& dayahead,
                     const BaselineOptions& opts) {
    const int n = cfg.horizon.n_slots;
    const double dt = cfg.horizon.slot_hours;
    double cost = 0;
    for (int t = 0; t < n; ++t) {
        cost += s.buy_mw[t] * dayahead[t] * dt;
        cost += (s.charge_mw[t] + s.discharge_mw[t]) * cfg.battery.wear_cost * dt;
        for (size_t i = 0; i < cfg.silos.size(); ++i)
            cost += s.silo_level_t[i][t] * cfg.silos[i].storage_cost * dt;
        if (opts.sell_revenue) cost -= s.sell_mw[t] * opts.sell_prices[t] * dt;
    }
    return cost;
}

namespace {

std::string infeasibility_diagnosis(const PlantConfig& cfg) {
    const int n = cfg.horizon.n_slots;
    const double dt = cfg.horizon.slot_hours;
    double cap = 0, dem = 0;
    for (int t = 0; t < n; ++t) {
        for (const auto& mk : cfg.machines) cap += mk.production_at(t);
        dem += cfg.demand_at(t);
    }
    if (cap < dem) return "demand exceeds production capacity";
    double store = 0, store_max = 0;
    for (const auto& si : cfg.silos) {
        store += si.initial_t - si.capacity_min_t;
        store_max += si.capacity_max_t;
    }
    // can the first slots be covered at all while every machine is held off?
    double drain = 0;
    for (int t = 0; t < n && drain <= store; ++t) drain += cfg.demand_at(t) * dt;
    if (store <= 0 && dem > 0) return "silos start at their minimum level";
    (void)store_max;
    return "constraint system is infeasible for the given plant data";
}

}  // namespace

Schedule solve_baseline(const PlantConfig& cfg,
                        const std::vector<double>& dayahead,
                        const BaselineOptions& opts,
                        const SolveOptions& solve_opts) {
    auto [mip, layout] = build_baseline_program(cfg, dayahead, opts);
    MipOptions mo;
    mo.gap_tol = solve_opts.gap_tol;
    mo.node_limit = solve_opts.node_limit;
    mo.basis_io = solve_opts.basis_io;
    MipSolution sol = backend(solve_opts.backend_name).solve(mip, mo);
    if (sol.status != MipStatus::Optimal)
        throw InfeasibleModelError(infeasibility_diagnosis(cfg));
    return decode_schedule(cfg, layout, sol.x, dayahead, opts);
}

}  // namespace flexplan
