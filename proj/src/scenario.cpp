#include "flexplan/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace flexplan {

namespace {

std::string cap_label(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::vector<double> slice_series(const std::vector<double>& s, int begin,
                                 int count) {
    if (s.size() <= 1) return s;  // scalar broadcast or empty
    return {s.begin() + begin, s.begin() + begin + count};
}

}  // namespace

std::vector<ConfigurationGrid::Config> ConfigurationGrid::configurations()
    const {
    std::vector<Config> out;
    out.push_back({"M00", 0.0, 0.0});
    std::vector<double> pv = pv_capacities_mw;
    std::vector<double> bat = battery_capacities_mwh;
    std::sort(pv.begin(), pv.end());
    std::sort(bat.begin(), bat.end());
    for (double y : bat)
        if (y > 0) out.push_back({"M0" + cap_label(y), 0.0, y});
    for (double x : pv)
        if (x > 0) out.push_back({"M" + cap_label(x) + "0", x, 0.0});
    std::set<double> bset(bat.begin(), bat.end());
    for (double x : pv)
        if (x > 0 && bset.count(x))
            out.push_back({"M" + cap_label(x) + cap_label(x), x, x});
    return out;
}

RollingPlan rolling_plan(const PlantConfig& week_cfg,
                         const std::vector<double>& week_dayahead,
                         const RollingOptions& opts) {
    const int n = week_cfg.horizon.n_slots;
    const double dt = week_cfg.horizon.slot_hours;
    const int spd = flex_window_slots(week_cfg.horizon);
    if (n % spd != 0)
        throw RollingError("week horizon is not a whole number of days");
    const int days = n / spd;
    if (static_cast<int>(week_dayahead.size()) != n)
        throw RollingError("week prices length must equal the horizon");

    const int nk = static_cast<int>(week_cfg.machines.size());
    const int nsilo = static_cast<int>(week_cfg.silos.size());

    int hist_keep = 0;
    for (const auto& mk : week_cfg.machines)
        hist_keep = std::max({hist_keep, mk.min_on_slots, mk.min_off_slots});

    std::vector<double> silo_carry(nsilo);
    for (int i = 0; i < nsilo; ++i) silo_carry[i] = week_cfg.silos[i].initial_t;
    double soc_carry = week_cfg.battery.soc0_mwh;
    std::vector<MachineHistory> hist(nk);
    if (!week_cfg.machine_history.empty()) hist = week_cfg.machine_history;

    RollingPlan plan;
    plan.committed.buy_mw.reserve(n);
    plan.committed.machine_on.assign(nk, {});
    plan.committed.silo_level_t.assign(nsilo, {});

    for (int d = 0; d < days; ++d) {
        int begin = d * spd;
        int len = n - begin;

        PlantConfig w = week_cfg;
        w.horizon.n_slots = len;
        w.pv_power_mw = slice_series(week_cfg.pv_power_mw, begin, len);
        w.demand_tph = slice_series(week_cfg.demand_tph, begin, len);
        for (int k = 0; k < nk; ++k)
            w.machines[k].production_tph =
                slice_series(week_cfg.machines[k].production_tph, begin, len);
        for (int i = 0; i < nsilo; ++i) w.silos[i].initial_t = silo_carry[i];
        if (week_cfg.battery.capacity_mwh > 0 && !opts.reset_soc_per_window)
            w.battery.soc0_mwh = soc_carry;
        w.machine_history = hist;

        std::vector<double> prices(week_dayahead.begin() + begin,
                                   week_dayahead.end());

        Schedule sched;
        try {
            sched = solve_baseline(w, prices, opts.model, opts.solve);
        } catch (const InfeasibleModelError& e) {
            std::ostringstream os;
            os << "rolling plan infeasible on day " << (d + 1) << ": "
               << e.what() << " (carried silo level";
            for (double v : silo_carry) os << ' ' << v;
            os << ", carried SoC " << soc_carry << ")";
            throw RollingError(os.str());
        }

        // commit the first day and carry state
        for (int t = 0; t < spd; ++t) {
            plan.committed.buy_mw.push_back(sched.buy_mw[t]);
            plan.committed.sell_mw.push_back(sched.sell_mw[t]);
            plan.committed.charge_mw.push_back(sched.charge_mw[t]);
            plan.committed.discharge_mw.push_back(sched.discharge_mw[t]);
            for (int k = 0; k < nk; ++k)
                plan.committed.machine_on[k].push_back(sched.machine_on[k][t]);
            for (int i = 0; i < nsilo; ++i)
                plan.committed.silo_level_t[i].push_back(sched.silo_level_t[i][t]);
            soc_carry += (sched.charge_mw[t] - sched.discharge_mw[t]) * dt;
        }
        for (int i = 0; i < nsilo; ++i)
            silo_carry[i] = sched.silo_level_t[i][spd - 1];
        for (int k = 0; k < nk; ++k) {
            auto& tail = hist[k].tail;
            for (int t = 0; t < spd; ++t) tail.push_back(sched.machine_on[k][t]);
            if (static_cast<int>(tail.size()) > hist_keep)
                tail.erase(tail.begin(),
                           tail.end() - (hist_keep > 0 ? hist_keep : 0));
        }

        plan.days.push_back({std::move(w), std::move(sched)});
    }

    plan.committed.cost_eur =
        schedule_cost(week_cfg, plan.committed, week_dayahead, opts.model);
    return plan;
}

std::vector<ScenarioResult> run_study(const StudySpec& spec,
                                      const PriceSet& month_prices) {
    const PlantConfig& base = spec.base_cfg;
    const int spd = flex_window_slots(base.horizon);
    const int week_slots = 7 * spd;
    const int total = month_prices.n_slots();
    if (total % week_slots != 0 || total == 0)
        throw std::invalid_argument(
            "study prices must cover whole Monday-to-Sunday weeks");
    const int weeks = total / week_slots;

    if (!spec.pv_profile_per_mw.empty() &&
        spec.pv_profile_per_mw.size() != 1 &&
        static_cast<int>(spec.pv_profile_per_mw.size()) != total)
        throw std::invalid_argument(
            "pv profile length must match the study prices");

    auto configs = spec.grid.configurations();
    std::vector<ScenarioResult> results;
    double m00_cost = 0;
    bool have_m00 = false;

    for (const auto& c : configs) {
        PlantConfig cfg = base;
        cfg.horizon.n_slots = week_slots;
        if (c.pv_mw > 0) {
            cfg.pv_power_mw.resize(spec.pv_profile_per_mw.size());
            for (size_t t = 0; t < spec.pv_profile_per_mw.size(); ++t)
                cfg.pv_power_mw[t] = spec.pv_profile_per_mw[t] * c.pv_mw;
        }
        if (c.battery_mwh > 0) {
            cfg.battery.capacity_mwh = c.battery_mwh;
            cfg.battery.dod = spec.battery_dod;
            cfg.battery.wear_cost = spec.battery_wear_cost;
            cfg.battery.soc0_mwh = cfg.battery.soc_min();
            cfg.battery.p_charge_max_mw = spec.battery_c_rate * c.battery_mwh;
            cfg.battery.p_discharge_max_mw = spec.battery_c_rate * c.battery_mwh;
        } else {
            cfg.battery = Battery{};
        }

        ScenarioResult res;
        res.config_id = c.id;
        res.pv_mw = c.pv_mw;
        res.battery_mwh = c.battery_mwh;

        long days_total = 0;
        for (int w = 0; w < weeks; ++w) {
            PlantConfig week_cfg = cfg;
            int begin = w * week_slots;
            week_cfg.pv_power_mw = slice_series(cfg.pv_power_mw, begin, week_slots);
            week_cfg.demand_tph = slice_series(cfg.demand_tph, begin, week_slots);
            PriceSet week_prices = month_prices.slice(begin, week_slots);

            RollingPlan plan =
                rolling_plan(week_cfg, week_prices.dayahead, spec.rolling);
            res.committed_cost_eur += plan.committed.cost_eur;

            for (int d = 0; d < static_cast<int>(plan.days.size()); ++d) {
                ++days_total;
                const RollingDay& day = plan.days[d];
                PriceSet window_prices =
                    week_prices.slice(d * spd, week_cfg.horizon.n_slots - d * spd);

                auto initial = sweep_day(day.window_cfg, window_prices,
                                         day.window_schedule, spec.direction,
                                         spec.h_magnitude_mw, spec.sweep);
                for (const auto& e : initial)
                    if (e.tx.status != TxStatus::Infeasible) ++res.n_feasible_hours;

                bool first_call = true;
                SweepFn fn = [&](const Schedule& b, int lo, int hi) {
                    if (first_call && lo == 1) {
                        first_call = false;
                        return initial;
                    }
                    return sweep_day(day.window_cfg, window_prices, b,
                                     spec.direction, spec.h_magnitude_mw,
                                     spec.sweep, lo, hi);
                };
                auto accepted =
                    greedy_select_with(fn, day.window_schedule, 1, spd);
                for (const auto& tx : accepted) {
                    res.flex_revenue_eur += tx.profit_eur.value_or(0.0);
                    res.accepted.push_back(tx);
                }
                res.n_accepted += static_cast<long>(accepted.size());
            }
        }
        res.flexible_hours_avg =
            days_total > 0 ? static_cast<double>(res.n_feasible_hours) /
                                 static_cast<double>(days_total)
                           : 0.0;

        if (c.id == "M00") {
            have_m00 = true;
            m00_cost = res.committed_cost_eur;
        }
        res.production_savings_eur =
            have_m00 ? m00_cost - res.committed_cost_eur : 0.0;

        double capital = spec.capital.pv_eur_per_mw * c.pv_mw +
                         spec.capital.battery_eur_per_mwh * c.battery_mwh;
        double monthly = res.flex_revenue_eur + res.production_savings_eur;
        if (capital <= 0) {
            res.payback_years = 0;
            res.amortizable = true;
        } else if (monthly > 0) {
            res.payback_years = capital / (12.0 * monthly);
            res.amortizable = true;
        } else {
            res.payback_years = std::numeric_limits<double>::infinity();
            res.amortizable = false;
        }

        results.push_back(std::move(res));
    }
    return results;
}

}  // namespace flexplan
