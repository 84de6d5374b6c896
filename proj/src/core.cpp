#include "flexplan/core.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace flexplan {

namespace {

constexpr double kTol = 1e-6;

void add(std::vector<Violation>& out, Severity sev, std::string what, int slot,
         std::string detail) {
    out.push_back({sev, std::move(what), slot, std::move(detail)});
}

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

std::vector<Violation> validate_config(const PlantConfig& cfg) {
    std::vector<Violation> v;
    const int n = cfg.horizon.n_slots;

    if (n < 1) add(v, Severity::Error, "horizon.n_slots", -1, "must be >= 1");
    if (!(cfg.horizon.slot_hours > 0))
        add(v, Severity::Error, "horizon.slot_hours", -1, "must be > 0");

    auto series_ok = [n](const std::vector<double>& s) {
        return s.empty() || s.size() == 1 || static_cast<int>(s.size()) == n;
    };

    for (const auto& mk : cfg.machines) {
        std::string p = "machine " + mk.id + ": ";
        if (mk.power_mw < 0) add(v, Severity::Error, p + "power_mw", -1, "negative");
        if (mk.min_on_slots < 0 || mk.min_on_slots > n)
            add(v, Severity::Error, p + "min_on_slots", -1,
                "must lie in [0, n_slots]");
        if (mk.min_off_slots < 0 || mk.min_off_slots > n)
            add(v, Severity::Error, p + "min_off_slots", -1,
                "must lie in [0, n_slots]");
        if (!series_ok(mk.production_tph))
            add(v, Severity::Error, p + "production_tph", -1,
                "length must be 1 or n_slots");
        for (double x : mk.production_tph)
            if (x < 0) {
                add(v, Severity::Error, p + "production_tph", -1, "negative");
                break;
            }
    }

    for (const auto& si : cfg.silos) {
        std::string p = "silo " + si.id + ": ";
        if (si.capacity_min_t < 0)
            add(v, Severity::Error, p + "capacity_min_t", -1, "negative");
        if (si.capacity_min_t > si.capacity_max_t)
            add(v, Severity::Error, p + "capacity_min_t", -1,
                "exceeds capacity_max_t");
        if (si.initial_t < si.capacity_min_t)
            add(v, Severity::Error, p + "initial_t", -1, "initial below minimum");
        if (si.initial_t > si.capacity_max_t)
            add(v, Severity::Error, p + "initial_t", -1, "initial above maximum");
    }

    const Battery& b = cfg.battery;
    if (b.capacity_mwh < 0)
        add(v, Severity::Error, "battery.capacity_mwh", -1, "negative");
    if (b.dod < 0 || b.dod > 1)
        add(v, Severity::Error, "battery.dod", -1, "must lie in [0,1]");
    if (b.p_charge_max_mw < 0 || b.p_discharge_max_mw < 0)
        add(v, Severity::Error, "battery.power limits", -1, "negative");
    if (b.wear_cost < 0)
        add(v, Severity::Error, "battery.wear_cost", -1, "negative");
    if (b.capacity_mwh > 0) {
        if (b.soc0_mwh < b.soc_min() - kTol || b.soc0_mwh > b.soc_max() + kTol)
            add(v, Severity::Error, "battery.soc0_mwh", -1,
                "outside [C_max*(1-DoD), C_max*DoD] = [" + fmt(b.soc_min()) +
                    ", " + fmt(b.soc_max()) + "]");
    } else {
        if (b.soc0_mwh != 0)
            add(v, Severity::Error, "battery.soc0_mwh", -1,
                "must be 0 for a zero-capacity battery");
        if (b.p_charge_max_mw != 0 || b.p_discharge_max_mw != 0)
            add(v, Severity::Error, "battery.power limits", -1,
                "must be 0 for a zero-capacity battery");
    }

    if (cfg.grid.p_buy_max_mw < 0)
        add(v, Severity::Error, "grid.p_buy_max_mw", -1, "negative");

    if (!series_ok(cfg.pv_power_mw))
        add(v, Severity::Error, "pv_power_mw", -1, "length must be 1 or n_slots");
    if (!series_ok(cfg.demand_tph))
        add(v, Severity::Error, "demand_tph", -1, "length must be 1 or n_slots");
    for (double x : cfg.pv_power_mw)
        if (x < 0) {
            add(v, Severity::Error, "pv_power_mw", -1, "negative");
            break;
        }
    for (double x : cfg.demand_tph)
        if (x < 0) {
            add(v, Severity::Error, "demand_tph", -1, "negative");
            break;
        }

    if (!cfg.machine_history.empty() &&
        cfg.machine_history.size() != cfg.machines.size())
        add(v, Severity::Error, "machine_history", -1,
            "length must match machines");

    // feasibility precheck: the plant at full tilt must at least keep pace
    // with the average demand
    if (n >= 1 && cfg.horizon.slot_hours > 0) {
        double cap = 0, dem = 0;
        for (int t = 0; t < n; ++t) {
            for (const auto& mk : cfg.machines) cap += mk.production_at(t);
            dem += cfg.demand_at(t);
        }
        if (cap < dem - kTol)
            add(v, Severity::Warning, "production capacity", -1,
                "max total production rate below average demand (" +
                    fmt(cap / n) + " < " + fmt(dem / n) + " t/h)");
    }

    return v;
}

std::vector<Violation> validate_schedule(const PlantConfig& cfg,
                                         const Schedule& s) {
    const int n = cfg.horizon.n_slots;
    const int nk = static_cast<int>(cfg.machines.size());
    const int nsilo = static_cast<int>(cfg.silos.size());
    const double dt = cfg.horizon.slot_hours;

    auto len = [](const auto& a) { return static_cast<int>(a.size()); };
    if (len(s.buy_mw) != n || len(s.sell_mw) != n || len(s.charge_mw) != n ||
        len(s.discharge_mw) != n || len(s.machine_on) != nk ||
        len(s.silo_level_t) != nsilo)
        throw std::invalid_argument("schedule dimensions do not match config");
    for (const auto& row : s.machine_on)
        if (len(row) != n)
            throw std::invalid_argument("machine_on row length mismatch");
    for (const auto& row : s.silo_level_t)
        if (len(row) != n)
            throw std::invalid_argument("silo_level_t row length mismatch");

    std::vector<Violation> v;

    for (int t = 0; t < n; ++t) {
        if (s.buy_mw[t] < -kTol)
            add(v, Severity::Error, "buy_mw", t, "negative");
        if (s.sell_mw[t] < -kTol)
            add(v, Severity::Error, "sell_mw", t, "negative");
        if (s.charge_mw[t] < -kTol)
            add(v, Severity::Error, "charge_mw", t, "negative");
        if (s.discharge_mw[t] < -kTol)
            add(v, Severity::Error, "discharge_mw", t, "negative");
        if (s.buy_mw[t] > cfg.grid.p_buy_max_mw + kTol)
            add(v, Severity::Error, "purchase cap", t,
                fmt(s.buy_mw[t]) + " > " + fmt(cfg.grid.p_buy_max_mw));
        if (s.charge_mw[t] > cfg.battery.p_charge_max_mw + kTol)
            add(v, Severity::Error, "charge cap", t, "exceeds p_charge_max_mw");
        if (s.discharge_mw[t] > cfg.battery.p_discharge_max_mw + kTol)
            add(v, Severity::Error, "discharge cap", t,
                "exceeds p_discharge_max_mw");
    }

    for (int k = 0; k < nk; ++k)
        for (int t = 0; t < n; ++t) {
            int y = s.machine_on[k][t];
            if (y != 0 && y != 1)
                add(v, Severity::Error, "machine_on " + cfg.machines[k].id, t,
                    "not binary");
        }

    // mass balance, aggregated at plant level, and demand cover
    double prev = 0;
    for (const auto& si : cfg.silos) prev += si.initial_t;
    for (int t = 0; t < n; ++t) {
        double level = 0;
        for (int i = 0; i < nsilo; ++i) level += s.silo_level_t[i][t];
        double prod = 0;
        for (int k = 0; k < nk; ++k)
            if (s.machine_on[k][t]) prod += cfg.machines[k].production_at(t);
        double expect = prev + (prod - cfg.demand_at(t)) * dt;
        if (std::fabs(level - expect) > kTol)
            add(v, Severity::Error, "mass balance", t,
                "level " + fmt(level) + " vs expected " + fmt(expect));
        if (level < cfg.demand_at(t) * dt - kTol)
            add(v, Severity::Error, "demand cover", t,
                "stored mass below demand for the slot");
        prev = level;
    }

    // per-silo bounds
    for (int i = 0; i < nsilo; ++i) {
        const auto& si = cfg.silos[i];
        for (int t = 0; t < n; ++t) {
            double x = s.silo_level_t[i][t];
            if (x < si.capacity_min_t - kTol || x > si.capacity_max_t + kTol)
                add(v, Severity::Error, "silo bounds " + si.id, t,
                    fmt(x) + " outside [" + fmt(si.capacity_min_t) + ", " +
                        fmt(si.capacity_max_t) + "]");
        }
    }

    // power balance
    for (int t = 0; t < n; ++t) {
        double load = 0;
        for (int k = 0; k < nk; ++k)
            if (s.machine_on[k][t]) load += cfg.machines[k].power_mw;
        double res = s.buy_mw[t] + s.discharge_mw[t] + cfg.pv_at(t) -
                     s.sell_mw[t] - s.charge_mw[t] - load;
        if (std::fabs(res) > kTol)
            add(v, Severity::Error, "power balance", t, "residual " + fmt(res));
    }

    // minimum on/off times; rows may reach back into committed history
    for (int k = 0; k < nk; ++k) {
        const auto& mk = cfg.machines[k];
        const std::vector<int>* hist = nullptr;
        if (!cfg.machine_history.empty()) hist = &cfg.machine_history[k].tail;
        int hlen = hist ? static_cast<int>(hist->size()) : 0;
        auto y_at = [&](int t) -> int {
            if (t >= 0) return s.machine_on[k][t];
            return (*hist)[static_cast<size_t>(hlen + t)];
        };

        int mon = mk.min_on_slots;
        if (mon >= 1) {
            for (int u = -std::min(hlen, mon); u <= n - mon - 1; ++u) {
                int sum = 0;
                for (int j = 1; j <= mon; ++j)
                    if (u + j >= -hlen) sum += y_at(u + j);
                if ((y_at(u + 1) - y_at(u)) * mon > sum)
                    add(v, Severity::Error, "min-on " + mk.id, std::max(u, 0),
                        "run after switch-on shorter than " + fmt(mon));
            }
        }
        int moff = mk.min_off_slots;
        if (moff >= 1) {
            for (int u = -std::min(hlen, moff); u <= n - moff - 1; ++u) {
                int sum = 0;
                for (int j = 1; j <= moff; ++j)
                    if (u + j >= -hlen) sum += y_at(u + j);
                if (sum > (1 + y_at(u + 1) - y_at(u)) * moff)
                    add(v, Severity::Error, "min-off " + mk.id, std::max(u, 0),
                        "pause after switch-off shorter than " + fmt(moff));
            }
        }
    }

    // battery state of charge, as prefix sums of the energy flows
    if (cfg.battery.capacity_mwh > 0) {
        double lo = cfg.battery.soc_min() - cfg.battery.soc0_mwh;
        double hi = cfg.battery.soc_max() - cfg.battery.soc0_mwh;
        double acc = 0;
        for (int t = 0; t < n; ++t) {
            acc += (s.charge_mw[t] - s.discharge_mw[t]) * dt;
            if (acc > hi + kTol)
                add(v, Severity::Error, "SoC upper", t,
                    "cumulative charge " + fmt(acc) + " > " + fmt(hi));
            if (acc < lo - kTol)
                add(v, Severity::Error, "SoC lower", t,
                    "cumulative charge " + fmt(acc) + " < " + fmt(lo));
        }
    }

    return v;
}

std::string describe(const std::vector<Violation>& violations) {
    std::ostringstream os;
    for (const auto& v : violations) {
        os << (v.severity == Severity::Error ? "error" : "warning") << ": "
           << v.what;
        if (v.slot >= 0) os << " [slot " << v.slot << "]";
        if (!v.detail.empty()) os << ": " << v.detail;
        os << '\n';
    }
    return os.str();
}

}  // namespace flexplan
