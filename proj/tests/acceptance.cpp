// End-to-end acceptance suite.  Each criterion prints one pass/fail line;
// the exit code is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "flexplan/baseline.hpp"
#include "flexplan/flex.hpp"
#include "flexplan/io.hpp"
#include "flexplan/mip.hpp"
#include "flexplan/scenario.hpp"

using namespace flexplan;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;
long g_schedules_checked = 0;
long g_schedule_violations = 0;

double now_s() {
    using clock = std::chrono::steady_clock;
    static const clock::time_point start = clock::now();
    return std::chrono::duration<double>(clock::now() - start).count();
}

void report(int idx, const char* label, bool pass, const std::string& note) {
    std::printf("criterion %d (%s): %s%s%s\n", idx, label,
                pass ? "PASS" : "FAIL", note.empty() ? "" : " — ",
                note.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

// every schedule any criterion produces funnels through here (criterion 6)
void check_schedule(const PlantConfig& cfg, const Schedule& s) {
    ++g_schedules_checked;
    auto viol = validate_schedule(cfg, s);
    if (!viol.empty()) {
        ++g_schedule_violations;
        std::printf("  schedule violation: %s\n", describe(viol).c_str());
    }
}

// ---------------------------------------------------------------------------
// reference table fixtures (all prices EUR/MWh, money EUR)

struct TableRow {
    int tau;
    double dayahead;
    std::optional<double> tertiary;
    double flex_cost;
    std::optional<double> spread, gross, profit;
};

// selling day, h = -6 MW.  tau 11 saw no balancing trade.
const std::vector<TableRow> kSellRows = {
    {1, 68.97, 84.35, 45.00, 15.38, 92.25, 47.25},
    {7, 70.48, 92.80, 35.90, 22.32, 133.90, 98.00},
    {11, 55.89, std::nullopt, 123.50, {}, {}, {}},
    {19, 64.10, 97.28, 74.20, 33.18, 199.01, 124.87},
};

// buying day, h = +6 MW.  tau 4 saw no balancing trade.  The tau=8 row's
// quoted tertiary price disagrees with its own spread column; the fixture
// keeps the spread-consistent price (dayahead - spread).
const std::vector<TableRow> kBuyRows = {
    {4, 114.99, std::nullopt, 23.50, {}, {}, {}},
    {8, 117.89, 58.89, 59.50, 59.00, 354.02, 294.52},
    {20, 115.77, 45.56, 28.10, 70.21, 421.24, 393.14},
    {23, 117.63, 60.77, 39.30, 56.86, 341.16, 301.86},
};

bool row_matches(const FlexTransaction& tx, const TableRow& row,
                 std::string& why) {
    auto close = [&](const char* what, std::optional<double> got,
                     std::optional<double> want) {
        if (!want) return true;
        if (!got || std::fabs(*got - *want) > 0.1) {
            std::ostringstream os;
            os << "tau " << row.tau << " " << what << " "
               << (got ? std::to_string(*got) : std::string("absent"))
               << " vs " << *want;
            why = os.str();
            return false;
        }
        return true;
    };
    if (!row.tertiary) {
        if (tx.status != TxStatus::NotAvailable) {
            why = "tau " + std::to_string(row.tau) + " should be not-available";
            return false;
        }
        return true;
    }
    return close("spread", tx.spread, row.spread) &&
           close("gross", tx.gross_eur, row.gross) &&
           close("profit", tx.profit_eur, row.profit);
}

void table_criterion(int idx, const char* label,
                     const std::vector<TableRow>& rows, double h,
                     const std::vector<TableRow>& extra_absent) {
    double t0 = now_s();
    bool ok = true;
    std::string why;
    for (const auto& row : rows) {
        FlexTransaction tx = evaluate_transaction(row.flex_cost, h, 1.0,
                                                  row.dayahead, row.tertiary,
                                                  row.tau);
        if (!row_matches(tx, row, why)) { ok = false; break; }
    }
    for (const auto& row : extra_absent) {
        FlexTransaction tx = evaluate_transaction(row.flex_cost, h, 1.0,
                                                  row.dayahead, row.tertiary,
                                                  row.tau);
        if (ok && !row_matches(tx, row, why)) { ok = false; }
    }
    double dt = now_s() - t0;
    if (dt >= 1.0) { ok = false; why = "too slow"; }
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    if (ok) os << dt << " s";
    else os << why;
    report(idx, label, ok, os.str());
}

void greedy_criterion() {
    bool ok = true;
    std::string why;
    auto run_direction = [&](const std::vector<TableRow>& rows, double h,
                             int expect_tau) {
        int calls = 0;
        SweepFn fn = [&](const Schedule&, int lo, int hi) {
            ++calls;
            std::vector<SweepEntry> v;
            if (calls > 1) return v;  // committed plan leaves no flexible hours
            for (const auto& row : rows) {
                if (row.tau < lo || row.tau > hi) continue;
                SweepEntry e;
                e.tx = evaluate_transaction(row.flex_cost, h, 1.0,
                                            row.dayahead, row.tertiary,
                                            row.tau);
                e.schedule = Schedule{};
                v.push_back(std::move(e));
            }
            return v;
        };
        auto accepted = greedy_select_with(fn, Schedule{}, 1, 24, nullptr);
        if (accepted.size() != 1 || accepted[0].tau != expect_tau) {
            ok = false;
            why = "expected a single accepted tau " +
                  std::to_string(expect_tau) + ", got " +
                  std::to_string(accepted.size()) + " transactions" +
                  (accepted.empty()
                       ? std::string()
                       : " starting at tau " + std::to_string(accepted[0].tau));
        }
        if (calls < 2) { ok = false; why = "no re-sweep happened"; }
    };
    run_direction(kSellRows, -6.0, 19);
    run_direction(kBuyRows, 6.0, 20);
    report(3, "greedy picks tau 19 sell / tau 20 buy", ok, why);
}

// ---------------------------------------------------------------------------
// enumeration oracles (independent of the production model builder)

bool pattern_ok(const std::vector<int>& y, int mon, int moff) {
    const int n = static_cast<int>(y.size());
    for (int u = 0; u <= n - mon - 1 && mon >= 1; ++u) {
        int sum = 0;
        for (int j = 1; j <= mon; ++j) sum += y[u + j];
        if ((y[u + 1] - y[u]) * mon > sum) return false;
    }
    for (int u = 0; u <= n - moff - 1 && moff >= 1; ++u) {
        int sum = 0;
        for (int j = 1; j <= moff; ++j) sum += y[u + j];
        if (sum > (1 + y[u + 1] - y[u]) * moff) return false;
    }
    return true;
}

// continuous flows for a fixed on/off pattern; optionally with the
// flexibility side constraints (frozen purchases, perturbed slot, band)
std::optional<double> pattern_cost(const PlantConfig& cfg,
                                   const std::vector<double>& price,
                                   const std::vector<int>& y,
                                   const Schedule* base = nullptr,
                                   const FlexRequest* req = nullptr) {
    const int n = cfg.horizon.n_slots;
    const double dt = cfg.horizon.slot_hours;
    const Battery& b = cfg.battery;
    const bool bat = b.capacity_mwh > 0;

    LinearProgram lp;
    std::vector<int> vb(n), vs(n), vc(n), vd(n), vi(n);
    for (int t = 0; t < n; ++t) vb[t] = lp.add_variable(0, cfg.grid.p_buy_max_mw);
    for (int t = 0; t < n; ++t) vs[t] = lp.add_variable(0, kInfinity);
    for (int t = 0; t < n; ++t)
        vc[t] = lp.add_variable(0, bat ? b.p_charge_max_mw : 0.0);
    for (int t = 0; t < n; ++t)
        vd[t] = lp.add_variable(0, bat ? b.p_discharge_max_mw : 0.0);
    for (int t = 0; t < n; ++t)
        vi[t] = lp.add_variable(cfg.silos[0].capacity_min_t,
                                cfg.silos[0].capacity_max_t);
    for (int t = 0; t < n; ++t) {
        lp.set_objective(vb[t], price[t] * dt);
        if (bat) {
            lp.set_objective(vc[t], b.wear_cost * dt);
            lp.set_objective(vd[t], b.wear_cost * dt);
        }
        lp.set_objective(vi[t], cfg.silos[0].storage_cost * dt);
    }
    for (int t = 0; t < n; ++t) {
        double prod = y[t] * cfg.machines[0].production_at(t) * dt;
        double prev_rhs = t == 0 ? cfg.silos[0].initial_t : 0.0;
        auto& mass = lp.add_constraint(Relation::Equal,
                                       prev_rhs + prod - cfg.demand_at(t) * dt);
        mass.terms.push_back({vi[t], 1.0});
        if (t > 0) mass.terms.push_back({vi[t - 1], -1.0});

        double load = y[t] * cfg.machines[0].power_mw;
        auto& pw = lp.add_constraint(Relation::Equal, load - cfg.pv_at(t));
        pw.terms = {{vb[t], 1.0}, {vd[t], 1.0}, {vs[t], -1.0}, {vc[t], -1.0}};

        lp.add_constraint(Relation::GreaterEqual, cfg.demand_at(t) * dt)
            .terms = {{vi[t], 1.0}};
    }
    if (bat) {
        // note: references from add_constraint go stale at the next call
        for (int jj = 0; jj < n; ++jj) {
            {
                auto& up = lp.add_constraint(Relation::LessEqual,
                                             b.soc_max() - b.soc0_mwh);
                for (int t = 0; t <= jj; ++t) {
                    up.terms.push_back({vc[t], dt});
                    up.terms.push_back({vd[t], -dt});
                }
            }
            auto& lo = lp.add_constraint(Relation::GreaterEqual,
                                         b.soc_min() - b.soc0_mwh);
            for (int t = 0; t <= jj; ++t) {
                lo.terms.push_back({vc[t], dt});
                lo.terms.push_back({vd[t], -dt});
            }
        }
    }
    if (base && req) {
        const int ti = req->tau - 1;
        for (int t = 0; t < ti; ++t)
            lp.add_constraint(Relation::Equal, base->buy_mw[t]).terms = {
                {vb[t], 1.0}};
        lp.add_constraint(Relation::Equal, base->buy_mw[ti] + req->h_mw)
            .terms = {{vb[ti], 1.0}};
        double base_sum = 0;
        for (int t = 0; t < n; ++t) base_sum += base->buy_mw[t];
        auto& lo = lp.add_constraint(Relation::GreaterEqual,
                                     (1.0 - req->eps_min) * base_sum);
        for (int t = 0; t < n; ++t) lo.terms.push_back({vb[t], 1.0});
        auto& hi = lp.add_constraint(Relation::LessEqual,
                                     (1.0 + req->eps_max) * base_sum);
        for (int t = 0; t < n; ++t) hi.terms.push_back({vb[t], 1.0});
    }
    auto sol = solve_lp(lp);
    if (sol.status != LpStatus::Optimal) return std::nullopt;
    return sol.objective_value;
}

std::optional<double> enumerate_best(const PlantConfig& cfg,
                                     const std::vector<double>& price,
                                     const Schedule* base = nullptr,
                                     const FlexRequest* req = nullptr) {
    const int n = cfg.horizon.n_slots;
    const auto& mk = cfg.machines[0];
    const int ti = req ? req->tau - 1 : 0;
    std::optional<double> best;
    for (long mask = 0; mask < (1L << n); ++mask) {
        std::vector<int> y(n);
        bool frozen_ok = true;
        for (int t = 0; t < n; ++t) {
            y[t] = (mask >> t) & 1;
            if (base && t < ti && y[t] != base->machine_on[0][t])
                frozen_ok = false;
        }
        if (!frozen_ok) continue;
        if (!pattern_ok(y, mk.min_on_slots, mk.min_off_slots)) continue;
        auto c = pattern_cost(cfg, price, y, base, req);
        if (c && (!best || *c < *best - 1e-12)) best = c;
    }
    return best;
}

PlantConfig random_plant(std::mt19937& rng, bool with_battery, int n_max) {
    std::uniform_int_distribution<int> nd(6, n_max), mond(1, 3), moffd(1, 2);
    std::uniform_real_distribution<double> pd(2.0, 6.0), prodd(12.0, 30.0),
        demd(4.0, 12.0), capd(40.0, 120.0), pvd(0.0, 3.0);
    PlantConfig cfg;
    cfg.horizon = {nd(rng), 1.0};
    cfg.machines.push_back({"m", pd(rng), {prodd(rng)}, mond(rng), moffd(rng)});
    double cap = capd(rng);
    cfg.silos.push_back({"s", cap, 0.0, cap * 0.4, 0.0});
    cfg.grid.p_buy_max_mw = 15.0;
    cfg.demand_tph = {demd(rng)};
    std::vector<double> pv(static_cast<size_t>(cfg.horizon.n_slots));
    for (auto& x : pv) x = pvd(rng);
    cfg.pv_power_mw = pv;
    if (with_battery) cfg.battery = {3.0, 0.8, 3.0 * 0.2, 1.0, 1.0, 0.5};
    return cfg;
}

std::vector<double> random_prices(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> prd(10.0, 100.0);
    std::vector<double> p(static_cast<size_t>(n));
    for (auto& x : p) x = prd(rng);
    return p;
}

void baseline_oracle_criterion() {
    double t0 = now_s();
    std::mt19937 rng(20230403);
    int done = 0, mismatches = 0;
    std::string why;
    while (done < 200) {
        PlantConfig cfg = random_plant(rng, done % 3 == 0, 10);
        auto price = random_prices(rng, cfg.horizon.n_slots);
        auto oracle = enumerate_best(cfg, price);
        try {
            Schedule s = solve_baseline(cfg, price);
            check_schedule(cfg, s);
            if (!oracle || std::fabs(s.cost_eur - *oracle) > 1e-6) {
                ++mismatches;
                why = "instance " + std::to_string(done) + ": solver " +
                      std::to_string(s.cost_eur) + " vs oracle " +
                      (oracle ? std::to_string(*oracle)
                              : std::string("infeasible"));
            }
        } catch (const InfeasibleModelError&) {
            if (oracle) {
                ++mismatches;
                why = "instance " + std::to_string(done) +
                      ": solver infeasible, oracle " + std::to_string(*oracle);
            }
        }
        ++done;
    }
    double dt = now_s() - t0;
    bool ok = mismatches == 0 && dt < 120.0;
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(1);
    if (mismatches) os << mismatches << " mismatches: " << why;
    else os << done << " instances in " << dt << " s";
    report(4, "baseline equals exhaustive enumeration", ok, os.str());
}

void flex_oracle_criterion() {
    double t0 = now_s();
    std::mt19937 rng(20230605);
    int done = 0, mismatches = 0, negatives = 0;
    std::string why;
    while (done < 50) {
        PlantConfig cfg = random_plant(rng, false, 9);
        const int n = cfg.horizon.n_slots;
        auto price = random_prices(rng, n);
        Schedule base;
        try {
            base = solve_baseline(cfg, price);
        } catch (const InfeasibleModelError&) {
            continue;
        }
        check_schedule(cfg, base);
        std::uniform_int_distribution<int> taud(1, n);
        std::uniform_real_distribution<double> hd(0.5, 2.0);
        FlexRequest req;
        req.tau = taud(rng);
        double mag = hd(rng);
        double at = base.buy_mw[static_cast<size_t>(req.tau - 1)];
        req.h_mw = at + mag <= cfg.grid.p_buy_max_mw ? mag : -mag;
        if (at + req.h_mw < -1e-9) continue;
        req.eps_min = req.eps_max = 0.25;
        auto oracle = enumerate_best(cfg, price, &base, &req);
        FlexOutcome out = flexibility_cost(cfg, price, base, req);
        if (out.feasible != oracle.has_value()) {
            ++mismatches;
            why = "instance " + std::to_string(done) + ": feasibility disagrees";
        } else if (out.feasible) {
            check_schedule(cfg, out.schedule);
            double want = *oracle - base.cost_eur;
            if (want < 0 && want > -1e-6) want = 0;
            if (std::fabs(out.delta_cost - want) > 1e-6) {
                ++mismatches;
                why = "instance " + std::to_string(done) + ": delta " +
                      std::to_string(out.delta_cost) + " vs " +
                      std::to_string(want);
            }
            if (out.delta_cost < 0) ++negatives;
        }
        ++done;
    }
    double dt = now_s() - t0;
    bool ok = mismatches == 0 && negatives == 0;
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(1);
    if (!ok) os << mismatches << " mismatches, " << negatives
                << " negative deltas: " << why;
    else os << done << " instances in " << dt << " s";
    report(5, "flexibility cost equals enumeration, nonnegative", ok, os.str());
}

void monotonicity_criterion() {
    std::mt19937 rng(77);
    int pv_checked = 0, bat_checked = 0, eps_checked = 0, equal_checked = 0;
    int violations = 0;
    std::string why;
    auto note = [&](const std::string& s) {
        ++violations;
        if (why.empty()) why = s;
    };
    int guard = 0;
    while ((pv_checked < 20 || bat_checked < 20 || eps_checked < 20 ||
            equal_checked < 20) &&
           ++guard < 400) {
        PlantConfig cfg = random_plant(rng, false, 10);
        auto price = random_prices(rng, cfg.horizon.n_slots);
        Schedule s1;
        try {
            s1 = solve_baseline(cfg, price);
        } catch (const InfeasibleModelError&) {
            continue;
        }
        check_schedule(cfg, s1);

        if (pv_checked < 20) {
            PlantConfig more = cfg;
            for (auto& x : more.pv_power_mw) x *= 1.5;
            Schedule s2 = solve_baseline(more, price);
            check_schedule(more, s2);
            if (s2.cost_eur > s1.cost_eur + 1e-6)
                note("cost rose with extra PV");
            ++pv_checked;
        }
        if (bat_checked < 20) {
            PlantConfig small = cfg, big = cfg;
            small.battery = {2.0, 0.8, 2.0 * 0.2, 1.0, 1.0, 0.5};
            big.battery = {3.0, 0.8, 3.0 * 0.2, 1.0, 1.0, 0.5};
            Schedule a = solve_baseline(small, price);
            Schedule b = solve_baseline(big, price);
            check_schedule(small, a);
            check_schedule(big, b);
            if (b.cost_eur > a.cost_eur + 1e-6)
                note("cost rose with a bigger battery");
            ++bat_checked;
        }

        const int n = cfg.horizon.n_slots;
        std::uniform_int_distribution<int> taud(1, n);
        FlexRequest req;
        req.tau = taud(rng);
        double at = s1.buy_mw[static_cast<size_t>(req.tau - 1)];
        req.h_mw = at + 1.0 <= cfg.grid.p_buy_max_mw ? 1.0 : -1.0;
        if (at + req.h_mw < -1e-9) continue;

        if (eps_checked < 20) {
            FlexRequest tight = req, loose = req;
            tight.eps_min = tight.eps_max = 0.05;
            loose.eps_min = loose.eps_max = 0.30;
            FlexOutcome a = flexibility_cost(cfg, price, s1, tight);
            FlexOutcome b = flexibility_cost(cfg, price, s1, loose);
            if (a.feasible && !b.feasible)
                note("loosening the band lost feasibility");
            if (a.feasible && b.feasible) {
                if (a.schedule.buy_mw.size()) check_schedule(cfg, a.schedule);
                check_schedule(cfg, b.schedule);
                if (b.delta_cost > a.delta_cost + 1e-6)
                    note("flex cost rose with a wider band");
                ++eps_checked;
            }
        }
        if (equal_checked < 20) {
            FlexRequest free = req, equal = req;
            free.eps_min = free.eps_max = 0.30;
            equal = free;
            equal.equal_run_hours = true;
            FlexOutcome a = flexibility_cost(cfg, price, s1, free);
            FlexOutcome b = flexibility_cost(cfg, price, s1, equal);
            if (b.feasible && !a.feasible)
                note("equal-run feasible but free infeasible");
            if (a.feasible && b.feasible) {
                check_schedule(cfg, a.schedule);
                check_schedule(cfg, b.schedule);
                if (b.delta_cost < a.delta_cost - 1e-6)
                    note("equal-run flex cost below the free one");
                ++equal_checked;
            }
        }
    }
    bool counts_ok = pv_checked >= 20 && bat_checked >= 20 &&
                     eps_checked >= 20 && equal_checked >= 20;
    bool ok = violations == 0 && counts_ok;
    std::ostringstream os;
    if (!counts_ok)
        os << "only " << pv_checked << "/" << bat_checked << "/" << eps_checked
           << "/" << equal_checked << " configs reached";
    else if (violations)
        os << violations << " violations: " << why;
    else
        os << "pv/battery/band/equal-run over " << pv_checked << "+ configs";
    report(7, "monotonicity suite", ok, os.str());
}

// ---------------------------------------------------------------------------
// full-size case and qualitative direction check

PlantConfig week_plant(double pv_peak_mw, double battery_mwh) {
    PlantConfig cfg;
    cfg.horizon = {168, 1.0};
    cfg.machines.push_back({"mill", 6.0, {360.0}, 6, 3});
    cfg.silos.push_back({"silo", 15000.0, 9000.0, 12000.0, 0.0});
    cfg.grid.p_buy_max_mw = 21.0;
    cfg.demand_tph = {240.0};
    if (battery_mwh > 0)
        cfg.battery = {battery_mwh, 0.8, battery_mwh * 0.2,
                       battery_mwh, battery_mwh, 50.0};
    std::vector<double> pv(168, 0.0);
    for (int t = 0; t < 168; ++t) {
        int h = t % 24;
        if (h >= 7 && h <= 19)
            pv[static_cast<size_t>(t)] =
                pv_peak_mw * std::sin((h - 7) * M_PI / 12.0);
    }
    cfg.pv_power_mw = pv;
    return cfg;
}

PriceSet week_prices() {
    PriceSet ps;
    for (int t = 0; t < 168; ++t) {
        int h = t % 24;
        double da = 80.0 + 20.0 * std::sin((h - 8) * M_PI / 12.0) +
                    2.0 * ((t * 37) % 11 - 5);
        ps.timestamps.push_back("t" + std::to_string(t));
        ps.dayahead.push_back(da);
        ps.tertiary_up.push_back(da + 15.0);
        ps.tertiary_down.push_back(da - 20.0);
    }
    return ps;
}

void scale_criterion() {
    bool ok = true;
    std::string why;
    double t0 = now_s();
    PlantConfig cfg = week_plant(2.0, 2.0);
    PriceSet prices = week_prices();
    SolveOptions so;
    so.gap_tol = 0.02;
    Schedule base = solve_baseline(cfg, prices.dayahead, {}, so);
    check_schedule(cfg, base);
    SweepOptions sw;
    sw.solve = so;
    auto entries = sweep_day(cfg, prices, base, Direction::Sell, 6.0, sw);
    double elapsed = now_s() - t0;
    if (entries.size() != 24) { ok = false; why = "sweep size"; }
    for (const auto& e : entries)
        if (e.schedule) check_schedule(cfg, *e.schedule);
    if (elapsed >= 60.0) {
        ok = false;
        why = "took " + std::to_string(elapsed) + " s";
    }

    // qualitative check: when down-spreads stochastically dominate
    // up-spreads, buying earns at least as much as selling
    PlantConfig day;
    day.horizon = {24, 1.0};
    day.machines.push_back({"m", 4.0, {20.0}, 2, 1});
    day.silos.push_back({"s", 200.0, 0.0, 50.0, 0.0});
    day.grid.p_buy_max_mw = 20.0;
    day.demand_tph = {8.0};
    // storage lets a cheap balancing purchase displace later procurement
    day.battery = {2.0, 0.8, 0.4, 2.0, 2.0, 1.0};
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> dad(-10.0, 10.0), upd(0.0, 6.0),
        downd(12.0, 30.0);
    PriceSet dp;
    for (int t = 0; t < 24; ++t) {
        double da = 60.0 + dad(rng);
        dp.timestamps.push_back("t" + std::to_string(t));
        dp.dayahead.push_back(da);
        dp.tertiary_up.push_back(da + upd(rng));
        dp.tertiary_down.push_back(da - downd(rng));
    }
    Schedule day_base = solve_baseline(day, dp.dayahead);
    check_schedule(day, day_base);
    SweepOptions dsw;
    dsw.eps_min = dsw.eps_max = 0.3;
    auto revenue = [&](Direction dir) {
        double total = 0;
        for (const auto& tx :
             greedy_select(day, dp, day_base, dir, 2.0, dsw))
            total += tx.profit_eur.value_or(0.0);
        return total;
    };
    double fr_sell = revenue(Direction::Sell);
    double fr_buy = revenue(Direction::Buy);
    if (fr_buy + 1e-9 < fr_sell) {
        ok = false;
        why = "buy revenue " + std::to_string(fr_buy) + " below sell " +
              std::to_string(fr_sell);
    }
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(1);
    if (ok)
        os << "week case in " << elapsed << " s; buy " << fr_buy
           << " EUR >= sell " << fr_sell << " EUR";
    else
        os << why;
    report(8, "168-slot scale and direction asymmetry", ok, os.str());
}

// ---------------------------------------------------------------------------
// determinism

bool dirs_identical(const fs::path& a, const fs::path& b, std::string& why) {
    auto snapshot = [](const fs::path& dir) {
        std::vector<std::pair<std::string, std::string>> files;
        for (const auto& e : fs::recursive_directory_iterator(dir)) {
            if (!e.is_regular_file()) continue;
            std::ifstream in(e.path(), std::ios::binary);
            std::ostringstream os;
            os << in.rdbuf();
            files.emplace_back(fs::relative(e.path(), dir).string(), os.str());
        }
        std::sort(files.begin(), files.end());
        return files;
    };
    auto fa = snapshot(a), fb = snapshot(b);
    if (fa == fb) return true;
    why = "output trees differ";
    return false;
}

void determinism_criterion() {
    bool ok = true;
    std::string why;
    fs::path root = "acceptance_tmp";
    fs::remove_all(root);
    fs::create_directories(root);

    // a small study manifest evaluated twice end to end
    StudySpec spec;
    spec.base_cfg.horizon = {28, 6.0};
    spec.base_cfg.machines.push_back({"m", 4.0, {20.0}, 2, 1});
    spec.base_cfg.silos.push_back({"s", 600.0, 0.0, 200.0, 0.0});
    spec.base_cfg.grid.p_buy_max_mw = 20.0;
    spec.base_cfg.demand_tph = {8.0};
    spec.pv_profile_per_mw = {0.5};
    spec.grid.pv_capacities_mw = {1.0};
    spec.direction = Direction::Sell;
    spec.h_magnitude_mw = 2.0;
    PriceSet month;
    for (int t = 0; t < 56; ++t) {
        double da = 50.0 + 5.0 * std::sin(0.7 * t);
        month.timestamps.push_back("t" + std::to_string(t));
        month.dayahead.push_back(da);
        month.tertiary_up.push_back(da + 10.0);
        month.tertiary_down.push_back(da - 10.0);
    }
    for (const char* leg : {"a", "b"}) {
        fs::path out = root / leg;
        fs::create_directories(out);
        auto results = run_study(spec, month);
        write_study_outputs(results, out.string());
    }
    if (!dirs_identical(root / "a", root / "b", why)) ok = false;

    // a repeated day sweep, which exercises the concurrent path
    PlantConfig day;
    day.horizon = {24, 1.0};
    day.machines.push_back({"m", 4.0, {20.0}, 2, 1});
    day.silos.push_back({"s", 200.0, 0.0, 50.0, 0.0});
    day.grid.p_buy_max_mw = 20.0;
    day.demand_tph = {8.0};
    PriceSet dp;
    for (int t = 0; t < 24; ++t) {
        double da = 55.0 + 12.0 * std::sin(0.9 * t);
        dp.timestamps.push_back("t" + std::to_string(t));
        dp.dayahead.push_back(da);
        dp.tertiary_up.push_back(da + 8.0);
        dp.tertiary_down.push_back(da - 8.0);
    }
    Schedule base = solve_baseline(day, dp.dayahead);
    SweepOptions sw;
    sw.eps_min = sw.eps_max = 0.3;
    for (const char* leg : {"s1", "s2"}) {
        auto entries = sweep_day(day, dp, base, Direction::Buy, 2.0, sw);
        std::vector<FlexTransaction> txs;
        for (auto& e : entries) txs.push_back(e.tx);
        write_transactions_csv(txs, (root / (std::string(leg) + ".csv")).string());
    }
    {
        std::ifstream a(root / "s1.csv"), b(root / "s2.csv");
        std::ostringstream oa, ob;
        oa << a.rdbuf();
        ob << b.rdbuf();
        if (oa.str() != ob.str() || oa.str().empty()) {
            ok = false;
            why = "sweep transaction files differ";
        }
    }
    fs::remove_all(root);
    report(9, "byte-identical repeated runs", ok, why);
}

}  // namespace

int main() {
    table_criterion(1, "selling-day table arithmetic", kSellRows, -6.0, {});
    table_criterion(2, "buying-day table arithmetic", kBuyRows, 6.0,
                    {kSellRows[2]});
    greedy_criterion();
    baseline_oracle_criterion();
    flex_oracle_criterion();
    monotonicity_criterion();
    scale_criterion();
    determinism_criterion();
    bool inv_ok = g_schedule_violations == 0 && g_schedules_checked > 0;
    std::ostringstream os;
    os << g_schedules_checked << " schedules checked";
    report(6, "structural invariants on every schedule", inv_ok, os.str());
    std::printf("%s (%d/9 criteria)\n", g_failures == 0 ? "ALL PASS" : "FAILURES",
                9 - g_failures);
    return g_failures;
}
