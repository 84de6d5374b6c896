#include "flexplan/flex.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace flexplan {

int flex_window_slots(const Horizon& h) {
    int per_day = static_cast<int>(std::lround(24.0 / h.slot_hours));
    return std::min(std::max(per_day, 1), h.n_slots);
}

std::pair<MixedIntegerProgram, VariableLayout> build_flex_program(
    const PlantConfig& cfg, const std::vector<double>& dayahead,
    const Schedule& base, const FlexRequest& req, const BaselineOptions& opts) {
    const int n = cfg.horizon.n_slots;
    if (req.tau < 1 || req.tau > flex_window_slots(cfg.horizon))
        throw std::invalid_argument("flex request: tau outside the flexibility window");
    if (req.eps_min < 0 || req.eps_min > 1 || req.eps_max < 0 || req.eps_max > 1)
        throw std::invalid_argument("flex request: epsilon band outside [0,1]");
    {
        auto viol = validate_schedule(cfg, base);
        if (!viol.empty())
            throw std::invalid_argument("base schedule invalid: " +
                                        describe(viol));
    }

    const int ti = req.tau - 1;  // 0-based perturbed slot
    double perturbed = base.buy_mw[ti] + req.h_mw;
    if (perturbed < -1e-9)
        throw FlexError("perturbation drives purchase negative at slot " +
                        std::to_string(req.tau));
    if (perturbed > cfg.grid.p_buy_max_mw + 1e-9)
        throw FlexError("perturbation exceeds purchase cap at slot " +
                        std::to_string(req.tau));

    auto [mip, layout] = build_baseline_program(cfg, dayahead, opts);
    LinearProgram& lp = mip.lp;

    // frozen purchase history and the perturbed slot
    for (int t = 0; t < ti; ++t) {
        auto& row = lp.add_constraint(Relation::Equal, base.buy_mw[t]);
        row.terms.push_back({layout.buy(t), 1.0});
    }
    {
        auto& row = lp.add_constraint(Relation::Equal, perturbed);
        row.terms.push_back({layout.buy(ti), 1.0});
    }

    // total procurement deviation band
    double base_sum = 0;
    for (int t = 0; t < n; ++t) base_sum += base.buy_mw[t];
    {
        // note: references from add_constraint go stale at the next call
        auto& lo = lp.add_constraint(Relation::GreaterEqual,
                                     (1.0 - req.eps_min) * base_sum);
        for (int t = 0; t < n; ++t) lo.terms.push_back({layout.buy(t), 1.0});
        auto& hi = lp.add_constraint(Relation::LessEqual,
                                     (1.0 + req.eps_max) * base_sum);
        for (int t = 0; t < n; ++t) hi.terms.push_back({layout.buy(t), 1.0});
    }

    // machines keep their committed states before tau
    for (int k = 0; k < layout.n_machines; ++k)
        for (int t = 0; t < ti; ++t) {
            int col = layout.machine(k, t);
            double y = base.machine_on[k][t];
            lp.lower[col] = y;
            lp.upper[col] = y;
        }

    if (req.equal_run_hours) {
        for (int k = 0; k < layout.n_machines; ++k) {
            double total = 0;
            for (int t = 0; t < n; ++t) total += base.machine_on[k][t];
            auto& row = lp.add_constraint(Relation::Equal, total);
            for (int t = 0; t < n; ++t)
                row.terms.push_back({layout.machine(k, t), 1.0});
        }
    }

    return {std::move(mip), layout};
}

FlexOutcome flexibility_cost(const PlantConfig& cfg,
                             const std::vector<double>& dayahead,
                             const Schedule& base, const FlexRequest& req,
                             const BaselineOptions& opts,
                             const SolveOptions& solve_opts) {
    auto [mip, layout] = build_flex_program(cfg, dayahead, base, req, opts);
    MipOptions mo;
    mo.gap_tol = solve_opts.gap_tol;
    mo.node_limit = solve_opts.node_limit;
    mo.basis_io = solve_opts.basis_io;
    // the committed pattern usually absorbs the perturbation at small extra
    // cost, which makes it a strong starting incumbent
    std::vector<double> hint(static_cast<size_t>(mip.lp.n_vars), 0.0);
    for (int k = 0; k < layout.n_machines; ++k)
        for (int t = 0; t < cfg.horizon.n_slots; ++t)
            hint[static_cast<size_t>(layout.machine(k, t))] =
                base.machine_on[k][t];
    mo.integer_hint = &hint;
    MipSolution sol = backend(solve_opts.backend_name).solve(mip, mo);

    FlexOutcome out;
    if (sol.status != MipStatus::Optimal) return out;
    out.feasible = true;
    out.schedule = decode_schedule(cfg, layout, sol.x, dayahead, opts);
    double delta = out.schedule.cost_eur - base.cost_eur;
    if (delta < 0 && delta > -1e-6) delta = 0;  // baseline remains optimal
    out.delta_cost = delta;
    return out;
}

FlexTransaction evaluate_transaction(std::optional<double> flex_cost, double h,
                                     double dt, double dayahead_price,
                                     std::optional<double> tertiary, int tau) {
    FlexTransaction tx;
    tx.tau = tau;
    tx.h_mw = h;
    tx.direction = h < 0 ? Direction::Sell : Direction::Buy;
    tx.dayahead_price = dayahead_price;
    tx.tertiary_price = tertiary;
    tx.flex_cost_eur = flex_cost;

    if (!flex_cost) {
        tx.status = TxStatus::Infeasible;
        return tx;
    }
    if (!tertiary) {
        tx.status = TxStatus::NotAvailable;
        return tx;
    }
    tx.status = TxStatus::Feasible;
    double spread = h < 0 ? *tertiary - dayahead_price   // S+ for selling
                          : dayahead_price - *tertiary;  // S- for buying
    tx.spread = spread;
    tx.gross_eur = std::fabs(h) * dt * spread;
    tx.profit_eur = *tx.gross_eur - *flex_cost;
    return tx;
}

std::vector<SweepEntry> sweep_day(const PlantConfig& cfg, const PriceSet& prices,
                                  const Schedule& base, Direction direction,
                                  double h_magnitude, const SweepOptions& opts,
                                  int tau_begin, int tau_end) {
    const int window = flex_window_slots(cfg.horizon);
    if (tau_end < 0) tau_end = window;
    tau_end = std::min(tau_end, window);
    const double dt = cfg.horizon.slot_hours;

    auto evaluate = [&](int tau) {
        double h = direction == Direction::Sell ? -h_magnitude : h_magnitude;
        FlexRequest req;
        req.tau = tau;
        req.h_mw = h;
        req.eps_min = opts.eps_min;
        req.eps_max = opts.eps_max;
        req.equal_run_hours = opts.equal_run_hours;

        std::optional<double> tertiary =
            direction == Direction::Sell
                ? prices.tertiary_up[static_cast<size_t>(tau - 1)]
                : prices.tertiary_down[static_cast<size_t>(tau - 1)];

        SweepEntry entry;
        std::optional<double> delta;
        try {
            SolveOptions so = opts.solve;
            so.basis_io = nullptr;
            FlexOutcome fo =
                flexibility_cost(cfg, prices.dayahead, base, req, opts.model, so);
            if (fo.feasible) {
                delta = fo.delta_cost;
                entry.schedule = std::move(fo.schedule);
            }
        } catch (const FlexError&) {
            // perturbation outside the purchase range: infeasible trade
        }
        entry.tx = evaluate_transaction(delta, h, dt,
                                        prices.dayahead[static_cast<size_t>(tau - 1)],
                                        tertiary, tau);
        if (!delta) entry.schedule.reset();
        return entry;
    };

    // the taus are independent; evaluate them concurrently and collect in
    // order, which keeps the result deterministic
    size_t count = static_cast<size_t>(std::max(0, tau_end - tau_begin + 1));
    std::vector<SweepEntry> out(count);
    std::vector<std::exception_ptr> errors(count);
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::atomic<int> cursor{tau_begin};
    auto drain = [&]() {
        for (;;) {
            int tau = cursor.fetch_add(1);
            if (tau > tau_end) break;
            size_t slot = static_cast<size_t>(tau - tau_begin);
            try {
                out[slot] = evaluate(tau);
            } catch (...) {
                errors[slot] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers && static_cast<int>(w) <= tau_end - tau_begin;
         ++w)
        pool.emplace_back(drain);
    drain();
    for (auto& th : pool) th.join();
    // surface the earliest failure, matching what a serial scan would throw
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

std::vector<FlexTransaction> greedy_select_with(const SweepFn& sweep,
                                                const Schedule& base,
                                                int tau_begin, int tau_end,
                                                Schedule* final_baseline) {
    std::vector<FlexTransaction> accepted;
    Schedule current = base;
    int lo = tau_begin;
    while (lo <= tau_end) {
        auto entries = sweep(current, lo, tau_end);
        const SweepEntry* best = nullptr;
        for (const auto& e : entries) {
            if (!e.tx.profitable() || !e.schedule) continue;
            if (!best || *e.tx.profit_eur > *best->tx.profit_eur + 1e-12)
                best = &e;  // ties keep the earliest tau
        }
        if (!best) break;
        accepted.push_back(best->tx);
        current = *best->schedule;
        lo = best->tx.tau + 1;
    }
    if (final_baseline) *final_baseline = std::move(current);
    return accepted;
}

std::vector<FlexTransaction> greedy_select(const PlantConfig& cfg,
                                           const PriceSet& prices,
                                           const Schedule& base,
                                           Direction direction,
                                           double h_magnitude,
                                           const SweepOptions& opts,
                                           Schedule* final_baseline) {
    auto fn = [&](const Schedule& b, int lo, int hi) {
        return sweep_day(cfg, prices, b, direction, h_magnitude, opts, lo, hi);
    };
    return greedy_select_with(fn, base, 1, flex_window_slots(cfg.horizon),
                              final_baseline);
}

}  // namespace flexplan
