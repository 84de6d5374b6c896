#include "flexplan/mip.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace flexplan {

namespace {

constexpr double kIntTol = 1e-6;
constexpr double kPruneEps = 1e-9;

struct Node {
    std::vector<double> lower, upper;
    Basis basis;  // parent's optimal basis
    double bound = -kInfinity;
    long id = 0;
    long parent = -1;
};

// Branching variable: the first fractional binary in index order.  The
// scheduling programs list binaries chronologically, so this decides the
// timeline left to right and lets the run-length rows propagate; it beats
// most-fractional by orders of magnitude on those instances.
int pick_branch_var(const std::vector<double>& x,
                    const std::vector<int>& binaries) {
    for (int j : binaries) {
        double f = x[static_cast<size_t>(j)];
        double frac = std::min(f - std::floor(f), std::ceil(f) - f);
        if (frac > kIntTol) return j;
    }
    return -1;
}

class InternalBackend : public SolverBackend {
  public:
    std::string name() const override { return "internal"; }
    MipSolution solve(const MixedIntegerProgram& mip,
                      const MipOptions& opts) override {
        return solve_mip(mip, opts);
    }
};

std::map<std::string, std::unique_ptr<SolverBackend>>& registry() {
    static std::map<std::string, std::unique_ptr<SolverBackend>> reg;
    static std::once_flag init;
    std::call_once(init, [] {
        reg.emplace("internal", std::make_unique<InternalBackend>());
    });
    return reg;
}

std::mutex registry_mutex;

}  // namespace

void MixedIntegerProgram::check_valid() const {
    lp.check_valid();
    for (int j : binary_vars) {
        if (j < 0 || j >= lp.n_vars)
            throw std::invalid_argument("mip: binary index out of range");
        if (lp.lower[j] < -kIntTol || lp.upper[j] > 1 + kIntTol)
            throw std::invalid_argument(
                "mip: binary variable bounds must lie within [0,1]");
    }
}

MipSolution solve_mip(const MixedIntegerProgram& mip, const MipOptions& opts) {
    mip.check_valid();
    if (opts.gap_tol < 0) throw std::invalid_argument("mip: negative gap_tol");

    SimplexContext ctx(mip.lp);

    auto solve_node = [&ctx](const std::vector<double>& lo,
                             const std::vector<double>& up, Basis& basis) {
        return ctx.solve(lo, up, basis);
    };

    bool have_incumbent = false;
    std::vector<double> inc_x;
    double inc_obj = kInfinity;

    auto integral = [&mip](const std::vector<double>& x) {
        for (int j : mip.binary_vars) {
            double f = x[static_cast<size_t>(j)];
            if (std::fabs(f - std::round(f)) > kIntTol) return false;
        }
        return true;
    };
    auto accept = [&](const std::vector<double>& x, double obj) {
        if (have_incumbent && obj >= inc_obj - 1e-12) return;
        inc_x = x;
        for (int j : mip.binary_vars)
            inc_x[static_cast<size_t>(j)] = std::round(inc_x[static_cast<size_t>(j)]);
        inc_obj = obj;
        have_incumbent = true;
    };

    long nodes = 0;
    long next_id = 1;

    // root relaxation
    Basis root_basis = opts.basis_io ? *opts.basis_io : Basis{};
    LpSolution root = solve_node(mip.lp.lower, mip.lp.upper, root_basis);
    if (opts.basis_io) *opts.basis_io = root_basis;
    ++nodes;
    if (root.status == LpStatus::Infeasible)
        return {MipStatus::Infeasible, {}, 0.0, 0.0, nodes};
    if (root.status == LpStatus::Unbounded)
        throw std::runtime_error("mip: relaxation is unbounded");

    if (integral(root.x)) {
        accept(root.x, root.objective_value);
        MipSolution sol;
        sol.status = MipStatus::Optimal;
        sol.x = inc_x;
        sol.objective_value = inc_obj;
        sol.lower_bound = root.objective_value;
        sol.nodes_explored = nodes;
        return sol;
    }

    // primal heuristics run on their own context so they never disturb the
    // warm dive chain of the tree search
    SimplexContext heur(mip.lp);

    // fixes the binaries at the rounded values of `x` and repairs the
    // continuous part by LP; adopts the result when feasible
    auto try_fix = [&](const std::vector<double>& x, const Basis& from) {
        std::vector<double> lo = mip.lp.lower, up = mip.lp.upper;
        for (int j : mip.binary_vars) {
            double r = std::round(x[static_cast<size_t>(j)]);
            lo[static_cast<size_t>(j)] = r;
            up[static_cast<size_t>(j)] = r;
        }
        Basis b = from;
        LpSolution h = heur.solve(lo, up, b);
        if (h.status == LpStatus::Optimal) accept(h.x, h.objective_value);
        return h.status == LpStatus::Optimal;
    };

    if (opts.integer_hint &&
        opts.integer_hint->size() == static_cast<size_t>(mip.lp.n_vars))
        try_fix(*opts.integer_hint, root_basis);
    try_fix(root.x, root_basis);

    // feasibility pump: alternate between rounding the LP point and solving
    // an L1-projection LP toward the rounded target; stalls are broken by
    // flipping the most conflicted binaries.  Whatever integral pattern
    // appears is polished through try_fix under the true objective.
    {
        const size_t nb = mip.binary_vars.size();
        std::vector<double> target(nb);
        for (size_t i = 0; i < nb; ++i)
            target[i] = std::round(root.x[static_cast<size_t>(mip.binary_vars[i])]);
        std::vector<double> fp_cost(static_cast<size_t>(mip.lp.n_vars), 0.0);
        Basis fb = root_basis;
        for (int it = 0; it < 30; ++it) {
            for (size_t i = 0; i < nb; ++i)
                fp_cost[static_cast<size_t>(mip.binary_vars[i])] =
                    target[i] < 0.5 ? 1.0 : -1.0;
            LpSolution p = heur.solve(mip.lp.lower, mip.lp.upper, fb, &fp_cost);
            if (p.status != LpStatus::Optimal) break;
            bool integral_now = true;
            std::vector<double> next(nb);
            for (size_t i = 0; i < nb; ++i) {
                double f = p.x[static_cast<size_t>(mip.binary_vars[i])];
                next[i] = std::round(f);
                if (std::fabs(f - next[i]) > kIntTol) integral_now = false;
            }
            if (integral_now) {
                try_fix(p.x, fb);
                break;
            }
            if (next == target) {
                // stalled: flip the binaries that disagree with their
                // rounding the most, deterministically
                std::vector<std::pair<double, size_t>> frac;
                for (size_t i = 0; i < nb; ++i) {
                    double f = p.x[static_cast<size_t>(mip.binary_vars[i])];
                    frac.push_back({-std::fabs(f - target[i]), i});
                }
                std::sort(frac.begin(), frac.end());
                size_t flips = std::min(nb, nb / 10 + 1);
                for (size_t r = 0; r < flips; ++r)
                    target[frac[r].second] = 1.0 - target[frac[r].second];
            } else {
                target = next;
            }
            if (it + 1 == 30) try_fix(p.x, fb);  // last resort polish
        }
    }

    std::vector<Node> open;
    auto push_children = [&](const Node& parent, const Basis& basis,
                             double bound, double frac, int branch_var) {
        int preferred = frac >= 0.5 ? 1 : 0;
        for (int child_val : {1 - preferred, preferred}) {
            Node c;
            c.lower = parent.lower;
            c.upper = parent.upper;
            if (child_val == 0)
                c.upper[static_cast<size_t>(branch_var)] = 0.0;
            else
                c.lower[static_cast<size_t>(branch_var)] = 1.0;
            c.basis = basis;
            c.bound = bound;
            c.id = next_id++;
            c.parent = parent.id;
            open.push_back(std::move(c));
        }
    };

    Node root_node;
    root_node.lower = mip.lp.lower;
    root_node.upper = mip.lp.upper;
    root_node.basis = root_basis;
    root_node.bound = root.objective_value;
    root_node.id = 0;

    {
        int bv = pick_branch_var(root.x, mip.binary_vars);
        push_children(root_node, root_basis, root.objective_value,
                      root.x[static_cast<size_t>(bv)], bv);
    }

    long last_expanded = 0;
    double global_lb = root.objective_value;

    while (!open.empty()) {
        // gap-based early stop
        double lb = have_incumbent ? inc_obj : kInfinity;
        for (const auto& n : open) lb = std::min(lb, n.bound);
        global_lb = lb;
        if (have_incumbent) {
            double gap = inc_obj - lb;
            if (gap <= std::max(opts.gap_tol * std::fabs(inc_obj), 1e-9)) break;
        }

        if (nodes >= opts.node_limit) {
            double tol = std::max(opts.gap_tol * std::fabs(inc_obj), 1e-6);
            if (have_incumbent && inc_obj - global_lb <= tol) break;
            if (!have_incumbent) {
                MipSolution sol;
                sol.status = MipStatus::NoIncumbent;
                sol.lower_bound = global_lb;
                sol.nodes_explored = nodes;
                return sol;
            }
            throw NodeLimitError(nodes, have_incumbent, inc_obj);
        }

        // node selection: keep diving depth-first while the last expansion
        // produced children or no incumbent exists yet; otherwise restart at
        // the best bound, breaking ties toward the newest (deepest) node
        size_t pick;
        if (open.back().parent == last_expanded || !have_incumbent) {
            pick = open.size() - 1;
        } else {
            pick = 0;
            for (size_t i = 1; i < open.size(); ++i) {
                if (open[i].bound < open[pick].bound - 1e-12 ||
                    (std::fabs(open[i].bound - open[pick].bound) <= 1e-12 &&
                     open[i].id > open[pick].id))
                    pick = i;
            }
        }
        Node node = std::move(open[pick]);
        open.erase(open.begin() + static_cast<long>(pick));

        if (have_incumbent && node.bound >= inc_obj - kPruneEps) continue;

        Basis basis = node.basis;
        LpSolution relax = solve_node(node.lower, node.upper, basis);
        ++nodes;
        last_expanded = node.id;
        if (relax.status != LpStatus::Optimal) continue;
        if (have_incumbent && relax.objective_value >= inc_obj - kPruneEps)
            continue;
        if (integral(relax.x)) {
            accept(relax.x, relax.objective_value);
            continue;
        }
        int bv = pick_branch_var(relax.x, mip.binary_vars);
        if (bv < 0) {  // fractional only within tolerance
            accept(relax.x, relax.objective_value);
            continue;
        }
        if (nodes % 256 == 0) try_fix(relax.x, basis);
        push_children(node, basis, relax.objective_value,
                      relax.x[static_cast<size_t>(bv)], bv);
    }

    MipSolution sol;
    if (!have_incumbent) {
        sol.status = MipStatus::Infeasible;
        sol.nodes_explored = nodes;
        return sol;
    }
    sol.status = MipStatus::Optimal;
    sol.x = inc_x;
    sol.objective_value = inc_obj;
    sol.lower_bound = open.empty() ? inc_obj : global_lb;
    sol.nodes_explored = nodes;
    return sol;
}

void register_backend(std::unique_ptr<SolverBackend> b) {
    std::lock_guard<std::mutex> lock(registry_mutex);
    auto name = b->name();
    registry()[name] = std::move(b);
}

SolverBackend& backend(const std::string& name) {
    std::lock_guard<std::mutex> lock(registry_mutex);
    auto& reg = registry();
    auto it = reg.find(name);
    if (it == reg.end())
        throw std::invalid_argument("unknown solver backend: " + name);
    return *it->second;
}

std::vector<std::string> backend_names() {
    std::lock_guard<std::mutex> lock(registry_mutex);
    std::vector<std::string> names;
    for (const auto& [k, v] : registry()) names.push_back(k);
    return names;
}

}  // namespace flexplan
