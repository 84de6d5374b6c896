#include "flexplan/lp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace flexplan {

namespace {

constexpr double kFeasTol = 1e-7;
constexpr double kDualTol = 1e-7;
constexpr double kPivotTol = 1e-9;
constexpr double kDegenTol = 1e-10;
constexpr int kBlandThreshold = 50;
constexpr int kRefactorInterval = 128;

enum VStat : std::uint8_t { AtLower, AtUpper, InBasis, FreeAtZero };

// Working state for one solve over the augmented system [A | -I] z = 0.
// Columns 0..ns-1 are structural, ns..ns+m-1 logical row variables whose
// bounds encode the row relation.
struct Simplex {
    const LinearProgram& lp;
    int m, ns, ntot;

    // column-wise matrix
    std::vector<int> col_start;
    std::vector<int> col_row;
    std::vector<double> col_val;

    std::vector<double> lo, up;    // all columns
    std::vector<double> cost;      // structural objective, logicals 0
    std::vector<std::uint8_t> vstat;
    std::vector<int> basic;        // row -> column
    std::vector<double> binv;      // m*m, row-major
    std::vector<double> xB;

    long iterations = 0;
    int degen_streak = 0;
    bool bland = false;
    int pivots_since_refactor = 0;

    explicit Simplex(const LinearProgram& prog)
        : lp(prog),
          m(static_cast<int>(prog.constraints.size())),
          ns(prog.n_vars),
          ntot(prog.n_vars + static_cast<int>(prog.constraints.size())) {
        build_columns();
        lo.assign(lp.lower.begin(), lp.lower.end());
        up.assign(lp.upper.begin(), lp.upper.end());
        for (const auto& c : lp.constraints) {
            switch (c.rel) {
                case Relation::LessEqual:
                    lo.push_back(-kInfinity);
                    up.push_back(c.rhs);
                    break;
                case Relation::GreaterEqual:
                    lo.push_back(c.rhs);
                    up.push_back(kInfinity);
                    break;
                case Relation::Equal:
                    lo.push_back(c.rhs);
                    up.push_back(c.rhs);
                    break;
            }
        }
        cost.assign(ntot, 0.0);
        for (const auto& e : lp.objective) cost[e.col] += e.value;
    }

    void build_columns() {
        std::vector<int> count(ntot, 0);
        for (const auto& c : lp.constraints)
            for (const auto& e : c.terms) ++count[e.col];
        for (int i = 0; i < m; ++i) ++count[ns + i];
        col_start.assign(ntot + 1, 0);
        for (int j = 0; j < ntot; ++j) col_start[j + 1] = col_start[j] + count[j];
        col_row.resize(col_start[ntot]);
        col_val.resize(col_start[ntot]);
        std::vector<int> fill(col_start.begin(), col_start.end() - 1);
        for (int i = 0; i < m; ++i) {
            for (const auto& e : lp.constraints[i].terms) {
                int p = fill[e.col]++;
                col_row[p] = i;
                col_val[p] = e.value;
            }
        }
        for (int i = 0; i < m; ++i) {
            int p = fill[ns + i]++;
            col_row[p] = i;
            col_val[p] = -1.0;
        }
    }

    // nonbasic rest value
    double rest_value(int j) const {
        switch (vstat[j]) {
            case AtLower: return lo[j];
            case AtUpper: return up[j];
            case FreeAtZero: return 0.0;
            default: throw std::logic_error("rest_value of basic column");
        }
    }

    std::uint8_t default_rest(int j) const {
        if (std::isfinite(lo[j])) return AtLower;
        if (std::isfinite(up[j])) return AtUpper;
        return FreeAtZero;
    }

    void cold_basis() {
        vstat.assign(ntot, AtLower);
        for (int j = 0; j < ns; ++j) vstat[j] = default_rest(j);
        basic.resize(m);
        for (int i = 0; i < m; ++i) {
            basic[i] = ns + i;
            vstat[ns + i] = InBasis;
        }
    }

    bool adopt_basis(const Basis& b) {
        if (b.empty()) return false;
        int mb = static_cast<int>(b.basic.size());
        if (mb > m) return false;
        vstat.assign(ntot, AtLower);
        for (int j = 0; j < ntot; ++j) {
            if (j < static_cast<int>(b.at_upper.size()) && b.at_upper[j] &&
                std::isfinite(up[j]))
                vstat[j] = AtUpper;
            else
                vstat[j] = default_rest(j);
        }
        basic.assign(m, -1);
        std::vector<char> used(ntot, 0);
        for (int i = 0; i < mb; ++i) {
            int j = b.basic[i];
            if (j < 0 || j >= ntot || used[j]) return false;
            basic[i] = j;
            used[j] = 1;
        }
        for (int i = mb; i < m; ++i) {
            basic[i] = ns + i;  // rows appended after the snapshot
            if (used[ns + i]) return false;
            used[ns + i] = 1;
        }
        for (int i = 0; i < m; ++i) vstat[basic[i]] = InBasis;
        return true;
    }

    // Rebuild binv = B^{-1} by Gauss-Jordan with partial pivoting.
    bool refactorize() {
        std::vector<double> B(static_cast<size_t>(m) * m, 0.0);
        for (int i = 0; i < m; ++i) {
            int j = basic[i];
            for (int p = col_start[j]; p < col_start[j + 1]; ++p)
                B[static_cast<size_t>(col_row[p]) * m + i] = col_val[p];
        }
        binv.assign(static_cast<size_t>(m) * m, 0.0);
        for (int i = 0; i < m; ++i) binv[static_cast<size_t>(i) * m + i] = 1.0;
        for (int c = 0; c < m; ++c) {
            int piv = -1;
            double best = 1e-12;
            for (int r = c; r < m; ++r) {
                double v = std::fabs(B[static_cast<size_t>(r) * m + c]);
                if (v > best) { best = v; piv = r; }
            }
            if (piv < 0) return false;
            if (piv != c) {
                for (int k = 0; k < m; ++k) {
                    std::swap(B[static_cast<size_t>(piv) * m + k],
                              B[static_cast<size_t>(c) * m + k]);
                    std::swap(binv[static_cast<size_t>(piv) * m + k],
                              binv[static_cast<size_t>(c) * m + k]);
                }
            }
            double d = B[static_cast<size_t>(c) * m + c];
            double inv = 1.0 / d;
            for (int k = 0; k < m; ++k) {
                B[static_cast<size_t>(c) * m + k] *= inv;
                binv[static_cast<size_t>(c) * m + k] *= inv;
            }
            for (int r = 0; r < m; ++r) {
                if (r == c) continue;
                double f = B[static_cast<size_t>(r) * m + c];
                if (f == 0.0) continue;
                for (int k = 0; k < m; ++k) {
                    B[static_cast<size_t>(r) * m + k] -=
                        f * B[static_cast<size_t>(c) * m + k];
                    binv[static_cast<size_t>(r) * m + k] -=
                        f * binv[static_cast<size_t>(c) * m + k];
                }
            }
        }
        pivots_since_refactor = 0;
        return true;
    }

    void compute_basic_values() {
        std::vector<double> rhs(m, 0.0);
        for (int j = 0; j < ntot; ++j) {
            if (vstat[j] == InBasis) continue;
            double v = rest_value(j);
            if (v == 0.0) continue;
            for (int p = col_start[j]; p < col_start[j + 1]; ++p)
                rhs[col_row[p]] -= v * col_val[p];
        }
        xB.assign(m, 0.0);
        for (int i = 0; i < m; ++i) {
            const double* row = &binv[static_cast<size_t>(i) * m];
            double s = 0.0;
            for (int k = 0; k < m; ++k) s += row[k] * rhs[k];
            xB[i] = s;
        }
    }

    bool basics_feasible(double* total_infeas = nullptr) const {
        double sum = 0.0;
        bool ok = true;
        for (int i = 0; i < m; ++i) {
            int j = basic[i];
            if (xB[i] < lo[j] - kFeasTol) { ok = false; sum += lo[j] - xB[i]; }
            else if (xB[i] > up[j] + kFeasTol) { ok = false; sum += xB[i] - up[j]; }
        }
        if (total_infeas) *total_infeas = sum;
        return ok;
    }

    // y^T = cB^T B^{-1} for the given basic cost vector.
    void compute_y(const std::vector<double>& cB, std::vector<double>& y) const {
        y.assign(m, 0.0);
        for (int i = 0; i < m; ++i) {
            double c = cB[i];
            if (c == 0.0) continue;
            const double* row = &binv[static_cast<size_t>(i) * m];
            for (int k = 0; k < m; ++k) y[k] += c * row[k];
        }
    }

    double reduced_cost(int j, const std::vector<double>& y, bool phase2) const {
        double d = phase2 ? cost[j] : 0.0;
        for (int p = col_start[j]; p < col_start[j + 1]; ++p)
            d -= y[col_row[p]] * col_val[p];
        return d;
    }

    // direction alpha = B^{-1} a_j
    void compute_direction(int j, std::vector<double>& alpha) const {
        alpha.assign(m, 0.0);
        for (int p = col_start[j]; p < col_start[j + 1]; ++p) {
            double v = col_val[p];
            int r = col_row[p];
            for (int k = 0; k < m; ++k)
                alpha[k] += v * binv[static_cast<size_t>(k) * m + r];
        }
    }

    LpStatus run(long max_iter) {
        std::vector<double> cB(m), y, alpha;
        for (;;) {
            if (iterations > max_iter) throw SimplexCycleError(iterations);
            ++iterations;

            bool phase2 = basics_feasible();
            for (int i = 0; i < m; ++i) {
                int j = basic[i];
                if (phase2) {
                    cB[i] = cost[j];
                } else if (xB[i] < lo[j] - kFeasTol) {
                    cB[i] = -1.0;
                } else if (xB[i] > up[j] + kFeasTol) {
                    cB[i] = 1.0;
                } else {
                    cB[i] = 0.0;
                }
            }
            compute_y(cB, y);

            // entering column
            int enter = -1, dir = 0;
            double best = kDualTol;
            for (int j = 0; j < ntot; ++j) {
                std::uint8_t st = vstat[j];
                if (st == InBasis) continue;
                if (up[j] - lo[j] <= 0.0) continue;  // fixed
                double d = reduced_cost(j, y, phase2);
                int s = 0;
                double score = 0.0;
                if (st == AtLower && d < -kDualTol) { s = 1; score = -d; }
                else if (st == AtUpper && d > kDualTol) { s = -1; score = d; }
                else if (st == FreeAtZero && std::fabs(d) > kDualTol) {
                    s = d < 0 ? 1 : -1;
                    score = std::fabs(d);
                }
                if (s == 0) continue;
                if (bland) { enter = j; dir = s; break; }
                if (score > best) { best = score; enter = j; dir = s; }
            }
            if (enter < 0) {
                double infeas = 0.0;
                basics_feasible(&infeas);
                return infeas > kFeasTol ? LpStatus::Infeasible : LpStatus::Optimal;
            }

            compute_direction(enter, alpha);

            // ratio test; basics that are infeasible block only when moving
            // toward their violated bound
            double tmin = kInfinity;
            for (int k = 0; k < m; ++k) {
                if (std::fabs(alpha[k]) < kPivotTol) continue;
                double rho = -dir * alpha[k];
                int j = basic[k];
                double v = xB[k], l = lo[j], u = up[j];
                double t = kInfinity;
                if (v < l - kFeasTol) {
                    if (rho > 0) t = (l - v) / rho;
                } else if (v > u + kFeasTol) {
                    if (rho < 0) t = (u - v) / rho;
                } else if (rho < 0 && std::isfinite(l)) {
                    t = std::max(0.0, (v - l) / (-rho));
                } else if (rho > 0 && std::isfinite(u)) {
                    t = std::max(0.0, (u - v) / rho);
                }
                if (t < tmin) tmin = t;
            }

            double flip_range = (std::isfinite(lo[enter]) && std::isfinite(up[enter]))
                                    ? up[enter] - lo[enter]
                                    : kInfinity;

            if (!std::isfinite(tmin) && !std::isfinite(flip_range)) {
                if (phase2) return LpStatus::Unbounded;
                throw std::runtime_error("simplex: unbounded phase-1 ray");
            }

            if (flip_range <= tmin) {
                // bound flip, basis unchanged
                double t = flip_range;
                for (int k = 0; k < m; ++k) xB[k] -= dir * t * alpha[k];
                vstat[enter] = vstat[enter] == AtLower ? AtUpper : AtLower;
                note_step(t);
                continue;
            }

            // pick the blocking row: smallest ratio, ties to the largest
            // |alpha| and then lowest row index
            int leave = -1;
            double best_mag = 0.0;
            for (int k = 0; k < m; ++k) {
                if (std::fabs(alpha[k]) < kPivotTol) continue;
                double rho = -dir * alpha[k];
                int j = basic[k];
                double v = xB[k], l = lo[j], u = up[j];
                double t = kInfinity;
                if (v < l - kFeasTol) {
                    if (rho > 0) t = (l - v) / rho;
                } else if (v > u + kFeasTol) {
                    if (rho < 0) t = (u - v) / rho;
                } else if (rho < 0 && std::isfinite(l)) {
                    t = std::max(0.0, (v - l) / (-rho));
                } else if (rho > 0 && std::isfinite(u)) {
                    t = std::max(0.0, (u - v) / rho);
                }
                if (t <= tmin + 1e-9) {
                    double mag = std::fabs(alpha[k]);
                    if (mag > best_mag + 1e-12) { best_mag = mag; leave = k; }
                }
            }
            if (leave < 0) throw std::logic_error("simplex: no blocking row");

            pivot(enter, dir, leave, alpha, tmin);
            note_step(tmin);

            if (++pivots_since_refactor >= kRefactorInterval) {
                if (!refactorize()) repair_basis();
                compute_basic_values();
            }
        }
    }

    void note_step(double t) {
        if (t <= kDegenTol) {
            if (++degen_streak >= kBlandThreshold) bland = true;
        } else {
            degen_streak = 0;
            bland = false;
        }
    }

    void pivot(int enter, int dir, int leave, const std::vector<double>& alpha,
               double t) {
        int out = basic[leave];
        double enter_from = (vstat[enter] == FreeAtZero) ? 0.0 : rest_value(enter);
        for (int k = 0; k < m; ++k) xB[k] -= dir * t * alpha[k];

        // leaving variable rests on the bound it reached
        double vout = xB[leave];
        double dl = std::isfinite(lo[out]) ? std::fabs(vout - lo[out]) : kInfinity;
        double du = std::isfinite(up[out]) ? std::fabs(vout - up[out]) : kInfinity;
        vstat[out] = dl <= du ? AtLower : AtUpper;
        if (!std::isfinite(lo[out]) && !std::isfinite(up[out]))
            vstat[out] = FreeAtZero;

        basic[leave] = enter;
        vstat[enter] = InBasis;
        xB[leave] = enter_from + dir * t;

        // product-form update of the explicit inverse
        double piv = alpha[leave];
        double* rl = &binv[static_cast<size_t>(leave) * m];
        double inv = 1.0 / piv;
        for (int k = 0; k < m; ++k) rl[k] *= inv;
        for (int r = 0; r < m; ++r) {
            if (r == leave) continue;
            double f = alpha[r];
            if (f == 0.0) continue;
            double* rr = &binv[static_cast<size_t>(r) * m];
            for (int k = 0; k < m; ++k) rr[k] -= f * rl[k];
        }
    }

    // replace dependent basic columns with their row logicals
    void repair_basis() {
        for (int i = 0; i < m; ++i) {
            if (vstat[ns + i] != InBasis && basic[i] != ns + i) {
                vstat[basic[i]] = default_rest(basic[i]);
                basic[i] = ns + i;
                vstat[ns + i] = InBasis;
            }
        }
        if (!refactorize())
            throw std::runtime_error("simplex: basis repair failed");
    }

    LpSolution extract(LpStatus st, bool clean = true) {
        LpSolution sol;
        sol.status = st;
        sol.iterations = iterations;
        if (st != LpStatus::Optimal) return sol;
        // final clean factorization for tight residuals
        if (clean && refactorize()) compute_basic_values();
        sol.x.assign(ns, 0.0);
        for (int j = 0; j < ns; ++j)
            if (vstat[j] != InBasis) sol.x[j] = rest_value(j);
        for (int i = 0; i < m; ++i)
            if (basic[i] < ns) sol.x[basic[i]] = xB[i];
        double obj = 0.0;
        for (const auto& e : lp.objective) obj += e.value * sol.x[e.col];
        sol.objective_value = obj;
        return sol;
    }

    void export_basis(Basis& b) const {
        b.basic = basic;
        b.at_upper.assign(ntot, 0);
        for (int j = 0; j < ntot; ++j)
            if (vstat[j] == AtUpper) b.at_upper[j] = 1;
    }
};

}  // namespace

void LinearProgram::check_valid() const {
    auto bad = [](double v) { return std::isnan(v) || std::isinf(v); };
    if (static_cast<int>(lower.size()) != n_vars ||
        static_cast<int>(upper.size()) != n_vars)
        throw std::invalid_argument("lp: bound arrays do not match n_vars");
    for (int j = 0; j < n_vars; ++j) {
        if (std::isnan(lower[j]) || std::isnan(upper[j]) || lower[j] == kInfinity ||
            upper[j] == -kInfinity)
            throw std::invalid_argument("lp: invalid bounds on column " +
                                        std::to_string(j));
    }
    for (const auto& e : objective) {
        if (e.col < 0 || e.col >= n_vars || bad(e.value))
            throw std::invalid_argument("lp: invalid objective entry");
    }
    for (const auto& c : constraints) {
        if (bad(c.rhs)) throw std::invalid_argument("lp: invalid rhs");
        for (const auto& e : c.terms)
            if (e.col < 0 || e.col >= n_vars || bad(e.value))
                throw std::invalid_argument("lp: invalid row entry");
    }
}

LpSolution solve_lp(const LinearProgram& lp) {
    Basis b;
    return solve_lp(lp, b);
}

LpSolution solve_lp(const LinearProgram& lp, Basis& basis) {
    lp.check_valid();
    Simplex s(lp);
    bool warm = s.adopt_basis(basis);
    if (warm && !s.refactorize()) warm = false;
    if (!warm) {
        s.cold_basis();
        if (!s.refactorize())
            throw std::runtime_error("simplex: singular start basis");
    }
    s.compute_basic_values();
    long max_iter = 20000 + 200L * (s.m + s.ns);
    LpStatus st = s.run(max_iter);
    LpSolution sol = s.extract(st);
    s.export_basis(basis);
    return sol;
}

struct SimplexContext::Impl {
    LinearProgram prog;  // owned copy; bounds are overwritten per solve
    Simplex s;
    std::vector<double> base_cost;  // program objective, dense per column
    Basis last;               // basis the previous solve ended on
    bool state_valid = false;  // binv/vstat/basic describe `last`

    explicit Impl(const LinearProgram& p) : prog(p), s(prog), base_cost(s.cost) {}
};

SimplexContext::SimplexContext(const LinearProgram& lp) {
    lp.check_valid();
    impl = std::make_unique<Impl>(lp);
}
SimplexContext::~SimplexContext() = default;
SimplexContext::SimplexContext(SimplexContext&&) noexcept = default;
SimplexContext& SimplexContext::operator=(SimplexContext&&) noexcept = default;

LpSolution SimplexContext::solve(const std::vector<double>& lower,
                                 const std::vector<double>& upper,
                                 Basis& basis,
                                 const std::vector<double>* objective) {
    Impl& im = *impl;
    Simplex& s = im.s;
    if (static_cast<int>(lower.size()) != s.ns ||
        static_cast<int>(upper.size()) != s.ns)
        throw std::invalid_argument("simplex context: bound size mismatch");
    if (objective && static_cast<int>(objective->size()) != s.ns)
        throw std::invalid_argument("simplex context: objective size mismatch");
    for (int j = 0; j < s.ns; ++j) {
        s.lo[static_cast<size_t>(j)] = lower[static_cast<size_t>(j)];
        s.up[static_cast<size_t>(j)] = upper[static_cast<size_t>(j)];
    }
    if (objective) {
        for (int j = 0; j < s.ns; ++j)
            s.cost[static_cast<size_t>(j)] = (*objective)[static_cast<size_t>(j)];
    } else {
        s.cost = im.base_cost;
    }
    s.iterations = 0;
    s.degen_streak = 0;
    s.bland = false;

    bool incremental = im.state_valid && basis.basic == im.last.basic &&
                       basis.at_upper == im.last.at_upper;
    if (incremental) {
        // a nonbasic rest position can become meaningless when its bound
        // moved to infinity; park such columns on a valid default
        for (int j = 0; j < s.ns; ++j) {
            std::uint8_t st = s.vstat[static_cast<size_t>(j)];
            if (st == InBasis) continue;
            bool ok = (st == AtLower && std::isfinite(s.lo[j])) ||
                      (st == AtUpper && std::isfinite(s.up[j])) ||
                      (st == FreeAtZero && !std::isfinite(s.lo[j]) &&
                       !std::isfinite(s.up[j]));
            if (!ok) s.vstat[static_cast<size_t>(j)] = s.default_rest(j);
        }
    } else {
        im.state_valid = false;
        bool warm = s.adopt_basis(basis);
        if (warm && !s.refactorize()) warm = false;
        if (!warm) {
            s.cold_basis();
            if (!s.refactorize())
                throw std::runtime_error("simplex: singular start basis");
        }
    }
    s.compute_basic_values();
    long max_iter = 20000 + 200L * (s.m + s.ns);
    LpStatus st;
    try {
        st = s.run(max_iter);
    } catch (...) {
        im.state_valid = false;
        throw;
    }
    LpSolution sol = s.extract(st, /*clean=*/false);
    if (objective && sol.status == LpStatus::Optimal) {
        double obj = 0.0;
        for (int j = 0; j < s.ns; ++j)
            obj += (*objective)[static_cast<size_t>(j)] *
                   sol.x[static_cast<size_t>(j)];
        sol.objective_value = obj;
    }
    s.export_basis(basis);
    im.last = basis;
    im.state_valid = true;
    return sol;
}

void write_lp_format(const LinearProgram& lp, std::ostream& os) {
    char buf[64];
    auto num = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return std::string(buf);
    };
    auto name = [](int j) { return "x" + std::to_string(j); };

    os << "Minimize\n obj:";
    for (const auto& e : lp.objective)
        os << ' ' << (e.value >= 0 ? "+ " : "- ") << num(std::fabs(e.value))
           << ' ' << name(e.col);
    if (lp.objective.empty()) os << " 0 x0";
    os << "\nSubject To\n";
    for (size_t i = 0; i < lp.constraints.size(); ++i) {
        const auto& c = lp.constraints[i];
        os << " c" << i << ':';
        for (const auto& e : c.terms)
            os << ' ' << (e.value >= 0 ? "+ " : "- ") << num(std::fabs(e.value))
               << ' ' << name(e.col);
        switch (c.rel) {
            case Relation::LessEqual: os << " <= "; break;
            case Relation::GreaterEqual: os << " >= "; break;
            case Relation::Equal: os << " = "; break;
        }
        os << num(c.rhs) << '\n';
    }
    os << "Bounds\n";
    for (int j = 0; j < lp.n_vars; ++j) {
        if (lp.lower[j] == 0.0 && lp.upper[j] == kInfinity) continue;
        if (!std::isfinite(lp.lower[j]) && !std::isfinite(lp.upper[j])) {
            os << ' ' << name(j) << " free\n";
            continue;
        }
        os << ' ';
        if (std::isfinite(lp.lower[j])) os << num(lp.lower[j]) << " <= ";
        os << name(j);
        if (std::isfinite(lp.upper[j])) os << " <= " << num(lp.upper[j]);
        os << '\n';
    }
    os << "End\n";
}

}  // namespace flexplan
