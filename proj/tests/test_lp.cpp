#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>

#include "flexplan/lp.hpp"

using namespace flexplan;

namespace {

// Independent check: enumerate every basic solution of the slacked system
// and keep the best feasible one.  Only usable on small, fully bounded LPs.
struct OracleResult {
    bool feasible = false;
    double objective = 0;
};

bool solve_dense(std::vector<std::vector<double>> A, std::vector<double> b,
                 std::vector<double>& out) {
    const int m = static_cast<int>(b.size());
    for (int c = 0; c < m; ++c) {
        int piv = -1;
        double best = 1e-9;
        for (int r = c; r < m; ++r)
            if (std::fabs(A[r][c]) > best) best = std::fabs(A[r][c]), piv = r;
        if (piv < 0) return false;
        std::swap(A[c], A[piv]);
        std::swap(b[c], b[piv]);
        double d = A[c][c];
        for (int k = 0; k < m; ++k) A[c][k] /= d;
        b[c] /= d;
        for (int r = 0; r < m; ++r) {
            if (r == c || A[r][c] == 0) continue;
            double f = A[r][c];
            for (int k = 0; k < m; ++k) A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    out = b;
    return true;
}

OracleResult enumerate_lp(const LinearProgram& lp) {
    const int n = lp.n_vars;
    const int m = static_cast<int>(lp.constraints.size());
    const int total = n + m;

    // slacked equality form: row i gets slack with sign-restricted bounds
    std::vector<double> lo(lp.lower), up(lp.upper);
    for (const auto& c : lp.constraints) {
        switch (c.rel) {
            case Relation::LessEqual: lo.push_back(0); up.push_back(kInfinity); break;
            case Relation::GreaterEqual: lo.push_back(-kInfinity); up.push_back(0); break;
            case Relation::Equal: lo.push_back(0); up.push_back(0); break;
        }
    }
    std::vector<std::vector<double>> rows(m, std::vector<double>(total, 0.0));
    std::vector<double> rhs(m);
    for (int i = 0; i < m; ++i) {
        for (const auto& e : lp.constraints[i].terms) rows[i][e.col] += e.value;
        rows[i][n + i] = 1.0;
        rhs[i] = lp.constraints[i].rhs;
    }
    std::vector<double> cost(total, 0.0);
    for (const auto& e : lp.objective) cost[e.col] += e.value;

    OracleResult res;
    std::vector<int> pick(m);
    std::vector<int> nonbasic;

    std::function<void(int, int)> choose = [&](int start, int k) {
        if (k == m) {
            nonbasic.clear();
            std::vector<char> in_basis(total, 0);
            for (int j : pick) in_basis[j] = 1;
            for (int j = 0; j < total; ++j)
                if (!in_basis[j]) nonbasic.push_back(j);
            const int nn = static_cast<int>(nonbasic.size());
            // every nonbasic rests at one of its finite bounds
            for (long mask = 0; mask < (1L << nn); ++mask) {
                std::vector<double> xN(nn);
                bool ok = true;
                for (int q = 0; q < nn && ok; ++q) {
                    int j = nonbasic[q];
                    double v = (mask >> q) & 1 ? up[j] : lo[j];
                    if (!std::isfinite(v)) ok = false;
                    xN[q] = v;
                }
                if (!ok) continue;
                std::vector<std::vector<double>> B(m, std::vector<double>(m));
                std::vector<double> d(rhs);
                for (int i = 0; i < m; ++i) {
                    for (int c = 0; c < m; ++c) B[i][c] = rows[i][pick[c]];
                    for (int q = 0; q < nn; ++q) d[i] -= rows[i][nonbasic[q]] * xN[q];
                }
                std::vector<double> xB;
                if (!solve_dense(B, d, xB)) continue;
                bool feas = true;
                for (int c = 0; c < m && feas; ++c)
                    if (xB[c] < lo[pick[c]] - 1e-7 || xB[c] > up[pick[c]] + 1e-7)
                        feas = false;
                if (!feas) continue;
                double obj = 0;
                for (int c = 0; c < m; ++c) obj += cost[pick[c]] * xB[c];
                for (int q = 0; q < nn; ++q) obj += cost[nonbasic[q]] * xN[q];
                if (!res.feasible || obj < res.objective) {
                    res.feasible = true;
                    res.objective = obj;
                }
            }
            return;
        }
        for (int j = start; j <= total - (m - k); ++j) {
            pick[k] = j;
            choose(j + 1, k + 1);
        }
    };
    if (m > 0)
        choose(0, 0);
    else {
        // no rows: optimum sits at the cost-minimizing bound of each variable
        res.feasible = true;
        for (int j = 0; j < n; ++j)
            res.objective += cost[j] * (cost[j] >= 0 ? lo[j] : up[j]);
    }
    return res;
}

LinearProgram random_bounded_lp(std::mt19937& rng) {
    std::uniform_int_distribution<int> nd(2, 5), md(1, 4);
    std::uniform_real_distribution<double> coef(-3.0, 3.0), ubd(0.5, 4.0);
    std::uniform_int_distribution<int> reld(0, 2), sparsity(0, 2);

    LinearProgram lp;
    int n = nd(rng), m = md(rng);
    for (int j = 0; j < n; ++j) lp.add_variable(0.0, ubd(rng));
    for (int j = 0; j < n; ++j) lp.set_objective(j, coef(rng));
    for (int i = 0; i < m; ++i) {
        Relation rel = static_cast<Relation>(reld(rng));
        auto& row = lp.add_constraint(rel, coef(rng));
        for (int j = 0; j < n; ++j)
            if (sparsity(rng) != 0) row.terms.push_back({j, coef(rng)});
        if (row.terms.empty()) row.terms.push_back({0, 1.0});
    }
    return lp;
}

}  // namespace

TEST_CASE("textbook two-variable optimum") {
    LinearProgram lp;
    lp.add_variable(0, 1);
    lp.add_variable(0, 1);
    lp.set_objective(0, -1);
    lp.set_objective(1, -1);
    auto& row = lp.add_constraint(Relation::LessEqual, 1.0);
    row.terms = {{0, 1.0}, {1, 1.0}};

    auto sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    CHECK(sol.objective_value == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(sol.x[0] + sol.x[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("equality and free-ish variables") {
    // min x + 2y  s.t. x + y = 3, x - y >= -1, x,y in [0, 10]
    LinearProgram lp;
    lp.add_variable(0, 10);
    lp.add_variable(0, 10);
    lp.set_objective(0, 1);
    lp.set_objective(1, 2);
    lp.add_constraint(Relation::Equal, 3.0).terms = {{0, 1.0}, {1, 1.0}};
    lp.add_constraint(Relation::GreaterEqual, -1.0).terms = {{0, 1.0}, {1, -1.0}};
    auto sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::Optimal);
    // y is expensive: push x up to 3 within the second row's limit
    CHECK(sol.x[0] == doctest::Approx(3.0));
    CHECK(sol.x[1] == doctest::Approx(0.0));
    CHECK(sol.objective_value == doctest::Approx(3.0));
}

TEST_CASE("infeasible bounds vs constraint") {
    LinearProgram lp;
    lp.add_variable(0, kInfinity);
    lp.add_constraint(Relation::LessEqual, -1.0).terms = {{0, 1.0}};
    auto sol = solve_lp(lp);
    CHECK(sol.status == LpStatus::Infeasible);
}

TEST_CASE("unbounded below") {
    LinearProgram lp;
    lp.add_variable(0, kInfinity);
    lp.set_objective(0, -1);
    lp.add_constraint(Relation::GreaterEqual, 1.0).terms = {{0, 1.0}};
    auto sol = solve_lp(lp);
    CHECK(sol.status == LpStatus::Unbounded);
}

TEST_CASE("randomized instances agree with basis enumeration") {
    std::mt19937 rng(20260823);
    int optimal_seen = 0, infeasible_seen = 0;
    for (int it = 0; it < 120; ++it) {
        LinearProgram lp = random_bounded_lp(rng);
        lp.check_valid();
        auto sol = solve_lp(lp);
        auto oracle = enumerate_lp(lp);
        INFO("instance ", it);
        if (oracle.feasible) {
            ++optimal_seen;
            REQUIRE(sol.status == LpStatus::Optimal);
            CHECK(sol.objective_value ==
                  doctest::Approx(oracle.objective).epsilon(1e-7));
            // and the reported point really attains the reported value
            double obj = 0;
            for (const auto& e : lp.objective) obj += e.value * sol.x[e.col];
            CHECK(obj == doctest::Approx(sol.objective_value).epsilon(1e-7));
        } else {
            ++infeasible_seen;
            REQUIRE(sol.status == LpStatus::Infeasible);
        }
    }
    CHECK(optimal_seen > 30);
    CHECK(infeasible_seen > 5);
}

TEST_CASE("primal feasibility of reported optima") {
    std::mt19937 rng(7);
    for (int it = 0; it < 60; ++it) {
        LinearProgram lp = random_bounded_lp(rng);
        auto sol = solve_lp(lp);
        if (sol.status != LpStatus::Optimal) continue;
        for (int j = 0; j < lp.n_vars; ++j) {
            CHECK(sol.x[j] >= lp.lower[j] - 1e-7);
            CHECK(sol.x[j] <= lp.upper[j] + 1e-7);
        }
        for (const auto& c : lp.constraints) {
            double lhs = 0;
            for (const auto& e : c.terms) lhs += e.value * sol.x[e.col];
            switch (c.rel) {
                case Relation::LessEqual: CHECK(lhs <= c.rhs + 1e-6); break;
                case Relation::GreaterEqual: CHECK(lhs >= c.rhs - 1e-6); break;
                case Relation::Equal:
                    CHECK(lhs == doctest::Approx(c.rhs).epsilon(1e-6).scale(1));
                    break;
            }
        }
    }
}

TEST_CASE("re-solving is bit-identical") {
    std::mt19937 rng(99);
    LinearProgram lp = random_bounded_lp(rng);
    auto a = solve_lp(lp);
    auto b = solve_lp(lp);
    REQUIRE(a.status == b.status);
    REQUIRE(a.x.size() == b.x.size());
    for (size_t j = 0; j < a.x.size(); ++j) CHECK(a.x[j] == b.x[j]);
    CHECK(a.objective_value == b.objective_value);
}

TEST_CASE("warm start after appending a row matches a cold solve") {
    std::mt19937 rng(1234);
    for (int it = 0; it < 30; ++it) {
        LinearProgram lp = random_bounded_lp(rng);
        Basis basis;
        auto first = solve_lp(lp, basis);
        if (first.status != LpStatus::Optimal) continue;

        // cut off the current optimum slightly
        auto& row = lp.add_constraint(Relation::LessEqual, 0.0);
        double rhs = 0;
        for (int j = 0; j < lp.n_vars; ++j) {
            row.terms.push_back({j, 1.0});
            rhs += first.x[j];
        }
        row.rhs = rhs * 0.9;

        auto warm = solve_lp(lp, basis);
        auto cold = solve_lp(lp);
        REQUIRE(warm.status == cold.status);
        if (warm.status == LpStatus::Optimal)
            CHECK(warm.objective_value ==
                  doctest::Approx(cold.objective_value).epsilon(1e-7));
    }
}

TEST_CASE("lp text dump mentions every section") {
    LinearProgram lp;
    lp.add_variable(0, 2);
    lp.set_objective(0, 1.5);
    lp.add_constraint(Relation::LessEqual, 1.0).terms = {{0, 1.0}};
    std::ostringstream os;
    write_lp_format(lp, os);
    std::string text = os.str();
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("Subject To") != std::string::npos);
    CHECK(text.find("Bounds") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
}

TEST_CASE("invalid programs are rejected") {
    LinearProgram lp;
    lp.add_variable(0, 1);
    lp.set_objective(0, std::numeric_limits<double>::quiet_NaN());
    CHECK_THROWS_AS(lp.check_valid(), std::invalid_argument);

    LinearProgram lp2;
    lp2.add_variable(0, 1);
    lp2.add_constraint(Relation::LessEqual, 1.0).terms = {{3, 1.0}};
    CHECK_THROWS_AS(lp2.check_valid(), std::invalid_argument);
}
