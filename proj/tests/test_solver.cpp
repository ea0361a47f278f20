#include <catch2/catch_amalgamated.hpp>

#include "efab/solver.hpp"

#include <random>

using namespace efab;

TEST_CASE("empty and unit clauses")
{
    Solver s;
    Var a = s.new_var();
    REQUIRE(s.solve() == SolveResult::Sat);
    REQUIRE(s.add_clause({mk_lit(a)}));
    REQUIRE(s.solve() == SolveResult::Sat);
    REQUIRE(s.model_value(a) == true);
    REQUIRE_FALSE(s.add_clause({mk_lit(a, true)}));
    REQUIRE(s.solve() == SolveResult::Unsat);
}

TEST_CASE("small implication chain")
{
    Solver s;
    Var a = s.new_var(), b = s.new_var(), c = s.new_var();
    s.add_clause({mk_lit(a, true), mk_lit(b)});  // a -> b
    s.add_clause({mk_lit(b, true), mk_lit(c)});  // b -> c
    s.add_clause({mk_lit(a)});
    REQUIRE(s.solve() == SolveResult::Sat);
    REQUIRE(s.model_value(b));
    REQUIRE(s.model_value(c));
    s.add_clause({mk_lit(c, true)});
    REQUIRE(s.solve() == SolveResult::Unsat);
}

TEST_CASE("assumptions select branches without committing")
{
    Solver s;
    Var a = s.new_var(), b = s.new_var();
    s.add_clause({mk_lit(a), mk_lit(b)});
    REQUIRE(s.solve({mk_lit(a, true)}) == SolveResult::Sat);
    REQUIRE(s.model_value(b));
    REQUIRE(s.solve({mk_lit(b, true)}) == SolveResult::Sat);
    REQUIRE(s.model_value(a));
    REQUIRE(s.solve({mk_lit(a, true), mk_lit(b, true)}) == SolveResult::Unsat);
    // nothing was committed
    REQUIRE(s.solve() == SolveResult::Sat);
}

namespace {

// pigeonhole principle: n+1 pigeons, n holes, UNSAT
void add_php(Solver &s, int holes)
{
    int pigeons = holes + 1;
    std::vector<std::vector<Var>> v;
    v.assign(size_t(pigeons), std::vector<Var>(size_t(holes), 0));
    for (auto &row : v)
        for (auto &x : row)
            x = s.new_var();
    for (int p = 0; p < pigeons; ++p) {
        std::vector<Lit> cl;
        for (int h = 0; h < holes; ++h)
            cl.push_back(mk_lit(v[size_t(p)][size_t(h)]));
        s.add_clause(cl);
    }
    for (int h = 0; h < holes; ++h)
        for (int p1 = 0; p1 < pigeons; ++p1)
            for (int p2 = p1 + 1; p2 < pigeons; ++p2)
                s.add_clause({mk_lit(v[size_t(p1)][size_t(h)], true), mk_lit(v[size_t(p2)][size_t(h)], true)});
}

} // namespace

TEST_CASE("pigeonhole is refuted")
{
    Solver s;
    add_php(s, 6);
    REQUIRE(s.solve() == SolveResult::Unsat);
    REQUIRE(s.num_conflicts() > 0);
}

TEST_CASE("timeout is reported on a hard instance")
{
    Solver s;
    add_php(s, 11);
    REQUIRE(s.solve({}, 0.02) == SolveResult::Timeout);
}

TEST_CASE("planted random 3-SAT instances are solved and models verify")
{
    std::mt19937 rng(99);
    for (int round = 0; round < 20; ++round) {
        int nv = 30 + int(rng() % 40);
        int nc = int(4.0 * nv);
        std::vector<bool> planted;
        planted.assign(size_t(nv), false);
        for (size_t i = 0; i < planted.size(); ++i)
            planted[i] = rng() & 1;
        Solver s;
        for (int i = 0; i < nv; ++i)
            s.new_var();
        std::vector<std::vector<Lit>> clauses;
        for (int i = 0; i < nc; ++i) {
            std::vector<Lit> cl;
            for (int j = 0; j < 3; ++j) {
                Var v = Var(rng() % uint32_t(nv));
                cl.push_back(mk_lit(v, rng() & 1));
            }
            // flip one literal if the planted assignment falsifies the clause
            bool sat = false;
            for (Lit l : cl)
                sat = sat || (planted[size_t(lit_var(l))] != lit_sign(l));
            if (!sat)
                cl[0] = neg_lit(cl[0]);
            clauses.push_back(cl);
            s.add_clause(cl);
        }
        REQUIRE(s.solve() == SolveResult::Sat);
        for (const auto &cl : clauses) {
            bool sat = false;
            for (Lit l : cl)
                sat = sat || (s.model_value(lit_var(l)) != lit_sign(l));
            REQUIRE(sat);
        }
    }
}

TEST_CASE("incremental clause addition after solving")
{
    Solver s;
    std::vector<Var> vars;
    for (int i = 0; i < 8; ++i)
        vars.push_back(s.new_var());
    // exactly-one over 8 vars, then exclude models one by one
    std::vector<Lit> all;
    for (Var v : vars)
        all.push_back(mk_lit(v));
    s.add_clause(all);
    for (size_t i = 0; i < vars.size(); ++i)
        for (size_t j = i + 1; j < vars.size(); ++j)
            s.add_clause({mk_lit(vars[i], true), mk_lit(vars[j], true)});
    int models = 0;
    while (s.solve() == SolveResult::Sat) {
        ++models;
        std::vector<Lit> block;
        for (Var v : vars)
            block.push_back(mk_lit(v, s.model_value(v)));
        s.add_clause(block);
        REQUIRE(models <= 8);
    }
    REQUIRE(models == 8);
}

TEST_CASE("solver runs are deterministic")
{
    auto run = [](unsigned seed) {
        std::mt19937 rng(seed);
        Solver s;
        for (int i = 0; i < 50; ++i)
            s.new_var();
        for (int i = 0; i < 180; ++i) {
            std::vector<Lit> cl;
            for (int j = 0; j < 3; ++j)
                cl.push_back(mk_lit(Var(rng() % 50), rng() & 1));
            s.add_clause(cl);
        }
        if (s.solve() != SolveResult::Sat)
            return std::vector<bool>{};
        std::vector<bool> model;
        for (Var v = 0; v < 50; ++v)
            model.push_back(s.model_value(v));
        return model;
    };
    REQUIRE(run(5) == run(5));
    REQUIRE(run(17) == run(17));
}
