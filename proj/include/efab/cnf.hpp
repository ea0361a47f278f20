// Tseitin CNF encoding of acyclic netlists, DIMACS export, solver loading.
#pragma once

#include "efab/analysis.hpp"
#include "efab/netlist.hpp"
#include "efab/solver.hpp"

#include <limits>
#include <ostream>

namespace efab {

// Clauses use DIMACS-signed literals (variable indices start at 1).
struct Cnf
{
    int num_vars = 0;
    std::vector<std::vector<int>> clauses;
    // one net->variable map per encoded circuit copy
    std::vector<std::unordered_map<NetId, int>> copies;

    int new_var() { return ++num_vars; }
    void add(std::vector<int> clause)
    {
        assert(!clause.empty());
        clauses.push_back(std::move(clause));
    }
};

namespace detail {

// Emits the clauses of one gate with output variable y (all DIMACS-signed).
template <typename AddFn> void gate_clauses(CellType t, int y, int a, int b, int s, AddFn add)
{
    switch (t) {
    case CellType::Const0:
        add({-y});
        break;
    case CellType::Const1:
        add({y});
        break;
    case CellType::Buf:
        add({-a, y});
        add({a, -y});
        break;
    case CellType::Inv:
        add({a, y});
        add({-a, -y});
        break;
    case CellType::And2:
        add({-y, a});
        add({-y, b});
        add({y, -a, -b});
        break;
    case CellType::Nand2:
        add({y, a});
        add({y, b});
        add({-y, -a, -b});
        break;
    case CellType::Or2:
        add({y, -a});
        add({y, -b});
        add({-y, a, b});
        break;
    case CellType::Nor2:
        add({-y, -a});
        add({-y, -b});
        add({y, a, b});
        break;
    case CellType::Xor2:
        add({-y, a, b});
        add({-y, -a, -b});
        add({y, -a, b});
        add({y, a, -b});
        break;
    case CellType::Xnor2:
        add({y, a, b});
        add({y, -a, -b});
        add({-y, -a, b});
        add({-y, a, -b});
        break;
    case CellType::Mux2:
        // y = s ? b : a
        add({s, -a, y});
        add({s, a, -y});
        add({-s, -b, y});
        add({-s, b, -y});
        break;
    default:
        throw NetlistError("gate_clauses: unsupported cell type");
    }
}

} // namespace detail

// Spec-faithful encoding: every net receives exactly one fresh variable; the
// map for this copy is appended to cnf.copies. Sequential cells are rejected
// (scan-model or expose keys first), cyclic netlists too.
inline int tseitin_into(Cnf &cnf, const Netlist &n)
{
    if (!is_acyclic(n))
        throw NetlistError("tseitin: netlist has a combinational cycle");
    std::unordered_map<NetId, int> vars;
    vars.reserve(n.num_nets());
    for (NetId id = 0; id < NetId(n.num_nets()); ++id)
        vars[id] = cnf.new_var();
    for (const Cell &c : n.cells()) {
        if (is_sequential(c.type))
            throw NetlistError("tseitin: sequential cell on net '" + n.net_name(c.out) + "'");
        int y = vars[c.out];
        int a = c.ins.size() > 0 ? vars[c.ins[0]] : 0;
        int b = c.ins.size() > 1 ? vars[c.ins[1]] : 0;
        int s = c.ins.size() > 2 ? vars[c.ins[2]] : 0;
        detail::gate_clauses(c.type, y, a, b, s, [&](std::vector<int> cl) { cnf.add(std::move(cl)); });
    }
    cnf.copies.push_back(std::move(vars));
    return int(cnf.copies.size()) - 1;
}

inline Cnf tseitin(const Netlist &n)
{
    Cnf cnf;
    tseitin_into(cnf, n);
    return cnf;
}

inline void write_dimacs(std::ostream &os, const Cnf &cnf)
{
    os << "p cnf " << cnf.num_vars << " " << cnf.clauses.size() << "\n";
    for (const auto &cl : cnf.clauses) {
        for (int l : cl)
            os << l << " ";
        os << "0\n";
    }
}

inline void load_into_solver(Solver &solver, const Cnf &cnf)
{
    while (solver.num_vars() < cnf.num_vars)
        solver.new_var();
    std::vector<Lit> lits;
    for (const auto &cl : cnf.clauses) {
        lits.clear();
        for (int d : cl)
            lits.push_back(lit_from_dimacs(d));
        solver.add_clause(lits);
    }
}

struct CnfSolveOutcome
{
    SolveResult result;
    std::vector<bool> model; // 1-based positions model[v-1]
};

inline CnfSolveOutcome solve_cnf(const Cnf &cnf, const std::vector<int> &assumptions = {},
                                 double timeout_s = std::numeric_limits<double>::infinity())
{
    Solver s;
    load_into_solver(s, cnf);
    std::vector<Lit> assume;
    for (int d : assumptions)
        assume.push_back(lit_from_dimacs(d));
    CnfSolveOutcome out;
    out.result = s.solve(assume, timeout_s);
    if (out.result == SolveResult::Sat) {
        out.model.resize(size_t(cnf.num_vars));
        for (int v = 1; v <= cnf.num_vars; ++v)
            out.model[size_t(v - 1)] = s.model_value(v - 1);
    }
    return out;
}

// --- lean incremental encoder used by the attack loop -------------------------

// A net is either a constant or a (possibly negated) solver literal.
struct NetLit
{
    bool is_const = false;
    bool const_val = false;
    Lit lit = lit_undef;

    static NetLit constant(bool v) { return {true, v, lit_undef}; }
    static NetLit of(Lit l) { return {false, false, l}; }
};

// Encodes `n` into `solver`, folding constants and aliasing BUF/INV chains so
// per-iteration attack copies stay small. `fixed` pins nets to constants (also
// valid for primary inputs); `shared` reuses existing literals for named nets.
// Returns the net -> NetLit map of this copy.
inline std::vector<NetLit> encode_into_solver(Solver &solver, const Netlist &n,
                                              const std::unordered_map<NetId, bool> &fixed = {},
                                              const std::unordered_map<NetId, NetLit> &shared = {})
{
    auto order = topological_order(n);
    if (!order)
        throw NetlistError("encode_into_solver: netlist has a combinational cycle");
    std::vector<NetLit> rep(n.num_nets());
    std::vector<bool> have(n.num_nets(), false);
    auto setrep = [&](NetId id, NetLit v) {
        rep[size_t(id)] = v;
        have[size_t(id)] = true;
    };
    for (const auto &[id, v] : shared)
        setrep(id, v);
    for (const auto &[id, v] : fixed)
        setrep(id, NetLit::constant(v));
    for (NetId in : n.inputs())
        if (!have[size_t(in)])
            setrep(in, NetLit::of(mk_lit(solver.new_var())));

    auto add3 = [&](Lit x, Lit y, Lit z) {
        std::vector<Lit> cl;
        if (x != lit_undef)
            cl.push_back(x);
        if (y != lit_undef)
            cl.push_back(y);
        if (z != lit_undef)
            cl.push_back(z);
        solver.add_clause(std::move(cl));
    };

    for (int32_t ci : *order) {
        const Cell &c = n.cells()[size_t(ci)];
        if (is_sequential(c.type))
            throw NetlistError("encode_into_solver: sequential cell on net '" + n.net_name(c.out) + "'");
        if (have[size_t(c.out)])
            continue; // pinned output: constraint added below
        NetLit in0 = c.ins.size() > 0 ? rep[size_t(c.ins[0])] : NetLit{};
        NetLit in1 = c.ins.size() > 1 ? rep[size_t(c.ins[1])] : NetLit{};
        NetLit sel = c.ins.size() > 2 ? rep[size_t(c.ins[2])] : NetLit{};

        // normalize: strip constants, reduce to Const / Alias / residual gate
        CellType t = c.type;
        auto alias = [&](NetLit v, bool invert) {
            if (v.is_const)
                setrep(c.out, NetLit::constant(v.const_val != invert));
            else
                setrep(c.out, NetLit::of(invert ? neg_lit(v.lit) : v.lit));
        };
        switch (t) {
        case CellType::Const0:
            setrep(c.out, NetLit::constant(false));
            continue;
        case CellType::Const1:
            setrep(c.out, NetLit::constant(true));
            continue;
        case CellType::Buf:
            alias(in0, false);
            continue;
        case CellType::Inv:
            alias(in0, true);
            continue;
        case CellType::Mux2:
            if (sel.is_const) {
                alias(sel.const_val ? in1 : in0, false);
                continue;
            }
            if (in0.is_const && in1.is_const) {
                if (in0.const_val == in1.const_val) {
                    setrep(c.out, NetLit::constant(in0.const_val));
                    continue;
                }
                // y = sel or ~sel
                alias(sel, !in1.const_val);
                continue;
            }
            break;
        default:
            if (in0.is_const || in1.is_const) {
                bool cv = in0.is_const ? in0.const_val : in1.const_val;
                NetLit other = in0.is_const ? in1 : in0;
                switch (t) {
                case CellType::And2:
                    cv ? alias(other, false) : (void)setrep(c.out, NetLit::constant(false));
                    continue;
                case CellType::Nand2:
                    cv ? alias(other, true) : (void)setrep(c.out, NetLit::constant(true));
                    continue;
                case CellType::Or2:
                    cv ? (void)setrep(c.out, NetLit::constant(true)) : alias(other, false);
                    continue;
                case CellType::Nor2:
                    cv ? (void)setrep(c.out, NetLit::constant(false)) : alias(other, true);
                    continue;
                case CellType::Xor2:
                    alias(other, cv);
                    continue;
                case CellType::Xnor2:
                    alias(other, !cv);
                    continue;
                default:
                    break;
                }
            }
            break;
        }

        // residual gate over live literals
        Lit y = mk_lit(solver.new_var());
        Lit a = in0.is_const ? lit_undef : in0.lit;
        Lit b = in1.is_const ? lit_undef : in1.lit;
        if (t == CellType::Mux2) {
            Lit s = sel.lit;
            // one data leg may still be constant here
            if (in0.is_const) {
                // sel=0 -> y=c0 ; sel=1 -> y=b
                in0.const_val ? add3(s, y, lit_undef) : add3(s, neg_lit(y), lit_undef);
                add3(neg_lit(s), neg_lit(b), y);
                add3(neg_lit(s), b, neg_lit(y));
            } else if (in1.is_const) {
                in1.const_val ? add3(neg_lit(s), y, lit_undef) : add3(neg_lit(s), neg_lit(y), lit_undef);
                add3(s, neg_lit(a), y);
                add3(s, a, neg_lit(y));
            } else {
                add3(s, neg_lit(a), y);
                add3(s, a, neg_lit(y));
                add3(neg_lit(s), neg_lit(b), y);
                add3(neg_lit(s), b, neg_lit(y));
            }
        } else {
            // both operands are live literals here; bridge through the shared
            // DIMACS gate templates
            int yd = lit_to_dimacs(y);
            int ad = lit_to_dimacs(a);
            int bd = lit_to_dimacs(b);
            detail::gate_clauses(t, yd, ad, bd, 0, [&](std::vector<int> cl) {
                std::vector<Lit> lits;
                lits.reserve(cl.size());
                for (int dl : cl)
                    lits.push_back(lit_from_dimacs(dl));
                solver.add_clause(std::move(lits));
            });
        }
        setrep(c.out, NetLit::of(y));
    }
    return rep;
}

// Asserts net == value against an encoding map; returns false if the net folded
// to the opposite constant (the constraint set is then unsatisfiable).
inline bool assert_net_equals(Solver &solver, const std::vector<NetLit> &rep, NetId net, bool value)
{
    const NetLit &r = rep.at(size_t(net));
    if (r.is_const)
        return r.const_val == value;
    solver.add_clause({value ? r.lit : neg_lit(r.lit)});
    return true;
}

} // namespace efab
