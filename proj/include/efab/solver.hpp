// Conflict-driven clause-learning SAT solver with incremental clause addition
// and solving under assumptions. The design follows the classic two-watched-
// literal scheme: first-UIP learning, VSIDS branching, phase saving, Luby
// restarts and activity-based learnt-clause reduction. No randomization, so
// runs are reproducible for a fixed clause/variable order.
#pragma once

#include <algorithm>
#include <bit>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace efab {

using Var = int32_t;
using Lit = int32_t; // 2*var + sign, sign 1 = negated

constexpr Lit lit_undef = -1;

inline Lit mk_lit(Var v, bool neg = false) { return 2 * v + (neg ? 1 : 0); }
inline Lit neg_lit(Lit l) { return l ^ 1; }
inline Var lit_var(Lit l) { return l >> 1; }
inline bool lit_sign(Lit l) { return l & 1; }

// DIMACS-style signed integer form (1-based).
inline int lit_to_dimacs(Lit l) { return lit_sign(l) ? -(lit_var(l) + 1) : (lit_var(l) + 1); }
inline Lit lit_from_dimacs(int d) { return d > 0 ? mk_lit(d - 1, false) : mk_lit(-d - 1, true); }

enum class SolveResult { Sat, Unsat, Timeout };

class Solver
{
    enum LB : int8_t { LB_False = 0, LB_True = 1, LB_Undef = 2 };
    using CRef = int32_t;
    static constexpr CRef cref_undef = -1;

    // Clause layout in arena_: [header, lit0, lit1, ...]
    // header = (size << 2) | (learnt << 1) | deleted
    struct Watcher
    {
        CRef cref;
        Lit blocker;
    };

  public:
    Solver() = default;

    Var new_var()
    {
        Var v = num_vars_++;
        assigns_.push_back(LB_Undef);
        polarity_.push_back(true); // default phase: false (sign=true)
        activity_.push_back(0.0);
        level_.push_back(0);
        reason_.push_back(cref_undef);
        seen_.push_back(0);
        watches_.emplace_back();
        watches_.emplace_back();
        heap_insert(v);
        return v;
    }

    int num_vars() const { return num_vars_; }
    int64_t num_clauses() const { return num_problem_clauses_; }
    int64_t num_conflicts() const { return conflicts_; }
    int64_t num_decisions() const { return decisions_; }
    int64_t num_propagations() const { return propagations_; }

    bool okay() const { return ok_; }

    // Returns false when the clause set became unsatisfiable at level 0.
    bool add_clause(std::vector<Lit> lits)
    {
        assert(decision_level() == 0);
        if (!ok_)
            return false;
        ++num_problem_clauses_;
        std::sort(lits.begin(), lits.end());
        Lit prev = lit_undef;
        size_t j = 0;
        for (size_t i = 0; i < lits.size(); ++i) {
            Lit l = lits[i];
            assert(lit_var(l) < num_vars_);
            if (value(l) == LB_True || l == neg_lit(prev))
                return true; // satisfied or tautological
            if (value(l) != LB_False && l != prev)
                lits[j++] = prev = l;
        }
        lits.resize(j);
        if (lits.empty())
            return ok_ = false;
        if (lits.size() == 1) {
            unchecked_enqueue(lits[0], cref_undef);
            return ok_ = (propagate() == cref_undef);
        }
        CRef cr = alloc_clause(lits, false);
        attach_clause(cr);
        return true;
    }

    SolveResult solve(const std::vector<Lit> &assumptions = {},
                      double timeout_s = std::numeric_limits<double>::infinity())
    {
        model_.clear();
        cancel_until(0);
        if (!ok_)
            return SolveResult::Unsat;
        assumptions_ = assumptions;
        has_deadline_ = std::isfinite(timeout_s);
        if (has_deadline_)
            deadline_ = std::chrono::steady_clock::now() +
                        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                std::chrono::duration<double>(timeout_s));

        SolveResult result;
        int restarts = 0;
        for (;;) {
            int64_t budget = 100 * luby(2.0, restarts++);
            result = search(budget);
            if (result != SolveResult::Timeout || out_of_time())
                break;
            cancel_until(0); // restart
        }
        if (result == SolveResult::Sat) {
            model_.resize(size_t(num_vars_));
            for (Var v = 0; v < num_vars_; ++v)
                model_[size_t(v)] = (assigns_[size_t(v)] == LB_True);
        }
        cancel_until(0);
        return result;
    }

    // Valid after solve() returned Sat.
    bool model_value(Var v) const { return model_.at(size_t(v)); }
    bool model_value_lit(Lit l) const { return model_.at(size_t(lit_var(l))) != lit_sign(l); }

  private:
    // --- state ---------------------------------------------------------------
    bool ok_ = true;
    int num_vars_ = 0;
    int64_t num_problem_clauses_ = 0;
    std::vector<int32_t> arena_;
    std::vector<CRef> learnts_;
    std::vector<std::vector<Watcher>> watches_; // indexed by literal
    std::vector<int8_t> assigns_;
    std::vector<int8_t> polarity_;
    std::vector<double> activity_;
    std::vector<int32_t> level_;
    std::vector<CRef> reason_;
    std::vector<int8_t> seen_;
    std::vector<Lit> trail_;
    std::vector<int32_t> trail_lim_;
    size_t qhead_ = 0;
    std::vector<Lit> assumptions_;
    std::vector<bool> model_;

    std::vector<Var> heap_;
    std::vector<int32_t> heap_pos_; // -1 when absent

    double var_inc_ = 1.0;
    double cla_inc_ = 1.0;
    static constexpr double var_decay_ = 0.95;
    static constexpr double cla_decay_ = 0.999;
    int64_t conflicts_ = 0, decisions_ = 0, propagations_ = 0;
    int64_t max_learnts_ = 8192;

    std::chrono::steady_clock::time_point deadline_;
    bool has_deadline_ = false;

    // --- clause arena ---------------------------------------------------------
    int32_t &header(CRef cr) { return arena_[size_t(cr)]; }
    int clause_size(CRef cr) const { return arena_[size_t(cr)] >> 2; }
    bool clause_learnt(CRef cr) const { return (arena_[size_t(cr)] >> 1) & 1; }
    bool clause_deleted(CRef cr) const { return arena_[size_t(cr)] & 1; }
    Lit *clause_lits(CRef cr) { return reinterpret_cast<Lit *>(&arena_[size_t(cr) + 1]); }
    const Lit *clause_lits(CRef cr) const { return reinterpret_cast<const Lit *>(&arena_[size_t(cr) + 1]); }
    // learnt activity kept as a float in the slot after the literals
    float clause_act(CRef cr) const { return std::bit_cast<float>(arena_[size_t(cr) + 1 + size_t(clause_size(cr))]); }
    void set_clause_act(CRef cr, float a) { arena_[size_t(cr) + 1 + size_t(clause_size(cr))] = std::bit_cast<int32_t>(a); }

    CRef alloc_clause(const std::vector<Lit> &lits, bool learnt)
    {
        CRef cr = CRef(arena_.size());
        int sz = int(lits.size());
        arena_.resize(arena_.size() + 1 + size_t(sz) + (learnt ? 1 : 0));
        header(cr) = (sz << 2) | (learnt ? 2 : 0);
        std::copy(lits.begin(), lits.end(), clause_lits(cr));
        if (learnt) {
            set_clause_act(cr, 0.0f);
            learnts_.push_back(cr);
        }
        return cr;
    }

    void attach_clause(CRef cr)
    {
        const Lit *c = clause_lits(cr);
        assert(clause_size(cr) >= 2);
        watches_[size_t(neg_lit(c[0]))].push_back({cr, c[1]});
        watches_[size_t(neg_lit(c[1]))].push_back({cr, c[0]});
    }

    void detach_clause(CRef cr)
    {
        const Lit *c = clause_lits(cr);
        for (int i = 0; i < 2; ++i) {
            auto &ws = watches_[size_t(neg_lit(c[i]))];
            for (size_t j = 0; j < ws.size(); ++j)
                if (ws[j].cref == cr) {
                    ws[j] = ws.back();
                    ws.pop_back();
                    break;
                }
        }
    }

    // --- assignment -----------------------------------------------------------
    LB value(Lit l) const
    {
        LB a = LB(assigns_[size_t(lit_var(l))]);
        if (a == LB_Undef)
            return LB_Undef;
        return (a == LB_True) != lit_sign(l) ? LB_True : LB_False;
    }

    int decision_level() const { return int(trail_lim_.size()); }

    void unchecked_enqueue(Lit l, CRef from)
    {
        Var v = lit_var(l);
        assert(assigns_[size_t(v)] == LB_Undef);
        assigns_[size_t(v)] = lit_sign(l) ? LB_False : LB_True;
        polarity_[size_t(v)] = lit_sign(l);
        level_[size_t(v)] = decision_level();
        reason_[size_t(v)] = from;
        trail_.push_back(l);
    }

    void cancel_until(int lvl)
    {
        if (decision_level() <= lvl)
            return;
        for (size_t i = trail_.size(); i > size_t(trail_lim_[size_t(lvl)]);) {
            Var v = lit_var(trail_[--i]);
            assigns_[size_t(v)] = LB_Undef;
            reason_[size_t(v)] = cref_undef;
            if (heap_pos_[size_t(v)] < 0)
                heap_insert(v);
        }
        trail_.resize(size_t(trail_lim_[size_t(lvl)]));
        trail_lim_.resize(size_t(lvl));
        qhead_ = trail_.size();
    }

    // --- propagation ----------------------------------------------------------
    CRef propagate()
    {
        CRef conflict = cref_undef;
        while (qhead_ < trail_.size()) {
            Lit p = trail_[qhead_++];
            ++propagations_;
            auto &ws = watches_[size_t(p)];
            size_t i = 0, j = 0;
            while (i < ws.size()) {
                Watcher w = ws[i];
                if (value(w.blocker) == LB_True) {
                    ws[j++] = ws[i++];
                    continue;
                }
                CRef cr = w.cref;
                Lit *c = clause_lits(cr);
                int sz = clause_size(cr);
                Lit false_lit = neg_lit(p);
                if (c[0] == false_lit)
                    std::swap(c[0], c[1]);
                assert(c[1] == false_lit);
                ++i;
                Lit first = c[0];
                if (first != w.blocker && value(first) == LB_True) {
                    ws[j++] = {cr, first};
                    continue;
                }
                bool moved = false;
                for (int k = 2; k < sz; ++k)
                    if (value(c[k]) != LB_False) {
                        std::swap(c[1], c[k]);
                        watches_[size_t(neg_lit(c[1]))].push_back({cr, first});
                        moved = true;
                        break;
                    }
                if (moved)
                    continue;
                // unit or conflicting
                ws[j++] = {cr, first};
                if (value(first) == LB_False) {
                    conflict = cr;
                    qhead_ = trail_.size();
                    while (i < ws.size())
                        ws[j++] = ws[i++];
                } else {
                    unchecked_enqueue(first, cr);
                }
            }
            ws.resize(j);
            if (conflict != cref_undef)
                break;
        }
        return conflict;
    }

    // --- conflict analysis ------------------------------------------------------
    void analyze(CRef conflict, std::vector<Lit> &out_learnt, int &out_btlevel)
    {
        out_learnt.clear();
        out_learnt.push_back(lit_undef); // slot for the asserting literal
        int path_count = 0;
        Lit p = lit_undef;
        size_t index = trail_.size();

        CRef cr = conflict;
        do {
            assert(cr != cref_undef);
            if (clause_learnt(cr))
                bump_clause(cr);
            Lit *c = clause_lits(cr);
            int sz = clause_size(cr);
            for (int k = (p == lit_undef ? 0 : 1); k < sz; ++k) {
                Lit q = c[k];
                Var v = lit_var(q);
                if (!seen_[size_t(v)] && level_[size_t(v)] > 0) {
                    seen_[size_t(v)] = 1;
                    bump_var(v);
                    if (level_[size_t(v)] >= decision_level())
                        ++path_count;
                    else
                        out_learnt.push_back(q);
                }
            }
            while (!seen_[size_t(lit_var(trail_[index - 1]))])
                --index;
            p = trail_[--index];
            cr = reason_[size_t(lit_var(p))];
            seen_[size_t(lit_var(p))] = 0;
            --path_count;
        } while (path_count > 0);
        out_learnt[0] = neg_lit(p);

        // cheap self-subsumption minimization; seen_ stays set for removed
        // literals until the final cleanup below
        std::vector<Lit> to_clear(out_learnt);
        size_t j = 1;
        for (size_t i = 1; i < out_learnt.size(); ++i) {
            Lit q = out_learnt[i];
            CRef r = reason_[size_t(lit_var(q))];
            bool redundant = false;
            if (r != cref_undef) {
                redundant = true;
                const Lit *rc = clause_lits(r);
                for (int k = 0; k < clause_size(r); ++k) {
                    Var v = lit_var(rc[k]);
                    if (v != lit_var(q) && !seen_[size_t(v)] && level_[size_t(v)] > 0) {
                        redundant = false;
                        break;
                    }
                }
            }
            if (!redundant)
                out_learnt[j++] = q;
        }
        out_learnt.resize(j);

        out_btlevel = 0;
        if (out_learnt.size() > 1) {
            size_t max_i = 1;
            for (size_t i = 2; i < out_learnt.size(); ++i)
                if (level_[size_t(lit_var(out_learnt[i]))] > level_[size_t(lit_var(out_learnt[max_i]))])
                    max_i = i;
            std::swap(out_learnt[1], out_learnt[max_i]);
            out_btlevel = level_[size_t(lit_var(out_learnt[1]))];
        }
        for (Lit l : to_clear)
            seen_[size_t(lit_var(l))] = 0;
    }

    // --- activity --------------------------------------------------------------
    void bump_var(Var v)
    {
        activity_[size_t(v)] += var_inc_;
        if (activity_[size_t(v)] > 1e100) {
            for (Var u = 0; u < num_vars_; ++u)
                activity_[size_t(u)] *= 1e-100;
            var_inc_ *= 1e-100;
        }
        if (heap_pos_[size_t(v)] >= 0)
            heap_up(heap_pos_[size_t(v)]);
    }
    void bump_clause(CRef cr)
    {
        set_clause_act(cr, clause_act(cr) + float(cla_inc_));
        if (clause_act(cr) > 1e20f) {
            for (CRef l : learnts_)
                if (!clause_deleted(l))
                    set_clause_act(l, clause_act(l) * 1e-20f);
            cla_inc_ *= 1e-20;
        }
    }

    // --- branching heap ----------------------------------------------------------
    bool heap_less(Var a, Var b) const
    {
        double aa = activity_[size_t(a)], ab = activity_[size_t(b)];
        return aa > ab || (aa == ab && a < b);
    }
    void heap_insert(Var v)
    {
        if (size_t(v) >= heap_pos_.size())
            heap_pos_.resize(size_t(v) + 1, -1);
        heap_pos_[size_t(v)] = int32_t(heap_.size());
        heap_.push_back(v);
        heap_up(int32_t(heap_.size()) - 1);
    }
    void heap_up(int32_t i)
    {
        Var v = heap_[size_t(i)];
        while (i > 0) {
            int32_t parent = (i - 1) / 2;
            if (!heap_less(v, heap_[size_t(parent)]))
                break;
            heap_[size_t(i)] = heap_[size_t(parent)];
            heap_pos_[size_t(heap_[size_t(i)])] = i;
            i = parent;
        }
        heap_[size_t(i)] = v;
        heap_pos_[size_t(v)] = i;
    }
    void heap_down(int32_t i)
    {
        Var v = heap_[size_t(i)];
        int32_t sz = int32_t(heap_.size());
        for (;;) {
            int32_t child = 2 * i + 1;
            if (child >= sz)
                break;
            if (child + 1 < sz && heap_less(heap_[size_t(child + 1)], heap_[size_t(child)]))
                ++child;
            if (!heap_less(heap_[size_t(child)], v))
                break;
            heap_[size_t(i)] = heap_[size_t(child)];
            heap_pos_[size_t(heap_[size_t(i)])] = i;
            i = child;
        }
        heap_[size_t(i)] = v;
        heap_pos_[size_t(v)] = i;
    }
    Var heap_pop()
    {
        Var v = heap_[0];
        heap_pos_[size_t(v)] = -1;
        heap_[0] = heap_.back();
        heap_.pop_back();
        if (!heap_.empty()) {
            heap_pos_[size_t(heap_[0])] = 0;
            heap_down(0);
        }
        return v;
    }

    // --- learnt DB reduction ------------------------------------------------------
    void reduce_db()
    {
        std::sort(learnts_.begin(), learnts_.end(), [&](CRef a, CRef b) {
            int sa = clause_size(a), sb = clause_size(b);
            if ((sa > 2) != (sb > 2))
                return sa > 2;
            return clause_act(a) < clause_act(b);
        });
        size_t keep_from = learnts_.size() / 2;
        size_t j = 0;
        for (size_t i = 0; i < learnts_.size(); ++i) {
            CRef cr = learnts_[i];
            bool locked = false;
            Lit first = clause_lits(cr)[0];
            if (value(first) == LB_True && reason_[size_t(lit_var(first))] == cr)
                locked = true;
            if (i < keep_from && clause_size(cr) > 2 && !locked) {
                detach_clause(cr);
                header(cr) |= 1; // deleted
            } else {
                learnts_[j++] = cr;
            }
        }
        learnts_.resize(j);
    }

    bool out_of_time() const { return has_deadline_ && std::chrono::steady_clock::now() >= deadline_; }

    static int64_t luby(double y, int i)
    {
        int size, seq;
        for (size = 1, seq = 0; size < i + 1; ++seq, size = 2 * size + 1)
            ;
        while (size - 1 != i) {
            size = (size - 1) >> 1;
            --seq;
            i = i % size;
        }
        return int64_t(std::pow(y, seq));
    }

    // Runs until a model/conflict proof, the conflict budget (restart), or the
    // deadline. Timeout doubles as the restart signal; solve() disambiguates.
    SolveResult search(int64_t conflict_budget)
    {
        int64_t local_conflicts = 0;
        std::vector<Lit> learnt;
        for (;;) {
            CRef conflict = propagate();
            if (conflict != cref_undef) {
                ++conflicts_;
                ++local_conflicts;
                if (decision_level() == 0)
                    return SolveResult::Unsat;
                int btlevel;
                analyze(conflict, learnt, btlevel);
                // never undo assumption decisions implied elsewhere: btlevel is
                // computed from the learnt clause, which is safe as-is
                cancel_until(btlevel);
                if (learnt.size() == 1) {
                    unchecked_enqueue(learnt[0], cref_undef);
                } else {
                    CRef cr = alloc_clause(learnt, true);
                    attach_clause(cr);
                    bump_clause(cr);
                    unchecked_enqueue(learnt[0], cr);
                }
                var_inc_ /= var_decay_;
                cla_inc_ /= cla_decay_;
                if ((conflicts_ & 1023) == 0 && out_of_time())
                    return SolveResult::Timeout;
            } else {
                if (local_conflicts >= conflict_budget)
                    return SolveResult::Timeout; // restart
                if (int64_t(learnts_.size()) >= max_learnts_ + int64_t(trail_.size())) {
                    reduce_db();
                    max_learnts_ += max_learnts_ / 10;
                }
                // place assumptions first, then branch
                Lit next = lit_undef;
                while (decision_level() < int(assumptions_.size())) {
                    Lit a = assumptions_[size_t(decision_level())];
                    if (value(a) == LB_True) {
                        trail_lim_.push_back(int32_t(trail_.size())); // dummy level
                    } else if (value(a) == LB_False) {
                        return SolveResult::Unsat; // conflicts with current assumptions
                    } else {
                        next = a;
                        break;
                    }
                }
                if (next == lit_undef && decision_level() >= int(assumptions_.size())) {
                    while (!heap_.empty()) {
                        Var v = heap_pop();
                        if (assigns_[size_t(v)] == LB_Undef) {
                            next = mk_lit(v, polarity_[size_t(v)]);
                            break;
                        }
                    }
                    if (next == lit_undef)
                        return SolveResult::Sat; // all variables assigned
                }
                if (next != lit_undef) {
                    ++decisions_;
                    trail_lim_.push_back(int32_t(trail_.size()));
                    unchecked_enqueue(next, cref_undef);
                }
            }
        }
    }
};

} // namespace efab
