// Netlist graph analyses: cycle breaking, depth, gate accounting, simulation.
#pragma once

#include "efab/netlist.hpp"

#include <cassert>
#include <unordered_set>

namespace efab {

// Nets whose removal (driver->sinks edges) makes the combinational graph
// acyclic. DFF/CDFF outputs are sources, their inputs sinks.
struct FeedbackSet
{
    std::vector<NetId> nets;
};

// Topological order over combinational cells, treating `excluded` nets as cut.
// Sequential cells are appended in declaration order (they carry no
// combinational dependencies). Returns nullopt if a cycle remains.
inline std::optional<std::vector<int32_t>> topological_order(const Netlist &n,
                                                             const std::unordered_set<NetId> &excluded = {})
{
    size_t num = n.cells().size();
    std::vector<int32_t> indegree(num, 0);
    std::vector<std::vector<int32_t>> succ(num);
    for (int32_t ci = 0; ci < int32_t(num); ++ci) {
        const Cell &c = n.cells()[size_t(ci)];
        if (is_sequential(c.type))
            continue;
        for (NetId in : c.ins) {
            if (excluded.count(in))
                continue;
            int32_t drv = n.driver(in);
            if (drv >= 0 && !is_sequential(n.cells()[size_t(drv)].type)) {
                succ[size_t(drv)].push_back(ci);
                indegree[size_t(ci)]++;
            }
        }
    }
    std::vector<int32_t> order;
    order.reserve(num);
    std::vector<int32_t> stack;
    for (int32_t ci = 0; ci < int32_t(num); ++ci)
        if (indegree[size_t(ci)] == 0 && !is_sequential(n.cells()[size_t(ci)].type))
            stack.push_back(ci);
    while (!stack.empty()) {
        int32_t ci = stack.back();
        stack.pop_back();
        order.push_back(ci);
        for (int32_t s : succ[size_t(ci)])
            if (--indegree[size_t(s)] == 0)
                stack.push_back(s);
    }
    size_t comb_count = 0;
    for (const Cell &c : n.cells())
        if (!is_sequential(c.type))
            ++comb_count;
    if (order.size() != comb_count)
        return std::nullopt;
    for (int32_t ci = 0; ci < int32_t(num); ++ci)
        if (is_sequential(n.cells()[size_t(ci)].type))
            order.push_back(ci);
    return order;
}

inline bool is_acyclic(const Netlist &n, const std::unordered_set<NetId> &excluded = {})
{
    return topological_order(n, excluded).has_value();
}

// Greedy feedback set via iterative DFS back-edge collection; children are
// visited in cell-declaration order. Not minimum (it need not be). A final
// topological check re-runs the pass on the residual graph if needed.
inline FeedbackSet feedback_set(const Netlist &n)
{
    FeedbackSet fs;
    std::unordered_set<NetId> removed;
    auto fanout = n.fanout_index();
    size_t num = n.cells().size();

    auto pass = [&]() {
        enum : uint8_t { White, Gray, Black };
        std::vector<uint8_t> color(num, White);
        struct Frame
        {
            int32_t cell;
            size_t child;
        };
        std::vector<Frame> stack;
        for (int32_t root = 0; root < int32_t(num); ++root) {
            if (color[size_t(root)] != White || is_sequential(n.cells()[size_t(root)].type))
                continue;
            color[size_t(root)] = Gray;
            stack.push_back({root, 0});
            while (!stack.empty()) {
                Frame &f = stack.back();
                const Cell &c = n.cells()[size_t(f.cell)];
                NetId w = c.out;
                const auto &sinks = fanout[size_t(w)];
                bool descended = false;
                if (!removed.count(w)) {
                    while (f.child < sinks.size()) {
                        int32_t v = sinks[f.child++];
                        if (is_sequential(n.cells()[size_t(v)].type))
                            continue;
                        if (color[size_t(v)] == Gray) {
                            // back edge: cut this net, which drops every out-edge of f.cell
                            removed.insert(w);
                            fs.nets.push_back(w);
                            break;
                        }
                        if (color[size_t(v)] == White) {
                            color[size_t(v)] = Gray;
                            stack.push_back({v, 0});
                            descended = true;
                            break;
                        }
                    }
                }
                if (descended)
                    continue;
                if (removed.count(w) || f.child >= sinks.size()) {
                    color[size_t(f.cell)] = Black;
                    stack.pop_back();
                }
            }
        }
    };

    pass();
    // Interleaving edge removal with traversal can, in odd corner cases, leave
    // a cycle undiscovered; each extra pass removes at least one more net.
    int guard = 0;
    while (!is_acyclic(n, removed)) {
        pass();
        if (++guard > int(n.num_nets()))
            throw NetlistError("feedback_set failed to converge");
    }
    return fs;
}

// Weighted 2-input-gate equivalents: BUF and constants 0, INV and simple
// 2-input gates 1, XOR/XNOR/MUX2 3, sequential cells excluded.
inline int64_t gate_count_2in(const Netlist &n)
{
    int64_t total = 0;
    for (const Cell &c : n.cells()) {
        switch (c.type) {
        case CellType::Inv:
        case CellType::And2:
        case CellType::Nand2:
        case CellType::Or2:
        case CellType::Nor2:
            total += 1;
            break;
        case CellType::Xor2:
        case CellType::Xnor2:
        case CellType::Mux2:
            total += 3;
            break;
        default:
            break;
        }
    }
    return total;
}

// Longest input-to-output combinational path, counted in cells.
inline int logic_depth(const Netlist &n)
{
    auto order = topological_order(n);
    if (!order)
        throw NetlistError("logic_depth requires an acyclic combinational graph");
    std::vector<int> level(n.cells().size(), 0);
    for (int32_t ci : *order) {
        const Cell &c = n.cells()[size_t(ci)];
        if (is_sequential(c.type))
            continue;
        int in_level = 0;
        for (NetId in : c.ins) {
            int32_t drv = n.driver(in);
            if (drv >= 0 && !is_sequential(n.cells()[size_t(drv)].type))
                in_level = std::max(in_level, level[size_t(drv)]);
        }
        level[size_t(ci)] = in_level + 1;
    }
    int depth = 0;
    for (NetId out : n.outputs()) {
        int32_t drv = n.driver(out);
        if (drv >= 0 && !is_sequential(n.cells()[size_t(drv)].type))
            depth = std::max(depth, level[size_t(drv)]);
    }
    return depth;
}

// --- three-valued simulation -------------------------------------------------

enum class Tri : uint8_t { F = 0, T = 1, X = 2 };

inline Tri tri_of(bool b) { return b ? Tri::T : Tri::F; }

inline Tri tri_not(Tri a) { return a == Tri::X ? Tri::X : (a == Tri::T ? Tri::F : Tri::T); }
inline Tri tri_and(Tri a, Tri b)
{
    if (a == Tri::F || b == Tri::F)
        return Tri::F;
    if (a == Tri::T && b == Tri::T)
        return Tri::T;
    return Tri::X;
}
inline Tri tri_or(Tri a, Tri b)
{
    if (a == Tri::T || b == Tri::T)
        return Tri::T;
    if (a == Tri::F && b == Tri::F)
        return Tri::F;
    return Tri::X;
}
inline Tri tri_xor(Tri a, Tri b)
{
    if (a == Tri::X || b == Tri::X)
        return Tri::X;
    return a == b ? Tri::F : Tri::T;
}
inline Tri tri_mux(Tri in0, Tri in1, Tri sel)
{
    if (sel == Tri::F)
        return in0;
    if (sel == Tri::T)
        return in1;
    return (in0 == in1) ? in0 : Tri::X;
}

inline Tri eval_cell(CellType t, Tri a, Tri b = Tri::X, Tri c = Tri::X)
{
    switch (t) {
    case CellType::Const0:
        return Tri::F;
    case CellType::Const1:
        return Tri::T;
    case CellType::Buf:
        return a;
    case CellType::Inv:
        return tri_not(a);
    case CellType::And2:
        return tri_and(a, b);
    case CellType::Nand2:
        return tri_not(tri_and(a, b));
    case CellType::Or2:
        return tri_or(a, b);
    case CellType::Nor2:
        return tri_not(tri_or(a, b));
    case CellType::Xor2:
        return tri_xor(a, b);
    case CellType::Xnor2:
        return tri_not(tri_xor(a, b));
    case CellType::Mux2:
        return tri_mux(a, b, c);
    default:
        return Tri::X;
    }
}

struct SimResult
{
    bool converged = false; // stable and all primary outputs are 0/1
    bool stable = false;
    int sweeps = 0;
    std::vector<Tri> values; // per net

    bool output_bit(const Netlist &n, size_t idx) const
    {
        Tri v = values.at(size_t(n.outputs().at(idx)));
        assert(v != Tri::X);
        return v == Tri::T;
    }
};

// Iterated three-valued evaluation to a fixed point. `assignment` must cover
// every primary input; it may also pin sequential Q nets (scan-style state or
// configuration values). Unassigned sequential outputs stay X.
inline SimResult simulate_fixed_point(const Netlist &n, const std::unordered_map<NetId, bool> &assignment,
                                      int max_iterations = 1000)
{
    SimResult res;
    res.values.assign(n.num_nets(), Tri::X);
    for (NetId in : n.inputs()) {
        auto it = assignment.find(in);
        if (it == assignment.end())
            throw NetlistError("simulate_fixed_point: primary input '" + n.net_name(in) + "' unassigned");
        res.values[size_t(in)] = tri_of(it->second);
    }
    for (const Cell &c : n.cells())
        if (is_sequential(c.type)) {
            auto it = assignment.find(c.out);
            if (it != assignment.end())
                res.values[size_t(c.out)] = tri_of(it->second);
        }
    auto &v = res.values;
    for (int iter = 0; iter < max_iterations; ++iter) {
        bool changed = false;
        for (const Cell &c : n.cells()) {
            if (is_sequential(c.type))
                continue;
            Tri a = c.ins.size() > 0 ? v[size_t(c.ins[0])] : Tri::X;
            Tri b = c.ins.size() > 1 ? v[size_t(c.ins[1])] : Tri::X;
            Tri s = c.ins.size() > 2 ? v[size_t(c.ins[2])] : Tri::X;
            Tri out = eval_cell(c.type, a, b, s);
            if (out != v[size_t(c.out)]) {
                v[size_t(c.out)] = out;
                changed = true;
            }
        }
        ++res.sweeps;
        if (!changed) {
            res.stable = true;
            break;
        }
    }
    if (res.stable) {
        res.converged = true;
        for (NetId out : n.outputs())
            if (v[size_t(out)] == Tri::X) {
                res.converged = false;
                break;
            }
    }
    return res;
}

// Single-pass evaluation of an acyclic netlist. Sequential Q nets may be
// pinned through `assignment` like in simulate_fixed_point; those left
// unpinned poison their cones with X.
inline std::vector<Tri> evaluate_acyclic(const Netlist &n, const std::unordered_map<NetId, bool> &assignment)
{
    auto order = topological_order(n);
    if (!order)
        throw NetlistError("evaluate_acyclic: netlist has a combinational cycle");
    std::vector<Tri> v(n.num_nets(), Tri::X);
    for (NetId in : n.inputs()) {
        auto it = assignment.find(in);
        if (it == assignment.end())
            throw NetlistError("evaluate_acyclic: primary input '" + n.net_name(in) + "' unassigned");
        v[size_t(in)] = tri_of(it->second);
    }
    for (const Cell &c : n.cells())
        if (is_sequential(c.type)) {
            auto it = assignment.find(c.out);
            if (it != assignment.end())
                v[size_t(c.out)] = tri_of(it->second);
        }
    for (int32_t ci : *order) {
        const Cell &c = n.cells()[size_t(ci)];
        if (is_sequential(c.type))
            continue;
        Tri a = c.ins.size() > 0 ? v[size_t(c.ins[0])] : Tri::X;
        Tri b = c.ins.size() > 1 ? v[size_t(c.ins[1])] : Tri::X;
        Tri s = c.ins.size() > 2 ? v[size_t(c.ins[2])] : Tri::X;
        v[size_t(c.out)] = eval_cell(c.type, a, b, s);
    }
    return v;
}

} // namespace efab
