// Shared test utilities: seeded random netlist generation and brute-force oracles.
#pragma once

#include "efab/analysis.hpp"
#include "efab/arch.hpp"
#include "efab/netlist.hpp"

#include <random>

namespace efab::test {

struct RandomNetlistOpts
{
    int num_inputs = 4;
    int num_gates = 12;
    int num_outputs = 3;
    bool allow_sequential = false;
    bool allow_cycles = false;
};

// Every gate output net is pre-named so cyclic wiring still leaves each net
// with exactly one driver.
inline Netlist random_netlist(std::mt19937 &rng, const RandomNetlistOpts &opts = {})
{
    Netlist n("rand");
    std::vector<NetId> sources;
    for (int i = 0; i < opts.num_inputs; ++i)
        sources.push_back(n.add_input("in" + std::to_string(i)));
    std::vector<NetId> gate_nets;
    for (int g = 0; g < opts.num_gates; ++g)
        gate_nets.push_back(n.net("g" + std::to_string(g)));

    static const CellType comb_types[] = {CellType::Buf,  CellType::Inv,   CellType::And2,  CellType::Nand2,
                                          CellType::Or2,  CellType::Nor2,  CellType::Xor2,  CellType::Xnor2,
                                          CellType::Mux2, CellType::Const0, CellType::Const1};
    for (int g = 0; g < opts.num_gates; ++g) {
        auto pick_in = [&]() -> NetId {
            if (opts.allow_cycles) {
                size_t total = sources.size() + gate_nets.size();
                size_t idx = std::uniform_int_distribution<size_t>(0, total - 1)(rng);
                return idx < sources.size() ? sources[idx] : gate_nets[idx - sources.size()];
            }
            size_t total = sources.size() + size_t(g);
            size_t idx = std::uniform_int_distribution<size_t>(0, total - 1)(rng);
            return idx < sources.size() ? sources[idx] : gate_nets[idx - sources.size()];
        };
        CellType type;
        if (opts.allow_sequential && std::uniform_int_distribution<int>(0, 9)(rng) == 0)
            type = std::uniform_int_distribution<int>(0, 1)(rng) ? CellType::Dff : CellType::Cdff;
        else
            type = comb_types[std::uniform_int_distribution<size_t>(0, std::size(comb_types) - 1)(rng)];
        std::vector<NetId> ins;
        for (int i = 0; i < cell_arity(type); ++i)
            ins.push_back(pick_in());
        n.add_cell(type, gate_nets[size_t(g)], std::move(ins));
    }
    for (int o = 0; o < opts.num_outputs; ++o) {
        size_t idx = std::uniform_int_distribution<size_t>(0, gate_nets.size() - 1)(rng);
        n.add_output(gate_nets[idx]);
    }
    return n;
}

// All-inputs truth table of an acyclic combinational netlist, outputs packed
// per row in declaration order. Independent of the simulation code paths under
// test only in so far as callers choose; see evaluate_acyclic.
inline std::vector<std::vector<bool>> exhaustive_table(const Netlist &n)
{
    size_t ni = n.inputs().size();
    std::vector<std::vector<bool>> rows;
    for (uint64_t m = 0; m < (uint64_t(1) << ni); ++m) {
        std::unordered_map<NetId, bool> asg;
        for (size_t i = 0; i < ni; ++i)
            asg[n.inputs()[i]] = (m >> i) & 1;
        auto vals = evaluate_acyclic(n, asg);
        std::vector<bool> row;
        for (NetId out : n.outputs()) {
            Tri v = vals[size_t(out)];
            row.push_back(v == Tri::T);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// Desk-scale architecture small enough for attack tests.
inline ArchSpec tiny_arch(int k = 3, int n = 2, int grid = 2, int w = 4)
{
    ArchSpec a;
    a.k = k;
    a.n = n;
    a.grid_b = grid;
    a.w = w;
    a.fc_in = 0.5;
    a.fc_out = 0.25;
    a.fs = 3;
    a.seg_len = 1;
    a.io_cap = 2;
    return a;
}

} // namespace efab::test
