// Gate-level structural netlist IR with a line-oriented text format.
#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace efab {

enum class CellType : uint8_t {
    Const0,
    Const1,
    Buf,
    Inv,
    And2,
    Nand2,
    Or2,
    Nor2,
    Xor2,
    Xnor2,
    Mux2,
    Dff,  // data flip-flop, clocked by the implicit user clock `clk`
    Cdff, // configuration flip-flop, clocked by the implicit `prog_clk`
};

inline bool is_sequential(CellType t) { return t == CellType::Dff || t == CellType::Cdff; }
inline bool is_const(CellType t) { return t == CellType::Const0 || t == CellType::Const1; }

inline int cell_arity(CellType t)
{
    switch (t) {
    case CellType::Const0:
    case CellType::Const1:
        return 0;
    case CellType::Buf:
    case CellType::Inv:
        return 1;
    case CellType::Mux2:
        return 3;
    case CellType::Dff:
    case CellType::Cdff:
        return 1;
    default:
        return 2;
    }
}

inline const char *cell_type_name(CellType t)
{
    switch (t) {
    case CellType::Const0:
        return "CONST0";
    case CellType::Const1:
        return "CONST1";
    case CellType::Buf:
        return "BUF";
    case CellType::Inv:
        return "INV";
    case CellType::And2:
        return "AND2";
    case CellType::Nand2:
        return "NAND2";
    case CellType::Or2:
        return "OR2";
    case CellType::Nor2:
        return "NOR2";
    case CellType::Xor2:
        return "XOR2";
    case CellType::Xnor2:
        return "XNOR2";
    case CellType::Mux2:
        return "MUX2";
    case CellType::Dff:
        return "DFF";
    case CellType::Cdff:
        return "CDFF";
    }
    return "?";
}

inline std::optional<CellType> cell_type_from_name(std::string_view s)
{
    static const std::unordered_map<std::string_view, CellType> table = {
            {"CONST0", CellType::Const0}, {"CONST1", CellType::Const1}, {"BUF", CellType::Buf},
            {"INV", CellType::Inv},       {"AND2", CellType::And2},     {"NAND2", CellType::Nand2},
            {"OR2", CellType::Or2},       {"NOR2", CellType::Nor2},     {"XOR2", CellType::Xor2},
            {"XNOR2", CellType::Xnor2},   {"MUX2", CellType::Mux2},
    };
    auto it = table.find(s);
    if (it == table.end())
        return std::nullopt;
    return it->second;
}

using NetId = int32_t;
constexpr NetId invalid_net = -1;

// Driver markers stored per net; non-negative values are cell indices.
constexpr int32_t driver_none = -1;
constexpr int32_t driver_input = -2;

struct Cell
{
    CellType type;
    NetId out;
    std::vector<NetId> ins; // MUX2 order is (in0, in1, sel); DFF/CDFF hold (d)
};

struct ParseError : std::runtime_error
{
    int line, col;
    ParseError(int line, int col, const std::string &msg)
            : std::runtime_error("line " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg), line(line),
              col(col)
    {
    }
};

struct NetlistError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

class Netlist
{
  public:
    Netlist() = default;
    explicit Netlist(std::string name) : name_(std::move(name)) {}

    const std::string &name() const { return name_; }
    void set_name(std::string n) { name_ = std::move(n); }

    NetId net(std::string_view name)
    {
        auto it = net_ids_.find(std::string(name));
        if (it != net_ids_.end())
            return it->second;
        NetId id = NetId(net_names_.size());
        net_names_.emplace_back(name);
        net_ids_.emplace(net_names_.back(), id);
        driver_.push_back(driver_none);
        return id;
    }

    std::optional<NetId> find_net(std::string_view name) const
    {
        auto it = net_ids_.find(std::string(name));
        if (it == net_ids_.end())
            return std::nullopt;
        return it->second;
    }

    const std::string &net_name(NetId id) const { return net_names_.at(size_t(id)); }
    size_t num_nets() const { return net_names_.size(); }

    void add_input(NetId id)
    {
        if (driver_[id] != driver_none)
            throw NetlistError("net '" + net_name(id) + "' already driven");
        driver_[id] = driver_input;
        inputs_.push_back(id);
    }
    NetId add_input(std::string_view name)
    {
        NetId id = net(name);
        add_input(id);
        return id;
    }

    void add_output(NetId id) { outputs_.push_back(id); }
    NetId add_output(std::string_view name)
    {
        NetId id = net(name);
        add_output(id);
        return id;
    }

    int add_cell(CellType type, NetId out, std::vector<NetId> ins)
    {
        if (int(ins.size()) != cell_arity(type))
            throw NetlistError(std::string("cell ") + cell_type_name(type) + " expects " +
                               std::to_string(cell_arity(type)) + " inputs");
        if (driver_[out] != driver_none)
            throw NetlistError("net '" + net_name(out) + "' already driven");
        int idx = int(cells_.size());
        driver_[out] = idx;
        cells_.push_back(Cell{type, out, std::move(ins)});
        return idx;
    }

    int add_cell(CellType type, std::string_view out, std::initializer_list<std::string_view> ins)
    {
        std::vector<NetId> in_ids;
        in_ids.reserve(ins.size());
        for (auto s : ins)
            in_ids.push_back(net(s));
        return add_cell(type, net(out), std::move(in_ids));
    }

    const std::vector<NetId> &inputs() const { return inputs_; }
    const std::vector<NetId> &outputs() const { return outputs_; }
    const std::vector<Cell> &cells() const { return cells_; }
    const Cell &cell(int idx) const { return cells_.at(size_t(idx)); }

    // Cell index driving the net, or driver_input / driver_none.
    int32_t driver(NetId id) const { return driver_.at(size_t(id)); }
    bool is_primary_input(NetId id) const { return driver_[id] == driver_input; }

    // net -> indices of cells reading it, in cell-declaration order.
    std::vector<std::vector<int32_t>> fanout_index() const
    {
        std::vector<std::vector<int32_t>> fo(net_names_.size());
        for (int32_t ci = 0; ci < int32_t(cells_.size()); ++ci)
            for (NetId in : cells_[size_t(ci)].ins)
                fo[size_t(in)].push_back(ci);
        return fo;
    }

    void reserve(size_t nets, size_t cells)
    {
        net_names_.reserve(nets);
        driver_.reserve(nets);
        cells_.reserve(cells);
    }

    // Structural validity: one driver per net, outputs name driven-or-input
    // nets, no dangling cell inputs. Throws NetlistError on the first failure.
    void check() const
    {
        for (NetId id = 0; id < NetId(net_names_.size()); ++id)
            if (driver_[size_t(id)] == driver_none)
                throw NetlistError("net '" + net_name(id) + "' has no driver");
        for (NetId out : outputs_)
            if (driver_[size_t(out)] == driver_none)
                throw NetlistError("output '" + net_name(out) + "' names an undriven net");
    }

    bool operator==(const Netlist &other) const
    {
        auto key = [](const Netlist &n) {
            std::vector<std::string> cells;
            cells.reserve(n.cells_.size());
            for (const Cell &c : n.cells_) {
                std::string k = cell_type_name(c.type);
                k += ' ';
                k += n.net_name(c.out);
                for (NetId in : c.ins) {
                    k += ' ';
                    k += n.net_name(in);
                }
                cells.push_back(std::move(k));
            }
            std::sort(cells.begin(), cells.end());
            return cells;
        };
        auto names = [](const Netlist &n, const std::vector<NetId> &ids) {
            std::vector<std::string> out;
            out.reserve(ids.size());
            for (NetId id : ids)
                out.push_back(n.net_name(id));
            return out;
        };
        return name_ == other.name_ && names(*this, inputs_) == names(other, other.inputs_) &&
               names(*this, outputs_) == names(other, other.outputs_) && key(*this) == key(other);
    }

  private:
    std::string name_;
    std::vector<std::string> net_names_;
    std::unordered_map<std::string, NetId> net_ids_;
    std::vector<NetId> inputs_, outputs_;
    std::vector<Cell> cells_;
    std::vector<int32_t> driver_;
};

namespace detail {

struct Token
{
    std::string text;
    int line, col;
};

// Whitespace-separated tokens; `#` starts a comment running to end of line.
inline std::vector<std::vector<Token>> tokenize_lines(std::string_view text)
{
    std::vector<std::vector<Token>> lines;
    std::vector<Token> cur;
    int line = 1, col = 1;
    size_t i = 0;
    auto flush_line = [&]() {
        if (!cur.empty())
            lines.push_back(std::move(cur));
        cur.clear();
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            flush_line();
            ++line;
            col = 1;
            ++i;
        } else if (c == '#') {
            while (i < text.size() && text[i] != '\n')
                ++i;
        } else if (c == ' ' || c == '\t' || c == '\r') {
            ++i;
            ++col;
        } else {
            int start_col = col;
            size_t j = i;
            while (j < text.size() && text[j] != ' ' && text[j] != '\t' && text[j] != '\r' && text[j] != '\n' &&
                   text[j] != '#')
                ++j;
            cur.push_back(Token{std::string(text.substr(i, j - i)), line, start_col});
            col += int(j - i);
            i = j;
        }
    }
    flush_line();
    return lines;
}

} // namespace detail

// Parses the netlist text format:
//   module <name> / input <net> / output <net>
//   gate <TYPE> <out> <in...> / dff <q> <d> / cdff <q> <d> / endmodule
// `prog_clk` is an implicit clock tag, never a data net.
inline Netlist parse_netlist(std::string_view text)
{
    auto lines = detail::tokenize_lines(text);
    Netlist n;
    bool in_module = false, done = false;
    auto check_net_name = [&](const detail::Token &t) {
        if (t.text == "prog_clk")
            throw ParseError(t.line, t.col, "'prog_clk' is a reserved clock tag, not a data net");
    };
    for (const auto &toks : lines) {
        const auto &head = toks[0];
        if (done)
            throw ParseError(head.line, head.col, "content after endmodule");
        auto expect_args = [&](size_t nargs, const char *what) {
            if (toks.size() != nargs + 1)
                throw ParseError(head.line, head.col,
                                 std::string(what) + " expects " + std::to_string(nargs) + " argument(s)");
        };
        if (!in_module) {
            if (head.text != "module")
                throw ParseError(head.line, head.col, "expected 'module'");
            expect_args(1, "module");
            n.set_name(toks[1].text);
            in_module = true;
            continue;
        }
        if (head.text == "input") {
            expect_args(1, "input");
            check_net_name(toks[1]);
            NetId id = n.net(toks[1].text);
            if (n.driver(id) != driver_none)
                throw ParseError(toks[1].line, toks[1].col, "duplicate driver for net '" + toks[1].text + "'");
            n.add_input(id);
        } else if (head.text == "output") {
            expect_args(1, "output");
            check_net_name(toks[1]);
            n.add_output(toks[1].text);
        } else if (head.text == "gate") {
            if (toks.size() < 3)
                throw ParseError(head.line, head.col, "gate expects a type and an output net");
            auto type = cell_type_from_name(toks[1].text);
            if (!type)
                throw ParseError(toks[1].line, toks[1].col, "unknown cell type '" + toks[1].text + "'");
            int arity = cell_arity(*type);
            if (int(toks.size()) != 3 + arity)
                throw ParseError(head.line, head.col,
                                 std::string(cell_type_name(*type)) + " expects " + std::to_string(arity) +
                                         " input(s)");
            check_net_name(toks[2]);
            NetId out = n.net(toks[2].text);
            if (n.driver(out) != driver_none)
                throw ParseError(toks[2].line, toks[2].col, "duplicate driver for net '" + toks[2].text + "'");
            std::vector<NetId> ins;
            for (int i = 0; i < arity; ++i) {
                check_net_name(toks[size_t(3 + i)]);
                ins.push_back(n.net(toks[size_t(3 + i)].text));
            }
            n.add_cell(*type, out, std::move(ins));
        } else if (head.text == "dff" || head.text == "cdff") {
            expect_args(2, head.text.c_str());
            check_net_name(toks[1]);
            check_net_name(toks[2]);
            NetId q = n.net(toks[1].text);
            if (n.driver(q) != driver_none)
                throw ParseError(toks[1].line, toks[1].col, "duplicate driver for net '" + toks[1].text + "'");
            n.add_cell(head.text == "dff" ? CellType::Dff : CellType::Cdff, q, {n.net(toks[2].text)});
        } else if (head.text == "endmodule") {
            expect_args(0, "endmodule");
            done = true;
        } else {
            throw ParseError(head.line, head.col, "unknown statement '" + head.text + "'");
        }
    }
    if (!in_module)
        throw ParseError(1, 1, "empty input, expected 'module'");
    if (!done)
        throw ParseError(1, 1, "missing endmodule");
    try {
        n.check();
    } catch (const NetlistError &e) {
        throw ParseError(1, 1, e.what());
    }
    return n;
}

// Canonical cell order: Kahn's algorithm over combinational dependencies with
// lexicographic output-name tie-breaks; on a cycle the smallest-named pending
// cell is forced, so the order is total for cyclic netlists too.
inline std::vector<int32_t> canonical_cell_order(const Netlist &n)
{
    size_t num = n.cells().size();
    std::vector<int32_t> indegree(num, 0);
    std::vector<std::vector<int32_t>> succ(num);
    for (int32_t ci = 0; ci < int32_t(num); ++ci) {
        const Cell &c = n.cells()[size_t(ci)];
        if (is_sequential(c.type))
            continue; // sequential outputs are sources; deps flow via inputs only
        for (NetId in : c.ins) {
            int32_t drv = n.driver(in);
            if (drv >= 0 && !is_sequential(n.cells()[size_t(drv)].type)) {
                succ[size_t(drv)].push_back(ci);
                indegree[size_t(ci)]++;
            }
        }
    }
    auto name_of = [&](int32_t ci) -> const std::string & { return n.net_name(n.cells()[size_t(ci)].out); };
    auto cmp = [&](int32_t a, int32_t b) { return name_of(a) > name_of(b); };
    std::priority_queue<int32_t, std::vector<int32_t>, decltype(cmp)> ready(cmp);
    for (int32_t ci = 0; ci < int32_t(num); ++ci)
        if (indegree[size_t(ci)] == 0)
            ready.push(ci);
    std::vector<bool> emitted(num, false);
    std::vector<int32_t> order;
    order.reserve(num);
    // Pending cells sorted by name for the cycle-relaxation fallback.
    std::map<std::string, std::vector<int32_t>> pending;
    for (int32_t ci = 0; ci < int32_t(num); ++ci)
        if (indegree[size_t(ci)] > 0)
            pending[name_of(ci)].push_back(ci);
    auto emit = [&](int32_t ci) {
        emitted[size_t(ci)] = true;
        order.push_back(ci);
        for (int32_t s : succ[size_t(ci)])
            if (--indegree[size_t(s)] == 0 && !emitted[size_t(s)])
                ready.push(s);
    };
    while (order.size() < num) {
        while (!ready.empty()) {
            int32_t ci = ready.top();
            ready.pop();
            if (!emitted[size_t(ci)])
                emit(ci);
        }
        if (order.size() == num)
            break;
        // combinational cycle: force the smallest-named unemitted cell
        while (!pending.empty()) {
            auto it = pending.begin();
            int32_t forced = -1;
            for (int32_t ci : it->second)
                if (!emitted[size_t(ci)] && indegree[size_t(ci)] > 0) {
                    forced = ci;
                    break;
                }
            if (forced < 0) {
                pending.erase(it);
                continue;
            }
            indegree[size_t(forced)] = 0;
            emit(forced);
            break;
        }
    }
    return order;
}

inline std::string emit_netlist(const Netlist &n)
{
    std::string out;
    out += "module " + n.name() + "\n";
    for (NetId id : n.inputs())
        out += "input " + n.net_name(id) + "\n";
    for (NetId id : n.outputs())
        out += "output " + n.net_name(id) + "\n";
    for (int32_t ci : canonical_cell_order(n)) {
        const Cell &c = n.cells()[size_t(ci)];
        if (c.type == CellType::Dff)
            out += "dff " + n.net_name(c.out) + " " + n.net_name(c.ins[0]) + "\n";
        else if (c.type == CellType::Cdff)
            out += "cdff " + n.net_name(c.out) + " " + n.net_name(c.ins[0]) + "\n";
        else {
            out += "gate ";
            out += cell_type_name(c.type);
            out += " " + n.net_name(c.out);
            for (NetId in : c.ins)
                out += " " + n.net_name(in);
            out += "\n";
        }
    }
    out += "endmodule\n";
    return out;
}

} // namespace efab
