// eFPGA fabric generation: CLB/BLE/LUT structure, unidirectional global
// routing with connection/switch blocks, configuration scan chain, bitstream
// and layout sidecar formats, and the configured-projection extractor.
//
// Conventions (all deterministic):
//  - CLB tiles at (x,y), 1..B; perimeter I/O tiles ring them; corners empty.
//  - Horizontal channel c in [0,B] spans positions x=1..B below/above rows;
//    vertical channel c spans y=1..B. Track t direction: even t INC, odd DEC.
//  - Track segments partition positions into spans of seg_len (clipped at the
//    fabric edge); a segment is driven by one mux at its start junction.
//  - Wire-driver mux input order: pin feeds first, then the same-track
//    straight continuation, then switch-block turns; a segment with neither
//    feed nor straight gets a constant-0 tie as input 0, so the all-zero
//    default fill resolves to an acyclic projection.
//  - Turn pattern (Wilton-like, fs=3 gives straight+left+right): turn i in
//    [1,fs) takes crossing-channel track (t + ceil(i/2)) mod w from the lower
//    (odd i) or upper (even i) adjacent position of the start junction.
//  - Scan chain order = creation order: tiles row-major (y outer, x inner);
//    within a CLB tile: per-BLE LUT bits then mode bit, then per-BLE-pin
//    crossbar selects, then per-input-pin CB selects; then pad muxes for I/O
//    tiles; then SB selects of wires starting at the tile's junction.
#pragma once

#include "efab/analysis.hpp"
#include "efab/arch.hpp"
#include "efab/netlist.hpp"

#include <bit>
#include <random>

namespace efab {

enum class BitCategory : uint8_t { Logic, LocalRouting, Cb, Sb, Io };

inline const char *bit_category_name(BitCategory c)
{
    switch (c) {
    case BitCategory::Logic:
        return "LOGIC";
    case BitCategory::LocalRouting:
        return "LOCAL_ROUTING";
    case BitCategory::Cb:
        return "CB";
    case BitCategory::Sb:
        return "SB";
    case BitCategory::Io:
        return "IO";
    }
    return "?";
}

inline std::optional<BitCategory> bit_category_from_name(std::string_view s)
{
    if (s == "LOGIC")
        return BitCategory::Logic;
    if (s == "LOCAL_ROUTING")
        return BitCategory::LocalRouting;
    if (s == "CB")
        return BitCategory::Cb;
    if (s == "SB")
        return BitCategory::Sb;
    if (s == "IO")
        return BitCategory::Io;
    return std::nullopt;
}

struct Bitstream
{
    std::vector<uint8_t> bits; // 0/1, index 0 = first CDFF in scan order
    size_t size() const { return bits.size(); }
};

struct BitstreamError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// Format: line 1 `bits <n>`, line 2 the n characters in {0,1}.
inline Bitstream parse_bitstream(std::string_view text)
{
    std::istringstream ss{std::string(text)};
    std::string tag;
    size_t count = 0;
    if (!(ss >> tag >> count) || tag != "bits")
        throw BitstreamError("expected 'bits <n>' header");
    std::string digits;
    if (!(ss >> digits) && count > 0)
        throw BitstreamError("missing bit string");
    if (digits.size() != count)
        throw BitstreamError("bit string length " + std::to_string(digits.size()) + " != declared " +
                             std::to_string(count));
    Bitstream b;
    b.bits.reserve(count);
    for (char c : digits) {
        if (c != '0' && c != '1')
            throw BitstreamError("bit string contains non-binary character");
        b.bits.push_back(c == '1');
    }
    return b;
}

inline std::string emit_bitstream(const Bitstream &b)
{
    std::string s = "bits " + std::to_string(b.bits.size()) + "\n";
    for (uint8_t v : b.bits)
        s += v ? '1' : '0';
    s += "\n";
    return s;
}

// --- routing resource graph ----------------------------------------------------

struct RRNode
{
    enum class Kind : uint8_t { Opin, Ipin, Wire };
    Kind kind;
    NetId net = invalid_net;
    // wires only:
    bool horiz = false;
    int chan = 0, track = 0, lo = 0, hi = 0;
    bool inc = true;
};

// One programmable switch: a mux-tree driving `target` from `sources` with
// binary-encoded selects stored at the given chain bit indices (LSB first).
struct RRMux
{
    int32_t target = -1;
    std::vector<int32_t> sources; // rr node ids; index 0 is the all-zero default
    std::vector<int32_t> sel_bits;
};

struct XbarMux
{
    NetId out = invalid_net;
    std::vector<NetId> sources; // I CLB input pins then n BLE outputs
    std::vector<int32_t> sel_bits;
};

struct Ble
{
    std::vector<int32_t> lut_bits; // 2^k chain indices, table order
    int32_t mode_bit = -1;         // 0 = combinational, 1 = registered
    NetId lut_out = invalid_net, ff_q = invalid_net, out = invalid_net;
    std::vector<XbarMux> pins; // k crossbar muxes feeding the LUT
};

struct ClbTile
{
    int x = 0, y = 0;
    std::vector<NetId> in_pins;
    std::vector<int32_t> ipin_nodes; // rr nodes, one per input pin
    std::vector<int32_t> opin_nodes; // rr nodes, one per BLE output
    std::vector<Ble> bles;
};

struct IoTile
{
    int x = 0, y = 0;
    std::vector<NetId> pad_in, pad_out;
    std::vector<int32_t> padin_nodes, padout_nodes;
};

struct Fabric
{
    ArchSpec arch;
    Netlist netlist;
    std::vector<NetId> chain;          // CDFF Q nets in scan order
    std::vector<int32_t> chain_cells;  // CDFF cell indices in scan order
    std::vector<BitCategory> layout;   // per bit
    std::vector<std::string> bit_path; // per bit resource path

    std::vector<RRNode> nodes;
    std::vector<RRMux> muxes;
    std::vector<int32_t> mux_of_node; // node id -> mux id or -1
    std::vector<ClbTile> clbs;        // row-major, (y-1)*B + (x-1)
    std::vector<IoTile> ios;

    size_t bitstream_bits() const { return chain.size(); }

    const ClbTile &clb_at(int x, int y) const { return clbs.at(size_t((y - 1) * arch.grid_b + (x - 1))); }

    std::array<size_t, 5> layout_counts() const
    {
        std::array<size_t, 5> counts{};
        for (BitCategory c : layout)
            counts[size_t(c)]++;
        return counts;
    }
};

inline int ceil_log2(size_t m) { return m <= 1 ? 0 : int(std::bit_width(m - 1)); }

namespace detail {

// Builds a MUX2 tree over 2^sels.size() padded leaves (leaf i >= m maps to the
// last source) writing the top mux to `out`; with no selects, a BUF.
inline void build_mux_tree(Netlist &nl, NetId out, const std::vector<NetId> &sources, const std::vector<NetId> &sels)
{
    if (sels.empty()) {
        nl.add_cell(CellType::Buf, out, {sources.at(0)});
        return;
    }
    size_t leaves = size_t(1) << sels.size();
    std::vector<NetId> level;
    level.reserve(leaves);
    for (size_t i = 0; i < leaves; ++i)
        level.push_back(sources[std::min(i, sources.size() - 1)]);
    const std::string base = nl.net_name(out); // copy: interning below may reallocate
    for (size_t j = 0; j < sels.size(); ++j) {
        std::vector<NetId> next;
        next.reserve(level.size() / 2);
        for (size_t i = 0; i < level.size(); i += 2) {
            NetId o = (level.size() == 2) ? out
                                          : nl.net(base + "_m" + std::to_string(j) + "_" + std::to_string(i / 2));
            nl.add_cell(CellType::Mux2, o, {level[i], level[i + 1], sels[size_t(j)]});
            next.push_back(o);
        }
        level = std::move(next);
    }
}

struct SegRef
{
    bool horiz;
    int chan, track, lo;
    bool operator==(const SegRef &) const = default;
};

} // namespace detail

class FabricBuilder
{
  public:
    explicit FabricBuilder(const ArchSpec &arch, std::string name) : arch_(arch)
    {
        validate_or_throw(arch_);
        f_.arch = arch_;
        f_.netlist.set_name(std::move(name));
        scan_head_ = f_.netlist.add_input("scan_in_head");
    }

    // Appends one configuration flip-flop to the scan chain.
    int32_t add_cfg_bit(BitCategory cat, std::string path)
    {
        Netlist &nl = f_.netlist;
        int32_t idx = int32_t(f_.chain.size());
        NetId q = nl.net("cfg" + std::to_string(idx));
        NetId d = f_.chain.empty() ? scan_head_ : f_.chain.back();
        int32_t cell = nl.add_cell(CellType::Cdff, q, {d});
        f_.chain.push_back(q);
        f_.chain_cells.push_back(cell);
        f_.layout.push_back(cat);
        f_.bit_path.push_back(std::move(path));
        return idx;
    }

    // K-input LUT: 2^k LOGIC bits read out through a complete MUX2 tree.
    std::vector<int32_t> add_lut(int k, const std::vector<NetId> &sel_pins, NetId out, const std::string &path)
    {
        std::vector<int32_t> bits;
        std::vector<NetId> leaves;
        for (int j = 0; j < (1 << k); ++j) {
            int32_t b = add_cfg_bit(BitCategory::Logic, path + "/lut" + std::to_string(j));
            bits.push_back(b);
            leaves.push_back(f_.chain[size_t(b)]);
        }
        detail::build_mux_tree(f_.netlist, out, leaves, sel_pins);
        return bits;
    }

    // LUT + DFF + output-select mux; the select is one LOGIC bit.
    Ble add_ble(int k, const std::vector<NetId> &pin_nets, const std::string &base, const std::string &path)
    {
        Netlist &nl = f_.netlist;
        Ble ble;
        ble.lut_out = nl.net(base + "_lut");
        ble.ff_q = nl.net(base + "_ff");
        ble.out = nl.net(base + "_out");
        ble.lut_bits = add_lut(k, pin_nets, ble.lut_out, path);
        ble.mode_bit = add_cfg_bit(BitCategory::Logic, path + "/mode");
        nl.add_cell(CellType::Dff, ble.ff_q, {ble.lut_out});
        nl.add_cell(CellType::Mux2, ble.out, {ble.lut_out, ble.ff_q, f_.chain[size_t(ble.mode_bit)]});
        return ble;
    }

    // Full-crossbar CLB: every BLE input pin selects among (I inputs + n BLE
    // outputs) with binary-encoded LOCAL_ROUTING bits.
    void add_clb(ClbTile &tile, const std::string &base, const std::string &path)
    {
        Netlist &nl = f_.netlist;
        int k = arch_.k, n = arch_.n;
        std::vector<NetId> ble_outs;
        for (int b = 0; b < n; ++b)
            ble_outs.push_back(nl.net(base + "_b" + std::to_string(b) + "_out"));
        std::vector<NetId> xbar_sources = tile.in_pins;
        xbar_sources.insert(xbar_sources.end(), ble_outs.begin(), ble_outs.end());
        int sel_count = ceil_log2(xbar_sources.size());

        for (int b = 0; b < n; ++b) {
            std::string bbase = base + "_b" + std::to_string(b);
            std::string bpath = path + "/ble" + std::to_string(b);
            std::vector<NetId> pins;
            for (int p = 0; p < k; ++p)
                pins.push_back(nl.net(bbase + "_p" + std::to_string(p)));
            Ble ble = add_ble(k, pins, bbase, bpath);
            for (int p = 0; p < k; ++p) {
                XbarMux xm;
                xm.out = pins[size_t(p)];
                xm.sources = xbar_sources;
                std::vector<NetId> sels;
                for (int s = 0; s < sel_count; ++s) {
                    int32_t bit = add_cfg_bit(BitCategory::LocalRouting, bpath + "/xbar_p" + std::to_string(p) +
                                                                                 "/s" + std::to_string(s));
                    xm.sel_bits.push_back(bit);
                    sels.push_back(f_.chain[size_t(bit)]);
                }
                detail::build_mux_tree(nl, xm.out, xm.sources, sels);
                ble.pins.push_back(std::move(xm));
            }
            tile.bles.push_back(std::move(ble));
        }
    }

    // Closes the chain: scan_in_tail output buffered from the last Q.
    void finish()
    {
        Netlist &nl = f_.netlist;
        NetId tail = nl.net("scan_in_tail");
        nl.add_cell(CellType::Buf, tail, {f_.chain.empty() ? scan_head_ : f_.chain.back()});
        nl.add_output(tail);
    }

    Fabric take() { return std::move(f_); }

    Fabric &fabric() { return f_; }
    const ArchSpec &arch() const { return arch_; }
    NetId scan_head() const { return scan_head_; }

  private:
    ArchSpec arch_;
    Fabric f_;
    NetId scan_head_ = invalid_net;
};

// --- whole-fabric generation ----------------------------------------------------

namespace detail {

struct FabricGen
{
    const ArchSpec &a;
    FabricBuilder fb;
    Fabric &f;
    Netlist &nl;
    int B, L, spt; // grid, clipped segment length, segments per track

    std::vector<std::vector<int32_t>> feeds;       // wire node -> opin nodes, creation order
    std::vector<std::vector<int32_t>> ipin_src;    // ipin node -> wire nodes
    NetId gnd = invalid_net;
    int32_t gnd_node = -1;

    explicit FabricGen(const ArchSpec &arch)
            : a(arch), fb(arch, fabric_name(arch)), f(fb.fabric()), nl(f.netlist), B(arch.grid_b),
              L(std::min(arch.seg_len, arch.grid_b)), spt((arch.grid_b + L - 1) / L)
    {
    }

    static std::string fabric_name(const ArchSpec &s)
    {
        return "fabric_k" + std::to_string(s.k) + "n" + std::to_string(s.n) + "b" + std::to_string(s.grid_b);
    }

    bool is_clb(int x, int y) const { return x >= 1 && x <= B && y >= 1 && y <= B; }
    bool is_io(int x, int y) const
    {
        bool xe = (x == 0 || x == B + 1), ye = (y == 0 || y == B + 1);
        return (xe != ye); // perimeter, corners excluded
    }

    int seg_lo(int pos) const { return ((pos - 1) / L) * L + 1; }
    int seg_index(int pos) const { return (pos - 1) / L; }

    int32_t wire_node(bool horiz, int chan, int track, int seg) const
    {
        int per_chan = a.w * spt;
        int base = horiz ? 0 : (B + 1) * per_chan;
        return int32_t(base + chan * per_chan + track * spt + seg);
    }

    std::string wire_name(bool horiz, int chan, int track, int lo) const
    {
        return std::string(horiz ? "wh" : "wv") + std::to_string(chan) + "_t" + std::to_string(track) + "_" +
               std::to_string(lo);
    }

    // channel and position adjacent to a CLB pin on side s (0:S 1:N 2:W 3:E)
    void pin_channel(int x, int y, int side, bool &horiz, int &chan, int &pos) const
    {
        switch (side) {
        case 0:
            horiz = true, chan = y - 1, pos = x;
            break;
        case 1:
            horiz = true, chan = y, pos = x;
            break;
        case 2:
            horiz = false, chan = x - 1, pos = y;
            break;
        default:
            horiz = false, chan = x, pos = y;
            break;
        }
    }

    // channel adjacent to an I/O tile
    void io_channel(int x, int y, bool &horiz, int &chan, int &pos) const
    {
        if (x == 0)
            horiz = false, chan = 0, pos = y;
        else if (x == B + 1)
            horiz = false, chan = B, pos = y;
        else if (y == 0)
            horiz = true, chan = 0, pos = x;
        else
            horiz = true, chan = B, pos = x;
    }

    // evenly spaced tracks with per-pin rotation
    std::vector<int> fc_track_list(int pin_index, int nc) const
    {
        std::vector<int> tracks;
        int offset = pin_index % a.w;
        for (int j = 0; j < nc; ++j)
            tracks.push_back((offset + int(int64_t(j) * a.w / nc)) % a.w);
        return tracks;
    }

    Fabric run()
    {
        build_wire_nodes();
        build_tile_structure();
        build_cells();
        fb.finish();
        nl.check();
        Fabric out = fb.take();
        return out;
    }

    void build_wire_nodes()
    {
        size_t total = size_t(2) * size_t(B + 1) * size_t(a.w) * size_t(spt);
        f.nodes.reserve(total + size_t(B) * size_t(B) * 16);
        for (int h = 0; h < 2; ++h) {
            bool horiz = (h == 0);
            for (int chan = 0; chan <= B; ++chan)
                for (int track = 0; track < a.w; ++track)
                    for (int seg = 0; seg < spt; ++seg) {
                        int lo = seg * L + 1;
                        int hi = std::min(lo + L - 1, B);
                        RRNode node;
                        node.kind = RRNode::Kind::Wire;
                        node.horiz = horiz;
                        node.chan = chan;
                        node.track = track;
                        node.lo = lo;
                        node.hi = hi;
                        node.inc = (track % 2 == 0);
                        node.net = nl.net(wire_name(horiz, chan, track, lo));
                        assert(int32_t(f.nodes.size()) == wire_node(horiz, chan, track, seg));
                        f.nodes.push_back(node);
                    }
        }
        feeds.resize(f.nodes.size());
    }

    int32_t add_node(RRNode node)
    {
        f.nodes.push_back(node);
        feeds.resize(f.nodes.size());
        return int32_t(f.nodes.size()) - 1;
    }

    // Phase A: pins, pads, feed registration, ipin candidates. Tile walking
    // order here fixes the order of mux inputs, not of config bits.
    void build_tile_structure()
    {
        int I = clb_inputs(a);
        int nc_in = fc_tracks(a.fc_in, a.w);
        int nc_out = fc_tracks(a.fc_out, a.w);
        f.clbs.resize(size_t(B) * size_t(B));
        for (int y = 0; y <= B + 1; ++y) {
            for (int x = 0; x <= B + 1; ++x) {
                if (is_clb(x, y)) {
                    ClbTile &tile = f.clbs[size_t((y - 1) * B + (x - 1))];
                    tile.x = x;
                    tile.y = y;
                    std::string base = "t" + std::to_string(x) + "_" + std::to_string(y);
                    for (int i = 0; i < I; ++i) {
                        NetId pin = nl.net(base + "_in" + std::to_string(i));
                        tile.in_pins.push_back(pin);
                        RRNode node;
                        node.kind = RRNode::Kind::Ipin;
                        node.net = pin;
                        int32_t id = add_node(node);
                        tile.ipin_nodes.push_back(id);
                        bool horiz;
                        int chan, pos;
                        pin_channel(x, y, i % 4, horiz, chan, pos);
                        ipin_src.resize(f.nodes.size());
                        for (int t : fc_track_list(i, nc_in))
                            ipin_src[size_t(id)].push_back(wire_node(horiz, chan, t, seg_index(pos)));
                    }
                    for (int o = 0; o < a.n; ++o) {
                        NetId out = nl.net(base + "_b" + std::to_string(o) + "_out");
                        RRNode node;
                        node.kind = RRNode::Kind::Opin;
                        node.net = out;
                        int32_t id = add_node(node);
                        tile.opin_nodes.push_back(id);
                        bool horiz;
                        int chan, pos;
                        pin_channel(x, y, o % 4, horiz, chan, pos);
                        for (int t : fc_track_list(I + o, nc_out))
                            feeds[size_t(wire_node(horiz, chan, t, seg_index(pos)))].push_back(id);
                    }
                } else if (is_io(x, y)) {
                    IoTile tile;
                    tile.x = x;
                    tile.y = y;
                    std::string base = "io" + std::to_string(x) + "_" + std::to_string(y);
                    bool horiz;
                    int chan, pos;
                    io_channel(x, y, horiz, chan, pos);
                    for (int p = 0; p < a.io_cap; ++p) {
                        NetId pi = nl.add_input(base + "_pi" + std::to_string(p));
                        NetId po = nl.net(base + "_po" + std::to_string(p));
                        tile.pad_in.push_back(pi);
                        tile.pad_out.push_back(po);
                        RRNode in_node;
                        in_node.kind = RRNode::Kind::Opin; // drives the fabric
                        in_node.net = pi;
                        int32_t in_id = add_node(in_node);
                        tile.padin_nodes.push_back(in_id);
                        for (int t : fc_track_list(p, nc_out))
                            feeds[size_t(wire_node(horiz, chan, t, seg_index(pos)))].push_back(in_id);
                        RRNode out_node;
                        out_node.kind = RRNode::Kind::Ipin;
                        out_node.net = po;
                        int32_t out_id = add_node(out_node);
                        tile.padout_nodes.push_back(out_id);
                        ipin_src.resize(f.nodes.size());
                        for (int t : fc_track_list(p, nc_in))
                            ipin_src[size_t(out_id)].push_back(wire_node(horiz, chan, t, seg_index(pos)));
                    }
                    f.ios.push_back(std::move(tile));
                }
            }
        }
        ipin_src.resize(f.nodes.size());
    }

    // wire source list: feeds, straight, turns (deduplicated), tie if needed
    std::vector<int32_t> wire_sources(int32_t wid)
    {
        const RRNode &wn = f.nodes[size_t(wid)];
        std::vector<int32_t> src = feeds[size_t(wid)];
        auto push_unique = [&](int32_t id) {
            if (std::find(src.begin(), src.end(), id) == src.end())
                src.push_back(id);
        };
        bool has_straight = false;
        if (wn.inc && wn.lo > 1) {
            push_unique(wire_node(wn.horiz, wn.chan, wn.track, seg_index(wn.lo - 1)));
            has_straight = true;
        } else if (!wn.inc && wn.hi < B) {
            push_unique(wire_node(wn.horiz, wn.chan, wn.track, seg_index(wn.hi + 1)));
            has_straight = true;
        }
        // start junction
        int jx, jy;
        if (wn.horiz) {
            jx = wn.inc ? wn.lo - 1 : wn.hi;
            jy = wn.chan;
        } else {
            jx = wn.chan;
            jy = wn.inc ? wn.lo - 1 : wn.hi;
        }
        int cross_chan = wn.horiz ? jx : jy;
        int lower_pos = wn.horiz ? jy : jx;
        for (int i = 1; i < a.fs; ++i) {
            int ct = (wn.track + (i + 1) / 2) % a.w;
            int pos = (i % 2 == 1) ? lower_pos : lower_pos + 1;
            if (pos < 1 || pos > B)
                continue;
            push_unique(wire_node(!wn.horiz, cross_chan, ct, seg_index(pos)));
        }
        if (feeds[size_t(wid)].empty() && !has_straight) {
            if (gnd_node < 0) {
                gnd = nl.net("gnd");
                nl.add_cell(CellType::Const0, gnd, {});
                RRNode node;
                node.kind = RRNode::Kind::Opin;
                node.net = gnd;
                gnd_node = add_node(node);
            }
            src.insert(src.begin(), gnd_node);
        }
        return src;
    }

    void add_rr_mux(int32_t target, std::vector<int32_t> sources, BitCategory cat, const std::string &path)
    {
        RRMux mux;
        mux.target = target;
        mux.sources = std::move(sources);
        std::vector<NetId> source_nets;
        for (int32_t s : mux.sources)
            source_nets.push_back(f.nodes[size_t(s)].net);
        int sel_count = ceil_log2(mux.sources.size());
        std::vector<NetId> sels;
        for (int s = 0; s < sel_count; ++s) {
            int32_t bit = fb.add_cfg_bit(cat, path + "/s" + std::to_string(s));
            mux.sel_bits.push_back(bit);
            sels.push_back(f.chain[size_t(bit)]);
        }
        detail::build_mux_tree(nl, f.nodes[size_t(target)].net, source_nets, sels);
        f.muxes.push_back(std::move(mux));
    }

    // Phase B: cells and config bits, tiles walked in scan order.
    void build_cells()
    {
        size_t io_index = 0;
        for (int y = 0; y <= B + 1; ++y) {
            for (int x = 0; x <= B + 1; ++x) {
                std::string tpath = "tile_" + std::to_string(x) + "_" + std::to_string(y);
                if (is_clb(x, y)) {
                    ClbTile &tile = f.clbs[size_t((y - 1) * B + (x - 1))];
                    std::string base = "t" + std::to_string(x) + "_" + std::to_string(y);
                    fb.add_clb(tile, base, tpath);
                    for (size_t i = 0; i < tile.ipin_nodes.size(); ++i)
                        add_rr_mux(tile.ipin_nodes[i], ipin_src[size_t(tile.ipin_nodes[i])], BitCategory::Cb,
                                   tpath + "/cb_in" + std::to_string(i));
                } else if (is_io(x, y)) {
                    IoTile &tile = f.ios[io_index++];
                    for (size_t p = 0; p < tile.padout_nodes.size(); ++p)
                        add_rr_mux(tile.padout_nodes[p], ipin_src[size_t(tile.padout_nodes[p])], BitCategory::Io,
                                   tpath + "/pad" + std::to_string(p));
                }
                // wires starting at junction (x, y)
                if (x <= B && y <= B) {
                    for (int h = 0; h < 2; ++h) {
                        bool horiz = (h == 0);
                        for (int track = 0; track < a.w; ++track)
                            for (int seg = 0; seg < spt; ++seg) {
                                int32_t wid = wire_node(horiz, horiz ? y : x, track, seg);
                                const RRNode &wn = f.nodes[size_t(wid)];
                                // does this wire start at (x, y)?
                                int jx, jy;
                                if (wn.horiz) {
                                    jx = wn.inc ? wn.lo - 1 : wn.hi;
                                    jy = wn.chan;
                                } else {
                                    jx = wn.chan;
                                    jy = wn.inc ? wn.lo - 1 : wn.hi;
                                }
                                if (jx != x || jy != y)
                                    continue;
                                add_rr_mux(wid, wire_sources(wid), BitCategory::Sb,
                                           "junc_" + std::to_string(x) + "_" + std::to_string(y) + "/" +
                                                   wire_name(wn.horiz, wn.chan, wn.track, wn.lo));
                            }
                    }
                }
            }
        }
        // outputs: pad_out ports in tile order
        for (const IoTile &tile : f.ios)
            for (NetId po : tile.pad_out)
                nl.add_output(po);
        f.mux_of_node.assign(f.nodes.size(), -1);
        for (int32_t m = 0; m < int32_t(f.muxes.size()); ++m)
            f.mux_of_node[size_t(f.muxes[size_t(m)].target)] = m;
    }
};

} // namespace detail

inline Fabric build_fabric(const ArchSpec &arch)
{
    detail::FabricGen gen(arch);
    return gen.run();
}

// Standalone LUT: ports in0..in{k-1}, out, plus the scan pair.
inline Netlist build_lut(int k)
{
    if (k < 1 || k > 8)
        throw NetlistError("build_lut: k must be in [1,8]");
    ArchSpec a;
    a.k = std::max(k, 2); // builder validation only; LUT uses `k` directly
    FabricBuilder fb(a, "lut" + std::to_string(k));
    Netlist &nl = fb.fabric().netlist;
    std::vector<NetId> sels;
    for (int i = 0; i < k; ++i)
        sels.push_back(nl.add_input("in" + std::to_string(i)));
    NetId out = nl.net("out");
    fb.add_lut(k, sels, out, "lut");
    nl.add_output(out);
    fb.finish();
    nl.check();
    return std::move(fb.fabric().netlist);
}

// Standalone BLE: LUT + DFF + mode mux.
inline Netlist build_ble(int k)
{
    if (k < 1 || k > 8)
        throw NetlistError("build_ble: k must be in [1,8]");
    ArchSpec a;
    a.k = std::max(k, 2);
    FabricBuilder fb(a, "ble" + std::to_string(k));
    Netlist &nl = fb.fabric().netlist;
    std::vector<NetId> pins;
    for (int i = 0; i < k; ++i)
        pins.push_back(nl.add_input("in" + std::to_string(i)));
    Ble ble = fb.add_ble(k, pins, "ble", "ble");
    nl.add_output(ble.out);
    fb.finish();
    nl.check();
    return std::move(fb.fabric().netlist);
}

// Standalone CLB with primary-input pins and BLE outputs as ports.
inline Netlist build_clb(const ArchSpec &arch)
{
    validate_or_throw(arch);
    FabricBuilder fb(arch, "clb");
    Netlist &nl = fb.fabric().netlist;
    ClbTile tile;
    tile.x = tile.y = 1;
    for (int i = 0; i < clb_inputs(arch); ++i)
        tile.in_pins.push_back(nl.add_input("t1_1_in" + std::to_string(i)));
    fb.add_clb(tile, "t1_1", "tile_1_1");
    for (const Ble &b : tile.bles)
        nl.add_output(b.out);
    fb.finish();
    nl.check();
    return std::move(fb.fabric().netlist);
}

// CDFF cells in declaration order (the chain order for generated sub-netlists).
inline std::vector<NetId> cdff_chain_by_declaration(const Netlist &n)
{
    std::vector<NetId> chain;
    for (const Cell &c : n.cells())
        if (c.type == CellType::Cdff)
            chain.push_back(c.out);
    return chain;
}

// --- configuration ----------------------------------------------------------------

struct ConfigError : std::runtime_error
{
    enum class Kind { LengthMismatch, Cyclic };
    Kind kind;
    ConfigError(Kind kind, const std::string &msg) : std::runtime_error(msg), kind(kind) {}
};

// The active sub-circuit of a configured fabric: an acyclic netlist whose
// inputs are the user pads and whose outputs are the pad outputs. Data DFFs
// survive as state boundaries.
struct ConfiguredView
{
    Netlist proj;
    std::vector<NetId> state_q, state_d; // per DFF, in declaration order

    std::vector<bool> eval(const std::vector<bool> &inputs, const std::vector<bool> &state = {}) const
    {
        if (inputs.size() != proj.inputs().size())
            throw NetlistError("sim_configured: expected " + std::to_string(proj.inputs().size()) + " inputs");
        std::unordered_map<NetId, bool> asg;
        for (size_t i = 0; i < inputs.size(); ++i)
            asg[proj.inputs()[i]] = inputs[i];
        if (!state.empty()) {
            if (state.size() != state_q.size())
                throw NetlistError("sim_configured: bad state size");
            for (size_t i = 0; i < state.size(); ++i)
                asg[state_q[i]] = state[i];
        }
        auto vals = evaluate_acyclic(proj, asg);
        std::vector<bool> out;
        out.reserve(proj.outputs().size());
        for (NetId o : proj.outputs()) {
            Tri v = vals[size_t(o)];
            if (v == Tri::X)
                throw NetlistError("sim_configured: output '" + proj.net_name(o) + "' is undetermined");
            out.push_back(v == Tri::T);
        }
        return out;
    }
};

// Kleene constant propagation from pinned nets; primary inputs and data-DFF
// outputs stay X. Monotone, so the sweep count is bounded.
inline std::vector<Tri> propagate_constants(const Netlist &n, const std::unordered_map<NetId, bool> &pinned)
{
    std::vector<Tri> v(n.num_nets(), Tri::X);
    for (const auto &[id, b] : pinned)
        v[size_t(id)] = tri_of(b);
    for (;;) {
        bool changed = false;
        for (const Cell &c : n.cells()) {
            if (is_sequential(c.type) || pinned.count(c.out))
                continue;
            Tri a = c.ins.size() > 0 ? v[size_t(c.ins[0])] : Tri::X;
            Tri b = c.ins.size() > 1 ? v[size_t(c.ins[1])] : Tri::X;
            Tri s = c.ins.size() > 2 ? v[size_t(c.ins[2])] : Tri::X;
            Tri out = eval_cell(c.type, a, b, s);
            if (out != Tri::X && out != v[size_t(c.out)]) {
                v[size_t(c.out)] = out;
                changed = true;
            }
        }
        if (!changed)
            break;
    }
    return v;
}

// Netlist-level configuration: pins the chain Q nets to bit values, folds
// constants, extracts the cone of the user outputs, and checks acyclicity.
// Works from (netlist, chain) alone so CLI tools can run without rr metadata.
inline ConfiguredView configure(const Netlist &nl, const std::vector<NetId> &chain, const Bitstream &bits)
{
    if (bits.size() != chain.size())
        throw ConfigError(ConfigError::Kind::LengthMismatch,
                          "bitstream length " + std::to_string(bits.size()) + " != chain length " +
                                  std::to_string(chain.size()));
    std::unordered_map<NetId, bool> pinned;
    pinned.reserve(chain.size());
    for (size_t i = 0; i < chain.size(); ++i)
        pinned[chain[i]] = bits.bits[i] != 0;
    std::vector<Tri> cv = propagate_constants(nl, pinned);

    ConfiguredView view;
    Netlist &proj = view.proj;
    proj.set_name(nl.name() + "_cfg");

    std::optional<NetId> head = nl.find_net("scan_in_head");
    std::optional<NetId> tail = nl.find_net("scan_in_tail");
    auto is_scan_port = [&](NetId id) { return (head && *head == id) || (tail && *tail == id); };

    NetId c0 = invalid_net, c1 = invalid_net;
    auto const_net = [&](bool val) {
        NetId &slot = val ? c1 : c0;
        if (slot == invalid_net) {
            slot = proj.net(val ? "const1" : "const0");
            proj.add_cell(val ? CellType::Const1 : CellType::Const0, slot, {});
        }
        return slot;
    };

    // copy user inputs
    for (NetId in : nl.inputs())
        if (!is_scan_port(in))
            proj.add_input(proj.net(nl.net_name(in)));

    // backward cone from user outputs over live dependencies
    std::vector<bool> cell_needed(nl.cells().size(), false);
    std::vector<NetId> work;
    auto need_net = [&](NetId id) {
        if (cv[size_t(id)] != Tri::X)
            return; // folds to a constant
        int32_t drv = nl.driver(id);
        if (drv >= 0 && !cell_needed[size_t(drv)]) {
            cell_needed[size_t(drv)] = true;
            work.push_back(id);
        }
    };
    for (NetId out : nl.outputs())
        if (!is_scan_port(out))
            need_net(out);
    while (!work.empty()) {
        NetId id = work.back();
        work.pop_back();
        const Cell &c = nl.cells()[size_t(nl.driver(id))];
        if (c.type == CellType::Cdff)
            continue; // pinned; value is a constant by construction
        if (c.type == CellType::Mux2 && cv[size_t(c.ins[2])] != Tri::X) {
            need_net(c.ins[size_t(cv[size_t(c.ins[2])] == Tri::T ? 1 : 0)]);
            continue;
        }
        for (NetId in : c.ins)
            need_net(in);
    }

    // emit simplified cells for the cone
    for (int32_t ci = 0; ci < int32_t(nl.cells().size()); ++ci) {
        if (!cell_needed[size_t(ci)])
            continue;
        const Cell &c = nl.cells()[size_t(ci)];
        NetId out = proj.net(nl.net_name(c.out));
        if (c.type == CellType::Mux2 && cv[size_t(c.ins[2])] != Tri::X) {
            NetId sel_in = c.ins[size_t(cv[size_t(c.ins[2])] == Tri::T ? 1 : 0)];
            NetId src = cv[size_t(sel_in)] != Tri::X ? const_net(cv[size_t(sel_in)] == Tri::T)
                                                     : proj.net(nl.net_name(sel_in));
            proj.add_cell(CellType::Buf, out, {src});
            continue;
        }
        std::vector<NetId> ins;
        for (NetId in : c.ins)
            ins.push_back(cv[size_t(in)] != Tri::X ? const_net(cv[size_t(in)] == Tri::T)
                                                   : proj.net(nl.net_name(in)));
        proj.add_cell(c.type, out, std::move(ins));
    }
    for (const Cell &c : proj.cells())
        if (c.type == CellType::Dff) {
            view.state_q.push_back(c.out);
            view.state_d.push_back(c.ins[0]);
        }

    // user outputs; constant-folded ones become const cells
    for (NetId out : nl.outputs()) {
        if (is_scan_port(out))
            continue;
        NetId po = proj.net(nl.net_name(out));
        if (cv[size_t(out)] != Tri::X && proj.driver(po) == driver_none)
            proj.add_cell(cv[size_t(out)] == Tri::T ? CellType::Const1 : CellType::Const0, po, {});
        proj.add_output(po);
    }

    if (!is_acyclic(proj))
        throw ConfigError(ConfigError::Kind::Cyclic, "configured projection contains a combinational cycle");
    return view;
}

inline ConfiguredView configure(const Fabric &f, const Bitstream &bits) { return configure(f.netlist, f.chain, bits); }

inline std::vector<bool> sim_configured(const ConfiguredView &view, const std::vector<bool> &inputs,
                                        const std::vector<bool> &state = {})
{
    return view.eval(inputs, state);
}

// Rejection-samples bitstreams whose projection is acyclic; later attempts
// bias routing bits toward the (provably safe) all-zero default.
inline Bitstream random_wellformed_bitstream(const Fabric &f, std::mt19937 &rng, int max_tries = 400)
{
    std::bernoulli_distribution coin(0.5);
    for (int attempt = 0; attempt < max_tries; ++attempt) {
        double keep_zero = std::min(0.9, 0.15 * (attempt / 40));
        Bitstream b;
        b.bits.resize(f.bitstream_bits());
        for (size_t i = 0; i < b.bits.size(); ++i) {
            bool routing = f.layout[i] != BitCategory::Logic;
            if (routing && keep_zero > 0 && std::bernoulli_distribution(keep_zero)(rng))
                b.bits[i] = 0;
            else
                b.bits[i] = coin(rng);
        }
        try {
            configure(f, b);
            return b;
        } catch (const ConfigError &) {
            continue;
        }
    }
    throw NetlistError("random_wellformed_bitstream: no acyclic sample found");
}

// --- layout sidecar ------------------------------------------------------------------

// `bit <index> <category> <resource-path>` per line, preceded by an arch
// comment so tools can regenerate the Fabric object deterministically.
inline std::string emit_layout(const Fabric &f)
{
    const ArchSpec &a = f.arch;
    std::ostringstream os;
    os << "# arch k=" << a.k << " n=" << a.n << " grid=" << a.grid_b << " w=" << a.w << " fc_in=" << a.fc_in
       << " fc_out=" << a.fc_out << " fs=" << a.fs << " seg_len=" << a.seg_len << " io_cap=" << a.io_cap << "\n";
    for (size_t i = 0; i < f.layout.size(); ++i)
        os << "bit " << i << " " << bit_category_name(f.layout[i]) << " " << f.bit_path[i] << "\n";
    return os.str();
}

struct LayoutFile
{
    std::optional<ArchSpec> arch;
    std::vector<BitCategory> layout;
    std::vector<std::string> paths;
};

struct LayoutError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

inline LayoutFile parse_layout(std::string_view text)
{
    LayoutFile lf;
    std::istringstream ss{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (line.rfind("# arch ", 0) == 0) {
            ArchSpec a;
            std::istringstream as(line.substr(7));
            std::string kv;
            while (as >> kv) {
                auto eq = kv.find('=');
                if (eq == std::string::npos)
                    throw LayoutError("bad arch comment");
                std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
                if (key == "k")
                    a.k = std::stoi(val);
                else if (key == "n")
                    a.n = std::stoi(val);
                else if (key == "grid")
                    a.grid_b = std::stoi(val);
                else if (key == "w")
                    a.w = std::stoi(val);
                else if (key == "fc_in")
                    a.fc_in = std::stod(val);
                else if (key == "fc_out")
                    a.fc_out = std::stod(val);
                else if (key == "fs")
                    a.fs = std::stoi(val);
                else if (key == "seg_len")
                    a.seg_len = std::stoi(val);
                else if (key == "io_cap")
                    a.io_cap = std::stoi(val);
            }
            lf.arch = a;
            continue;
        }
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag))
            continue;
        size_t index;
        std::string cat, path;
        if (tag != "bit" || !(ls >> index >> cat >> path))
            throw LayoutError("line " + std::to_string(lineno) + ": expected 'bit <index> <category> <path>'");
        if (index != lf.layout.size())
            throw LayoutError("line " + std::to_string(lineno) + ": non-contiguous bit index");
        auto c = bit_category_from_name(cat);
        if (!c)
            throw LayoutError("line " + std::to_string(lineno) + ": unknown category '" + cat + "'");
        lf.layout.push_back(*c);
        lf.paths.push_back(path);
    }
    return lf;
}

} // namespace efab
