// Fabric architecture parameters: validation, derived sizes, file format.
#pragma once

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace efab {

struct ArchSpec
{
    int k = 3;            // LUT input size
    int n = 2;            // BLEs per CLB
    int grid_b = 4;       // CLB tiles per side
    int w = 40;           // routing tracks per channel
    double fc_in = 0.15;  // fraction of tracks per CLB input pin
    double fc_out = 0.1;  // fraction of tracks per CLB output pin
    int fs = 3;           // switch-block fanout per incoming track
    int seg_len = 4;      // routing segment length in CLBs
    int io_cap = 8;       // pads per perimeter I/O tile

    bool operator==(const ArchSpec &) const = default;
};

struct ArchError
{
    std::string field;
    std::string message;
};

struct ArchValidationError : std::runtime_error
{
    std::vector<ArchError> errors;
    explicit ArchValidationError(std::vector<ArchError> errs)
            : std::runtime_error(join(errs)), errors(std::move(errs))
    {
    }
    static std::string join(const std::vector<ArchError> &errs)
    {
        std::string s = "invalid architecture:";
        for (const auto &e : errs)
            s += " [" + e.field + ": " + e.message + "]";
        return s;
    }
};

// Every violated bound is reported, not only the first.
inline std::vector<ArchError> validate(const ArchSpec &a)
{
    std::vector<ArchError> errs;
    auto bad = [&](const char *field, const std::string &msg) { errs.push_back({field, msg}); };
    if (a.k < 2 || a.k > 8)
        bad("k", "LUT input size must be in [2,8], got " + std::to_string(a.k));
    if (a.n < 1 || a.n > 8)
        bad("n", "BLEs per CLB must be in [1,8], got " + std::to_string(a.n));
    if (a.grid_b < 1 || a.grid_b > 16)
        bad("grid", "tiles per side must be in [1,16], got " + std::to_string(a.grid_b));
    if (a.w < 2)
        bad("w", "channel width must be >= 2, got " + std::to_string(a.w));
    else if (a.w % 2 != 0)
        bad("w", "channel width must be even (unidirectional track pairs), got " + std::to_string(a.w));
    if (!(a.fc_in > 0.0 && a.fc_in <= 1.0))
        bad("fc_in", "must be in (0,1], got " + std::to_string(a.fc_in));
    if (!(a.fc_out > 0.0 && a.fc_out <= 1.0))
        bad("fc_out", "must be in (0,1], got " + std::to_string(a.fc_out));
    if (a.fs < 1 || (a.w >= 2 && a.fs > a.w))
        bad("fs", "must be in [1,w], got " + std::to_string(a.fs));
    if (a.seg_len < 1 || (a.grid_b >= 1 && a.seg_len > a.grid_b))
        bad("seg_len", "must be in [1,grid], got " + std::to_string(a.seg_len));
    if (a.io_cap < 1 || a.io_cap > 64)
        bad("io_cap", "must be in [1,64], got " + std::to_string(a.io_cap));
    return errs;
}

inline const ArchSpec &validate_or_throw(const ArchSpec &a)
{
    auto errs = validate(a);
    if (!errs.empty())
        throw ArchValidationError(std::move(errs));
    return a;
}

// CLB input count I = ceil(k*(n+1)/2); fractional values round up so every
// LUT-input budget stays realizable.
inline int clb_inputs(const ArchSpec &a) { return (a.k * (a.n + 1) + 1) / 2; }

// Tracks reached by a pin at fc fraction of channel width, at least one.
inline int fc_tracks(double fc, int w)
{
    int t = int(std::lround(fc * w));
    return std::clamp(t, 1, w);
}

struct ArchFileError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// Line-oriented `key = value` text; `#` begins a comment; unknown keys are
// errors. Keys: k n grid w fc_in fc_out fs seg_len io_cap.
inline ArchSpec parse_arch(std::string_view text, const ArchSpec &base = ArchSpec{})
{
    ArchSpec a = base;
    std::istringstream ss{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.resize(hash);
        std::istringstream ls(line);
        std::string key, eq, value;
        if (!(ls >> key))
            continue;
        if (!(ls >> eq >> value) || eq != "=")
            throw ArchFileError("line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string extra;
        if (ls >> extra)
            throw ArchFileError("line " + std::to_string(lineno) + ": trailing token '" + extra + "'");
        auto as_int = [&]() {
            try {
                size_t pos = 0;
                int v = std::stoi(value, &pos);
                if (pos != value.size())
                    throw std::invalid_argument("");
                return v;
            } catch (...) {
                throw ArchFileError("line " + std::to_string(lineno) + ": '" + value + "' is not an integer");
            }
        };
        auto as_double = [&]() {
            try {
                size_t pos = 0;
                double v = std::stod(value, &pos);
                if (pos != value.size())
                    throw std::invalid_argument("");
                return v;
            } catch (...) {
                throw ArchFileError("line " + std::to_string(lineno) + ": '" + value + "' is not a number");
            }
        };
        if (key == "k")
            a.k = as_int();
        else if (key == "n")
            a.n = as_int();
        else if (key == "grid")
            a.grid_b = as_int();
        else if (key == "w")
            a.w = as_int();
        else if (key == "fc_in")
            a.fc_in = as_double();
        else if (key == "fc_out")
            a.fc_out = as_double();
        else if (key == "fs")
            a.fs = as_int();
        else if (key == "seg_len")
            a.seg_len = as_int();
        else if (key == "io_cap")
            a.io_cap = as_int();
        else
            throw ArchFileError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    return a;
}

inline std::string emit_arch(const ArchSpec &a)
{
    std::ostringstream os;
    os << "k = " << a.k << "\n"
       << "n = " << a.n << "\n"
       << "grid = " << a.grid_b << "\n"
       << "w = " << a.w << "\n"
       << "fc_in = " << a.fc_in << "\n"
       << "fc_out = " << a.fc_out << "\n"
       << "fs = " << a.fs << "\n"
       << "seg_len = " << a.seg_len << "\n"
       << "io_cap = " << a.io_cap << "\n";
    return os.str();
}

} // namespace efab
