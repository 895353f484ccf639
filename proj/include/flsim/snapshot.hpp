#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "flsim/errors.hpp"
#include "flsim/grid.hpp"
#include "flsim/skeleton.hpp"

namespace flsim {

// Binary field snapshot: 24-byte header (magic "FLSIM1", u8 d, u8 reserved,
// u32 n, u32 pad, u64 payload bytes), then n^d little-endian doubles in
// row-major order.  This code assumes a little-endian host.
namespace snapshot {

constexpr char kMagic[6] = {'F', 'L', 'S', 'I', 'M', '1'};

inline void write_field(std::ostream& os, const ScalarField& f) {
    const TorusGrid& g = f.grid;
    char header[24] = {};
    std::memcpy(header, kMagic, 6);
    header[6] = static_cast<char>(g.d);
    header[7] = 0;
    const auto n32 = static_cast<std::uint32_t>(g.n);
    std::memcpy(header + 8, &n32, 4);
    const std::uint64_t payload = static_cast<std::uint64_t>(f.size()) * 8;
    std::memcpy(header + 16, &payload, 8);
    os.write(header, 24);
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(payload));
    if (!os) throw ConfigError("snapshot: write failed");
}

inline void write_field(const std::filesystem::path& path, const ScalarField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("snapshot: cannot open " + path.string() + " for writing");
    write_field(os, f);
}

inline ScalarField read_field(std::istream& is) {
    char header[24];
    is.read(header, 24);
    if (!is || std::memcmp(header, kMagic, 6) != 0)
        throw ConfigError("snapshot: bad magic or truncated header");
    const int d = static_cast<unsigned char>(header[6]);
    std::uint32_t n32;
    std::memcpy(&n32, header + 8, 4);
    std::uint64_t payload;
    std::memcpy(&payload, header + 16, 8);
    if (d < 1 || d > 4 || n32 < 2) throw ConfigError("snapshot: invalid header fields");
    TorusGrid grid(d, static_cast<int>(n32));
    if (payload != static_cast<std::uint64_t>(grid.total_points()) * 8)
        throw ConfigError("snapshot: payload length does not match n^d doubles");
    ScalarField f(grid);
    is.read(reinterpret_cast<char*>(f.values.data()), static_cast<std::streamsize>(payload));
    if (!is) throw ConfigError("snapshot: truncated payload");
    return f;
}

inline ScalarField read_field(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("snapshot: cannot open " + path.string());
    return read_field(is);
}

inline std::string frame_name(std::size_t index) {
    std::ostringstream os;
    os << "frame_" << std::setw(6) << std::setfill('0') << index << ".fls";
    return os.str();
}

// A path directory holds frame_000000.fls ... plus frame_dt.txt.
inline void write_path(const std::filesystem::path& dir, const DensityPath& p) {
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < p.frames.size(); ++i) write_field(dir / frame_name(i), p.frames[i]);
    std::ofstream meta(dir / "frame_dt.txt");
    meta << std::setprecision(17) << p.frame_dt << "\n";
    if (!meta) throw ConfigError("snapshot: cannot write path metadata");
}

inline DensityPath read_path(const std::filesystem::path& dir) {
    DensityPath p;
    std::ifstream meta(dir / "frame_dt.txt");
    if (!meta || !(meta >> p.frame_dt))
        throw ConfigError("snapshot: missing or unreadable frame_dt.txt in " + dir.string());
    for (std::size_t i = 0;; ++i) {
        const auto f = dir / frame_name(i);
        if (!std::filesystem::exists(f)) break;
        p.frames.push_back(read_field(f));
    }
    if (p.frames.empty()) throw ConfigError("snapshot: no frames in " + dir.string());
    p.grid = p.frames.front().grid;
    for (const auto& fr : p.frames)
        if (fr.grid != p.grid) throw ConfigError("snapshot: inconsistent frame grids");
    return p;
}

}  // namespace snapshot

}  // namespace flsim
