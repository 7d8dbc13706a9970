#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "dhym/flow.hpp"
#include "dhym/grid.hpp"

namespace dhym {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

inline constexpr char kSnapshotMagic[4] = {'D', 'H', 'Y', 'M'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

/// Layout (little-endian): "DHYM", u32 version, u32 n, 2n × u32 axis sizes,
/// then f64 values in row-major node order.
inline std::string encode_snapshot(const ScalarField& f) {
    const GridSpec& g = f.grid();
    std::string out(kSnapshotMagic, 4);
    auto put_u32 = [&](std::uint32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); };
    put_u32(kSnapshotVersion);
    put_u32(static_cast<std::uint32_t>(g.n));
    for (int p : g.points) put_u32(static_cast<std::uint32_t>(p));
    out.append(reinterpret_cast<const char*>(f.values().data()), f.size() * sizeof(double));
    return out;
}

struct SnapshotHeader {
    int n = 0;
    std::vector<int> points;
};

/// Decodes a snapshot; the grid geometry comes from the caller since the file
/// stores only sizes.
inline ScalarField decode_snapshot(const std::string& bytes, const GridSpec& grid) {
    if (bytes.size() < 12) fail(ErrorKind::io, "snapshot size mismatch: file too short for a header");
    if (std::memcmp(bytes.data(), kSnapshotMagic, 4) != 0) fail(ErrorKind::io, "snapshot magic mismatch at offset 0");
    auto get_u32 = [&](std::size_t off) {
        std::uint32_t v;
        std::memcpy(&v, bytes.data() + off, 4);
        return v;
    };
    if (get_u32(4) != kSnapshotVersion)
        fail(ErrorKind::io, "snapshot version mismatch at offset 4: " + std::to_string(get_u32(4)));
    const int n = static_cast<int>(get_u32(8));
    if (n != grid.n) fail(ErrorKind::io, "snapshot dimension n=" + std::to_string(n) + " does not match grid");
    const std::size_t header = 12 + 4 * static_cast<std::size_t>(2 * n);
    if (bytes.size() < header) fail(ErrorKind::io, "snapshot size mismatch: truncated axis sizes");
    for (int a = 0; a < 2 * n; ++a)
        if (static_cast<int>(get_u32(12 + 4 * a)) != grid.points[a])
            fail(ErrorKind::io, "snapshot axis " + std::to_string(a) + " size does not match grid");
    const std::size_t expect = header + grid.node_count() * sizeof(double);
    if (bytes.size() != expect)
        fail(ErrorKind::io, "snapshot size mismatch: " + std::to_string(bytes.size()) + " bytes, expected " +
                                std::to_string(expect));
    std::vector<double> values(grid.node_count());
    std::memcpy(values.data(), bytes.data() + header, values.size() * sizeof(double));
    return ScalarField(grid, std::move(values));
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot write " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(ErrorKind::io, "write failed for " + path);
}

inline void write_snapshot(const ScalarField& f, const std::string& path) { write_file(path, encode_snapshot(f)); }

inline ScalarField read_snapshot(const std::string& path, const GridSpec& grid) {
    return decode_snapshot(read_file(path), grid);
}

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline constexpr const char* kDiagnosticsHeader = "t,J,S,sup_dtu,theta_min,theta_max,lambda_min,residual,comparison_ok";

inline std::string diagnostics_csv(const std::vector<DiagnosticsRow>& rows) {
    std::string out = std::string(kDiagnosticsHeader) + "\n";
    for (const auto& r : rows) {
        for (double v : {r.t, r.J, r.S, r.sup_dtu, r.theta_min, r.theta_max, r.lambda_min, r.residual}) {
            out += format_g17(v);
            out += ',';
        }
        out += r.comparison_ok ? "1\n" : "0\n";
    }
    return out;
}

inline void write_diagnostics(const std::vector<DiagnosticsRow>& rows, const std::string& path) {
    write_file(path, diagnostics_csv(rows));
}

inline std::string newton_trace_csv(const std::vector<NewtonTraceRow>& rows) {
    std::string out = "iteration,residual_sup,damping,linear_iterations,linear_residual\n";
    for (const auto& r : rows)
        out += std::to_string(r.iteration) + "," + format_g17(r.residual_sup) + "," + format_g17(r.damping) + "," +
               std::to_string(r.linear_iterations) + "," + format_g17(r.linear_residual) + "\n";
    return out;
}

inline std::string monitor_text(const MonitorReport& rep) {
    std::ostringstream os;
    for (const auto& i : rep.items) os << (i.passed ? "PASS " : "FAIL ") << i.name << ": " << i.detail << "\n";
    return os.str();
}

}  // namespace dhym
