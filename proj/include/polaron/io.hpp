#pragma once

#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstring>

#include "polaron/config.hpp"

namespace polaron {

namespace io_detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace io_detail

/// Trajectory CSV: fixed column order, one timestamp line (excluded from the
/// determinism contract), config hash in the header.
inline void write_trajectory_csv(const std::string& path,
                                 const std::vector<TrajectoryFrame>& frames,
                                 std::uint64_t cfg_hash) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016" PRIx64, cfg_hash);
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    out << "# generated=" << now << "\n";
    out << "# config_hash=" << hash << "\n";
    out << "t,norm_psi,energy,e_phi,gap,err2,omega,phase_e,phase_omega,h1_psi,l2_phi\n";
    for (const auto& f : frames) {
        out << io_detail::fmt_double(f.t) << ',' << io_detail::fmt_double(f.norm_psi) << ','
            << io_detail::fmt_double(f.energy) << ',' << io_detail::fmt_double(f.e_phi) << ','
            << io_detail::fmt_double(f.gap) << ',' << io_detail::fmt_double(f.err2) << ','
            << io_detail::fmt_double(f.omega) << ',' << io_detail::fmt_double(f.phase_e) << ','
            << io_detail::fmt_double(f.phase_omega) << ',' << io_detail::fmt_double(f.h1_psi)
            << ',' << io_detail::fmt_double(f.l2_phi) << "\n";
    }
}

/// Plot-ready two-column file.
inline void write_xy(const std::string& path,
                     const std::vector<std::pair<double, double>>& xy, std::uint64_t cfg_hash,
                     const std::string& xlabel, const std::string& ylabel) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    char hash[32];
    std::snprintf(hash, sizeof hash, "%016" PRIx64, cfg_hash);
    out << "# config_hash=" << hash << "\n";
    out << "# " << xlabel << " " << ylabel << "\n";
    for (const auto& [x, y] : xy)
        out << io_detail::fmt_double(x) << ' ' << io_detail::fmt_double(y) << "\n";
}

// ---------------------------------------------------------------------------
// Checkpoints: little-endian raw layout with an explicit version byte.

static_assert(std::endian::native == std::endian::little,
              "checkpoint layout assumes a little-endian host");

struct Checkpoint {
    std::uint8_t format_version = 1;
    int dims = 0, n = 0;
    double box = 0;
    double alpha = 0;
    double t = 0;
    double phase_e = 0, phase_omega = 0;
    std::uint64_t config_hash = 0;
    std::vector<cplx> psi;
    std::vector<cplx> phi;
};

inline Checkpoint make_checkpoint(const LPState& s, std::uint64_t cfg_hash) {
    Checkpoint c;
    c.dims = s.psi.psi.grid.dims;
    c.n = s.psi.psi.grid.n;
    c.box = s.psi.psi.grid.box;
    c.alpha = s.alpha;
    c.t = s.t;
    c.phase_e = s.phase_e;
    c.phase_omega = s.phase_omega;
    c.config_hash = cfg_hash;
    c.psi = s.psi.psi.values;
    c.phi = s.phi.amp.values;
    return c;
}

inline LPState restore_state(const Checkpoint& c) {
    SpectralGrid g = make_grid(c.n, c.box, c.dims);
    LPState s;
    s.psi = ElectronField(Field(g, Space::position, c.psi), false);
    s.phi = PhononField{Field(g, Space::momentum, c.phi), c.alpha};
    s.t = c.t;
    s.alpha = c.alpha;
    s.phase_e = c.phase_e;
    s.phase_omega = c.phase_omega;
    return s;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    const char magic[8] = {'P', 'L', 'R', 'N', 'C', 'K', 'P', 'T'};
    out.write(magic, 8);
    auto put = [&out](const void* p, std::size_t n) {
        out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    };
    put(&c.format_version, 1);
    std::int32_t dims = c.dims, n = c.n;
    put(&dims, 4);
    put(&n, 4);
    put(&c.box, 8);
    put(&c.alpha, 8);
    put(&c.t, 8);
    put(&c.phase_e, 8);
    put(&c.phase_omega, 8);
    put(&c.config_hash, 8);
    std::uint64_t npsi = c.psi.size(), nphi = c.phi.size();
    put(&npsi, 8);
    put(&nphi, 8);
    put(c.psi.data(), 16 * c.psi.size());
    put(c.phi.data(), 16 * c.phi.size());
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[8];
    in.read(magic, 8);
    if (std::memcmp(magic, "PLRNCKPT", 8) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    Checkpoint c;
    auto get = [&in](void* p, std::size_t n) {
        in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    };
    get(&c.format_version, 1);
    if (c.format_version != 1)
        throw std::runtime_error("unsupported checkpoint version");
    std::int32_t dims, n;
    get(&dims, 4);
    get(&n, 4);
    c.dims = dims;
    c.n = n;
    get(&c.box, 8);
    get(&c.alpha, 8);
    get(&c.t, 8);
    get(&c.phase_e, 8);
    get(&c.phase_omega, 8);
    get(&c.config_hash, 8);
    std::uint64_t npsi, nphi;
    get(&npsi, 8);
    get(&nphi, 8);
    c.psi.resize(npsi);
    c.phi.resize(nphi);
    get(c.psi.data(), 16 * npsi);
    get(c.phi.data(), 16 * nphi);
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    return c;
}

}  // namespace polaron
