#pragma once

#include <optional>
#include <random>

#include "polaron/grid.hpp"

namespace polaron {

/// Classical phonon amplitude phi(k), momentum space. Carries the coupling
/// alpha for time-scale bookkeeping; the k = 0 mode is ignored by every
/// coupling built from it.
struct PhononField {
    Field amp;      // momentum space
    double alpha = 1.0;

    PhononField() = default;
    PhononField(Field a, double al) : amp(std::move(a)), alpha(al) {
        if (amp.space != Space::momentum)
            throw std::invalid_argument("PhononField: amplitude must be momentum space");
        if (!(alpha > 0)) throw std::invalid_argument("PhononField: alpha must be positive");
    }
};

/// Electron wave function, position space, L2-normalized.
struct ElectronField {
    Field psi;      // position space

    ElectronField() = default;
    explicit ElectronField(Field p, bool enforce_norm = true) : psi(std::move(p)) {
        if (psi.space != Space::position)
            throw std::invalid_argument("ElectronField: psi must be position space");
        if (enforce_norm) {
            double n = norm_l2(psi);
            if (std::abs(n - 1.0) > 1e-10) {
                if (n == 0) throw std::invalid_argument("ElectronField: zero field");
                for (auto& v : psi.values) v /= n;
            }
        }
    }
};

inline ElectronField normalized(Field p) {
    double n = norm_l2(p);
    if (n == 0) throw std::invalid_argument("normalized: zero field");
    for (auto& v : p.values) v /= n;
    return ElectronField(std::move(p), false);
}

/// V_phi(x) = sum_k dk^d |k|^{-1} (phi(k) e^{ikx} + conj(phi(k)) e^{-ikx}),
/// k = 0 omitted. The two terms are transformed separately; the imaginary
/// residue is checked against 1e-10 * ||V||_2 before being discarded, so a
/// convention bug surfaces instead of being symmetrized away.
inline Field potential_from_phonons(const PhononField& phi) {
    const auto& g = phi.amp.grid;
    const auto& tb = *g.tables;
    const double fac = std::pow(2 * kPi, 0.5 * g.dims);

    Field g1(g, Space::momentum), g2(g, Space::momentum);
    for (std::size_t i = 0; i < g.size(); ++i) {
        g1.values[i] = tb.kinv[i] * phi.amp.values[i];
        g2.values[i] = tb.kinv[i] * std::conj(phi.amp.values[tb.reflect[i]]);
    }
    Field t1 = transform(g1);
    Field t2 = transform(g2);

    Field V(g, Space::position);
    double max_im = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        cplx v = fac * (t1.values[i] + t2.values[i]);
        max_im = std::max(max_im, std::abs(v.imag()));
        V.values[i] = v.real();
    }
    double n2 = norm_l2(V);
    if (n2 > 0 && max_im > 1e-10 * n2)
        throw NumericalError("potential_from_phonons: imaginary residue too large");
    return V;
}

/// sigma_psi(k) = |k|^{-1} \int dx e^{-ikx} |psi(x)|^2, k = 0 mode set to 0.
inline Field sigma_from_electron(const ElectronField& psi) {
    const auto& g = psi.psi.grid;
    Field rho(g, Space::position);
    for (std::size_t i = 0; i < g.size(); ++i)
        rho.values[i] = std::norm(psi.psi.values[i]);
    Field rho_hat = transform(rho);
    const double fac = std::pow(2 * kPi, 0.5 * g.dims);
    const auto& kinv = g.tables->kinv;
    Field sigma(g, Space::momentum);
    for (std::size_t i = 0; i < g.size(); ++i)
        sigma.values[i] = fac * kinv[i] * rho_hat.values[i];
    return sigma;
}

/// V_{i phi}: the potential built from the field i*phi. Along a trajectory,
/// d/dt V_{phi_t} = -alpha^{-2} V_{i phi_t}.
inline Field potential_i_phi(const PhononField& phi) {
    PhononField iphi = phi;
    for (auto& v : iphi.amp.values) v *= cplx(0, 1);
    return potential_from_phonons(iphi);
}

// ---------------------------------------------------------------------------
// Randomized functional-inequality ratio tracking.

struct InequalitySample {
    int sample_id;
    double ratio_v6;      // ||V_phi||_6 / ||phi||_2
    double ratio_vpsi;    // ||V_phi psi||_2 / (||phi||_2 ||psi||_H1)
    double ratio_sigma;   // ||sigma_psi||_2 / ||psi||_H1^2
    bool degenerate;      // 0/0 draw, skipped in the maxima
};

struct InequalityReport {
    std::vector<InequalitySample> samples;
    double max_v6 = 0, max_vpsi = 0, max_sigma = 0;
    int skipped = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline double uniform01(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace detail

/// Gaussian-random mode amplitudes with decay e^{-|k|^2/w^2}, w log-uniform
/// in [0.5, 4]: probes both smooth and rough fields. Amplitudes are keyed to
/// the integer mode coordinates, so refining the grid keeps every shared
/// mode's draw and only adds new ones; a band limit zeroes modes at or above
/// the given axis momentum, letting two resolutions sample one function.
inline Field random_mode_field(const SpectralGrid& g, std::uint64_t seed,
                               double band_limit = std::numeric_limits<double>::infinity()) {
    const auto& k2 = g.tables->k2;
    const auto& kax = g.tables->k_axis;
    const double w =
        std::exp(std::log(0.5) +
                 detail::uniform01(detail::splitmix64(seed ^ 0x77f11e5u)) * std::log(8.0));
    Field f(g, Space::momentum);
    const int n = g.n;
    auto mode_value = [&](int m1, int m2, int m3, double k2v) -> cplx {
        std::uint64_t h = seed;
        h = detail::splitmix64(h ^ static_cast<std::uint64_t>(m1 + (1 << 20)));
        h = detail::splitmix64(h ^ static_cast<std::uint64_t>(m2 + (1 << 20)));
        h = detail::splitmix64(h ^ static_cast<std::uint64_t>(m3 + (1 << 20)));
        double u1 = detail::uniform01(h);
        double u2 = detail::uniform01(detail::splitmix64(h));
        double r = std::sqrt(-2 * std::log(u1));
        return std::exp(-k2v / (w * w)) *
               cplx(r * std::cos(2 * kPi * u2), r * std::sin(2 * kPi * u2));
    };
    auto mi = [n](int i) { return i < n / 2 ? i : i - n; };
    if (g.dims == 1) {
        for (int i = 0; i < n; ++i) {
            if (std::abs(kax[i]) >= band_limit) continue;
            f.values[i] = mode_value(mi(i), 0, 0, k2[i]);
        }
    } else {
        std::size_t idx = 0;
        for (int ix = 0; ix < n; ++ix)
            for (int iy = 0; iy < n; ++iy)
                for (int iz = 0; iz < n; ++iz, ++idx) {
                    if (std::max({std::abs(kax[ix]), std::abs(kax[iy]), std::abs(kax[iz])}) >=
                        band_limit)
                        continue;
                    f.values[idx] = mode_value(mi(ix), mi(iy), mi(iz), k2[idx]);
                }
    }
    return f;
}

inline InequalityReport inequality_report(
    int samples, const SpectralGrid& grid, std::uint64_t seed = 1,
    double band_limit = std::numeric_limits<double>::infinity()) {
    if (samples < 1) throw std::invalid_argument("inequality_report: samples >= 1");
    InequalityReport rep;
    for (int s = 0; s < samples; ++s) {
        std::uint64_t s_seed = seed + static_cast<std::uint64_t>(s) * 0x9e3779b97f4a7c15ull;
        Field phi_amp = random_mode_field(grid, s_seed ^ 0xa5a5a5a5ull, band_limit);
        Field psi_mom = random_mode_field(grid, s_seed ^ 0x5a5a5a5aull, band_limit);

        InequalitySample row{s, 0, 0, 0, false};
        double phi_n = norm_l2(phi_amp);
        double psi_n = norm_l2(psi_mom);
        if (phi_n < 1e-300 || psi_n < 1e-300) {
            row.degenerate = true;
            rep.skipped++;
            rep.samples.push_back(row);
            continue;
        }
        PhononField phi{phi_amp, 1.0};
        Field psi_pos = transform(psi_mom);
        ElectronField psi = normalized(std::move(psi_pos));

        Field V = potential_from_phonons(phi);
        double h1 = norm_h1(psi.psi);
        Field Vpsi(grid, Space::position);
        for (std::size_t i = 0; i < grid.size(); ++i)
            Vpsi.values[i] = V.values[i] * psi.psi.values[i];
        Field sig = sigma_from_electron(psi);

        row.ratio_v6 = norm_lp(V, 6.0) / phi_n;
        row.ratio_vpsi = norm_l2(Vpsi) / (phi_n * h1);
        row.ratio_sigma = norm_l2(sig) / (h1 * h1);
        rep.samples.push_back(row);
        rep.max_v6 = std::max(rep.max_v6, row.ratio_v6);
        rep.max_vpsi = std::max(rep.max_vpsi, row.ratio_vpsi);
        rep.max_sigma = std::max(rep.max_sigma, row.ratio_sigma);
    }
    return rep;
}

}  // namespace polaron
