#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numbers>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <fftw3.h>

namespace polaron {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

/// Thrown when an iterative solver fails to reach its tolerance.
struct SolverError : std::runtime_error {
    double residual;
    SolverError(const std::string& what, double res)
        : std::runtime_error(what), residual(res) {}
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Space { position, momentum };

namespace detail {

// Immutable per-grid tables shared by all fields on the same grid.
struct GridTables {
    std::vector<double> k_axis;    // momentum per 1d index, FFT layout
    std::vector<double> x_axis;    // position per 1d index, x = -L/2 + i*dx
    std::vector<double> k2;        // |k|^2 per flat index
    std::vector<double> kinv;      // 1/|k|, 0 at the k = 0 mode
    std::vector<double> sign;      // (-1)^(sum of axis mode indices)
    std::vector<std::uint32_t> reflect;  // flat index of -k (mod lattice)
};

class FftPlans {
public:
    static FftPlans& instance() {
        static FftPlans p;
        return p;
    }

    // Plans are created once per (dims, n, direction) and shared; execution
    // on fresh arrays is thread safe, creation is serialized.
    fftw_plan get(int dims, int n, int sign) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto key = std::make_tuple(dims, n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::size_t total = 1;
        for (int i = 0; i < dims; ++i) total *= static_cast<std::size_t>(n);
        std::vector<cplx> a(total), b(total);
        auto* in = reinterpret_cast<fftw_complex*>(a.data());
        auto* out = reinterpret_cast<fftw_complex*>(b.data());
        unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        fftw_plan p = dims == 1 ? fftw_plan_dft_1d(n, in, out, sign, flags)
                                : fftw_plan_dft_3d(n, n, n, in, out, sign, flags);
        if (!p) throw NumericalError("fftw plan creation failed");
        plans_.emplace(key, p);
        return p;
    }

private:
    FftPlans() = default;
    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

}  // namespace detail

/// Periodic box discretization: N points per axis, box length L, d in {1,3}.
/// Momentum lattice is {2*pi*m/L : m = -N/2..N/2-1} per axis in FFT layout;
/// positions are x = -L/2 + i*dx.
struct SpectralGrid {
    int dims = 0;
    int n = 0;
    double box = 0.0;
    double dx = 0.0;
    double dk = 0.0;
    std::shared_ptr<const detail::GridTables> tables;

    std::size_t size() const {
        std::size_t t = 1;
        for (int i = 0; i < dims; ++i) t *= static_cast<std::size_t>(n);
        return t;
    }
    double cell_volume() const { return std::pow(dx, dims); }
    double mode_volume() const { return std::pow(dk, dims); }

    bool operator==(const SpectralGrid& o) const {
        return dims == o.dims && n == o.n && box == o.box;
    }
};

inline SpectralGrid make_grid(int points_per_axis, double box_length, int dims) {
    if (dims != 1 && dims != 3)
        throw std::invalid_argument("make_grid: dims must be 1 or 3");
    if (points_per_axis < 2 || points_per_axis % 2 != 0)
        throw std::invalid_argument("make_grid: points_per_axis must be even and >= 2");
    if (!(box_length > 0))
        throw std::invalid_argument("make_grid: box_length must be positive");

    SpectralGrid g;
    g.dims = dims;
    g.n = points_per_axis;
    g.box = box_length;
    g.dx = box_length / points_per_axis;
    g.dk = 2 * kPi / box_length;

    auto t = std::make_shared<detail::GridTables>();
    const int n = points_per_axis;
    t->k_axis.resize(n);
    t->x_axis.resize(n);
    for (int i = 0; i < n; ++i) {
        int m = i < n / 2 ? i : i - n;
        t->k_axis[i] = g.dk * m;
        t->x_axis[i] = -box_length / 2 + g.dx * i;
    }
    const std::size_t total = g.size();
    t->k2.resize(total);
    t->kinv.resize(total);
    t->sign.resize(total);
    t->reflect.resize(total);
    if (dims == 1) {
        for (int i = 0; i < n; ++i) {
            double k = t->k_axis[i];
            t->k2[i] = k * k;
            t->kinv[i] = i == 0 ? 0.0 : 1.0 / std::abs(k);
            t->sign[i] = (i % 2 == 0) ? 1.0 : -1.0;
            t->reflect[i] = static_cast<std::uint32_t>((n - i) % n);
        }
    } else {
        std::size_t idx = 0;
        for (int ix = 0; ix < n; ++ix)
            for (int iy = 0; iy < n; ++iy)
                for (int iz = 0; iz < n; ++iz, ++idx) {
                    double k2 = t->k_axis[ix] * t->k_axis[ix] +
                                t->k_axis[iy] * t->k_axis[iy] +
                                t->k_axis[iz] * t->k_axis[iz];
                    t->k2[idx] = k2;
                    t->kinv[idx] = k2 > 0 ? 1.0 / std::sqrt(k2) : 0.0;
                    t->sign[idx] = ((ix + iy + iz) % 2 == 0) ? 1.0 : -1.0;
                    std::size_t rx = (n - ix) % n, ry = (n - iy) % n, rz = (n - iz) % n;
                    t->reflect[idx] = static_cast<std::uint32_t>((rx * n + ry) * n + rz);
                }
    }
    g.tables = std::move(t);
    return g;
}

/// Complex scalar field over a grid, tagged by the representation it lives in.
/// Fields are values: operations return new fields.
struct Field {
    SpectralGrid grid;
    Space space = Space::position;
    std::vector<cplx> values;

    Field() = default;
    Field(SpectralGrid g, Space s) : grid(std::move(g)), space(s), values(grid.size()) {}
    Field(SpectralGrid g, Space s, std::vector<cplx> v)
        : grid(std::move(g)), space(s), values(std::move(v)) {
        if (values.size() != grid.size())
            throw std::invalid_argument("Field: value count does not match grid");
    }

    double measure() const {
        return space == Space::position ? grid.cell_volume() : grid.mode_volume();
    }
};

/// Unitary Fourier map with continuum normalization: the forward direction
/// (position -> momentum) carries (2*pi)^{-d/2}, so Parseval holds with the
/// measure weights dx^d and dk^d.
inline Field transform(const Field& f) {
    const auto& g = f.grid;
    const auto& tb = *g.tables;
    const std::size_t total = g.size();
    Field out(g, f.space == Space::position ? Space::momentum : Space::position);
    const double norm2pi = std::pow(2 * kPi, -0.5 * g.dims);

    fftw_plan plan = detail::FftPlans::instance().get(
        g.dims, g.n, f.space == Space::position ? FFTW_FORWARD : FFTW_BACKWARD);

    if (f.space == Space::position) {
        std::vector<cplx> in(f.values);
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.values.data()));
        const double scale = norm2pi * g.cell_volume();
        for (std::size_t i = 0; i < total; ++i) out.values[i] *= scale * tb.sign[i];
    } else {
        std::vector<cplx> in(total);
        for (std::size_t i = 0; i < total; ++i) in[i] = tb.sign[i] * f.values[i];
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                         reinterpret_cast<fftw_complex*>(out.values.data()));
        const double scale = norm2pi * g.mode_volume();
        for (auto& v : out.values) v *= scale;
    }
    return out;
}

enum class NormKind { L2, Lp, H1 };

inline double norm_l2(const Field& f) {
    double s = 0;
    for (const auto& v : f.values) s += std::norm(v);
    return std::sqrt(f.measure() * s);
}

inline double norm_lp(const Field& f, double p) {
    if (!(p > 0)) throw std::invalid_argument("norm_lp: p must be positive");
    if (f.space != Space::position)
        throw std::invalid_argument("norm_lp: field must be in position space");
    double s = 0;
    for (const auto& v : f.values) s += std::pow(std::abs(v), p);
    return std::pow(f.measure() * s, 1.0 / p);
}

/// (||f||_2^2 + ||grad f||_2^2)^{1/2}, gradient applied as ik in momentum space.
inline double norm_h1(const Field& f) {
    if (f.space != Space::position)
        throw std::invalid_argument("norm_h1: field must be in position space");
    Field fh = transform(f);
    const auto& k2 = f.grid.tables->k2;
    double s = 0;
    for (std::size_t i = 0; i < fh.values.size(); ++i)
        s += (1.0 + k2[i]) * std::norm(fh.values[i]);
    return std::sqrt(fh.measure() * s);
}

inline cplx inner(const Field& a, const Field& b) {
    if (!(a.grid == b.grid) || a.space != b.space)
        throw std::invalid_argument("inner: mismatched fields");
    cplx s = 0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        s += std::conj(a.values[i]) * b.values[i];
    return a.measure() * s;
}

// QoL arithmetic on same-representation fields.
inline Field operator*(cplx c, Field f) {
    for (auto& v : f.values) v *= c;
    return f;
}
inline Field operator+(Field a, const Field& b) {
    for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] += b.values[i];
    return a;
}
inline Field operator-(Field a, const Field& b) {
    for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] -= b.values[i];
    return a;
}

/// Kinetic symbol per flat momentum index. Spectral is the exact |k|^2;
/// ring_stencil is the nearest-neighbor lattice Laplacian dispersion,
/// 2(1-cos(k dx))/dx^2 summed over axes (diagonal in momentum space too).
enum class Dispersion { spectral, ring_stencil };

inline std::vector<double> dispersion_symbol(const SpectralGrid& g, Dispersion kind) {
    const auto& tb = *g.tables;
    if (kind == Dispersion::spectral) return tb.k2;
    std::vector<double> d(g.size());
    auto one_axis = [&](int i) {
        return (2.0 - 2.0 * std::cos(tb.k_axis[i] * g.dx)) / (g.dx * g.dx);
    };
    if (g.dims == 1) {
        for (int i = 0; i < g.n; ++i) d[i] = one_axis(i);
    } else {
        std::size_t idx = 0;
        for (int ix = 0; ix < g.n; ++ix)
            for (int iy = 0; iy < g.n; ++iy)
                for (int iz = 0; iz < g.n; ++iz, ++idx)
                    d[idx] = one_axis(ix) + one_axis(iy) + one_axis(iz);
    }
    return d;
}

/// Position coordinates of a flat index.
inline void grid_point(const SpectralGrid& g, std::size_t flat, double* xyz) {
    const auto& x = g.tables->x_axis;
    if (g.dims == 1) {
        xyz[0] = x[flat];
    } else {
        std::size_t nz = static_cast<std::size_t>(g.n);
        xyz[2] = x[flat % nz];
        xyz[1] = x[(flat / nz) % nz];
        xyz[0] = x[flat / (nz * nz)];
    }
}

inline double radius_at(const SpectralGrid& g, std::size_t flat) {
    double p[3] = {0, 0, 0};
    grid_point(g, flat, p);
    return std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
}

}  // namespace polaron
