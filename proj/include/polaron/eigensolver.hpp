#pragma once

#include <Eigen/Dense>

#include "polaron/fields.hpp"

namespace polaron {

/// h = -Delta + V on the grid, with -Delta applied through its momentum-space
/// symbol (spectral |k|^2 by default, ring stencil for lattice comparisons).
struct SchrodingerOp {
    Field V;                       // position space, real values
    std::vector<double> kinetic;   // dispersion symbol per flat momentum index

    SchrodingerOp() = default;
    explicit SchrodingerOp(Field v, Dispersion d = Dispersion::spectral)
        : V(std::move(v)), kinetic(dispersion_symbol(V.grid, d)) {
        if (V.space != Space::position)
            throw std::invalid_argument("SchrodingerOp: potential must be position space");
    }

    Field apply(const Field& psi) const {
        Field ph = transform(psi);
        for (std::size_t i = 0; i < ph.values.size(); ++i) ph.values[i] *= kinetic[i];
        Field out = transform(ph);
        for (std::size_t i = 0; i < out.values.size(); ++i)
            out.values[i] += V.values[i] * psi.values[i];
        return out;
    }

    // (kinetic + shift)^{-1}, applied spectrally. shift > 0 keeps it positive.
    Field precondition(const Field& r, double shift) const {
        Field rh = transform(r);
        for (std::size_t i = 0; i < rh.values.size(); ++i)
            rh.values[i] /= (kinetic[i] + shift);
        return transform(rh);
    }
};

/// Ground state data of h_phi: the phase-fixed eigenvector, its eigenvalue,
/// the distance to the next Rayleigh-Ritz level and both residuals.
struct GroundStateRecord {
    ElectronField psi_ground;
    ElectronField psi_excited;   // second eigenvector (valid when gap computed)
    double e = 0;
    double gap = 0;
    double residual = 0;
    double gap_residual = 0;
    bool has_gap = false;
    bool near_degenerate = false;
    int iterations = 0;
};

namespace detail {

inline void project_out(std::vector<cplx>& v, const std::vector<const Field*>& deflate,
                        const SpectralGrid& g, Space space) {
    const double meas = space == Space::position ? g.cell_volume() : g.mode_volume();
    for (const Field* d : deflate) {
        cplx ip = 0;
        for (std::size_t i = 0; i < v.size(); ++i) ip += std::conj(d->values[i]) * v[i];
        ip *= meas;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= ip * d->values[i];
    }
}

struct LowestEigResult {
    Field x;
    double lambda = 0;
    double residual = 0;
    int iterations = 0;
};

/// Locally optimal preconditioned Rayleigh-quotient minimization on the span
/// of {current iterate, preconditioned residual, previous direction}, with
/// optional deflation against already-converged eigenvectors.
inline LowestEigResult lowest_eigenpair(const SchrodingerOp& op, double tol, int max_iter,
                                        const Field* warm,
                                        const std::vector<const Field*>& deflate,
                                        std::uint64_t seed = 0x5deece66dull) {
    const auto& g = op.V.grid;
    const std::size_t n = g.size();
    const double meas = g.cell_volume();
    auto ip = [meas](const std::vector<cplx>& a, const std::vector<cplx>& b) {
        cplx s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
        return meas * s;
    };
    auto nrm = [&](const std::vector<cplx>& a) { return std::sqrt(std::real(ip(a, a))); };

    Field x(g, Space::position);
    if (warm) {
        x.values = warm->values;
    } else {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss;
        for (auto& v : x.values) v = cplx(gauss(rng), gauss(rng));
    }
    project_out(x.values, deflate, g, Space::position);
    double xn = nrm(x.values);
    if (xn < 1e-300) throw SolverError("lowest_eigenpair: start vector vanished", 0);
    for (auto& v : x.values) v /= xn;

    Field hx = op.apply(x);
    double lam = std::real(ip(x.values, hx.values));
    std::vector<cplx> r(n), p, hp;
    for (std::size_t i = 0; i < n; ++i) r[i] = hx.values[i] - lam * x.values[i];

    double rn = nrm(r);
    for (int it = 0; it < max_iter; ++it) {
        if (rn <= tol) {
            LowestEigResult res;
            res.x = std::move(x);
            res.lambda = lam;
            res.residual = rn;
            res.iterations = it;
            return res;
        }
        double shift = std::max(0.1, 1.0 - lam);
        Field rf(g, Space::position, r);
        Field w = op.precondition(rf, shift);
        project_out(w.values, deflate, g, Space::position);

        // Orthonormal basis {x, w, p}; near-dependent directions dropped.
        std::vector<std::vector<cplx>> basis, hbasis;
        basis.push_back(x.values);
        hbasis.push_back(hx.values);
        auto add_dir = [&](std::vector<cplx> cand, const std::vector<cplx>* hcand) {
            for (const auto& b : basis) {
                cplx c = ip(b, cand);
                for (std::size_t i = 0; i < n; ++i) cand[i] -= c * b[i];
            }
            double cn = nrm(cand);
            if (cn < 1e-10) return;
            for (auto& v : cand) v /= cn;
            Field cf(g, Space::position, cand);
            basis.push_back(std::move(cand));
            if (hcand) {
                // not used: re-applying keeps the basis and images consistent
                (void)hcand;
            }
            hbasis.push_back(op.apply(cf).values);
        };
        add_dir(w.values, nullptr);
        if (!p.empty()) add_dir(p, nullptr);

        const int k = static_cast<int>(basis.size());
        Eigen::MatrixXcd M(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) M(i, j) = ip(basis[i], hbasis[j]);
        M = (M + M.adjoint().eval()) / 2.0;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
        Eigen::VectorXcd y = es.eigenvectors().col(0);

        std::vector<cplx> xn_new(n, 0), hx_new(n, 0), p_new(n, 0);
        for (int i = 0; i < k; ++i) {
            cplx c = y(i);
            for (std::size_t j = 0; j < n; ++j) {
                xn_new[j] += c * basis[i][j];
                hx_new[j] += c * hbasis[i][j];
                if (i >= 1) p_new[j] += c * basis[i][j];
            }
        }
        x.values = std::move(xn_new);
        hx.values = std::move(hx_new);
        double pn = nrm(p_new);
        if (pn > 1e-14) {
            for (auto& v : p_new) v /= pn;
            p = std::move(p_new);
        } else {
            p.clear();
        }
        lam = std::real(ip(x.values, hx.values));
        for (std::size_t i = 0; i < n; ++i) r[i] = hx.values[i] - lam * x.values[i];
        rn = nrm(r);
    }
    throw SolverError("lowest_eigenpair: no convergence within iteration budget", rn);
}

/// Rotate so the grid sum of psi is real positive; falls back to the
/// largest-magnitude grid point when the sum nearly cancels. Makes the
/// ground state of a real potential continuous in t along a trajectory.
inline void fix_phase(Field& psi) {
    cplx s = 0;
    double maxabs = 0;
    std::size_t imax = 0;
    for (std::size_t i = 0; i < psi.values.size(); ++i) {
        s += psi.values[i];
        double a = std::abs(psi.values[i]);
        if (a > maxabs) {
            maxabs = a;
            imax = i;
        }
    }
    if (std::abs(s) < 1e-12 * maxabs * std::sqrt(double(psi.values.size())))
        s = psi.values[imax];
    if (std::abs(s) == 0) return;
    cplx rot = std::conj(s) / std::abs(s);
    for (auto& v : psi.values) v *= rot;
}

}  // namespace detail

struct GroundStateOptions {
    bool want_gap = true;
    int max_iter = 1200;
    const Field* warm_ground = nullptr;
    const Field* warm_excited = nullptr;
    Dispersion dispersion = Dispersion::spectral;
};

/// Lowest eigenpair of h = -Delta + V by preconditioned Rayleigh-quotient
/// minimization; second eigenpair by the same iteration deflated against the
/// ground state. A gap below 10*tol is flagged, not fatal.
inline GroundStateRecord ground_state(const Field& V, double tol,
                                      const GroundStateOptions& opts = {}) {
    if (!(tol > 0)) throw std::invalid_argument("ground_state: tol must be positive");
    SchrodingerOp op(V, opts.dispersion);

    auto r0 = detail::lowest_eigenpair(op, tol, opts.max_iter, opts.warm_ground, {});
    detail::fix_phase(r0.x);
    double n0 = norm_l2(r0.x);
    for (auto& v : r0.x.values) v /= n0;

    GroundStateRecord rec;
    rec.e = r0.lambda;
    rec.residual = r0.residual;
    rec.iterations = r0.iterations;
    rec.psi_ground = ElectronField(std::move(r0.x), false);

    if (opts.want_gap) {
        std::vector<const Field*> defl{&rec.psi_ground.psi};
        auto r1 = detail::lowest_eigenpair(op, tol, opts.max_iter, opts.warm_excited, defl,
                                           0xb5297a4d1ull);
        detail::fix_phase(r1.x);
        double n1 = norm_l2(r1.x);
        for (auto& v : r1.x.values) v /= n1;
        rec.gap = std::max(0.0, r1.lambda - r0.lambda);
        rec.gap_residual = r1.residual;
        rec.psi_excited = ElectronField(std::move(r1.x), false);
        rec.has_gap = true;
        rec.near_degenerate = rec.gap < 10 * tol;
    }
    return rec;
}

/// Context for applying R = q (h - e)^{-1} q on the orthogonal complement of
/// the ground state.
struct ResolventContext {
    SchrodingerOp op;
    GroundStateRecord gs;
    double lin_tol = 1e-9;
};

/// Solve (h - e) w = q v with <psi_ground, w> = 0 by preconditioned conjugate
/// gradients on the positive-definite restriction.
inline Field apply_resolvent(const ResolventContext& ctx, const Field& v,
                             int max_iter = 4000) {
    const auto& gs = ctx.gs;
    if (!gs.has_gap || gs.gap <= 10 * ctx.lin_tol)
        throw SolverError("apply_resolvent: spectral gap too small to invert", gs.gap);
    const auto& g = ctx.op.V.grid;
    const std::size_t n = g.size();
    const Field& psi0 = gs.psi_ground.psi;
    std::vector<const Field*> defl{&psi0};

    auto project = [&](std::vector<cplx>& a) {
        detail::project_out(a, defl, g, Space::position);
    };
    auto apply_A = [&](const std::vector<cplx>& a) {
        std::vector<cplx> t = a;
        project(t);
        Field tf(g, Space::position, std::move(t));
        Field ht = ctx.op.apply(tf);
        for (std::size_t i = 0; i < n; ++i) ht.values[i] -= gs.e * tf.values[i];
        project(ht.values);
        return ht.values;
    };
    const double meas = g.cell_volume();
    auto ip = [meas](const std::vector<cplx>& a, const std::vector<cplx>& b) {
        cplx s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
        return meas * s;
    };

    std::vector<cplx> rhs = v.values;
    project(rhs);
    double vnorm = norm_l2(v);
    if (vnorm == 0) return Field(g, Space::position);
    const double shift = 1.0 + std::abs(gs.e);

    std::vector<cplx> w(n, 0), r = rhs;
    Field rf(g, Space::position, r);
    Field z0 = ctx.op.precondition(rf, shift);
    project(z0.values);
    std::vector<cplx> z = z0.values, p = z;
    cplx rz = ip(r, z);

    for (int it = 0; it < max_iter; ++it) {
        std::vector<cplx> Ap = apply_A(p);
        cplx pAp = ip(p, Ap);
        cplx alpha = rz / pAp;
        for (std::size_t i = 0; i < n; ++i) {
            w[i] += alpha * p[i];
            r[i] -= alpha * Ap[i];
        }
        double rn = std::sqrt(std::abs(std::real(ip(r, r))));
        if (rn <= ctx.lin_tol * vnorm) {
            project(w);
            return Field(g, Space::position, std::move(w));
        }
        Field rf2(g, Space::position, r);
        Field z2 = ctx.op.precondition(rf2, shift);
        project(z2.values);
        cplx rz_new = ip(r, z2.values);
        cplx beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i) p[i] = z2.values[i] + beta * p[i];
        z = std::move(z2.values);
    }
    throw SolverError("apply_resolvent: conjugate gradients did not converge",
                      norm_l2(Field(g, Space::position, r)) / vnorm);
}

/// d/dt psi_{phi_t} = alpha^{-2} R V_{i phi} psi_{phi}; returned as a tangent
/// field (orthogonal to the ground state, not normalized).
inline Field ground_state_velocity(const ResolventContext& ctx, const PhononField& phi) {
    Field Viphi = potential_i_phi(phi);
    const auto& g = ctx.op.V.grid;
    Field rhs(g, Space::position);
    for (std::size_t i = 0; i < g.size(); ++i)
        rhs.values[i] = Viphi.values[i] * ctx.gs.psi_ground.psi.values[i];
    Field w = apply_resolvent(ctx, rhs);
    const double a2 = phi.alpha * phi.alpha;
    for (auto& v : w.values) v /= a2;
    return w;
}

/// Hellmann-Feynman drift of the eigenvalue:
/// d/dt e(phi_t) = -alpha^{-2} <psi_phi, V_{i phi} psi_phi>.
inline double eigenvalue_velocity(const ResolventContext& ctx, const PhononField& phi) {
    Field Viphi = potential_i_phi(phi);
    const Field& psi = ctx.gs.psi_ground.psi;
    cplx s = 0;
    for (std::size_t i = 0; i < psi.values.size(); ++i)
        s += std::conj(psi.values[i]) * Viphi.values[i] * psi.values[i];
    s *= psi.grid.cell_volume();
    if (std::abs(s.imag()) > 1e-10 * (1.0 + std::abs(s.real())))
        throw NumericalError("eigenvalue_velocity: expectation not real");
    return -s.real() / (phi.alpha * phi.alpha);
}

// ---------------------------------------------------------------------------
// Pekar self-consistency.

struct PekarPoint {
    ElectronField psi;
    PhononField phi;
    double energy = 0;      // <psi, h_phi psi> + ||phi||_2^2
    GroundStateRecord gs;
    int iterations = 0;
};

/// Alternating minimization: phi <- -sigma_psi (closed form), psi <- ground
/// state of h_phi. The energy is non-increasing along iterations; a
/// non-binding iterate (e >= 0) or an energy increase aborts.
inline PekarPoint pekar_minimize(const ElectronField& psi0, double tol,
                                 double eig_tol = 1e-10, double alpha = 1.0,
                                 int max_outer = 200) {
    const auto& g = psi0.psi.grid;
    ElectronField psi = psi0;
    double e_prev = std::numeric_limits<double>::infinity();
    GroundStateRecord gs;
    Field phi_amp(g, Space::momentum);
    for (int it = 0; it < max_outer; ++it) {
        Field sig = sigma_from_electron(psi);
        phi_amp = Field(g, Space::momentum);
        for (std::size_t i = 0; i < g.size(); ++i) phi_amp.values[i] = -sig.values[i];
        PhononField phi{phi_amp, alpha};
        Field V = potential_from_phonons(phi);

        GroundStateOptions opts;
        opts.want_gap = false;
        opts.warm_ground = &psi.psi;
        gs = ground_state(V, eig_tol, opts);
        if (gs.e >= -10 * eig_tol)
            throw SolverError("pekar_minimize: no binding (e >= 0)", gs.e);

        double energy = gs.e + norm_l2(phi_amp) * norm_l2(phi_amp);
        if (energy > e_prev + 1e-12 * std::max(1.0, std::abs(e_prev)))
            throw SolverError("pekar_minimize: energy increased, no descent", energy - e_prev);

        Field diff = gs.psi_ground.psi - psi.psi;
        double step = norm_l2(diff);
        psi = gs.psi_ground;
        e_prev = energy;
        if (step <= tol) {
            PekarPoint out;
            out.psi = psi;
            out.phi = PhononField{phi_amp, alpha};
            out.energy = energy;
            GroundStateOptions full;
            full.warm_ground = &psi.psi;
            out.gs = ground_state(V, eig_tol, full);
            out.iterations = it + 1;
            return out;
        }
    }
    throw SolverError("pekar_minimize: no convergence within outer iteration budget", e_prev);
}

struct AssumptionCheck {
    bool admissible;
    double e;
};

/// Binding criterion on the initial phonon field: admissible iff the ground
/// state energy of h_phi is strictly negative (beyond solver tolerance).
inline AssumptionCheck assumption_check(const PhononField& phi, double eig_tol = 1e-10) {
    Field V = potential_from_phonons(phi);
    GroundStateOptions opts;
    opts.want_gap = false;
    auto gs = ground_state(V, eig_tol, opts);
    return {gs.e < -10 * eig_tol, gs.e};
}

}  // namespace polaron
