#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <map>

#include "polaron/dynamics.hpp"

namespace polaron {

using SparseC = Eigen::SparseMatrix<cplx>;
using DenseC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;

/// 1D ring of M electron sites with M phonon modes, bosons truncated by
/// total occupation <= n_max. Occupation tuples are enumerated in
/// lexicographic order; the full dimension is M * #tuples. Site coordinates
/// and momenta are shared with the d = 1 spectral grid of the same ring so
/// the classical and quantum sides of a comparison use identical phases.
struct FockBasis {
    int sites = 0;
    double spacing = 0;
    int n_max = 0;
    double alpha = 1;
    SpectralGrid grid;                       // d = 1, N = sites, L = sites * spacing
    std::vector<std::vector<int>> tuples;    // boson occupations, lexicographic
    std::map<std::vector<int>, int> tuple_index;
    int boson_dim = 0;

    int dim() const { return sites * boson_dim; }
    double dk() const { return grid.dk; }
    // flat layout: electron site j major, boson tuple index minor
    int flat(int site, int tup) const { return site * boson_dim + tup; }
};

inline FockBasis make_fock_basis(int sites, double spacing, int n_max, double alpha) {
    if (sites < 2 || sites % 2 != 0)
        throw std::invalid_argument("make_fock_basis: sites must be even and >= 2");
    if (n_max < 1) throw std::invalid_argument("make_fock_basis: n_max >= 1");
    if (!(alpha > 0)) throw std::invalid_argument("make_fock_basis: alpha > 0");
    FockBasis b;
    b.sites = sites;
    b.spacing = spacing;
    b.n_max = n_max;
    b.alpha = alpha;
    b.grid = make_grid(sites, sites * spacing, 1);
    std::vector<int> cur(sites, 0);
    // lexicographic enumeration of all tuples with sum <= n_max
    std::function<void(int, int)> rec = [&](int pos, int used) {
        if (pos == sites) {
            b.tuples.push_back(cur);
            return;
        }
        for (int n = 0; n <= b.n_max - used; ++n) {
            cur[pos] = n;
            rec(pos + 1, used + n);
        }
        cur[pos] = 0;
    };
    rec(0, 0);
    std::sort(b.tuples.begin(), b.tuples.end());
    for (int i = 0; i < static_cast<int>(b.tuples.size()); ++i) b.tuple_index[b.tuples[i]] = i;
    b.boson_dim = static_cast<int>(b.tuples.size());
    return b;
}

struct FockOperator {
    SparseC mat;
    bool hermitian = false;
};

struct FockState {
    VecC v;
    double norm() const { return v.norm(); }
};

namespace fock_detail {

/// Standard ladder operator on the boson factor for one mode:
/// c |..n..> = sqrt(n) |..n-1..>.
inline SparseC boson_lower(const FockBasis& b, int mode) {
    std::vector<Eigen::Triplet<cplx>> trips;
    for (int i = 0; i < b.boson_dim; ++i) {
        const auto& t = b.tuples[i];
        if (t[mode] == 0) continue;
        std::vector<int> t2 = t;
        t2[mode] -= 1;
        trips.emplace_back(b.tuple_index.at(t2), i, std::sqrt(double(t[mode])));
    }
    SparseC m(b.boson_dim, b.boson_dim);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

inline SparseC boson_count(const FockBasis& b) {
    std::vector<Eigen::Triplet<cplx>> trips;
    for (int i = 0; i < b.boson_dim; ++i) {
        int n = 0;
        for (int v : b.tuples[i]) n += v;
        trips.emplace_back(i, i, double(n));
    }
    SparseC m(b.boson_dim, b.boson_dim);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

/// kron(electron MxM, boson sparse) in the site-major flat layout.
inline SparseC kron_el_boson(const FockBasis& b, const DenseC& el, const SparseC& bos) {
    std::vector<Eigen::Triplet<cplx>> trips;
    for (int je = 0; je < b.sites; ++je)
        for (int ie = 0; ie < b.sites; ++ie) {
            cplx c = el(ie, je);
            if (std::abs(c) == 0) continue;
            for (int k = 0; k < bos.outerSize(); ++k)
                for (SparseC::InnerIterator it(bos, k); it; ++it)
                    trips.emplace_back(b.flat(ie, int(it.row())), b.flat(je, int(it.col())),
                                       c * it.value());
        }
    SparseC m(b.dim(), b.dim());
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

inline DenseC electron_kinetic(const FockBasis& b) {
    DenseC T = DenseC::Zero(b.sites, b.sites);
    const double inv_a2 = 1.0 / (b.spacing * b.spacing);
    for (int j = 0; j < b.sites; ++j) {
        T(j, j) = 2 * inv_a2;
        T(j, (j + 1) % b.sites) = -inv_a2;
        T(j, (j - 1 + b.sites) % b.sites) = -inv_a2;
    }
    return T;
}

inline double frobenius(const SparseC& m) {
    double s = 0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseC::InnerIterator it(m, k); it; ++it) s += std::norm(it.value());
    return std::sqrt(s);
}

/// Smallest or largest eigenvalue of a hermitian sparse operator by Lanczos
/// with full reorthogonalization.
inline double lanczos_extreme(const SparseC& H, bool smallest, int iters = 300,
                              std::uint64_t seed = 42) {
    const int n = int(H.rows());
    iters = std::min(iters, n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    VecC v(n);
    for (int i = 0; i < n; ++i) v(i) = cplx(gauss(rng), gauss(rng));
    v.normalize();
    std::vector<VecC> basis{v};
    std::vector<double> a, bcoef;
    VecC w;
    for (int j = 0; j < iters; ++j) {
        w = H * basis[j];
        double aj = std::real(basis[j].dot(w));
        a.push_back(aj);
        for (std::size_t k = 0; k < basis.size(); ++k) w -= basis[k].dot(w) * basis[k];
        for (std::size_t k = 0; k < basis.size(); ++k) w -= basis[k].dot(w) * basis[k];
        double bj = w.norm();
        if (bj < 1e-13) break;
        bcoef.push_back(bj);
        basis.push_back(w / bj);
    }
    const int m = int(a.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
        T(i, i) = a[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = bcoef[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    return smallest ? es.eigenvalues()(0) : es.eigenvalues()(m - 1);
}

}  // namespace fock_detail

/// Creation/annihilation family with the rescaled commutator
/// [a_k, a*_k'] = alpha^{-2} delta(k-k'), realized on the lattice as
/// alpha^{-2} delta_{kk'} / dk (the Kronecker delta carries the 1/dk
/// mode-density weight). N = sum_k dk a*_k a_k then counts occupation in
/// units of alpha^{-2}, independent of k.
struct CcrFamily {
    std::vector<FockOperator> a;      // per mode, full space
    std::vector<FockOperator> adag;
    FockOperator number;              // N = alpha^{-2} * total occupation
};

inline CcrFamily build_ccr(const FockBasis& b) {
    CcrFamily f;
    const DenseC I = DenseC::Identity(b.sites, b.sites);
    const double scale = 1.0 / (b.alpha * std::sqrt(b.dk()));
    for (int mode = 0; mode < b.sites; ++mode) {
        SparseC c = fock_detail::boson_lower(b, mode);
        SparseC av = (scale * c).eval();
        f.a.push_back({fock_detail::kron_el_boson(b, I, av), false});
        f.adag.push_back({fock_detail::kron_el_boson(b, I, SparseC(av.adjoint())), false});
    }
    SparseC num = (fock_detail::boson_count(b) / (b.alpha * b.alpha)).eval();
    f.number = {fock_detail::kron_el_boson(b, I, num), true};
    return f;
}

struct WeylResult {
    FockOperator op;       // unitary on the full space (identity on the electron)
    double vacuum_leakage; // top-shell population of W(f) Omega
    bool flagged;          // leakage above threshold
};

/// W(f) = exp[sum_k dk (f_k a*_k - conj(f_k) a_k)]: the matrix exponential of
/// the anti-hermitian generator, computed by diagonalizing i*G.
inline WeylResult weyl(const FockBasis& b, const std::vector<cplx>& f,
                       double leak_tol = 1e-8) {
    if (int(f.size()) != b.sites) throw std::invalid_argument("weyl: mode count mismatch");
    DenseC G = DenseC::Zero(b.boson_dim, b.boson_dim);
    const double zscale = std::sqrt(b.dk()) / b.alpha;  // dk * (alpha sqrt(dk))^{-1}
    for (int mode = 0; mode < b.sites; ++mode) {
        cplx z = zscale * f[mode];
        if (std::abs(z) == 0) continue;
        DenseC c = DenseC(fock_detail::boson_lower(b, mode));
        G += z * c.adjoint() - std::conj(z) * c;
    }
    DenseC B = cplx(0, -1) * G;  // hermitian
    Eigen::SelfAdjointEigenSolver<DenseC> es(B);
    DenseC W = es.eigenvectors() *
               (cplx(0, 1) * es.eigenvalues().array().cast<cplx>()).exp().matrix().asDiagonal() *
               es.eigenvectors().adjoint();

    VecC vac = VecC::Zero(b.boson_dim);
    std::vector<int> zero(b.sites, 0);
    vac(b.tuple_index.at(zero)) = 1;
    VecC wv = W * vac;
    double leak = 0;
    for (int i = 0; i < b.boson_dim; ++i) {
        int n = 0;
        for (int v : b.tuples[i]) n += v;
        if (n == b.n_max) leak += std::norm(wv(i));
    }
    WeylResult r;
    const DenseC I = DenseC::Identity(b.sites, b.sites);
    r.op = {fock_detail::kron_el_boson(b, I, W.sparseView(1.0, 1e-300)), false};
    r.vacuum_leakage = leak;
    r.flagged = leak > leak_tol;
    return r;
}

struct FroehlichParts {
    FockOperator H;
    FockOperator phi_plus;   // sum_k dk |k|^{-1} e^{ikx} a_k
    FockOperator phi_minus;  // adjoint
    FockOperator kinetic;    // -Delta (ring stencil) x identity
};

/// H = -Delta + sum_k dk |k|^{-1} (e^{ikx} a_k + e^{-ikx} a*_k) + N on the
/// ring, k = 0 excluded from the coupling.
inline FroehlichParts froehlich_hamiltonian(const FockBasis& b,
                                            bool include_interaction = true) {
    const DenseC I = DenseC::Identity(b.sites, b.sites);
    FroehlichParts out;
    out.kinetic = {fock_detail::kron_el_boson(
                       b, fock_detail::electron_kinetic(b),
                       SparseC(DenseC::Identity(b.boson_dim, b.boson_dim).sparseView())),
                   true};
    SparseC H = out.kinetic.mat;
    SparseC num = (fock_detail::boson_count(b) / (b.alpha * b.alpha)).eval();
    H += fock_detail::kron_el_boson(b, I, num);

    SparseC plus(b.dim(), b.dim());
    const auto& kax = b.grid.tables->k_axis;
    const auto& xax = b.grid.tables->x_axis;
    for (int mode = 0; mode < b.sites; ++mode) {
        double k = kax[mode];
        if (k == 0) continue;
        // dk |k|^{-1} * (alpha sqrt(dk))^{-1} = sqrt(dk) / (|k| alpha)
        double w = std::sqrt(b.dk()) / (std::abs(k) * b.alpha);
        DenseC phase = DenseC::Zero(b.sites, b.sites);
        for (int j = 0; j < b.sites; ++j) phase(j, j) = std::exp(cplx(0, k * xax[j]));
        plus += w * fock_detail::kron_el_boson(b, phase, fock_detail::boson_lower(b, mode));
    }
    out.phi_plus = {plus, false};
    out.phi_minus = {SparseC(plus.adjoint()), false};
    if (include_interaction) H += plus + SparseC(plus.adjoint());

    double asym = fock_detail::frobenius(SparseC(H - SparseC(H.adjoint())));
    if (asym > 1e-12 * fock_detail::frobenius(H))
        throw NumericalError("froehlich_hamiltonian: hermiticity check failed");
    out.H = {H, true};
    return out;
}

/// exp(-i H t) s by a Lanczos Krylov expansion with full reorthogonalization
/// and adaptive substeps; per-substep error estimate below tol.
inline FockState evolve(const FockOperator& H, const FockState& s, double t,
                        double tol = 1e-10, int m_max = 40) {
    if (!H.hermitian) throw std::invalid_argument("evolve: hermitian operator required");
    if (t == 0) return s;
    VecC v = s.v;
    double remaining = t;
    double tau = t;
    const int n = int(v.size());
    int guard = 0;
    while (std::abs(remaining) > 1e-15 * std::abs(t)) {
        if (++guard > 100000) throw SolverError("evolve: substep budget exhausted", remaining);
        tau = (std::abs(tau) > std::abs(remaining)) ? remaining : tau;
        double beta0 = v.norm();
        if (beta0 == 0) return {v};
        std::vector<VecC> basis{v / beta0};
        std::vector<double> a, bc;
        bool happy = false;
        for (int j = 0; j < std::min(m_max, n); ++j) {
            VecC w = H.mat * basis[j];
            a.push_back(std::real(basis[j].dot(w)));
            for (std::size_t k2 = 0; k2 < basis.size(); ++k2) w -= basis[k2].dot(w) * basis[k2];
            for (std::size_t k2 = 0; k2 < basis.size(); ++k2) w -= basis[k2].dot(w) * basis[k2];
            double bj = w.norm();
            if (bj < 1e-13) {
                happy = true;
                break;
            }
            bc.push_back(bj);
            basis.push_back(w / bj);
        }
        const int m = int(a.size());
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            T(i, i) = a[i];
            if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = bc[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
        Eigen::VectorXcd u =
            es.eigenvectors().cast<cplx>() *
            ((cplx(0, -tau) * es.eigenvalues().array().cast<cplx>()).exp() *
             es.eigenvectors().row(0).transpose().array().cast<cplx>())
                .matrix();
        double err_est = happy || m >= n ? 0.0
                                         : std::abs(bc.empty() ? 0.0 : bc.back()) *
                                               std::abs(u(m - 1)) * std::abs(tau);
        if (err_est > tol && std::abs(tau) > 1e-12) {
            tau /= 2;
            continue;
        }
        VecC vn = VecC::Zero(n);
        for (int i = 0; i < m; ++i) vn += (beta0 * u(i)) * basis[i];
        v = vn;
        remaining -= tau;
    }
    return {v};
}

/// psi (x) W(alpha^2 phi) Omega. Site amplitudes are scaled by sqrt(spacing)
/// so the plain vector norm matches the lattice L2 norm of psi.
struct PekarProduct {
    FockState state;
    double leakage;
    bool flagged;
};

inline PekarProduct pekar_product(const FockBasis& b, const std::vector<cplx>& psi,
                                  const std::vector<cplx>& phi, double leak_tol = 1e-8) {
    if (int(psi.size()) != b.sites || int(phi.size()) != b.sites)
        throw std::invalid_argument("pekar_product: size mismatch");
    std::vector<cplx> f(phi);
    for (auto& z : f) z *= b.alpha * b.alpha;
    // coherent displacement of the vacuum only: apply the boson-factor Weyl
    DenseC G = DenseC::Zero(b.boson_dim, b.boson_dim);
    const double zscale = std::sqrt(b.dk()) / b.alpha;
    for (int mode = 0; mode < b.sites; ++mode) {
        cplx z = zscale * f[mode];
        if (std::abs(z) == 0) continue;
        DenseC c = DenseC(fock_detail::boson_lower(b, mode));
        G += z * c.adjoint() - std::conj(z) * c;
    }
    Eigen::SelfAdjointEigenSolver<DenseC> es(cplx(0, -1) * G);
    VecC vac = VecC::Zero(b.boson_dim);
    std::vector<int> zero(b.sites, 0);
    vac(b.tuple_index.at(zero)) = 1;
    VecC coh = es.eigenvectors() *
               ((cplx(0, 1) * es.eigenvalues().array().cast<cplx>()).exp() *
                (es.eigenvectors().adjoint() * vac).array())
                   .matrix();
    PekarProduct out;
    out.state.v = VecC::Zero(b.dim());
    const double sa = std::sqrt(b.spacing);
    for (int j = 0; j < b.sites; ++j)
        for (int i = 0; i < b.boson_dim; ++i)
            out.state.v(b.flat(j, i)) = sa * psi[j] * coh(i);
    double leak = 0;
    for (int i = 0; i < b.boson_dim; ++i) {
        int nsum = 0;
        for (int vv : b.tuples[i]) nsum += vv;
        if (nsum == b.n_max) leak += std::norm(coh(i));
    }
    out.leakage = leak;
    out.flagged = leak > leak_tol;
    return out;
}

inline double top_shell_population(const FockBasis& b, const FockState& s) {
    double leak = 0;
    for (int j = 0; j < b.sites; ++j)
        for (int i = 0; i < b.boson_dim; ++i) {
            int nsum = 0;
            for (int vv : b.tuples[i]) nsum += vv;
            if (nsum == b.n_max) leak += std::norm(s.v(b.flat(j, i)));
        }
    return leak;
}

// ---------------------------------------------------------------------------
// Quantum / classical comparison on the ring.

struct Theorem2Result {
    double alpha = 0;
    double t = 0;
    double error = 0;       // || e^{-iHt} Psi_0 - e^{-i int omega} psi_t x W(a^2 phi_t) O ||
    double leakage = 0;     // worst top-shell population among the states involved
    bool flagged = false;   // leakage above tolerance: excluded from fits
    double omega_integral = 0;
};

/// Evolve the product state under the full Hamiltonian and compare against
/// the classical-field product at time t. The classical side runs on the
/// same ring with the same stencil dispersion so both sides share one
/// one-particle model.
inline Theorem2Result coherent_comparison(const FockBasis& b, const PhononField& phi0,
                                          double t, double dt, double leak_tol = 1e-8,
                                          double eig_tol = 1e-11) {
    if (!(phi0.amp.grid == b.grid))
        throw std::invalid_argument("coherent_comparison: phi0 must live on the ring grid");
    Theorem2Result res;
    res.alpha = b.alpha;
    res.t = t;

    // classical initial data: ground state of h_{phi0} on the ring
    Field V0 = potential_from_phonons(phi0);
    GroundStateOptions gopt;
    gopt.want_gap = false;
    gopt.dispersion = Dispersion::ring_stencil;
    GroundStateRecord gs0 = ground_state(V0, eig_tol, gopt);

    LPState s;
    s.psi = gs0.psi_ground;
    s.phi = PhononField{phi0.amp, b.alpha};
    s.alpha = b.alpha;
    TrajectoryOptions topt;
    topt.dt = dt;
    topt.t_final = t;
    topt.frame_cadence = std::max<long>(1, std::lround(t / dt));
    topt.eig_tol = eig_tol;
    topt.dispersion = Dispersion::ring_stencil;
    topt.track_gap = false;
    Trajectory traj(std::move(s), topt);
    const long nsteps = std::lround(t / dt);
    for (long n = 0; n < nsteps; ++n) traj.step();
    const LPState& st = traj.state();
    res.omega_integral = st.phase_omega;

    auto as_vec = [&](const Field& f) {
        return std::vector<cplx>(f.values.begin(), f.values.end());
    };
    PekarProduct init = pekar_product(b, as_vec(gs0.psi_ground.psi), as_vec(phi0.amp), leak_tol);
    FroehlichParts fp = froehlich_hamiltonian(b);
    FockState evolved = evolve(fp.H, init.state, t);
    PekarProduct target =
        pekar_product(b, as_vec(st.psi.psi), as_vec(st.phi.amp), leak_tol);
    VecC diff = evolved.v - std::exp(cplx(0, -st.phase_omega)) * target.state.v;
    res.error = diff.norm();
    res.leakage = std::max({init.leakage, target.leakage, top_shell_population(b, evolved)});
    res.flagged = res.leakage > leak_tol;
    return res;
}

// ---------------------------------------------------------------------------
// Operator-inequality spot checks on the truncated space.

struct AppendixReport {
    // one-boson smoothing bound: || (-Delta+1)^{-1/2} sum dk |k|^{-1} e^{-ikx} a*_k u x O ||
    // divided by alpha^{-1} ||u||; alpha-free by construction of the rescaled ladders
    std::vector<std::pair<double, double>> one_boson_ratios;  // (alpha, ratio)
    double creation_ratio_max = 0;       // || Phi_x^+ Psi || / || (-D+1)^{1/2} N^{1/2} Psi ||
    double creation_ratio_max_grown = 0; // same with n_max + 1
    double radial_integral = 0;          // quadrature of int d3k / ((k^2+1) k^2)
    double sandwich_min = 0;             // lambda_min(H - (1-eps)(-Delta + N))
    double sandwich_min_grown = 0;
    double sandwich_eps = 0.25;
};

namespace fock_detail {

inline DenseC electron_kinetic_power(const FockBasis& b, double power, double shift) {
    Eigen::SelfAdjointEigenSolver<DenseC> es(electron_kinetic(b));
    Eigen::VectorXd lam = es.eigenvalues();
    DenseC out = DenseC::Zero(b.sites, b.sites);
    for (int i = 0; i < b.sites; ++i)
        out += std::pow(lam(i) + shift, power) * es.eigenvectors().col(i) *
               es.eigenvectors().col(i).adjoint();
    return out;
}

}  // namespace fock_detail

inline double radial_quadrature_smoothing_integral(double k_max = 1000.0, int panels = 200000) {
    // int d3k / ((k^2+1) k^2) = 4 pi int_0^inf dk / (k^2 + 1), composite Simpson
    double h = k_max / panels;
    double s = 0;
    auto f = [](double k) { return 1.0 / (k * k + 1.0); };
    for (int i = 0; i < panels; ++i) {
        double x0 = i * h, x1 = x0 + h;
        s += h / 6.0 * (f(x0) + 4 * f(0.5 * (x0 + x1)) + f(x1));
    }
    return 4 * kPi * s;
}

inline AppendixReport appendix_bound_checks(const FockBasis& base, int samples = 40,
                                            std::uint64_t seed = 7) {
    AppendixReport rep;
    rep.radial_integral = radial_quadrature_smoothing_integral();

    // (i) one-boson ratios across alpha
    for (double alpha : {2.0, 4.0, 8.0}) {
        FockBasis b = make_fock_basis(base.sites, base.spacing, base.n_max, alpha);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss;
        std::vector<cplx> u(b.sites);
        for (auto& z : u) z = cplx(gauss(rng), gauss(rng));
        double un = 0;
        for (auto& z : u) un += std::norm(z);
        un = std::sqrt(b.spacing * un);
        // state: sum_k dk |k|^{-1} e^{-ikx} a*_k (u x Omega), one-boson sector
        DenseC amp = DenseC::Zero(b.sites, b.sites);  // (site, mode)
        const auto& kax = b.grid.tables->k_axis;
        const auto& xax = b.grid.tables->x_axis;
        for (int mode = 0; mode < b.sites; ++mode) {
            double k = kax[mode];
            if (k == 0) continue;
            double w = std::sqrt(b.dk()) / (std::abs(k) * b.alpha);
            for (int j = 0; j < b.sites; ++j)
                amp(j, mode) = w * std::exp(cplx(0, -k * xax[j])) * u[j];
        }
        DenseC sm = fock_detail::electron_kinetic_power(b, -0.5, 1.0) * amp;
        double nrm = std::sqrt(b.spacing) * sm.norm();
        rep.one_boson_ratios.emplace_back(alpha, nrm / (un / alpha));
    }

    // (ii) creation-part bound ratio over random states, and stability in n_max
    auto ratio_max = [&](const FockBasis& b) {
        FroehlichParts fp = froehlich_hamiltonian(b);
        CcrFamily cf = build_ccr(b);
        DenseC smooth = fock_detail::electron_kinetic_power(b, 0.5, 1.0);
        SparseC smooth_full = fock_detail::kron_el_boson(
            b, smooth, SparseC(DenseC::Identity(b.boson_dim, b.boson_dim).sparseView()));
        std::mt19937_64 rng(seed + 1);
        std::normal_distribution<double> gauss;
        double mx = 0;
        for (int s = 0; s < samples; ++s) {
            VecC psi(b.dim());
            for (int i = 0; i < b.dim(); ++i) psi(i) = cplx(gauss(rng), gauss(rng));
            psi.normalize();
            VecC lhs = fp.phi_plus.mat * psi;
            VecC nh = cf.number.mat * psi;  // N^{1/2} via diagonal sqrt
            VecC rhs = psi;
            for (int i = 0; i < b.dim(); ++i) {
                int tup = i % b.boson_dim;
                int nsum = 0;
                for (int vv : b.tuples[tup]) nsum += vv;
                rhs(i) *= std::sqrt(double(nsum)) / b.alpha;
            }
            rhs = smooth_full * rhs;
            double denom = rhs.norm();
            if (denom < 1e-14) continue;
            mx = std::max(mx, lhs.norm() / denom);
        }
        return mx;
    };
    rep.creation_ratio_max = ratio_max(base);
    FockBasis grown = make_fock_basis(base.sites, base.spacing, base.n_max + 1, base.alpha);
    rep.creation_ratio_max_grown = ratio_max(grown);

    // (iii) sandwich: lambda_min(H - (1-eps)(-Delta + N)) finite, stable in n_max
    auto sandwich = [&](const FockBasis& b) {
        FroehlichParts fp = froehlich_hamiltonian(b);
        CcrFamily cf = build_ccr(b);
        SparseC A = fp.H.mat - (1.0 - rep.sandwich_eps) * (fp.kinetic.mat + cf.number.mat);
        return fock_detail::lanczos_extreme(A, true);
    };
    rep.sandwich_min = sandwich(base);
    rep.sandwich_min_grown = sandwich(grown);
    return rep;
}

}  // namespace polaron
