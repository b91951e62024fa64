#pragma once

#include "polaron/eigensolver.hpp"

namespace polaron {

/// State of the coupled electron/phonon evolution, with the phase integrals
/// accumulated alongside: phase_e = int_0^t e(phi_u) du and
/// phase_omega = int_0^t omega(u) du.
struct LPState {
    ElectronField psi;
    PhononField phi;
    double t = 0;
    double alpha = 1;
    double phase_e = 0;
    double phase_omega = 0;
};

/// Exact solution of i alpha^2 d/dt phi = phi + sigma for frozen sigma:
/// phi(dt) = e^{-i dt/alpha^2} phi + (e^{-i dt/alpha^2} - 1) sigma.
inline PhononField phonon_exact_rotation(const PhononField& phi, const Field& sigma,
                                         double dt, double alpha) {
    const cplx rot = std::exp(cplx(0, -dt / (alpha * alpha)));
    PhononField out = phi;
    for (std::size_t i = 0; i < out.amp.values.size(); ++i)
        out.amp.values[i] = rot * phi.amp.values[i] + (rot - 1.0) * sigma.values[i];
    return out;
}

namespace detail {

inline void check_finite(const Field& f, const char* where) {
    double s = 0;
    for (const auto& v : f.values) s += std::norm(v);
    if (!std::isfinite(s)) throw NumericalError(std::string(where) + ": non-finite field");
}

}  // namespace detail

/// One Strang step of the coupled system: half phonon rotation with sigma_psi
/// frozen, a full electron step under frozen V_phi (itself kinetic/potential
/// Strang split with exact spectral kinetic half-steps and a pointwise
/// potential phase), then the second phonon half with the updated sigma.
/// Every substep is a unitary phase multiplication in some basis, so the
/// electron norm is conserved exactly.
inline LPState lp_step(const LPState& s, double dt,
                       Dispersion dispersion = Dispersion::spectral,
                       const std::vector<double>* kinetic_symbol = nullptr) {
    if (!(dt != 0) || !std::isfinite(dt)) throw std::invalid_argument("lp_step: bad dt");
    const auto& g = s.psi.psi.grid;

    LPState out = s;
    Field sigma = sigma_from_electron(s.psi);
    out.phi = phonon_exact_rotation(s.phi, sigma, dt / 2, s.alpha);

    // electron: exp(-i T dt/2) exp(-i V dt) exp(-i T dt/2) under frozen phi
    std::vector<double> kin_local;
    const std::vector<double>* kin = kinetic_symbol;
    if (!kin) {
        kin_local = dispersion_symbol(g, dispersion);
        kin = &kin_local;
    }
    Field V = potential_from_phonons(out.phi);
    Field ph = transform(s.psi.psi);
    for (std::size_t i = 0; i < ph.values.size(); ++i)
        ph.values[i] *= std::exp(cplx(0, -(*kin)[i] * dt / 2));
    Field psi = transform(ph);
    for (std::size_t i = 0; i < psi.values.size(); ++i)
        psi.values[i] *= std::exp(cplx(0, -V.values[i].real() * dt));
    ph = transform(psi);
    for (std::size_t i = 0; i < ph.values.size(); ++i)
        ph.values[i] *= std::exp(cplx(0, -(*kin)[i] * dt / 2));
    psi = transform(ph);
    detail::check_finite(psi, "lp_step");
    out.psi = ElectronField(std::move(psi), false);

    sigma = sigma_from_electron(out.psi);
    out.phi = phonon_exact_rotation(out.phi, sigma, dt / 2, s.alpha);
    out.t = s.t + dt;
    return out;
}

/// E(psi, phi) = <psi, h_phi psi> + ||phi||_2^2; kinetic term spectral,
/// potential term by quadrature, phonon norm with the dk measure.
inline double energy(const LPState& s, Dispersion dispersion = Dispersion::spectral) {
    const auto& g = s.psi.psi.grid;
    Field ph = transform(s.psi.psi);
    auto kin = dispersion_symbol(g, dispersion);
    double ke = 0;
    for (std::size_t i = 0; i < ph.values.size(); ++i)
        ke += kin[i] * std::norm(ph.values[i]);
    ke *= g.mode_volume();

    Field V = potential_from_phonons(s.phi);
    cplx pe = 0;
    for (std::size_t i = 0; i < V.values.size(); ++i)
        pe += V.values[i] * std::norm(s.psi.psi.values[i]);
    pe *= g.cell_volume();
    if (std::abs(pe.imag()) > 1e-10 * (1.0 + std::abs(pe.real())))
        throw NumericalError("energy: potential term not real");

    double phn = norm_l2(s.phi.amp);
    return ke + pe.real() + phn * phn;
}

/// omega(t) = alpha^2 Im<phi, d/dt phi> + ||phi||_2^2. Substituting the
/// phonon equation i alpha^2 d/dt phi = phi + sigma_psi collapses this to
/// -Re<phi, sigma_psi>; the defining form is kept in tests as a
/// finite-difference cross-check.
inline double omega(const LPState& s) {
    Field sigma = sigma_from_electron(s.psi);
    return -std::real(inner(s.phi.amp, sigma));
}

// ---------------------------------------------------------------------------
// Trajectory driver: steps the state, accumulates both phase integrals by the
// trapezoid rule every step, and records frames at a configurable cadence.

struct TrajectoryFrame {
    double t = 0;
    double norm_psi = 0;
    double energy = 0;
    double e_phi = 0;
    double gap = 0;
    double err2 = 0;     // adiabatic defect against the instantaneous ground state
    double omega = 0;
    double phase_e = 0;
    double phase_omega = 0;
    double h1_psi = 0;
    double l2_phi = 0;
};

struct TrajectoryOptions {
    double dt = 1e-3;
    double t_final = 1.0;
    int frame_cadence = 100;       // steps between recorded frames
    double eig_tol = 1e-9;
    Dispersion dispersion = Dispersion::spectral;
    bool track_gap = true;         // second eigenpair at frames
};

class Trajectory {
public:
    Trajectory(LPState s, const TrajectoryOptions& opt) : s_(std::move(s)), opt_(opt) {
        kinetic_ = dispersion_symbol(s_.psi.psi.grid, opt.dispersion);
        Field V = potential_from_phonons(s_.phi);
        GroundStateOptions gopt;
        gopt.want_gap = opt.track_gap;
        gopt.dispersion = opt.dispersion;
        gs_ = ground_state(V, opt.eig_tol, gopt);
        e_prev_ = gs_.e;
        omega_prev_ = omega(s_);
    }

    const LPState& state() const { return s_; }
    const GroundStateRecord& ground() const { return gs_; }

    void step() {
        s_ = lp_step(s_, opt_.dt, opt_.dispersion, &kinetic_);
        Field V = potential_from_phonons(s_.phi);
        GroundStateOptions gopt;
        gopt.want_gap = false;
        gopt.dispersion = opt_.dispersion;
        gopt.warm_ground = &gs_.psi_ground.psi;
        GroundStateRecord gs_new = ground_state(V, opt_.eig_tol, gopt);
        gs_new.psi_excited = gs_.psi_excited;  // reused as warm start at frames
        gs_ = std::move(gs_new);

        s_.phase_e += 0.5 * opt_.dt * (e_prev_ + gs_.e);
        e_prev_ = gs_.e;
        double om = omega(s_);
        s_.phase_omega += 0.5 * opt_.dt * (omega_prev_ + om);
        omega_prev_ = om;
    }

    TrajectoryFrame frame() {
        if (opt_.track_gap && !gs_.has_gap) {
            Field V = potential_from_phonons(s_.phi);
            GroundStateOptions gopt;
            gopt.dispersion = opt_.dispersion;
            gopt.warm_ground = &gs_.psi_ground.psi;
            gopt.warm_excited =
                gs_.psi_excited.psi.values.empty() ? nullptr : &gs_.psi_excited.psi;
            gs_ = ground_state(V, opt_.eig_tol, gopt);
        }
        TrajectoryFrame f;
        f.t = s_.t;
        f.norm_psi = norm_l2(s_.psi.psi);
        f.energy = energy(s_, opt_.dispersion);
        f.e_phi = gs_.e;
        f.gap = gs_.has_gap ? gs_.gap : 0.0;
        f.err2 = adiabatic_defect();
        f.omega = omega_prev_;
        f.phase_e = s_.phase_e;
        f.phase_omega = s_.phase_omega;
        f.h1_psi = norm_h1(s_.psi.psi);
        f.l2_phi = norm_l2(s_.phi.amp);
        return f;
    }

    /// || psi_t - e^{-i int e} psi_{phi_t} ||_2^2 against the current record.
    double adiabatic_defect() const {
        const cplx ph = std::exp(cplx(0, -s_.phase_e));
        Field diff = s_.psi.psi;
        for (std::size_t i = 0; i < diff.values.size(); ++i)
            diff.values[i] -= ph * gs_.psi_ground.psi.values[i];
        double d = norm_l2(diff);
        return d * d;
    }

    /// Run to t_final, recording frames every frame_cadence steps (plus the
    /// initial and final state).
    std::vector<TrajectoryFrame> run() {
        std::vector<TrajectoryFrame> frames;
        frames.push_back(frame());
        const long nsteps = std::lround(opt_.t_final / opt_.dt);
        for (long n = 1; n <= nsteps; ++n) {
            step();
            if (n % opt_.frame_cadence == 0 || n == nsteps) frames.push_back(frame());
        }
        return frames;
    }

private:
    LPState s_;
    TrajectoryOptions opt_;
    std::vector<double> kinetic_;
    GroundStateRecord gs_;
    double e_prev_ = 0;
    double omega_prev_ = 0;
};

struct ConservationReport {
    double norm_drift = 0;        // max |  ||psi|| - 1 |
    double energy_drift = 0;      // max relative energy deviation from t = 0
    double max_h1 = 0;
    double max_l2_phi = 0;
};

inline ConservationReport conservation_report(const std::vector<TrajectoryFrame>& frames) {
    ConservationReport r;
    if (frames.empty()) return r;
    const double e0 = frames.front().energy;
    const double scale = std::max(1e-300, std::abs(e0));
    for (const auto& f : frames) {
        r.norm_drift = std::max(r.norm_drift, std::abs(f.norm_psi - 1.0));
        r.energy_drift = std::max(r.energy_drift, std::abs(f.energy - e0) / scale);
        r.max_h1 = std::max(r.max_h1, f.h1_psi);
        r.max_l2_phi = std::max(r.max_l2_phi, f.l2_phi);
    }
    return r;
}

}  // namespace polaron
