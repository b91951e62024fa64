#pragma once

#include <atomic>
#include <thread>

#include "polaron/dynamics.hpp"

namespace polaron {

/// || psi_t - e^{-i phase_e} psi_{phi_t} ||_2^2 for an externally supplied
/// ground-state record (same phase convention as the trajectory driver).
inline double adiabatic_error(const LPState& s, const GroundStateRecord& gs) {
    const cplx ph = std::exp(cplx(0, -s.phase_e));
    Field diff = s.psi.psi;
    for (std::size_t i = 0; i < diff.values.size(); ++i)
        diff.values[i] -= ph * gs.psi_ground.psi.values[i];
    double d = norm_l2(diff);
    return d * d;
}

// ---------------------------------------------------------------------------
// Initial phonon-field families.

struct Phi0Spec {
    enum class Kind { gaussian, coulomb_truncated, pekar, pekar_perturbed };
    Kind kind = Kind::pekar_perturbed;
    double epsilon = 0.2;    // pekar_perturbed: phi0 = (1+eps) e^{i phase} phi_P
    double phase = 0.0;      // global phase; nonzero breaks conjugate symmetry
    double amplitude = 1.0;  // gaussian
    double width = 1.0;      // gaussian: phi(k) = A exp(-|k|^2 w^2) e^{i phase}
    double strength = 1.0;   // coulomb_truncated
};

inline bool phi0_needs_pekar(const Phi0Spec& s) {
    return s.kind == Phi0Spec::Kind::pekar || s.kind == Phi0Spec::Kind::pekar_perturbed;
}

inline PhononField build_phi0(const SpectralGrid& grid, const Phi0Spec& spec, double alpha,
                              const PhononField* pekar = nullptr) {
    Field amp(grid, Space::momentum);
    const auto& tb = *grid.tables;
    switch (spec.kind) {
        case Phi0Spec::Kind::gaussian: {
            const cplx ph = std::exp(cplx(0, spec.phase));
            for (std::size_t i = 0; i < grid.size(); ++i)
                amp.values[i] = tb.kinv[i] == 0 && i == 0
                                    ? cplx(0)
                                    : spec.amplitude * std::exp(-tb.k2[i] * spec.width * spec.width) * ph;
            amp.values[0] = 0;
            break;
        }
        case Phi0Spec::Kind::coulomb_truncated: {
            if (grid.dims != 3)
                throw std::invalid_argument("coulomb_truncated phi0 requires dims = 3");
            const double c = -spec.strength / (4 * kPi * kPi);
            for (std::size_t i = 0; i < grid.size(); ++i) amp.values[i] = c * tb.kinv[i];
            break;
        }
        case Phi0Spec::Kind::pekar:
        case Phi0Spec::Kind::pekar_perturbed: {
            if (!pekar) throw std::invalid_argument("build_phi0: pekar point required");
            amp = pekar->amp;
            if (spec.kind == Phi0Spec::Kind::pekar_perturbed) {
                const cplx c = (1.0 + spec.epsilon) * std::exp(cplx(0, spec.phase));
                for (auto& v : amp.values) v *= c;
            }
            break;
        }
    }
    return PhononField{std::move(amp), alpha};
}

/// Deterministic Gaussian seed for the Pekar iteration.
inline ElectronField pekar_seed(const SpectralGrid& grid) {
    const double w = std::max(2 * grid.dx, grid.box / 10.0);
    Field f(grid, Space::position);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double r = radius_at(grid, i);
        f.values[i] = std::exp(-r * r / (2 * w * w));
    }
    return normalized(std::move(f));
}

// ---------------------------------------------------------------------------
// Sweep harness.

struct SweepConfig {
    std::vector<double> alphas;
    double t_final = 1.0;
    double dt = 1e-3;
    int frame_cadence = 100;
    Phi0Spec phi0;
    double eig_tol = 1e-9;
    double pekar_tol = 1e-10;
    double t_star = 1.0;          // fixed time for the alpha fit
    double short_t0 = 0.05;       // short-time fit window
    double short_t1 = 0.5;
    double floor_factor = 100.0;  // points below floor_factor * stationary floor are excluded
    double gap_floor = 1e-6;      // trajectory truncated when the gap falls below
    double window_safety = 0.5;   // t_final <= window_safety * min(alpha)^2
    unsigned threads = 0;         // 0: hardware concurrency
};

struct FitResult {
    double slope = 0;
    double intercept = 0;
    double residual = 0;  // rms of fit residuals in log space
    int points = 0;
    bool ok = false;
    std::string note;
};

inline FitResult linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    FitResult f;
    f.points = static_cast<int>(x.size());
    if (x.size() < 4) {
        f.note = "insufficient data";
        return f;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-30) {
        f.note = "degenerate abscissae";
        return f;
    }
    f.slope = (n * sxy - sx * sy) / denom;
    f.intercept = (sy - f.slope * sx) / n;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double r = y[i] - (f.slope * x[i] + f.intercept);
        ss += r * r;
    }
    f.residual = std::sqrt(ss / n);
    f.ok = true;
    return f;
}

struct DriftFit {
    double C_fit = 0;        // least-squares slope of drift against t/alpha^2
    double C_envelope = 0;   // max drift / (t/alpha^2): the linear envelope constant
    double residual = 0;
    bool ok = false;
};

struct AlphaTrace {
    double alpha = 0;
    std::vector<TrajectoryFrame> frames;
    bool gap_collapsed = false;
    double err2_at_tstar = 0;
};

struct ScalingReport {
    std::vector<AlphaTrace> traces;
    std::vector<TrajectoryFrame> floor_frames;  // stationary reference run
    double floor_at_tstar = 0;
    double lambda0 = 0;
    FitResult slope_alpha;
    FitResult slope_t_short;
    DriftFit gap_drift;
    DriftFit e_drift;
    std::vector<double> gap_drift_doubling_ratios;  // drift(alpha)/drift(2 alpha) at t_final
    double bound_constant = 0;  // single C with err2 <= C a^-4 (1 + a^-4 t^2) over the sweep
};

namespace detail {

inline AlphaTrace run_alpha_trajectory(const SweepConfig& cfg, const PhononField& phi0_base,
                                       double alpha) {
    AlphaTrace tr;
    tr.alpha = alpha;
    PhononField phi0{phi0_base.amp, alpha};
    Field V0 = potential_from_phonons(phi0);
    GroundStateOptions gopt;
    gopt.want_gap = true;
    GroundStateRecord gs0 = ground_state(V0, cfg.eig_tol, gopt);

    LPState s;
    s.psi = gs0.psi_ground;
    s.phi = phi0;
    s.alpha = alpha;

    TrajectoryOptions topt;
    topt.dt = cfg.dt;
    topt.t_final = cfg.t_final;
    topt.frame_cadence = cfg.frame_cadence;
    topt.eig_tol = cfg.eig_tol;
    Trajectory traj(std::move(s), topt);

    tr.frames.push_back(traj.frame());
    const long nsteps = std::lround(cfg.t_final / cfg.dt);
    for (long n = 1; n <= nsteps; ++n) {
        traj.step();
        if (n % cfg.frame_cadence == 0 || n == nsteps) {
            TrajectoryFrame f = traj.frame();
            tr.frames.push_back(f);
            if (f.gap < cfg.gap_floor) {
                tr.gap_collapsed = true;
                break;
            }
        }
    }
    return tr;
}

inline double err2_at(const std::vector<TrajectoryFrame>& frames, double t) {
    double best = std::numeric_limits<double>::infinity();
    double val = 0;
    for (const auto& f : frames) {
        double d = std::abs(f.t - t);
        if (d < best) {
            best = d;
            val = f.err2;
        }
    }
    return val;
}

inline DriftFit drift_fit(const std::vector<AlphaTrace>& traces,
                          const std::function<double(const TrajectoryFrame&, const TrajectoryFrame&)>& drift) {
    DriftFit d;
    double sxx = 0, sxy = 0;
    for (const auto& tr : traces) {
        if (tr.frames.empty()) continue;
        const auto& f0 = tr.frames.front();
        for (const auto& f : tr.frames) {
            if (f.t <= 0) continue;
            double x = f.t / (tr.alpha * tr.alpha);
            double y = std::max(0.0, drift(f0, f));
            sxx += x * x;
            sxy += x * y;
            if (x > 0) d.C_envelope = std::max(d.C_envelope, y / x);
        }
    }
    if (sxx > 0) {
        d.C_fit = sxy / sxx;
        double ss = 0;
        int n = 0;
        for (const auto& tr : traces) {
            if (tr.frames.empty()) continue;
            const auto& f0 = tr.frames.front();
            for (const auto& f : tr.frames) {
                if (f.t <= 0) continue;
                double x = f.t / (tr.alpha * tr.alpha);
                double r = std::max(0.0, drift(f0, f)) - d.C_fit * x;
                ss += r * r;
                ++n;
            }
        }
        d.residual = n ? std::sqrt(ss / n) : 0;
        d.ok = true;
    }
    return d;
}

}  // namespace detail

/// Evolve one trajectory per alpha (concurrently), plus a stationary
/// reference run at the largest alpha that measures the numerical noise
/// floor, then fit the scaling laws: err^2(t*) against alpha, the short-time
/// growth in t, and the gap / eigenvalue drift envelopes.
inline ScalingReport run_sweep(const SweepConfig& cfg, const SpectralGrid& grid) {
    if (cfg.alphas.size() < 1) throw std::invalid_argument("run_sweep: no alphas");
    for (std::size_t i = 0; i + 1 < cfg.alphas.size(); ++i)
        if (cfg.alphas[i] > cfg.alphas[i + 1])
            throw std::invalid_argument("run_sweep: alphas must be sorted ascending");
    if (cfg.alphas.front() < 1.0) throw std::invalid_argument("run_sweep: alphas must be >= 1");
    const double amin = cfg.alphas.front();
    if (cfg.t_final > cfg.window_safety * amin * amin)
        throw std::invalid_argument("run_sweep: t_final exceeds the gap-persistence window");

    ScalingReport rep;

    // Pekar point: initial family anchor and stationary floor reference.
    PekarPoint pk = pekar_minimize(pekar_seed(grid), cfg.pekar_tol,
                                   std::min(cfg.eig_tol, 1e-10), cfg.alphas.back());
    PhononField phi0 = build_phi0(grid, cfg.phi0, cfg.alphas.back(), &pk.phi);

    auto adm = assumption_check(phi0, cfg.eig_tol);
    if (!adm.admissible)
        throw NumericalError("run_sweep: initial phonon field not admissible (e >= 0)");

    // Stationary reference: exact Pekar initial data at the largest alpha.
    SweepConfig floor_cfg = cfg;
    AlphaTrace floor_tr = detail::run_alpha_trajectory(floor_cfg, pk.phi, cfg.alphas.back());
    rep.floor_frames = floor_tr.frames;
    rep.floor_at_tstar = detail::err2_at(rep.floor_frames, cfg.t_star);

    // Per-alpha trajectories, concurrent.
    rep.traces.resize(cfg.alphas.size());
    unsigned nthreads = cfg.threads ? cfg.threads : std::thread::hardware_concurrency();
    nthreads = std::max(1u, std::min<unsigned>(nthreads, cfg.alphas.size()));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(cfg.alphas.size());
    for (unsigned th = 0; th < nthreads; ++th)
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= cfg.alphas.size()) return;
                try {
                    rep.traces[i] = detail::run_alpha_trajectory(cfg, phi0, cfg.alphas[i]);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);

    if (!rep.traces.empty() && !rep.traces.front().frames.empty())
        rep.lambda0 = rep.traces.front().frames.front().gap;

    // Fit (a): log err^2(t*) against log alpha, excluding floor-level points.
    std::vector<double> la, le;
    for (auto& tr : rep.traces) {
        tr.err2_at_tstar = detail::err2_at(tr.frames, cfg.t_star);
        if (tr.err2_at_tstar > cfg.floor_factor * rep.floor_at_tstar && tr.err2_at_tstar > 0) {
            la.push_back(std::log(tr.alpha));
            le.push_back(std::log(tr.err2_at_tstar));
        }
    }
    rep.slope_alpha = linear_fit(la, le);
    if (!rep.slope_alpha.ok && rep.slope_alpha.note.empty())
        rep.slope_alpha.note = "insufficient data";

    // Fit (b): log err^2 against log t over the early window at the largest alpha.
    const AlphaTrace& top = rep.traces.back();
    std::vector<double> lt, lerr;
    for (const auto& f : top.frames) {
        if (f.t < std::max(cfg.short_t0, 5 * cfg.dt) || f.t > cfg.short_t1) continue;
        double fl = detail::err2_at(rep.floor_frames, f.t);
        if (f.err2 <= cfg.floor_factor * fl || f.err2 <= 0) continue;
        lt.push_back(std::log(f.t));
        lerr.push_back(std::log(f.err2));
    }
    rep.slope_t_short = linear_fit(lt, lerr);

    // Drift envelopes.
    rep.gap_drift = detail::drift_fit(
        rep.traces, [](const TrajectoryFrame& f0, const TrajectoryFrame& f) {
            return f0.gap - f.gap;
        });
    rep.e_drift = detail::drift_fit(
        rep.traces, [](const TrajectoryFrame& f0, const TrajectoryFrame& f) {
            return f.e_phi - f0.e_phi;
        });

    // Fixed-time drift ratios across alpha doublings (gap law saturation check).
    for (std::size_t i = 0; i < cfg.alphas.size(); ++i)
        for (std::size_t j = i + 1; j < cfg.alphas.size(); ++j)
            if (std::abs(cfg.alphas[j] - 2 * cfg.alphas[i]) < 1e-12) {
                auto drift_at_end = [](const AlphaTrace& tr) {
                    if (tr.frames.size() < 2) return 0.0;
                    double d = 0;
                    for (const auto& f : tr.frames)
                        d = std::max(d, std::abs(tr.frames.front().gap - f.gap));
                    return d;
                };
                double d1 = drift_at_end(rep.traces[i]);
                double d2 = drift_at_end(rep.traces[j]);
                if (d2 > 0) rep.gap_drift_doubling_ratios.push_back(d1 / d2);
            }

    // Single-constant pointwise bound err^2 <= C a^-4 (1 + a^-4 t^2).
    for (const auto& tr : rep.traces) {
        const double a4 = std::pow(tr.alpha, -4);
        for (const auto& f : tr.frames) {
            double bound_shape = a4 * (1.0 + a4 * f.t * f.t);
            rep.bound_constant = std::max(rep.bound_constant, f.err2 / bound_shape);
        }
    }
    return rep;
}

/// Envelope fit of the gap drift for a single trajectory.
inline DriftFit gap_drift_check(const AlphaTrace& trace) {
    return detail::drift_fit({trace}, [](const TrajectoryFrame& f0, const TrajectoryFrame& f) {
        return f0.gap - f.gap;
    });
}

/// Envelope fit of the eigenvalue drift e(phi_t) - e(phi_0) for one trajectory.
inline DriftFit eigenvalue_drift_check(const AlphaTrace& trace) {
    return detail::drift_fit({trace}, [](const TrajectoryFrame& f0, const TrajectoryFrame& f) {
        return f.e_phi - f0.e_phi;
    });
}

}  // namespace polaron
