#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "polaron/adiabatic.hpp"

using namespace polaron;

namespace {

LPState random_state(const SpectralGrid& g, double alpha, int seed) {
    std::mt19937_64 rng(seed);
    LPState s;
    Field amp = random_mode_field(g, rng());
    for (auto& v : amp.values) v *= 0.5;
    s.phi = PhononField{std::move(amp), alpha};
    s.psi = normalized(transform(random_mode_field(g, rng())));
    s.alpha = alpha;
    return s;
}

double state_distance(const LPState& a, const LPState& b) {
    Field dpsi = a.psi.psi - b.psi.psi;
    Field dphi = a.phi.amp - b.phi.amp;
    return norm_l2(dpsi) + norm_l2(dphi);
}

}  // namespace

TEST_CASE("phonon rotation basics") {
    SpectralGrid g = make_grid(32, 8.0, 1);
    std::mt19937_64 rng(1);
    PhononField phi{random_mode_field(g, rng()), 3.0};
    Field sigma = random_mode_field(g, rng());

    SECTION("dt = 0 leaves phi unchanged") {
        PhononField out = phonon_exact_rotation(phi, sigma, 0.0, 3.0);
        for (std::size_t i = 0; i < g.size(); ++i)
            CHECK(out.amp.values[i] == phi.amp.values[i]);
    }
    SECTION("sigma = -phi is a fixed point for every dt") {
        Field ms(g, Space::momentum);
        for (std::size_t i = 0; i < g.size(); ++i) ms.values[i] = -phi.amp.values[i];
        for (double dt : {0.1, 1.7, 12.0}) {
            PhononField out = phonon_exact_rotation(phi, ms, dt, 3.0);
            double worst = 0;
            for (std::size_t i = 0; i < g.size(); ++i)
                worst = std::max(worst, std::abs(out.amp.values[i] - phi.amp.values[i]));
            CHECK(worst < 1e-13);
        }
    }
    SECTION("a full period returns phi") {
        const double alpha = 3.0;
        PhononField out = phonon_exact_rotation(phi, sigma, 2 * kPi * alpha * alpha, alpha);
        double worst = 0;
        for (std::size_t i = 0; i < g.size(); ++i)
            worst = std::max(worst, std::abs(out.amp.values[i] - phi.amp.values[i]));
        CHECK(worst < 1e-11);
    }
}

TEST_CASE("decoupled phonons rotate freely") {
    // with sigma identically zero (no electron source), phi(t) = e^{-it/a^2} phi(0)
    SpectralGrid g = make_grid(32, 8.0, 1);
    std::mt19937_64 rng(2);
    PhononField phi{random_mode_field(g, rng()), 2.0};
    Field zero(g, Space::momentum);
    double t = 0.7;
    PhononField out = phonon_exact_rotation(phi, zero, t, 2.0);
    cplx rot = std::exp(cplx(0, -t / 4.0));
    double worst = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
        worst = std::max(worst, std::abs(out.amp.values[i] - rot * phi.amp.values[i]));
    CHECK(worst < 1e-14);
}

TEST_CASE("steps are unitary and reversible") {
    SpectralGrid g = make_grid(64, 16.0, 1);
    LPState s = random_state(g, 4.0, 3);
    LPState s1 = lp_step(s, 1e-3);
    CHECK(std::abs(norm_l2(s1.psi.psi) - 1.0) <= 1e-13);
    LPState s2 = lp_step(s1, -1e-3);
    CHECK(state_distance(s2, s) <= 1e-11);
}

TEST_CASE("strang splitting converges at second order globally") {
    SpectralGrid g = make_grid(64, 16.0, 1);
    LPState s0 = random_state(g, 4.0, 4);
    const double T = 1.0;

    auto integrate = [&](double dt) {
        LPState s = s0;
        long n = std::lround(T / dt);
        for (long i = 0; i < n; ++i) s = lp_step(s, dt);
        return s;
    };
    LPState ref = integrate(3.125e-5);
    std::vector<double> dts{1e-3, 5e-4, 2.5e-4, 1.25e-4};
    std::vector<double> lx, ly;
    for (double dt : dts) {
        LPState s = integrate(dt);
        lx.push_back(std::log(dt));
        ly.push_back(std::log(state_distance(s, ref)));
    }
    FitResult f = linear_fit(lx, ly);
    CHECK(f.slope == Catch::Approx(2.0).margin(0.2));
}

TEST_CASE("frozen-potential limit matches a dense propagator oracle") {
    // alpha so large that phi is frozen on t <= 1: the electron evolves under
    // the fixed h_phi, which a dense matrix exponential reproduces
    SpectralGrid g = make_grid(64, 16.0, 1);
    LPState s0 = random_state(g, 1e6, 5);
    Field V = potential_from_phonons(s0.phi);
    SchrodingerOp op(V);

    const int n = static_cast<int>(g.size());
    Eigen::MatrixXcd H(n, n);
    for (int j = 0; j < n; ++j) {
        Field e(g, Space::position);
        e.values[j] = 1.0;
        Field he = op.apply(e);
        for (int i = 0; i < n; ++i) H(i, j) = he.values[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    Eigen::VectorXcd psi0(n);
    for (int i = 0; i < n; ++i) psi0(i) = s0.psi.psi.values[i];
    const double T = 1.0;
    Eigen::VectorXcd target =
        es.eigenvectors() *
        ((cplx(0, -T) * es.eigenvalues().array().cast<cplx>()).exp() *
         (es.eigenvectors().adjoint() * psi0).array())
            .matrix();

    LPState s = s0;
    const double dt = 1e-4;
    for (long i = 0; i < std::lround(T / dt); ++i) s = lp_step(s, dt);
    double diff = 0;
    for (int i = 0; i < n; ++i) diff += std::norm(s.psi.psi.values[i] - target(i));
    CHECK(std::sqrt(diff * g.cell_volume()) < 1e-6);
}

TEST_CASE("energy of a free plane wave is its squared momentum") {
    SpectralGrid g = make_grid(32, 8.0, 1);
    LPState s;
    s.phi = PhononField{Field(g, Space::momentum), 1.0};
    Field pw(g, Space::position);
    const double k0 = 3 * g.dk;
    for (std::size_t i = 0; i < g.size(); ++i)
        pw.values[i] = std::exp(cplx(0, k0 * g.tables->x_axis[i]));
    s.psi = normalized(std::move(pw));
    s.alpha = 1.0;
    CHECK(energy(s) == Catch::Approx(k0 * k0).margin(1e-10));
}

TEST_CASE("energy drift shrinks at second order in dt") {
    SpectralGrid g = make_grid(64, 16.0, 1);
    LPState s0 = random_state(g, 4.0, 6);
    const double T = 1.0;
    auto drift = [&](double dt) {
        LPState s = s0;
        double e0 = energy(s);
        for (long i = 0; i < std::lround(T / dt); ++i) s = lp_step(s, dt);
        return std::abs(energy(s) - e0) / std::abs(e0);
    };
    double d1 = drift(1e-3), d2 = drift(5e-4);
    CHECK(d1 / d2 == Catch::Approx(4.0).margin(1.0));
}

TEST_CASE("omega closed form: zero field, pekar point, and the defining formula") {
    SpectralGrid g = make_grid(64, 16.0, 1);

    SECTION("phi = 0 gives omega = 0") {
        LPState s;
        s.phi = PhononField{Field(g, Space::momentum), 1.0};
        s.psi = pekar_seed(g);
        s.alpha = 1.0;
        CHECK(omega(s) == 0.0);
    }
    SECTION("pekar point: both routes give the squared sigma norm") {
        PekarPoint pk = pekar_minimize(pekar_seed(g), 1e-12, 1e-13, 2.0);
        LPState s;
        s.psi = pk.psi;
        s.phi = pk.phi;
        s.alpha = 2.0;
        Field sig = sigma_from_electron(pk.psi);
        double n2 = std::pow(norm_l2(sig), 2);
        CHECK(omega(s) == Catch::Approx(n2).margin(1e-10));
        // defining formula with d/dt phi = 0 at the fixed point: ||phi||^2
        CHECK(std::pow(norm_l2(pk.phi.amp), 2) == Catch::Approx(n2).margin(1e-10));
    }
    SECTION("generic state: closed form matches the finite-difference definition") {
        LPState s = random_state(g, 4.0, 7);
        double om = omega(s);
        const double dt = 1e-5;
        LPState sp = lp_step(s, dt), sm = lp_step(s, -dt);
        cplx ip = 0;
        for (std::size_t i = 0; i < g.size(); ++i)
            ip += std::conj(s.phi.amp.values[i]) *
                  (sp.phi.amp.values[i] - sm.phi.amp.values[i]) / (2 * dt);
        ip *= g.mode_volume();
        double n2 = std::pow(norm_l2(s.phi.amp), 2);
        double om_def = s.alpha * s.alpha * ip.imag() + n2;
        CHECK(om == Catch::Approx(om_def).margin(50 * dt));
    }
}

TEST_CASE("phase accumulators: zero at start, exact for stationary data, second order") {
    SpectralGrid g = make_grid(64, 16.0, 1);
    PekarPoint pk = pekar_minimize(pekar_seed(g), 1e-12, 1e-13, 4.0);
    LPState s;
    s.psi = pk.psi;
    s.phi = pk.phi;
    s.alpha = 4.0;

    TrajectoryOptions opt;
    opt.dt = 1e-3;
    opt.t_final = 0.5;
    opt.frame_cadence = 100;
    opt.eig_tol = 1e-12;
    Trajectory traj(s, opt);
    CHECK(traj.state().phase_e == 0.0);
    CHECK(traj.state().phase_omega == 0.0);
    auto frames = traj.run();
    // stationary point: integrand constant, trapezoid is exact
    CHECK(frames.back().phase_e ==
          Catch::Approx(pk.gs.e * frames.back().t).epsilon(1e-8));
    double n2 = std::pow(norm_l2(pk.phi.amp), 2);
    CHECK(frames.back().phase_omega == Catch::Approx(n2 * frames.back().t).epsilon(1e-7));
}

TEST_CASE("conservation report over one step and a short run") {
    SpectralGrid g = make_grid(32, 12.0, 1);
    LPState s = random_state(g, 4.0, 8);
    TrajectoryOptions opt;
    opt.dt = 1e-3;
    opt.t_final = 0.05;
    opt.frame_cadence = 10;
    opt.eig_tol = 1e-9;
    opt.track_gap = false;
    Trajectory traj(s, opt);
    auto frames = traj.run();
    auto rep = conservation_report(frames);
    CHECK(rep.norm_drift <= 1e-12);
    CHECK(rep.energy_drift < 1e-5);
    CHECK(rep.max_h1 > 0);
    CHECK(rep.max_l2_phi > 0);
}

TEST_CASE("lp_step rejects zero dt and detects blowup") {
    SpectralGrid g = make_grid(32, 8.0, 1);
    LPState s = random_state(g, 2.0, 9);
    CHECK_THROWS_AS(lp_step(s, 0.0), std::invalid_argument);
    s.psi.psi.values[3] = cplx(std::numeric_limits<double>::infinity(), 0);
    CHECK_THROWS_AS(lp_step(s, 1e-3), NumericalError);
}
