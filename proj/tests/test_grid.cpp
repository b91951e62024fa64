#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "polaron/grid.hpp"

using namespace polaron;

namespace {

Field gaussian_1d(const SpectralGrid& g, double s = 1.0) {
    Field f(g, Space::position);
    for (std::size_t i = 0; i < g.size(); ++i) {
        double x = g.tables->x_axis[i];
        f.values[i] = std::exp(-x * x / (2 * s * s));
    }
    return f;
}

std::mt19937_64 rng_for(int i) { return std::mt19937_64(1234 + i); }

Field random_field(const SpectralGrid& g, Space space, int seed) {
    auto rng = rng_for(seed);
    std::normal_distribution<double> gauss;
    Field f(g, space);
    for (auto& v : f.values) v = cplx(gauss(rng), gauss(rng));
    return f;
}

}  // namespace

TEST_CASE("make_grid validates arguments") {
    CHECK_THROWS_AS(make_grid(3, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(32, -2.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(32, 0.0, 3), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(32, 1.0, 2), std::invalid_argument);
}

TEST_CASE("smallest grid momentum lattice") {
    SpectralGrid g = make_grid(2, 2 * kPi, 1);
    CHECK(g.dk == Catch::Approx(1.0));
    std::vector<double> ks(g.tables->k_axis);
    std::sort(ks.begin(), ks.end());
    CHECK(ks[0] == Catch::Approx(-1.0));
    CHECK(ks[1] == Catch::Approx(0.0));
}

TEST_CASE("grid spacings") {
    SpectralGrid g = make_grid(32, 16.0, 3);
    CHECK(g.dk == Catch::Approx(kPi / 8));
    CHECK(g.dx == Catch::Approx(0.5));
}

TEST_CASE("constant field transforms to the zero mode") {
    SpectralGrid g = make_grid(32, 8.0, 1);
    Field f(g, Space::position);
    for (auto& v : f.values) v = 1.0;
    Field fh = transform(f);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(std::abs(fh.values[i]) < 1e-12);
    CHECK(std::abs(fh.values[0]) > 1.0);
}

TEST_CASE("centered gaussian matches the analytic transform") {
    // exp(-x^2/2) -> exp(-k^2/2) under the (2 pi)^{-1/2} forward convention
    SpectralGrid g = make_grid(64, 16.0, 1);
    Field f = gaussian_1d(g);
    Field fh = transform(f);
    double worst = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        double k = g.tables->k_axis[i];
        worst = std::max(worst, std::abs(fh.values[i] - std::exp(-k * k / 2)));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("parseval holds for random fields") {
    for (int dims : {1, 3}) {
        SpectralGrid g = make_grid(dims == 1 ? 64 : 16, 7.5, dims);
        for (int s = 0; s < 5; ++s) {
            Field f = random_field(g, Space::position, s);
            Field fh = transform(f);
            double a = norm_l2(f), b = norm_l2(fh);
            CHECK(std::abs(a - b) <= 1e-12 * a);
        }
    }
}

TEST_CASE("transform round trip is the identity") {
    for (int dims : {1, 3}) {
        SpectralGrid g = make_grid(dims == 1 ? 64 : 16, 5.0, dims);
        Field f = random_field(g, Space::position, 17 + dims);
        Field back = transform(transform(f));
        double diff = 0, scale = 0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            diff += std::norm(back.values[i] - f.values[i]);
            scale += std::norm(f.values[i]);
        }
        CHECK(std::sqrt(diff / scale) < 1e-12);
    }
}

TEST_CASE("norms of the zero field vanish") {
    SpectralGrid g = make_grid(32, 4.0, 1);
    Field f(g, Space::position);
    CHECK(norm_l2(f) == 0.0);
    CHECK(norm_lp(f, 6.0) == 0.0);
    CHECK(norm_h1(f) == 0.0);
}

TEST_CASE("normalized grid gaussian has unit L2 norm") {
    SpectralGrid g = make_grid(64, 16.0, 1);
    Field f = gaussian_1d(g);
    double n = norm_l2(f);
    for (auto& v : f.values) v /= n;
    CHECK(norm_l2(f) == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("H1 norm of the standard gaussian matches the closed form") {
    // ||f||_2^2 = sqrt(pi), ||f'||_2^2 = sqrt(pi)/2, so H1 = (1.5 sqrt(pi))^{1/2}
    SpectralGrid g = make_grid(64, 16.0, 1);
    Field f = gaussian_1d(g);
    CHECK(norm_h1(f) == Catch::Approx(std::sqrt(1.5 * std::sqrt(kPi))).epsilon(1e-6));
}

TEST_CASE("Lp norms are absolutely homogeneous") {
    SpectralGrid g = make_grid(32, 6.0, 1);
    Field f = random_field(g, Space::position, 3);
    cplx c{-2.25, 1.5};
    Field cf = c * f;
    for (double p : {2.0, 3.0, 6.0, 1.2, 2.4}) {
        CHECK(norm_lp(cf, p) == Catch::Approx(std::abs(c) * norm_lp(f, p)).epsilon(1e-12));
    }
}

TEST_CASE("unsupported Lp arguments are rejected") {
    SpectralGrid g = make_grid(32, 6.0, 1);
    Field f = random_field(g, Space::position, 4);
    CHECK_THROWS_AS(norm_lp(f, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(norm_lp(f, -2.0), std::invalid_argument);
}

TEST_CASE("stencil dispersion agrees with the spectral one at long wavelength") {
    SpectralGrid g = make_grid(64, 32.0, 1);
    auto spec = dispersion_symbol(g, Dispersion::spectral);
    auto sten = dispersion_symbol(g, Dispersion::ring_stencil);
    CHECK(sten[0] == 0.0);
    CHECK(sten[1] == Catch::Approx(spec[1]).epsilon(5e-3));
}
