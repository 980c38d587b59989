#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "kslab/core.hpp"
#include "kslab/elliptic.hpp"
#include "kslab/quadrature.hpp"
#include "oracles.hpp"

using namespace kslab;

namespace {

RadialProfile uniform_u(double R, int M, double c) {
    RadialProfile u;
    u.r.resize(static_cast<std::size_t>(M) + 1);
    for (int j = 0; j <= M; ++j) u.r[static_cast<std::size_t>(j)] = R * j / M;
    u.f.assign(u.r.size(), c);
    return u;
}

} // namespace

TEST_CASE("zero source gives zero stress") {
    Params p{1.0, 1.0, 2};
    RadialProfile v = solve_helmholtz_radial(uniform_u(1.0, 128, 0.0), p);
    for (double x : v.f) CHECK(x == 0.0);
}

TEST_CASE("k=0 Poisson solution is reproduced exactly") {
    // v = (1 - r^2)/4 is quadratic, so the conservative scheme is exact
    Params p{1.0, 0.0, 2};
    RadialProfile v = solve_helmholtz_radial(uniform_u(1.0, 512, 1.0), p);
    for (std::size_t j = 0; j < v.r.size(); ++j) {
        const double exact = 0.25 * (1.0 - v.r[j] * v.r[j]);
        CHECK(v.f[j] == doctest::Approx(exact).epsilon(1e-12));
    }
    CHECK(std::abs(v.f[0] - 0.25) < 1e-10);
}

TEST_CASE("k=1 solution matches the Bessel closed form") {
    // v(r) = 1 - I_0(r)/I_0(1); the center value 1 - 1/I_0(1) = 0.21015168...
    Params p{1.0, 1.0, 2};
    RadialProfile v = solve_helmholtz_radial(uniform_u(1.0, 4096, 1.0), p);
    const double i0_1 = oracles::bessel_i0(1.0);
    double max_err = 0.0;
    for (std::size_t j = 0; j < v.r.size(); ++j) {
        const double exact = 1.0 - oracles::bessel_i0(v.r[j]) / i0_1;
        max_err = std::max(max_err, std::abs(v.f[j] - exact));
    }
    CHECK(max_err < 1e-6);
    CHECK(std::abs(v.f[0] - (1.0 - 1.0 / i0_1)) < 1e-6);
}

TEST_CASE("positivity preservation") {
    Params p{2.0, 3.0, 2};
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(0.0, 5.0);
    RadialProfile u = uniform_u(2.0, 256, 0.0);
    for (double& f : u.f) f = U(rng);
    RadialProfile v = solve_helmholtz_radial(u, p);
    double vmax = 0.0;
    for (double x : v.f) vmax = std::max(vmax, x);
    for (double x : v.f) CHECK(x >= -1e-12 * vmax);
}

TEST_CASE("flux identity: total source equals degradation plus boundary flux") {
    const double R = 1.3;
    Params p{R, 1.0, 2};
    const int M = 2048;
    RadialProfile u = uniform_u(R, M, 0.0);
    for (std::size_t j = 0; j < u.r.size(); ++j)
        u.f[j] = 1.0 + std::cos(M_PI * u.r[j] / R);
    RadialProfile v = solve_helmholtz_radial(u, p);

    std::vector<double> ru(u.r.size()), rv(u.r.size());
    for (std::size_t j = 0; j < u.r.size(); ++j) {
        ru[j] = u.r[j] * u.f[j];
        rv[j] = u.r[j] * v.f[j];
    }
    const double mass = 2.0 * M_PI * trapezoid(u.r, ru);
    const double h = u.r[1] - u.r[0];
    const std::size_t n = v.f.size();
    const double vp_R = (3.0 * v.f[n - 1] - 4.0 * v.f[n - 2] + v.f[n - 3]) / (2.0 * h);
    const double lhs = 2.0 * M_PI * (p.k * trapezoid(v.r, rv) + R * std::abs(vp_R));
    CHECK(std::abs(lhs - mass) < 1e-4 * mass);
}

TEST_CASE("monotone dependence on the source") {
    Params p{1.0, 0.7, 2};
    RadialProfile u1 = uniform_u(1.0, 128, 0.0);
    RadialProfile u2 = u1;
    for (std::size_t j = 0; j < u1.r.size(); ++j) {
        u1.f[j] = std::sin(2.0 * u1.r[j]) + 1.0;
        u2.f[j] = u1.f[j] + 0.3 * u1.r[j];
    }
    RadialProfile v1 = solve_helmholtz_radial(u1, p);
    RadialProfile v2 = solve_helmholtz_radial(u2, p);
    for (std::size_t j = 0; j < v1.f.size(); ++j) CHECK(v1.f[j] <= v2.f[j] + 1e-14);
}

TEST_CASE("z-BVP trivial cases") {
    MassGrid grid = build_mass_grid(1.0, 64);
    std::vector<double> w(grid.nodes());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = grid.s[i];

    SUBCASE("k = 0 short-circuits to zero") {
        Params p{1.0, 0.0, 2};
        for (double z : solve_z_bvp(w, p, grid)) CHECK(z == 0.0);
    }
    SUBCASE("w = 0 gives z = 0") {
        Params p{1.0, 2.0, 2};
        std::vector<double> zero(grid.nodes(), 0.0);
        for (double z : solve_z_bvp(zero, p, grid)) CHECK(z == 0.0);
    }
}

TEST_CASE("z-BVP agrees with the cumulated Helmholtz solution") {
    // w from u = 1: solve the BVP in s and compare with the cumulated
    // integral k int rho v drho = (k/2) int v(sqrt(sigma)) dsigma, with v
    // solved independently by the elliptic solver on the same nodes.
    Params p{1.0, 1.0, 2};
    const int N = 2048;
    MassGrid grid = build_mass_grid(1.0, N);
    RadialProfile u;
    u.r = radial_nodes(grid);
    u.f.assign(u.r.size(), 1.0);
    std::vector<double> w = profile_to_w0(u, grid);
    std::vector<double> z = solve_z_bvp(w, p, grid);

    RadialProfile v = solve_helmholtz_mass_grid(u.f, p, grid);
    std::vector<double> z_ref(grid.nodes(), 0.0);
    const double h = grid.h();
    for (std::size_t i = 1; i < z_ref.size(); ++i)
        z_ref[i] = z_ref[i - 1] + 0.25 * p.k * h * (v.f[i] + v.f[i - 1]);
    double zmax = 0.0, err = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        zmax = std::max(zmax, std::abs(z_ref[i]));
        err = std::max(err, std::abs(z[i] - z_ref[i]));
    }
    CHECK(err < 1e-5 * zmax);
}

TEST_CASE("mass-grid Helmholtz solve matches the Bessel closed form") {
    Params p{1.0, 1.0, 2};
    MassGrid grid = build_mass_grid(1.0, 2048);
    std::vector<double> u(grid.nodes(), 1.0);
    RadialProfile v = solve_helmholtz_mass_grid(u, p, grid);
    const double i0_1 = oracles::bessel_i0(1.0);
    for (std::size_t j = 0; j < v.r.size(); ++j) {
        const double exact = 1.0 - oracles::bessel_i0(v.r[j]) / i0_1;
        CHECK(std::abs(v.f[j] - exact) < 1e-7);
    }
}

TEST_CASE("z-BVP output is bracketed and monotone") {
    Params p{1.0, 2.5, 2};
    MassGrid grid = build_mass_grid(1.0, 256);
    RadialProfile u;
    u.r = radial_nodes(grid);
    u.f.resize(u.r.size());
    for (std::size_t i = 0; i < u.r.size(); ++i)
        u.f[i] = 2.0 + std::cos(3.0 * u.r[i]);
    std::vector<double> w = profile_to_w0(u, grid);
    const double half_mass = w.back();
    std::vector<double> z = solve_z_bvp(w, p, grid);
    for (std::size_t i = 0; i < z.size(); ++i) {
        CHECK(z[i] >= -1e-14 * half_mass);
        CHECK(z[i] <= half_mass * (1.0 + 1e-12));
        if (i > 0) CHECK(z[i] >= z[i - 1] - 1e-12 * half_mass);
    }
}

TEST_CASE("ring-source Green bound is positive and grid-converged") {
    Params p{1.0, 1.0, 2};
    const double c2_coarse = ring_green_lower_bound(p, 1024);
    const double c2_fine = ring_green_lower_bound(p, 2048);
    CHECK(c2_coarse > 0.0);
    CHECK(c2_fine > 0.0);
    CHECK(std::abs(c2_fine - c2_coarse) < 0.01 * c2_fine);
}

TEST_CASE("ring-source Green bound regression value") {
    // frozen from the first fine-grid computation (M = 8192)
    Params p{1.0, 1.0, 2};
    const double c2 = ring_green_lower_bound(p, 8192);
    CHECK(c2 == doctest::Approx(0.0908396740).epsilon(2e-3));
}
