#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "kslab/core.hpp"

using namespace kslab;

TEST_CASE("mass grid nodes are uniform in s with exact endpoints") {
    MassGrid g = build_mass_grid(1.0, 16);
    CHECK(g.s.front() == 0.0);
    CHECK(g.s.back() == 1.0);
    CHECK(g.s[4] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(g.s[6] == doctest::Approx(0.375).epsilon(1e-15));

    MassGrid g2 = build_mass_grid(2.0, 32);
    CHECK(g2.s.back() == 4.0);
    CHECK(g2.s[16] == doctest::Approx(2.0).epsilon(1e-15));

    CHECK_THROWS_AS(build_mass_grid(1.0, 8), std::invalid_argument);
    CHECK_THROWS_AS(build_mass_grid(-1.0, 64), std::invalid_argument);
}

namespace {

RadialProfile constant_profile(const MassGrid& grid, double c) {
    RadialProfile u;
    u.r = radial_nodes(grid);
    u.f.assign(u.r.size(), c);
    return u;
}

} // namespace

TEST_CASE("cumulated mass of simple profiles") {
    MassGrid grid = build_mass_grid(1.0, 64);

    SUBCASE("zero profile") {
        auto w0 = profile_to_w0(constant_profile(grid, 0.0), grid);
        for (double v : w0) CHECK(v == 0.0);
    }
    SUBCASE("constant profile gives w0 = c s / 2") {
        const double c = 3.25;
        auto w0 = profile_to_w0(constant_profile(grid, c), grid);
        for (std::size_t i = 0; i < w0.size(); ++i)
            CHECK(w0[i] == doctest::Approx(0.5 * c * grid.s[i]).epsilon(1e-14));
    }
    SUBCASE("uniform datum of mass m reaches w0(R^2) = m/(2 pi)") {
        const double m = 27.0;
        auto w0 = profile_to_w0(constant_profile(grid, m / M_PI), grid);
        CHECK(w0.back() == doctest::Approx(m / (2.0 * M_PI)).epsilon(1e-14));
    }
    SUBCASE("negative input rejected") {
        RadialProfile u = constant_profile(grid, 1.0);
        u.f[3] = -0.5;
        CHECK_THROWS_AS(profile_to_w0(u, grid), std::invalid_argument);
    }
}

TEST_CASE("quadrature is exact for profiles linear in s") {
    // u0 = alpha + beta r^2 has mass 2 pi (alpha R^2/2 + beta R^4/4)
    const double R = 1.7, alpha = 0.8, beta = 0.3;
    MassGrid grid = build_mass_grid(R, 128);
    RadialProfile u;
    u.r = radial_nodes(grid);
    u.f.resize(u.r.size());
    for (std::size_t i = 0; i < u.r.size(); ++i)
        u.f[i] = alpha + beta * u.r[i] * u.r[i];
    WState st;
    st.w = profile_to_w0(u, grid);
    const double exact = 2.0 * M_PI * (alpha * R * R / 2.0 + beta * std::pow(R, 4) / 4.0);
    CHECK(total_mass(st) == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("total mass from the boundary value") {
    WState st;
    st.w = {0.0, 1.0, 4.0};
    CHECK(total_mass(st) == doctest::Approx(8.0 * M_PI));
    st.w = {0.0, 0.0, 0.0};
    CHECK(total_mass(st) == 0.0);
    const double eps = 0.37;
    st.w = {0.0, 2.0, 4.0 + eps};
    CHECK(total_mass(st) == doctest::Approx(2.0 * M_PI * (4.0 + eps)));
}

TEST_CASE("density recovery inverts the cumulated transform") {
    MassGrid grid = build_mass_grid(1.0, 256);

    SUBCASE("w = c s / 2 gives u = c") {
        const double c = 2.5;
        WState st;
        st.w.resize(grid.nodes());
        for (std::size_t i = 0; i < st.w.size(); ++i) st.w[i] = 0.5 * c * grid.s[i];
        st.m = 2.0 * M_PI * st.w.back();
        RadialProfile u = w_to_u(st, grid);
        for (double v : u.f) CHECK(v == doctest::Approx(c).epsilon(1e-11));
    }
    SUBCASE("w = 0 gives u = 0") {
        WState st;
        st.w.assign(grid.nodes(), 0.0);
        RadialProfile u = w_to_u(st, grid);
        for (double v : u.f) CHECK(v == 0.0);
    }
    SUBCASE("w = 4s/(s+b) gives u = 8b/(r^2+b)^2") {
        const double b = 0.2;
        MassGrid fine = build_mass_grid(1.0, 512);
        WState st;
        st.w.resize(fine.nodes());
        for (std::size_t i = 0; i < st.w.size(); ++i)
            st.w[i] = 4.0 * fine.s[i] / (fine.s[i] + b);
        st.m = 2.0 * M_PI * st.w.back();
        RadialProfile u = w_to_u(st, fine);
        for (std::size_t i = 0; i < u.r.size(); ++i) {
            const double s = fine.s[i];
            const double exact = 8.0 * b / ((s + b) * (s + b));
            CHECK(u.f[i] == doctest::Approx(exact).epsilon(5e-4));
        }
    }
}

namespace {

double roundtrip_error(int N) {
    MassGrid grid = build_mass_grid(1.0, N);
    RadialProfile u;
    u.r = radial_nodes(grid);
    u.f.resize(u.r.size());
    for (std::size_t i = 0; i < u.r.size(); ++i)
        u.f[i] = std::exp(-4.0 * u.r[i] * u.r[i]) + 0.5;
    WState st;
    st.w = profile_to_w0(u, grid);
    st.m = 2.0 * M_PI * st.w.back();
    RadialProfile back = w_to_u(st, grid);
    double err = 0.0;
    for (std::size_t i = 0; i < u.f.size(); ++i)
        err = std::max(err, std::abs(back.f[i] - u.f[i]));
    return err;
}

} // namespace

TEST_CASE("profile -> w0 -> u roundtrip converges at second order") {
    const double e1 = roundtrip_error(256);
    const double e2 = roundtrip_error(512);
    CHECK(e1 < 2e-4);
    const double ratio = e1 / e2;
    CHECK(ratio > 3.0);
    CHECK(ratio < 5.5);
}

TEST_CASE("monotone smooth w yields nonnegative u") {
    std::mt19937 rng(20240911);
    std::uniform_real_distribution<double> amp(0.0, 2.0), freq(0.5, 4.0);
    MassGrid grid = build_mass_grid(1.0, 128);
    for (int trial = 0; trial < 32; ++trial) {
        // cumulative integral of a nonnegative smooth density
        const double a0 = amp(rng), a1 = amp(rng), f1 = freq(rng);
        WState st;
        st.w.assign(grid.nodes(), 0.0);
        auto dens = [&](double s) { return a0 + a1 * (1.0 + std::sin(f1 * s)); };
        for (std::size_t i = 1; i < st.w.size(); ++i) {
            const double h = grid.s[i] - grid.s[i - 1];
            st.w[i] = st.w[i - 1] + 0.5 * h * (dens(grid.s[i - 1]) + dens(grid.s[i]));
        }
        st.m = 2.0 * M_PI * st.w.back();
        RadialProfile u = w_to_u(st, grid);
        for (double v : u.f) CHECK(v >= 0.0);
    }
}
