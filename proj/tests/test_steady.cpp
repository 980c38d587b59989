#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "kslab/core.hpp"
#include "kslab/quadrature.hpp"
#include "kslab/steady.hpp"

using namespace kslab;

namespace {

// k = 0 on the unit disk is the Liouville case with closed forms
//   lambda(a) = 8 (e^{a/2} - 1) e^{-a},   m(a) = 8 pi (1 - e^{-a/2}).
double liouville_lambda(double a) { return 8.0 * (std::exp(0.5 * a) - 1.0) * std::exp(-a); }
double liouville_mass(double a) { return 8.0 * M_PI * (1.0 - std::exp(-0.5 * a)); }

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo + (hi - lo) * i / (n - 1);
    return g;
}

} // namespace

TEST_CASE("shoot closed forms") {
    Params p{1.0, 1.0, 2};
    SUBCASE("lambda = 0, a = 0 stays at zero") {
        ShootResult s = shoot(0.0, 0.0, p, 128);
        for (double v : s.v.f) CHECK(v == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(s.v_end == doctest::Approx(0.0).epsilon(1e-14));
    }
    SUBCASE("lambda = 0, k = 0 keeps the constant value") {
        Params p0{1.0, 0.0, 2};
        ShootResult s = shoot(2.5, 0.0, p0, 128);
        for (double v : s.v.f) CHECK(v == doctest::Approx(2.5).epsilon(1e-13));
    }
    SUBCASE("integration aborts cleanly on overflow") {
        // enormous central value forces v past the cap immediately
        ShootResult s = shoot(0.0, 1e6, p, 128);
        (void)s;  // either diverged or strongly negative; must not crash
        CHECK((s.diverged || s.v_end < 0.0));
    }
}

TEST_CASE("shooting integrator is fourth order in the step") {
    Params p{1.0, 1.0, 2};
    const double a = 1.0, lam = 2.0;
    const double ref = shoot(a, lam, p, 262144).v_end;
    double prev = 0.0;
    for (int M : {512, 1024, 2048}) {
        const double e = std::abs(shoot(a, lam, p, M).v_end - ref);
        if (prev > 0.0) {
            const double ratio = prev / e;
            CHECK(ratio > 10.0);
            CHECK(ratio < 22.0);
        }
        prev = e;
    }
}

TEST_CASE("lambda root-find against the Liouville closed form") {
    Params p{1.0, 0.0, 2};
    for (double a : {0.5, 2.0, 8.0, 15.0}) {
        BranchPoint pt = solve_lambda(a, p, 8192);
        CHECK(pt.lambda == doctest::Approx(liouville_lambda(a)).epsilon(1e-7));
        CHECK(pt.m == doctest::Approx(liouville_mass(a)).epsilon(1e-7));
        CHECK(pt.residual < 1e-10 * (1.0 + a));
        CHECK(pt.vmax == doctest::Approx(a).epsilon(1e-12));
    }
}

TEST_CASE("lambda root at k=1, a=1 (frozen fine-grid value)") {
    Params p{1.0, 1.0, 2};
    BranchPoint pt = solve_lambda(1.0, p, 16384);
    CHECK(pt.lambda == doctest::Approx(2.24481031255404).epsilon(1e-9));
    CHECK(pt.residual < 1e-10 * 2.0);
}

TEST_CASE("steady mass consistency") {
    Params p{1.0, 1.0, 2};
    SUBCASE("lambda = 0 carries no mass") {
        BranchPoint pt;
        pt.lambda = 0.0;
        pt.profile.r = linspace(0.0, 1.0, 257);
        pt.profile.f.assign(257, 0.0);
        CHECK(steady_mass(pt, p) == 0.0);
    }
    SUBCASE("flux identity and the u-integral") {
        BranchPoint pt = solve_lambda(1.5, p, 8192);
        // m = 2 pi (k int r v dr + R |v'(R)|)
        std::vector<double> rv(pt.profile.r.size());
        for (std::size_t j = 0; j < rv.size(); ++j)
            rv[j] = pt.profile.r[j] * pt.profile.f[j];
        const double lhs =
            2.0 * M_PI * (p.k * trapezoid(pt.profile.r, rv) + p.R * std::abs(pt.vp_end));
        CHECK(lhs == doctest::Approx(pt.m).epsilon(1e-3));
        // independent quadrature of u = lambda e^v
        std::vector<double> ru(pt.profile.r.size());
        for (std::size_t j = 0; j < ru.size(); ++j)
            ru[j] = pt.profile.r[j] * pt.lambda * std::exp(pt.profile.f[j]);
        CHECK(2.0 * M_PI * trapezoid(pt.profile.r, ru) ==
              doctest::Approx(pt.m).epsilon(1e-6));
    }
}

TEST_CASE("branch trace: continuity, bounds, and fold structure") {
    Params p{1.0, 1.0, 2};
    std::vector<double> a_grid = linspace(0.25, 14.0, 56);
    Branch br = branch_trace(p, a_grid, 4096, 0);
    REQUIRE(br.failed_a.empty());
    REQUIRE(br.points.size() == a_grid.size());

    double lam_max_seen = 0.0;
    for (const BranchPoint& pt : br.points)
        lam_max_seen = std::max(lam_max_seen, pt.lambda);
    for (std::size_t i = 0; i < br.points.size(); ++i) {
        const BranchPoint& pt = br.points[i];
        CHECK(pt.vmax == doctest::Approx(pt.a).epsilon(1e-12));  // max at r = 0
        MassBoundCheck bc = check_mass_bound(pt, p);
        CHECK(bc.holds);
        if (i >= 2) {  // no jumps far above the local secant scale
            const double prev_step = std::abs(br.points[i - 1].lambda - br.points[i - 2].lambda);
            const double step = std::abs(pt.lambda - br.points[i - 1].lambda);
            CHECK(step <= 10.0 * prev_step + 1e-2 * lam_max_seen);
        }
    }

    BranchExtremum mm = m_max(br, 4096);
    CHECK(mm.m > 8.0 * M_PI);

    SUBCASE("steady-state counts by mass level") {
        CHECK(count_states(br, 0.5 * 8.0 * M_PI).count == 1);
        const double between = 0.5 * (8.0 * M_PI + mm.m);
        CHECK(count_states(br, between).count == 2);
        CHECK(count_states(br, mm.m + 1.0).count == 0);
    }
}

TEST_CASE("k=0 branch is fold-free and saturates at 8 pi") {
    Params p{1.0, 0.0, 2};
    std::vector<double> a_grid = linspace(0.5, 15.0, 30);
    Branch br = branch_trace(p, a_grid, 4096, 0);
    REQUIRE(br.failed_a.empty());
    for (std::size_t i = 1; i < br.points.size(); ++i)
        CHECK(br.points[i].m >= br.points[i - 1].m - 1e-12);
    BranchExtremum mm = m_max(br, 4096);
    CHECK(std::abs(mm.m - 8.0 * M_PI) < 0.02 * 8.0 * M_PI);
    for (const BranchPoint& pt : br.points) CHECK(pt.m <= 8.0 * M_PI + 1e-3);
}

TEST_CASE("mass-maximizing profile at R=10 shows the unit plateau") {
    Params p{10.0, 1.0, 2};
    std::vector<double> a_grid = linspace(0.4, 6.0, 15);
    Branch br = branch_trace(p, a_grid, 8192, 0);
    BranchExtremum mm = m_max(br, 8192);
    BranchPoint pt = solve_lambda(mm.a, p, 8192);
    const double v_mid = pt.profile.f[pt.profile.f.size() / 2];
    CHECK(v_mid > 0.7);
    CHECK(v_mid < 1.3);
}

TEST_CASE("critical mass table") {
    SUBCASE("planar disk") {
        CriticalMassTable t = critical_mass_table(2, 1.0, 1.0);
        CHECK(t.M_star == doctest::Approx(8.0 * M_PI));
        CHECK(t.M_star_upper == doctest::Approx(8.0 * M_PI + 2.0 * M_PI));
        CriticalMassTable t0 = critical_mass_table(2, 3.7, 0.0);
        CHECK(t0.M_star == doctest::Approx(8.0 * M_PI));
        CHECK(t0.M_star_upper == doctest::Approx(8.0 * M_PI));
    }
    SUBCASE("three-dimensional ball") {
        CHECK(unit_sphere_measure(3) == doctest::Approx(4.0 * M_PI));
        CriticalMassTable t = critical_mass_table(3, 1.0, 0.0);
        CHECK(t.M_star == 0.0);
        CHECK(t.M_star_upper == doctest::Approx(8.0 * M_PI / 3.0));
    }
    CHECK_THROWS_AS(critical_mass_table(1, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("mass bound check reports slack") {
    Params p{1.0, 1.0, 2};
    BranchPoint pt;
    pt.m = 10.0 * M_PI;  // exactly the bound for k=1, R=1
    MassBoundCheck bc = check_mass_bound(pt, p);
    CHECK(bc.holds);
    CHECK(bc.slack == doctest::Approx(0.0).epsilon(1e-14));
    pt.m = 10.0 * M_PI + 0.01;
    CHECK_FALSE(check_mass_bound(pt, p).holds);
}

TEST_CASE("input validation") {
    Params p{1.0, 1.0, 2};
    CHECK_THROWS_AS((void)shoot(-1.0, 0.0, p, 128), std::invalid_argument);
    CHECK_THROWS_AS((void)shoot(1.0, -0.5, p, 128), std::invalid_argument);
    CHECK_THROWS_AS((void)solve_lambda(0.0, p), std::invalid_argument);
    CHECK_THROWS_AS(branch_trace(p, {2.0, 1.0}), std::invalid_argument);
}
