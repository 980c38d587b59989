#include "kslab/steady.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "kslab/parallel.hpp"
#include "kslab/quadrature.hpp"

namespace kslab {

namespace {

constexpr double kOverflowV = 700.0;  // exp overflow guard

struct Rhs {
    double k, lambda;
    // y = (v, p), y' = (p, -p/r + k v - lambda e^v)
    void operator()(double r, double v, double p, double& dv, double& dp) const {
        dv = p;
        dp = -p / r + k * v - lambda * std::exp(std::min(v, kOverflowV));
    }
};

} // namespace

ShootResult shoot(double a, double lambda, const Params& params, int M) {
    params.validate();
    if (!(a >= 0.0)) throw std::invalid_argument("shoot: a must be >= 0");
    if (!(lambda >= 0.0)) throw std::invalid_argument("shoot: lambda must be >= 0");
    if (M < 16) throw std::invalid_argument("shoot: M too small");

    const double R = params.R;
    const double h = R / M;
    ShootResult out;
    out.v.r.resize(static_cast<std::size_t>(M) + 1);
    out.v.f.assign(static_cast<std::size_t>(M) + 1,
                   std::numeric_limits<double>::quiet_NaN());
    for (int j = 0; j <= M; ++j) out.v.r[static_cast<std::size_t>(j)] = R * j / M;

    // Two-term Taylor start removes the v'/r singularity on the first cell:
    // v(r) = a + (k a - lambda e^a) r^2 / 4 + O(r^4).
    const double c = 0.25 * (params.k * a - lambda * std::exp(std::min(a, kOverflowV)));
    out.v.f[0] = a;
    double v = a + c * h * h;
    double p = 2.0 * c * h;
    out.v.f[1] = v;

    const Rhs rhs{params.k, lambda};
    bool was_positive = v > 0.0;
    for (int j = 1; j < M; ++j) {
        const double r = out.v.r[static_cast<std::size_t>(j)];
        double k1v, k1p, k2v, k2p, k3v, k3p, k4v, k4p;
        rhs(r, v, p, k1v, k1p);
        rhs(r + 0.5 * h, v + 0.5 * h * k1v, p + 0.5 * h * k1p, k2v, k2p);
        rhs(r + 0.5 * h, v + 0.5 * h * k2v, p + 0.5 * h * k2p, k3v, k3p);
        rhs(r + h, v + h * k3v, p + h * k3p, k4v, k4p);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        out.v.f[static_cast<std::size_t>(j) + 1] = v;
        if (was_positive && v <= 0.0) {
            out.crossed_zero = true;
            was_positive = false;
        }
        if (!std::isfinite(v) || !std::isfinite(p) || v > kOverflowV) {
            out.diverged = true;
            out.v_end = v;
            out.vp_end = p;
            return out;
        }
    }
    out.v_end = v;
    out.vp_end = p;
    return out;
}

namespace {

// Bracketing sign of a shot: a diverged shot counts as the negative side
// when v crossed zero before the abort, positive otherwise.
int shot_sign(const ShootResult& s) {
    if (s.diverged) return s.crossed_zero ? -1 : +1;
    return s.v_end >= 0.0 ? +1 : -1;
}

BranchPoint make_point(double a, double lambda, ShootResult&& shot, const Params& params) {
    BranchPoint pt;
    pt.a = a;
    pt.lambda = lambda;
    pt.profile = std::move(shot.v);
    pt.vp_end = shot.vp_end;
    pt.residual = std::abs(shot.v_end);
    pt.vmax = *std::max_element(pt.profile.f.begin(), pt.profile.f.end());
    pt.m = steady_mass(pt, params);
    return pt;
}

} // namespace

BranchPoint solve_lambda(double a, const Params& params, int M) {
    params.validate();
    if (!(a > 0.0)) throw std::invalid_argument("solve_lambda: a must be > 0");

    const double tol = 1e-10 * (1.0 + a);

    // For lambda = 0 the shot stays at or above a > 0, so it is a positive
    // bracket end without being evaluated.
    double lo = 0.0;
    double hi = 2.0 * std::exp(-1.0) *
                std::max(params.k, 1.0 / (params.R * params.R));
    ShootResult hi_shot = shoot(a, hi, params, M);
    int doublings = 0;
    while (shot_sign(hi_shot) > 0) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > 200)
            throw std::runtime_error("solve_lambda: no bracket (v(R) never changes sign)");
        hi_shot = shoot(a, hi, params, M);
    }

    double mid = 0.5 * (lo + hi);
    ShootResult mid_shot = shoot(a, mid, params, M);
    for (int it = 0; it < 200; ++it) {
        if (!mid_shot.diverged && std::abs(mid_shot.v_end) < tol) break;
        if (shot_sign(mid_shot) > 0)
            lo = mid;
        else
            hi = mid;
        const double next = 0.5 * (lo + hi);
        if (next == mid || next == lo || next == hi) break;  // bisected to ulp
        mid = next;
        mid_shot = shoot(a, mid, params, M);
    }
    if (mid_shot.diverged)
        throw std::runtime_error("solve_lambda: bisection ended on a diverged shot");
    return make_point(a, mid, std::move(mid_shot), params);
}

double steady_mass(const BranchPoint& point, const Params& params) {
    (void)params;
    const RadialProfile& v = point.profile;
    if (v.r.size() < 3) throw std::invalid_argument("steady_mass: profile too small");
    std::vector<double> integrand(v.r.size());
    for (std::size_t j = 0; j < v.r.size(); ++j)
        integrand[j] = v.r[j] * std::exp(std::min(v.f[j], kOverflowV));
    const double h = v.r[1] - v.r[0];
    return 2.0 * M_PI * point.lambda * simpson_uniform(integrand, h);
}

Branch branch_trace(const Params& params, const std::vector<double>& a_grid,
                    int M, int jobs) {
    params.validate();
    for (std::size_t i = 1; i < a_grid.size(); ++i)
        if (!(a_grid[i] > a_grid[i - 1]))
            throw std::invalid_argument("branch_trace: a_grid must be increasing");

    Branch branch;
    branch.params = params;
    std::vector<std::optional<BranchPoint>> slots(a_grid.size());
    parallel_for(a_grid.size(), jobs, [&](std::size_t i) {
        try {
            slots[i] = solve_lambda(a_grid[i], params, M);
        } catch (const std::exception&) {
            slots[i] = std::nullopt;
        }
    });
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i])
            branch.points.push_back(std::move(*slots[i]));
        else
            branch.failed_a.push_back(a_grid[i]);
    }
    return branch;
}

namespace {

// Golden-section maximization of f over [lo, hi].
template <typename F>
double golden_max(F&& f, double lo, double hi, int iters = 48) {
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters; ++i) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        }
    }
    return 0.5 * (lo + hi);
}

BranchExtremum refine_extremum(const Branch& branch, int M, bool use_mass) {
    if (branch.points.empty())
        throw std::invalid_argument("branch extremum: empty branch");
    std::size_t best = 0;
    auto value = [&](const BranchPoint& p) { return use_mass ? p.m : p.lambda; };
    for (std::size_t i = 1; i < branch.points.size(); ++i)
        if (value(branch.points[i]) > value(branch.points[best])) best = i;

    double lo = branch.points[best].a, hi = branch.points[best].a;
    if (best > 0) lo = branch.points[best - 1].a;
    if (best + 1 < branch.points.size()) hi = branch.points[best + 1].a;

    BranchExtremum ext;
    if (lo == hi) {
        const BranchPoint& p = branch.points[best];
        ext.value = value(p);
        ext.a = p.a;
        ext.lambda = p.lambda;
        ext.m = p.m;
        return ext;
    }
    const double a_star = golden_max(
        [&](double a) { return value(solve_lambda(a, branch.params, M)); }, lo, hi);
    BranchPoint p = solve_lambda(a_star, branch.params, M);
    ext.value = value(p);
    ext.a = p.a;
    ext.lambda = p.lambda;
    ext.m = p.m;
    return ext;
}

} // namespace

BranchExtremum m_max(const Branch& branch, int M) {
    return refine_extremum(branch, M, true);
}

BranchExtremum lambda_max(const Branch& branch, int M) {
    return refine_extremum(branch, M, false);
}

StateCount count_states(const Branch& branch, double m, double resolution) {
    StateCount out;
    const auto& pts = branch.points;
    if (pts.size() < 2) {
        out.resolution_ok = false;
        return out;
    }
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double d0 = pts[i - 1].m - m;
        const double d1 = pts[i].m - m;
        if ((d0 <= 0.0 && d1 > 0.0) || (d0 >= 0.0 && d1 < 0.0)) {
            ++out.count;
            if (resolution > 0.0 && std::abs(pts[i].m - pts[i - 1].m) > resolution)
                out.resolution_ok = false;
        }
    }
    return out;
}

MassBoundCheck check_mass_bound(const BranchPoint& point, const Params& params,
                                double tol) {
    if (params.n != 2)
        throw std::invalid_argument("check_mass_bound: disk bound is for n = 2");
    MassBoundCheck out;
    out.bound = 8.0 * M_PI + 2.0 * params.k * M_PI * params.R * params.R;
    out.slack = out.bound - point.m;
    out.holds = point.m <= out.bound + tol;
    return out;
}

double unit_sphere_measure(int n) {
    return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

CriticalMassTable critical_mass_table(int n, double R, double k) {
    if (n < 2) throw std::invalid_argument("critical_mass_table: n must be >= 2");
    CriticalMassTable t;
    if (n == 2) {
        t.M_star = 8.0 * M_PI;
        t.M_star_upper = 8.0 * M_PI + 2.0 * k * M_PI * R * R;
    } else {
        const double wn = unit_sphere_measure(n);
        t.M_star = 0.0;
        t.M_star_upper = 2.0 * wn * std::pow(R, n) / n +
                         2.0 * n * k * wn * std::pow(R, n - 2);
    }
    return t;
}

} // namespace kslab
