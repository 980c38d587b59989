#ifndef KSLAB_STEADY_HPP
#define KSLAB_STEADY_HPP

#include <optional>
#include <vector>

#include "kslab/core.hpp"

namespace kslab {

/// One steady state of the stationary problem -Laplace(v) + k v = Lambda e^v,
/// v = 0 on the boundary, parametrized by the central value a = v(0).
/// The cell density is u = Lambda e^v and m = 2 pi Lambda int r e^v dr.
struct BranchPoint {
    double a = 0.0;
    double lambda = 0.0;
    double m = 0.0;
    double vmax = 0.0;
    RadialProfile profile;     // v(r)
    double vp_end = 0.0;       // v'(R), used in the flux identity
    double residual = 0.0;     // |v(R)| after the Lambda root-find
};

struct Branch {
    Params params;
    std::vector<BranchPoint> points;
    std::vector<double> failed_a;  // a-values where the root-find failed
};

/// Result of one shot of the radial ODE
///   v'' + v'/r - k v = -Lambda e^v,  v(0) = a, v'(0) = 0,
/// integrated by classical RK4 with a two-term Taylor start on the first
/// cell (removes the v'/r singularity). Integration aborts once v exceeds
/// 700 (exp overflow); that is reported as diverged and usable as a
/// bracketing signal.
struct ShootResult {
    RadialProfile v;
    double v_end = 0.0;
    double vp_end = 0.0;
    bool diverged = false;
    bool crossed_zero = false;  // v changed sign before the abort/end
};

ShootResult shoot(double a, double lambda, const Params& params, int M);

/// Root-find in Lambda so that v(R) = 0 (|v(R)| < 1e-10 (1+a)), by
/// doubling the upper bracket until the shot ends negative or diverges
/// after crossing zero, then bisecting.
BranchPoint solve_lambda(double a, const Params& params, int M = 8192);

/// m = 2 pi Lambda int_0^R r e^v dr by composite Simpson on the profile.
double steady_mass(const BranchPoint& point, const Params& params);

Branch branch_trace(const Params& params, const std::vector<double>& a_grid,
                    int M = 8192, int jobs = 0);

struct BranchExtremum {
    double value = 0.0;  // m_max or Lambda_max
    double a = 0.0;
    double lambda = 0.0;
    double m = 0.0;
};

/// Maximum of m over the branch, refined by golden-section in a around the
/// discrete maximizer.
BranchExtremum m_max(const Branch& branch, int M = 8192);

/// Maximum of Lambda over the branch (same refinement); for large R this
/// approaches k/e.
BranchExtremum lambda_max(const Branch& branch, int M = 8192);

struct StateCount {
    int count = 0;
    bool resolution_ok = true;
};

/// Number of sign changes of m(a) - m along the branch; resolution_ok is
/// false where adjacent branch points are further apart in m than the
/// requested resolution near a crossing.
StateCount count_states(const Branch& branch, double m, double resolution = 0.0);

struct MassBoundCheck {
    bool holds = true;
    double slack = 0.0;   // bound - m
    double bound = 0.0;
};

/// Disk mass bound m <= 8 pi + 2 k pi R^2 (+ tolerance) for n = 2.
MassBoundCheck check_mass_bound(const BranchPoint& point, const Params& params,
                                double tol = 1e-3);

struct CriticalMassTable {
    double M_star = 0.0;        // below: all solutions global
    double M_star_upper = 0.0;  // upper bound for the unconditional blow-up threshold
};

/// Closed-form thresholds on the ball B_R(0):
///   M_star = 8 pi (n = 2) or 0 (n >= 3);
///   upper bound 8 pi + 2 k pi R^2 (n = 2) or
///   2 w_n R^n / n + 2 n k w_n R^{n-2} (n >= 3), w_n = |unit sphere|.
CriticalMassTable critical_mass_table(int n, double R, double k);

/// Unit-sphere measure w_n = 2 pi^{n/2} / Gamma(n/2).
double unit_sphere_measure(int n);

} // namespace kslab

#endif
