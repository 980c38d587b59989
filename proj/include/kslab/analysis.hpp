#ifndef KSLAB_ANALYSIS_HPP
#define KSLAB_ANALYSIS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kslab/core.hpp"
#include "kslab/evolution.hpp"

namespace kslab {

/// Stationary supersolution of the cumulated equation at a mass level
/// mbar = 2 pi (4 + epsilon) > 8 pi. It is assembled from the inner piece
/// w_in(s) = 4s/(s+b) on [0, s0] and the outer piece solving
///   4 s w'' + 2 (4+eps) w' - 2 c2 s w' = 0
/// with C^1 matching at s0. The constants are selected deterministically:
/// s0 is the largest dyadic fraction of R^2 admissible for the log
/// inequality, b is half the slack it produces, epsilon is half the
/// largest admissible value in (0,1), and c2 closes the matching equation
/// exactly by bisection.
struct Supersolution {
    double s0 = 0.0;
    double b = 0.0;
    double epsilon = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double mbar = 0.0;          // 2 pi (4 + epsilon)
    double b_hat = 0.0;         // b / s0 (scale-free form used internally)
    double residual_matching = 0.0;  // closing equation residual at c2
    std::vector<double> wbar;   // values on the grid
};

struct ConstructionError : std::runtime_error {
    explicit ConstructionError(const std::string& what) : std::runtime_error(what) {}
};

/// Requires 0 < c1 <= 4/R^2. Throws ConstructionError when a selection
/// step has an empty feasible set in double precision (extreme c1 R^2).
Supersolution construct_supersolution(const Params& params, double c1,
                                      const MassGrid& grid);

/// Evaluates 4 s wbar_ss + 2 wbar wbar_s - 2 (c2 s) wbar_s on the grid by
/// piecewise finite differences (never straddling the junction s0) and
/// returns the maximum positive residual; analytically the expression is
/// <= 0 on both pieces.
double verify_supersolution_inequality(const Supersolution& sup, double c2,
                                       const MassGrid& grid);

struct PowerlawSubsolution {
    std::vector<double> values;  // delta s^beta on the grid
    bool valid = false;          // beta >= 1 + m/(4 pi)
};

PowerlawSubsolution powerlaw_subsolution(double delta, double beta, double m,
                                         const MassGrid& grid);

struct OrderCheck {
    bool ordered = true;
    double first_violation_s = 0.0;
    double first_violation_t = 0.0;
    double worst_gap = 0.0;  // most negative of (upper - lower)
};

/// Pointwise ordering lower <= w <= upper (either bound optional, both
/// stationary) at every snapshot, with tolerance 1e-9 m / (2 pi).
OrderCheck compare_order(const std::vector<WState>& snapshots,
                         const std::vector<double>* lower,
                         const std::vector<double>* upper,
                         double m, const MassGrid& grid);

struct ZLinearBounds {
    double C_low = 0.0;        // inf over snapshots and s of z/s
    double C_high = 0.0;       // sup over snapshots and s of z/s
    double sup_w_over_s = 0.0; // boundedness check on w/s
    bool hypothesis_ok = true; // w0(s) >= m s / (2 pi R^2)
};

ZLinearBounds check_z_linear_bounds(const std::vector<WState>& snapshots,
                                    const Params& params, const MassGrid& grid);

/// Initial-profile families for the mass sweep. All are mass-normalized;
/// sigma is in units of R for the Gaussian and annulus bumps.
///   uniform            u0 = m / (pi R^2)
///   gaussian<sigma>    u0 ~ exp(-(r/(sigma R))^2)
///   annulus            u0 ~ exp(-((r - R/2)/(0.1 R))^2)
RadialProfile make_profile(const std::string& family, double m,
                           const Params& params, const MassGrid& grid);

/// True when the family guarantees radially nonincreasing averages, i.e.
/// w0(s) >= m s / (2 pi R^2), so the z-lower-bound assertions apply.
bool family_concentrated_at_origin(const std::string& family);

struct SweepRow {
    std::string family;
    double m = 0.0;
    Outcome outcome = Outcome::Undecided;
    double t_star = 0.0;
    double sup_u = 0.0;
    double F_final = 0.0;
};

struct SweepBracket {
    std::string family;
    double largest_all_global = 0.0;
    double smallest_all_blowup = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<SweepBracket> brackets;
};

/// Classifies every (family, mass) pair, then optionally refines the
/// per-family bracket by bisection in m. Rows are computed on a bounded
/// worker pool and merged deterministically; per-run errors become
/// Undecided without aborting the sweep.
SweepResult classify_mass_sweep(const Params& params,
                                const std::vector<std::string>& families,
                                const std::vector<double>& m_list,
                                const MassGrid& grid,
                                const StepControls& controls,
                                int refine_rounds = 0, int jobs = 0);

/// Default c1 for construct_supersolution: (k/8) c1_hat c2_hat, where
/// c2_hat is the ring-source Green bound and c1_hat the minimum of the
/// mass in B_{R/2} along a calibration run with uniform data of mass 8 pi,
/// clamped to 4/R^2.
double default_c1(const Params& params, int green_M = 4096,
                  int calib_N = 1024, double calib_T = 10.0);

} // namespace kslab

#endif
