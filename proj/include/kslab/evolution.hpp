#ifndef KSLAB_EVOLUTION_HPP
#define KSLAB_EVOLUTION_HPP

#include <string>
#include <vector>

#include "kslab/core.hpp"
#include "kslab/elliptic.hpp"

namespace kslab {

/// Time-stepping controls for evolve().
struct StepControls {
    double dt_init = 1e-6;
    double dt_min = 1e-12;
    double dt_max = 1e-2;
    double cfl = 0.45;       // advective safety factor in (0,1)
    double T_end = 50.0;
    double u_blowup = 0.0;   // sup-norm threshold; <= 0 selects the default
    double tol_newton = 1e-9; // residual tolerance of the implicit solve

    void validate() const;
};

/// Default blow-up threshold for a run of mass m on an N-interval grid.
/// On a fixed grid the steepest representable slope is N times the mean
/// density, so the threshold is capped at a quarter of that ceiling.
double default_blowup_threshold(double m, double R, int N);

enum class Outcome { Global, Blowup, Undecided };

std::string to_string(Outcome o);

/// One diagnostics sample along a trajectory.
struct DiagnosticsRow {
    double t = 0.0;
    double sup_u = 0.0;
    double F = 0.0;       // energy
    double D = 0.0;       // dissipation
    double y2max = 0.0;   // Bernstein monitor, alpha = 2
    double dt = 0.0;
};

/// Outcome of one evolution run with its diagnostics time series and the
/// worst invariant violations observed over all accepted steps.
struct ClassificationResult {
    Outcome outcome = Outcome::Undecided;
    double t_star = 0.0;           // blow-up time estimate (last accepted t)
    double sup_u = 0.0;            // max of ||u||_inf over the run
    double t_final = 0.0;
    std::size_t steps = 0;
    std::vector<DiagnosticsRow> diagnostics;

    // invariant audit (worst case over accepted steps)
    bool mass_bit_stable = true;          // w_N unchanged bit-for-bit
    double worst_monotonicity = 0.0;      // min_i (w_{i+1}-w_i), >= -1e-12 m
    double worst_z_low = 0.0;             // min_i z_i
    double worst_z_high_excess = 0.0;     // max_i z_i - m/(2 pi)
    double worst_z_monotonicity = 0.0;    // min_i (z_{i+1}-z_i)
    std::string error;
};

struct Trajectory {
    std::vector<WState> snapshots;
    ClassificationResult result;
};

/// One semi-implicit step of w_t = 4 s w_ss + (2w - 2z) w_s: the
/// degenerate diffusion is implicit (tridiagonal), the advection explicit
/// with first-order upwinding by the sign of 2w - 2z, then z is recomputed
/// from the BVP and the Dirichlet ends are reimposed exactly.
/// Throws on monotonicity loss (min_i (w_{i+1}-w_i) < -1e-12 m), which
/// signals a CFL violation; the caller halves dt.
WState step(const WState& state, double dt, const Params& params, const MassGrid& grid);

/// Integrates from w0 until T_end or a blow-up declaration. Blowup is
/// declared when sup u = 2 max w_s exceeds controls.u_blowup or when dt
/// collapses to dt_min with monotonicity loss twice consecutively.
Trajectory evolve(const std::vector<double>& w0, const Params& params,
                  const MassGrid& grid, const StepControls& controls,
                  int max_snapshots = 33, int diag_samples = 200);

/// Free energy
///   F = 1/2 int |grad v|^2 + k/2 int v^2 - int u v + int u ln u
/// over the disk (measure 2 pi r dr), with u ln u extended by 0 at u = 0.
double energy(const RadialProfile& u, const RadialProfile& v, const Params& params);

/// Dissipation D = int |2 grad sqrt(u) - sqrt(u) grad v|^2 >= 0.
double dissipation(const RadialProfile& u, const RadialProfile& v, const Params& params);

/// Maximum over the grid (s = 0 excluded) of y_alpha = s^alpha w_s^2 / w.
/// Reports +inf if w vanishes where w_s does not.
double bernstein_monitor(const WState& state, const MassGrid& grid, double alpha);

/// sup-norm of u recovered from forward differences of w.
double sup_u_of(const WState& state, const MassGrid& grid);

} // namespace kslab

#endif
