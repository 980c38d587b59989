#ifndef KSLAB_CORE_HPP
#define KSLAB_CORE_HPP

#include <cstddef>
#include <vector>

/// Radially symmetric Keller-Segel system on a disk B_R(0),
///
///   u_t = Laplace(u) - div(u grad v),   0 = Laplace(v) - k v + u,
///
/// with zero total flux for u and v = 0 on the boundary. All solvers work
/// in the cumulated-mass variable s = r^2,
///
///   w(s,t) = integral_0^sqrt(s) rho u(rho,t) drho,
///   z(s,t) = k integral_0^sqrt(s) rho v(rho,t) drho,
///
/// which turns the system into the scalar degenerate parabolic equation
///   w_t = 4 s w_ss + 2 w w_s - 2 z w_s   on (0, R^2),
/// with w(0,t) = 0 and w(R^2,t) = m / (2 pi) pinned by mass conservation.
namespace kslab {

/// Model parameters. R is the disk radius, k >= 0 the traction/degradation
/// coefficient, n the space dimension (2 for all simulations; general n is
/// only used in closed-form threshold evaluation).
struct Params {
    double R = 1.0;
    double k = 0.0;
    int n = 2;

    void validate() const;
};

/// Uniform grid in s = r^2 over [0, L], L = R^2. N is the interval count,
/// so there are N+1 nodes with s_0 = 0 and s_N = L.
struct MassGrid {
    double L = 0.0;
    int N = 0;
    std::vector<double> s;

    double h() const { return L / N; }
    std::size_t nodes() const { return s.size(); }
};

/// Solution pair (w, z) at one time instant on a MassGrid. w_0 = 0 and
/// w_N = m/(2 pi) hold exactly; w and z are nondecreasing in s and
/// 0 <= z <= m/(2 pi).
struct WState {
    double t = 0.0;
    std::vector<double> w;
    std::vector<double> z;
    double m = 0.0;
};

/// A function of r sampled on [0, R]; used for u (density, >= 0) and for
/// v (stress, >= 0). The r-grid may be nonuniform.
struct RadialProfile {
    std::vector<double> r;
    std::vector<double> f;
};

MassGrid build_mass_grid(double R, int N);

/// Cumulated initial mass w_0(s) = integral_0^sqrt(s) rho u0(rho) drho,
/// computed by the trapezoid rule in s (exact for u0 linear in s). The
/// profile must be sampled at r_i = sqrt(s_i); other r-grids are first
/// interpolated linearly onto those nodes.
std::vector<double> profile_to_w0(const RadialProfile& u0, const MassGrid& grid);

/// Recovers u(sqrt(s)) = 2 w_s(s) by centered differences (one-sided
/// second order at the ends). Finite-difference noise in [-tol, 0) is
/// clamped to zero; values below -tol abort.
RadialProfile w_to_u(const WState& state, const MassGrid& grid);

/// Total mass 2 pi w(R^2); constant along any trajectory by construction.
double total_mass(const WState& state);

/// r-nodes sqrt(s_i) associated with a mass grid.
std::vector<double> radial_nodes(const MassGrid& grid);

} // namespace kslab

#endif
