#ifndef KSLAB_ELLIPTIC_HPP
#define KSLAB_ELLIPTIC_HPP

#include "kslab/core.hpp"
#include "kslab/tridiag.hpp"

namespace kslab {

/// Solves the radial Helmholtz problem
///   v'' + v'/r - k v + u = 0,  v'(0) = 0,  v(R) = 0,
/// on the r-grid carried by u (nonuniform grids are allowed, r_0 = 0).
/// The Laplacian is discretized in conservative form (r v')' so the flux
/// identity  integral u = k integral v - boundary flux  carries over to
/// the discrete system. The matrix is an M-matrix, hence v >= 0 for u >= 0.
RadialProfile solve_helmholtz_radial(const RadialProfile& u, const Params& params);

/// Same Helmholtz problem posed in the mass variable, where the radial
/// Laplacian is 4 (s v_s)_s: second order uniformly on the s-grid, which
/// the sqrt(s)-graded r-grid is not near the axis. u holds nodal values at
/// r_i = sqrt(s_i); the returned profile lives on those radii.
RadialProfile solve_helmholtz_mass_grid(const std::vector<double>& u,
                                        const Params& params, const MassGrid& grid);

/// Solves the cumulated two-point boundary value problem
///   4 s z_ss = k (z - w),  z(0) = 0,  z_s(R^2) = 0.
/// For k = 0 returns exact zeros (z carries a factor k by definition).
std::vector<double> solve_z_bvp(const std::vector<double>& w, const Params& params,
                                const MassGrid& grid);

/// Prefactorized version of solve_z_bvp for repeated solves on a fixed
/// grid; the matrix depends only on (grid, k).
class ZSolver {
public:
    ZSolver(const Params& params, const MassGrid& grid);
    std::vector<double> solve(const std::vector<double>& w) const;

private:
    double k_ = 0.0;
    std::size_t nodes_ = 0;
    TridiagFactor factor_;
};

/// Numerical surrogate for the Green-function lower bound of -Laplace + k
/// with Dirichlet conditions on the disk: sweeps mass-normalized narrow
/// ring sources (width 3 cells) over radii rho in (0, R/2] and returns the
/// minimum of the response over r in [0, R/2]. Positivity of the kernel
/// makes the returned constant strictly positive; a nonpositive result
/// signals a solver bug and throws.
double ring_green_lower_bound(const Params& params, int M,
                              int n_source_radii = 24);

} // namespace kslab

#endif
