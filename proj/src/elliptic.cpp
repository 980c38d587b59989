#include "kslab/elliptic.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <stdexcept>

namespace kslab {

RadialProfile solve_helmholtz_radial(const RadialProfile& u, const Params& params) {
    params.validate();
    const std::vector<double>& r = u.r;
    const std::size_t n = r.size();
    if (n < 3 || u.f.size() != n)
        throw std::invalid_argument("solve_helmholtz_radial: malformed profile");
    if (std::abs(r.front()) > 1e-14 * r.back())
        throw std::invalid_argument("solve_helmholtz_radial: grid must start at r = 0");
    for (std::size_t j = 1; j < n; ++j)
        if (!(r[j] > r[j - 1]))
            throw std::invalid_argument("solve_helmholtz_radial: r-grid not increasing");

    const double k = params.k;
    // Unknowns v_0 .. v_{n-2}; v_{n-1} = 0 (Dirichlet). Conservative fluxes
    // r_{j+1/2} (v_{j+1}-v_j)/dr keep the discrete flux identity exact.
    const std::size_t m = n - 1;
    std::vector<double> lower(m, 0.0), diag(m, 0.0), upper(m, 0.0), rhs(m, 0.0);

    {   // r = 0: finite volume over [0, r_{1/2}], vol = r_{1/2}^2 / 2
        const double dr = r[1] - r[0];
        const double rh = 0.5 * (r[0] + r[1]);
        const double c = 2.0 / (rh * dr);
        diag[0] = c + k;
        upper[0] = -c;
        rhs[0] = u.f[0];
    }
    for (std::size_t j = 1; j < m; ++j) {
        const double dm = r[j] - r[j - 1];
        const double dp = r[j + 1] - r[j];
        const double rm = 0.5 * (r[j] + r[j - 1]);
        const double rp = 0.5 * (r[j] + r[j + 1]);
        const double vol = r[j] * 0.5 * (dm + dp);
        lower[j] = -rm / (dm * vol);
        upper[j] = -rp / (dp * vol);
        diag[j] = (rm / dm + rp / dp) / vol + k;
        rhs[j] = u.f[j];
        // v_{n-1} = 0, so the upper coupling of the last row drops out.
    }
    upper[m - 1] = 0.0;

    TridiagFactor f(lower, diag, upper);
    f.solve(rhs);

    RadialProfile v;
    v.r = r;
    v.f = std::move(rhs);
    v.f.push_back(0.0);
    return v;
}

RadialProfile solve_helmholtz_mass_grid(const std::vector<double>& u,
                                        const Params& params, const MassGrid& grid) {
    params.validate();
    const std::size_t n = grid.nodes();
    if (u.size() != n || n < 3)
        throw std::invalid_argument("solve_helmholtz_mass_grid: size mismatch");

    // 4 (s v_s)_s - k v = -u, flux 4 s v_s vanishing at s = 0, v(L) = 0.
    // Finite-volume rows scaled by the cell length; unknowns v_0 .. v_{n-2}.
    const double h = grid.h();
    const std::size_t m = n - 1;
    std::vector<double> lower(m, 0.0), diag(m, 0.0), upper(m, 0.0), rhs(m, 0.0);
    {
        const double c = 4.0 * (0.5 * h) / (h * h) / 0.5;  // half cell at the axis
        diag[0] = c + params.k;
        upper[0] = -c;
        rhs[0] = u[0];
    }
    for (std::size_t i = 1; i < m; ++i) {
        const double cm = 4.0 * (grid.s[i] - 0.5 * h) / (h * h);
        const double cp = 4.0 * (grid.s[i] + 0.5 * h) / (h * h);
        lower[i] = -cm;
        upper[i] = -cp;
        diag[i] = cm + cp + params.k;
        rhs[i] = u[i];
    }
    upper[m - 1] = 0.0;  // couples to v_{n-1} = 0

    TridiagFactor f(lower, diag, upper);
    f.solve(rhs);

    RadialProfile v;
    v.r = radial_nodes(grid);
    v.f = std::move(rhs);
    v.f.push_back(0.0);
    return v;
}

std::vector<double> solve_z_bvp(const std::vector<double>& w, const Params& params,
                                const MassGrid& grid) {
    ZSolver solver(params, grid);
    return solver.solve(w);
}

ZSolver::ZSolver(const Params& params, const MassGrid& grid)
    : k_(params.k), nodes_(grid.nodes()) {
    params.validate();
    if (nodes_ < 3) throw std::invalid_argument("ZSolver: grid too small");
    if (k_ == 0.0) return;  // z is identically zero

    // Unknowns z_1 .. z_N (z_0 = 0). Interior rows discretize
    // -4 s z_ss + k z = k w; the Neumann end z_s(L) = 0 uses a reflected
    // ghost node. The matrix is a diagonally dominant M-matrix.
    const double h = grid.h();
    const std::size_t m = nodes_ - 1;
    std::vector<double> lower(m, 0.0), diag(m, 0.0), upper(m, 0.0);
    for (std::size_t row = 0; row + 1 < m; ++row) {
        const double s = grid.s[row + 1];
        const double c = 4.0 * s / (h * h);
        lower[row] = -c;
        diag[row] = 2.0 * c + k_;
        upper[row] = -c;
    }
    lower[0] = 0.0;  // couples to z_0 = 0
    {
        const double c = 4.0 * grid.L / (h * h);
        lower[m - 1] = -2.0 * c;
        diag[m - 1] = 2.0 * c + k_;
        upper[m - 1] = 0.0;
    }
    factor_ = TridiagFactor(lower, diag, upper);
}

std::vector<double> ZSolver::solve(const std::vector<double>& w) const {
    if (w.size() != nodes_) throw std::invalid_argument("ZSolver: state size mismatch");
    std::vector<double> z(nodes_, 0.0);
    if (k_ == 0.0) return z;
    std::vector<double> rhs(nodes_ - 1);
    for (std::size_t row = 0; row < rhs.size(); ++row) rhs[row] = k_ * w[row + 1];
    factor_.solve(rhs);
    std::copy(rhs.begin(), rhs.end(), z.begin() + 1);
    return z;
}

double ring_green_lower_bound(const Params& params, int M, int n_source_radii) {
    params.validate();
    if (!(params.k > 0.0))
        throw std::invalid_argument("ring_green_lower_bound: requires k > 0");
    if (M < 64) throw std::invalid_argument("ring_green_lower_bound: M too small");
    if (n_source_radii < 1)
        throw std::invalid_argument("ring_green_lower_bound: need at least one source radius");

    const double R = params.R;
    const double h = R / M;
    std::vector<double> r(static_cast<std::size_t>(M) + 1);
    for (int j = 0; j <= M; ++j) r[static_cast<std::size_t>(j)] = R * j / M;

    double c2 = std::numeric_limits<double>::infinity();
    for (int l = 1; l <= n_source_radii; ++l) {
        const double rho = 0.5 * R * l / n_source_radii;
        // ring source of width 3 cells around rho, mass-normalized
        RadialProfile q;
        q.r = r;
        q.f.assign(r.size(), 0.0);
        for (std::size_t j = 0; j < r.size(); ++j)
            if (std::abs(r[j] - rho) <= 1.5 * h) q.f[j] = 1.0;
        double mass = 0.0;
        for (std::size_t j = 1; j < r.size(); ++j)
            mass += M_PI * (r[j] - r[j - 1]) * (r[j] * q.f[j] + r[j - 1] * q.f[j - 1]);
        if (!(mass > 0.0))
            throw std::runtime_error("ring_green_lower_bound: empty ring source");
        for (double& v : q.f) v /= mass;

        RadialProfile v = solve_helmholtz_radial(q, params);
        for (std::size_t j = 0; j < r.size() && r[j] <= 0.5 * R + 1e-14 * R; ++j)
            c2 = std::min(c2, v.f[j]);
    }
    if (!(c2 > 0.0))
        throw std::runtime_error("ring_green_lower_bound: nonpositive bound (solver bug)");
    return c2;
}

} // namespace kslab
