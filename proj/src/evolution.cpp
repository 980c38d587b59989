#include "kslab/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

#include "kslab/quadrature.hpp"
#include "kslab/tridiag.hpp"

namespace kslab {

void StepControls::validate() const {
    if (!(dt_min > 0.0 && dt_min <= dt_init && dt_init <= dt_max))
        throw std::invalid_argument("StepControls: need 0 < dt_min <= dt_init <= dt_max");
    if (!(cfl > 0.0 && cfl < 1.0))
        throw std::invalid_argument("StepControls: cfl must lie in (0,1)");
    if (!(T_end > 0.0))
        throw std::invalid_argument("StepControls: T_end must be > 0");
}

double default_blowup_threshold(double m, double R, int N) {
    // The steepest slope a fixed N-interval grid can represent is N times
    // the mean density (all mass in the first cell), so cap the nominal
    // 1e8 factor at a quarter of that ceiling.
    const double mean = m / (M_PI * R * R);
    return std::min(1e8, 0.25 * N) * mean;
}

std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::Global: return "Global";
        case Outcome::Blowup: return "Blowup";
        default: return "Undecided";
    }
}

double sup_u_of(const WState& state, const MassGrid& grid) {
    const double h = grid.h();
    double best = 0.0;
    for (std::size_t i = 0; i + 1 < state.w.size(); ++i)
        best = std::max(best, 2.0 * (state.w[i + 1] - state.w[i]) / h);
    return best;
}

namespace {

struct MonotonicityLoss : std::runtime_error {
    MonotonicityLoss() : std::runtime_error("step: monotonicity loss (CFL violation)") {}
};

// Semi-implicit stepper with cached factorizations: the z-BVP matrix is
// fixed, the diffusion matrix only changes with dt.
class Stepper {
public:
    Stepper(const Params& params, const MassGrid& grid, double tol_newton)
        : grid_(grid), zsolver_(params, grid), h_(grid.h()), tol_newton_(tol_newton) {
        const std::size_t n = grid.nodes();
        rhs_.resize(n >= 2 ? n - 2 : 0);
        lower_.resize(rhs_.size());
        diag_.resize(rhs_.size());
        upper_.resize(rhs_.size());
    }

    // Returns false on monotonicity loss; state is untouched in that case.
    bool try_step(WState& state, double dt) {
        const std::size_t n = state.w.size();
        const std::vector<double>& w = state.w;
        const std::vector<double>& z = state.z;
        const double W = w[n - 1];
        const double tol_mono = 1e-12 * state.m;

        if (dt != dt_cached_) {
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double lam = 4.0 * grid_.s[i] * dt / (h_ * h_);
                lower_[i - 1] = -lam;
                diag_[i - 1] = 1.0 + 2.0 * lam;
                upper_[i - 1] = -lam;
            }
            lower_[0] = 0.0;
            upper_[n - 3] = 0.0;
            factor_ = TridiagFactor(lower_, diag_, upper_);
            dt_cached_ = dt;
        }

        // explicit upwinded advection (2w - 2z) w_s, second order with a
        // minmod-limited curvature correction (plain first-order upwinding
        // is diffusive enough to suppress marginal blow-ups on affordable
        // grids); limited to first order next to the boundary nodes
        auto minmod = [](double x, double y) {
            if (x > 0.0 && y > 0.0) return std::min(x, y);
            if (x < 0.0 && y < 0.0) return std::max(x, y);
            return 0.0;
        };
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double c = 2.0 * (w[i] - z[i]);
            double ws;
            if (c >= 0.0) {
                ws = (w[i + 1] - w[i]) / h_;
                if (i + 2 < n) {
                    const double curv_r = (w[i + 2] - 2.0 * w[i + 1] + w[i]) / (h_ * h_);
                    const double curv_c = (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (h_ * h_);
                    ws -= 0.5 * h_ * minmod(curv_r, curv_c);
                }
            } else {
                ws = (w[i] - w[i - 1]) / h_;
                if (i >= 2) {
                    const double curv_l = (w[i] - 2.0 * w[i - 1] + w[i - 2]) / (h_ * h_);
                    const double curv_c = (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (h_ * h_);
                    ws += 0.5 * h_ * minmod(curv_l, curv_c);
                }
            }
            rhs_[i - 1] = w[i] + dt * c * ws;
        }
        // Dirichlet coupling of the last interior row
        rhs_[n - 3] += (4.0 * grid_.s[n - 2] * dt / (h_ * h_)) * W;

        wnew_ = rhs_;
        factor_.solve(wnew_);

        // residual check of the linear solve
        if (tol_newton_ > 0.0) {
            double scale = 0.0, res = 0.0;
            for (std::size_t i = 0; i < wnew_.size(); ++i) {
                double ax = diag_[i] * wnew_[i];
                if (i > 0) ax += lower_[i] * wnew_[i - 1];
                if (i + 1 < wnew_.size()) ax += upper_[i] * wnew_[i + 1];
                res = std::max(res, std::abs(ax - rhs_[i]));
                scale = std::max(scale, std::abs(rhs_[i]));
            }
            if (res > tol_newton_ * std::max(scale, 1.0))
                throw std::runtime_error("step: implicit solve residual too large");
        }

        // monotonicity gate on the full profile including the pinned ends
        double prev = 0.0;
        double mind = 0.0;
        for (std::size_t i = 0; i < wnew_.size(); ++i) {
            mind = std::min(mind, wnew_[i] - prev);
            prev = wnew_[i];
        }
        mind = std::min(mind, W - prev);
        if (mind < -tol_mono) return false;

        for (std::size_t i = 1; i + 1 < n; ++i) state.w[i] = wnew_[i - 1];
        state.w[0] = 0.0;
        state.w[n - 1] = W;  // Dirichlet reimposed exactly
        state.z = zsolver_.solve(state.w);
        state.t += dt;
        return true;
    }

private:
    const MassGrid& grid_;
    ZSolver zsolver_;
    double h_;
    double tol_newton_;
    double dt_cached_ = -1.0;
    TridiagFactor factor_;
    std::vector<double> lower_, diag_, upper_, rhs_, wnew_;
};

DiagnosticsRow make_diag(const WState& state, const Params& params,
                         const MassGrid& grid, double dt) {
    DiagnosticsRow row;
    row.t = state.t;
    row.dt = dt;
    row.sup_u = sup_u_of(state, grid);
    row.y2max = bernstein_monitor(state, grid, 2.0);
    RadialProfile u = w_to_u(state, grid);
    RadialProfile v = solve_helmholtz_mass_grid(u.f, params, grid);
    row.F = energy(u, v, params);
    row.D = dissipation(u, v, params);
    return row;
}

void audit(const WState& state, ClassificationResult& res, double w_end_ref) {
    const std::vector<double>& w = state.w;
    const std::vector<double>& z = state.z;
    if (std::memcmp(&w.back(), &w_end_ref, sizeof(double)) != 0)
        res.mass_bit_stable = false;
    const double half_mass = state.m / (2.0 * M_PI);
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        res.worst_monotonicity = std::min(res.worst_monotonicity, w[i + 1] - w[i]);
        res.worst_z_monotonicity = std::min(res.worst_z_monotonicity, z[i + 1] - z[i]);
    }
    for (double zi : z) {
        res.worst_z_low = std::min(res.worst_z_low, zi);
        res.worst_z_high_excess = std::max(res.worst_z_high_excess, zi - half_mass);
    }
}

} // namespace

WState step(const WState& state, double dt, const Params& params, const MassGrid& grid) {
    params.validate();
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
    if (state.w.size() != grid.nodes() || state.z.size() != grid.nodes())
        throw std::invalid_argument("step: state/grid mismatch");
    Stepper stepper(params, grid, 1e-9);
    WState next = state;
    if (!stepper.try_step(next, dt)) throw MonotonicityLoss();
    return next;
}

Trajectory evolve(const std::vector<double>& w0, const Params& params,
                  const MassGrid& grid, const StepControls& controls,
                  int max_snapshots, int diag_samples) {
    params.validate();
    controls.validate();
    if (w0.size() != grid.nodes())
        throw std::invalid_argument("evolve: w0/grid size mismatch");
    const double m = 2.0 * M_PI * w0.back();
    if (std::abs(w0.front()) > 1e-12 * (m + 1.0))
        throw std::invalid_argument("evolve: w0(0) must vanish");
    for (std::size_t i = 0; i + 1 < w0.size(); ++i)
        if (w0[i + 1] - w0[i] < -1e-12 * (m + 1.0))
            throw std::invalid_argument("evolve: w0 not nondecreasing");

    Trajectory out;
    ClassificationResult& res = out.result;

    WState state;
    state.t = 0.0;
    state.w = w0;
    state.w.front() = 0.0;
    state.m = m;
    state.z = solve_z_bvp(state.w, params, grid);
    const double w_end_ref = state.w.back();
    const double u_blowup = controls.u_blowup > 0.0
                                ? controls.u_blowup
                                : default_blowup_threshold(m, std::sqrt(grid.L), grid.N);

    Stepper stepper(params, grid, controls.tol_newton);

    const double diag_dt = controls.T_end / std::max(1, diag_samples);
    const double snap_dt = controls.T_end / std::max(1, max_snapshots - 1);
    double next_diag = diag_dt, next_snap = snap_dt;
    double dt = std::clamp(controls.dt_init, controls.dt_min, controls.dt_max);

    res.diagnostics.push_back(make_diag(state, params, grid, dt));
    out.snapshots.push_back(state);
    double diag_sup_ref = std::max(res.diagnostics.back().sup_u, 1e-300);
    double snap_sup_ref = diag_sup_ref;
    res.sup_u = res.diagnostics.back().sup_u;

    int consecutive_min_failures = 0;
    const double t_eps = 1e-12 * controls.T_end;

    while (state.t < controls.T_end - t_eps) {
        double maxc = 0.0;
        for (std::size_t i = 0; i < state.w.size(); ++i)
            maxc = std::max(maxc, std::abs(2.0 * (state.w[i] - state.z[i])));
        const double dt_cfl = maxc > 0.0 ? controls.cfl * grid.h() / maxc
                                         : std::numeric_limits<double>::infinity();
        dt = std::min({dt * 1.5, dt_cfl, controls.dt_max, controls.T_end - state.t});
        dt = std::max(dt, std::min(controls.dt_min, controls.T_end - state.t));

        bool accepted = false;
        for (int tries = 0; tries < 2048 && !accepted; ++tries) {
            if (stepper.try_step(state, dt)) {
                accepted = true;
            } else if (dt <= controls.dt_min * (1.0 + 1e-9)) {
                if (++consecutive_min_failures >= 2) {
                    res.outcome = Outcome::Blowup;
                    res.t_star = state.t;
                    res.t_final = state.t;
                    res.diagnostics.push_back(make_diag(state, params, grid, dt));
                    out.snapshots.push_back(state);
                    return out;
                }
            } else {
                dt = std::max(0.5 * dt, controls.dt_min);
            }
        }
        if (!accepted)
            throw std::runtime_error("evolve: step rejected after exhausting dt halving");
        ++res.steps;
        audit(state, res, w_end_ref);

        const double sup_now = sup_u_of(state, grid);
        res.sup_u = std::max(res.sup_u, sup_now);

        const bool diag_due = state.t >= next_diag - t_eps || sup_now >= 2.0 * diag_sup_ref;
        if (diag_due) {
            res.diagnostics.push_back(make_diag(state, params, grid, dt));
            while (next_diag <= state.t + t_eps) next_diag += diag_dt;
            diag_sup_ref = std::max(sup_now, 1e-300);
        }
        const bool snap_due = state.t >= next_snap - t_eps || sup_now >= 2.0 * snap_sup_ref;
        if (snap_due && out.snapshots.size() <
                            static_cast<std::size_t>(max_snapshots) + 64) {
            out.snapshots.push_back(state);
            while (next_snap <= state.t + t_eps) next_snap += snap_dt;
            snap_sup_ref = std::max(sup_now, 1e-300);
        }

        if (sup_now > u_blowup) {
            res.outcome = Outcome::Blowup;
            res.t_star = state.t;
            res.t_final = state.t;
            if (!diag_due) res.diagnostics.push_back(make_diag(state, params, grid, dt));
            if (out.snapshots.empty() || out.snapshots.back().t != state.t)
                out.snapshots.push_back(state);
            return out;
        }
        consecutive_min_failures = 0;
    }

    res.outcome = Outcome::Global;
    res.t_final = state.t;
    res.t_star = 0.0;
    if (res.diagnostics.back().t != state.t)
        res.diagnostics.push_back(make_diag(state, params, grid, dt));
    if (out.snapshots.back().t != state.t) out.snapshots.push_back(state);
    return out;
}

namespace {

// First derivative on a (possibly nonuniform) grid, second order, with
// one-sided formulas at the ends.
std::vector<double> derivative(const std::vector<double>& x, const std::vector<double>& f) {
    const std::size_t n = x.size();
    std::vector<double> d(n, 0.0);
    if (n < 3) return d;
    for (std::size_t j = 1; j + 1 < n; ++j) {
        const double dm = x[j] - x[j - 1];
        const double dp = x[j + 1] - x[j];
        d[j] = (dm * dm * f[j + 1] - dp * dp * f[j - 1] + (dp * dp - dm * dm) * f[j]) /
               (dm * dp * (dm + dp));
    }
    {
        const double d1 = x[1] - x[0], d2 = x[2] - x[0];
        d[0] = -(d1 + d2) / (d1 * d2) * f[0] + d2 / (d1 * (d2 - d1)) * f[1] -
               d1 / (d2 * (d2 - d1)) * f[2];
    }
    {
        const double d1 = x[n - 1] - x[n - 2], d2 = x[n - 1] - x[n - 3];
        d[n - 1] = (d1 + d2) / (d1 * d2) * f[n - 1] - d2 / (d1 * (d2 - d1)) * f[n - 2] +
                   d1 / (d2 * (d2 - d1)) * f[n - 3];
    }
    return d;
}

} // namespace

double energy(const RadialProfile& u, const RadialProfile& v, const Params& params) {
    if (u.r.size() != v.r.size())
        throw std::invalid_argument("energy: profiles on different grids");
    const std::vector<double> vp = derivative(v.r, v.f);
    std::vector<double> integrand(u.r.size());
    for (std::size_t j = 0; j < u.r.size(); ++j) {
        const double uu = u.f[j];
        const double ulnu = uu > 0.0 ? uu * std::log(uu) : 0.0;
        integrand[j] = (0.5 * vp[j] * vp[j] + 0.5 * params.k * v.f[j] * v.f[j] -
                        uu * v.f[j] + ulnu) * u.r[j];
    }
    return 2.0 * M_PI * trapezoid(u.r, integrand);
}

double dissipation(const RadialProfile& u, const RadialProfile& v, const Params& params) {
    (void)params;
    if (u.r.size() != v.r.size())
        throw std::invalid_argument("dissipation: profiles on different grids");
    std::vector<double> g(u.f.size());
    for (std::size_t j = 0; j < g.size(); ++j)
        g[j] = std::sqrt(std::max(u.f[j], 0.0));
    const std::vector<double> gp = derivative(u.r, g);
    const std::vector<double> vp = derivative(v.r, v.f);
    std::vector<double> integrand(u.r.size());
    for (std::size_t j = 0; j < u.r.size(); ++j) {
        const double q = 2.0 * gp[j] - g[j] * vp[j];
        integrand[j] = q * q * u.r[j];
    }
    return 2.0 * M_PI * trapezoid(u.r, integrand);
}

double bernstein_monitor(const WState& state, const MassGrid& grid, double alpha) {
    if (!(alpha > 1.0)) throw std::invalid_argument("bernstein_monitor: alpha must be > 1");
    const std::vector<double>& w = state.w;
    const std::size_t n = w.size();
    const double h = grid.h();
    double best = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        double ws;
        if (i + 1 < n)
            ws = (w[i + 1] - w[i - 1]) / (2.0 * h);
        else
            ws = (3.0 * w[i] - 4.0 * w[i - 1] + w[i - 2]) / (2.0 * h);
        if (w[i] < 1e-14) {
            if (ws > 1e-14) return std::numeric_limits<double>::infinity();
            continue;
        }
        best = std::max(best, std::pow(grid.s[i], alpha) * ws * ws / w[i]);
    }
    return best;
}

} // namespace kslab
