#include "kslab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kslab/elliptic.hpp"
#include "kslab/parallel.hpp"
#include "kslab/quadrature.hpp"

namespace kslab {

namespace {

// --- scale-free pieces of the supersolution constants -----------------
//
// With sigma = s0 e^tau the defining integrals become
//   s0^{(4+eps)/2} int_{s0}^{S} sigma^{-(4+eps)/2} e^{(c/2)(sigma-s0)} dsigma
//     = s0 * Jhat(p, c; tau_max),   p = 1 + eps/2,  tau_max = ln(S/s0),
// where Jhat = int_0^{tau_max} e^{-p tau} e^{(c/2) s0 (e^tau - 1)} dtau.
// All selection inequalities are differences of order s0 (or far smaller),
// so they are evaluated in the scale-free form Jhat - 1 with the identity
//   Jhat - 1 = Ehat - (eps/2 + e^{-p tau_max}) / p,
//   Ehat    = int_0^{tau_max} e^{-p tau} expm1((c/2) s0 expm1(tau)) dtau,
// whose terms are individually tiny and positive, avoiding cancellation
// even when s0 is hundreds of orders of magnitude below R^2.

double integrate_Ehat(double p, double chalf_s0, double tau_lo, double tau_hi) {
    if (tau_hi <= tau_lo) return 0.0;
    auto f = [p, chalf_s0](double tau) {
        return std::exp(-p * tau) * std::expm1(chalf_s0 * std::expm1(tau));
    };
    double total = 0.0;
    double t0 = tau_lo;
    while (t0 < tau_hi) {
        const double t1 = std::min(t0 + 1.0, tau_hi);
        const double rough = adaptive_simpson(f, t0, t1, 1e-300, 12);
        total += adaptive_simpson(f, t0, t1, std::max(1e-300, 1e-11 * std::abs(rough)), 48);
        t0 = t1;
    }
    return total;
}

struct ScaledConstruction {
    double s0 = 0.0, b_hat = 0.0, eps = 0.0, c2 = 0.0, T = 0.0;
    double residual_scaled = 0.0;
};

double jhat_minus_one(double eps, double c, double s0, double T) {
    const double p = 1.0 + 0.5 * eps;
    const double Ehat = integrate_Ehat(p, 0.5 * c * s0, 0.0, T);
    const double tail = (0.5 * eps + std::exp(-p * T)) / p;
    return Ehat - tail;
}

} // namespace

Supersolution construct_supersolution(const Params& params, double c1,
                                      const MassGrid& grid) {
    params.validate();
    if (!(params.k > 0.0))
        throw std::invalid_argument("construct_supersolution: requires k > 0");
    const double R2 = params.R * params.R;
    if (!(c1 > 0.0 && c1 <= 4.0 / R2))
        throw std::invalid_argument("construct_supersolution: need 0 < c1 <= 4/R^2");
    if (std::abs(grid.L - R2) > 1e-12 * R2)
        throw std::invalid_argument("construct_supersolution: grid does not match R");

    ScaledConstruction sc;

    // s0: largest dyadic fraction R^2 / 2^j with
    //   (c1/2) ln(R^2/s0) > c1/2 + 1/R^2  strictly.
    const double target = (0.5 * c1 + 1.0 / R2) / (0.5 * c1 * M_LN2);
    double jreal = std::floor(target) + 1.0;
    if (jreal < 1.0) jreal = 1.0;
    while (0.5 * c1 * jreal * M_LN2 <= 0.5 * c1 + 1.0 / R2) jreal += 1.0;
    if (jreal > 990.0)
        throw ConstructionError(
            "construct_supersolution: log inequality for s0 infeasible in double "
            "precision (c1 R^2 too small)");
    const int j = static_cast<int>(jreal);
    sc.s0 = std::ldexp(R2, -j);
    sc.T = j * M_LN2;

    // b: half the slack of the eps = 0 integral inequality.
    const double D6 = jhat_minus_one(0.0, c1, sc.s0, sc.T);
    if (!(D6 > 0.0))
        throw ConstructionError(
            "construct_supersolution: integral inequality slack vanished numerically");
    sc.b_hat = 0.5 * D6;
    if (!(sc.s0 * sc.b_hat > 0.0))
        throw ConstructionError("construct_supersolution: b underflowed to zero");

    // eps: half the largest value in (0,1) keeping the eps-inequality strict.
    auto G = [&](double eps) {
        const double quad = (eps / (4.0 * sc.b_hat)) * (1.0 + sc.b_hat) * (1.0 + sc.b_hat);
        return jhat_minus_one(eps, c1, sc.s0, sc.T) - sc.b_hat - quad;
    };
    double eps_max;
    if (G(1.0) > 0.0) {
        eps_max = 1.0;
    } else {
        double lo = 1.0;
        while (!(G(lo * 0.5) > 0.0)) {
            lo *= 0.5;
            if (lo < 1e-300)
                throw ConstructionError(
                    "construct_supersolution: eps selection infeasible numerically");
        }
        lo *= 0.5;            // G(lo) > 0
        double hi = 2.0 * lo; // G(hi) <= 0
        for (int it = 0; it < 64; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (mid == lo || mid == hi) break;
            if (G(mid) > 0.0)
                lo = mid;
            else
                hi = mid;
        }
        eps_max = lo;
    }
    sc.eps = 0.5 * eps_max;
    if (!(sc.eps > 0.0 && sc.eps < 1.0))
        throw ConstructionError("construct_supersolution: eps left (0,1)");

    // c2 in (0, c1]: closes the matching identity exactly by bisection.
    const double quad = (sc.eps / (4.0 * sc.b_hat)) * (1.0 + sc.b_hat) * (1.0 + sc.b_hat);
    auto H = [&](double c) {
        return jhat_minus_one(sc.eps, c, sc.s0, sc.T) - sc.b_hat - quad;
    };
    double clo = 0.0, chi = c1;
    if (!(H(chi) > 0.0))
        throw ConstructionError("construct_supersolution: matching bracket lost at c1");
    double cmid = 0.5 * (clo + chi);
    double hmid = H(cmid);
    for (int it = 0; it < 200; ++it) {
        if (hmid > 0.0)
            chi = cmid;
        else
            clo = cmid;
        const double next = 0.5 * (clo + chi);
        if (next == cmid || next == clo || next == chi) break;
        cmid = next;
        hmid = H(cmid);
    }
    sc.c2 = cmid;
    sc.residual_scaled = std::abs(hmid);

    Supersolution sup;
    sup.s0 = sc.s0;
    sup.b_hat = sc.b_hat;
    sup.b = sc.s0 * sc.b_hat;
    sup.epsilon = sc.eps;
    sup.c1 = c1;
    sup.c2 = sc.c2;
    sup.mbar = 2.0 * M_PI * (4.0 + sc.eps);
    sup.residual_matching = sc.s0 * sc.residual_scaled;

    // Assemble wbar on the grid: inner piece 4s/(s+b), outer piece
    //   wbar(s) = 4/(1+bh) + (4 bh/(1+bh)^2) Jhat_partial(ln(s/s0)).
    const double p = 1.0 + 0.5 * sc.eps;
    const double bh = sc.b_hat;
    const double coef = 4.0 * bh / ((1.0 + bh) * (1.0 + bh));
    sup.wbar.assign(grid.nodes(), 0.0);
    double Ehat_acc = 0.0;
    double tau_prev = 0.0;
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
        const double s = grid.s[i];
        if (s <= sup.s0) {
            sup.wbar[i] = s > 0.0 ? 4.0 * s / (s + sup.b) : 0.0;
            continue;
        }
        const double tau = std::log(s / sup.s0);
        Ehat_acc += integrate_Ehat(p, 0.5 * sc.c2 * sup.s0, tau_prev, tau);
        tau_prev = tau;
        const double Bpart = -std::expm1(-p * tau) / p;
        sup.wbar[i] = 4.0 / (1.0 + bh) + coef * (Bpart + Ehat_acc);
    }
    // The matching identity pins the right endpoint to 4 + eps; assembly
    // reproduces it to quadrature accuracy and the exact value is imposed.
    sup.wbar.back() = 4.0 + sup.epsilon;

    // invariants
    std::ostringstream bad;
    if (!(sup.s0 > 0.0 && sup.s0 < R2)) bad << "s0 out of range; ";
    if (!(sup.b > 0.0)) bad << "b <= 0; ";
    if (!(sup.c2 > 0.0 && sup.c2 <= sup.c1)) bad << "c2 out of (0, c1]; ";
    if (sup.wbar.front() != 0.0) bad << "wbar(0) != 0; ";
    const double chord = (4.0 + sup.epsilon) / R2;
    for (std::size_t i = 1; i + 1 < grid.nodes(); ++i)
        if (!(sup.wbar[i] > chord * grid.s[i])) {
            bad << "chord bound fails at node " << i << "; ";
            break;
        }
    const double cc_tol = 1e-11 * (4.0 + sup.epsilon);
    for (std::size_t i = 1; i + 1 < grid.nodes(); ++i) {
        const bool inner = grid.s[i + 1] <= sup.s0;
        const bool outer = grid.s[i - 1] >= sup.s0;
        if (!inner && !outer) continue;  // straddles the junction
        if (sup.wbar[i + 1] - 2.0 * sup.wbar[i] + sup.wbar[i - 1] > cc_tol) {
            bad << "concavity fails at node " << i << "; ";
            break;
        }
    }
    if (!bad.str().empty())
        throw ConstructionError("construct_supersolution: " + bad.str());
    return sup;
}

double verify_supersolution_inequality(const Supersolution& sup, double c2,
                                       const MassGrid& grid) {
    const std::vector<double>& w = sup.wbar;
    if (w.size() != grid.nodes())
        throw std::invalid_argument("verify_supersolution_inequality: grid mismatch");
    const double h = grid.h();
    const std::size_t n = w.size();

    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double s = grid.s[i];
        // difference stencils stay on one side of the junction s0
        const bool inner = grid.s[i + 1] <= sup.s0;
        const bool outer = grid.s[i - 1] >= sup.s0;
        if (!inner && !outer) continue;
        const double ws = (w[i + 1] - w[i - 1]) / (2.0 * h);
        const double wss = (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (h * h);
        const double residual = 4.0 * s * wss + 2.0 * w[i] * ws - 2.0 * (c2 * s) * ws;
        worst = std::max(worst, residual);
    }
    return worst;
}

PowerlawSubsolution powerlaw_subsolution(double delta, double beta, double m,
                                         const MassGrid& grid) {
    if (!(delta > 0.0)) throw std::invalid_argument("powerlaw_subsolution: delta must be > 0");
    PowerlawSubsolution out;
    out.valid = beta >= 1.0 + m / (4.0 * M_PI);
    out.values.resize(grid.nodes());
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = delta * std::pow(grid.s[i], beta);
    return out;
}

OrderCheck compare_order(const std::vector<WState>& snapshots,
                         const std::vector<double>* lower,
                         const std::vector<double>* upper,
                         double m, const MassGrid& grid) {
    OrderCheck out;
    const double tol = 1e-9 * m / (2.0 * M_PI);
    bool violated = false;
    for (const WState& st : snapshots) {
        for (std::size_t i = 0; i < st.w.size(); ++i) {
            double gap = std::numeric_limits<double>::infinity();
            if (lower) gap = std::min(gap, st.w[i] - (*lower)[i]);
            if (upper) gap = std::min(gap, (*upper)[i] - st.w[i]);
            if (!lower && !upper) gap = 0.0;
            if (gap < out.worst_gap) out.worst_gap = gap;
            if (gap < -tol && !violated) {
                violated = true;
                out.ordered = false;
                out.first_violation_s = grid.s[i];
                out.first_violation_t = st.t;
            }
        }
        if (violated) break;
    }
    return out;
}

ZLinearBounds check_z_linear_bounds(const std::vector<WState>& snapshots,
                                    const Params& params, const MassGrid& grid) {
    params.validate();
    if (!(params.k > 0.0))
        throw std::invalid_argument("check_z_linear_bounds: requires k > 0");
    if (snapshots.empty())
        throw std::invalid_argument("check_z_linear_bounds: empty trajectory");

    ZLinearBounds out;
    out.C_low = std::numeric_limits<double>::infinity();
    out.C_high = 0.0;
    out.sup_w_over_s = 0.0;

    const WState& first = snapshots.front();
    const double m = first.m;
    for (std::size_t i = 1; i < first.w.size(); ++i)
        if (first.w[i] < m * grid.s[i] / (2.0 * M_PI * grid.L) - 1e-9 * m) {
            out.hypothesis_ok = false;
            break;
        }

    for (const WState& st : snapshots) {
        for (std::size_t i = 1; i < st.w.size(); ++i) {
            const double s = grid.s[i];
            out.C_low = std::min(out.C_low, st.z[i] / s);
            out.C_high = std::max(out.C_high, st.z[i] / s);
            out.sup_w_over_s = std::max(out.sup_w_over_s, st.w[i] / s);
        }
    }
    return out;
}

RadialProfile make_profile(const std::string& family, double m,
                           const Params& params, const MassGrid& grid) {
    params.validate();
    if (!(m >= 0.0)) throw std::invalid_argument("make_profile: m must be >= 0");
    const double R = params.R;
    std::vector<double> r = radial_nodes(grid);

    std::function<double(double)> shape;
    if (family == "uniform") {
        shape = [](double) { return 1.0; };
    } else if (family.rfind("gaussian", 0) == 0) {
        double sigma_rel = 0.1;
        if (family.size() > 8) sigma_rel = std::stod(family.substr(8));
        if (!(sigma_rel > 0.0))
            throw std::invalid_argument("make_profile: bad gaussian width");
        const double sigma = sigma_rel * R;
        shape = [sigma](double rr) { return std::exp(-(rr / sigma) * (rr / sigma)); };
    } else if (family == "annulus") {
        const double sigma = 0.1 * R, r0 = 0.5 * R;
        shape = [sigma, r0](double rr) {
            return std::exp(-((rr - r0) / sigma) * ((rr - r0) / sigma));
        };
    } else {
        throw std::invalid_argument("make_profile: unknown family '" + family + "'");
    }

    RadialProfile u;
    u.r = std::move(r);
    u.f.resize(u.r.size());
    for (std::size_t i = 0; i < u.r.size(); ++i) u.f[i] = shape(u.r[i]);

    // normalize with the same quadrature the pipeline uses, so the pinned
    // boundary value w_N = m/(2 pi) matches the trapezoidal mass exactly
    WState tmp;
    tmp.w = profile_to_w0(u, grid);
    const double mass = 2.0 * M_PI * tmp.w.back();
    if (!(mass > 0.0)) throw std::invalid_argument("make_profile: degenerate shape");
    const double scale = m / mass;
    for (double& f : u.f) f *= scale;
    return u;
}

bool family_concentrated_at_origin(const std::string& family) {
    return family == "uniform" || family.rfind("gaussian", 0) == 0;
}

SweepResult classify_mass_sweep(const Params& params,
                                const std::vector<std::string>& families,
                                const std::vector<double>& m_list,
                                const MassGrid& grid,
                                const StepControls& controls,
                                int refine_rounds, int jobs) {
    params.validate();
    controls.validate();

    auto classify_one = [&](const std::string& family, double m) -> SweepRow {
        SweepRow row;
        row.family = family;
        row.m = m;
        try {
            RadialProfile u0 = make_profile(family, m, params, grid);
            std::vector<double> w0 = profile_to_w0(u0, grid);
            w0.back() = m / (2.0 * M_PI);
            Trajectory traj = evolve(w0, params, grid, controls);
            row.outcome = traj.result.outcome;
            row.t_star = traj.result.t_star;
            row.sup_u = traj.result.sup_u;
            row.F_final = traj.result.diagnostics.back().F;
        } catch (const std::exception&) {
            row.outcome = Outcome::Undecided;
        }
        return row;
    };

    SweepResult out;
    std::vector<SweepRow> rows(families.size() * m_list.size());
    parallel_for(rows.size(), jobs, [&](std::size_t idx) {
        const std::size_t fi = idx / m_list.size();
        const std::size_t mi = idx % m_list.size();
        rows[idx] = classify_one(families[fi], m_list[mi]);
    });
    out.rows = std::move(rows);

    // bracket = [largest mass below which everything tested is Global,
    //            smallest mass above which everything tested blows up]
    auto bracket_of = [&out](const std::string& family) {
        std::vector<const SweepRow*> frows;
        for (const SweepRow& r : out.rows)
            if (r.family == family) frows.push_back(&r);
        std::sort(frows.begin(), frows.end(),
                  [](const SweepRow* a, const SweepRow* b) { return a->m < b->m; });
        SweepBracket bracket;
        bracket.family = family;
        bracket.largest_all_global = 0.0;
        for (const SweepRow* r : frows) {
            if (r->outcome != Outcome::Global) break;
            bracket.largest_all_global = r->m;
        }
        bracket.smallest_all_blowup = std::numeric_limits<double>::infinity();
        for (auto it = frows.rbegin(); it != frows.rend(); ++it) {
            if ((*it)->outcome != Outcome::Blowup) break;
            bracket.smallest_all_blowup = (*it)->m;
        }
        return bracket;
    };

    for (const std::string& family : families) {
        for (int round = 0; round < refine_rounds; ++round) {
            SweepBracket b = bracket_of(family);
            if (!(b.largest_all_global > 0.0) || !std::isfinite(b.smallest_all_blowup) ||
                b.smallest_all_blowup <= b.largest_all_global)
                break;
            const double mid = 0.5 * (b.largest_all_global + b.smallest_all_blowup);
            out.rows.push_back(classify_one(family, mid));
        }
        out.brackets.push_back(bracket_of(family));
    }
    return out;
}

double default_c1(const Params& params, int green_M, int calib_N, double calib_T) {
    params.validate();
    if (!(params.k > 0.0))
        throw std::invalid_argument("default_c1: requires k > 0");

    const double c2_hat = ring_green_lower_bound(params, green_M);

    // calibration run: uniform data at mass 8 pi, tracking the mass inside
    // B_{R/2}, i.e. 2 pi w(R^2/4, t), over the sampled trajectory
    const double m = 8.0 * M_PI;
    MassGrid grid = build_mass_grid(params.R, calib_N);
    RadialProfile u0 = make_profile("uniform", m, params, grid);
    std::vector<double> w0 = profile_to_w0(u0, grid);
    w0.back() = m / (2.0 * M_PI);
    StepControls controls;
    controls.T_end = calib_T;
    Trajectory traj = evolve(w0, params, grid, controls, 129);

    const double s_half = 0.25 * grid.L;
    double c1_hat = std::numeric_limits<double>::infinity();
    for (const WState& st : traj.snapshots) {
        // linear interpolation of w at s = R^2/4
        const double x = s_half / grid.h();
        const std::size_t i = std::min(static_cast<std::size_t>(x), st.w.size() - 2);
        const double t = x - static_cast<double>(i);
        const double w_half = (1.0 - t) * st.w[i] + t * st.w[i + 1];
        c1_hat = std::min(c1_hat, 2.0 * M_PI * w_half);
    }

    const double c1 = params.k / 8.0 * c1_hat * c2_hat;
    return std::min(c1, 4.0 / (params.R * params.R));
}

} // namespace kslab
