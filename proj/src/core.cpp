#include "kslab/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace kslab {

void Params::validate() const {
    if (!(R > 0.0)) throw std::invalid_argument("Params: R must be > 0");
    if (!(k >= 0.0)) throw std::invalid_argument("Params: k must be >= 0");
    if (n < 2) throw std::invalid_argument("Params: n must be an integer >= 2");
}

MassGrid build_mass_grid(double R, int N) {
    if (!(R > 0.0)) throw std::invalid_argument("build_mass_grid: R must be > 0");
    if (N < 16) throw std::invalid_argument("build_mass_grid: N must be >= 16");
    MassGrid g;
    g.L = R * R;
    g.N = N;
    g.s.resize(static_cast<std::size_t>(N) + 1);
    for (int i = 0; i <= N; ++i) g.s[static_cast<std::size_t>(i)] = g.L * i / N;
    g.s.back() = g.L;  // exact right endpoint
    return g;
}

std::vector<double> radial_nodes(const MassGrid& grid) {
    std::vector<double> r(grid.nodes());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::sqrt(grid.s[i]);
    return r;
}

namespace {

// Linear interpolation of a profile at radius r (clamped to the sample range).
double interp_profile(const RadialProfile& p, double r) {
    const auto& x = p.r;
    if (r <= x.front()) return p.f.front();
    if (r >= x.back()) return p.f.back();
    auto it = std::upper_bound(x.begin(), x.end(), r);
    std::size_t j = static_cast<std::size_t>(it - x.begin());
    double t = (r - x[j - 1]) / (x[j] - x[j - 1]);
    return (1.0 - t) * p.f[j - 1] + t * p.f[j];
}

} // namespace

std::vector<double> profile_to_w0(const RadialProfile& u0, const MassGrid& grid) {
    if (u0.r.size() != u0.f.size() || u0.r.size() < 2)
        throw std::invalid_argument("profile_to_w0: malformed profile");
    for (double v : u0.f)
        if (v < 0.0) throw std::invalid_argument("profile_to_w0: negative u0 value");

    // Sample u at r_i = sqrt(s_i); resample only if the grids differ.
    const std::vector<double> r = radial_nodes(grid);
    std::vector<double> u(r.size());
    bool matches = u0.r.size() == r.size();
    if (matches)
        for (std::size_t i = 0; i < r.size(); ++i)
            if (std::abs(u0.r[i] - r[i]) > 1e-12 * (1.0 + r.back())) { matches = false; break; }
    for (std::size_t i = 0; i < r.size(); ++i)
        u[i] = matches ? u0.f[i] : interp_profile(u0, r[i]);

    // w0(s) = 1/2 int_0^s u(sqrt(sigma)) dsigma, trapezoid in s.
    std::vector<double> w0(grid.nodes(), 0.0);
    const double h = grid.h();
    for (std::size_t i = 1; i < w0.size(); ++i)
        w0[i] = w0[i - 1] + 0.25 * h * (u[i - 1] + u[i]);
    return w0;
}

RadialProfile w_to_u(const WState& state, const MassGrid& grid) {
    const std::vector<double>& w = state.w;
    const std::size_t n = w.size();
    if (n != grid.nodes() || n < 3)
        throw std::invalid_argument("w_to_u: state/grid mismatch");
    const double h = grid.h();
    const double tol = 1e-10 * (std::abs(state.m) + 1.0) / h;

    RadialProfile u;
    u.r = radial_nodes(grid);
    u.f.resize(n);
    u.f[0] = 2.0 * (-3.0 * w[0] + 4.0 * w[1] - w[2]) / (2.0 * h);
    for (std::size_t i = 1; i + 1 < n; ++i)
        u.f[i] = 2.0 * (w[i + 1] - w[i - 1]) / (2.0 * h);
    u.f[n - 1] = 2.0 * (3.0 * w[n - 1] - 4.0 * w[n - 2] + w[n - 3]) / (2.0 * h);

    for (double& v : u.f) {
        if (v < 0.0) {
            if (v < -tol) throw std::runtime_error("w_to_u: w_s below -tol (w not monotone)");
            v = 0.0;
        }
    }
    return u;
}

double total_mass(const WState& state) {
    if (state.w.empty()) return 0.0;
    return 2.0 * M_PI * state.w.back();
}

} // namespace kslab
