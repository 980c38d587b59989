#include "kslab/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace kslab {

namespace {

double simpson_panel(const std::function<double(double)>& f, double a, double fa,
                     double b, double fb, double fm, double whole, double tol,
                     int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_panel(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1) +
           simpson_panel(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
    if (a == b) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_panel(f, a, fa, b, fb, fm, whole, tol, max_depth);
}

double simpson_uniform(const std::vector<double>& values, double h) {
    const std::size_t n = values.size();
    if (n < 2) return 0.0;
    std::size_t intervals = n - 1;
    double sum = 0.0;
    std::size_t even_end = intervals % 2 == 0 ? intervals : intervals - 1;
    for (std::size_t i = 0; i + 2 <= even_end; i += 2)
        sum += h / 3.0 * (values[i] + 4.0 * values[i + 1] + values[i + 2]);
    if (intervals % 2 != 0)
        sum += 0.5 * h * (values[n - 2] + values[n - 1]);
    return sum;
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& f) {
    if (x.size() != f.size()) throw std::invalid_argument("trapezoid: size mismatch");
    double sum = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i)
        sum += 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
    return sum;
}

} // namespace kslab
