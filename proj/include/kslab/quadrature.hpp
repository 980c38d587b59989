#ifndef KSLAB_QUADRATURE_HPP
#define KSLAB_QUADRATURE_HPP

#include <functional>
#include <vector>

namespace kslab {

/// Adaptive Simpson quadrature on [a, b]. Recursion stops when the local
/// Richardson estimate is below tol (absolute) or the depth cap is hit.
double adaptive_simpson(const std::function<double(double)>& f,
                        double a, double b, double tol, int max_depth = 48);

/// Composite Simpson on a uniform grid of values (n intervals, n even;
/// a trailing trapezoid panel is used if n is odd).
double simpson_uniform(const std::vector<double>& values, double h);

/// Trapezoid rule on a possibly nonuniform grid.
double trapezoid(const std::vector<double>& x, const std::vector<double>& f);

} // namespace kslab

#endif
