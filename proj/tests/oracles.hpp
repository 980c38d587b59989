#ifndef KSLAB_TESTS_ORACLES_HPP
#define KSLAB_TESTS_ORACLES_HPP

// Independent reference computations used only by tests. These stay
// deliberately separate from the library code paths they check.

#include <cmath>
#include <functional>
#include <vector>

namespace oracles {

// Modified Bessel function I_0 by its power series; converges fast for
// the moderate arguments used here.
inline double bessel_i0(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int m = 1; m < 64; ++m) {
        term *= q / (static_cast<double>(m) * m);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return sum;
}

// Richardson-extrapolated trapezoid (Romberg) on [a, b].
inline double romberg(const std::function<double(double)>& f, double a, double b,
                      int levels = 16) {
    std::vector<double> row(levels, 0.0), prev(levels, 0.0);
    double h = b - a;
    prev[0] = 0.5 * h * (f(a) + f(b));
    long n = 1;
    for (int i = 1; i < levels; ++i) {
        h *= 0.5;
        n *= 2;
        double sum = 0.0;
        for (long j = 1; j < n; j += 2) sum += f(a + j * h);
        row[0] = 0.5 * prev[0] + h * sum;
        double factor = 4.0;
        for (int k = 1; k <= i; ++k) {
            row[k] = (factor * row[k - 1] - prev[k - 1]) / (factor - 1.0);
            factor *= 4.0;
        }
        if (i > 3 && std::abs(row[i] - prev[i - 1]) < 1e-14 * (1.0 + std::abs(row[i])))
            return row[i];
        std::swap(row, prev);
    }
    return prev[levels - 1];
}

} // namespace oracles

#endif
