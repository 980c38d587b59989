#ifndef KSLAB_TRIDIAG_HPP
#define KSLAB_TRIDIAG_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace kslab {

/// Thomas factorization of a tridiagonal system. All matrices assembled in
/// this project are diagonally dominant M-matrices, so no pivoting is
/// needed. The factorization can be reused across right-hand sides, which
/// matters in the time stepper where the diffusion and z-BVP matrices stay
/// fixed for many steps.
class TridiagFactor {
public:
    TridiagFactor() = default;

    /// lower[i] multiplies x[i-1] in row i (lower[0] unused), diag[i]
    /// multiplies x[i], upper[i] multiplies x[i+1] (upper[n-1] unused).
    TridiagFactor(const std::vector<double>& lower,
                  const std::vector<double>& diag,
                  const std::vector<double>& upper)
        : m_(lower.size()), bp_(diag), up_(upper) {
        const std::size_t n = diag.size();
        if (lower.size() != n || upper.size() != n)
            throw std::invalid_argument("tridiag: band size mismatch");
        for (std::size_t i = 1; i < n; ++i) {
            if (bp_[i - 1] == 0.0)
                throw std::runtime_error("tridiag: zero pivot");
            m_[i] = lower[i] / bp_[i - 1];
            bp_[i] = diag[i] - m_[i] * up_[i - 1];
        }
    }

    std::size_t size() const { return bp_.size(); }

    void solve(std::vector<double>& rhs) const {
        const std::size_t n = bp_.size();
        if (rhs.size() != n) throw std::invalid_argument("tridiag: rhs size");
        for (std::size_t i = 1; i < n; ++i) rhs[i] -= m_[i] * rhs[i - 1];
        rhs[n - 1] /= bp_[n - 1];
        for (std::size_t i = n - 1; i-- > 0;)
            rhs[i] = (rhs[i] - up_[i] * rhs[i + 1]) / bp_[i];
    }

private:
    std::vector<double> m_, bp_, up_;
};

inline std::vector<double> solve_tridiagonal(const std::vector<double>& lower,
                                             const std::vector<double>& diag,
                                             const std::vector<double>& upper,
                                             std::vector<double> rhs) {
    TridiagFactor f(lower, diag, upper);
    f.solve(rhs);
    return rhs;
}

} // namespace kslab

#endif
