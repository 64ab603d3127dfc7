#pragma once

#include <cstddef>
#include <vector>

namespace infodyn {

inline constexpr double kEulerGamma = 0.57721566490153286061;

/// Digamma function psi(x) for x > 0. Throws std::domain_error otherwise.
[[nodiscard]] double digamma(double x);

/// psi(1..max_n) precomputed by the recurrence psi(n + 1) = psi(n) + 1/n.
class DigammaTable {
public:
    explicit DigammaTable(std::size_t max_n);
    /// psi(n) for 1 <= n <= max_n.
    double operator()(std::size_t n) const { return values_[n]; }

private:
    std::vector<double> values_;
};

}  // namespace infodyn
