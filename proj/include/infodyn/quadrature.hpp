#pragma once

#include <functional>

namespace infodyn {

/// Adaptive double-exponential quadrature of f over [a, b]; either bound may be infinite.
/// Integrable endpoint singularities are tolerated. Throws NumericError when the error
/// estimate stays above `tol` after maximal refinement or the result is not finite.
[[nodiscard]] double integrate_1d(const std::function<double(double)>& f, double a, double b, double tol = 1e-9);

}  // namespace infodyn
