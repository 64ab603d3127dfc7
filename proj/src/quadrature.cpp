#include "infodyn/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <fmt/format.h>

#include "infodyn/error.hpp"

namespace infodyn {

double integrate_1d(const std::function<double(double)>& f, double a, double b, double tol) {
    if (std::isnan(a) || std::isnan(b)) throw std::invalid_argument("integrate_1d: NaN bound");
    if (a == b) return 0.0;
    if (a > b) return -integrate_1d(f, b, a, tol);
    double error = 0.0;
    double l1 = 0.0;
    double result = 0.0;
    // Interior tolerance is relative; the absolute error estimate is checked below.
    const double eps = std::numeric_limits<double>::epsilon();
    const double rel_goal = std::clamp(tol, 64.0 * eps, std::sqrt(eps));
    try {
        if (std::isinf(a) && std::isinf(b)) {
            boost::math::quadrature::sinh_sinh<double> rule;
            result = rule.integrate(f, rel_goal, &error, &l1);
        } else if (std::isinf(b)) {
            boost::math::quadrature::exp_sinh<double> rule;
            result = rule.integrate(f, a, b, rel_goal, &error, &l1);
        } else if (std::isinf(a)) {
            boost::math::quadrature::exp_sinh<double> rule;
            result = rule.integrate([&](double x) { return f(-x); }, -b, INFINITY, rel_goal, &error, &l1);
        } else {
            boost::math::quadrature::tanh_sinh<double> rule;
            result = rule.integrate(f, a, b, rel_goal, &error, &l1);
        }
    } catch (const std::exception& e) {
        throw NumericError(std::string("integrate_1d: ") + e.what());
    }
    if (!std::isfinite(result) || error > tol) {
        throw NumericError(fmt::format("integrate_1d: did not converge (estimate {}, error {} > tol {})", result,
                                       error, tol));
    }
    return result;
}

}  // namespace infodyn
