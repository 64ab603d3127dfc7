#include "infodyn/special.hpp"

#include <cmath>
#include <stdexcept>

namespace infodyn {

double digamma(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) throw std::domain_error("digamma: argument must be positive and finite");
    double acc = 0.0;
    while (x < 10.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    // Asymptotic series in 1/x^2 with Bernoulli coefficients; truncation error < 1e-14 for x >= 10.
    const double f = 1.0 / (x * x);
    const double tail =
        f * (1.0 / 12 - f * (1.0 / 120 - f * (1.0 / 252 - f * (1.0 / 240 - f * (1.0 / 132 - f * (691.0 / 32760))))));
    return acc + std::log(x) - 0.5 / x - tail;
}

DigammaTable::DigammaTable(std::size_t max_n) : values_(max_n + 1, 0.0) {
    if (max_n >= 1) values_[1] = -kEulerGamma;
    for (std::size_t n = 1; n < max_n; ++n) values_[n + 1] = values_[n] + 1.0 / static_cast<double>(n);
}

}  // namespace infodyn
