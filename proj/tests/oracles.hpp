// Independent reference computations used by the unit and acceptance tests.
#pragma once

#include <cmath>
#include <limits>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>

namespace oracle {

// Gamma(s, x) / Gamma(s) by integrating t^{s-1} e^{-t} over [x, inf).
inline double reg_upper_gamma(double s, double x) {
    const double lg = std::lgamma(s);
    auto f = [&](double t) { return t <= 0.0 ? 0.0 : std::exp((s - 1.0) * std::log(t) - t - lg); };
    // Split at the mode so both halves are smooth and well scaled.
    const double mode = std::max(x, s - 1.0);
    double total = 0.0;
    if (mode > x) {
        total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, x, mode, 20, 1e-15);
    }
    boost::math::quadrature::exp_sinh<double> tail;
    total += tail.integrate([&](double u) { return f(mode + u); }, 0.0, std::numeric_limits<double>::infinity(), 1e-15);
    return total;
}

// Q_m(a, b) = int_b^inf x (x/a)^{m-1} exp(-(x^2 + a^2)/2) I_{m-1}(a x) dx.
inline double marcum_q(double m, double a, double b) {
    auto f = [&](double x) {
        if (x <= 0.0) return 0.0;
        if (a == 0.0) {
            // Limit a -> 0: x^{2m-1} e^{-x^2/2} / (2^{m-1} Gamma(m)).
            return std::exp((2.0 * m - 1.0) * std::log(x) - 0.5 * x * x - (m - 1.0) * std::log(2.0) - std::lgamma(m));
        }
        const double bessel = boost::math::cyl_bessel_i(m - 1.0, a * x);
        if (bessel <= 0.0) return 0.0;
        return std::exp(std::log(x) + (m - 1.0) * (std::log(x) - std::log(a)) - 0.5 * (x * x + a * a) +
                        std::log(bessel));
    };
    const double upper = a + std::sqrt(2.0 * m) + 40.0;
    if (b >= upper) return 0.0;
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, b, upper, 25, 1e-14);
}

// I_n(x) for integer n from (1/pi) int_0^pi exp(x cos t) cos(n t) dt, scaled by e^{-x}.
inline double log_bessel_i_integer(int n, double x) {
    auto f = [&](double t) { return std::exp(x * (std::cos(t) - 1.0)) * std::cos(n * t); };
    boost::math::quadrature::tanh_sinh<double> ts;
    const double v = ts.integrate(f, 0.0, M_PI, 1e-15) / M_PI;
    return x + std::log(v);
}

// Binomial standard error at probability p with n trials.
inline double binomial_se(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

}  // namespace oracle
