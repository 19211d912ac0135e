// ============================================================================
// fusion.hpp -- fusion-center statistics
//
// y_k = h_k u_k + n_k with u_k in {0, ceil(lambda/|h_k|)}, so given the
// channel, y_k is a two-component Gaussian mixture with means {0, c_k},
// c_k = ceil(lambda/|h_k|) |h_k|, and weight alpha_k (H1) or beta_k (H0) on c_k.
// ============================================================================
#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ehwsn/channel.hpp"
#include "ehwsn/errors.hpp"
#include "ehwsn/sensor.hpp"
#include "ehwsn/specfun.hpp"

namespace ehwsn {

inline constexpr double kProbabilityClamp = 1e-12;

inline double clamp_probability(double p) {
    return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

/// Per-sensor transmit probabilities under each hypothesis.
struct OperatingPoint {
    double p_f = 0.0;
    double p_d = 0.0;
    double rho = 0.0;
    double q = 0.0;
    double alpha = 0.0;  // p_d * rho * q
    double beta = 0.0;   // p_f * rho * q
};

inline OperatingPoint operating_point(double p_f, double p_d, double rho, double q) {
    return OperatingPoint{p_f, p_d, rho, q, p_d * rho * q, p_f * rho * q};
}

inline OperatingPoint operating_point(const SensorParams& sensor, double rho, double q) {
    return operating_point(local_pf(sensor), local_pd(sensor), rho, q);
}

/// One realization of |h_k| for every sensor, with c_k = ceil(lambda_k/|h_k|) |h_k|.
struct ChannelDraw {
    std::vector<double> h;
    std::vector<double> c;

    static ChannelDraw from_gains(std::vector<double> gains, std::span<const double> lambdas) {
        if (gains.size() != lambdas.size()) throw DomainError("ChannelDraw: size mismatch");
        ChannelDraw d;
        d.c.resize(gains.size());
        for (std::size_t k = 0; k < gains.size(); ++k) {
            d.c[k] = static_cast<double>(energy_units(gains[k], lambdas[k])) * gains[k];
        }
        d.h = std::move(gains);
        return d;
    }

    std::size_t size() const { return h.size(); }
};

/// Draws |h_k| with |h_k|^2 ~ Exponential(gamma_h).
inline ChannelDraw draw_channels(std::span<const ChannelParams> channels, Rng& rng) {
    std::vector<double> gains(channels.size());
    std::vector<double> lambdas(channels.size());
    for (std::size_t k = 0; k < channels.size(); ++k) {
        const double u = uniform01(rng);
        gains[k] = std::sqrt(-channels[k].gamma_h * std::log1p(-u));
        if (gains[k] <= 0.0) gains[k] = std::numeric_limits<double>::min();
        lambdas[k] = channels[k].lambda;
    }
    return ChannelDraw::from_gains(std::move(gains), lambdas);
}

namespace detail {

inline void check_sizes(std::size_t a, std::size_t b, std::size_t c, const char* who) {
    if (a != b || b != c) throw DomainError(std::string(who) + ": per-sensor vectors differ in length");
}

inline double log_sum_exp(double a, double b) {
    const double m = std::max(a, b);
    if (m == -std::numeric_limits<double>::infinity()) return m;
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// log of w N(y; c, s2) + (1-w) N(y; 0, s2), without the common -0.5 log(2 pi s2).
inline double log_mixture(double y, double c, double w, double s2) {
    const double on = std::log(w) - (y - c) * (y - c) / (2.0 * s2);
    const double off = std::log1p(-w) - y * y / (2.0 * s2);
    return log_sum_exp(on, off);
}

}  // namespace detail

/// Exact log-likelihood ratio of the received vector y (probabilities clamped).
inline double lrt_exact(std::span<const double> y, const ChannelDraw& draw, std::span<const OperatingPoint> ops,
                        std::span<const double> sigma_n2) {
    detail::check_sizes(y.size(), draw.size(), ops.size(), "lrt_exact");
    detail::check_sizes(y.size(), sigma_n2.size(), ops.size(), "lrt_exact");
    double delta = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
        const double a = clamp_probability(ops[k].alpha);
        const double b = clamp_probability(ops[k].beta);
        delta += detail::log_mixture(y[k], draw.c[k], a, sigma_n2[k]) -
                 detail::log_mixture(y[k], draw.c[k], b, sigma_n2[k]);
    }
    return delta;
}

/// Low-SNR linear statistic Delta ~= -offset + sum_k nu_k y_k.
struct LinearizedFusion {
    double offset = 0.0;
    std::vector<double> nu;

    double evaluate(std::span<const double> y) const {
        double s = -offset;
        for (std::size_t k = 0; k < nu.size(); ++k) s += nu[k] * y[k];
        return s;
    }
};

inline LinearizedFusion linearized_coeffs(const ChannelDraw& draw, std::span<const OperatingPoint> ops,
                                          std::span<const double> sigma_n2) {
    detail::check_sizes(draw.size(), ops.size(), sigma_n2.size(), "linearized_coeffs");
    LinearizedFusion lin;
    lin.nu.resize(ops.size());
    for (std::size_t k = 0; k < ops.size(); ++k) {
        const double gap = ops[k].alpha - ops[k].beta;
        const double c = draw.c[k];
        lin.nu[k] = c * gap / sigma_n2[k];
        lin.offset += c * c * gap / (2.0 * sigma_n2[k]);
    }
    return lin;
}

/// Conditional moments of y_k and of the linear statistic under H0/H1.
struct FusionMoments {
    std::vector<double> mu0, mu1, var0, var1;  // per sensor, y_k | H_i
    double mu_delta_h0 = 0.0;
    double mu_delta_h1 = 0.0;
    double var_delta_h0 = 0.0;
    double var_delta_h1 = 0.0;
    LinearizedFusion linear;
};

inline FusionMoments fusion_moments(const ChannelDraw& draw, std::span<const OperatingPoint> ops,
                                    std::span<const double> sigma_n2) {
    FusionMoments m;
    m.linear = linearized_coeffs(draw, ops, sigma_n2);
    const std::size_t n = ops.size();
    m.mu0.resize(n);
    m.mu1.resize(n);
    m.var0.resize(n);
    m.var1.resize(n);
    m.mu_delta_h0 = m.mu_delta_h1 = -m.linear.offset;
    for (std::size_t k = 0; k < n; ++k) {
        const double c = draw.c[k];
        const double a = ops[k].alpha;
        const double b = ops[k].beta;
        m.mu0[k] = c * b;
        m.mu1[k] = c * a;
        m.var0[k] = c * c * b * (1.0 - b) + sigma_n2[k];
        m.var1[k] = c * c * a * (1.0 - a) + sigma_n2[k];
        const double nu = m.linear.nu[k];
        m.mu_delta_h0 += nu * m.mu0[k];
        m.mu_delta_h1 += nu * m.mu1[k];
        m.var_delta_h0 += nu * nu * m.var0[k];
        m.var_delta_h1 += nu * nu * m.var1[k];
    }
    return m;
}

struct FusionPerformance {
    double p_f = 0.0;
    double p_d = 0.0;
    double tau = 0.0;
    bool degenerate = false;  // no sensor carries information; P_D = P_F
};

/// Closed-form Neyman-Pearson operating point for false-alarm budget a under
/// the Gaussian approximation of the linear statistic.
inline FusionPerformance closed_form_pf_pd(const FusionMoments& m, double a) {
    if (!(a > 0.0 && a < 1.0)) throw DomainError("closed_form_pf_pd: a must be in (0,1)");
    FusionPerformance out;
    out.p_f = a;
    const double z = specfun::gaussian_q_inv(a);
    const double s0 = std::sqrt(m.var_delta_h0);
    const double s1 = std::sqrt(m.var_delta_h1);
    out.tau = z * s0 + m.mu_delta_h0;
    if (s1 == 0.0) {
        out.degenerate = true;
        out.p_d = a;
        return out;
    }
    out.p_d = specfun::gaussian_q((z * s0 + m.mu_delta_h0 - m.mu_delta_h1) / s1);
    return out;
}

inline FusionPerformance closed_form_pf_pd(const ChannelDraw& draw, std::span<const OperatingPoint> ops,
                                           std::span<const double> sigma_n2, double a) {
    return closed_form_pf_pd(fusion_moments(draw, ops, sigma_n2), a);
}

/// KL divergence between N(mu1, var1) and N(mu0, var0).
inline double kl_gaussian_approx(double mu0, double var0, double mu1, double var1) {
    if (!(var0 > 0.0) || !(var1 > 0.0)) throw DomainError("kl_gaussian_approx: variances must be > 0");
    const double d = mu1 - mu0;
    return 0.5 * std::log(var0 / var1) + (var1 - var0 + d * d) / (2.0 * var0);
}

inline double kl_gaussian_approx(const FusionMoments& m, std::size_t k) {
    return kl_gaussian_approx(m.mu0.at(k), m.var0.at(k), m.mu1.at(k), m.var1.at(k));
}

/// Low-SNR KL expression evaluated at y = eval_point.
inline double kl_lowsnr_approx(double c, double alpha, double beta, double sigma_n2, double eval_point) {
    if (!(sigma_n2 > 0.0)) throw DomainError("kl_lowsnr_approx: sigma_n2 must be > 0");
    const double s = std::sqrt(sigma_n2);
    const double y = eval_point;
    const double tail_terms = (1.0 - alpha) * (specfun::gaussian_q(y / s) - 0.5) +
                              alpha * specfun::gaussian_q((y - c) / s);
    const double bracket = c * std::sqrt(M_PI / (2.0 * sigma_n2)) * tail_terms +
                           alpha * std::exp(-(c - y) * (c - y) / (2.0 * sigma_n2)) +
                           (1.0 - alpha) * std::exp(-y * y / (2.0 * sigma_n2));
    return c * (beta - alpha) * bracket;
}

inline double kl_lowsnr_approx(double c, double alpha, double beta, double sigma_n2) {
    return kl_lowsnr_approx(c, alpha, beta, sigma_n2, c);
}

struct KlValue {
    double value = 0.0;
    double error_estimate = 0.0;
    bool clamped = false;  // alpha or beta was moved into [1e-12, 1 - 1e-12]
};

namespace detail {

// d e^d - expm1(d) = r log r - r + 1 at r = e^d; nonnegative, ~ d^2/2 near 0.
inline double kl_density_factor(double d) {
    if (std::abs(d) < 0.1) {
        // sum_{n>=2} (n-1) d^n / n!
        double term = d;  // d^(n-1) / (n-1)!
        double sum = 0.0;
        for (int n = 2; n <= 12; ++n) {
            term *= d / (n - 1);
            sum += term * (n - 1) / n;
        }
        return sum;
    }
    return d * std::exp(d) - std::expm1(d);
}

}  // namespace detail

/// KL(f(y|H1) || f(y|H0)) for the two Gaussian mixtures, by adaptive
/// Gauss-Kronrod quadrature over [min(0,c) - 40 sigma, max(0,c) + 40 sigma].
/// The integrand is f0 (r log r - r + 1) with r = f1/f0, which has the same
/// integral as f1 log r but is pointwise nonnegative.
inline KlValue kl_true(double c, double alpha, double beta, double sigma_n2) {
    if (!(sigma_n2 > 0.0)) throw DomainError("kl_true: sigma_n2 must be > 0");
    KlValue out;
    const double a = clamp_probability(alpha);
    const double b = clamp_probability(beta);
    out.clamped = a != alpha || b != beta;
    if (a == b) return out;
    const double s = std::sqrt(sigma_n2);
    const double norm = -0.5 * std::log(2.0 * M_PI * sigma_n2);
    auto integrand = [&](double y) {
        const double l1 = detail::log_mixture(y, c, a, sigma_n2);
        const double l0 = detail::log_mixture(y, c, b, sigma_n2);
        return std::exp(l0 + norm) * detail::kl_density_factor(l1 - l0);
    };
    const double lo = std::min(0.0, c) - 40.0 * s;
    const double hi = std::max(0.0, c) + 40.0 * s;
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, lo, hi, 8, 1e-11, &err);
    if (!(err <= 1e-10 * std::max(1.0, v) + 1e-15)) {
        throw ConvergenceError("kl_true: quadrature error estimate " + std::to_string(err));
    }
    out.value = std::max(0.0, v);
    out.error_estimate = err;
    return out;
}

}  // namespace ehwsn
