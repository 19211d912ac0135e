// ============================================================================
// sensor.hpp -- local observation model and energy detector
//
// Observation period of N samples. Under H0 x_n = w_n, w_n ~ N(0, sigma_w2).
// Under H1 the samples carry a known signal whose energy over the period is
// eta = A^2 * gamma_g, so that N*Lambda/sigma_w2 is noncentral chi-square
// with N degrees of freedom and noncentrality eta / sigma_w2. The detector
// reports d = 1 when Lambda = (1/N) sum x_n^2 exceeds theta.
// ============================================================================
#pragma once

#include <cmath>
#include <string>

#include "ehwsn/errors.hpp"
#include "ehwsn/random.hpp"
#include "ehwsn/specfun.hpp"

namespace ehwsn {

enum class Hypothesis { H0, H1 };

struct SensorParams {
    double amplitude = 1.0;  // A
    int samples = 100;       // N
    double sigma_w2 = 1.0;   // additive noise variance
    double gamma_g = 1.0;    // multiplicative noise variance
    double theta = 0.0;      // local decision threshold

    /// Noncentrality eta = A^2 gamma_g.
    double eta() const { return amplitude * amplitude * gamma_g; }

    void validate() const {
        if (samples < 1) throw DomainError("SensorParams: samples must be >= 1");
        if (!(sigma_w2 > 0.0)) throw DomainError("SensorParams: sigma_w2 must be > 0");
        if (!(gamma_g > 0.0)) throw DomainError("SensorParams: gamma_g must be > 0");
        if (!(theta >= 0.0)) throw DomainError("SensorParams: theta must be >= 0");
        if (!std::isfinite(amplitude)) throw DomainError("SensorParams: amplitude must be finite");
    }

    bool operator==(const SensorParams&) const = default;

    SensorParams with_theta(double t) const {
        SensorParams copy = *this;
        copy.theta = t;
        return copy;
    }
};

/// Pr(Lambda > theta | H0) = Gamma(N/2, N theta / (2 sigma_w2)) / Gamma(N/2).
inline double local_pf(const SensorParams& p) {
    p.validate();
    const double n = p.samples;
    return specfun::reg_upper_gamma(0.5 * n, 0.5 * n * p.theta / p.sigma_w2);
}

/// Pr(Lambda > theta | H1) = Q_{N/2}(sqrt(eta)/sigma_w, sqrt(N theta)/sigma_w).
inline double local_pd(const SensorParams& p) {
    p.validate();
    const double sigma_w = std::sqrt(p.sigma_w2);
    const double n = p.samples;
    return specfun::marcum_q(0.5 * n, std::sqrt(p.eta()) / sigma_w, std::sqrt(n * p.theta) / sigma_w);
}

/// Draws one observation period and returns Lambda = (1/N) sum x_n^2.
inline double sample_statistic(const SensorParams& p, Hypothesis h, Rng& rng) {
    std::normal_distribution<double> noise(0.0, std::sqrt(p.sigma_w2));
    const double mean = h == Hypothesis::H1 ? std::sqrt(p.eta() / p.samples) : 0.0;
    double energy = 0.0;
    for (int n = 0; n < p.samples; ++n) {
        const double x = mean + noise(rng);
        energy += x * x;
    }
    return energy / p.samples;
}

}  // namespace ehwsn
