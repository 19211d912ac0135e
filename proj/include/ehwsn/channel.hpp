// ============================================================================
// channel.hpp -- Rayleigh reporting channel with quantized channel inversion
//
// |h|^2 ~ Exponential(mean gamma_h). A d = 1 decision costs
// ceil(lambda / |h|) energy units and is only sent when |h|^2 > zeta.
// ============================================================================
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ehwsn/errors.hpp"

namespace ehwsn {

struct ChannelParams {
    double gamma_h = 1.0;   // E|h|^2
    double sigma_n2 = 1.0;  // FC noise variance
    double lambda = 1.0;    // power regulation constant
    double zeta = 0.0;      // truncation threshold on |h|^2

    /// Pr(|h|^2 > zeta).
    double q() const { return std::exp(-zeta / gamma_h); }

    void validate() const {
        if (!(gamma_h > 0.0)) throw DomainError("ChannelParams: gamma_h must be > 0");
        if (!(sigma_n2 > 0.0)) throw DomainError("ChannelParams: sigma_n2 must be > 0");
        if (!(lambda > 0.0)) throw DomainError("ChannelParams: lambda must be > 0");
        if (!(zeta >= 0.0)) throw DomainError("ChannelParams: zeta must be >= 0");
    }

    bool operator==(const ChannelParams&) const = default;

    ChannelParams with_zeta(double z) const {
        ChannelParams copy = *this;
        copy.zeta = z;
        return copy;
    }
};

/// ceil(lambda / |h|), the number of energy units spent to send d = 1.
inline long energy_units(double h_mag, double lambda) {
    if (!(h_mag > 0.0)) throw DomainError("energy_units: |h| must be > 0");
    if (!(lambda > 0.0)) throw DomainError("energy_units: lambda must be > 0");
    const double units = std::ceil(lambda / h_mag);
    return std::max(1L, static_cast<long>(units));
}

/// Joint law of (consumption, channel clears truncation).
///
/// units[i-1] = Pr(ceil(lambda/|h|) = i, |h|^2 > zeta) for i = 1..units.size();
/// tail carries the mass with i > units.size(). The entries and tail sum to q.
struct ConsumptionPmf {
    std::vector<double> units;
    double tail = 0.0;
    double q = 1.0;

    std::size_t max_units() const { return units.size(); }

    double total() const {
        double s = tail;
        for (double p : units) s += p;
        return s;
    }

    /// Same law conditioned on |h|^2 > zeta (sums to 1 unless q = 0).
    ConsumptionPmf conditioned() const {
        ConsumptionPmf out = *this;
        if (q <= 0.0) return out;
        for (double& p : out.units) p /= q;
        out.tail /= q;
        out.q = 1.0;
        return out;
    }
};

/// Exact consumption pmf from the exponential CDF of |h|^2.
///
/// ceil(lambda/|h|) = i  <=>  |h|^2 in [lambda^2/i^2, lambda^2/(i-1)^2), intersected
/// with |h|^2 > zeta. Mass beyond `max_units` is collected in `tail`.
inline ConsumptionPmf consumption_pmf(const ChannelParams& c, std::size_t max_units = 4096) {
    c.validate();
    if (max_units < 1) throw DomainError("consumption_pmf: max_units must be >= 1");
    ConsumptionPmf pmf;
    pmf.q = c.q();
    const double l2 = c.lambda * c.lambda;
    auto survival = [&](double s) { return std::exp(-s / c.gamma_h); };

    pmf.units.assign(max_units, 0.0);
    for (std::size_t i = 1; i <= max_units; ++i) {
        const double lo = l2 / (static_cast<double>(i) * i);
        const double hi = i == 1 ? std::numeric_limits<double>::infinity()
                                 : l2 / (static_cast<double>(i - 1) * (i - 1));
        if (hi <= c.zeta) break;
        const double upper_survival = i == 1 ? 0.0 : survival(hi);
        pmf.units[i - 1] = std::max(0.0, survival(std::max(c.zeta, lo)) - upper_survival);
    }
    const double edge = l2 / (static_cast<double>(max_units) * max_units);
    if (edge > c.zeta) pmf.tail = std::max(0.0, pmf.q - survival(edge));
    return pmf;
}

namespace detail {

// Interior term of the average-energy sum for index x (x + 1 <= lambda^2 / zeta):
//   (x+1) (e^{-L/(x+1)} - e^{-L/x}),  L = lambda^2 / gamma_h,
// written with expm1 so the difference keeps full precision for large x.
inline double pav_interior_term(double x, double L) {
    return (x + 1.0) * std::exp(-L / x) * std::expm1(L / (x * (x + 1.0)));
}

// sum_{i=first}^{last} pav_interior_term(i) for a long smooth run, by
// Euler-Maclaurin with the first derivative correction.
inline double pav_interior_tail(double first, double last, double L) {
    using boost::math::quadrature::gauss_kronrod;
    auto term = [L](double x) { return pav_interior_term(x, L); };
    // Integrate in u = log x; t(x) x is nearly constant there.
    const double integral = gauss_kronrod<double, 31>::integrate(
        [&](double u) {
            const double x = std::exp(u);
            return term(x) * x;
        },
        std::log(first), std::log(last), 15, 1e-14);
    auto slope = [&](double x) { return (term(x + 0.5) - term(x - 0.5)); };
    return integral + 0.5 * (term(first) + term(last)) + (slope(last) - slope(first)) / 12.0;
}

}  // namespace detail

/// Average transmit energy, evaluated as the closed-form finite sum
///   alpha * sum_{i>=1} (i+1) (exp(-max{zeta, lambda^2/(i+1)}/gamma_h) - exp(-lambda^2/(i gamma_h)))
///         * u[lambda^2/i - zeta],
/// with u[x] = 1 for x >= 0. The sum grows like log(1/zeta) and diverges at
/// zeta = 0 (returns +inf). The first 2000 interior terms are summed directly;
/// longer runs of interior terms use Euler-Maclaurin.
inline double pav_formula(const ChannelParams& c, double alpha) {
    c.validate();
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("pav_formula: alpha must be in [0,1]");
    if (alpha == 0.0) return 0.0;
    if (c.zeta == 0.0) return std::numeric_limits<double>::infinity();
    const double l2 = c.lambda * c.lambda;
    const double L = l2 / c.gamma_h;
    // Last index with u[lambda^2/i - zeta] = 1.
    const double last = std::floor(l2 / c.zeta);
    if (last < 1.0) return 0.0;

    constexpr double kDirectTerms = 2000.0;
    double sum = 0.0;
    // Interior terms: i + 1 <= lambda^2 / zeta, so the max picks lambda^2/(i+1).
    const double interior_last = std::floor(l2 / c.zeta - 1.0);
    const double direct_last = std::min(interior_last, kDirectTerms);
    for (double i = 1.0; i <= direct_last; i += 1.0) sum += detail::pav_interior_term(i, L);
    if (interior_last > kDirectTerms) sum += detail::pav_interior_tail(kDirectTerms + 1.0, interior_last, L);
    // Remaining indices in (interior_last, last] have the max picking zeta.
    for (double i = std::max(1.0, interior_last + 1.0); i <= last; i += 1.0) {
        sum += (i + 1.0) * (std::exp(-std::max(c.zeta, l2 / (i + 1.0)) / c.gamma_h) - std::exp(-l2 / (i * c.gamma_h)));
    }
    return alpha * sum;
}

/// alpha * E{ceil(lambda/|h|)^exponent * 1[|h|^2 > zeta]} by quadrature over the
/// exponential density of |h|^2 (or the same expectation conditioned on
/// |h|^2 > zeta). Infinite for exponent 2 at zeta = 0.
inline double pav_oracle(const ChannelParams& c, double alpha, int exponent,
                         bool condition_on_transmit) {
    c.validate();
    if (exponent != 1 && exponent != 2) throw DomainError("pav_oracle: exponent must be 1 or 2");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("pav_oracle: alpha must be in [0,1]");
    const double q = c.q();
    if (q == 0.0 || alpha == 0.0) return 0.0;
    if (c.zeta == 0.0 && exponent == 2) return std::numeric_limits<double>::infinity();

    using boost::math::quadrature::gauss_kronrod;
    const double l2 = c.lambda * c.lambda;
    auto density = [&](double s) { return std::exp(-s / c.gamma_h) / c.gamma_h; };

    // Integrate piecewise between the jumps of ceil(lambda/sqrt(s)) at s = lambda^2/i^2.
    constexpr std::size_t kMaxPieces = 20000;
    double total = 0.0;
    double upper = std::numeric_limits<double>::infinity();
    std::size_t i = 1;
    for (; i <= kMaxPieces; ++i) {
        const double lower = std::max(c.zeta, l2 / (static_cast<double>(i) * i));
        if (lower >= upper) break;
        const double weight = std::pow(static_cast<double>(i), exponent);
        double err = 0.0;
        const double piece = gauss_kronrod<double, 15>::integrate(
            [&](double s) { return weight * density(s); }, lower, upper, 10, 1e-13, &err);
        if (err > 1e-10 * std::max(1.0, piece)) {
            throw ConvergenceError("pav_oracle: quadrature error " + std::to_string(err));
        }
        total += piece;
        upper = l2 / (static_cast<double>(i) * i);
        if (upper <= c.zeta) break;
    }
    if (i > kMaxPieces && upper > c.zeta) {
        // Only reachable for exponent 1 with very small zeta: remaining pieces
        // contribute sum_{j>M} j * Pr(ceil = j) ~ 2 lambda^2 / (gamma_h M).
        total += 2.0 * l2 / (c.gamma_h * kMaxPieces);
    }
    const double value = condition_on_transmit ? total / q : total;
    return alpha * value;
}

/// Outcome of solve_zeta.
struct ZetaSolution {
    double zeta = 0.0;
    double alpha = 0.0;  // alpha_of_zeta(zeta)
    double pav = 0.0;    // pav_formula at the solution
    bool slack = false;  // constraint inactive: even zeta = 0 meets the target
    int evaluations = 0;
};

/// Finds zeta with pav_formula(zeta, alpha_of_zeta(zeta)) = target_pav.
///
/// A log-spaced table of zeta in (0, lambda^2] is scanned upward for the first
/// point whose average energy drops to the target; the bracket is then refined
/// by bisection to relative tolerance `rel_tol`.
inline ZetaSolution solve_zeta(const ChannelParams& base, const std::function<double(double)>& alpha_of_zeta,
                               double target_pav, bool allow_slack = true, double rel_tol = 1e-7) {
    base.validate();
    if (!(target_pav > 0.0)) throw DomainError("solve_zeta: target_pav must be > 0");
    ZetaSolution out;
    auto pav_at = [&](double zeta) {
        ++out.evaluations;
        return pav_formula(base.with_zeta(zeta), alpha_of_zeta(zeta));
    };

    const double pav0 = pav_at(0.0);
    if (pav0 * (1.0 + 1e-6) < target_pav) {
        if (!allow_slack) {
            throw ConvergenceError("solve_zeta: no zeta reaches target P_av " + std::to_string(target_pav));
        }
        out.zeta = 0.0;
        out.alpha = alpha_of_zeta(0.0);
        out.pav = pav0;
        out.slack = true;
        return out;
    }

    const double l2 = base.lambda * base.lambda;
    constexpr int kTable = 121;
    constexpr double kDecades = 12.0;
    double lo = 0.0;
    double hi = l2;
    for (int j = 0; j < kTable; ++j) {
        const double zeta = l2 * std::pow(10.0, -kDecades + kDecades * j / (kTable - 1));
        if (pav_at(zeta) <= target_pav) {
            hi = zeta;
            break;
        }
        lo = zeta;
    }

    double pav_mid = 0.0;
    double mid = hi;
    for (int iter = 0; iter < 200; ++iter) {
        mid = 0.5 * (lo + hi);
        pav_mid = pav_at(mid);
        if (std::abs(pav_mid - target_pav) <= rel_tol * target_pav) break;
        if (pav_mid > target_pav) lo = mid;
        else hi = mid;
        if (hi - lo <= 1e-15 * hi) break;
    }
    if (std::abs(pav_mid - target_pav) > 1e-6 * target_pav) {
        throw ConvergenceError("solve_zeta: bisection stalled at zeta=" + std::to_string(mid));
    }
    out.zeta = mid;
    out.alpha = alpha_of_zeta(mid);
    out.pav = pav_mid;
    return out;
}

}  // namespace ehwsn
