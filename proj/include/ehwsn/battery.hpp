// ============================================================================
// battery.hpp -- battery-state Markov chain
//
//   b_t = min{ b_{t-1} - c * 1[u_{t-1} > 0] + Omega_t, K },  Omega_t ~ Bernoulli(p_e)
//
// A unit cost c is spent only when the detector fires (transmit_prob), the
// channel clears truncation, and the battery strictly exceeds the cost.
// ============================================================================
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ehwsn/channel.hpp"
#include "ehwsn/errors.hpp"
#include "ehwsn/random.hpp"

namespace ehwsn {

struct BatteryParams {
    int capacity = 20;           // K
    double p_e = 0.5;            // harvest probability
    double transmit_prob = 0.0;  // Pr(Lambda > theta) = pi P_d + (1 - pi) P_f
    ConsumptionPmf consumption;  // unconditioned: entries sum to q

    int states() const { return capacity + 1; }

    void validate() const {
        if (capacity < 1) throw DomainError("BatteryParams: capacity must be >= 1");
        if (!(p_e >= 0.0 && p_e <= 1.0)) throw DomainError("BatteryParams: p_e must be in [0,1]");
        if (!(transmit_prob >= 0.0 && transmit_prob <= 1.0)) {
            throw DomainError("BatteryParams: transmit_prob must be in [0,1]");
        }
        const double total = consumption.total();
        if (!(total <= 1.0 + 1e-12)) throw DomainError("BatteryParams: consumption mass exceeds 1");
    }

    /// Pr(consumption = c, channel clears truncation); c beyond the table lands in the tail.
    double cost_prob(std::size_t c) const {
        if (c == 0) return 0.0;
        return c <= consumption.units.size() ? consumption.units[c - 1] : 0.0;
    }
};

/// Row-major stochastic matrix over battery states {0, ..., K}.
class TransitionMatrix {
public:
    explicit TransitionMatrix(int states) : n_(states), data_(static_cast<std::size_t>(states) * states, 0.0) {}

    int size() const { return n_; }
    double& operator()(int from, int to) { return data_[static_cast<std::size_t>(from) * n_ + to]; }
    double operator()(int from, int to) const { return data_[static_cast<std::size_t>(from) * n_ + to]; }

    double row_sum(int from) const {
        double s = 0.0;
        for (int j = 0; j < n_; ++j) s += (*this)(from, j);
        return s;
    }

    /// out = pi * P
    void left_multiply(const std::vector<double>& pi, std::vector<double>& out) const {
        out.assign(n_, 0.0);
        for (int i = 0; i < n_; ++i) {
            const double w = pi[i];
            if (w == 0.0) continue;
            const double* row = &data_[static_cast<std::size_t>(i) * n_];
            for (int j = 0; j < n_; ++j) out[j] += w * row[j];
        }
    }

private:
    int n_;
    std::vector<double> data_;
};

inline TransitionMatrix transition_matrix(const BatteryParams& p) {
    p.validate();
    const int top = p.capacity;
    TransitionMatrix m(p.states());
    auto harvest = [&](int from, int level, double prob) {
        m(from, std::min(level + 1, top)) += prob * p.p_e;
        m(from, std::min(level, top)) += prob * (1.0 - p.p_e);
    };
    for (int b = 0; b <= top; ++b) {
        double spent = 0.0;
        for (int c = 1; c < b; ++c) {
            const double prob = p.transmit_prob * p.cost_prob(static_cast<std::size_t>(c));
            if (prob == 0.0) continue;
            harvest(b, b - c, prob);
            spent += prob;
        }
        harvest(b, b, 1.0 - spent);
    }
    return m;
}

struct StationaryBattery {
    std::vector<double> pmf;
    int iterations = 0;

    std::vector<double> cdf() const {
        std::vector<double> out(pmf.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < pmf.size(); ++i) {
            acc += pmf[i];
            out[i] = acc;
        }
        return out;
    }

    /// Pr(b > c).
    double survival(long c) const {
        if (c < 0) return 1.0;
        double s = 0.0;
        for (std::size_t i = static_cast<std::size_t>(c) + 1; i < pmf.size(); ++i) s += pmf[i];
        return s;
    }
};

namespace detail {

// Grassmann-Taksar-Heyman elimination; subtraction-free, so accurate for
// nearly decomposable chains. Returns false when a state cannot reach any
// lower-indexed state (no unique stationary law on the full space).
inline bool gth_stationary(const TransitionMatrix& m, std::vector<double>& pi) {
    const int n = m.size();
    std::vector<double> a(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i) * n + j] = m(i, j);
    auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
    for (int k = n - 1; k > 0; --k) {
        double s = 0.0;
        for (int j = 0; j < k; ++j) s += at(k, j);
        if (!(s > 0.0)) return false;
        for (int i = 0; i < k; ++i) at(i, k) /= s;
        for (int i = 0; i < k; ++i) {
            const double f = at(i, k);
            if (f == 0.0) continue;
            for (int j = 0; j < k; ++j) at(i, j) += f * at(k, j);
        }
    }
    pi.assign(n, 0.0);
    pi[0] = 1.0;
    double total = 1.0;
    for (int k = 1; k < n; ++k) {
        double v = 0.0;
        for (int i = 0; i < k; ++i) v += pi[i] * at(i, k);
        pi[k] = v;
        total += v;
    }
    for (double& v : pi) v /= total;
    return true;
}

// Solves pi (I - P) = 0 with sum(pi) = 1 by Gaussian elimination with partial
// pivoting. Used when GTH fails because of transient states (e.g. state 0,
// which is never re-entered once the battery has charged).
inline bool direct_stationary(const TransitionMatrix& m, std::vector<double>& pi) {
    const int n = m.size();
    std::vector<double> a(static_cast<std::size_t>(n) * (n + 1), 0.0);
    auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * (n + 1) + j]; };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) at(i, j) = (i == j ? 1.0 : 0.0) - m(j, i);
    }
    for (int j = 0; j < n; ++j) at(n - 1, j) = 1.0;
    at(n - 1, n) = 1.0;
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(at(r, col)) > std::abs(at(piv, col))) piv = r;
        if (std::abs(at(piv, col)) < 1e-14) return false;
        if (piv != col)
            for (int j = 0; j <= n; ++j) std::swap(at(piv, j), at(col, j));
        for (int r = col + 1; r < n; ++r) {
            const double f = at(r, col) / at(col, col);
            if (f == 0.0) continue;
            for (int j = col; j <= n; ++j) at(r, j) -= f * at(col, j);
        }
    }
    pi.assign(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double v = at(i, n);
        for (int j = i + 1; j < n; ++j) v -= at(i, j) * pi[j];
        pi[i] = v / at(i, i);
    }
    double total = 0.0;
    for (double& v : pi) {
        v = std::max(0.0, v);
        total += v;
    }
    if (!(total > 0.0)) return false;
    for (double& v : pi) v /= total;
    return true;
}

}  // namespace detail

/// Stationary pmf: power iteration until the L1 change per step is below
/// 1e-12 (at most 1e6 steps). The iteration is warm-started from a direct
/// direct solve (GTH, else Gaussian elimination) when the chain has a unique
/// stationary law, otherwise from the uniform vector.
inline StationaryBattery stationary_pmf(const BatteryParams& p) {
    const TransitionMatrix m = transition_matrix(p);
    const int n = m.size();
    std::vector<double> pi;
    if (!detail::gth_stationary(m, pi) && !detail::direct_stationary(m, pi)) pi.assign(n, 1.0 / n);
    std::vector<double> next;
    constexpr int kMaxIterations = 1000000;
    for (int it = 1; it <= kMaxIterations; ++it) {
        m.left_multiply(pi, next);
        double total = 0.0;
        for (double v : next) total += v;
        double change = 0.0;
        for (int j = 0; j < n; ++j) {
            next[j] /= total;
            change += std::abs(next[j] - pi[j]);
        }
        pi.swap(next);
        if (change < 1e-12) return StationaryBattery{std::move(pi), it};
    }
    throw ConvergenceError("stationary_pmf: power iteration did not converge (K=" +
                           std::to_string(p.capacity) + ", p_e=" + std::to_string(p.p_e) + ")");
}

/// rho = Pr(b > ceil(lambda/|h|) | |h|^2 > zeta), with b independent of the channel.
inline double rho(const StationaryBattery& s, const ConsumptionPmf& conditioned) {
    const int top = static_cast<int>(s.pmf.size()) - 1;
    if (static_cast<int>(conditioned.units.size()) < top && conditioned.tail > 0.0) {
        throw DomainError("rho: consumption table shorter than battery capacity");
    }
    double r = 0.0;
    const std::size_t limit = std::min<std::size_t>(conditioned.units.size(), static_cast<std::size_t>(top));
    for (std::size_t c = 1; c <= limit; ++c) r += conditioned.units[c - 1] * s.survival(static_cast<long>(c));
    return std::min(1.0, std::max(0.0, r));
}

struct ChainSimulation {
    std::vector<double> pmf;  // empirical, after burn-in
    std::uint64_t steps = 0;  // counted steps (after burn-in)
    std::uint64_t transmissions = 0;
    std::uint64_t channel_clear = 0;  // steps with |h|^2 > zeta
    std::uint64_t affordable = 0;     // of those, steps with b > c
    bool feasibility_violated = false;

    double empirical_rho() const {
        return channel_clear == 0 ? 0.0 : static_cast<double>(affordable) / static_cast<double>(channel_clear);
    }
};

/// Simulates the battery recursion step by step. The current battery level is
/// recorded, then the detector/channel/cost draw decides the spend for the
/// next period, then harvesting is applied.
inline ChainSimulation simulate_chain(const BatteryParams& p, std::uint64_t steps, std::uint64_t burn_in, Rng& rng,
                                      int initial_state = -1) {
    p.validate();
    if (steps <= burn_in) throw DomainError("simulate_chain: steps must exceed burn_in");
    const int top = p.capacity;
    int b = initial_state < 0 ? top / 2 : std::min(initial_state, top);

    // Inverse-CDF table over {truncated, c = 1..M, tail}.
    std::vector<double> cum;
    cum.reserve(p.consumption.units.size() + 1);
    double acc = 0.0;
    for (double u : p.consumption.units) {
        acc += u;
        cum.push_back(acc);
    }
    const double clear_mass = acc + p.consumption.tail;
    const long tail_cost = static_cast<long>(p.consumption.units.size()) + 1;

    ChainSimulation out;
    out.pmf.assign(p.states(), 0.0);
    for (std::uint64_t t = 0; t < steps; ++t) {
        const bool counted = t >= burn_in;
        if (counted) {
            out.pmf[b] += 1.0;
            ++out.steps;
        }
        const bool fires = uniform01(rng) < p.transmit_prob;
        const double uc = uniform01(rng);
        long cost = 0;  // 0 = channel truncated
        if (uc < clear_mass) {
            const auto it = std::upper_bound(cum.begin(), cum.end(), uc);
            cost = it == cum.end() ? tail_cost : static_cast<long>(it - cum.begin()) + 1;
        }
        if (cost > 0 && counted) {
            ++out.channel_clear;
            if (b > cost) ++out.affordable;
        }
        if (fires && cost > 0 && b > cost) {
            b -= static_cast<int>(cost);
            if (b < 0) out.feasibility_violated = true;
            if (counted) ++out.transmissions;
        }
        if (uniform01(rng) < p.p_e) b = std::min(b + 1, top);
    }
    for (double& v : out.pmf) v /= static_cast<double>(out.steps);
    return out;
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw DomainError("total_variation: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return 0.5 * s;
}

}  // namespace ehwsn
