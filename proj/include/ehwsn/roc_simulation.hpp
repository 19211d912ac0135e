// ============================================================================
// roc_simulation.hpp -- end-to-end Monte Carlo of the fusion-center ROC
// ============================================================================
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "ehwsn/fusion.hpp"
#include "ehwsn/network.hpp"
#include "ehwsn/parallel.hpp"
#include "ehwsn/random.hpp"

namespace ehwsn {

enum class FusionStatistic { Exact, Linearized };

struct MonteCarloOptions {
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    FusionStatistic statistic = FusionStatistic::Exact;
    unsigned threads = 0;
    std::uint64_t block = 8192;  // trials per random stream
};

struct RocPoint {
    double a = 0.0;
    double tau = 0.0;
    double p_f = 0.0;
    double p_d = 0.0;
    double p_d_stderr = 0.0;
};

struct EmpiricalRoc {
    std::vector<RocPoint> points;
    std::uint64_t h0_trials = 0;
    std::uint64_t h1_trials = 0;
};

/// Empirical ROC from labelled statistics: for each budget a, tau is the
/// smallest H0 order statistic with at most a * n0 samples above it.
inline EmpiricalRoc empirical_roc(std::vector<double> delta_h0, const std::vector<double>& delta_h1,
                                  std::span<const double> budgets) {
    EmpiricalRoc roc;
    roc.h0_trials = delta_h0.size();
    roc.h1_trials = delta_h1.size();
    if (delta_h0.empty() || delta_h1.empty()) throw DomainError("empirical_roc: need trials under both hypotheses");
    std::sort(delta_h0.begin(), delta_h0.end());
    std::vector<double> sorted_h1 = delta_h1;
    std::sort(sorted_h1.begin(), sorted_h1.end());
    const double n0 = static_cast<double>(delta_h0.size());
    const double n1 = static_cast<double>(sorted_h1.size());
    for (double a : budgets) {
        const auto above = static_cast<std::size_t>(std::floor(a * n0));
        const std::size_t idx = above >= delta_h0.size() ? 0 : delta_h0.size() - above - 1;
        RocPoint pt;
        pt.a = a;
        pt.tau = above >= delta_h0.size() ? -std::numeric_limits<double>::infinity() : delta_h0[idx];
        const auto count_above = [&](const std::vector<double>& v) {
            return static_cast<double>(v.end() - std::upper_bound(v.begin(), v.end(), pt.tau));
        };
        pt.p_f = count_above(delta_h0) / n0;
        pt.p_d = count_above(sorted_h1) / n1;
        pt.p_d_stderr = std::sqrt(pt.p_d * (1.0 - pt.p_d) / n1);
        roc.points.push_back(pt);
    }
    return roc;
}

namespace detail {

struct LabelledDeltas {
    std::vector<double> h0;
    std::vector<double> h1;
};

template <class TrialFn>
LabelledDeltas run_blocks(const MonteCarloOptions& opt, TrialFn&& trial) {
    if (opt.trials < 1) throw DomainError("monte_carlo: trials must be >= 1");
    const std::uint64_t blocks = (opt.trials + opt.block - 1) / opt.block;
    std::vector<LabelledDeltas> parts(blocks);
    parallel_for(
        blocks,
        [&](std::size_t b) {
            Rng rng = make_rng(opt.seed, b);
            const std::uint64_t begin = b * opt.block;
            const std::uint64_t end = std::min(opt.trials, begin + opt.block);
            for (std::uint64_t t = begin; t < end; ++t) trial(rng, parts[b]);
        },
        opt.threads);
    LabelledDeltas all;
    for (auto& p : parts) {
        all.h0.insert(all.h0.end(), p.h0.begin(), p.h0.end());
        all.h1.insert(all.h1.end(), p.h1.begin(), p.h1.end());
    }
    return all;
}

}  // namespace detail

/// Full simulation per trial: hypothesis from the prior, per-sensor energy
/// detector, fresh channel, battery level from the stationary pmf, OOK
/// transmission rule, received y, then the fusion statistic.
inline EmpiricalRoc monte_carlo_roc(std::span<const NodeState> nodes, double prior_h1,
                                    std::span<const double> budgets, const MonteCarloOptions& opt) {
    const std::size_t K = nodes.size();
    std::vector<OperatingPoint> ops;
    std::vector<double> sigma_n2;
    std::vector<std::vector<double>> battery_cdf;
    for (const auto& n : nodes) {
        ops.push_back(n.op);
        sigma_n2.push_back(n.channel.sigma_n2);
        battery_cdf.push_back(n.battery.cdf());
    }
    auto trial = [&](Rng& rng, detail::LabelledDeltas& out) {
        const bool h1 = uniform01(rng) < prior_h1;
        std::vector<double> y(K), h(K), c(K);
        for (std::size_t k = 0; k < K; ++k) {
            const NodeState& n = nodes[k];
            const double lambda_stat = sample_statistic(n.sensor, h1 ? Hypothesis::H1 : Hypothesis::H0, rng);
            const auto& cdf = battery_cdf[k];
            const double ub = uniform01(rng);
            const long level = static_cast<long>(std::upper_bound(cdf.begin(), cdf.end() - 1, ub) - cdf.begin());
            const double gain2 = -n.channel.gamma_h * std::log1p(-uniform01(rng));
            h[k] = std::sqrt(std::max(gain2, std::numeric_limits<double>::min()));
            const long units = energy_units(h[k], n.channel.lambda);
            c[k] = static_cast<double>(units) * h[k];
            const bool sends = lambda_stat > n.sensor.theta && level > units && gain2 > n.channel.zeta;
            std::normal_distribution<double> noise(0.0, std::sqrt(n.channel.sigma_n2));
            y[k] = (sends ? c[k] : 0.0) + noise(rng);
        }
        ChannelDraw draw{h, c};
        double delta = 0.0;
        if (opt.statistic == FusionStatistic::Exact) delta = lrt_exact(y, draw, ops, sigma_n2);
        else delta = linearized_coeffs(draw, ops, sigma_n2).evaluate(y);
        (h1 ? out.h1 : out.h0).push_back(delta);
    };
    auto deltas = detail::run_blocks(opt, trial);
    return empirical_roc(std::move(deltas.h0), deltas.h1, budgets);
}

/// Monte Carlo at a fixed channel draw with u_k ~ Bernoulli(alpha_k / beta_k);
/// isolates the Gaussian approximation of the fusion statistic.
inline EmpiricalRoc monte_carlo_fixed_draw(const ChannelDraw& draw, std::span<const OperatingPoint> ops,
                                           std::span<const double> sigma_n2, std::span<const double> budgets,
                                           const MonteCarloOptions& opt) {
    const std::size_t K = ops.size();
    // Each hypothesis gets half the trials so both tails are resolved.
    auto trial = [&](Rng& rng, detail::LabelledDeltas& out) {
        for (int hyp = 0; hyp < 2; ++hyp) {
            std::vector<double> y(K);
            for (std::size_t k = 0; k < K; ++k) {
                const double p = hyp == 1 ? ops[k].alpha : ops[k].beta;
                const bool sends = uniform01(rng) < p;
                std::normal_distribution<double> noise(0.0, std::sqrt(sigma_n2[k]));
                y[k] = (sends ? draw.c[k] : 0.0) + noise(rng);
            }
            double delta = 0.0;
            if (opt.statistic == FusionStatistic::Exact) delta = lrt_exact(y, draw, ops, sigma_n2);
            else delta = linearized_coeffs(draw, ops, sigma_n2).evaluate(y);
            (hyp == 1 ? out.h1 : out.h0).push_back(delta);
        }
    };
    MonteCarloOptions half = opt;
    half.trials = std::max<std::uint64_t>(1, opt.trials / 2);
    auto deltas = detail::run_blocks(half, trial);
    return empirical_roc(std::move(deltas.h0), deltas.h1, budgets);
}

}  // namespace ehwsn
