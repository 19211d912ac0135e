#include <gtest/gtest.h>

#include "ehwsn/battery.hpp"
#include "ehwsn/channel.hpp"
#include "ehwsn/random.hpp"

using namespace ehwsn;

namespace {

BatteryParams chain(int capacity, double p_e, double transmit = 0.55, double zeta = 0.015) {
    const ChannelParams ch{1.5, 0.9, 1.0, zeta};
    return BatteryParams{capacity, p_e, transmit, consumption_pmf(ch, static_cast<std::size_t>(capacity))};
}

}  // namespace

TEST(BatteryChain, RowsAreStochastic) {
    const auto m = transition_matrix(chain(20, 0.75));
    for (int i = 0; i < m.size(); ++i) EXPECT_NEAR(m.row_sum(i), 1.0, 1e-14);
}

TEST(BatteryChain, StationaryIsFixedPoint) {
    for (double p_e : {0.1, 0.5, 0.75, 0.82, 1.0}) {
        const auto p = chain(20, p_e);
        const auto st = stationary_pmf(p);
        double total = 0.0;
        for (double v : st.pmf) total += v;
        EXPECT_NEAR(total, 1.0, 1e-12);
        std::vector<double> next;
        transition_matrix(p).left_multiply(st.pmf, next);
        double change = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) change += std::abs(next[i] - st.pmf[i]);
        EXPECT_LT(change, 1e-12) << p_e;
    }
}

TEST(BatteryChain, DirectSolversAgreeWithPowerIteration) {
    const auto p = chain(30, 0.6);
    const auto m = transition_matrix(p);
    std::vector<double> direct;
    ASSERT_TRUE(detail::gth_stationary(m, direct) || detail::direct_stationary(m, direct));
    std::vector<double> pi(m.size(), 1.0 / m.size()), next;
    for (int it = 0; it < 200000; ++it) {
        m.left_multiply(pi, next);
        pi.swap(next);
    }
    EXPECT_LT(total_variation(pi, direct), 1e-10);
}

TEST(BatteryChain, SilentSensorFillsUp) {
    const auto st = stationary_pmf(chain(10, 0.5, 0.0));
    EXPECT_NEAR(st.pmf.back(), 1.0, 1e-12);
}

TEST(BatteryChain, MatchesSimulation) {
    for (auto [k, p_e] : {std::pair{20, 0.5}, std::pair{20, 0.82}, std::pair{50, 0.8}}) {
        const auto p = chain(k, p_e);
        Rng rng = make_rng(5, static_cast<std::uint64_t>(k));
        const auto sim = simulate_chain(p, 2000000, 100000, rng);
        EXPECT_FALSE(sim.feasibility_violated);
        EXPECT_LT(total_variation(stationary_pmf(p).pmf, sim.pmf), 0.01) << k << " " << p_e;
    }
}

TEST(BatteryChain, CdfOrderedInHarvestProbability) {
    std::vector<double> prev;
    for (double p_e : {0.5, 0.75, 0.82}) {
        const auto cdf = stationary_pmf(chain(20, p_e)).cdf();
        EXPECT_NEAR(cdf.back(), 1.0, 1e-10);
        if (!prev.empty())
            for (std::size_t b = 0; b < cdf.size(); ++b) EXPECT_LE(cdf[b], prev[b] + 1e-12) << p_e << " " << b;
        prev = cdf;
    }
}

TEST(Rho, BoundedAndIncreasingInHarvest) {
    double prev = 0.0;
    for (double p_e : {0.2, 0.5, 0.75, 0.9}) {
        const auto p = chain(20, p_e);
        const double r = rho(stationary_pmf(p), p.consumption.conditioned());
        EXPECT_GE(r, 0.0);
        EXPECT_LE(r, 1.0);
        EXPECT_GT(r, prev);
        prev = r;
    }
}

TEST(Rho, MatchesSimulatedAffordability) {
    const auto p = chain(20, 0.75);
    Rng rng = make_rng(8, 0);
    const auto sim = simulate_chain(p, 2000000, 100000, rng);
    EXPECT_NEAR(rho(stationary_pmf(p), p.consumption.conditioned()), sim.empirical_rho(), 0.01);
}

TEST(Rho, RejectsShortConsumptionTable) {
    const ChannelParams ch{1.5, 0.9, 1.0, 0.001};
    const auto short_table = consumption_pmf(ch, 5);
    const BatteryParams p{20, 0.75, 0.5, short_table};
    EXPECT_THROW(rho(stationary_pmf(p), short_table.conditioned()), DomainError);
}

TEST(BatteryChain, Validation) {
    EXPECT_THROW(stationary_pmf(chain(0, 0.5)), DomainError);
    EXPECT_THROW(stationary_pmf(chain(10, 1.5)), DomainError);
    EXPECT_THROW(stationary_pmf(chain(10, 0.5, -0.1)), DomainError);
    Rng rng = make_rng(1, 1);
    EXPECT_THROW(simulate_chain(chain(10, 0.5), 10, 10, rng), DomainError);
}
