#include <gtest/gtest.h>

#include "ehwsn/config.hpp"
#include "ehwsn/optimizer.hpp"

using namespace ehwsn;

namespace {

const Network& section4_network() {
    static const Network net = Network::solve(paper_config().network);
    return net;
}

// Channel-averaged P_D recomputed from scratch through the fusion closed form.
double pd_direct(const ThresholdEvaluator& ev, const std::vector<int>& idx, double a) {
    const Network& net = ev.network();
    std::vector<OperatingPoint> ops;
    for (std::size_t k = 0; k < idx.size(); ++k) ops.push_back(net.node(k, ev.grid(k).at(idx[k])).op);
    double sum = 0.0;
    for (const auto& d : ev.channel_draws()) sum += closed_form_pf_pd(d, ops, net.sigma_n2(), a).p_d;
    return sum / static_cast<double>(ev.draws());
}

ThresholdGrid small_grid() { return ThresholdGrid{0.9, 1.2, 8}; }

}  // namespace

TEST(Grid, UsefulRangeCoversBothMeans) {
    const SensorParams s{1.0, 100, 1.0, 2.0, 0.0};
    const auto g = default_grid(s);
    EXPECT_EQ(g.count, 200);
    EXPECT_EQ(g.lower, 0.0);
    EXPECT_GT(g.upper, s.sigma_w2 + s.eta() / s.samples);
    EXPECT_LT(local_pd(s.with_theta(g.upper)), 1e-6);
    EXPECT_THROW((ThresholdGrid{1.0, 0.5, 10}.validate()), DomainError);
}

TEST(SchemeI, ExhaustiveMatchesDirectEnumeration) {
    const auto& net = section4_network();
    const ThresholdEvaluator ev(net, std::vector<ThresholdGrid>(3, small_grid()), 40, 3);
    for (double a : {0.2, 0.5}) {
        const auto r = scheme1_max_pd(ev, a, SearchMode::Exhaustive);
        double best = -1.0;
        std::vector<int> arg;
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
                for (int k = 0; k < 8; ++k) {
                    const double v = pd_direct(ev, {i, j, k}, a);
                    if (v > best + 1e-13) {
                        best = v;
                        arg = {i, j, k};
                    }
                }
        EXPECT_NEAR(r.objective, best, 1e-12);
        EXPECT_EQ(r.indices, arg);
        EXPECT_EQ(r.evaluations, 512u);
    }
}

TEST(SchemeI, IndependentOfThreadCount) {
    const auto& net = section4_network();
    const std::vector<ThresholdGrid> grids(3, ThresholdGrid{0.8, 1.3, 15});
    const ThresholdEvaluator one(net, grids, 60, 9, 1), many(net, grids, 60, 9, 4);
    const auto a = scheme1_max_pd(one, 0.4), b = scheme1_max_pd(many, 0.4);
    EXPECT_EQ(a.indices, b.indices);
    EXPECT_EQ(a.objective, b.objective);
}

TEST(SchemeI, CoordinateAscentIsLocallyOptimal) {
    NetworkSpec spec = paper_config().network;
    // Seven sensors: beyond the exhaustive limit.
    for (int extra = 0; extra < 4; ++extra) {
        spec.sensors.push_back(spec.sensors[extra % 3]);
        spec.channels.push_back(spec.channels[extra % 3]);
    }
    const Network net = Network::solve(spec);
    const ThresholdEvaluator ev(net, std::vector<ThresholdGrid>(7, small_grid()), 30, 4);
    EXPECT_THROW(scheme1_max_pd(ev, 0.5, SearchMode::Exhaustive), DomainError);
    const auto r = scheme1_max_pd(ev, 0.5);
    for (std::size_t k = 0; k < 7; ++k) {
        auto idx = r.indices;
        for (int j = 0; j < 8; ++j) {
            idx[k] = j;
            EXPECT_LE(ev.pd(idx, 0.5), r.objective + 1e-15);
        }
    }
    EXPECT_GE(r.objective, common_threshold(ev, CommonObjective::Pd, 0.5).objective - 1e-15);
}

TEST(SchemeI, GoldenThresholdsAtSection4) {
    const auto cfg = paper_config();
    const auto& net = section4_network();
    const ThresholdEvaluator ev(net, cfg.grids(), cfg.channel_draws, cfg.seed);
    const auto r = scheme1_max_pd(ev, 0.5);
    // Frozen from 60^3 enumeration over 500 channel draws (seed 20190601).
    EXPECT_EQ(r.indices, (std::vector<int>{32, 33, 32}));
    EXPECT_NEAR(r.objective, 0.528807711924, 1e-11);
    EXPECT_NEAR(pd_direct(ev, r.indices, 0.5), r.objective, 1e-12);
}

TEST(SchemeII, ArgmaxOfKlTables) {
    const auto& net = section4_network();
    const ThresholdEvaluator ev(net, std::vector<ThresholdGrid>(3, ThresholdGrid{0.5, 1.5, 30}), 50, 2);
    for (KlMethod m : {KlMethod::Gaussian, KlMethod::LowSnr, KlMethod::Exact}) {
        const auto r = scheme2_max_kl(ev, m);
        double total = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
            const auto table = ev.kl_table(k, m);
            const int best = static_cast<int>(std::max_element(table.begin(), table.end()) - table.begin());
            EXPECT_EQ(r.indices[k], best);
            EXPECT_FALSE(r.non_identifiable[k]);
            total += table[best];
        }
        EXPECT_DOUBLE_EQ(r.objective, total);
    }
}

TEST(SchemeII, FlagsSensorWithoutSignal) {
    NetworkSpec spec = paper_config().network;
    spec.sensors[1].amplitude = 0.0;
    const Network net = Network::solve(spec);
    const ThresholdEvaluator ev(net, std::vector<ThresholdGrid>(3, ThresholdGrid{0.5, 1.5, 20}), 20, 2);
    const auto r = scheme2_max_kl(ev);
    EXPECT_TRUE(r.non_identifiable[1]);
    EXPECT_FALSE(r.non_identifiable[0]);
}

TEST(CommonThreshold, NeverBeatsPerSensorDesign) {
    const auto& net = section4_network();
    const ThresholdEvaluator ev(net, std::vector<ThresholdGrid>(3, ThresholdGrid{0.8, 1.3, 20}), 80, 6);
    for (double a : {0.1, 0.5, 0.9}) {
        const auto per = scheme1_max_pd(ev, a);
        const auto common = common_threshold(ev, CommonObjective::Pd, a);
        EXPECT_GE(per.objective, common.objective - 1e-15);
        EXPECT_EQ(common.indices[0], common.indices[2]);
    }
    const auto kl = scheme2_max_kl(ev);
    const auto kl_common = common_threshold(ev, CommonObjective::KlTotal);
    EXPECT_GE(kl.objective, kl_common.objective - 1e-15);
}

TEST(CommonThreshold, RequiresSharedGrid) {
    const auto& net = section4_network();
    const ThresholdEvaluator ev(net, {ThresholdGrid{0.8, 1.3, 20}, ThresholdGrid{0.8, 1.4, 20}, ThresholdGrid{0.8, 1.3, 20}},
                                10, 6);
    EXPECT_THROW(common_threshold(ev, CommonObjective::Pd), DomainError);
}
