#include <gtest/gtest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "ehwsn/fusion.hpp"
#include "ehwsn/roc_simulation.hpp"
#include "oracles.hpp"

using namespace ehwsn;

namespace {

double normal_pdf(double y, double mu, double s2) { return std::exp(-(y - mu) * (y - mu) / (2 * s2)) / std::sqrt(2 * M_PI * s2); }

struct Setup {
    ChannelDraw draw;
    std::vector<OperatingPoint> ops;
    std::vector<double> s2;
};

Setup three_sensors(double noise_scale = 1.0) {
    Setup s;
    const double gains[] = {0.83, 1.21, 0.47};
    const double lambdas[] = {1.0, 1.0, 1.0};
    s.draw = ChannelDraw::from_gains({gains[0], gains[1], gains[2]}, lambdas);
    s.ops = {operating_point(0.47, 0.52, 0.93, 0.99), operating_point(0.40, 0.49, 0.88, 0.94),
             operating_point(0.47, 0.50, 0.92, 0.99)};
    s.s2 = {0.9 * noise_scale, 1.2 * noise_scale, 0.8 * noise_scale};
    return s;
}

}  // namespace

TEST(Fusion, OperatingPointProducts) {
    const auto op = operating_point(0.2, 0.6, 0.9, 0.5);
    EXPECT_DOUBLE_EQ(op.alpha, 0.6 * 0.9 * 0.5);
    EXPECT_DOUBLE_EQ(op.beta, 0.2 * 0.9 * 0.5);
}

TEST(Fusion, CostUsesCeiledUnits) {
    const double lambdas[] = {1.0, 2.0};
    const auto d = ChannelDraw::from_gains({0.4, 1.5}, lambdas);
    EXPECT_DOUBLE_EQ(d.c[0], 3 * 0.4);
    EXPECT_DOUBLE_EQ(d.c[1], 2 * 1.5);
}

TEST(Fusion, ExactLrtMatchesDensityRatio) {
    const auto s = three_sensors();
    const std::vector<double> y{0.3, -0.7, 1.9};
    double ref = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        const double c = s.draw.c[k];
        const double f1 = s.ops[k].alpha * normal_pdf(y[k], c, s.s2[k]) + (1 - s.ops[k].alpha) * normal_pdf(y[k], 0, s.s2[k]);
        const double f0 = s.ops[k].beta * normal_pdf(y[k], c, s.s2[k]) + (1 - s.ops[k].beta) * normal_pdf(y[k], 0, s.s2[k]);
        ref += std::log(f1 / f0);
    }
    EXPECT_NEAR(lrt_exact(y, s.draw, s.ops, s.s2), ref, 1e-12);
}

TEST(Fusion, ExactLrtSurvivesExtremeProbabilities) {
    auto s = three_sensors();
    s.ops[0] = operating_point(0.0, 1.0, 1.0, 1.0);
    const std::vector<double> y{50.0, -30.0, 0.0};
    EXPECT_TRUE(std::isfinite(lrt_exact(y, s.draw, s.ops, s.s2)));
}

TEST(Fusion, MomentsMatchSampledReceivedSignal) {
    const auto s = three_sensors();
    const auto m = fusion_moments(s.draw, s.ops, s.s2);
    Rng rng = make_rng(21, 0);
    constexpr int n = 400000;
    for (int hyp = 0; hyp < 2; ++hyp) {
        double sum = 0.0, sum2 = 0.0;
        for (int t = 0; t < n; ++t) {
            std::vector<double> y(3);
            for (std::size_t k = 0; k < 3; ++k) {
                const double p = hyp ? s.ops[k].alpha : s.ops[k].beta;
                std::normal_distribution<double> noise(0.0, std::sqrt(s.s2[k]));
                y[k] = (uniform01(rng) < p ? s.draw.c[k] : 0.0) + noise(rng);
            }
            const double v = m.linear.evaluate(y);
            sum += v;
            sum2 += v * v;
        }
        const double mean = sum / n, var = sum2 / n - mean * mean;
        const double mu = hyp ? m.mu_delta_h1 : m.mu_delta_h0;
        const double v = hyp ? m.var_delta_h1 : m.var_delta_h0;
        EXPECT_NEAR(mean, mu, 4 * std::sqrt(v / n));
        EXPECT_NEAR(var, v, 0.01 * v);
    }
}

TEST(Fusion, ClosedFormRocProperties) {
    const auto s = three_sensors();
    double prev = 0.0;
    for (int i = 1; i <= 9; ++i) {
        const double a = 0.1 * i;
        const auto perf = closed_form_pf_pd(s.draw, s.ops, s.s2, a);
        EXPECT_NEAR(perf.p_f, a, 1e-15);
        EXPECT_GE(perf.p_d, a);
        EXPECT_GE(perf.p_d, prev);
        prev = perf.p_d;
    }
    EXPECT_THROW(closed_form_pf_pd(s.draw, s.ops, s.s2, 0.0), DomainError);
}

TEST(Fusion, UninformativeSensorsAreDegenerate) {
    auto s = three_sensors();
    for (auto& op : s.ops) op = operating_point(0.5, 0.5, 0.9, 0.9);
    const auto perf = closed_form_pf_pd(s.draw, s.ops, s.s2, 0.3);
    EXPECT_TRUE(perf.degenerate);
    EXPECT_DOUBLE_EQ(perf.p_d, 0.3);
}

// Under heavy FC noise y_k is close to Gaussian and the closed form holds.
TEST(Fusion, ClosedFormMatchesFixedDrawSimulationAtHighNoise) {
    auto s = three_sensors(10.0);
    const double budgets[] = {0.3};
    MonteCarloOptions mc;
    mc.trials = 800000;
    mc.seed = 77;
    mc.statistic = FusionStatistic::Linearized;
    const auto roc = monte_carlo_fixed_draw(s.draw, s.ops, s.s2, budgets, mc);
    const auto perf = closed_form_pf_pd(s.draw, s.ops, s.s2, 0.3);
    EXPECT_NEAR(roc.points[0].p_d, perf.p_d, 3 * roc.points[0].p_d_stderr);
}

TEST(KlDivergence, GaussianFormula) {
    EXPECT_DOUBLE_EQ(kl_gaussian_approx(1.0, 2.0, 1.0, 2.0), 0.0);
    // Numeric integral of N(mu1,v1) log(N(mu1,v1)/N(mu0,v0)).
    const double mu0 = 0.2, v0 = 1.3, mu1 = 0.7, v1 = 0.9;
    auto f = [&](double y) {
        const double p = normal_pdf(y, mu1, v1);
        return p * std::log(p / normal_pdf(y, mu0, v0));
    };
    const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -20, 20, 10, 1e-14);
    EXPECT_NEAR(kl_gaussian_approx(mu0, v0, mu1, v1), ref, 1e-12);
}

TEST(KlDivergence, LowSnrVanishesForEqualProbabilities) {
    EXPECT_DOUBLE_EQ(kl_lowsnr_approx(1.2, 0.4, 0.4, 0.9), 0.0);
    EXPECT_DOUBLE_EQ(kl_lowsnr_approx(1.2, 0.4, 0.4, 0.9, 0.3), 0.0);
}

TEST(KlDivergence, ExactMatchesDirectIntegral) {
    for (double c : {0.4, 1.3, 3.0}) {
        for (auto [a, b] : {std::pair{0.6, 0.5}, std::pair{0.3, 0.05}, std::pair{0.01, 0.002}}) {
            const double s2 = 0.9;
            auto f = [&](double y) {
                const double f1 = a * normal_pdf(y, c, s2) + (1 - a) * normal_pdf(y, 0, s2);
                const double f0 = b * normal_pdf(y, c, s2) + (1 - b) * normal_pdf(y, 0, s2);
                return f1 * std::log(f1 / f0);
            };
            const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -30, 30, 20, 1e-15);
            const auto v = kl_true(c, a, b, s2);
            EXPECT_NEAR(v.value, ref, 1e-8 * ref + 1e-15) << c << " " << a << " " << b;
            EXPECT_FALSE(v.clamped);
        }
    }
    EXPECT_EQ(kl_true(1.0, 0.3, 0.3, 1.0).value, 0.0);
    EXPECT_TRUE(kl_true(1.0, 1.0, 0.3, 1.0).clamped);
}

TEST(KlDivergence, GaussianApproximationIsAccurateAtHighNoise) {
    const double c = 1.0, a = 0.6, b = 0.4, s2 = 25.0;
    const double exact = kl_true(c, a, b, s2).value;
    const double approx = kl_gaussian_approx(c * b, c * c * b * (1 - b) + s2, c * a, c * c * a * (1 - a) + s2);
    EXPECT_NEAR(approx, exact, 1e-3 * exact);
}

TEST(MonteCarlo, IndependentOfThreadCount) {
    const auto s = three_sensors();
    const double budgets[] = {0.2, 0.5};
    MonteCarloOptions mc;
    mc.trials = 50000;
    mc.seed = 5;
    mc.threads = 1;
    const auto one = monte_carlo_fixed_draw(s.draw, s.ops, s.s2, budgets, mc);
    mc.threads = 4;
    const auto four = monte_carlo_fixed_draw(s.draw, s.ops, s.s2, budgets, mc);
    for (int i = 0; i < 2; ++i) {
        EXPECT_EQ(one.points[i].p_d, four.points[i].p_d);
        EXPECT_EQ(one.points[i].tau, four.points[i].tau);
    }
}

TEST(MonteCarlo, EmpiricalRocMeetsBudget) {
    std::vector<double> h0, h1;
    for (int i = 0; i < 1000; ++i) {
        h0.push_back(i);
        h1.push_back(i + 500);
    }
    const double budgets[] = {0.1, 0.5};
    const auto roc = empirical_roc(h0, h1, budgets);
    EXPECT_DOUBLE_EQ(roc.points[0].p_f, 0.1);
    EXPECT_DOUBLE_EQ(roc.points[1].p_f, 0.5);
    EXPECT_DOUBLE_EQ(roc.points[1].p_d, 1.0);
    EXPECT_DOUBLE_EQ(roc.points[0].p_d, 0.6);  // tau = 899
}
