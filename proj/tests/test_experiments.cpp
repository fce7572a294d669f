#include <cmath>
#include <complex>

#include <gtest/gtest.h>

#include "boolezeta/experiments.hpp"

using namespace boolezeta;
using C = std::complex<double>;

namespace {

ExperimentConfig base(std::vector<std::uint64_t> schedule, std::size_t seeds) {
    ExperimentConfig c;
    c.schedule = std::move(schedule);
    c.seeds = {3, seeds};
    c.quadrature_reference = false;
    return c;
}

ExperimentConfig constant_stub(C value) {
    auto c = base({1, 7, 100, 1000}, 5);
    c.family = ConstantFn{value};
    return c;
}

void expect_identical_series(const RunResult& a, const RunResult& b) {
    ASSERT_EQ(a.series.size(), b.series.size());
    for (std::size_t k = 0; k < a.series.size(); ++k) {
        EXPECT_EQ(a.series[k].N, b.series[k].N);
        EXPECT_EQ(a.series[k].pooled, b.series[k].pooled);
        EXPECT_EQ(a.series[k].per_seed, b.series[k].per_seed);
    }
}

}  // namespace

TEST(ConstantStub, AveragesAreExactAtEveryN) {
    const C c(0.7, -1.3);
    for (auto kind : {ExperimentKind::ergodic_average, ExperimentKind::moving_average}) {
        auto cfg = constant_stub(c);
        cfg.kind = kind;
        cfg.windows = {StoltzKind::Kind::linear, 2};
        const auto r = run_experiment(cfg, 2);
        for (const auto& p : r.series) {
            EXPECT_EQ(p.pooled, c);
            for (const auto& v : p.per_seed) EXPECT_EQ(v, c);
        }
        EXPECT_EQ(r.primary()->name, "constant");
        EXPECT_EQ(r.abs_error(), 0.0);
    }
}

TEST(ConstantStub, MomentAndLogAveragesOfOne) {
    auto cfg = constant_stub({1.0, 0.0});
    cfg.s = {0.5, 0.0};
    for (int l : {1, 2, 4}) {
        const auto r = lindelof_moment(cfg, l, 0, 1);
        EXPECT_EQ(r.final_point().pooled, C(1.0, 0.0)) << l;
    }
}

TEST(ConstantStub, VariationStatisticsVanish) {
    auto cfg = constant_stub({2.5, 0.0});
    cfg.kind = ExperimentKind::variation_stats;
    cfg.schedule = {2, 4, 8, 16, 32, 64};
    cfg.window_growth = {GrowthSpec::Kind::power, 1.0, 0.5};
    const auto r = run_experiment(cfg, 1);
    ASSERT_TRUE(r.variation.has_value());
    const auto& v = *r.variation;
    EXPECT_EQ(v.block_sup, 0.0);
    EXPECT_EQ(v.square_function, 0.0);
    EXPECT_EQ(v.windowed_square_function, 0.0);
    for (double x : v.squared_increments) EXPECT_EQ(x, 0.0);
    for (double x : v.absolute_increments) EXPECT_EQ(x, 0.0);
}

TEST(ConstantStub, FrequencyRatioTendsToTheConstant) {
    auto cfg = constant_stub({3.0, 0.0});
    cfg.kind = ExperimentKind::frequency_counts;
    cfg.s = {0.75, 0.0};
    cfg.schedule = {100000};
    cfg.m_grid = {10, 100, 1000, 10000};
    const auto r = run_experiment(cfg, 1);
    ASSERT_TRUE(r.frequency.has_value());
    const auto& f = *r.frequency;
    // #{n : 3/n >= 1/m} = 3m exactly while 3m <= n_max
    for (double x : f.ratio) EXPECT_EQ(x, 3.0);
    EXPECT_NEAR(f.weak_norm, 3.0, 1e-13);
}

TEST(Determinism, RepeatedRunsAndThreadCountsAgree) {
    auto cfg = base({10, 100, 2000}, 20);
    cfg.s = {0.75, 0.3};
    cfg.params = {2.0, 1.0};
    const auto a = ergodic_average(cfg, 1);
    const auto b = ergodic_average(cfg, 1);
    const auto c = ergodic_average(cfg, 3);
    expect_identical_series(a, b);
    expect_identical_series(a, c);
    cfg.mode = SamplingMode::iid;
    expect_identical_series(ergodic_average(cfg, 1), ergodic_average(cfg, 2));
    cfg.seeds.master = 4;
    EXPECT_NE(ergodic_average(cfg, 1).final_point().pooled, c.final_point().pooled);
}

TEST(MovingAverage, FullWindowsReproduceBirkhoffAveragesBitForBit) {
    auto cfg = base({1, 5, 50, 500, 3000}, 17);
    cfg.s = {0.75, 0.0};
    const auto birkhoff = ergodic_average(cfg, 2);
    cfg.windows = {StoltzKind::Kind::full_averages};
    const auto windows = moving_average(cfg, 2);
    expect_identical_series(birkhoff, windows);
}

TEST(Subsequence, SingleSampleMatchesHandComputation) {
    auto cfg = base({1}, 1);
    cfg.s = {0.5, 0.0};
    const auto r = rh_log_average(cfg, 1);
    const double x0 = cauchy_sample(open_unit(splitmix64(derive_seed(cfg.seeds.master, 0))), cfg.params);
    const double x1 = boole_step(x0, cfg.params);
    const double expected = std::log(std::abs(evaluate(Riemann{0}, C(0.5, 0.5 * x1))));
    EXPECT_EQ(r.final_point().pooled, C(expected, 0.0));
}

TEST(Subsequence, NonMonotoneIndicesVisitTheRightIterates) {
    auto cfg = base({3}, 2);
    cfg.s = {2.0, 0.0};
    cfg.sequence = Explicit{{2, 5, 9}};
    const auto r = ergodic_average(cfg, 1);
    const auto streams = cfg.seeds.streams();
    for (std::size_t i = 0; i < 2; ++i) {
        const auto o = iterate_orbit(cauchy_sample(open_unit(splitmix64(streams[i])), cfg.params), cfg.params, 9);
        C acc = 0.0;
        for (int k : {2, 5, 9}) acc += evaluate(Riemann{0}, C(2.0, o.values[static_cast<std::size_t>(k)]));
        EXPECT_LT(std::abs(r.final_point().per_seed[i] - acc / 3.0), 1e-15);
    }
}

TEST(Statistics, ConvergesToClosedForms) {
    auto cfg = base({20000}, 8);
    cfg.quadrature_reference = true;
    const auto r = ergodic_average(cfg, 0);
    EXPECT_EQ(r.primary()->name, "closed_form:right_half_plane");
    EXPECT_LT(std::abs(r.z_score()), 5.0);

    cfg.family = DirichletL{0, DirichletCharacter::kronecker(-4)};
    cfg.s = {1.0, 0.0};
    cfg.params = {1.0, 0.5};
    const auto l = ergodic_average(cfg, 0);
    EXPECT_EQ(l.primary()->name, "closed_form:no_pole");
    EXPECT_LT(std::abs(l.primary()->value - evaluate(cfg.family, C(2.0, 0.5))), 1e-14);
    EXPECT_LT(std::abs(l.z_score()), 5.0);
    ASSERT_GE(l.references.size(), 2u);
    EXPECT_LT(std::abs(l.references[1].value - l.primary()->value), l.references[1].error + 1e-12);
}

TEST(Statistics, HurwitzLinearWindows) {
    auto cfg = base({3000}, 8);
    cfg.family = Hurwitz{0, 0.3};
    cfg.s = {2.0, 0.0};
    cfg.windows = {StoltzKind::Kind::linear, 1};
    const auto r = moving_average(cfg, 0);
    EXPECT_LT(std::abs(r.primary()->value - evaluate(cfg.family, C(3.0, 0.0))), 1e-14);
    EXPECT_LT(std::abs(r.z_score()), 5.0);
}

TEST(Validation, MessagesNameTheKey) {
    auto message = [](const ExperimentConfig& c) {
        try {
            validate(c);
        } catch (const std::invalid_argument& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    auto cfg = base({100}, 1);
    cfg.kind = ExperimentKind::frequency_counts;
    cfg.s = {0.4, 0.0};
    cfg.m_grid = {10};
    EXPECT_EQ(message(cfg).rfind("s: frequency_counts requires sigma = Re s in (1/2, 1)", 0), 0u);
    cfg = base({100, 50}, 1);
    EXPECT_EQ(message(cfg).rfind("schedule:", 0), 0u);
    cfg = base({100}, 0);
    EXPECT_EQ(message(cfg).rfind("seeds.count:", 0), 0u);
    cfg = base({100}, 1);
    cfg.s = {-0.6, 0.0};
    EXPECT_EQ(message(cfg).rfind("s:", 0), 0u);
    cfg = base({100}, 1);
    cfg.kind = ExperimentKind::lindelof_moment;
    cfg.s = {0.5, 0.0};
    cfg.moment_l = 5;
    EXPECT_EQ(message(cfg).rfind("moment.l:", 0), 0u);
}
