#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "boolezeta/dynamics.hpp"
#include "boolezeta/rng.hpp"

using namespace boolezeta;

namespace {

double ks_statistic(std::vector<double> xs, const MapParams& p) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = cauchy_cdf(xs[i], p);
        d = std::max({d, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
    }
    return d;
}

}  // namespace

TEST(BooleStep, DirectSubstitution) {
    EXPECT_DOUBLE_EQ(boole_step(2.0, {1.0, 0.0}), 0.75);
    EXPECT_DOUBLE_EQ(boole_step(3.0, {2.0, 1.0}), 1.0);
}

TEST(BooleStep, FixedPointAtBeta) {
    for (MapParams p : {MapParams{1, 0}, MapParams{2, 1}, MapParams{0.3, -7.5}}) EXPECT_EQ(boole_step(p.beta, p), p.beta);
}

TEST(BooleStep, RejectsInvalidParameters) {
    EXPECT_THROW(iterate_orbit(1.0, {0.0, 0.0}, 3), std::invalid_argument);
    EXPECT_THROW(iterate_orbit(1.0, {-1.0, 0.0}, 3), std::invalid_argument);
    EXPECT_THROW(iterate_orbit(1.0, {1.0, NAN}, 3), std::invalid_argument);
}

TEST(Orbit, ZeroIterations) {
    const auto o = iterate_orbit(5.0, {}, 0);
    ASSERT_EQ(o.values.size(), 1u);
    EXPECT_EQ(o.values[0], 5.0);
}

TEST(Orbit, StartingAtBetaStaysThere) {
    const MapParams p{2.0, 1.0};
    const auto o = iterate_orbit(p.beta, p, 10);
    for (double v : o.values) EXPECT_EQ(v, p.beta);
}

// phi(T_{1,0}(x)) = T_{a,b}(phi(x)) at every point of a length-100 quad-precision orbit.
TEST(Orbit, ConjugationInExtendedPrecision) {
    using quad = boost::multiprecision::cpp_bin_float_quad;
    const quad a = quad(2), b = quad(1);
    quad x = quad("0.37");
    for (int n = 0; n < 100; ++n) {
        const quad next = boole_step<quad>(x, quad(1), quad(0));
        const quad lhs = a * next + b;
        const quad rhs = boole_step<quad>(a * x + b, a, b);
        EXPECT_LT(static_cast<double>(abs(lhs - rhs) / (1 + abs(rhs))), 1e-30) << "step " << n;
        x = next;
    }
}

TEST(Orbit, DoublePrecisionConjugationHoldsToRounding) {
    const MapParams p{2.0, 1.0};
    const double x0 = 0.37;
    const auto base = iterate_orbit(x0, {}, 5);
    const auto conj = iterate_orbit(conjugate(x0, p), p, 5);
    for (std::size_t n = 0; n < base.values.size(); ++n)
        EXPECT_NEAR(conjugate(base.values[n], p), conj.values[n], 1e-12 * (1 + std::fabs(conj.values[n])));
}

TEST(Cauchy, SampleValues) {
    EXPECT_EQ(cauchy_sample(0.5, {3.0, -2.0}), -2.0);
    EXPECT_NEAR(cauchy_sample(0.75, {}), 1.0, 1e-15);
    EXPECT_THROW(cauchy_sample(0.0, {}), std::domain_error);
    EXPECT_THROW(cauchy_sample(1.0, {}), std::domain_error);
}

TEST(Cauchy, CdfValues) {
    const MapParams p{2.0, 1.0};
    EXPECT_DOUBLE_EQ(cauchy_cdf(p.beta, p), 0.5);
    EXPECT_NEAR(cauchy_cdf(1.0, {}) - cauchy_cdf(-1.0, {}), 0.5, 1e-15);
    EXPECT_EQ(cauchy_cdf(INFINITY, p), 1.0);
    EXPECT_NEAR(cauchy_cdf(1e300, p), 1.0, 1e-15);
}

TEST(Cauchy, DensityIntegratesToCdf) {
    const MapParams p{1.5, 0.25};
    double acc = 0.0;
    const double lo = -3.0, hi = 4.0;
    const int n = 20000;
    const double h = (hi - lo) / n;
    for (int i = 0; i < n; ++i) acc += h * cauchy_density(lo + (i + 0.5) * h, p);
    EXPECT_NEAR(acc, cauchy_cdf(hi, p) - cauchy_cdf(lo, p), 1e-8);
}

TEST(Cauchy, IidDrawsPassKolmogorovSmirnov) {
    const MapParams p{2.0, 1.0};
    std::vector<double> xs;
    for (std::uint64_t j = 0; j < 100000; ++j) xs.push_back(cauchy_sample(counter_uniform(derive_seed(7, 0), j), p));
    EXPECT_LT(ks_statistic(xs, p), 0.01);
}

TEST(Cauchy, OrbitPassesKolmogorovSmirnov) {
    const MapParams p{1.0, 0.0};
    const auto o = iterate_orbit(cauchy_sample(open_unit(splitmix64(11)), p), p, 100000);
    EXPECT_LT(ks_statistic(o.values, p), 0.01);
}

// mu(T^{-1}(-inf, y]) = mu((-inf, y]) using the two explicit preimage branches of T_{1,0}.
TEST(Cauchy, ExactMeasureInvariance) {
    const MapParams p{};
    for (double y : {-50.0, -3.0, -0.4, 0.0, 0.1, 1.0, 7.0, 1e4}) {
        const double r = std::hypot(y, 1.0);
        const double x_plus = y >= 0 ? y + r : 1.0 / (r - y);
        const double x_minus = -1.0 / x_plus;
        const double pre = cauchy_cdf(x_minus, p) + (cauchy_cdf(x_plus, p) - 0.5);
        EXPECT_NEAR(pre, cauchy_cdf(y, p), 1e-14) << "y = " << y;
    }
}

TEST(OrbitBatch, MatchesScalarStepBitForBit) {
    const MapParams p{2.0, 1.0};
    std::vector<double> seeds;
    for (int i = 0; i < 13; ++i) seeds.push_back(cauchy_sample(open_unit(splitmix64(static_cast<std::uint64_t>(i))), p));
    OrbitBatch batch(p, seeds);
    batch.advance_to(1000);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const auto o = iterate_orbit(seeds[i], p, 1000);
        EXPECT_EQ(batch.value(i), o.values.back());
    }
    EXPECT_THROW(batch.advance_to(10), std::logic_error);
    EXPECT_THROW(OrbitBatch(p, std::vector<double>(17, 0.0)), std::invalid_argument);
}

TEST(OrbitBatch, CountsSingularHits) {
    const MapParams p{1.0, 0.0};
    OrbitBatch batch(p, {0.0, 1.0});
    batch.advance_to(5);
    EXPECT_EQ(batch.value(0), 0.0);
    EXPECT_EQ(batch.value(1), 0.0);
    EXPECT_EQ(batch.singular_hits(), 5u + 4u);
}
