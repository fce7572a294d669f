#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "boolezeta/limits.hpp"

using namespace boolezeta;
using C = std::complex<double>;

namespace {

const MapParams kUnit{1.0, 0.0};
const QuadratureSettings kFast{400.0, 1'000'000, 1e-8};

double zeta_real(double x) { return evaluate(Riemann{0}, x).real(); }

}  // namespace

TEST(PoleCorrection, RealAxisSimplification) {
    EXPECT_NEAR(pole_correction_P(0, 0.75, kUnit).real(), -2.0 / (0.75 * 1.25), 1e-14);
    EXPECT_NEAR(pole_correction_P(0, 0.75, kUnit).real(), -2.1333333333333333, 1e-14);
    for (double sigma : {-0.3, 0.1, 0.5, 0.9}) {
        const C v = pole_correction_P(0, sigma, kUnit);
        EXPECT_NEAR(v.real(), -2.0 / (sigma * (2.0 - sigma)), 1e-13) << sigma;
        EXPECT_NEAR(v.imag(), 0.0, 1e-14);
    }
}

TEST(PoleCorrection, ConjugateSymmetryWhenBetaIsZero) {
    const MapParams p{1.7, 0.0};
    for (int k : {0, 1, 2, 3})
        for (C s : {C(0.2, 0.4), C(-0.1, -2.0)})
            EXPECT_LT(std::abs(pole_correction_P(k, std::conj(s), p) - std::conj(pole_correction_P(k, s, p))), 1e-13);
}

TEST(PoleCorrection, LaurentFormAgreesWithDerivativeForm) {
    const auto ld = laurent_data(Riemann{0});
    for (double sigma : {0.2, 0.6, 0.95})
        EXPECT_LT(std::abs(pole_correction_B(ld, sigma, kUnit) - pole_correction_P(0, sigma, kUnit)), 1e-12);
    // zeta^{(k)} has principal part (-1)^k k! / (s-1)^{k+1}, so B over its Laurent data is P_k
    for (int k : {1, 2}) {
        const auto ldk = laurent_data(Riemann{k});
        const MapParams p{2.0, 1.0};
        const C s(0.3, -0.4);
        EXPECT_LT(std::abs(pole_correction_B(ldk, s, p) - pole_correction_P(k, s, p)), 1e-9) << k;
    }
    EXPECT_EQ(pole_correction_B(laurent_data(DirichletL{0, DirichletCharacter::kronecker(-4)}), 0.3, kUnit), C(0.0));
}

TEST(ClosedForm, Regions) {
    const auto right = closed_form_limit({Riemann{0}, 2.5, kUnit});
    EXPECT_EQ(right.region, Region::right_half_plane);
    EXPECT_NEAR(std::abs(right.value - zeta_real(3.5)), 0.0, 1e-14);

    const auto strip = closed_form_limit({Riemann{0}, 0.75, kUnit});
    EXPECT_EQ(strip.region, Region::strip);
    EXPECT_NEAR(strip.value.real(), zeta_real(1.75) - 2.0 / (0.75 * 1.25), 1e-13);

    const auto special = closed_form_limit({Riemann{0}, 0.0, kUnit});
    EXPECT_EQ(special.region, Region::special_point);
    EXPECT_NEAR(special.value.real(), std::numbers::egamma - 0.5, 1e-13);

    const DirichletL chi4{0, DirichletCharacter::kronecker(-4)};
    const MapParams p{2.0, 1.0};
    const auto np = closed_form_limit({chi4, C(-0.3, 0.2), p});
    EXPECT_EQ(np.region, Region::no_pole);
    EXPECT_LT(std::abs(np.value - evaluate(chi4, C(1.7, 1.2))), 1e-14);

    EXPECT_EQ(closed_form_limit({Riemann{0}, C(1.0, 0.5), p}).region, Region::pole_line);
    EXPECT_THROW(closed_form_limit({Riemann{1}, C(1.0, 0.5), p}), std::invalid_argument);
    EXPECT_THROW(closed_form_limit({Riemann{0}, -0.6, kUnit}), std::invalid_argument);
    EXPECT_THROW(closed_form_limit({DedekindQuadratic{-4}, -0.1, kUnit}), std::invalid_argument);
}

// On the line the limit is the mean of the two one-sided limits: the full correction on the
// left and none on the right.
TEST(ClosedForm, LineValueIsTheMeanOfOneSidedLimits) {
    const MapParams p{2.0, 1.0};
    for (double t : {-1.0, 0.5, 3.0}) {
        const double eps = 1e-7;
        const C left = closed_form_limit({Riemann{0}, C(1.0 - eps, t), p}).value;
        const C right = closed_form_limit({Riemann{0}, C(1.0 + eps, t), p}).value;
        const C line = closed_form_limit({Riemann{0}, C(1.0, t), p}).value;
        EXPECT_LT(std::abs(line - 0.5 * (left + right)), 1e-6) << t;
        const double denom = 4.0 + (0.0 - t - 1.0) * (0.0 - t - 1.0);
        EXPECT_LT(std::abs(line - (evaluate(Riemann{0}, C(3.0, t + 1.0)) - 2.0 / denom)), 1e-13);
    }
}

TEST(Quadrature, ConstantIntegratesToOne) {
    const auto q = cauchy_quadrature({ConstantFn{{1.0, 0.0}}}, C(0.3, 0.0), {2.0, 1.0}, kFast);
    EXPECT_NEAR(std::abs(q.value - 1.0), 0.0, 1e-10);
    EXPECT_FALSE(q.flagged);
}

TEST(Quadrature, MatchesClosedForms) {
    const IntegrandSpec spec{Riemann{0}};
    const auto a = cauchy_quadrature(spec, 2.5, kUnit, {});
    EXPECT_LT(std::abs(a.value - zeta_real(3.5)), 1e-8);
    const auto b = cauchy_quadrature(spec, 0.75, kUnit, {});
    EXPECT_LT(std::abs(b.value - (zeta_real(1.75) - 2.0 / (0.75 * 1.25))), 1e-6);
    EXPECT_EQ(b.tail_model, TailModel::dirichlet_mean);
}

TEST(Quadrature, PrincipalValueOnThePoleLine) {
    const MapParams p{2.0, 1.0};
    const auto q = cauchy_quadrature({Riemann{0}}, C(1.0, 0.5), p, kFast);
    EXPECT_TRUE(q.principal_value);
    const auto cf = closed_form_limit({Riemann{0}, C(1.0, 0.5), p});
    EXPECT_LT(std::abs(q.value - cf.value), std::max(q.error, 1e-9));
}

TEST(Quadrature, ErrorBoundStaysHonestAsToleranceTightens) {
    const LimitRequest req{Hurwitz{0, 0.3}, C(0.2, -2.0), {2.0, 1.0}};
    const C cf = closed_form_limit(req).value;
    for (double tol : {1e-5, 5e-6, 1e-7}) {
        const auto q = cauchy_quadrature({req.family}, req.s, req.params, {400.0, 1'000'000, tol});
        EXPECT_LE(std::abs(q.value - cf), q.error + 1e-12) << tol;
    }
}

TEST(Quadrature, RejectsBadSettings) {
    EXPECT_THROW(cauchy_quadrature({Riemann{0}}, 2.5, kUnit, {10.0, 1'000'000, 1e-7}), std::invalid_argument);
    EXPECT_THROW(cauchy_quadrature({Riemann{0}}, 2.5, kUnit, {400.0, 1'000'000, 0.0}), std::invalid_argument);
}

TEST(Moments, SecondMomentDensities) {
    const auto half = MomentDensity::second(0, 0.5);
    ASSERT_TRUE(half.has_value());
    for (double L : {0.0, 2.0, 7.5}) EXPECT_NEAR((*half)(L), L + 2.0 * std::numbers::egamma, 1e-12);
    const auto off = MomentDensity::second(0, 0.75);
    ASSERT_TRUE(off.has_value());
    for (double L : {0.5, 3.0}) EXPECT_NEAR((*off)(L), zeta_real(1.5) + zeta_real(0.5) * std::exp(-0.5 * L), 1e-10);
    EXPECT_FALSE(MomentDensity::second(0, 0.505).has_value());
}

TEST(Moments, FourthMomentLeadingCoefficient) {
    const auto d = MomentDensity::fourth();
    ASSERT_EQ(d.polynomial().size(), 5u);
    EXPECT_NEAR(d.polynomial().back(), 1.0 / (2.0 * std::numbers::pi * std::numbers::pi), 1e-9);
    EXPECT_LT(d.fit_residual(), 1e-9);
    for (double L : {1.0, 4.0}) EXPECT_NEAR(d(L), MomentDensity::fourth_direct(L), 1e-8 * (1.0 + d(L)));
}

TEST(Identities, SecondMoment) {
    for (double sigma = 0.52; sigma < 0.99; sigma += 0.0237) EXPECT_LT(second_moment_bracket(sigma), 0.0) << sigma;
    const auto r = second_moment_identity(0.75);
    EXPECT_NEAR(r.closed_form, -(4.0 / 3.0) * (zeta_real(1.5) / 2.0 + zeta_real(0.5) / 0.5), 1e-13);
    EXPECT_LT(std::fabs(r.quadrature - r.closed_form) / std::fabs(r.closed_form), 1e-5);
    EXPECT_THROW(second_moment_identity(0.5), std::invalid_argument);
}

TEST(Identities, HalfLineConstantAndBsy) {
    const auto h = half_line_constant();
    EXPECT_NEAR(h.closed_form, 1.2606614015, 1e-9);
    EXPECT_LT(std::fabs(h.quadrature - h.closed_form), 1e-3);
    const auto b = bsy_functional();
    EXPECT_LT(std::abs(b.value), 5e-3);
    EXPECT_EQ(b.tail_model, TailModel::log_mean);
    const IntegrandSpec spec{Riemann{0}, Transform::log_abs};
    EXPECT_NEAR(apply_transform(evaluate(Riemann{0}, 0.5), spec).real() / 0.25, std::log(1.4603545088095868) / 0.25, 1e-12);
}

TEST(Conventions, ResolvedDecisively) {
    const auto r = resolve_conventions();
    EXPECT_EQ(r.conventions.pole_sign, PoleSign::minus);
    EXPECT_EQ(r.conventions.line, LineDenominator::shifted);
    EXPECT_TRUE(r.pole_sign.decisive());
    EXPECT_TRUE(r.line_denominator.decisive());
    EXPECT_LT(r.pole_sign.accepted_discrepancy, 1e-6);
}
