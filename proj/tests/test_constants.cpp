#include "oracle.hpp"

#include "thermoflux/constants.hpp"
#include "thermoflux/error.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace thermoflux;
using namespace thermoflux::constants;

namespace {

constexpr double kPi = std::numbers::pi;

double relerr(double a, double b) { return std::abs(a - b) / std::abs(b); }

GeometrySummary unit_square_geom() {
    GeometrySummary g;
    g.vol_omega = 1.0;
    g.meas_boundary = 4.0;
    g.meas_gamma = 4.0;
    g.diameter = std::sqrt(2.0);
    g.r_sharp = 0.05;
    return g;
}

} // namespace

TEST(Gamma, IntegerAndHalfIntegerValues) {
    EXPECT_NEAR(gamma_fn(2.0), 1.0, 1e-14);
    EXPECT_NEAR(gamma_fn(3.0), 2.0, 1e-14);
    EXPECT_LT(relerr(gamma_fn(1.5), std::sqrt(kPi) / 2.0), 1e-14);
    EXPECT_LT(relerr(gamma_fn(0.5), std::sqrt(kPi)), 1e-14);
    double fact = 1.0;
    for (int k = 1; k <= 19; ++k) {
        fact *= k;
        EXPECT_LT(relerr(gamma_fn(k + 1.0), fact), 1e-13) << k;
    }
}

TEST(Gamma, NonPositiveArgumentThrows) {
    EXPECT_THROW(gamma_fn(0.0), DomainError);
    EXPECT_THROW(gamma_fn(-1.5), DomainError);
}

TEST(Gamma, RecurrenceOnFineGrid) {
    for (int i = 0; i < 1000; ++i) {
        const double x = 0.5 + 9.5 * i / 999.0;
        EXPECT_LT(relerr(gamma_fn(x + 1.0), x * gamma_fn(x)), 1e-12) << x;
    }
}

TEST(Gamma, AgreesWithOracleOnWorkingRange) {
    for (int i = 0; i < 200; ++i) {
        const double x = 0.5 + 19.5 * i / 199.0;
        EXPECT_LT(oracle::rel(gamma_fn(x), oracle::G(oracle::hp(x))), 1e-12) << x;
    }
}

TEST(Sobolev, LimitConstant) {
    EXPECT_LT(relerr(sobolev_constant(1.0, 2), 0.5 / std::sqrt(kPi)), 1e-13);
    EXPECT_NEAR(sobolev_constant(1.0, 2), 0.2820947918, 1e-10);
    EXPECT_LT(oracle::rel(sobolev_constant(1.0, 3), oracle::S1(3)), 1e-13);
    EXPECT_NEAR(sobolev_constant(1.0, 3), 0.20678, 1e-5);
}

TEST(Sobolev, DomainErrors) {
    EXPECT_THROW(sobolev_constant(2.0, 2), DomainError);
    EXPECT_THROW(sobolev_constant(0.5, 2), DomainError);
    EXPECT_THROW(sobolev_constant(3.5, 3), DomainError);
}

TEST(Sobolev, ClosedFormAtTwoNOverNPlusTwo) {
    const int n = 3;
    const double q = 2.0 * n / (n + 2.0);
    const double closed = std::pow(kPi, -0.5) * std::pow(n, (2.0 - 3.0 * n) / (2.0 * n)) *
                          std::pow(n - 2.0, (n - 2.0) / (2.0 * n)) *
                          std::pow(gamma_fn(n) / gamma_fn(n / 2.0), 1.0 / n);
    EXPECT_LT(relerr(sobolev_constant(q, n), closed), 1e-13);
}

TEST(Trace, FourThirdsInTwoDimensions) {
    EXPECT_LT(relerr(trace_constant(4.0 / 3.0, 2), std::pow(kPi, -1.0 / 3.0)), 1e-13);
    EXPECT_NEAR(trace_constant(4.0 / 3.0, 2), 0.6827840632, 1e-10);
}

TEST(Trace, ClosedFormAtTwoNOverNPlusOne) {
    for (int n : {2, 3, 4}) {
        const double q = 2.0 * n / (n + 1.0);
        const double closed = std::pow(gamma_fn(n), 1.0 / (n + 1.0)) *
                              std::pow(std::pow(std::sqrt(kPi) * n, n - 1.0) * gamma_fn((n + 1.0) / 2.0),
                                       -1.0 / (n + 1.0));
        EXPECT_LT(relerr(trace_constant(q, n), closed), 1e-13) << n;
    }
}

TEST(Trace, DomainErrors) {
    EXPECT_THROW(trace_constant(1.0, 2), DomainError);
    EXPECT_THROW(trace_constant(2.0, 2), DomainError);
}

TEST(Trace, ExponentsCloseToDimensionStayAccurate) {
    // q = 2 alpha / (alpha + 2) with very large alpha, as happens for p near 2.
    ExponentSet e;
    e.p = 2.0 + 1e-7;
    e.alpha = 3.0 * 2.0 * e.p / (e.p - 2.0);
    const auto c = linf_constants(1.0, 1.0, e, unit_square_geom());
    const oracle::HP a(e.alpha);
    const oracle::HP q = 2 * a / (a + 2);
    EXPECT_LT(oracle::rel(c.S_q, oracle::S(q, 2)), 1e-12);
    EXPECT_LT(oracle::rel(c.K_q, oracle::K(q, 2)), 1e-12);
}

TEST(Poincare, Examples) {
    EXPECT_LT(relerr(poincare_product_constant(1.0, 2), 3.0 * 0.5 / std::sqrt(kPi)), 1e-13);
    EXPECT_NEAR(poincare_product_constant(1.0, 2), 0.8462843754, 1e-9);
    EXPECT_THROW(poincare_product_constant(1.0, 3), DomainError);
    // S_2 is undefined in two dimensions, so the (q=2, n=2) product is too.
    EXPECT_THROW(poincare_product_constant(2.0, 2), DomainError);
    const double q = 1.5;
    const double expected = sobolev_constant(q, 3) *
                            (1.0 + 2.0 * std::sqrt(3.0) * q * std::sin(kPi / q) * std::pow(q - 1.0, -1.0 / q) / kPi);
    EXPECT_LT(relerr(poincare_product_constant(q, 3), expected), 1e-14);
}

TEST(Poincare, ConvexBound) {
    EXPECT_DOUBLE_EQ(convex_poincare_constant(1.0, 2.0), 1.0);
    EXPECT_LT(relerr(convex_poincare_constant(2.0, 1.0), 1.0 / kPi), 1e-14);
}

TEST(Morrey, Examples) {
    EXPECT_LT(relerr(morrey_constant(3.0, 2, 1.0), std::cbrt(2.0) / std::sqrt(kPi)), 1e-13);
    EXPECT_NEAR(morrey_constant(3.0, 2, 1.0), 0.710834, 1e-6);
    EXPECT_LT(relerr(morrey_constant(3.0, 2, 2.0) / morrey_constant(3.0, 2, 1.0), std::pow(2.0, 1.0 / 6.0)), 1e-14);
    EXPECT_THROW(morrey_constant(2.0, 2, 1.0), DomainError);
}

TEST(Gehring, Examples) {
    EXPECT_DOUBLE_EQ(gehring_kappa(0.0, 2.0, 2).kappa, 266240.0);
    EXPECT_DOUBLE_EQ(gehring_kappa(1.0, 2.0, 2).kappa, 1064960.0);
    EXPECT_NEAR(gehring_kappa(4.0, 2.0, 2).kappa, 2396160.0, 1e-6);
    EXPECT_DOUBLE_EQ(gehring_kappa(1.0, 2.0, 2).lambda, 4096.0 * 4.0);
}

TEST(ZFactors, Examples) {
    for (double ups : {1.5, 10.0, 1e7}) {
        auto z2 = z_factors(0.0, ups, 2);
        EXPECT_DOUBLE_EQ(z2.Z1, 4.0);
        EXPECT_DOUBLE_EQ(z2.Z2, 4.0 * ups);
        auto z3 = z_factors(0.0, ups, 3);
        EXPECT_DOUBLE_EQ(z3.Z1, 8.0);
        EXPECT_DOUBLE_EQ(z3.Z2, 8.0 * ups);
        EXPECT_THROW(z_factors(z_pole(ups, 2), ups, 2), DomainError);
        EXPECT_THROW(z_factors(-1e-3, ups, 2), DomainError);
    }
}

TEST(Upsilon, UnitBoundsCoupledThreshold) {
    CoefficientBounds b;
    const double ups = coupled_upsilon(b);
    EXPECT_NEAR(ups / 1e7, 1.0743, 1e-3);
    EXPECT_LT(oracle::rel(ups, oracle::upsilon(1, 1, 1, 1)), 1e-13);
    const double pmax_gap = 1.0 / (ups - 1.0);
    EXPECT_NEAR(pmax_gap / 1e-8, 9.31, 0.01);
}

TEST(Upsilon, InteriorThresholdUnitBounds) {
    CoefficientBounds b;
    const auto t = upsilon_thresholds(b, 0.0, 2);
    const double inner = 2.0 * poincare_product_constant(1.0, 2) * std::sqrt(2.0) * std::sqrt(5.0) + 1.0;
    EXPECT_LT(relerr(t.upsilon_I, 65.0 * 4096.0 * inner * inner), 1e-14);
    ASSERT_TRUE(t.upsilon);
    EXPECT_DOUBLE_EQ(*t.upsilon, coupled_upsilon(b));
}

TEST(Upsilon, BoundaryDominatesInteriorAndMatchesGehring) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.1, 5.0);
    for (int i = 0; i < 100; ++i) {
        CoefficientBounds b;
        b.a_lo = U(rng);
        b.a_hi = b.a_lo * (1.0 + U(rng));
        const double nu3 = U(rng) - 0.1;
        for (int n : {2, 3}) {
            const auto t = upsilon_thresholds(b, nu3, n);
            EXPECT_GE(t.upsilon_U, t.upsilon_I);
            EXPECT_LT(relerr(gehring_kappa(t.B_interior, 2.0, n).kappa, t.upsilon_I), 1e-13);
            EXPECT_LT(relerr(gehring_kappa(t.B_boundary, 2.0, n).kappa, t.upsilon_U), 1e-13);
        }
    }
}

TEST(LinfConstants, ExampleAndMonotonicity) {
    GeometrySummary g = unit_square_geom();
    g.meas_boundary = 1.0;
    ExponentSet e;
    e.p = 3.0;
    e.alpha = 13.0;
    const auto c = linf_constants(1.0, 1.0, e, g);
    EXPECT_TRUE(std::isfinite(c.Zcal1) && c.Zcal1 > 0.0);
    EXPECT_TRUE(std::isfinite(c.Zcal2) && c.Zcal2 > 0.0);
    const auto z = oracle::zcal(1, 1, 3, 13, 2, 1, 1);
    EXPECT_LT(oracle::rel(c.Zcal, z.Z), 1e-12);
    EXPECT_LT(oracle::rel(c.Zcal1, z.Z1), 1e-12);
    EXPECT_LT(oracle::rel(c.Zcal2, z.Z2), 1e-12);

    double prev = c.Zcal1;
    for (double a = 1.5; a < 10.0; a += 0.5) {
        const double z1 = linf_constants(a, 1.0, e, g).Zcal1;
        EXPECT_LT(z1, prev);
        prev = z1;
    }
    e.alpha = 2.0 * e.p / (e.p - 2.0);
    EXPECT_THROW(linf_constants(1.0, 1.0, e, g), DomainError);
}

TEST(Smallness, QIsNondecreasingAndPositiveAtZero) {
    SmallnessInputs in;
    in.geom = unit_square_geom();
    in.p = 2.0 + 0.5 / (coupled_upsilon(in.bounds) - 1.0);
    in.ell = 5.0;
    in.norms = {0.3, 0.2, 0.1};
    const auto c = smallness_constants(in);
    ASSERT_TRUE(c.evaluable());
    EXPECT_GT(smallness_Q(0.0, in, c), 0.0);
    double prev = smallness_Q(0.0, in, c);
    for (int i = 1; i <= 100; ++i) {
        const double q = smallness_Q(i / 100.0, in, c);
        EXPECT_GE(q, prev);
        prev = q;
    }
}

TEST(Smallness, OutOfRegimeLeavesMEmpty) {
    SmallnessInputs in;
    in.geom = unit_square_geom();
    in.p = 2.5;
    in.ell = 2.0;
    const auto c = smallness_constants(in);
    EXPECT_FALSE(c.in_regime);
    EXPECT_FALSE(c.evaluable());
    EXPECT_THROW(smallness_Q(0.5, in, c), DomainError);
}

TEST(Smallness, ZeroDataMatchesOracle) {
    SmallnessInputs in;
    in.geom = unit_square_geom();
    in.p = 2.0 + 0.3 / (coupled_upsilon(in.bounds) - 1.0);
    in.ell = 5.0;
    const auto c = smallness_constants(in);
    oracle::SmallIn o{1, 1, 1, 1, 1, 1, 1, 1, in.p, 5.0, 4.0 * in.p / (in.p - 2.0), 1.0, 4.0, 4.0, 0.05, 0.0, 0.0};
    const auto oc = oracle::small(o);
    for (double R : {0.0, 0.25, 1.0}) {
        EXPECT_LT(oracle::rel(smallness_Q(R, in, c), oc.Q(o, R)), 1e-12) << R;
    }
}

TEST(BallRadius, ConstantMapAndFailure) {
    auto r = find_ball_radius([](double) { return 0.5; });
    ASSERT_TRUE(r);
    EXPECT_NEAR(*r, 0.5, 1e-12);
    EXPECT_FALSE(find_ball_radius([](double R) { return 0.5 + R; }));
    EXPECT_FALSE(find_ball_radius([](double) { return 1.0; }));
}

TEST(BallRadius, SmallestRootOfQuadraticMap) {
    // Two fixed points; only the smaller one lies in (0, 1).
    auto Q = [](double R) { return 0.1 + 0.8 * R * R; };
    const double exact = (1.0 - std::sqrt(1.0 - 0.32)) / 1.6;
    auto r = find_ball_radius(Q);
    ASSERT_TRUE(r);
    EXPECT_NEAR(*r, exact, 1e-12);
    EXPECT_LE(std::abs(Q(*r) - *r), 1e-12);
}

TEST(Quoted, MismatchFlags) {
    const auto s = compare_quoted(sobolev_constant(1.0, 2), quoted_S1_2d());
    EXPECT_TRUE(s.mismatch);
    EXPECT_NEAR(s.quoted, 0.265563, 1e-6);
    const auto k = compare_quoted(trace_constant(4.0 / 3.0, 2), quoted_K43());
    EXPECT_TRUE(k.mismatch);
    EXPECT_FALSE(compare_quoted(1.0, 1.0 + 1e-12).mismatch);
}

TEST(Report, UnitBoundsEntries) {
    ConstantsInputs in;
    in.geom = unit_square_geom();
    in.exps.p = 2.0 + 0.5 / (coupled_upsilon(in.bounds) - 1.0);
    in.exps.ell = 5.0;
    in.norms = {1.0, 1.0, 0.5};
    const auto r = build_constants_report(in);
    ASSERT_TRUE(r.upsilon && r.p_max);
    EXPECT_NEAR((*r.p_max - 2.0) / 1e-8, 9.31, 0.01);
    EXPECT_TRUE(r.in_regime);
    EXPECT_LE(r.eps_max * 4.0 * (r.upsilon_U - 1.0), 4.0 * (1.0 + 1e-15));
    ASSERT_TRUE(r.Q1);
    EXPECT_GE(*r.Q1, 1.0);
    EXPECT_FALSE(r.smallness_holds);
    EXPECT_FALSE(r.ball_radius);
    EXPECT_TRUE(r.S_1_check && r.S_1_check->mismatch);
    EXPECT_TRUE(r.K_4_3_check && r.K_4_3_check->mismatch);
    const auto doc = report_entries(r);
    const auto text = kv_to_text(doc);
    EXPECT_NE(text.find("ball_radius = none"), std::string::npos);
    EXPECT_NE(text.find("S_1_mismatch = true"), std::string::npos);
    const auto json = Json::parse(kv_to_json(doc));
    EXPECT_TRUE(json["ball_radius"].is_null());
    EXPECT_EQ(json.size(), doc.size());
}

TEST(Report, Deterministic) {
    ConstantsInputs in;
    in.geom = unit_square_geom();
    in.exps.p = 3.0;
    const auto a = kv_to_text(report_entries(build_constants_report(in)));
    const auto b = kv_to_text(report_entries(build_constants_report(in)));
    EXPECT_EQ(a, b);
}

TEST(Exponents, Validation) {
    ExponentSet e;
    e.p = 1.0;
    EXPECT_THROW(e.validate(), DomainError);
    e.p = 3.0;
    e.ell = 1.5;
    EXPECT_THROW(e.validate(), DomainError);
    e.ell = 2.0;
    e.alpha = 6.0;
    EXPECT_THROW(e.validate(), DomainError);
    e.alpha = 6.5;
    EXPECT_NO_THROW(e.validate());
    CoefficientBounds b;
    b.k_lo = 2.0;
    EXPECT_THROW(b.validate(), DomainError);
}

TEST(Kv, NumberFormatting) {
    EXPECT_EQ(format_number(0.1), "0.10000000000000001");
    EXPECT_EQ(format_number(2.0), "2");
    Json j = {{"a", 0.1}, {"b", std::nan("")}, {"c", 3}};
    EXPECT_EQ(dump_json(j, -1), "{\"a\":0.10000000000000001,\"b\":null,\"c\":3}\n");
}
