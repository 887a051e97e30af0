#include "thermoflux/error.hpp"
#include "thermoflux/verify.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace thermoflux;
using namespace thermoflux::verify;

namespace {

SquareSides left_right() {
    SquareSides s;
    s.left = true;
    s.right = true;
    return s;
}

ProblemData small_data() {
    ProblemData d;
    d.ell = 5.0;
    d.g = [](const Point& x) { return 0.2 * (1.0 - 2.0 * x.x); };
    d.theta_e = [](const Point& x) { return 1.0 + 0.2 * x.x; };
    return d;
}

CoefficientModel small_coeffs() {
    ConstantIsotropicParams p;
    p.seebeck = 0.1;
    return constant_isotropic(p);
}

ProblemData equilibrium(double ell, double te) {
    ProblemData d = zero_data(ell);
    d.theta_e = [te](const Point&) { return te; };
    return d;
}

std::string describe(const AuditReport& r) {
    std::ostringstream os;
    for (const auto& c : r.checks) {
        os << c.name << " lhs=" << c.lhs << " rhs=" << c.rhs << " pass=" << c.pass << " applicable=" << c.applicable
           << " " << c.notes << "\n";
    }
    os << "entropy min=" << r.entropy.min << " negative=" << r.entropy.negative << "\n";
    return os.str();
}

const BoundCheckResult& find(const AuditReport& r, const std::string& name) {
    for (const auto& c : r.checks) {
        if (c.name == name) {
            return c;
        }
    }
    throw std::runtime_error("missing check " + name);
}

} // namespace

TEST(BoundCheck, PassRuleUsesRelativeSlack) {
    EXPECT_TRUE(make_check("a", 1.0, 1.0).pass);
    EXPECT_TRUE(make_check("a", 1.0 + 5e-10, 1.0).pass);
    EXPECT_FALSE(make_check("a", 1.0 + 2e-9, 1.0).pass);
    EXPECT_TRUE(make_check("a", 1e6 * (1.0 + 5e-10), 1e6).pass);
    EXPECT_FALSE(make_check("a", 1e6 * (1.0 + 2e-9), 1e6).pass);
    EXPECT_DOUBLE_EQ(make_check("a", 2.0, 5.0).margin, 3.0);
}

TEST(Audit, ZeroDataPassesEverything) {
    P1Space space(unit_square_mesh(8, left_right()));
    const auto coeffs = small_coeffs();
    const auto data = zero_data(5.0);
    const auto sol = picard_solve(space, coeffs, data);
    const auto rep = run_audits(space, coeffs, data, sol.theta, sol.phi);
    EXPECT_TRUE(rep.pass()) << describe(rep);
    EXPECT_EQ(find(rep, "energy_thermal").lhs, 0.0);
    EXPECT_EQ(find(rep, "energy_thermal").rhs, 0.0);
    EXPECT_EQ(find(rep, "linf_thermal").lhs, 0.0);
    EXPECT_EQ(find(rep, "linf_thermal").rhs, 1.0);
}

TEST(Audit, LinearEquilibriumEnergyIsAnEquality) {
    // Theta = theta_e = 3 with ell = 2: both sides equal b |Gamma| theta_e^2 / 2.
    P1Space space(unit_square_mesh(6, left_right()));
    ConstantIsotropicParams p;
    p.emission = p.absorption = 0.7;
    const auto coeffs = constant_isotropic(p);
    const auto data = equilibrium(2.0, 3.0);
    const Field theta(space.num_nodes(), 3.0), phi(space.num_nodes(), 0.0);
    const auto c = check_energy_estimate(space, coeffs, data, theta, phi);
    const double expect = 0.7 * 2.0 * 9.0 / 2.0;
    EXPECT_NEAR(c.lhs, expect, 1e-12);
    EXPECT_NEAR(c.rhs, expect, 1e-12);
    EXPECT_TRUE(c.pass);
}

TEST(Audit, QuarticEquilibriumHasClosedFormSides) {
    P1Space space(unit_square_mesh(8, left_right()));
    const auto coeffs = constant_isotropic({});
    const auto data = equilibrium(5.0, 2.0);
    const auto sol = picard_solve(space, coeffs, data);
    for (double v : sol.theta) {
        ASSERT_NEAR(v, 2.0, 1e-8);
    }
    const auto rep = run_audits(space, coeffs, data, sol.theta, sol.phi);
    EXPECT_TRUE(rep.pass()) << describe(rep);
    // |Gamma| = 2: lhs = (4/5) 2^5 |Gamma| equals the radiation side exactly.
    const auto& e = find(rep, "energy_thermal");
    EXPECT_NEAR(e.lhs, 0.8 * 32.0 * 2.0, 1e-9);
    EXPECT_NEAR(e.rhs, 0.8 * 32.0 * 2.0, 1e-9);
    // Zcal2 ||theta_e^4||_{p, Gamma} with ||16||_{p} = 16 |Gamma|^{1/p}.
    const auto& s = find(rep, "linf_thermal");
    ASSERT_TRUE(s.applicable);
    double Zcal2 = 0.0, p = 0.0;
    for (const auto& [k, v] : s.inputs) {
        if (k == "Zcal2") Zcal2 = v;
        if (k == "p") p = v;
    }
    EXPECT_NEAR(s.lhs, 2.0, 1e-8);
    EXPECT_NEAR(s.rhs / (1.0 + Zcal2 * 16.0 * std::pow(2.0, 1.0 / p)), 1.0, 1e-12);
}

TEST(Audit, SmallDataSolvePasses) {
    P1Space space(unit_square_mesh(16, left_right()));
    const auto coeffs = small_coeffs();
    const auto data = small_data();
    const auto sol = picard_solve(space, coeffs, data);
    ASSERT_TRUE(sol.report.converged);
    const auto rep = run_audits(space, coeffs, data, sol.theta, sol.phi);
    EXPECT_GT(find(rep, "energy_thermal").margin, 0.0);
    EXPECT_TRUE(find(rep, "energy_thermal").pass);
    EXPECT_TRUE(find(rep, "linf_thermal").pass);
    EXPECT_TRUE(find(rep, "gradient_thermal_eps0").pass);
    EXPECT_TRUE(find(rep, "gradient_thermal_eps_half").pass);
    EXPECT_NE(find(rep, "gradient_thermal_eps_half").notes.find("conditional on r_sharp"), std::string::npos);
    EXPECT_TRUE(rep.entropy.pass());
    EXPECT_GE(rep.entropy.min, -1e-12);
}

TEST(Audit, ElectricEnergyBoundFailsWithWholeSpaceTraceConstant) {
    // Uniform current through the square: phi ~ 0.2 (1/2 - x), so ||grad phi||_2 ~ 0.2,
    // while |Omega|^{1/4} K_{4/3} ||g||_{2, Gamma_N} = pi^{-1/3} 0.2 sqrt(2) ~ 0.193.
    P1Space space(unit_square_mesh(16, left_right()));
    const auto coeffs = constant_isotropic({});
    auto data = zero_data(5.0);
    data.g = [](const Point& x) { return 0.2 * (1.0 - 2.0 * x.x); };
    const Field theta(space.num_nodes(), 1.0);
    const Field phi = solve_electric(space, coeffs, theta, data);
    const auto c = check_electric_energy(space, coeffs, data, theta, phi);
    EXPECT_NEAR(c.lhs, 0.2, 1e-12);
    EXPECT_NEAR(c.rhs, std::pow(M_PI, -1.0 / 3.0) * 0.2 * std::sqrt(2.0), 1e-12);
    EXPECT_FALSE(c.pass);
}

TEST(Audit, GradientEstimateRejectsMarginOutsideRange) {
    P1Space space(unit_square_mesh(4, left_right()));
    const auto coeffs = small_coeffs();
    const auto data = small_data();
    const Field theta(space.num_nodes(), 1.0), phi(space.num_nodes(), 0.0);
    const double em = gradient_eps_max(1.0, 1.0, data);
    EXPECT_THROW(check_gradient_estimate(space, coeffs, data, theta, phi, -1e-3), DomainError);
    EXPECT_THROW(check_gradient_estimate(space, coeffs, data, theta, phi, em), DomainError);
    EXPECT_NO_THROW(check_gradient_estimate(space, coeffs, data, theta, phi, em / 2.0));
}

TEST(Audit, GradientBoundIsMonotoneInBoundaryData) {
    P1Space space(unit_square_mesh(6, left_right()));
    auto coeffs = small_coeffs();
    const Field theta = [&] {
        Field f;
        for (const auto& x : space.mesh().nodes) f.push_back(1.0 + 0.3 * x.x * x.y);
        return f;
    }();
    const Field phi(space.num_nodes(), 0.1);
    double prev = 0.0;
    for (double b_hi : {1.0, 2.0, 4.0}) {
        coeffs.bounds.b_hi = b_hi;
        const double rhs = check_gradient_estimate(space, coeffs, small_data(), theta, phi, 0.0).rhs;
        EXPECT_GE(rhs, prev);
        prev = rhs;
    }
    coeffs.bounds.b_hi = 1.0;
    prev = 0.0;
    for (double scale : {0.5, 1.0, 2.0}) {
        auto data = small_data();
        data.theta_e = [scale](const Point& x) { return scale * (1.0 + 0.2 * x.x); };
        const double rhs = check_gradient_estimate(space, coeffs, data, theta, phi, 0.0).rhs;
        EXPECT_GE(rhs, prev);
        prev = rhs;
    }
    prev = 0.0;
    for (double scale : {0.5, 1.0, 2.0}) {
        auto data = small_data();
        data.g = [scale](const Point& x) { return scale * (1.0 - 2.0 * x.x); };
        const double rhs = check_electric_gradient(space, coeffs, data, theta, phi, 0.0).rhs;
        EXPECT_GE(rhs, prev);
        prev = rhs;
    }
}

TEST(Audit, ChecksDoNotDependOnCallOrder) {
    P1Space space(unit_square_mesh(8, left_right()));
    const auto coeffs = small_coeffs();
    const auto data = small_data();
    const auto sol = picard_solve(space, coeffs, data);
    const auto a = run_audits(space, coeffs, data, sol.theta, sol.phi);
    const auto b = run_audits(space, coeffs, data, sol.theta, sol.phi);
    ASSERT_EQ(a.checks.size(), b.checks.size());
    for (std::size_t i = 0; i < a.checks.size(); ++i) {
        EXPECT_EQ(a.checks[i].lhs, b.checks[i].lhs);
        EXPECT_EQ(a.checks[i].rhs, b.checks[i].rhs);
    }
    const auto j = audit_to_json(a);
    EXPECT_EQ(j["checks"].size(), a.checks.size());
    EXPECT_TRUE(j["checks"][0].contains("margin"));
}

TEST(Entropy, VanishesForConstantFields) {
    P1Space space(unit_square_mesh(4, left_right()));
    const auto a = entropy_audit(space, small_coeffs(), Field(space.num_nodes(), 2.0), Field(space.num_nodes(), 1.0));
    EXPECT_EQ(a.excluded, 0);
    for (double s : a.sigma_s) {
        EXPECT_EQ(s, 0.0);
    }
}

TEST(Entropy, ZeroCurrentLeavesHeatConductionTerm) {
    P1Space space(unit_square_mesh(4, left_right()));
    const auto coeffs = small_coeffs();
    Field theta, phi;
    for (const auto& x : space.mesh().nodes) {
        theta.push_back(2.0 + x.x);
        phi.push_back(-0.1 * (2.0 + x.x));
    }
    const auto a = entropy_audit(space, coeffs, theta, phi);
    for (std::size_t i = 0; i < a.elements.size(); ++i) {
        const double T = space.element_mean(theta, a.elements[i]);
        EXPECT_NEAR(a.sigma_s[i], 1.0 / (T * T), 1e-14);
    }
}

TEST(Entropy, ExcludesNonPositiveTemperatures) {
    P1Space space(unit_square_mesh(4, left_right()));
    Field theta;
    for (const auto& x : space.mesh().nodes) {
        theta.push_back(x.x - 0.5);
    }
    const auto a = entropy_audit(space, small_coeffs(), theta, Field(space.num_nodes(), 0.0));
    EXPECT_GT(a.excluded, 0);
    EXPECT_EQ(static_cast<int>(a.elements.size()) + a.excluded, space.num_triangles());
}

TEST(Mms, LinearFieldsAreReproduced) {
    MmsCase c;
    c.theta = Expression::parse("1 + 0.5*x + 0.25*y");
    c.phi = Expression::parse("0.3*x - 0.2*y");
    c.ell = 2.0;
    c.levels = 2;
    c.picard.tol = 1e-12;
    c.picard.compute_ball = false;
    const auto r = mms_convergence(unit_square_mesh(4, left_right()), small_coeffs(), c);
    for (const auto& row : r.rows) {
        EXPECT_LT(std::max({row.err_h1_theta, row.err_l2_theta, row.err_h1_phi, row.err_l2_phi}), 1e-8);
    }
    EXPECT_TRUE(r.pass());
}

TEST(Mms, SineSolutionConvergesAtOptimalRates) {
    MmsCase c;
    c.theta = Expression::parse("sin(pi*x)*sin(pi*y) + 2");
    c.phi = Expression::parse("0.1*cos(pi*x)*cos(pi*y)");
    c.picard.tol = 1e-11;
    c.picard.compute_ball = false;
    const auto r = mms_convergence(unit_square_mesh(8, left_right()), small_coeffs(), c);
    std::ostringstream os;
    write_mms_csv(r, os);
    EXPECT_TRUE(r.pass()) << os.str();
    EXPECT_TRUE(r.monotone);
}

TEST(Mms, AnisotropicConductivityKeepsRates) {
    MmsCase c;
    c.theta = Expression::parse("sin(pi*x)*sin(pi*y) + 2");
    c.phi = Expression::parse("0.1*cos(pi*x)*cos(pi*y)");
    c.picard.tol = 1e-11;
    c.picard.compute_ball = false;
    ConstantIsotropicParams p;
    p.seebeck = 0.1;
    p.sigma_yy = 2.0;
    const auto r = mms_convergence(unit_square_mesh(8, left_right()), constant_isotropic(p), c);
    std::ostringstream os;
    write_mms_csv(r, os);
    EXPECT_TRUE(r.pass()) << os.str();
}

TEST(Mms, CsvHasHeaderAndBlankFirstRates) {
    MmsResult r;
    MmsLevel a;
    a.h = 0.5;
    r.rows.push_back(a);
    std::ostringstream os;
    write_mms_csv(r, os);
    EXPECT_EQ(os.str(), "level,h,err_h1_theta,err_l2_theta,err_h1_phi,err_l2_phi,rate_h1,rate_l2\n0,0.5,0,0,0,0,,\n");
}
