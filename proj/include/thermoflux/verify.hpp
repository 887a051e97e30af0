#pragma once

// Audits of discrete solutions: a-priori energy, L-infinity and gradient
// estimates, the entropy production sign, and manufactured-solution rates.

#include "thermoflux/coupling.hpp"
#include "thermoflux/expression.hpp"
#include "thermoflux/kv.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace thermoflux::verify {

struct BoundCheckResult {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;  ///< rhs - lhs
    bool pass = false;    ///< margin >= -1e-9 max(1, |rhs|)
    bool applicable = true;
    std::string notes;
    std::vector<std::pair<std::string, double>> inputs;
};

BoundCheckResult make_check(std::string name, double lhs, double rhs, std::string notes = {});

struct AuditOptions {
    double s = 2.0;                   ///< integrability of g in the energy estimate
    std::optional<double> poincare;   ///< replaces the convex-domain Poincare bound
};

// In every check below, (theta, phi) is the audited solution and the
// coefficients are frozen at theta, so the thermal problem reads
// A = k(theta), b(T) = f_lambda(theta) |T|^{ell-2} T, h = gamma(theta) theta_e^{ell-1},
// flux = -sigma(theta) (alpha_s(theta) (theta + phi) grad theta + phi grad phi), f = g = 0,
// and the electric one A = sigma(theta), flux = -alpha_s sigma grad theta with data g.

/// Energy estimate of the thermal problem (radiative boundary present).
BoundCheckResult check_energy_estimate(const P1Space& space, const CoefficientModel& coeffs,
                                       const ProblemData& data, const Field& theta, const Field& phi,
                                       const AuditOptions& opts = {});

/// Energy estimate of the zero-mean electric Neumann problem. The trace
/// constant K_q is the whole-space one, and the bound can fail on bounded
/// domains (a uniform current through the unit square already violates it),
/// so run_audits leaves it out.
BoundCheckResult check_electric_energy(const P1Space& space, const CoefficientModel& coeffs,
                                       const ProblemData& data, const Field& theta, const Field& phi,
                                       const AuditOptions& opts = {});

/// L-infinity bound of the thermal problem. Inapplicable when p <= 2 or a
/// volume source is present.
BoundCheckResult check_linf_bound(const P1Space& space, const CoefficientModel& coeffs, const ProblemData& data,
                              const Field& theta, const Field& phi);

/// Higher-integrability gradient bound at margin eps in [0, eps_max).
/// Throws DomainError outside that range. The result depends on r_sharp,
/// which the notes record.
BoundCheckResult check_gradient_estimate(const P1Space& space, const CoefficientModel& coeffs,
                                         const ProblemData& data, const Field& theta, const Field& phi, double eps);

/// Same bound for the electric Neumann problem, with the g-only boundary term.
BoundCheckResult check_electric_gradient(const P1Space& space, const CoefficientModel& coeffs,
                                         const ProblemData& data, const Field& theta, const Field& phi, double eps);

/// min(delta, 4 / ((n+2)(upsilon_U - 1))) for the leading bounds (a_lo, a_hi).
double gradient_eps_max(double a_lo, double a_hi, const ProblemData& data);

struct EntropyAudit {
    std::vector<int> elements;         ///< triangles with mean theta > 0
    std::vector<double> sigma_s;       ///< entropy production per included element, W K^-1 m^-3
    double min = 0.0;
    int negative = 0;                  ///< entries below -1e-12
    int excluded = 0;

    bool pass() const { return negative == 0; }
};

/// sigma_s = grad theta^T k grad theta / theta^2 + (alpha_s grad theta + grad phi)^T sigma
/// (alpha_s grad theta + grad phi) / theta per element, coefficients at (centroid, mean theta).
EntropyAudit entropy_audit(const P1Space& space, const CoefficientModel& coeffs, const Field& theta,
                           const Field& phi);

struct AuditReport {
    std::vector<BoundCheckResult> checks;
    EntropyAudit entropy;

    /// Every applicable check passes and the entropy audit has no negative entry.
    bool pass() const;
};

/// All checks at eps = 0 and eps = eps_max / 2, plus the entropy audit.
AuditReport run_audits(const P1Space& space, const CoefficientModel& coeffs, const ProblemData& data,
                       const Field& theta, const Field& phi, const AuditOptions& opts = {});

Json audit_to_json(const AuditReport& report);

struct MmsCase {
    Expression theta = Expression::constant(0.0);
    Expression phi = Expression::constant(0.0);
    double ell = 2.0;
    int levels = 3;
    double fd_step = 1e-6;
    PicardOptions picard;
};

struct MmsLevel {
    int level = 0;
    double h = 0.0;  ///< longest edge
    double err_h1_theta = 0.0, err_l2_theta = 0.0;
    double err_h1_phi = 0.0, err_l2_phi = 0.0;
    std::optional<double> rate_h1, rate_l2;  ///< minimum over both fields
    bool converged = false;
};

struct MmsResult {
    std::vector<MmsLevel> rows;
    bool monotone = true;

    /// Rates of every refined level reach (h1_min, l2_min), or every error is below `exact_tol`.
    bool pass(double h1_min = 0.9, double l2_min = 1.8, double exact_tol = 1e-8) const;
};

/// Manufactured solutions: theta_e is set to the exact temperature on Gamma
/// and the remaining residual of both weak forms at the exact fields enters as
/// extra loads, with first derivatives by central differences. The base mesh
/// is refined uniformly `levels - 1` times.
MmsResult mms_convergence(const TriMesh& base, const CoefficientModel& coeffs, const MmsCase& mms);

void write_mms_csv(const MmsResult& result, std::ostream& out);

} // namespace thermoflux::verify
