#pragma once

// Closed-form embedding constants, reverse-Hoelder thresholds and the
// smallness function used by the existence argument for the coupled
// thermoelectric problem. Every function here is pure.

#include "thermoflux/kv.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace thermoflux::constants {

/// Gamma function for x > 0 (Lanczos, g = 7). Throws DomainError for x <= 0.
double gamma_fn(double x);

/// Best constant S_q of W^{1,q} -> L^{q*} in R^n, 1 <= q < n.
/// For q == 1 the limit constant pi^{-1/2} n^{-1} Gamma(1+n/2)^{1/n} is used.
double sobolev_constant(double q, int n);

/// Best constant K_q of the trace embedding W^{1,q} -> L^{q_*}(boundary), 1 < q < n.
double trace_constant(double q, int n);

/// Constant of the localized Sobolev-Poincare estimate on cubes,
/// P = S_q (1 + 2 sqrt(n) q sin(pi/q) (q-1)^{-1/q} / pi) for q > 1 and 3 S_1 for (q, n) = (1, 2).
double poincare_product_constant(double q, int n);

/// Upper bound of the Poincare constant of a convex domain of diameter d:
/// d q sin(pi/q) (q-1)^{-1/q} / (2 pi), and d/2 for q = 1.
double convex_poincare_constant(double q, double diameter);

/// Morrey-Sobolev embedding constant C_inf of W^{1,p}(Omega) -> L^inf(Omega), p > n.
double morrey_constant(double p, int n, double vol);

/// Volume of the unit ball in R^n.
double unit_ball_volume(int n);

struct GehringConstants {
    double kappa = 0.0;   ///< (8^n + 1) 2^{3np} (B^{1/p} + 1)^p
    double lambda = 0.0;  ///< 2^{3np} (B^{1/p} + 1)^p, the Calderon-Zygmund level factor
};

GehringConstants gehring_kappa(double B, double p, int n);

struct ZFactors {
    double Z1 = 0.0;
    double Z2 = 0.0;
};

/// 4 / ((n+2)(upsilon-1)); the integrability margin must stay strictly below it.
double z_pole(double upsilon, int n);

ZFactors z_factors(double eps, double upsilon, int n);

/// Exponents and free parameters of an estimate evaluation.
struct ExponentSet {
    int n = 2;
    double p = 2.5;
    double ell = 2.0;
    double delta = 1.0;
    double s = 2.0;
    double alpha = 0.0;  ///< 0 selects the default 4p/(p-2)
    double nu3 = 0.0;

    /// alpha, or 4p/(p-2) when unset.
    double alpha_or_default() const;
    /// Throws DomainError when an invariant is violated.
    void validate() const;
};

struct CoefficientBounds {
    double a_lo = 1.0, a_hi = 1.0;          ///< generic leading tensor (A)
    double k_lo = 1.0, k_hi = 1.0;          ///< thermal conductivity
    double sigma_lo = 1.0, sigma_hi = 1.0;  ///< electrical conductivity
    double alpha_seebeck_hi = 1.0;          ///< sup |alpha_s|
    double b_lo = 1.0, b_hi = 1.0;          ///< boundary emission factor f_lambda
    double gamma_hi = 1.0;                  ///< sup |gamma|

    void validate() const;
};

struct GeometrySummary {
    double vol_omega = 0.0;
    double meas_boundary = 0.0;
    double meas_gamma = 0.0;
    double meas_gamma_n = 0.0;
    double diameter = 0.0;
    double r_sharp = 0.0;
    bool r_sharp_heuristic = true;  ///< r_sharp came from the mesh heuristic, not the user
    bool convex = true;

    void validate() const;
};

struct UpsilonThresholds {
    double B_interior = 0.0;  ///< reverse-Hoelder constant of the interior estimate
    double B_boundary = 0.0;  ///< same near the boundary
    double upsilon_I = 0.0;
    double upsilon_U = 0.0;
    std::optional<double> upsilon;  ///< coupled-problem threshold, n = 2 only
};

UpsilonThresholds upsilon_thresholds(const CoefficientBounds& bounds, double nu3, int n);

/// Coupled-problem threshold for n = 2 built from the k and sigma bounds.
double coupled_upsilon(const CoefficientBounds& bounds);

struct LinfConstants {
    double q = 0.0;  ///< 2 alpha / (alpha + 2)
    double S_q = 0.0;
    double K_q = 0.0;
    double Zcal = 0.0;
    double Zcal1 = 0.0;
    double Zcal2 = 0.0;
};

/// Constants of the L-infinity bound, for leading coefficient bound a_lo and
/// boundary growth bound b_lo. Requires p > n and alpha > 2p/(p-2).
LinfConstants linf_constants(double a_lo, double b_lo, const ExponentSet& exps,
                                 const GeometrySummary& geom);

/// Norms of the boundary data entering the smallness function.
struct DataNorms {
    double theta_e_ell = 0.0;   ///< ||theta_e||_{ell, Gamma}
    double theta_e_lm1p = 0.0;  ///< ||theta_e||_{(ell-1)p, Gamma}
    double g_p = 0.0;           ///< ||g||_{p, Gamma_N}
};

struct SmallnessInputs {
    CoefficientBounds bounds;
    double p = 2.0;
    double ell = 2.0;
    double alpha = 0.0;  ///< 0 selects 4p/(p-2)
    GeometrySummary geom;
    DataNorms norms;
};

struct SmallnessConstants {
    double upsilon = 0.0;
    double p_max = 0.0;
    bool in_regime = false;  ///< 2 < p < p_max
    double C_inf = 0.0;
    double Zcal1 = 0.0;  ///< at (k_lo, b_lo)
    double Zcal2 = 0.0;
    double K_2p = 0.0;   ///< K_{2p/(2p-1)}
    std::optional<double> M1, M2, M3, M4, M5, M6;

    bool evaluable() const { return M1 && M2 && M3 && M4 && M5 && M6; }
};

/// M1..M6 and the auxiliary constants of the self-map bound. M-constants are
/// empty when p - 1 - upsilon (p - 2) <= 0 (outside the admissible range).
SmallnessConstants smallness_constants(const SmallnessInputs& in);

/// The self-map bound Q(R). Throws DomainError when M1..M6 are not evaluable.
double smallness_Q(double R, const SmallnessInputs& in, const SmallnessConstants& c);
double smallness_Q(double R, const SmallnessInputs& in);

/// Smallest R in (0, 1) with Q(R) = R, located by a coarse scan followed by
/// bisection. Empty when Q(1) >= 1.
std::optional<double> find_ball_radius(const std::function<double(double)>& Q);
std::optional<double> find_ball_radius(const SmallnessInputs& in);

/// A formula value next to a special value quoted elsewhere for the same constant.
struct QuotedValue {
    double formula = 0.0;
    double quoted = 0.0;
    double rel_diff = 0.0;
    bool mismatch = false;  ///< rel_diff > 1e-9
};

QuotedValue compare_quoted(double formula, double quoted);

/// pi^{-1/4} 2^{-3/2}, the value quoted for the two-dimensional S_1.
double quoted_S1_2d();
/// 1/pi, the value quoted for K_{4/3}.
double quoted_K43();

struct ConstantsInputs {
    CoefficientBounds bounds;
    ExponentSet exps;
    GeometrySummary geom;
    DataNorms norms;
    std::optional<double> eps;  ///< margin for Z1/Z2; default eps_max / 2
};

struct ConstantsReport {
    ConstantsInputs inputs;
    double alpha = 0.0;  ///< resolved alpha

    double S_1 = 0.0;
    std::optional<QuotedValue> S_1_check;  ///< n = 2 only
    std::optional<double> K_2n_over_n1;
    std::optional<QuotedValue> K_4_3_check;
    std::optional<double> q_linf, S_q, K_q;
    double P_sqrtn_q = 0.0;
    std::optional<double> C_inf;
    double B_interior = 0.0;
    double kappa = 0.0;
    double lambda = 0.0;
    double upsilon_I = 0.0;
    double upsilon_U = 0.0;
    std::optional<double> upsilon;
    double eps_max = 0.0;
    double eps = 0.0;
    std::optional<double> p_max;
    bool in_regime = false;
    double Z1 = 0.0, Z2 = 0.0;
    std::optional<double> Zcal, Zcal1, Zcal2;
    std::optional<double> M1, M2, M3, M4, M5, M6;
    std::optional<double> Q0, Q1;
    bool smallness_holds = false;
    bool g_small = false;
    std::optional<double> ball_radius;
    std::vector<std::string> warnings;
};

ConstantsReport build_constants_report(const ConstantsInputs& in);

/// Ordered key/value view of the report (inputs echoed first).
KvDocument report_entries(const ConstantsReport& report);

} // namespace thermoflux::constants
