#include "thermoflux/constants.hpp"

#include "thermoflux/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

namespace thermoflux::constants {

namespace {

constexpr double kPi = std::numbers::pi;

// Lanczos approximation, g = 7, n = 9.
constexpr double kLanczosG = 7.0;
constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

double lanczos_series(double xm1) {
    double a = kLanczos[0];
    for (std::size_t i = 1; i < kLanczos.size(); ++i) {
        a += kLanczos[i] / (xm1 + static_cast<double>(i));
    }
    return a;
}

double log_gamma_fn(double x) {
    if (x < 0.5) {
        return log_gamma_fn(x + 1.0) - std::log(x);
    }
    const double xm1 = x - 1.0;
    const double t = xm1 + kLanczosG + 0.5;
    return 0.5 * std::log(2.0 * kPi) + (xm1 + 0.5) * std::log(t) - t +
           std::log(lanczos_series(xm1));
}

// Gamma(a) / Gamma(b) without intermediate overflow.
double gamma_ratio(double a, double b) {
    if (a < 150.0 && b < 150.0) {
        return gamma_fn(a) / gamma_fn(b);
    }
    return std::exp(log_gamma_fn(a) - log_gamma_fn(b));
}

void require_dimension(int n) {
    if (n < 2) {
        throw DomainError("spatial dimension must be at least 2, got " + std::to_string(n));
    }
}

// S_q for 1 < q < n with q - 1 and n - q supplied separately so that
// exponents close to n keep their relative accuracy.
double sobolev_impl(double q, double qm1, double nmq, int n) {
    const double nd = n;
    const double ratio = gamma_fn(1.0 + nd / 2.0) * gamma_fn(nd) /
                         (gamma_fn(nd / q) * gamma_fn(1.0 + nd - nd / q));
    return std::pow(kPi, -0.5) * std::pow(nd, -1.0 / q) * std::pow(qm1 / nmq, 1.0 - 1.0 / q) *
           std::pow(ratio, 1.0 / nd);
}

double trace_impl(double q, double qm1, double nmq, int n) {
    const double nd = n;
    const double ratio = gamma_ratio(q * (nd - 1.0) / (2.0 * qm1), (nd - 1.0) / (2.0 * qm1));
    return std::pow(kPi, -qm1 / 2.0) * std::pow(qm1 / nmq, qm1) *
           std::pow(ratio, qm1 / (nd - 1.0));
}

double sobolev_limit(int n) {
    const double nd = n;
    return std::pow(kPi, -0.5) / nd * std::pow(gamma_fn(1.0 + nd / 2.0), 1.0 / nd);
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(name) + " must be finite and positive");
    }
}

void require_nonnegative(double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
        throw DomainError(std::string(name) + " must be finite and nonnegative");
    }
}

} // namespace

double gamma_fn(double x) {
    if (!(x > 0.0)) {
        throw DomainError("gamma_fn: argument must be positive");
    }
    if (x < 0.5) {
        return gamma_fn(x + 1.0) / x;
    }
    const double xm1 = x - 1.0;
    const double t = xm1 + kLanczosG + 0.5;
    // t^{x-1/2} e^{-t} split in two halves to postpone overflow.
    const double half = std::pow(t, (xm1 + 0.5) / 2.0);
    return std::sqrt(2.0 * kPi) * half * (half * std::exp(-t)) * lanczos_series(xm1);
}

double sobolev_constant(double q, int n) {
    require_dimension(n);
    if (q == 1.0) {
        return sobolev_limit(n);
    }
    if (!(q > 1.0) || !(q < n)) {
        throw DomainError("sobolev_constant: requires 1 <= q < n");
    }
    return sobolev_impl(q, q - 1.0, n - q, n);
}

double trace_constant(double q, int n) {
    require_dimension(n);
    if (!(q > 1.0) || !(q < n)) {
        throw DomainError("trace_constant: requires 1 < q < n");
    }
    return trace_impl(q, q - 1.0, n - q, n);
}

double poincare_product_constant(double q, int n) {
    require_dimension(n);
    if (q == 1.0) {
        if (n != 2) {
            throw DomainError("poincare_product_constant: q = 1 is only available for n = 2");
        }
        return 3.0 * sobolev_limit(2);
    }
    const double sq = sobolev_constant(q, n);
    return sq * (1.0 + 2.0 * std::sqrt(static_cast<double>(n)) * q * std::sin(kPi / q) *
                           std::pow(q - 1.0, -1.0 / q) / kPi);
}

double convex_poincare_constant(double q, double diameter) {
    require_positive(diameter, "diameter");
    if (q == 1.0) {
        return diameter / 2.0;
    }
    if (!(q > 1.0)) {
        throw DomainError("convex_poincare_constant: requires q >= 1");
    }
    return diameter * q * std::sin(kPi / q) * std::pow(q - 1.0, -1.0 / q) / (2.0 * kPi);
}

double unit_ball_volume(int n) {
    require_dimension(n);
    return std::pow(kPi, n / 2.0) / gamma_fn(n / 2.0 + 1.0);
}

double morrey_constant(double p, int n, double vol) {
    require_dimension(n);
    require_positive(vol, "vol");
    if (!(p > n)) {
        throw DomainError("morrey_constant: requires p > n");
    }
    const double nd = n;
    const double inv_pprime = 1.0 - 1.0 / p;
    return std::pow(nd, -1.0 / p) * std::pow(unit_ball_volume(n), -1.0 / nd) *
           std::pow((p - 1.0) / (p - nd), inv_pprime) * std::pow(vol, 1.0 / nd - 1.0 / p);
}

GehringConstants gehring_kappa(double B, double p, int n) {
    require_dimension(n);
    require_nonnegative(B, "B");
    if (!(p > 1.0)) {
        throw DomainError("gehring_kappa: requires p > 1");
    }
    const double nd = n;
    GehringConstants c;
    c.lambda = std::pow(2.0, 3.0 * nd * p) * std::pow(std::pow(B, 1.0 / p) + 1.0, p);
    c.kappa = (std::pow(8.0, nd) + 1.0) * c.lambda;
    return c;
}

double z_pole(double upsilon, int n) {
    require_dimension(n);
    if (!(upsilon > 1.0)) {
        throw DomainError("z_pole: requires upsilon > 1");
    }
    return 4.0 / ((n + 2.0) * (upsilon - 1.0));
}

ZFactors z_factors(double eps, double upsilon, int n) {
    const double pole = z_pole(upsilon, n);
    if (!(eps >= 0.0) || !(eps < pole)) {
        throw DomainError("z_factors: requires 0 <= eps < 4/((n+2)(upsilon-1))");
    }
    const double nd = n;
    const double denom = 4.0 - (nd + 2.0) * (upsilon - 1.0) * eps;
    if (!(denom > 0.0)) {
        throw DomainError("z_factors: eps at the pole");
    }
    const double scale = std::pow(2.0, nd * (1.0 + eps / 2.0));
    return {4.0 / denom * scale, upsilon * (4.0 + (nd + 2.0) * eps) / denom * scale};
}

double ExponentSet::alpha_or_default() const {
    if (alpha > 0.0) {
        return alpha;
    }
    if (!(p > 2.0)) {
        throw DomainError("alpha has no default for p <= 2");
    }
    return 4.0 * p / (p - 2.0);
}

void ExponentSet::validate() const {
    require_dimension(n);
    if (!(p > 1.0)) {
        throw DomainError("p must exceed 1");
    }
    if (!(ell >= 2.0)) {
        throw DomainError("ell must be at least 2");
    }
    require_positive(delta, "delta");
    if (!(s >= 2.0)) {
        throw DomainError("s must be at least 2");
    }
    require_nonnegative(nu3, "nu3");
    if (alpha != 0.0) {
        if (!(p > 2.0)) {
            throw DomainError("alpha is only meaningful for p > 2");
        }
        if (!(alpha > 2.0 * p / (p - 2.0))) {
            throw DomainError("alpha must exceed 2p/(p-2)");
        }
    }
}

void CoefficientBounds::validate() const {
    require_positive(a_lo, "a_lo");
    require_positive(k_lo, "k_lo");
    require_positive(sigma_lo, "sigma_lo");
    require_positive(b_lo, "b_lo");
    require_nonnegative(alpha_seebeck_hi, "alpha_seebeck_hi");
    require_nonnegative(gamma_hi, "gamma_hi");
    if (!(a_lo <= a_hi) || !(k_lo <= k_hi) || !(sigma_lo <= sigma_hi) || !(b_lo <= b_hi)) {
        throw DomainError("coefficient bounds must satisfy lower <= upper");
    }
    require_positive(a_hi, "a_hi");
    require_positive(k_hi, "k_hi");
    require_positive(sigma_hi, "sigma_hi");
    require_positive(b_hi, "b_hi");
}

void GeometrySummary::validate() const {
    require_positive(vol_omega, "vol_omega");
    require_positive(meas_boundary, "meas_boundary");
    require_nonnegative(meas_gamma, "meas_gamma");
    require_positive(diameter, "diameter");
    require_positive(r_sharp, "r_sharp");
    if (meas_gamma > meas_boundary * (1.0 + 1e-12)) {
        throw DomainError("meas_gamma exceeds meas_boundary");
    }
}

UpsilonThresholds upsilon_thresholds(const CoefficientBounds& bounds, double nu3, int n) {
    require_dimension(n);
    bounds.validate();
    require_nonnegative(nu3, "nu3");
    const double nd = n;
    const double cn = (std::pow(8.0, nd) + 1.0) * std::pow(2.0, 6.0 * nd);
    const double P = poincare_product_constant(2.0 * nd / (nd + 2.0), n);
    const double a = bounds.a_lo;
    const double A = bounds.a_hi;
    const double inner_I = 2.0 * P * std::sqrt(2.0 / a) * std::sqrt(4.0 * A * A / a + 1.0 + nu3 / 2.0);
    const double inner_U = 2.0 * P * std::sqrt(2.0 / a) * std::sqrt(8.0 * A * A / a + 2.0 + nu3 / 2.0);

    UpsilonThresholds t;
    t.B_interior = inner_I * inner_I;
    t.B_boundary = inner_U * inner_U;
    t.upsilon_I = cn * (inner_I + 1.0) * (inner_I + 1.0);
    t.upsilon_U = cn * (inner_U + 1.0) * (inner_U + 1.0);
    if (n == 2) {
        t.upsilon = coupled_upsilon(bounds);
    }
    return t;
}

double coupled_upsilon(const CoefficientBounds& bounds) {
    bounds.validate();
    const double s_lo = bounds.sigma_lo, s_hi = bounds.sigma_hi;
    const double k_lo = bounds.k_lo, k_hi = bounds.k_hi;
    const double worst = std::max(std::sqrt(4.0 * s_hi * s_hi + s_lo) / s_lo,
                                  std::sqrt(4.0 * k_hi * k_hi + k_lo) / k_lo);
    const double inner = 6.0 * std::sqrt(2.0) * sobolev_limit(2) * worst + 1.0;
    return 65.0 * 4096.0 * inner * inner;
}

LinfConstants linf_constants(double a_lo, double b_lo, const ExponentSet& exps,
                                 const GeometrySummary& geom) {
    require_positive(a_lo, "a_lo");
    require_positive(b_lo, "b_lo");
    require_positive(geom.vol_omega, "vol_omega");
    require_positive(geom.meas_boundary, "meas_boundary");
    const int n = exps.n;
    require_dimension(n);
    const double p = exps.p;
    if (!(p > n)) {
        throw DomainError("linf_constants: requires p > n");
    }
    const double alpha = exps.alpha_or_default();
    const double gap = alpha * (p - 2.0) - 2.0 * p;
    if (!(gap > 0.0)) {
        throw DomainError("linf_constants: requires alpha > 2p/(p-2)");
    }
    const double nd = n;
    LinfConstants c;
    c.q = 2.0 * alpha / (alpha + 2.0);
    const double qm1 = (alpha - 2.0) / (alpha + 2.0);
    const double nmq = ((nd - 2.0) * alpha + 2.0 * nd) / (alpha + 2.0);
    c.S_q = sobolev_impl(c.q, qm1, nmq, n);
    c.K_q = trace_impl(c.q, qm1, nmq, n);
    const double vol = geom.vol_omega;
    c.Zcal = std::pow(2.0, (alpha * (p - 2.0) + 2.0 * p) / gap) *
             std::pow(vol + geom.meas_boundary, gap / (4.0 * p * alpha)) * (c.S_q + c.K_q);
    const double vol_a = std::pow(vol, 1.0 / (2.0 * alpha));
    const double mixed = 1.0 / std::sqrt(a_lo * b_lo);
    c.Zcal1 = (vol_a / a_lo + mixed) * std::pow(vol, (p - 2.0) / (4.0 * p)) * c.Zcal;
    c.Zcal2 = (1.0 / b_lo + vol_a * mixed) * c.Zcal;
    return c;
}

SmallnessConstants smallness_constants(const SmallnessInputs& in) {
    const auto& b = in.bounds;
    b.validate();
    in.geom.validate();
    const double p = in.p;
    const double ell = in.ell;
    if (!(p > 2.0)) {
        throw DomainError("smallness function requires p > 2");
    }
    if (!(ell >= 2.0)) {
        throw DomainError("smallness function requires ell >= 2");
    }

    SmallnessConstants c;
    c.upsilon = coupled_upsilon(b);
    c.p_max = 2.0 + 1.0 / (c.upsilon - 1.0);
    c.in_regime = p < c.p_max;
    c.C_inf = morrey_constant(p, 2, in.geom.vol_omega);

    ExponentSet exps;
    exps.n = 2;
    exps.p = p;
    exps.ell = ell;
    exps.alpha = in.alpha;
    const auto sup = linf_constants(b.k_lo, b.b_lo, exps, in.geom);
    c.Zcal1 = sup.Zcal1;
    c.Zcal2 = sup.Zcal2;

    const double q2p = 2.0 * p / (2.0 * p - 1.0);
    c.K_2p = trace_impl(q2p, 1.0 / (2.0 * p - 1.0), (2.0 * p - 2.0) / (2.0 * p - 1.0), 2);

    const double ups = c.upsilon;
    const double base = p - 1.0 - ups * (p - 2.0);
    if (!(base > 0.0)) {
        return c;
    }
    const double D = std::pow(base, 1.0 / p);
    const double five = std::pow(5.0, 1.0 / p);
    const double vol = in.geom.vol_omega;
    const double rpow = std::pow(in.geom.r_sharp, 2.0 / p - 1.0);
    const double vol_half = std::pow(vol, 0.5 - 1.0 / p);
    const double lead1 = std::pow(1.0 + ups * (p - 1.0), 1.0 / p);
    const double lead2 = std::pow(std::pow(2.0, 3.0 * (p - 2.0) / 2.0) + ups * (p - 1.0), 1.0 / p);
    const double ellp = ell / (ell - 1.0);
    const double s2 = 2.0 * std::sqrt(2.0);

    const double M1 = s2 * five *
                      (std::pow(vol, (1.0 - 1.0 / p) / 2.0) * c.K_2p * rpow +
                       lead1 * std::sqrt(1.0 + b.sigma_lo)) /
                      (D * b.sigma_lo);
    const double M2 = s2 * five * b.sigma_hi * b.alpha_seebeck_hi *
                      (vol_half * rpow + lead2 * std::sqrt(1.0 + b.sigma_lo)) / (D * b.sigma_lo);
    const double M3 = 2.0 * five * std::pow(2.0, 2.0 - 3.0 / p) * rpow *
                      std::pow(b.gamma_hi, ellp / 2.0) *
                      std::pow(b.b_lo, -1.0 / (2.0 * (ell - 1.0))) / (D * std::sqrt(b.k_lo));
    const double M4 = 2.0 * five * lead1 * std::sqrt(2.0 / b.k_lo + 1.0) / (D * std::sqrt(b.k_lo));
    const double M5 = s2 * five * (rpow * vol_half + lead2 * std::sqrt(1.0 + b.k_lo)) / (D * b.k_lo);
    const double M12 = M1 + M2;
    const double M6 = b.alpha_seebeck_hi * (1.0 + M12) + M12 * M12;
    c.M1 = M1;
    c.M2 = M2;
    c.M3 = M3;
    c.M4 = M4;
    c.M5 = M5;
    c.M6 = M6;
    return c;
}

double smallness_Q(double R, const SmallnessInputs& in, const SmallnessConstants& c) {
    if (!(R >= 0.0)) {
        throw DomainError("smallness_Q: requires R >= 0");
    }
    if (!c.evaluable()) {
        throw DomainError("smallness_Q: M-constants not evaluable, p outside (2, p_max)");
    }
    const auto& b = in.bounds;
    const double p = in.p;
    const double ell = in.ell;
    const double ellp = ell / (ell - 1.0);
    const double the_ell = in.norms.theta_e_ell;
    const double the_lp = std::pow(in.norms.theta_e_lm1p, ell - 1.0);
    const double M3 = *c.M3, M4 = *c.M4, M5 = *c.M5, M6 = *c.M6;
    const double boundary = std::pow(2.0, ell - 2.0) * b.b_hi * M4 * std::pow(in.geom.meas_gamma, 1.0 / p);
    const double sC = b.sigma_hi * c.C_inf;

    double q = M3 * std::pow(the_ell, ell / 2.0);
    q += M4 * b.gamma_hi * the_lp;
    q += std::pow(b.gamma_hi / b.b_lo, 1.0 / (ell - 1.0)) * the_ell;
    q += boundary * std::pow(1.0 + c.Zcal2 * b.gamma_hi * the_lp, ell - 1.0);
    q += boundary * std::pow(c.Zcal1 * sC * M6, ell - 1.0) * std::pow(R, 2.0 * (ell - 1.0));
    q += std::pow(ellp * std::pow(in.geom.vol_omega, 1.0 - 2.0 / p) / (2.0 * b.b_lo * b.k_lo), 1.0 / ell) *
         std::pow(sC, 2.0 / ell) * std::pow(M6, 2.0 / ell) * std::pow(R, 4.0 / ell);
    q += sC * M5 * M6 * R * R;
    return q;
}

double smallness_Q(double R, const SmallnessInputs& in) {
    return smallness_Q(R, in, smallness_constants(in));
}

std::optional<double> find_ball_radius(const std::function<double(double)>& Q) {
    const double q1 = Q(1.0);
    if (!(q1 < 1.0)) {
        return std::nullopt;
    }
    auto f = [&](double r) { return Q(r) - r; };
    if (!(f(0.0) > 0.0)) {
        return 0.0;
    }
    // First sign change on a coarse grid, so the smallest root is the one refined.
    constexpr int kScan = 1024;
    double lo = 0.0, hi = 1.0;
    for (int i = 1; i <= kScan; ++i) {
        const double r = static_cast<double>(i) / kScan;
        if (f(r) <= 0.0) {
            hi = r;
            lo = static_cast<double>(i - 1) / kScan;
            break;
        }
    }
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (fm == 0.0 || !(mid > lo && mid < hi)) {
            break;
        }
        if (fm > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (std::abs(fm) <= 1e-13 && hi - lo <= 1e-15) {
            break;
        }
    }
    return mid;
}

std::optional<double> find_ball_radius(const SmallnessInputs& in) {
    const auto c = smallness_constants(in);
    if (!c.evaluable()) {
        return std::nullopt;
    }
    return find_ball_radius([&](double r) { return smallness_Q(r, in, c); });
}

QuotedValue compare_quoted(double formula, double quoted) {
    QuotedValue v;
    v.formula = formula;
    v.quoted = quoted;
    v.rel_diff = std::abs(formula - quoted) / std::abs(quoted);
    v.mismatch = v.rel_diff > 1e-9;
    return v;
}

double quoted_S1_2d() { return std::pow(kPi, -0.25) * std::pow(2.0, -1.5); }

double quoted_K43() { return 1.0 / kPi; }

ConstantsReport build_constants_report(const ConstantsInputs& in) {
    in.exps.validate();
    in.bounds.validate();
    in.geom.validate();

    ConstantsReport r;
    r.inputs = in;
    const int n = in.exps.n;
    const double nd = n;
    const double p = in.exps.p;

    r.S_1 = sobolev_constant(1.0, n);
    r.K_2n_over_n1 = trace_constant(2.0 * nd / (nd + 1.0), n);
    if (n == 2) {
        r.S_1_check = compare_quoted(r.S_1, quoted_S1_2d());
        r.K_4_3_check = compare_quoted(*r.K_2n_over_n1, quoted_K43());
    }
    r.P_sqrtn_q = poincare_product_constant(2.0 * nd / (nd + 2.0), n);

    const auto ups = upsilon_thresholds(in.bounds, in.exps.nu3, n);
    r.B_interior = ups.B_interior;
    const auto g = gehring_kappa(ups.B_interior, 2.0, n);
    r.kappa = g.kappa;
    r.lambda = g.lambda;
    r.upsilon_I = ups.upsilon_I;
    r.upsilon_U = ups.upsilon_U;
    r.upsilon = ups.upsilon;

    r.eps_max = std::min(in.exps.delta, z_pole(r.upsilon_U, n));
    r.eps = in.eps.value_or(r.eps_max / 2.0);
    const auto z = z_factors(r.eps, r.upsilon_U, n);
    r.Z1 = z.Z1;
    r.Z2 = z.Z2;

    if (r.upsilon) {
        r.p_max = 2.0 + 1.0 / (*r.upsilon - 1.0);
        r.in_regime = p > 2.0 && p < *r.p_max;
        if (!r.in_regime) {
            r.warnings.push_back("p outside (2, p_max): the existence regime does not certify this evaluation");
        }
    }
    r.g_small = in.norms.g_p < 1.0;
    if (in.geom.r_sharp_heuristic) {
        r.warnings.push_back("r_sharp is the mesh heuristic (half the minimum boundary-patch inradius)");
    }

    if (p > nd) {
        r.alpha = in.exps.alpha_or_default();
        r.C_inf = morrey_constant(p, n, in.geom.vol_omega);
        const auto sup = linf_constants(in.bounds.k_lo, in.bounds.b_lo, in.exps, in.geom);
        r.q_linf = sup.q;
        r.S_q = sup.S_q;
        r.K_q = sup.K_q;
        r.Zcal = sup.Zcal;
        r.Zcal1 = sup.Zcal1;
        r.Zcal2 = sup.Zcal2;
    } else {
        r.warnings.push_back("p <= n: Morrey constant, L-infinity constants and the smallness function are undefined");
    }

    if (n == 2 && p > 2.0) {
        SmallnessInputs s;
        s.bounds = in.bounds;
        s.p = p;
        s.ell = in.exps.ell;
        s.alpha = in.exps.alpha;
        s.geom = in.geom;
        s.norms = in.norms;
        const auto c = smallness_constants(s);
        r.M1 = c.M1;
        r.M2 = c.M2;
        r.M3 = c.M3;
        r.M4 = c.M4;
        r.M5 = c.M5;
        r.M6 = c.M6;
        if (c.evaluable()) {
            r.Q0 = smallness_Q(0.0, s, c);
            r.Q1 = smallness_Q(1.0, s, c);
            r.smallness_holds = *r.Q1 < 1.0;
            if (r.smallness_holds) {
                r.ball_radius = find_ball_radius([&](double x) { return smallness_Q(x, s, c); });
            }
        } else {
            r.warnings.push_back("p - 1 - upsilon (p - 2) <= 0: M1..M6 and Q are not evaluable");
        }
    }
    return r;
}

KvDocument report_entries(const ConstantsReport& r) {
    const auto& in = r.inputs;
    KvDocument d;
    auto num = [&](const std::string& k, double v) { d.push_back({k, v}); };
    auto opt = [&](const std::string& k, const std::optional<double>& v) { d.push_back({k, kv_optional(v)}); };
    auto flag = [&](const std::string& k, bool v) { d.push_back({k, v}); };
    auto quoted = [&](const std::string& k, const std::optional<QuotedValue>& q) {
        if (q) {
            num(k + "_quoted", q->quoted);
            num(k + "_rel_diff", q->rel_diff);
            flag(k + "_mismatch", q->mismatch);
        } else {
            d.push_back({k + "_quoted", KvValue{}});
            d.push_back({k + "_rel_diff", KvValue{}});
            d.push_back({k + "_mismatch", KvValue{}});
        }
    };

    d.push_back({"n", static_cast<long long>(in.exps.n)});
    num("p", in.exps.p);
    num("ell", in.exps.ell);
    num("delta", in.exps.delta);
    num("s", in.exps.s);
    num("alpha", r.alpha);
    num("nu3", in.exps.nu3);
    num("a_lo", in.bounds.a_lo);
    num("a_hi", in.bounds.a_hi);
    num("k_lo", in.bounds.k_lo);
    num("k_hi", in.bounds.k_hi);
    num("sigma_lo", in.bounds.sigma_lo);
    num("sigma_hi", in.bounds.sigma_hi);
    num("alpha_seebeck_hi", in.bounds.alpha_seebeck_hi);
    num("b_lo", in.bounds.b_lo);
    num("b_hi", in.bounds.b_hi);
    num("gamma_hi", in.bounds.gamma_hi);
    num("vol_omega", in.geom.vol_omega);
    num("meas_boundary", in.geom.meas_boundary);
    num("meas_gamma", in.geom.meas_gamma);
    num("diameter", in.geom.diameter);
    num("r_sharp", in.geom.r_sharp);
    flag("r_sharp_heuristic", in.geom.r_sharp_heuristic);
    num("theta_e_norm_ell", in.norms.theta_e_ell);
    num("theta_e_norm_lm1p", in.norms.theta_e_lm1p);
    num("g_norm_p", in.norms.g_p);

    num("S_1", r.S_1);
    quoted("S_1", r.S_1_check);
    opt("K_2n_over_n1", r.K_2n_over_n1);
    quoted("K_4_3", r.K_4_3_check);
    opt("q_linf", r.q_linf);
    opt("S_q", r.S_q);
    opt("K_q", r.K_q);
    num("P_sqrtn_q", r.P_sqrtn_q);
    opt("C_inf", r.C_inf);
    num("B_interior", r.B_interior);
    num("kappa", r.kappa);
    num("lambda", r.lambda);
    num("upsilon_I", r.upsilon_I);
    num("upsilon_U", r.upsilon_U);
    opt("upsilon", r.upsilon);
    num("eps_max", r.eps_max);
    num("eps", r.eps);
    opt("p_max", r.p_max);
    flag("in_regime", r.in_regime);
    num("Z1", r.Z1);
    num("Z2", r.Z2);
    opt("Zcal", r.Zcal);
    opt("Zcal1", r.Zcal1);
    opt("Zcal2", r.Zcal2);
    opt("M1", r.M1);
    opt("M2", r.M2);
    opt("M3", r.M3);
    opt("M4", r.M4);
    opt("M5", r.M5);
    opt("M6", r.M6);
    opt("Q0", r.Q0);
    opt("Q1", r.Q1);
    flag("smallness_holds", r.smallness_holds);
    flag("g_small", r.g_small);
    opt("ball_radius", r.ball_radius);
    std::string warnings;
    for (const auto& w : r.warnings) {
        if (!warnings.empty()) {
            warnings += "; ";
        }
        warnings += w;
    }
    d.push_back({"warnings", warnings});
    return d;
}

} // namespace thermoflux::constants
