#include "thermoflux/verify.hpp"

#include "thermoflux/error.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace thermoflux::verify {

namespace {

constexpr int kDim = 2;

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

double length(const Vec2& v) { return std::sqrt(dot(v, v)); }

double interpolate(const TriMesh& mesh, const Field& f, const EdgeQuadPoint& q) {
    const auto& be = mesh.boundary_edges[idx(q.edge)];
    return q.wa * f[idx(be.a)] + q.wb * f[idx(be.b)];
}

double sup_abs(const Field& f) {
    double m = 0.0;
    for (double v : f) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

/// Element-frozen flux of the thermal problem at the element means.
Vec2 thermal_flux(const P1Space& space, const CoefficientModel& c, const Field& theta, const Field& phi, int t) {
    const Point x = space.centroid(t);
    const double T = space.element_mean(theta, t);
    const double P = space.element_mean(phi, t);
    const Vec2 gt = space.gradient(theta, t);
    const Vec2 gp = space.gradient(phi, t);
    const double a = c.seebeck(x, T) * (T + P);
    const Vec2 s = c.sigma(x, T).apply({a * gt.x + P * gp.x, a * gt.y + P * gp.y});
    return {-s.x, -s.y};
}

Vec2 electric_flux(const P1Space& space, const CoefficientModel& c, const Field& theta, int t) {
    const Point x = space.centroid(t);
    const double T = space.element_mean(theta, t);
    const Vec2 s = c.sigma(x, T).apply(space.gradient(theta, t));
    const double a = c.seebeck(x, T);
    return {-a * s.x, -a * s.y};
}

/// Absorbed flux h = gamma(theta) theta_e^{ell-1} at a quadrature point of Gamma.
double absorbed(const P1Space& space, const CoefficientModel& c, const ProblemData& d, const Field& theta,
                const EdgeQuadPoint& q) {
    return c.absorption(q.x, interpolate(space.mesh(), theta, q)) * std::pow(d.theta_e(q.x), d.ell - 1.0);
}

double poincare(double q, const P1Space& space, const AuditOptions& opts) {
    return opts.poincare ? *opts.poincare : constants::convex_poincare_constant(q, space.geometry().diameter);
}

/// max{1 + P_q 2^{(n-1)(1-1/q)}, P_q |Gamma|^{1/q - 1/ell}}, the factor turning S_q, K_q
/// into constants for the norm ||grad v||_q + ||v||_{ell, Gamma}.
double sl_factor(double q, double ell, const P1Space& space, const AuditOptions& opts) {
    const double P = poincare(q, space, opts);
    const double gamma = space.geometry().meas_gamma;
    return std::max(1.0 + P * std::pow(2.0, (kDim - 1) * (1.0 - 1.0 / q)),
                    P * std::pow(gamma, 1.0 / q - 1.0 / ell));
}

double g_norm(const P1Space& space, const ProblemData& d, double q) {
    if (space.edges(BoundaryTag::GammaN).empty()) {
        return 0.0;
    }
    return boundary_lq(space, BoundaryTag::GammaN, q, [&](const EdgeQuadPoint& e) { return d.g(e.x); });
}

std::string r_sharp_label(const P1Space& space, const ProblemData& d, double& r) {
    if (d.r_sharp > 0.0) {
        r = d.r_sharp;
        return "conditional on r_sharp = " + format_number(r) + " (user supplied)";
    }
    r = space.geometry().r_sharp;
    return "conditional on r_sharp = " + format_number(r) + " (mesh heuristic)";
}

struct GradientTerms {
    double a_lo = 0.0;
    double a_hi = 0.0;
    std::function<Vec2(int)> flux;
    std::function<double(const EdgeQuadPoint&)> gamma_density;  ///< empty for the Neumann form
    const Field* u = nullptr;
};

BoundCheckResult gradient_check(const std::string& name, const P1Space& space, const ProblemData& d,
                                const GradientTerms& terms, double eps) {
    const double eps_max = gradient_eps_max(terms.a_lo, terms.a_hi, d);
    if (!(eps >= 0.0 && eps < eps_max)) {
        throw DomainError(name + ": eps = " + format_number(eps) + " outside [0, " + format_number(eps_max) + ")");
    }
    constants::CoefficientBounds b;
    b.a_lo = terms.a_lo;
    b.a_hi = terms.a_hi;
    const double ups = constants::upsilon_thresholds(b, d.nu3, kDim).upsilon_U;
    const auto Z = constants::z_factors(eps, ups, kDim);
    const double q = 2.0 + eps;
    const double a = terms.a_lo;
    const Field& u = *terms.u;

    const double lhs = std::pow(element_lq(space, q, [&](int t) { return length(space.gradient(u, t)); }), q);
    const double grad2 = element_lq(space, 2.0, [&](int t) { return length(space.gradient(u, t)); });
    const double F = element_lq(space, q, [&](int t) {
        const Vec2 f = terms.flux(t);
        return std::sqrt((2.0 / a + 2.0) * dot(f, f) / a);
    });
    const double K = constants::trace_constant(2.0 * kDim / (kDim + 1.0), kDim);
    const double cH = 2.0 * K / std::sqrt(a) * std::sqrt(2.0 / a + std::pow(2.0, -1.0 / kDim));
    double Hq = std::pow(cH * g_norm(space, d, q), q);
    if (terms.gamma_density && !space.edges(BoundaryTag::Gamma).empty()) {
        Hq += std::pow(cH * boundary_lq(space, BoundaryTag::Gamma, q, terms.gamma_density), q);
    }
    double r = 0.0;
    const std::string label = r_sharp_label(space, d, r);
    const double nd = kDim;
    const double rhs = (std::pow(2.0, nd) + 1.0) *
                       (std::pow(8.0 / std::pow(r, nd), eps / 2.0) * Z.Z1 * std::pow(grad2, q) +
                        (std::pow(2.0, (nd + 1.0) * eps / 2.0) * Z.Z1 + Z.Z2) * std::pow(F, q) +
                        (Z.Z1 + Z.Z2) * Hq);
    auto res = make_check(name, lhs, rhs, label);
    res.inputs = {{"eps", eps},   {"eps_max", eps_max}, {"upsilon_U", ups}, {"Z1", Z.Z1},
                  {"Z2", Z.Z2},   {"r_sharp", r},       {"grad_l2", grad2}, {"flux_norm", F},
                  {"boundary_term", Hq}};
    return res;
}

BoundCheckResult inapplicable(std::string name, std::string why) {
    BoundCheckResult r;
    r.name = std::move(name);
    r.applicable = false;
    r.pass = true;
    r.notes = std::move(why);
    return r;
}

} // namespace

BoundCheckResult make_check(std::string name, double lhs, double rhs, std::string notes) {
    BoundCheckResult r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.margin = rhs - lhs;
    r.pass = r.margin >= -1e-9 * std::max(1.0, std::abs(rhs));
    r.notes = std::move(notes);
    return r;
}

BoundCheckResult check_energy_estimate(const P1Space& space, const CoefficientModel& coeffs,
                                       const ProblemData& data, const Field& theta, const Field& phi,
                                       const AuditOptions& opts) {
    const std::string name = "energy_thermal";
    if (space.edges(BoundaryTag::Gamma).empty()) {
        return inapplicable(name, "no radiative boundary");
    }
    const auto& mesh = space.mesh();
    const double a = coeffs.bounds.k_lo;
    const double b = coeffs.bounds.b_lo;
    const double ell = data.ell;
    const double ellp = ell / (ell - 1.0);
    const double s = opts.s;

    const double grad2 = element_lq(space, 2.0, [&](int t) { return length(space.gradient(theta, t)); });
    const double trace =
        boundary_lq(space, BoundaryTag::Gamma, ell, [&](const EdgeQuadPoint& q) { return interpolate(mesh, theta, q); });
    const double lhs = a / 2.0 * grad2 * grad2 + b / ellp * std::pow(trace, ell);

    const double h = boundary_lq(space, BoundaryTag::Gamma, ellp,
                                 [&](const EdgeQuadPoint& q) { return absorbed(space, coeffs, data, theta, q); });
    const double F = element_lq(space, 2.0, [&](int t) { return length(thermal_flux(space, coeffs, theta, phi, t)); });
    // The thermal problem carries no volume source and is adiabatic on Gamma_N,
    // so both norms inside E(A, B) vanish; the constants are still reported.
    const double f_norm = 0.0;
    const double gN = 0.0;
    const double q_f = 2.0 * kDim / (kDim + 2.0);
    const double q_g = kDim * s / (kDim * (s - 1.0) + 1.0);
    const double S_ql = constants::sobolev_constant(q_f, kDim) * sl_factor(q_f, ell, space, opts);
    const double K_ql = constants::trace_constant(q_g, kDim) * sl_factor(q_g, ell, space, opts);
    const double vol = space.geometry().vol_omega;
    auto E = [&](double A, double B) { return A * S_ql * f_norm + B * K_ql * gN; };
    const double rhs =
        (ell - 1.0) / (ell * std::pow(b, 1.0 / (ell - 1.0))) * std::pow(h + E(1.0, 1.0), ellp) +
        std::pow(F + E(std::pow(vol, 1.0 / kDim), std::pow(vol, 0.5 + (1.0 / kDim - 1.0) / s)), 2.0) / (2.0 * a);

    std::string notes;
    if (!space.geometry().convex && !opts.poincare) {
        notes = "non-convex mesh: Poincare constant from the diameter bound (heuristic)";
    }
    auto r = make_check(name, lhs, rhs, notes);
    r.inputs = {{"k_lo", a},        {"b_lo", b},      {"grad_l2", grad2}, {"theta_l_gamma", trace},
                {"h_norm", h},      {"flux_l2", F},   {"S_ql", S_ql},     {"K_ql", K_ql}};
    return r;
}

BoundCheckResult check_electric_energy(const P1Space& space, const CoefficientModel& coeffs,
                                       const ProblemData& data, const Field& theta, const Field& phi,
                                       const AuditOptions& opts) {
    const double a = coeffs.bounds.sigma_lo;
    const double s = opts.s;
    const double lhs = element_lq(space, 2.0, [&](int t) { return length(space.gradient(phi, t)); });
    const double F = element_lq(space, 2.0, [&](int t) { return length(electric_flux(space, coeffs, theta, t)); });
    const double q_g = kDim * s / (kDim * (s - 1.0) + 1.0);
    const double K = constants::trace_constant(q_g, kDim);
    const double vol = space.geometry().vol_omega;
    const double gN = g_norm(space, data, s);
    const double rhs = (F + std::pow(vol, 0.5 + (1.0 / kDim - 1.0) / s) * K * gN) / a;
    auto r = make_check("energy_electric", lhs, rhs);
    r.inputs = {{"sigma_lo", a}, {"flux_l2", F}, {"K_q", K}, {"g_norm", gN}};
    return r;
}

BoundCheckResult check_linf_bound(const P1Space& space, const CoefficientModel& coeffs, const ProblemData& data,
                              const Field& theta, const Field& phi) {
    const std::string name = "linf_thermal";
    if (space.edges(BoundaryTag::Gamma).empty()) {
        return inapplicable(name, "no radiative boundary");
    }
    if (!data.thermal_extra_load.empty()) {
        return inapplicable(name, "a volume source is present in the thermal problem");
    }
    const double p = resolved_p(coeffs, data);
    if (!(p > kDim)) {
        return inapplicable(name, "requires p > 2, got p = " + format_number(p));
    }
    constants::ExponentSet exps;
    exps.n = kDim;
    exps.p = p;
    exps.ell = data.ell;
    exps.delta = data.delta;
    exps.alpha = data.alpha;
    exps.nu3 = data.nu3;
    const auto c = constants::linf_constants(coeffs.bounds.k_lo, coeffs.bounds.b_lo, exps, space.geometry());
    const double F = element_lq(space, p, [&](int t) { return length(thermal_flux(space, coeffs, theta, phi, t)); });
    const double h = boundary_lq(space, BoundaryTag::Gamma, p,
                                 [&](const EdgeQuadPoint& q) { return absorbed(space, coeffs, data, theta, q); });
    auto r = make_check(name, sup_abs(theta), 1.0 + c.Zcal1 * F + c.Zcal2 * h);
    r.inputs = {{"p", p}, {"alpha", exps.alpha_or_default()}, {"Zcal1", c.Zcal1}, {"Zcal2", c.Zcal2},
                {"flux_lp", F}, {"h_lp", h}};
    return r;
}

double gradient_eps_max(double a_lo, double a_hi, const ProblemData& data) {
    constants::CoefficientBounds b;
    b.a_lo = a_lo;
    b.a_hi = a_hi;
    const double ups = constants::upsilon_thresholds(b, data.nu3, kDim).upsilon_U;
    return std::min(data.delta, constants::z_pole(ups, kDim));
}

BoundCheckResult check_gradient_estimate(const P1Space& space, const CoefficientModel& coeffs,
                                         const ProblemData& data, const Field& theta, const Field& phi, double eps) {
    if (space.edges(BoundaryTag::Gamma).empty()) {
        return inapplicable("gradient_thermal", "no radiative boundary");
    }
    const double M = sup_abs(theta);
    const double b_hi = coeffs.bounds.b_hi;
    GradientTerms terms;
    terms.a_lo = coeffs.bounds.k_lo;
    terms.a_hi = coeffs.bounds.k_hi;
    terms.flux = [&](int t) { return thermal_flux(space, coeffs, theta, phi, t); };
    terms.gamma_density = [&](const EdgeQuadPoint& q) {
        return std::abs(absorbed(space, coeffs, data, theta, q) + b_hi * std::pow(M, data.ell - 1.0));
    };
    terms.u = &theta;
    // The thermal problem is adiabatic on Gamma_N.
    ProblemData adiabatic = data;
    adiabatic.g = [](const Point&) { return 0.0; };
    auto r = gradient_check("gradient_thermal", space, adiabatic, terms, eps);
    r.inputs.emplace_back("sup_theta", M);
    return r;
}

BoundCheckResult check_electric_gradient(const P1Space& space, const CoefficientModel& coeffs,
                                         const ProblemData& data, const Field& theta, const Field& phi, double eps) {
    GradientTerms terms;
    terms.a_lo = coeffs.bounds.sigma_lo;
    terms.a_hi = coeffs.bounds.sigma_hi;
    terms.flux = [&](int t) { return electric_flux(space, coeffs, theta, t); };
    terms.u = &phi;
    return gradient_check("gradient_electric", space, data, terms, eps);
}

EntropyAudit entropy_audit(const P1Space& space, const CoefficientModel& coeffs, const Field& theta,
                           const Field& phi) {
    check_field(space.mesh(), theta, "theta");
    check_field(space.mesh(), phi, "phi");
    EntropyAudit a;
    for (int t = 0; t < space.num_triangles(); ++t) {
        const double T = space.element_mean(theta, t);
        if (!(T > 0.0)) {
            ++a.excluded;
            continue;
        }
        const Point x = space.centroid(t);
        const Vec2 gt = space.gradient(theta, t);
        const Vec2 gp = space.gradient(phi, t);
        const double as = coeffs.seebeck(x, T);
        const Vec2 j{as * gt.x + gp.x, as * gt.y + gp.y};
        const double s = coeffs.k(x, T).quad(gt, gt) / (T * T) + coeffs.sigma(x, T).quad(j, j) / T;
        a.elements.push_back(t);
        a.sigma_s.push_back(s);
        if (s < -1e-12) {
            ++a.negative;
        }
    }
    if (!a.sigma_s.empty()) {
        a.min = *std::min_element(a.sigma_s.begin(), a.sigma_s.end());
    }
    return a;
}

bool AuditReport::pass() const {
    return entropy.pass() &&
           std::all_of(checks.begin(), checks.end(), [](const auto& c) { return !c.applicable || c.pass; });
}

AuditReport run_audits(const P1Space& space, const CoefficientModel& coeffs, const ProblemData& data,
                       const Field& theta, const Field& phi, const AuditOptions& opts) {
    check_field(space.mesh(), theta, "theta");
    check_field(space.mesh(), phi, "phi");
    AuditReport rep;
    rep.checks.push_back(check_energy_estimate(space, coeffs, data, theta, phi, opts));
    rep.checks.push_back(check_linf_bound(space, coeffs, data, theta, phi));
    auto at = [&](BoundCheckResult r, const char* suffix) {
        r.name += suffix;
        rep.checks.push_back(std::move(r));
    };
    const double em_t = gradient_eps_max(coeffs.bounds.k_lo, coeffs.bounds.k_hi, data);
    at(check_gradient_estimate(space, coeffs, data, theta, phi, 0.0), "_eps0");
    at(check_gradient_estimate(space, coeffs, data, theta, phi, em_t / 2.0), "_eps_half");
    const double em_e = gradient_eps_max(coeffs.bounds.sigma_lo, coeffs.bounds.sigma_hi, data);
    at(check_electric_gradient(space, coeffs, data, theta, phi, 0.0), "_eps0");
    at(check_electric_gradient(space, coeffs, data, theta, phi, em_e / 2.0), "_eps_half");
    rep.entropy = entropy_audit(space, coeffs, theta, phi);
    return rep;
}

Json audit_to_json(const AuditReport& report) {
    Json checks = Json::array();
    for (const auto& c : report.checks) {
        Json o = Json::object();
        o["name"] = c.name;
        o["lhs"] = c.lhs;
        o["rhs"] = c.rhs;
        o["margin"] = c.margin;
        o["pass"] = c.pass;
        o["applicable"] = c.applicable;
        o["notes"] = c.notes;
        Json in = Json::object();
        for (const auto& [k, v] : c.inputs) {
            in[k] = v;
        }
        o["inputs"] = in;
        checks.push_back(o);
    }
    const auto& e = report.entropy;
    Json ent = Json::object();
    ent["included"] = e.elements.size();
    ent["excluded"] = e.excluded;
    ent["negative"] = e.negative;
    ent["min"] = e.min;
    ent["pass"] = e.pass();
    Json out = Json::object();
    out["pass"] = report.pass();
    out["checks"] = checks;
    out["entropy"] = ent;
    return out;
}

// ---------------------------------------------------------------------------
// Manufactured solutions

namespace {

struct Exact {
    Expression e;
    double h;
    double shift = 0.0;

    double operator()(const Point& x) const { return e(x.x, x.y) - shift; }
    Vec2 grad(const Point& x) const {
        return {(e(x.x + h, x.y) - e(x.x - h, x.y)) / (2.0 * h), (e(x.x, x.y + h) - e(x.x, x.y - h)) / (2.0 * h)};
    }
};

Point tri_point(const TriMesh& mesh, int t, const std::array<double, 3>& bary) {
    const auto& tri = mesh.triangles[idx(t)];
    Point p{0.0, 0.0};
    for (int k = 0; k < 3; ++k) {
        const Point& v = mesh.nodes[idx(tri[idx(k)])];
        p.x += bary[idx(k)] * v.x;
        p.y += bary[idx(k)] * v.y;
    }
    return p;
}

/// sum_t area_t sum_q w_q F(x_q) . grad phi_i, the weak form of a smooth flux.
Field smooth_flux_load(const P1Space& space, const std::function<Vec2(const Point&)>& F) {
    const auto& rule = triangle_rule();
    const auto& mesh = space.mesh();
    Field b(idx(space.num_nodes()), 0.0);
    for (int t = 0; t < space.num_triangles(); ++t) {
        Vec2 avg{0.0, 0.0};
        for (int q = 0; q < TriangleRule::size; ++q) {
            const Vec2 f = F(tri_point(mesh, t, rule.bary[idx(q)]));
            avg.x += rule.w[idx(q)] * f.x;
            avg.y += rule.w[idx(q)] * f.y;
        }
        const auto& g = space.grads(t);
        const auto& tri = mesh.triangles[idx(t)];
        for (int k = 0; k < 3; ++k) {
            b[idx(tri[idx(k)])] += space.area(t) * dot(avg, g[idx(k)]);
        }
    }
    return b;
}

double longest_edge(const TriMesh& mesh) {
    double h = 0.0;
    for (const auto& tri : mesh.triangles) {
        for (int k = 0; k < 3; ++k) {
            const Point& a = mesh.nodes[idx(tri[idx(k)])];
            const Point& b = mesh.nodes[idx(tri[idx((k + 1) % 3)])];
            h = std::max(h, std::hypot(a.x - b.x, a.y - b.y));
        }
    }
    return h;
}

void field_errors(const P1Space& space, const Field& uh, const Exact& ex, double& h1, double& l2) {
    const auto& rule = triangle_rule();
    const auto& mesh = space.mesh();
    double s1 = 0.0, s0 = 0.0;
    for (int t = 0; t < space.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[idx(t)];
        const Vec2 gh = space.gradient(uh, t);
        for (int q = 0; q < TriangleRule::size; ++q) {
            const auto& bary = rule.bary[idx(q)];
            const Point x = tri_point(mesh, t, bary);
            double v = 0.0;
            for (int k = 0; k < 3; ++k) {
                v += bary[idx(k)] * uh[idx(tri[idx(k)])];
            }
            const Vec2 ge = ex.grad(x);
            const double w = rule.w[idx(q)] * space.area(t);
            s0 += w * (v - ex(x)) * (v - ex(x));
            s1 += w * ((gh.x - ge.x) * (gh.x - ge.x) + (gh.y - ge.y) * (gh.y - ge.y));
        }
    }
    h1 = std::sqrt(s1);
    l2 = std::sqrt(s0);
}

double mean_over(const P1Space& space, const Expression& e) {
    const auto& rule = triangle_rule();
    double s = 0.0, vol = 0.0;
    for (int t = 0; t < space.num_triangles(); ++t) {
        for (int q = 0; q < TriangleRule::size; ++q) {
            const Point x = tri_point(space.mesh(), t, rule.bary[idx(q)]);
            s += rule.w[idx(q)] * space.area(t) * e(x.x, x.y);
        }
        vol += space.area(t);
    }
    return s / vol;
}

std::optional<double> rate(double e0, double e1, double h0, double h1) {
    if (!(e0 > 0.0 && e1 > 0.0)) {
        return std::nullopt;
    }
    return std::log(e0 / e1) / std::log(h0 / h1);
}

std::optional<double> min_rate(std::optional<double> a, std::optional<double> b) {
    if (!a || !b) {
        return std::nullopt;
    }
    return std::min(*a, *b);
}

} // namespace

MmsResult mms_convergence(const TriMesh& base, const CoefficientModel& coeffs, const MmsCase& mms) {
    if (mms.levels < 1) {
        throw DomainError("mms needs at least one level");
    }
    if (!(mms.fd_step > 0.0)) {
        throw DomainError("finite-difference step must be positive");
    }
    MmsResult res;
    TriMesh mesh = base;
    for (int level = 0; level < mms.levels; ++level) {
        if (level > 0) {
            mesh = refine_uniform(mesh);
        }
        P1Space space(mesh);
        const Exact th{mms.theta, mms.fd_step};
        const Exact ph{mms.phi, mms.fd_step, mean_over(space, mms.phi)};

        ProblemData data;
        data.ell = mms.ell;
        data.g = [](const Point&) { return 0.0; };
        data.theta_e = [&](const Point& x) { return th(x); };

        data.electric_extra_load = smooth_flux_load(space, [&](const Point& x) {
            const double T = th(x);
            const Vec2 gt = th.grad(x);
            const Vec2 gp = ph.grad(x);
            const double a = coeffs.seebeck(x, T);
            return coeffs.sigma(x, T).apply({gp.x + a * gt.x, gp.y + a * gt.y});
        });
        data.thermal_extra_load = smooth_flux_load(space, [&](const Point& x) {
            const double T = th(x);
            const double P = ph(x);
            const Vec2 gt = th.grad(x);
            const Vec2 gp = ph.grad(x);
            const double a = coeffs.seebeck(x, T) * (T + P);
            const Vec2 s = coeffs.sigma(x, T).apply({a * gt.x + P * gp.x, a * gt.y + P * gp.y});
            const Vec2 k = coeffs.k(x, T).apply(gt);
            return Vec2{k.x + s.x, k.y + s.y};
        });
        // Radiation imbalance of the exact field; zero when gamma = f_lambda and theta > 0.
        const Field rad = assemble_surface_load(space, BoundaryTag::Gamma, [&](const EdgeQuadPoint& q) {
            const double T = th(q.x);
            return coeffs.emission(q.x, T) * std::pow(std::abs(T), mms.ell - 2.0) * T -
                   coeffs.absorption(q.x, T) * std::pow(T, mms.ell - 1.0);
        });
        for (std::size_t i = 0; i < rad.size(); ++i) {
            data.thermal_extra_load[i] += rad[i];
        }

        const auto sol = picard_solve(space, coeffs, data, mms.picard);
        MmsLevel row;
        row.level = level;
        row.h = longest_edge(mesh);
        row.converged = sol.report.converged;
        field_errors(space, sol.theta, th, row.err_h1_theta, row.err_l2_theta);
        field_errors(space, sol.phi, ph, row.err_h1_phi, row.err_l2_phi);
        if (!res.rows.empty()) {
            const auto& prev = res.rows.back();
            row.rate_h1 = min_rate(rate(prev.err_h1_theta, row.err_h1_theta, prev.h, row.h),
                                   rate(prev.err_h1_phi, row.err_h1_phi, prev.h, row.h));
            row.rate_l2 = min_rate(rate(prev.err_l2_theta, row.err_l2_theta, prev.h, row.h),
                                   rate(prev.err_l2_phi, row.err_l2_phi, prev.h, row.h));
            if (row.err_h1_theta > prev.err_h1_theta || row.err_l2_theta > prev.err_l2_theta ||
                row.err_h1_phi > prev.err_h1_phi || row.err_l2_phi > prev.err_l2_phi) {
                res.monotone = false;
            }
        }
        res.rows.push_back(row);
    }
    return res;
}

bool MmsResult::pass(double h1_min, double l2_min, double exact_tol) const {
    if (rows.empty()) {
        return false;
    }
    for (const auto& r : rows) {
        if (!r.converged) {
            return false;
        }
    }
    const bool exact = std::all_of(rows.begin(), rows.end(), [&](const MmsLevel& r) {
        return std::max({r.err_h1_theta, r.err_l2_theta, r.err_h1_phi, r.err_l2_phi}) <= exact_tol;
    });
    if (exact) {
        return true;
    }
    if (rows.size() < 2) {
        return false;
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (!r.rate_h1 || !r.rate_l2 || *r.rate_h1 < h1_min || *r.rate_l2 < l2_min) {
            return false;
        }
    }
    return true;
}

void write_mms_csv(const MmsResult& result, std::ostream& out) {
    out << "level,h,err_h1_theta,err_l2_theta,err_h1_phi,err_l2_phi,rate_h1,rate_l2\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    for (const auto& r : result.rows) {
        out << r.level << ',' << format_number(r.h) << ',' << format_number(r.err_h1_theta) << ','
            << format_number(r.err_l2_theta) << ',' << format_number(r.err_h1_phi) << ','
            << format_number(r.err_l2_phi) << ',' << opt(r.rate_h1) << ',' << opt(r.rate_l2) << '\n';
    }
}

} // namespace thermoflux::verify
