#include "thermoflux/coupling.hpp"

#include "thermoflux/error.hpp"
#include "thermoflux/kv.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace thermoflux {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

double norm2(const Field& v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

double sup(const Field& v) {
    double s = 0.0;
    for (double x : v) {
        s = std::max(s, std::abs(x));
    }
    return s;
}

void add_extra(Field& b, const Field& extra, const char* name) {
    if (extra.empty()) {
        return;
    }
    if (extra.size() != b.size()) {
        throw InvariantError(std::string(name) + " has the wrong size");
    }
    for (std::size_t i = 0; i < b.size(); ++i) {
        b[i] += extra[i];
    }
}

double interpolate(const TriMesh& mesh, const Field& f, const EdgeQuadPoint& q) {
    const auto& be = mesh.boundary_edges[idx(q.edge)];
    return q.wa * f[idx(be.a)] + q.wb * f[idx(be.b)];
}

} // namespace

ProblemData zero_data(double ell) {
    ProblemData d;
    d.g = [](const Point&) { return 0.0; };
    d.theta_e = [](const Point&) { return 0.0; };
    d.ell = ell;
    return d;
}

void validate_data(const P1Space& space, const ProblemData& data) {
    if (!(data.ell >= 2.0)) {
        throw InvariantError("ell must be at least 2");
    }
    if (!data.g || !data.theta_e) {
        throw InvariantError("boundary data g and theta_e must be set");
    }
    double integral = 0.0, absolute = 0.0;
    for (int e : space.edges(BoundaryTag::GammaN)) {
        for (const auto& [q, w] : edge_quadrature(space, e)) {
            const double g = data.g(q.x);
            if (!std::isfinite(g)) {
                throw InvariantError("g is not finite on boundary edge " + std::to_string(e));
            }
            integral += w * g;
            absolute += w * std::abs(g);
        }
    }
    if (std::abs(integral) > 1e-10 * absolute) {
        throw InvariantError("int_{Gamma_N} g ds = " + format_number(integral) + " is not zero");
    }
    const auto& mesh = space.mesh();
    for (int e : space.edges(BoundaryTag::Gamma)) {
        const auto& be = mesh.boundary_edges[idx(e)];
        for (const Point& x : {mesh.nodes[idx(be.a)], mesh.nodes[idx(be.b)]}) {
            const double te = data.theta_e(x);
            if (!(te >= 0.0) || !std::isfinite(te)) {
                throw InvariantError("theta_e = " + format_number(te) + " is negative or not finite at (" +
                                     format_number(x.x) + ", " + format_number(x.y) + ")");
            }
        }
        for (const auto& [q, w] : edge_quadrature(space, e)) {
            const double te = data.theta_e(q.x);
            if (!(te >= 0.0) || !std::isfinite(te)) {
                throw InvariantError("theta_e is negative or not finite on boundary edge " + std::to_string(e));
            }
        }
    }
}

double resolved_p(const CoefficientModel& coeffs, const ProblemData& data) {
    if (data.p > 0.0) {
        return data.p;
    }
    return 2.0 + 0.5 / (constants::coupled_upsilon(coeffs.bounds) - 1.0);
}

Field solve_electric(const P1Space& space, const CoefficientModel& coeffs, const Field& theta,
                     const ProblemData& data, const InnerOptions& opts) {
    check_field(space.mesh(), theta, "theta");
    const auto A = assemble_diffusion(space, coeffs.sigma, theta, opts.assembly);
    Field b = assemble_flux_load(space, [&](int t) {
        const Point c = space.centroid(t);
        const double T = space.element_mean(theta, t);
        const Vec2 s = coeffs.sigma(c, T).apply(space.gradient(theta, t));
        const double a = coeffs.seebeck(c, T);
        return Vec2{-a * s.x, -a * s.y};
    });
    const Field gl = assemble_surface_load(space, BoundaryTag::GammaN, data.g);
    for (std::size_t i = 0; i < b.size(); ++i) {
        b[i] += gl[i];
    }
    add_extra(b, data.electric_extra_load, "electric extra load");
    return solve_spd(A, b, Constraint::ZeroMean, space.node_weights(), opts.linear);
}

ThermalResult solve_thermal(const P1Space& space, const CoefficientModel& coeffs, const Field& theta,
                            const Field& phi, const ProblemData& data, const InnerOptions& opts,
                            const Field* guess) {
    if (space.edges(BoundaryTag::Gamma).empty()) {
        throw PreconditionError("the thermal problem needs a nonempty radiative boundary");
    }
    if (!(data.ell >= 2.0)) {
        throw DomainError("ell must be at least 2");
    }
    const auto& mesh = space.mesh();
    check_field(mesh, theta, "theta");
    check_field(mesh, phi, "phi");
    const double ell = data.ell;

    const auto K = assemble_diffusion(space, coeffs.k, theta, opts.assembly);
    Field b = assemble_flux_load(space, [&](int t) {
        const Point c = space.centroid(t);
        const double T = space.element_mean(theta, t);
        const double P = space.element_mean(phi, t);
        const Vec2 gt = space.gradient(theta, t);
        const Vec2 gp = space.gradient(phi, t);
        const double a = coeffs.seebeck(c, T) * (T + P);
        const Vec2 s = coeffs.sigma(c, T).apply({a * gt.x + P * gp.x, a * gt.y + P * gp.y});
        return Vec2{-s.x, -s.y};
    });
    double te_max = 0.0;
    const Field sl = assemble_surface_load(space, BoundaryTag::Gamma, [&](const EdgeQuadPoint& q) {
        const double te = data.theta_e(q.x);
        te_max = std::max(te_max, std::abs(te));
        return coeffs.absorption(q.x, interpolate(mesh, theta, q)) * std::pow(te, ell - 1.0);
    });
    for (std::size_t i = 0; i < b.size(); ++i) {
        b[i] += sl[i];
    }
    add_extra(b, data.thermal_extra_load, "thermal extra load");
    const double bnorm = norm2(b);

    ThermalResult res;
    res.Theta = guess ? *guess : theta;
    check_field(mesh, res.Theta, "initial guess");

    auto residual = [&](const Field& u, RadiationSystem& sys, double floor, double& scale) {
        sys = assemble_radiation(space, coeffs.emission, theta, u, ell, floor);
        Field F = K.multiply(u);
        scale = std::max({bnorm, norm2(F), norm2(sys.residual)});
        for (std::size_t i = 0; i < F.size(); ++i) {
            F[i] += sys.residual[i] - b[i];
        }
        return F;
    };

    // Near Theta = 0 the radiation Jacobian degenerates for ell > 2; a floor
    // on |Theta| keeps the Newton matrix definite there.
    auto jacobian_floor = [&](const Field& u) {
        if (ell <= 2.0) {
            return 0.0;
        }
        const double ref = std::max({te_max, sup(u), sup(theta)});
        return 0.1 * (ref > 0.0 ? ref : 1.0);
    };

    RadiationSystem sys;
    double scale = 0.0;
    Field F = residual(res.Theta, sys, jacobian_floor(res.Theta), scale);
    double fn = norm2(F);
    res.residuals.push_back(fn);
    int growth = 0;
    while (!(fn <= opts.newton_tol * scale)) {
        if (res.newton_iterations >= opts.newton_max) {
            throw SolverError("Newton did not converge in " + std::to_string(opts.newton_max) + " iterations",
                              res.residuals);
        }
        ++res.newton_iterations;
        auto J = K;
        J.axpy(1.0, sys.jacobian);
        Field rhs(F.size());
        for (std::size_t i = 0; i < F.size(); ++i) {
            rhs[i] = -F[i];
        }
        const Field delta = solve_spd(J, rhs, Constraint::None, {}, opts.linear);

        double step = 1.0;
        Field trial(F.size());
        RadiationSystem trial_sys;
        double trial_scale = 0.0;
        Field trial_F;
        double trial_fn = 0.0;
        for (int halving = 0; halving <= 30; ++halving) {
            for (std::size_t i = 0; i < trial.size(); ++i) {
                trial[i] = res.Theta[i] + step * delta[i];
            }
            trial_F = residual(trial, trial_sys, jacobian_floor(trial), trial_scale);
            trial_fn = norm2(trial_F);
            if (trial_fn < fn) {
                break;
            }
            step *= 0.5;
        }
        growth = trial_fn >= fn ? growth + 1 : 0;
        res.Theta = std::move(trial);
        sys = std::move(trial_sys);
        F = std::move(trial_F);
        scale = trial_scale;
        fn = trial_fn;
        res.residuals.push_back(fn);
        if (!std::isfinite(fn)) {
            throw SolverError("Newton produced a non-finite residual", res.residuals);
        }
        if (growth >= opts.growth_limit) {
            throw SolverError("Newton residual failed to decrease over " + std::to_string(growth) + " steps",
                              res.residuals);
        }
    }
    return res;
}

OperatorResult operator_T(const P1Space& space, const CoefficientModel& coeffs, const Field& theta,
                          const ProblemData& data, const InnerOptions& opts) {
    OperatorResult out;
    out.phi = solve_electric(space, coeffs, theta, data, opts);
    auto th = solve_thermal(space, coeffs, theta, out.phi, data, opts, &theta);
    out.Theta = std::move(th.Theta);
    out.newton_iterations = th.newton_iterations;
    out.newton_residual = th.residuals.back();
    return out;
}

constants::DataNorms data_norms(const P1Space& space, const ProblemData& data, double p) {
    constants::DataNorms n;
    auto te = [&](const EdgeQuadPoint& q) { return data.theta_e(q.x); };
    n.theta_e_ell = boundary_lq(space, BoundaryTag::Gamma, data.ell, te);
    n.theta_e_lm1p = boundary_lq(space, BoundaryTag::Gamma, (data.ell - 1.0) * p, te);
    n.g_p = boundary_lq(space, BoundaryTag::GammaN, p, [&](const EdgeQuadPoint& q) { return data.g(q.x); });
    return n;
}

PicardResult picard_solve(const P1Space& space, const CoefficientModel& coeffs, const ProblemData& data,
                          const PicardOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    if (!(opts.tol > 0.0)) {
        throw DomainError("Picard tolerance must be positive");
    }
    if (!(opts.relax > 0.0 && opts.relax <= 1.0)) {
        throw DomainError("relaxation factor must lie in (0, 1]");
    }
    validate_data(space, data);
    const auto& mesh = space.mesh();
    const double p = resolved_p(coeffs, data);

    PicardResult out;
    auto& rep = out.report;
    rep.p = p;
    rep.ell = data.ell;
    rep.relax = opts.relax;
    rep.tol = opts.tol;

    if (opts.init) {
        out.theta = *opts.init;
        check_field(mesh, out.theta, "initial temperature");
    } else {
        double s = 0.0, len = 0.0;
        for (int e : space.edges(BoundaryTag::Gamma)) {
            for (const auto& [q, w] : edge_quadrature(space, e)) {
                s += w * data.theta_e(q.x);
                len += w;
            }
        }
        out.theta.assign(idx(space.num_nodes()), len > 0.0 ? s / len : 0.0);
    }

    try {
        while (rep.iterations < opts.max_outer) {
            const auto T = operator_T(space, coeffs, out.theta, data, opts.inner);
            ++rep.iterations;
            rep.newton_counts.push_back(T.newton_iterations);
            rep.newton_residuals.push_back(T.newton_residual);
            Field next(out.theta.size());
            Field diff(out.theta.size());
            for (std::size_t i = 0; i < next.size(); ++i) {
                next[i] = (1.0 - opts.relax) * out.theta[i] + opts.relax * T.Theta[i];
                diff[i] = next[i] - out.theta[i];
            }
            const double un = norms(space, diff, p, data.ell).v_norm;
            if (!rep.update_norms.empty() && rep.update_norms.back() > 0.0) {
                rep.contraction_ratios.push_back(un / rep.update_norms.back());
            }
            rep.update_norms.push_back(un);
            out.theta = std::move(next);
            rep.iterate_norms.push_back(norms(space, out.theta, p, data.ell).v_norm);
            if (!std::isfinite(un)) {
                rep.message = "update norm is not finite";
                break;
            }
            if (un <= opts.tol) {
                rep.converged = true;
                break;
            }
        }
        if (!rep.converged && rep.message.empty()) {
            rep.message = "no convergence within " + std::to_string(opts.max_outer) + " outer iterations";
        }
        out.phi = solve_electric(space, coeffs, out.theta, data, opts.inner);
    } catch (const SolverError& e) {
        rep.converged = false;
        rep.message = e.what();
        if (out.phi.size() != out.theta.size()) {
            out.phi.assign(out.theta.size(), 0.0);
        }
    }

    rep.contraction_observed =
        std::all_of(rep.contraction_ratios.begin(), rep.contraction_ratios.end(), [](double r) { return r < 1.0; });
    if (std::all_of(out.theta.begin(), out.theta.end(), [](double v) { return std::isfinite(v); })) {
        rep.theta_norms = norms(space, out.theta, p, data.ell);
        rep.phi_norms = norms(space, out.phi, p, data.ell);
    }

    if (opts.compute_ball && p > 2.0) {
        constants::SmallnessInputs in;
        in.bounds = coeffs.bounds;
        in.p = p;
        in.ell = data.ell;
        in.alpha = data.alpha;
        in.geom = space.geometry();
        if (data.r_sharp > 0.0) {
            in.geom.r_sharp = data.r_sharp;
            in.geom.r_sharp_heuristic = false;
        }
        in.norms = data_norms(space, data, p);
        try {
            const auto c = constants::smallness_constants(in);
            if (c.evaluable()) {
                rep.Q1 = constants::smallness_Q(1.0, in, c);
                if (*rep.Q1 < 1.0) {
                    rep.ball_radius = constants::find_ball_radius(
                        [&](double R) { return constants::smallness_Q(R, in, c); });
                    if (rep.ball_radius) {
                        const double R = *rep.ball_radius;
                        rep.within_ball = std::all_of(rep.iterate_norms.begin(), rep.iterate_norms.end(),
                                                      [R](double v) { return v <= R; });
                    }
                }
            }
        } catch (const DomainError&) {
            // Constants outside their domain simply leave the ball fields empty.
        }
    }
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

} // namespace thermoflux
