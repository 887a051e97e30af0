#include "thermoflux/cli.hpp"

#include "thermoflux/error.hpp"

#include <fstream>
#include <ostream>

namespace thermoflux::cli {

namespace {

namespace fs = std::filesystem;

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    return out;
}

Field read_field(const TriMesh& mesh, const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("missing solve output " + path.string() + " (run `solve` first)");
    }
    try {
        return read_field_csv(mesh, in);
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

Json norms_json(const FieldNorms& n) {
    Json j = Json::object();
    j["wp_seminorm"] = n.wp_seminorm;
    j["boundary_l"] = n.boundary_l;
    j["sup"] = n.sup;
    j["v_norm"] = n.v_norm;
    return j;
}

template <class T>
Json optional_json(const std::optional<T>& v) {
    return v ? Json(*v) : Json(nullptr);
}

} // namespace

Json solve_report_json(const SolveReport& r, bool include_timing) {
    Json j = Json::object();
    j["converged"] = r.converged;
    j["message"] = r.message;
    j["iterations"] = r.iterations;
    j["p"] = r.p;
    j["ell"] = r.ell;
    j["relax"] = r.relax;
    j["tol"] = r.tol;
    j["update_norms"] = r.update_norms;
    j["iterate_norms"] = r.iterate_norms;
    j["contraction_ratios"] = r.contraction_ratios;
    j["contraction_observed"] = r.contraction_observed;
    j["newton_counts"] = r.newton_counts;
    j["newton_residuals"] = r.newton_residuals;
    j["Q1"] = optional_json(r.Q1);
    j["ball_radius"] = optional_json(r.ball_radius);
    j["within_ball"] = optional_json(r.within_ball);
    j["theta_norms"] = norms_json(r.theta_norms);
    j["phi_norms"] = norms_json(r.phi_norms);
    if (include_timing) {
        j["wall_time"] = r.wall_time;
    }
    return j;
}

void write_vtk(const TriMesh& mesh, const Field& theta, const Field& phi, std::ostream& out) {
    check_field(mesh, theta, "theta");
    check_field(mesh, phi, "phi");
    const auto n = mesh.nodes.size();
    const auto t = mesh.triangles.size();
    out << "# vtk DataFile Version 3.0\nthermoflux fields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << n << " double\n";
    for (const auto& p : mesh.nodes) {
        out << format_number(p.x) << ' ' << format_number(p.y) << " 0\n";
    }
    out << "CELLS " << t << ' ' << 4 * t << '\n';
    for (const auto& tri : mesh.triangles) {
        out << "3 " << tri[0] << ' ' << tri[1] << ' ' << tri[2] << '\n';
    }
    out << "CELL_TYPES " << t << '\n';
    for (std::size_t i = 0; i < t; ++i) {
        out << "5\n";
    }
    out << "POINT_DATA " << n << '\n';
    for (const auto& [name, f] : {std::pair<const char*, const Field*>{"theta", &theta}, {"phi", &phi}}) {
        out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (double v : *f) {
            out << format_number(v) << '\n';
        }
    }
}

int cmd_solve(const Setup& setup, const fs::path& out, std::ostream& log) {
    const P1Space space(setup.mesh);
    const auto res = picard_solve(space, setup.coeffs, setup.data, setup.picard);
    fs::create_directories(out);
    {
        auto f = open_output(out / "theta.csv");
        write_field_csv(setup.mesh, res.theta, f);
    }
    {
        auto f = open_output(out / "phi.csv");
        write_field_csv(setup.mesh, res.phi, f);
    }
    {
        auto f = open_output(out / "solve_report.json");
        f << dump_json(solve_report_json(res.report, setup.report_timing)) << '\n';
    }
    {
        auto f = open_output(out / "fields.vtk");
        write_vtk(setup.mesh, res.theta, res.phi, f);
    }
    const auto& r = res.report;
    log << (r.converged ? "converged" : "not converged") << " after " << r.iterations << " iterations";
    if (!r.update_norms.empty()) {
        log << ", last update " << format_number(r.update_norms.back());
    }
    if (!r.message.empty()) {
        log << " (" << r.message << ")";
    }
    log << '\n';
    return r.converged ? kOk : kNonConvergence;
}

constants::ConstantsInputs constants_inputs(const Setup& setup) {
    const P1Space space(setup.mesh);
    constants::ConstantsInputs in;
    in.bounds = setup.coeffs.bounds;
    in.exps.n = 2;
    in.exps.p = resolved_p(setup.coeffs, setup.data);
    in.exps.ell = setup.data.ell;
    in.exps.delta = setup.data.delta;
    in.exps.s = setup.s;
    in.exps.alpha = setup.data.alpha;
    in.exps.nu3 = setup.data.nu3;
    in.geom = space.geometry();
    if (setup.data.r_sharp > 0.0) {
        in.geom.r_sharp = setup.data.r_sharp;
        in.geom.r_sharp_heuristic = false;
    }
    in.norms = data_norms(space, setup.data, in.exps.p);
    in.eps = setup.eps;
    return in;
}

int cmd_constants(const Setup& setup, const fs::path& out, std::ostream& log) {
    const auto report = constants::build_constants_report(constants_inputs(setup));
    const auto doc = constants::report_entries(report);
    fs::create_directories(out);
    {
        auto f = open_output(out / "constants_report.txt");
        f << kv_to_text(doc);
    }
    {
        auto f = open_output(out / "constants_report.json");
        f << kv_to_json(doc) << '\n';
    }
    log << "smallness " << (report.smallness_holds ? "holds" : "fails");
    if (report.Q1) {
        log << ", Q(1) = " << format_number(*report.Q1);
    }
    log << '\n';
    return kOk;
}

int cmd_verify(const Setup& setup, const fs::path& out, std::ostream& log) {
    const P1Space space(setup.mesh);
    const Field theta = read_field(setup.mesh, out / "theta.csv");
    const Field phi = read_field(setup.mesh, out / "phi.csv");
    validate_data(space, setup.data);
    const auto report = verify::run_audits(space, setup.coeffs, setup.data, theta, phi, setup.audit);
    {
        auto f = open_output(out / "audit_report.json");
        f << dump_json(verify::audit_to_json(report)) << '\n';
    }
    for (const auto& c : report.checks) {
        log << (c.applicable ? (c.pass ? "PASS " : "FAIL ") : "SKIP ") << c.name << '\n';
    }
    log << (report.entropy.pass() ? "PASS " : "FAIL ") << "entropy\n";
    return report.pass() ? kOk : kAuditFailure;
}

int cmd_mms(const Setup& setup, const fs::path& out, std::ostream& log) {
    const auto result = verify::mms_convergence(setup.mesh, setup.coeffs, setup.mms);
    fs::create_directories(out);
    {
        auto f = open_output(out / "mms_rates.csv");
        verify::write_mms_csv(result, f);
    }
    verify::write_mms_csv(result, log);
    return result.pass() ? kOk : kAuditFailure;
}

int run(const Invocation& inv, std::ostream& log, std::ostream& err) {
    try {
        Config cfg = Config::load(inv.config);
        for (const auto& o : inv.overrides) {
            cfg.apply_override(o);
        }
        const Setup setup = build_setup(cfg);
        if (inv.command == "solve") {
            return cmd_solve(setup, inv.out, log);
        }
        if (inv.command == "constants") {
            return cmd_constants(setup, inv.out, log);
        }
        if (inv.command == "verify") {
            return cmd_verify(setup, inv.out, log);
        }
        if (inv.command == "mms") {
            return cmd_mms(setup, inv.out, log);
        }
        err << "error: unknown command '" << inv.command << "'\n";
        return kInputError;
    } catch (const SolverError& e) {
        err << "error: " << e.what() << '\n';
        return kNonConvergence;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

} // namespace thermoflux::cli
