#include "thermoflux/config.hpp"

#include "thermoflux/error.hpp"
#include "thermoflux/expression.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace thermoflux {

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        // geometry
        "mesh", "refine",
        // coefficients
        "coefficients", "k", "sigma", "seebeck", "emission", "absorption", "k_yy", "sigma_yy", "contrast", "cells",
        "sigma_table", "seebeck_table", "k_table", "boundary_law", "emissivity", "absorptivity",
        "k_lo", "k_hi", "sigma_lo", "sigma_hi", "alpha_seebeck_hi", "b_lo", "b_hi", "gamma_hi",
        // data and exponents
        "g", "theta_e", "ell", "p", "delta", "nu3", "r_sharp", "alpha", "s", "eps", "poincare",
        // solver
        "tol", "max_outer", "relax", "init", "newton_tol", "newton_max", "parallel", "threads", "report_timing",
        // manufactured solutions
        "theta_exact", "phi_exact", "levels", "fd_step",
    };
    return keys;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
    return !k.empty() && std::all_of(k.begin(), k.end(), [](unsigned char c) {
        return std::islower(c) || std::isdigit(c) || c == '_';
    });
}

} // namespace

Config Config::parse(std::istream& in, std::filesystem::path base_dir) {
    Config cfg;
    cfg.base_dir_ = std::move(base_dir);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string text = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (text.empty()) {
            continue;
        }
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw ParseError("expected `key = value`", line);
        }
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (!valid_key(key)) {
            throw ParseError("invalid key '" + key + "'", line);
        }
        if (value.empty()) {
            throw ParseError("empty value for '" + key + "'", line);
        }
        if (cfg.entries_.count(key)) {
            throw ParseError("duplicate key '" + key + "' (first on line " +
                                 std::to_string(cfg.entries_[key].line) + ")",
                             line);
        }
        cfg.entries_[key] = {value, line};
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot read config file " + path.string());
    }
    try {
        return parse(in, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), 0);
    }
}

void Config::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ParseError("override '" + assignment + "' is not key=value", 0);
    }
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    if (!valid_key(key) || value.empty()) {
        throw ParseError("override '" + assignment + "' is not key=value", 0);
    }
    set(key, value);
}

void Config::set(const std::string& key, const std::string& value) { entries_[key] = {value, 0}; }

const Config::Entry* Config::find(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
}

void Config::bad_value(const std::string& key, const std::string& expected) const {
    const Entry* e = find(key);
    throw ParseError(key + ": expected " + expected + ", got '" + e->value + "'", e->line);
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
    const Entry* e = find(key);
    return e ? e->value : fallback;
}

std::optional<double> Config::get_optional(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) {
        return std::nullopt;
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(e->value, &used);
    } catch (const std::exception&) {
        bad_value(key, "a number");
    }
    if (used != e->value.size()) {
        bad_value(key, "a number");
    }
    return v;
}

double Config::get_double(const std::string& key, double fallback) const {
    return get_optional(key).value_or(fallback);
}

int Config::get_int(const std::string& key, int fallback) const {
    const Entry* e = find(key);
    if (!e) {
        return fallback;
    }
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(e->value, &used);
    } catch (const std::exception&) {
        bad_value(key, "an integer");
    }
    if (used != e->value.size()) {
        bad_value(key, "an integer");
    }
    return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const Entry* e = find(key);
    if (!e) {
        return fallback;
    }
    if (e->value == "true" || e->value == "1" || e->value == "on") {
        return true;
    }
    if (e->value == "false" || e->value == "0" || e->value == "off") {
        return false;
    }
    bad_value(key, "true or false");
}

void Config::reject_unknown() const {
    for (const auto& [key, e] : entries_) {
        if (!known_keys().count(key)) {
            throw ParseError("unknown key '" + key + "'", e.line);
        }
    }
}

// ---------------------------------------------------------------------------

namespace {

Expression expression(const Config& cfg, const std::string& key, const std::string& fallback) {
    const std::string text = cfg.get(key, fallback);
    try {
        return Expression::parse(text);
    } catch (const ParseError& e) {
        throw ParseError(key + ": " + e.what(), 0);
    }
}

SpaceFn as_space_fn(Expression e) {
    return [e = std::move(e)](const Point& x) { return e(x.x, x.y); };
}

TriMesh build_mesh(const Config& cfg) {
    if (!cfg.has("mesh")) {
        throw ParseError("missing key 'mesh'", 0);
    }
    const std::string spec = cfg.get("mesh", "");
    TriMesh mesh;
    const std::string prefix = "unit_square:";
    if (spec.rfind(prefix, 0) == 0) {
        const std::string rest = spec.substr(prefix.size());
        const auto colon = rest.find(':');
        const std::string m_text = rest.substr(0, colon);
        int m = 0;
        try {
            std::size_t used = 0;
            m = std::stoi(m_text, &used);
            if (used != m_text.size()) {
                throw std::invalid_argument("trailing characters");
            }
        } catch (const std::exception&) {
            throw ParseError("mesh: expected unit_square:<m>[:<sides>], got '" + spec + "'", 0);
        }
        const SquareSides sides =
            colon == std::string::npos ? SquareSides{} : parse_square_sides(rest.substr(colon + 1));
        mesh = unit_square_mesh(m, sides);
    } else {
        std::filesystem::path p(spec);
        if (p.is_relative()) {
            p = cfg.base_dir() / p;
        }
        mesh = load_mesh(p.string());
    }
    const int refine = cfg.get_int("refine", 0);
    if (refine < 0) {
        throw DomainError("refine must be nonnegative");
    }
    for (int i = 0; i < refine; ++i) {
        mesh = refine_uniform(mesh);
    }
    return mesh;
}

CoefficientModel build_coefficients(const Config& cfg, bool stefan_boltzmann) {
    const std::string name = cfg.get("coefficients", "constant-isotropic");
    double emission = cfg.get_double("emission", 1.0);
    double absorption = cfg.get_double("absorption", 1.0);
    if (stefan_boltzmann) {
        if (cfg.has("emission") || cfg.has("absorption")) {
            throw DomainError("the stefan-boltzmann law takes emissivity/absorptivity, not emission/absorption");
        }
        emission = kStefanBoltzmann * cfg.get_double("emissivity", 1.0);
        absorption = kStefanBoltzmann * cfg.get_double("absorptivity", 1.0);
    }

    CoefficientModel c;
    if (name == "constant-isotropic") {
        ConstantIsotropicParams p;
        p.k = cfg.get_double("k", p.k);
        p.sigma = cfg.get_double("sigma", p.sigma);
        p.seebeck = cfg.get_double("seebeck", p.seebeck);
        p.k_yy = cfg.get_double("k_yy", p.k_yy);
        p.sigma_yy = cfg.get_double("sigma_yy", p.sigma_yy);
        p.emission = emission;
        p.absorption = absorption;
        c = constant_isotropic(p);
    } else if (name == "bismuth-telluride-like") {
        auto p = bismuth_telluride_defaults();
        if (cfg.has("sigma_table")) p.sigma = parse_table(cfg.get("sigma_table", ""));
        if (cfg.has("seebeck_table")) p.seebeck = parse_table(cfg.get("seebeck_table", ""));
        if (cfg.has("k_table")) p.k = parse_table(cfg.get("k_table", ""));
        p.emission = emission;
        p.absorption = absorption;
        c = bismuth_telluride_like(p);
    } else if (name == "discontinuous-checkerboard") {
        CheckerboardParams p;
        p.k = cfg.get_double("k", p.k);
        p.sigma = cfg.get_double("sigma", p.sigma);
        p.contrast = cfg.get_double("contrast", p.contrast);
        p.cells = cfg.get_int("cells", p.cells);
        p.seebeck = cfg.get_double("seebeck", p.seebeck);
        p.emission = emission;
        p.absorption = absorption;
        c = discontinuous_checkerboard(p);
    } else {
        throw ParseError("coefficients: unknown preset '" + name + "'", 0);
    }

    auto& b = c.bounds;
    b.k_lo = cfg.get_double("k_lo", b.k_lo);
    b.k_hi = cfg.get_double("k_hi", b.k_hi);
    b.sigma_lo = cfg.get_double("sigma_lo", b.sigma_lo);
    b.sigma_hi = cfg.get_double("sigma_hi", b.sigma_hi);
    b.alpha_seebeck_hi = cfg.get_double("alpha_seebeck_hi", b.alpha_seebeck_hi);
    b.b_lo = cfg.get_double("b_lo", b.b_lo);
    b.b_hi = cfg.get_double("b_hi", b.b_hi);
    b.gamma_hi = cfg.get_double("gamma_hi", b.gamma_hi);
    b.validate();
    return c;
}

} // namespace

Setup build_setup(const Config& cfg) {
    cfg.reject_unknown();
    Setup s;
    s.mesh = build_mesh(cfg);

    const std::string law = cfg.get("boundary_law", "unit");
    if (law != "unit" && law != "stefan-boltzmann") {
        throw ParseError("boundary_law: expected unit or stefan-boltzmann, got '" + law + "'", 0);
    }
    const bool sb = law == "stefan-boltzmann";
    s.coeffs = build_coefficients(cfg, sb);
    validate_on_mesh(s.coeffs, s.mesh, {-1.0, 0.0, 0.5, 1.0, 2.0, 10.0, 100.0, 200.0, 300.0, 400.0, 500.0, 1000.0});

    auto& d = s.data;
    d.ell = cfg.get_double("ell", sb ? 5.0 : 2.0);
    if (sb && d.ell != 5.0) {
        throw DomainError("the stefan-boltzmann law fixes ell = 5");
    }
    d.g = as_space_fn(expression(cfg, "g", "0"));
    d.theta_e = as_space_fn(expression(cfg, "theta_e", "0"));
    d.p = cfg.get_double("p", 0.0);
    d.delta = cfg.get_double("delta", 1.0);
    // The scalar volume source is zero in both equations, so nu3 defaults to 0.
    d.nu3 = cfg.get_double("nu3", 0.0);
    d.r_sharp = cfg.get_double("r_sharp", 0.0);
    d.alpha = cfg.get_double("alpha", 0.0);
    if (d.p != 0.0 && !(d.p > 1.0)) {
        throw DomainError("p must exceed 1, got " + format_number(d.p));
    }
    if (!(d.delta > 0.0) || d.nu3 < 0.0 || d.r_sharp < 0.0 || d.alpha < 0.0) {
        throw DomainError("delta must be positive and nu3, r_sharp, alpha nonnegative");
    }

    auto& pic = s.picard;
    pic.tol = cfg.get_double("tol", pic.tol);
    pic.max_outer = cfg.get_int("max_outer", pic.max_outer);
    pic.relax = cfg.get_double("relax", pic.relax);
    pic.inner.newton_tol = cfg.get_double("newton_tol", pic.inner.newton_tol);
    pic.inner.newton_max = cfg.get_int("newton_max", pic.inner.newton_max);
    pic.inner.assembly.parallel = cfg.get_bool("parallel", false);
    pic.inner.assembly.threads = cfg.get_int("threads", 0);
    if (!(pic.tol > 0.0) || pic.max_outer < 1 || !(pic.relax > 0.0 && pic.relax <= 1.0)) {
        throw DomainError("need tol > 0, max_outer >= 1 and relax in (0, 1]");
    }
    if (cfg.has("init")) {
        const Expression e = expression(cfg, "init", "0");
        Field init;
        for (const auto& x : s.mesh.nodes) {
            init.push_back(e(x.x, x.y));
        }
        pic.init = std::move(init);
    }

    s.s = cfg.get_double("s", 2.0);
    if (!(s.s >= 2.0)) {
        throw DomainError("s must be at least 2");
    }
    s.audit.s = s.s;
    s.audit.poincare = cfg.get_optional("poincare");
    s.eps = cfg.get_optional("eps");
    s.report_timing = cfg.get_bool("report_timing", false);

    auto& m = s.mms;
    m.theta = expression(cfg, "theta_exact", "sin(pi*x)*sin(pi*y) + 2");
    m.phi = expression(cfg, "phi_exact", "0.1*cos(pi*x)*cos(pi*y)");
    m.ell = d.ell;
    m.levels = cfg.get_int("levels", 3);
    m.fd_step = cfg.get_double("fd_step", 1e-6);
    m.picard = pic;
    m.picard.tol = cfg.get_double("tol", 1e-11);
    m.picard.compute_ball = false;
    m.picard.init.reset();
    return s;
}

} // namespace thermoflux
