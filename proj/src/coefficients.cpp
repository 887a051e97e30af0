#include "thermoflux/coefficients.hpp"

#include "thermoflux/error.hpp"
#include "thermoflux/kv.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace thermoflux {

namespace {

constexpr double kSlack = 1e-12;

std::string sample_name(const Point& x, double T) {
    return "at (" + format_number(x.x) + ", " + format_number(x.y) + "), T = " + format_number(T);
}

void check_tensor(const Tensor2& t, double lo, double hi, const char* name, const Point& x, double T) {
    if (!t.finite()) {
        throw InvariantError(std::string(name) + " is not finite " + sample_name(x, T));
    }
    if (t.min_eig() < lo * (1.0 - kSlack)) {
        throw InvariantError(std::string(name) + " violates ellipticity bound " + format_number(lo) + " " +
                             sample_name(x, T));
    }
    if (t.max_eig() > hi * (1.0 + kSlack)) {
        throw InvariantError(std::string(name) + " exceeds upper bound " + format_number(hi) + " " +
                             sample_name(x, T));
    }
}

void check_range(double v, double lo, double hi, const char* name, const Point& x, double T) {
    if (!std::isfinite(v) || v < lo - kSlack * std::abs(lo) || v > hi + kSlack * std::abs(hi)) {
        throw InvariantError(std::string(name) + " = " + format_number(v) + " outside [" + format_number(lo) + ", " +
                             format_number(hi) + "] " + sample_name(x, T));
    }
}

} // namespace

double Tensor2::min_eig() const {
    const double m = 0.5 * (xx + yy);
    const double d = std::hypot(0.5 * (xx - yy), xy);
    return m - d;
}

double Tensor2::max_eig() const {
    const double m = 0.5 * (xx + yy);
    const double d = std::hypot(0.5 * (xx - yy), xy);
    return m + d;
}

bool Tensor2::finite() const { return std::isfinite(xx) && std::isfinite(xy) && std::isfinite(yy); }

void validate_samples(const CoefficientModel& c, const std::vector<Point>& points,
                      const std::vector<double>& temperatures) {
    const auto& b = c.bounds;
    b.validate();
    for (const auto& x : points) {
        for (double T : temperatures) {
            check_tensor(c.k(x, T), b.k_lo, b.k_hi, "k", x, T);
            check_tensor(c.sigma(x, T), b.sigma_lo, b.sigma_hi, "sigma", x, T);
            check_range(c.seebeck(x, T), -b.alpha_seebeck_hi, b.alpha_seebeck_hi, "alpha_s", x, T);
            check_range(c.emission(x, T), b.b_lo, b.b_hi, "f_lambda", x, T);
            check_range(c.absorption(x, T), -b.gamma_hi, b.gamma_hi, "gamma", x, T);
        }
    }
}

void validate_on_mesh(const CoefficientModel& c, const TriMesh& mesh, const std::vector<double>& temperatures) {
    std::vector<Point> pts;
    pts.reserve(mesh.triangles.size() + mesh.boundary_edges.size());
    for (const auto& t : mesh.triangles) {
        const auto& a = mesh.nodes[static_cast<std::size_t>(t[0])];
        const auto& b = mesh.nodes[static_cast<std::size_t>(t[1])];
        const auto& d = mesh.nodes[static_cast<std::size_t>(t[2])];
        pts.push_back({(a.x + b.x + d.x) / 3.0, (a.y + b.y + d.y) / 3.0});
    }
    for (const auto& e : mesh.boundary_edges) {
        const auto& a = mesh.nodes[static_cast<std::size_t>(e.a)];
        const auto& b = mesh.nodes[static_cast<std::size_t>(e.b)];
        pts.push_back({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
    }
    validate_samples(c, pts, temperatures);
}

CoefficientModel constant_isotropic(const ConstantIsotropicParams& p) {
    const Tensor2 k{p.k, 0.0, p.k_yy > 0.0 ? p.k_yy : p.k};
    const Tensor2 s{p.sigma, 0.0, p.sigma_yy > 0.0 ? p.sigma_yy : p.sigma};
    CoefficientModel c;
    c.name = "constant-isotropic";
    c.k = [k](const Point&, double) { return k; };
    c.sigma = [s](const Point&, double) { return s; };
    c.seebeck = [v = p.seebeck](const Point&, double) { return v; };
    c.emission = [v = p.emission](const Point&, double) { return v; };
    c.absorption = [v = p.absorption](const Point&, double) { return v; };
    auto& b = c.bounds;
    b.k_lo = std::min(k.xx, k.yy);
    b.k_hi = std::max(k.xx, k.yy);
    b.sigma_lo = std::min(s.xx, s.yy);
    b.sigma_hi = std::max(s.xx, s.yy);
    b.a_lo = b.k_lo;
    b.a_hi = b.k_hi;
    b.alpha_seebeck_hi = std::abs(p.seebeck);
    b.b_lo = p.emission;
    b.b_hi = p.emission;
    b.gamma_hi = std::abs(p.absorption);
    return c;
}

double Table1D::operator()(double T) const {
    if (T <= t.front()) {
        return v.front();
    }
    if (T >= t.back()) {
        return v.back();
    }
    const auto it = std::upper_bound(t.begin(), t.end(), T);
    const auto i = static_cast<std::size_t>(it - t.begin());
    const double w = (T - t[i - 1]) / (t[i] - t[i - 1]);
    return (1.0 - w) * v[i - 1] + w * v[i];
}

double Table1D::min() const { return *std::min_element(v.begin(), v.end()); }

double Table1D::max() const { return *std::max_element(v.begin(), v.end()); }

Table1D parse_table(const std::string& text) {
    Table1D tab;
    std::istringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw ParseError("table entry '" + item + "' is not T:value", 0);
        }
        try {
            tab.t.push_back(std::stod(item.substr(0, colon)));
            tab.v.push_back(std::stod(item.substr(colon + 1)));
        } catch (const std::exception&) {
            throw ParseError("table entry '" + item + "' is not numeric", 0);
        }
    }
    if (tab.t.empty()) {
        throw ParseError("empty table", 0);
    }
    for (std::size_t i = 1; i < tab.t.size(); ++i) {
        if (!(tab.t[i] > tab.t[i - 1])) {
            throw ParseError("table temperatures must increase strictly", 0);
        }
    }
    return tab;
}

BismuthTellurideParams bismuth_telluride_defaults() {
    BismuthTellurideParams p;
    p.sigma = {{200.0, 500.0}, {1.4e5, 0.6e5}};
    p.seebeck = {{200.0, 350.0, 500.0}, {1.6e-4, 2.2e-4, 1.9e-4}};
    p.k = {{200.0, 350.0, 500.0}, {1.6, 1.4, 1.9}};
    return p;
}

CoefficientModel bismuth_telluride_like(const BismuthTellurideParams& p) {
    CoefficientModel c;
    c.name = "bismuth-telluride-like";
    c.k = [t = p.k](const Point&, double T) { return Tensor2::iso(t(T)); };
    c.sigma = [t = p.sigma](const Point&, double T) { return Tensor2::iso(t(T)); };
    c.seebeck = [t = p.seebeck](const Point&, double T) { return t(T); };
    c.emission = [v = p.emission](const Point&, double) { return v; };
    c.absorption = [v = p.absorption](const Point&, double) { return v; };
    auto& b = c.bounds;
    b.k_lo = p.k.min();
    b.k_hi = p.k.max();
    b.sigma_lo = p.sigma.min();
    b.sigma_hi = p.sigma.max();
    b.a_lo = b.k_lo;
    b.a_hi = b.k_hi;
    b.alpha_seebeck_hi = std::max(std::abs(p.seebeck.min()), std::abs(p.seebeck.max()));
    b.b_lo = p.emission;
    b.b_hi = p.emission;
    b.gamma_hi = std::abs(p.absorption);
    return c;
}

CoefficientModel discontinuous_checkerboard(const CheckerboardParams& p) {
    if (p.cells < 1 || !(p.contrast > 0.0)) {
        throw DomainError("checkerboard needs cells >= 1 and a positive contrast");
    }
    auto factor = [n = p.cells, c = p.contrast](const Point& x) {
        const int i = std::clamp(static_cast<int>(std::floor(x.x * n)), 0, n - 1);
        const int j = std::clamp(static_cast<int>(std::floor(x.y * n)), 0, n - 1);
        return (i + j) % 2 == 1 ? c : 1.0;
    };
    CoefficientModel c;
    c.name = "discontinuous-checkerboard";
    c.k = [factor, k = p.k](const Point& x, double) { return Tensor2::iso(k * factor(x)); };
    c.sigma = [factor, s = p.sigma](const Point& x, double) { return Tensor2::iso(s * factor(x)); };
    c.seebeck = [v = p.seebeck](const Point&, double) { return v; };
    c.emission = [v = p.emission](const Point&, double) { return v; };
    c.absorption = [v = p.absorption](const Point&, double) { return v; };
    auto& b = c.bounds;
    b.k_lo = p.k * std::min(1.0, p.contrast);
    b.k_hi = p.k * std::max(1.0, p.contrast);
    b.sigma_lo = p.sigma * std::min(1.0, p.contrast);
    b.sigma_hi = p.sigma * std::max(1.0, p.contrast);
    b.a_lo = b.k_lo;
    b.a_hi = b.k_hi;
    b.alpha_seebeck_hi = std::abs(p.seebeck);
    b.b_lo = p.emission;
    b.b_hi = p.emission;
    b.gamma_hi = std::abs(p.absorption);
    return c;
}

} // namespace thermoflux
