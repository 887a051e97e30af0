#pragma once

// Temperature-dependent material data: conductivity tensors, Seebeck
// coefficient and the two boundary radiation factors.

#include "thermoflux/constants.hpp"
#include "thermoflux/mesh.hpp"

#include <functional>
#include <string>
#include <vector>

namespace thermoflux {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

/// Symmetric 2x2 tensor [[xx, xy], [xy, yy]].
struct Tensor2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    static Tensor2 iso(double v) { return {v, 0.0, v}; }
    static Tensor2 diag(double a, double b) { return {a, 0.0, b}; }

    Vec2 apply(const Vec2& v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
    double quad(const Vec2& a, const Vec2& b) const { return dot(a, apply(b)); }
    Tensor2 scaled(double s) const { return {s * xx, s * xy, s * yy}; }
    double min_eig() const;
    double max_eig() const;
    bool finite() const;
};

using TensorFn = std::function<Tensor2(const Point& x, double T)>;
using ScalarFn = std::function<double(const Point& x, double T)>;

struct CoefficientModel {
    std::string name;
    TensorFn k;          ///< thermal conductivity
    TensorFn sigma;      ///< electrical conductivity
    ScalarFn seebeck;    ///< alpha_s
    ScalarFn emission;   ///< f_lambda
    ScalarFn absorption; ///< gamma
    constants::CoefficientBounds bounds;

    /// Peltier coefficient from the first Kelvin relation, T alpha_s(T).
    double peltier(const Point& x, double T) const { return T * seebeck(x, T); }
};

/// Checks ellipticity, boundedness and the scalar bounds on a sample set.
/// Throws InvariantError naming the sample that violates them.
void validate_samples(const CoefficientModel& c, const std::vector<Point>& points,
                      const std::vector<double>& temperatures);

/// Default samples: element centroids of the mesh and a temperature sweep.
void validate_on_mesh(const CoefficientModel& c, const TriMesh& mesh, const std::vector<double>& temperatures);

struct ConstantIsotropicParams {
    double k = 1.0;
    double sigma = 1.0;
    double seebeck = 0.0;
    double emission = 1.0;
    double absorption = 1.0;
    double k_yy = 0.0;      ///< 0 keeps the tensor isotropic
    double sigma_yy = 0.0;  ///< 0 keeps the tensor isotropic
};

CoefficientModel constant_isotropic(const ConstantIsotropicParams& p);

/// Piecewise-linear tables over temperature, clamped outside the table range.
struct Table1D {
    std::vector<double> t;
    std::vector<double> v;

    double operator()(double T) const;
    double min() const;
    double max() const;
};

/// Parses "T1:v1, T2:v2, ..." with strictly increasing T.
Table1D parse_table(const std::string& text);

struct BismuthTellurideParams {
    Table1D sigma;    ///< S/m
    Table1D seebeck;  ///< V/K
    Table1D k;        ///< W/(m K)
    double emission = 1.0;
    double absorption = 1.0;
};

/// Default tables over 200..500 K shaped like Bi2Te3 data.
BismuthTellurideParams bismuth_telluride_defaults();
CoefficientModel bismuth_telluride_like(const BismuthTellurideParams& p);

struct CheckerboardParams {
    double k = 1.0;
    double sigma = 1.0;
    double contrast = 10.0;  ///< multiplier on the odd cells
    int cells = 4;           ///< cells per side of the unit square
    double seebeck = 0.0;
    double emission = 1.0;
    double absorption = 1.0;
};

CoefficientModel discontinuous_checkerboard(const CheckerboardParams& p);

constexpr double kStefanBoltzmann = 5.67e-8;

} // namespace thermoflux
