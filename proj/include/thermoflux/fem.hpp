#pragma once

// P1 finite elements on a TriMesh: sparse symmetric matrices, assembly of
// diffusion, radiation and load terms, a preconditioned CG solver with an
// optional zero-mean constraint, and discrete norms.

#include "thermoflux/coefficients.hpp"
#include "thermoflux/mesh.hpp"

#include <array>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace thermoflux {

using Field = std::vector<double>;

/// Throws InvariantError unless the field has one finite value per node.
void check_field(const TriMesh& mesh, const Field& f, const char* name);

/// Symmetric matrix in CSR form with both triangles stored. The pattern is
/// fixed at construction; values are added in place.
class SparseSymMatrix {
public:
    SparseSymMatrix() = default;
    SparseSymMatrix(int dim, std::vector<int> row_ptr, std::vector<int> cols);

    static SparseSymMatrix identity(int dim);
    /// Dense input, symmetrized check included (throws InvariantError if not symmetric).
    static SparseSymMatrix from_dense(const std::vector<std::vector<double>>& a);

    int dim() const { return dim_; }
    /// Slot of (i, j) in values(), or -1 when outside the pattern.
    int slot(int i, int j) const;
    double get(int i, int j) const;
    void add(int i, int j, double v);

    void multiply(const double* x, double* y) const;
    Field multiply(const Field& x) const;
    Field diagonal() const;

    /// this += s * other; patterns must match.
    void axpy(double s, const SparseSymMatrix& other);
    bool same_pattern(const SparseSymMatrix& other) const;
    bool is_symmetric() const;

    const std::vector<int>& row_ptr() const { return row_ptr_; }
    const std::vector<int>& cols() const { return cols_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    /// Coordinate text, one `i j value` line per stored entry.
    void dump(std::ostream& out) const;

private:
    int dim_ = 0;
    std::vector<int> row_ptr_;
    std::vector<int> cols_;
    std::vector<double> values_;
};

/// Point on a boundary edge where a surface integrand is sampled.
struct EdgeQuadPoint {
    int edge = 0;       ///< index into TriMesh::boundary_edges
    Point x;
    double wa = 0.0;    ///< hat function of edge.a at x
    double wb = 0.0;    ///< hat function of edge.b at x
};

/// Precomputed element geometry, matrix pattern and boundary edge lists.
class P1Space {
public:
    explicit P1Space(TriMesh mesh);

    const TriMesh& mesh() const { return mesh_; }
    int num_nodes() const { return mesh_.num_nodes(); }
    int num_triangles() const { return mesh_.num_triangles(); }
    double area(int t) const { return area_[static_cast<std::size_t>(t)]; }
    /// Gradients of the three hat functions of triangle t.
    const std::array<Vec2, 3>& grads(int t) const { return grads_[static_cast<std::size_t>(t)]; }
    Point centroid(int t) const;
    const std::array<int, 9>& slots(int t) const { return slots_[static_cast<std::size_t>(t)]; }
    /// Lumped weights area/3 per incident triangle; sum_i w_i v_i = integral of a P1 field.
    const Field& node_weights() const { return node_weights_; }
    const std::vector<int>& edges(BoundaryTag tag) const {
        return tag == BoundaryTag::Gamma ? gamma_edges_ : gamma_n_edges_;
    }
    double edge_length(int e) const { return edge_length_[static_cast<std::size_t>(e)]; }
    const constants::GeometrySummary& geometry() const { return geometry_; }

    SparseSymMatrix zero_matrix() const;

    /// Gradient of a P1 field on triangle t.
    Vec2 gradient(const Field& f, int t) const;
    double element_mean(const Field& f, int t) const;
    double integral(const Field& f) const;

private:
    TriMesh mesh_;
    std::vector<double> area_;
    std::vector<std::array<Vec2, 3>> grads_;
    std::vector<std::array<int, 9>> slots_;
    Field node_weights_;
    std::vector<int> gamma_edges_;
    std::vector<int> gamma_n_edges_;
    std::vector<double> edge_length_;
    constants::GeometrySummary geometry_;
    std::vector<int> row_ptr_;
    std::vector<int> cols_;
};

/// Three-point Gauss rule on [0, 1] (exact to degree 5).
struct EdgeRule {
    static constexpr int size = 3;
    std::array<double, 3> t;
    std::array<double, 3> w;
};
const EdgeRule& edge_rule();

/// Quadrature points of boundary edge e under edge_rule(), with weights
/// already multiplied by the edge length.
std::array<std::pair<EdgeQuadPoint, double>, 3> edge_quadrature(const P1Space& space, int e);

/// Seven-point triangle rule, exact to degree 5, in barycentric form.
struct TriangleRule {
    static constexpr int size = 7;
    std::array<std::array<double, 3>, 7> bary;
    std::array<double, 7> w;  ///< sums to 1; multiply by the area
};
const TriangleRule& triangle_rule();

/// Stiffness matrix of one triangle for a constant tensor.
std::array<std::array<double, 3>, 3> element_stiffness(const std::array<Point, 3>& v, const Tensor2& a);

struct AssemblyOptions {
    bool parallel = false;
    int threads = 0;  ///< 0 selects std::thread::hardware_concurrency()
};

/// Diffusion matrix with the tensor frozen per element at (centroid, mean T).
SparseSymMatrix assemble_diffusion(const P1Space& space, const TensorFn& tensor, const Field& temp,
                                   const AssemblyOptions& opts = {});

struct RadiationSystem {
    Field residual;
    SparseSymMatrix jacobian;
};

/// Boundary term int_G f(x, theta) |Theta|^{ell-2} Theta v and its Jacobian in Theta.
/// `jacobian_floor` > 0 replaces |Theta| by max(|Theta|, floor) in the Jacobian only.
RadiationSystem assemble_radiation(const P1Space& space, const ScalarFn& f_lambda, const Field& temp_for_coeff,
                                   const Field& state, double ell, double jacobian_floor = 0.0);

/// b_i = int_{tag} density * phi_i ds.
using EdgeDensity = std::function<double(const EdgeQuadPoint&)>;
Field assemble_surface_load(const P1Space& space, BoundaryTag tag, const EdgeDensity& density);
Field assemble_surface_load(const P1Space& space, BoundaryTag tag, const std::function<double(const Point&)>& density);

/// b_i = sum_t area_t F_t . grad phi_i for an element-constant vector field F.
Field assemble_flux_load(const P1Space& space, const std::function<Vec2(int t)>& flux);

/// Boundary mass matrix int_{tag} phi_i phi_j ds.
SparseSymMatrix assemble_boundary_mass(const P1Space& space, BoundaryTag tag);

enum class Constraint { None, ZeroMean };

struct SolveOptions {
    double rel_tol = 1e-12;
    int max_iter = 0;  ///< 0 selects 10 * dim + 100
    int direct_below = 2000;
};

struct SolveStats {
    int iterations = 0;
    double rel_residual = 0.0;
    bool direct = false;
    double multiplier = 0.0;  ///< Lagrange multiplier of the zero-mean constraint
};

/// Solves A x = b. With ZeroMean, A must be singular with kernel = constants;
/// the constraint sum_i w_i x_i = 0 is enforced through one multiplier.
Field solve_spd(const SparseSymMatrix& A, const Field& b, Constraint constraint, const Field& weights,
                const SolveOptions& opts = {}, SolveStats* stats = nullptr);

struct FieldNorms {
    double wp_seminorm = 0.0;  ///< ||grad v||_{p, Omega}
    double boundary_l = 0.0;   ///< ||v||_{ell, Gamma}
    double sup = 0.0;          ///< max |v_i|
    double v_norm = 0.0;       ///< wp_seminorm + boundary_l
};

FieldNorms norms(const P1Space& space, const Field& v, double p, double ell);

/// L^q norm over the edges with `tag` of a function sampled at quadrature points.
double boundary_lq(const P1Space& space, BoundaryTag tag, double q, const EdgeDensity& fn);
/// L^q norm over Omega of an element-constant function.
double element_lq(const P1Space& space, double q, const std::function<double(int t)>& fn);

/// CSV with header `node,x,y,value`.
void write_field_csv(const TriMesh& mesh, const Field& f, std::ostream& out);
/// Reads a field written by write_field_csv; checks node count and coordinates.
Field read_field_csv(const TriMesh& mesh, std::istream& in);

} // namespace thermoflux
