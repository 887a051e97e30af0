#include "thermoflux/fem.hpp"

#include "thermoflux/error.hpp"
#include "thermoflux/kv.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace thermoflux {

namespace {

double norm2(const Field& v) {
    double s = 0.0;
    for (double x : v) {
        s += x * x;
    }
    return std::sqrt(s);
}

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

// Envelope Cholesky for the direct fallback; rows are stored from their
// first nonzero column to the diagonal.
class SkylineCholesky {
public:
    explicit SkylineCholesky(const SparseSymMatrix& A, int pinned) : n_(A.dim()), first_(idx(n_)), start_(idx(n_) + 1) {
        const auto& rp = A.row_ptr();
        const auto& cols = A.cols();
        for (int i = 0; i < n_; ++i) {
            int f = i;
            if (i != pinned) {
                for (int k = rp[idx(i)]; k < rp[idx(i) + 1]; ++k) {
                    if (cols[idx(k)] != pinned) {
                        f = std::min(f, cols[idx(k)]);
                    }
                }
            }
            first_[idx(i)] = f;
            start_[idx(i) + 1] = start_[idx(i)] + static_cast<std::size_t>(i - f + 1);
        }
        L_.assign(start_.back(), 0.0);
        for (int i = 0; i < n_; ++i) {
            if (i == pinned) {
                at(i, i) = 1.0;
                continue;
            }
            for (int k = rp[idx(i)]; k < rp[idx(i) + 1]; ++k) {
                const int j = cols[idx(k)];
                if (j <= i && j != pinned) {
                    at(i, j) = A.values()[idx(k)];
                }
            }
        }
        for (int i = 0; i < n_; ++i) {
            const int fi = first_[idx(i)];
            for (int j = fi; j <= i; ++j) {
                const int lo = std::max(fi, first_[idx(j)]);
                double s = at(i, j);
                for (int k = lo; k < j; ++k) {
                    s -= at(i, k) * at(j, k);
                }
                if (j < i) {
                    at(i, j) = s / at(j, j);
                } else {
                    if (!(s > 0.0)) {
                        throw SolverError("direct solve: matrix is not positive definite at row " + std::to_string(i),
                                          {});
                    }
                    at(i, i) = std::sqrt(s);
                }
            }
        }
    }

    Field solve(Field b) const {
        for (int i = 0; i < n_; ++i) {
            double s = b[idx(i)];
            for (int k = first_[idx(i)]; k < i; ++k) {
                s -= at(i, k) * b[idx(k)];
            }
            b[idx(i)] = s / at(i, i);
        }
        for (int i = n_ - 1; i >= 0; --i) {
            b[idx(i)] /= at(i, i);
            const double xi = b[idx(i)];
            for (int k = first_[idx(i)]; k < i; ++k) {
                b[idx(k)] -= at(i, k) * xi;
            }
        }
        return b;
    }

private:
    double& at(int i, int j) { return L_[start_[idx(i)] + idx(j - first_[idx(i)])]; }
    double at(int i, int j) const { return L_[start_[idx(i)] + idx(j - first_[idx(i)])]; }

    int n_;
    std::vector<int> first_;
    std::vector<std::size_t> start_;
    std::vector<double> L_;
};

template <class F>
void for_elements(int count, const AssemblyOptions& opts, F&& body) {
    if (!opts.parallel || count < 64) {
        for (int t = 0; t < count; ++t) {
            body(t);
        }
        return;
    }
    int nt = opts.threads > 0 ? opts.threads : static_cast<int>(std::thread::hardware_concurrency());
    nt = std::clamp(nt, 1, 64);
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(idx(nt));
    const int chunk = (count + nt - 1) / nt;
    for (int w = 0; w < nt; ++w) {
        pool.emplace_back([&, w] {
            try {
                const int end = std::min(count, (w + 1) * chunk);
                for (int t = w * chunk; t < end; ++t) {
                    body(t);
                }
            } catch (...) {
                errors[idx(w)] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

} // namespace

void check_field(const TriMesh& mesh, const Field& f, const char* name) {
    if (f.size() != mesh.nodes.size()) {
        throw InvariantError(std::string(name) + " has " + std::to_string(f.size()) + " values for " +
                             std::to_string(mesh.nodes.size()) + " nodes");
    }
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (!std::isfinite(f[i])) {
            throw InvariantError(std::string(name) + " is not finite at node " + std::to_string(i));
        }
    }
}

// ---------------------------------------------------------------------------
// SparseSymMatrix

SparseSymMatrix::SparseSymMatrix(int dim, std::vector<int> row_ptr, std::vector<int> cols)
    : dim_(dim), row_ptr_(std::move(row_ptr)), cols_(std::move(cols)), values_(cols_.size(), 0.0) {}

SparseSymMatrix SparseSymMatrix::identity(int dim) {
    std::vector<int> rp(idx(dim) + 1);
    std::vector<int> cols(idx(dim));
    std::iota(rp.begin(), rp.end(), 0);
    std::iota(cols.begin(), cols.end(), 0);
    SparseSymMatrix m(dim, std::move(rp), std::move(cols));
    std::fill(m.values_.begin(), m.values_.end(), 1.0);
    return m;
}

SparseSymMatrix SparseSymMatrix::from_dense(const std::vector<std::vector<double>>& a) {
    const int n = static_cast<int>(a.size());
    std::vector<int> rp{0};
    std::vector<int> cols;
    for (int i = 0; i < n; ++i) {
        if (a[idx(i)].size() != a.size()) {
            throw InvariantError("dense matrix is not square");
        }
        for (int j = 0; j < n; ++j) {
            if (a[idx(i)][idx(j)] != a[idx(j)][idx(i)]) {
                throw InvariantError("dense matrix is not symmetric");
            }
            if (a[idx(i)][idx(j)] != 0.0 || i == j) {
                cols.push_back(j);
            }
        }
        rp.push_back(static_cast<int>(cols.size()));
    }
    SparseSymMatrix m(n, std::move(rp), std::move(cols));
    for (int i = 0; i < n; ++i) {
        for (int k = m.row_ptr_[idx(i)]; k < m.row_ptr_[idx(i) + 1]; ++k) {
            m.values_[idx(k)] = a[idx(i)][idx(m.cols_[idx(k)])];
        }
    }
    return m;
}

int SparseSymMatrix::slot(int i, int j) const {
    const auto begin = cols_.begin() + row_ptr_[idx(i)];
    const auto end = cols_.begin() + row_ptr_[idx(i) + 1];
    const auto it = std::lower_bound(begin, end, j);
    return (it != end && *it == j) ? static_cast<int>(it - cols_.begin()) : -1;
}

double SparseSymMatrix::get(int i, int j) const {
    const int s = slot(i, j);
    return s < 0 ? 0.0 : values_[idx(s)];
}

void SparseSymMatrix::add(int i, int j, double v) {
    const int s = slot(i, j);
    if (s < 0) {
        throw AssemblyError("entry (" + std::to_string(i) + ", " + std::to_string(j) + ") outside the matrix pattern");
    }
    values_[idx(s)] += v;
}

void SparseSymMatrix::multiply(const double* x, double* y) const {
    for (int i = 0; i < dim_; ++i) {
        double s = 0.0;
        for (int k = row_ptr_[idx(i)]; k < row_ptr_[idx(i) + 1]; ++k) {
            s += values_[idx(k)] * x[cols_[idx(k)]];
        }
        y[i] = s;
    }
}

Field SparseSymMatrix::multiply(const Field& x) const {
    Field y(idx(dim_));
    multiply(x.data(), y.data());
    return y;
}

Field SparseSymMatrix::diagonal() const {
    Field d(idx(dim_), 0.0);
    for (int i = 0; i < dim_; ++i) {
        d[idx(i)] = get(i, i);
    }
    return d;
}

bool SparseSymMatrix::same_pattern(const SparseSymMatrix& other) const {
    return dim_ == other.dim_ && row_ptr_ == other.row_ptr_ && cols_ == other.cols_;
}

void SparseSymMatrix::axpy(double s, const SparseSymMatrix& other) {
    if (!same_pattern(other)) {
        throw AssemblyError("matrix patterns differ");
    }
    for (std::size_t k = 0; k < values_.size(); ++k) {
        values_[k] += s * other.values_[k];
    }
}

bool SparseSymMatrix::is_symmetric() const {
    for (int i = 0; i < dim_; ++i) {
        for (int k = row_ptr_[idx(i)]; k < row_ptr_[idx(i) + 1]; ++k) {
            const int j = cols_[idx(k)];
            const int s = slot(j, i);
            if (s < 0 || values_[idx(s)] != values_[idx(k)]) {
                return false;
            }
        }
    }
    return true;
}

void SparseSymMatrix::dump(std::ostream& out) const {
    for (int i = 0; i < dim_; ++i) {
        for (int k = row_ptr_[idx(i)]; k < row_ptr_[idx(i) + 1]; ++k) {
            out << i << ' ' << cols_[idx(k)] << ' ' << format_number(values_[idx(k)]) << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// P1Space

P1Space::P1Space(TriMesh mesh) : mesh_(std::move(mesh)) {
    validate_mesh(mesh_);
    const int nt = mesh_.num_triangles();
    const int nv = mesh_.num_nodes();
    area_.resize(idx(nt));
    grads_.resize(idx(nt));
    node_weights_.assign(idx(nv), 0.0);
    std::vector<std::set<int>> adj(idx(nv));
    for (int t = 0; t < nt; ++t) {
        const auto& tri = mesh_.triangles[idx(t)];
        const double a = mesh_.signed_area(t);
        area_[idx(t)] = a;
        for (int i = 0; i < 3; ++i) {
            const auto& p1 = mesh_.nodes[idx(tri[idx((i + 1) % 3)])];
            const auto& p2 = mesh_.nodes[idx(tri[idx((i + 2) % 3)])];
            grads_[idx(t)][idx(i)] = {(p1.y - p2.y) / (2.0 * a), (p2.x - p1.x) / (2.0 * a)};
            node_weights_[idx(tri[idx(i)])] += a / 3.0;
            for (int j = 0; j < 3; ++j) {
                adj[idx(tri[idx(i)])].insert(tri[idx(j)]);
            }
        }
    }
    row_ptr_.assign(idx(nv) + 1, 0);
    for (int i = 0; i < nv; ++i) {
        row_ptr_[idx(i) + 1] = row_ptr_[idx(i)] + static_cast<int>(adj[idx(i)].size());
        cols_.insert(cols_.end(), adj[idx(i)].begin(), adj[idx(i)].end());
    }
    const SparseSymMatrix pattern(nv, row_ptr_, cols_);
    slots_.resize(idx(nt));
    for (int t = 0; t < nt; ++t) {
        const auto& tri = mesh_.triangles[idx(t)];
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                slots_[idx(t)][idx(3 * i + j)] = pattern.slot(tri[idx(i)], tri[idx(j)]);
            }
        }
    }
    for (int e = 0; e < static_cast<int>(mesh_.boundary_edges.size()); ++e) {
        const auto& be = mesh_.boundary_edges[idx(e)];
        edge_length_.push_back(mesh_.edge_length(be));
        (be.tag == BoundaryTag::Gamma ? gamma_edges_ : gamma_n_edges_).push_back(e);
    }
    geometry_ = geometry_summary(mesh_);
}

Point P1Space::centroid(int t) const {
    const auto& tri = mesh_.triangles[idx(t)];
    const auto& a = mesh_.nodes[idx(tri[0])];
    const auto& b = mesh_.nodes[idx(tri[1])];
    const auto& c = mesh_.nodes[idx(tri[2])];
    return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

SparseSymMatrix P1Space::zero_matrix() const { return SparseSymMatrix(num_nodes(), row_ptr_, cols_); }

Vec2 P1Space::gradient(const Field& f, int t) const {
    const auto& tri = mesh_.triangles[idx(t)];
    const auto& g = grads(t);
    Vec2 out;
    for (int i = 0; i < 3; ++i) {
        const double v = f[idx(tri[idx(i)])];
        out.x += v * g[idx(i)].x;
        out.y += v * g[idx(i)].y;
    }
    return out;
}

double P1Space::element_mean(const Field& f, int t) const {
    const auto& tri = mesh_.triangles[idx(t)];
    return (f[idx(tri[0])] + f[idx(tri[1])] + f[idx(tri[2])]) / 3.0;
}

double P1Space::integral(const Field& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        s += node_weights_[i] * f[i];
    }
    return s;
}

// ---------------------------------------------------------------------------
// Quadrature

const EdgeRule& edge_rule() {
    static const EdgeRule rule = [] {
        const double d = std::sqrt(3.0 / 5.0) / 2.0;
        return EdgeRule{{0.5 - d, 0.5, 0.5 + d}, {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
    }();
    return rule;
}

std::array<std::pair<EdgeQuadPoint, double>, 3> edge_quadrature(const P1Space& space, int e) {
    const auto& be = space.mesh().boundary_edges[idx(e)];
    const auto& a = space.mesh().nodes[idx(be.a)];
    const auto& b = space.mesh().nodes[idx(be.b)];
    const double len = space.edge_length(e);
    const auto& rule = edge_rule();
    std::array<std::pair<EdgeQuadPoint, double>, 3> out;
    for (std::size_t q = 0; q < 3; ++q) {
        const double t = rule.t[q];
        EdgeQuadPoint p;
        p.edge = e;
        p.wa = 1.0 - t;
        p.wb = t;
        p.x = {p.wa * a.x + p.wb * b.x, p.wa * a.y + p.wb * b.y};
        out[q] = {p, rule.w[q] * len};
    }
    return out;
}

const TriangleRule& triangle_rule() {
    static const TriangleRule rule = [] {
        const double s15 = std::sqrt(15.0);
        const double a1 = (6.0 - s15) / 21.0;
        const double b1 = (9.0 + 2.0 * s15) / 21.0;
        const double a2 = (6.0 + s15) / 21.0;
        const double b2 = (9.0 - 2.0 * s15) / 21.0;
        const double w1 = (155.0 - s15) / 1200.0;
        const double w2 = (155.0 + s15) / 1200.0;
        TriangleRule r;
        r.bary = {{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0},
                   {a1, a1, b1},
                   {a1, b1, a1},
                   {b1, a1, a1},
                   {a2, a2, b2},
                   {a2, b2, a2},
                   {b2, a2, a2}}};
        r.w = {9.0 / 40.0, w1, w1, w1, w2, w2, w2};
        return r;
    }();
    return rule;
}

// ---------------------------------------------------------------------------
// Assembly

std::array<std::array<double, 3>, 3> element_stiffness(const std::array<Point, 3>& v, const Tensor2& a) {
    const double area = 0.5 * ((v[1].x - v[0].x) * (v[2].y - v[0].y) - (v[1].y - v[0].y) * (v[2].x - v[0].x));
    std::array<Vec2, 3> g;
    for (std::size_t i = 0; i < 3; ++i) {
        const auto& p1 = v[(i + 1) % 3];
        const auto& p2 = v[(i + 2) % 3];
        g[i] = {(p1.y - p2.y) / (2.0 * area), (p2.x - p1.x) / (2.0 * area)};
    }
    std::array<std::array<double, 3>, 3> K{};
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = i; j < 3; ++j) {
            K[i][j] = area * a.quad(g[i], g[j]);
            K[j][i] = K[i][j];
        }
    }
    return K;
}

SparseSymMatrix assemble_diffusion(const P1Space& space, const TensorFn& tensor, const Field& temp,
                                   const AssemblyOptions& opts) {
    check_field(space.mesh(), temp, "temperature");
    const int nt = space.num_triangles();
    std::vector<std::array<double, 9>> local(idx(nt));
    for_elements(nt, opts, [&](int t) {
        const Tensor2 a = tensor(space.centroid(t), space.element_mean(temp, t));
        if (!a.finite()) {
            throw AssemblyError("non-finite coefficient on element " + std::to_string(t));
        }
        const auto& g = space.grads(t);
        const double area = space.area(t);
        auto& K = local[idx(t)];
        for (std::size_t i = 0; i < 3; ++i) {
            for (std::size_t j = i; j < 3; ++j) {
                K[3 * i + j] = area * a.quad(g[i], g[j]);
                K[3 * j + i] = K[3 * i + j];
            }
        }
    });
    auto M = space.zero_matrix();
    auto& vals = M.values();
    for (int t = 0; t < nt; ++t) {
        const auto& s = space.slots(t);
        for (std::size_t k = 0; k < 9; ++k) {
            vals[idx(s[k])] += local[idx(t)][k];
        }
    }
    return M;
}

RadiationSystem assemble_radiation(const P1Space& space, const ScalarFn& f_lambda, const Field& temp_for_coeff,
                                   const Field& state, double ell, double jacobian_floor) {
    if (!(ell >= 2.0)) {
        throw DomainError("assemble_radiation: ell must be at least 2");
    }
    check_field(space.mesh(), temp_for_coeff, "coefficient temperature");
    check_field(space.mesh(), state, "state");
    RadiationSystem sys{Field(idx(space.num_nodes()), 0.0), space.zero_matrix()};
    for (int e : space.edges(BoundaryTag::Gamma)) {
        const auto& be = space.mesh().boundary_edges[idx(e)];
        double ra = 0.0, rb = 0.0, jaa = 0.0, jab = 0.0, jbb = 0.0;
        for (const auto& [q, w] : edge_quadrature(space, e)) {
            const double u = q.wa * state[idx(be.a)] + q.wb * state[idx(be.b)];
            const double th = q.wa * temp_for_coeff[idx(be.a)] + q.wb * temp_for_coeff[idx(be.b)];
            const double f = f_lambda(q.x, th);
            if (!std::isfinite(f)) {
                throw AssemblyError("non-finite f_lambda on boundary edge " + std::to_string(e));
            }
            const double flux = f * std::pow(std::abs(u), ell - 2.0) * u;
            ra += w * flux * q.wa;
            rb += w * flux * q.wb;
            const double d = (ell - 1.0) * f * std::pow(std::max(std::abs(u), jacobian_floor), ell - 2.0);
            jaa += w * d * q.wa * q.wa;
            jab += w * d * q.wa * q.wb;
            jbb += w * d * q.wb * q.wb;
        }
        sys.residual[idx(be.a)] += ra;
        sys.residual[idx(be.b)] += rb;
        sys.jacobian.add(be.a, be.a, jaa);
        sys.jacobian.add(be.a, be.b, jab);
        sys.jacobian.add(be.b, be.a, jab);
        sys.jacobian.add(be.b, be.b, jbb);
    }
    return sys;
}

Field assemble_surface_load(const P1Space& space, BoundaryTag tag, const EdgeDensity& density) {
    Field b(idx(space.num_nodes()), 0.0);
    for (int e : space.edges(tag)) {
        const auto& be = space.mesh().boundary_edges[idx(e)];
        double ba = 0.0, bb = 0.0;
        for (const auto& [q, w] : edge_quadrature(space, e)) {
            const double d = density(q);
            ba += w * d * q.wa;
            bb += w * d * q.wb;
        }
        b[idx(be.a)] += ba;
        b[idx(be.b)] += bb;
    }
    return b;
}

Field assemble_surface_load(const P1Space& space, BoundaryTag tag, const std::function<double(const Point&)>& density) {
    return assemble_surface_load(space, tag, [&](const EdgeQuadPoint& q) { return density(q.x); });
}

Field assemble_flux_load(const P1Space& space, const std::function<Vec2(int t)>& flux) {
    Field b(idx(space.num_nodes()), 0.0);
    for (int t = 0; t < space.num_triangles(); ++t) {
        const Vec2 F = flux(t);
        if (!std::isfinite(F.x) || !std::isfinite(F.y)) {
            throw AssemblyError("non-finite volume load on element " + std::to_string(t));
        }
        const auto& tri = space.mesh().triangles[idx(t)];
        const auto& g = space.grads(t);
        for (std::size_t i = 0; i < 3; ++i) {
            b[idx(tri[i])] += space.area(t) * dot(F, g[i]);
        }
    }
    return b;
}

SparseSymMatrix assemble_boundary_mass(const P1Space& space, BoundaryTag tag) {
    auto M = space.zero_matrix();
    for (int e : space.edges(tag)) {
        const auto& be = space.mesh().boundary_edges[idx(e)];
        const double L = space.edge_length(e);
        M.add(be.a, be.a, L / 3.0);
        M.add(be.b, be.b, L / 3.0);
        M.add(be.a, be.b, L / 6.0);
        M.add(be.b, be.a, L / 6.0);
    }
    return M;
}

// ---------------------------------------------------------------------------
// Linear solver

Field solve_spd(const SparseSymMatrix& A, const Field& b_in, Constraint constraint, const Field& weights,
                const SolveOptions& opts, SolveStats* stats) {
    const int n = A.dim();
    if (b_in.size() != idx(n)) {
        throw InvariantError("right-hand side size does not match the matrix");
    }
    for (double v : b_in) {
        if (!std::isfinite(v)) {
            throw InvariantError("right-hand side is not finite");
        }
    }
    const bool zero_mean = constraint == Constraint::ZeroMean;
    if (zero_mean && weights.size() != idx(n)) {
        throw InvariantError("zero-mean weights size does not match the matrix");
    }

    SolveStats st;
    Field b = b_in;
    if (zero_mean) {
        double sb = 0.0, sabs = 0.0, sw = 0.0;
        for (int i = 0; i < n; ++i) {
            sb += b[idx(i)];
            sabs += std::abs(b[idx(i)]);
            sw += weights[idx(i)];
        }
        if (std::abs(sb) > 1e-8 * sabs) {
            throw CompatibilityError("right-hand side is not orthogonal to constants (relative mean component " +
                                     format_number(std::abs(sb) / sabs) + ")");
        }
        st.multiplier = sb / sw;
        for (int i = 0; i < n; ++i) {
            b[idx(i)] -= st.multiplier * weights[idx(i)];
        }
    }
    const double bnorm = norm2(b);
    Field x(idx(n), 0.0);
    if (bnorm == 0.0) {
        if (stats) {
            *stats = st;
        }
        return x;
    }

    auto project = [&](Field& v) {
        if (!zero_mean) {
            return;
        }
        const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
        for (double& c : v) {
            c -= m;
        }
    };
    auto shift_mean = [&](Field& v) {
        if (!zero_mean) {
            return;
        }
        double s = 0.0, sw = 0.0;
        for (int i = 0; i < n; ++i) {
            s += weights[idx(i)] * v[idx(i)];
            sw += weights[idx(i)];
        }
        const double m = s / sw;
        for (double& c : v) {
            c -= m;
        }
    };
    auto true_residual = [&](const Field& v) {
        Field r = A.multiply(v);
        for (int i = 0; i < n; ++i) {
            r[idx(i)] = b[idx(i)] - r[idx(i)];
        }
        return norm2(r) / bnorm;
    };

    Field dinv = A.diagonal();
    for (double& d : dinv) {
        d = d > 0.0 ? 1.0 / d : 1.0;
    }
    Field r = b;
    project(r);
    Field z(idx(n)), p(idx(n)), Ap(idx(n));
    for (int i = 0; i < n; ++i) {
        z[idx(i)] = dinv[idx(i)] * r[idx(i)];
    }
    p = z;
    double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
    const int max_iter = opts.max_iter > 0 ? opts.max_iter : 10 * n + 100;
    std::vector<double> history;
    bool converged = norm2(r) <= opts.rel_tol * bnorm;
    int it = 0;
    while (!converged && it < max_iter) {
        ++it;
        A.multiply(p.data(), Ap.data());
        const double pAp = std::inner_product(p.begin(), p.end(), Ap.begin(), 0.0);
        if (!(pAp > 0.0)) {
            break;
        }
        const double alpha = rz / pAp;
        for (int i = 0; i < n; ++i) {
            x[idx(i)] += alpha * p[idx(i)];
            r[idx(i)] -= alpha * Ap[idx(i)];
        }
        project(r);
        const double rn = norm2(r) / bnorm;
        history.push_back(rn);
        if (rn <= opts.rel_tol) {
            converged = true;
            break;
        }
        for (int i = 0; i < n; ++i) {
            z[idx(i)] = dinv[idx(i)] * r[idx(i)];
        }
        const double rz_new = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) {
            p[idx(i)] = z[idx(i)] + beta * p[idx(i)];
        }
    }
    st.iterations = it;
    shift_mean(x);
    st.rel_residual = true_residual(x);

    // The contract is checked on the true residual, not the recursive one.
    if (!converged || st.rel_residual > 1e-10) {
        if (n >= opts.direct_below) {
            throw SolverError("conjugate gradients did not reach the residual target after " + std::to_string(it) +
                                  " iterations",
                              history);
        }
        const SkylineCholesky chol(A, zero_mean ? 0 : -1);
        Field rhs = b;
        if (zero_mean) {
            rhs[0] = 0.0;
        }
        x = chol.solve(rhs);
        shift_mean(x);
        st.direct = true;
        st.rel_residual = true_residual(x);
        if (st.rel_residual > 1e-10) {
            history.push_back(st.rel_residual);
            throw SolverError("direct fallback left relative residual " + format_number(st.rel_residual), history);
        }
    }
    if (stats) {
        *stats = st;
    }
    return x;
}

// ---------------------------------------------------------------------------
// Norms and field I/O

double boundary_lq(const P1Space& space, BoundaryTag tag, double q, const EdgeDensity& fn) {
    double s = 0.0;
    for (int e : space.edges(tag)) {
        for (const auto& [pt, w] : edge_quadrature(space, e)) {
            s += w * std::pow(std::abs(fn(pt)), q);
        }
    }
    return std::pow(s, 1.0 / q);
}

double element_lq(const P1Space& space, double q, const std::function<double(int t)>& fn) {
    double s = 0.0;
    for (int t = 0; t < space.num_triangles(); ++t) {
        s += space.area(t) * std::pow(std::abs(fn(t)), q);
    }
    return std::pow(s, 1.0 / q);
}

FieldNorms norms(const P1Space& space, const Field& v, double p, double ell) {
    check_field(space.mesh(), v, "field");
    FieldNorms out;
    out.wp_seminorm = element_lq(space, p, [&](int t) {
        const Vec2 g = space.gradient(v, t);
        return std::hypot(g.x, g.y);
    });
    const auto& edges = space.mesh().boundary_edges;
    out.boundary_l = boundary_lq(space, BoundaryTag::Gamma, ell, [&](const EdgeQuadPoint& q) {
        const auto& be = edges[idx(q.edge)];
        return q.wa * v[idx(be.a)] + q.wb * v[idx(be.b)];
    });
    for (double x : v) {
        out.sup = std::max(out.sup, std::abs(x));
    }
    out.v_norm = out.wp_seminorm + out.boundary_l;
    return out;
}

void write_field_csv(const TriMesh& mesh, const Field& f, std::ostream& out) {
    check_field(mesh, f, "field");
    out << "node,x,y,value\n";
    for (std::size_t i = 0; i < f.size(); ++i) {
        out << i << ',' << format_number(mesh.nodes[i].x) << ',' << format_number(mesh.nodes[i].y) << ','
            << format_number(f[i]) << '\n';
    }
}

Field read_field_csv(const TriMesh& mesh, std::istream& in) {
    std::string line;
    int line_no = 1;
    if (!std::getline(in, line) || line != "node,x,y,value") {
        throw ParseError("expected header 'node,x,y,value'", 1);
    }
    Field f;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> v;
        while (std::getline(ss, cell, ',')) {
            try {
                v.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ParseError("non-numeric cell '" + cell + "'", line_no);
            }
        }
        if (v.size() != 4 || static_cast<std::size_t>(v[0]) != f.size()) {
            throw ParseError("expected 'node,x,y,value' with consecutive node ids", line_no);
        }
        if (f.size() >= mesh.nodes.size()) {
            throw ParseError("more rows than mesh nodes", line_no);
        }
        const auto& p = mesh.nodes[f.size()];
        if (std::abs(p.x - v[1]) > 1e-12 * (1.0 + std::abs(p.x)) || std::abs(p.y - v[2]) > 1e-12 * (1.0 + std::abs(p.y))) {
            throw ParseError("node coordinates do not match the mesh", line_no);
        }
        f.push_back(v[3]);
    }
    check_field(mesh, f, "field file");
    return f;
}

} // namespace thermoflux
