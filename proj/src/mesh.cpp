#include "thermoflux/mesh.hpp"

#include "thermoflux/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace thermoflux {

namespace {

std::uint64_t edge_key(int a, int b) {
    const auto lo = static_cast<std::uint64_t>(std::min(a, b));
    const auto hi = static_cast<std::uint64_t>(std::max(a, b));
    return (lo << 32) | hi;
}

std::uint64_t directed_key(int a, int b) {
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

std::string edge_name(int a, int b) {
    return "(" + std::to_string(a) + ", " + std::to_string(b) + ")";
}

struct DisjointSets {
    std::vector<int> parent;
    explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int i) {
        while (parent[static_cast<std::size_t>(i)] != i) {
            auto& p = parent[static_cast<std::size_t>(i)];
            p = parent[static_cast<std::size_t>(p)];
            i = p;
        }
        return i;
    }
    void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

double cross(const Point& o, const Point& a, const Point& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double hull_area(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    if (pts.size() < 3) {
        return 0.0;
    }
    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) {
            --k;
        }
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0.0) {
            --k;
        }
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    double a = 0.0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        const auto& p = hull[i];
        const auto& q = hull[(i + 1) % hull.size()];
        a += p.x * q.y - q.x * p.y;
    }
    return 0.5 * a;
}

// Reads the next meaningful line (comments and blanks skipped) as tokens.
class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    bool next(std::vector<std::string>& tokens) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (auto hash = line.find('#'); hash != std::string::npos) {
                line.erase(hash);
            }
            std::istringstream ss(line);
            tokens.clear();
            for (std::string t; ss >> t;) {
                tokens.push_back(t);
            }
            if (!tokens.empty()) {
                return true;
            }
        }
        return false;
    }

    int line() const { return line_no_; }

private:
    std::istream& in_;
    int line_no_ = 0;
};

double parse_double(const std::string& s, int line) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size() || !std::isfinite(v)) {
        throw ParseError("expected a finite number, got '" + s + "'", line);
    }
    return v;
}

long long parse_int(const std::string& s, int line) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos != s.size()) {
        throw ParseError("expected an integer, got '" + s + "'", line);
    }
    return v;
}

int read_section(LineReader& r, const std::string& name) {
    std::vector<std::string> tok;
    if (!r.next(tok)) {
        throw ParseError("missing section '" + name + "'", r.line() + 1);
    }
    if (tok.size() != 2 || tok[0] != name) {
        throw ParseError("expected '" + name + " <count>'", r.line());
    }
    const long long n = parse_int(tok[1], r.line());
    if (n < 0 || n > 100'000'000) {
        throw ParseError("invalid count " + tok[1], r.line());
    }
    return static_cast<int>(n);
}

std::vector<std::string> read_record(LineReader& r, std::size_t fields, const std::string& what) {
    std::vector<std::string> tok;
    if (!r.next(tok)) {
        throw ParseError("unexpected end of file inside " + what, r.line() + 1);
    }
    if (tok.size() != fields) {
        throw ParseError(what + " record needs " + std::to_string(fields) + " fields", r.line());
    }
    return tok;
}

} // namespace

const char* tag_name(BoundaryTag tag) { return tag == BoundaryTag::Gamma ? "G" : "GN"; }

double TriMesh::signed_area(int t) const {
    const auto& tri = triangles[static_cast<std::size_t>(t)];
    return 0.5 * cross(nodes[static_cast<std::size_t>(tri[0])], nodes[static_cast<std::size_t>(tri[1])],
                       nodes[static_cast<std::size_t>(tri[2])]);
}

double TriMesh::edge_length(const BoundaryEdge& e) const {
    const auto& a = nodes[static_cast<std::size_t>(e.a)];
    const auto& b = nodes[static_cast<std::size_t>(e.b)];
    return std::hypot(b.x - a.x, b.y - a.y);
}

void validate_mesh(const TriMesh& mesh) {
    const int nv = mesh.num_nodes();
    if (nv == 0 || mesh.triangles.empty()) {
        throw InvariantError("mesh has no nodes or no triangles");
    }
    for (int i = 0; i < nv; ++i) {
        const auto& p = mesh.nodes[static_cast<std::size_t>(i)];
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw InvariantError("node " + std::to_string(i) + " has a non-finite coordinate");
        }
    }

    std::unordered_map<std::uint64_t, int> edge_count;
    std::unordered_set<std::uint64_t> directed;
    std::vector<char> used(static_cast<std::size_t>(nv), 0);
    DisjointSets components(nv);
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        for (int v : tri) {
            if (v < 0 || v >= nv) {
                throw InvariantError("triangle " + std::to_string(t) + " references missing node " +
                                     std::to_string(v));
            }
            used[static_cast<std::size_t>(v)] = 1;
        }
        const auto& a = mesh.nodes[static_cast<std::size_t>(tri[0])];
        const auto& b = mesh.nodes[static_cast<std::size_t>(tri[1])];
        const auto& c = mesh.nodes[static_cast<std::size_t>(tri[2])];
        const double scale = std::max({std::hypot(b.x - a.x, b.y - a.y), std::hypot(c.x - b.x, c.y - b.y),
                                       std::hypot(a.x - c.x, a.y - c.y)});
        const double area = mesh.signed_area(t);
        if (!(area > 1e-14 * scale * scale)) {
            throw InvariantError("triangle " + std::to_string(t) +
                                 (area < 0.0 ? " is clockwise (negative area)" : " has zero area"));
        }
        for (int k = 0; k < 3; ++k) {
            const int i = tri[static_cast<std::size_t>(k)];
            const int j = tri[static_cast<std::size_t>((k + 1) % 3)];
            if (!directed.insert(directed_key(i, j)).second) {
                throw InvariantError("edge " + edge_name(i, j) + " appears twice with the same orientation (triangle " +
                                     std::to_string(t) + ")");
            }
            if (++edge_count[edge_key(i, j)] > 2) {
                throw InvariantError("edge " + edge_name(i, j) + " is shared by more than two triangles");
            }
            components.unite(i, j);
        }
    }
    for (int i = 0; i < nv; ++i) {
        if (!used[static_cast<std::size_t>(i)]) {
            throw InvariantError("node " + std::to_string(i) + " belongs to no triangle");
        }
    }
    const int root = components.find(0);
    for (int i = 1; i < nv; ++i) {
        if (components.find(i) != root) {
            throw InvariantError("mesh is not connected (node " + std::to_string(i) + ")");
        }
    }

    std::unordered_set<std::uint64_t> tagged;
    DisjointSets loops(nv);
    std::vector<char> on_boundary(static_cast<std::size_t>(nv), 0);
    for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e) {
        const auto& be = mesh.boundary_edges[e];
        const std::string name = "boundary edge " + std::to_string(e) + " " + edge_name(be.a, be.b);
        if (be.a < 0 || be.a >= nv || be.b < 0 || be.b >= nv || be.a == be.b) {
            throw InvariantError(name + " has invalid node indices");
        }
        const auto it = edge_count.find(edge_key(be.a, be.b));
        if (it == edge_count.end()) {
            throw InvariantError(name + " is not an edge of any triangle");
        }
        if (it->second != 1) {
            throw InvariantError(name + " is an interior edge");
        }
        if (!tagged.insert(edge_key(be.a, be.b)).second) {
            throw InvariantError(name + " is tagged more than once");
        }
        loops.unite(be.a, be.b);
        on_boundary[static_cast<std::size_t>(be.a)] = 1;
        on_boundary[static_cast<std::size_t>(be.b)] = 1;
    }
    for (const auto& [key, count] : edge_count) {
        if (count == 1 && !tagged.count(key)) {
            const int a = static_cast<int>(key >> 32);
            const int b = static_cast<int>(key & 0xffffffffu);
            throw InvariantError("boundary edge " + edge_name(a, b) + " carries no tag");
        }
    }

    int num_loops = 0;
    for (int i = 0; i < nv; ++i) {
        if (on_boundary[static_cast<std::size_t>(i)] && loops.find(i) == i) {
            ++num_loops;
        }
    }
    const long long euler = static_cast<long long>(nv) - static_cast<long long>(edge_count.size()) +
                            static_cast<long long>(mesh.triangles.size());
    if (euler != 2 - num_loops) {
        throw InvariantError("Euler characteristic V - E + F = " + std::to_string(euler) + " does not match " +
                             std::to_string(num_loops) + " boundary loop(s)");
    }
}

TriMesh parse_mesh(std::istream& in) {
    LineReader r(in);
    std::vector<std::string> tok;
    if (!r.next(tok) || tok.size() != 2 || tok[0] != "tmesh" || tok[1] != "1") {
        throw ParseError("expected header 'tmesh 1'", std::max(r.line(), 1));
    }
    TriMesh mesh;
    const int nv = read_section(r, "nodes");
    mesh.nodes.reserve(static_cast<std::size_t>(nv));
    for (int i = 0; i < nv; ++i) {
        const auto rec = read_record(r, 2, "node");
        mesh.nodes.push_back({parse_double(rec[0], r.line()), parse_double(rec[1], r.line())});
    }
    const int nt = read_section(r, "triangles");
    mesh.triangles.reserve(static_cast<std::size_t>(nt));
    for (int t = 0; t < nt; ++t) {
        const auto rec = read_record(r, 3, "triangle");
        std::array<int, 3> tri{};
        for (std::size_t k = 0; k < 3; ++k) {
            const long long v = parse_int(rec[k], r.line());
            if (v < 0 || v >= nv) {
                throw ParseError("node index " + rec[k] + " out of range", r.line());
            }
            tri[k] = static_cast<int>(v);
        }
        mesh.triangles.push_back(tri);
    }
    const int nb = read_section(r, "bedges");
    mesh.boundary_edges.reserve(static_cast<std::size_t>(nb));
    for (int e = 0; e < nb; ++e) {
        const auto rec = read_record(r, 3, "boundary edge");
        BoundaryEdge be;
        const long long a = parse_int(rec[0], r.line());
        const long long b = parse_int(rec[1], r.line());
        if (a < 0 || a >= nv || b < 0 || b >= nv) {
            throw ParseError("node index out of range", r.line());
        }
        be.a = static_cast<int>(a);
        be.b = static_cast<int>(b);
        if (rec[2] == "G") {
            be.tag = BoundaryTag::Gamma;
        } else if (rec[2] == "GN") {
            be.tag = BoundaryTag::GammaN;
        } else {
            throw ParseError("unknown boundary tag '" + rec[2] + "' (expected G or GN)", r.line());
        }
        mesh.boundary_edges.push_back(be);
    }
    if (r.next(tok)) {
        throw ParseError("trailing content after bedges section", r.line());
    }
    validate_mesh(mesh);
    return mesh;
}

TriMesh load_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open mesh file '" + path + "'");
    }
    try {
        return parse_mesh(in);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what(), 0);
    }
}

void write_mesh(const TriMesh& mesh, std::ostream& out) {
    out << "tmesh 1\n";
    out << "nodes " << mesh.nodes.size() << '\n';
    out << std::setprecision(17);
    for (const auto& p : mesh.nodes) {
        out << p.x << ' ' << p.y << '\n';
    }
    out << "triangles " << mesh.triangles.size() << '\n';
    for (const auto& t : mesh.triangles) {
        out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    }
    out << "bedges " << mesh.boundary_edges.size() << '\n';
    for (const auto& e : mesh.boundary_edges) {
        out << e.a << ' ' << e.b << ' ' << tag_name(e.tag) << '\n';
    }
}

SquareSides parse_square_sides(const std::string& spec) {
    SquareSides s;
    std::istringstream ss(spec);
    for (std::string part; std::getline(ss, part, ',');) {
        part.erase(std::remove_if(part.begin(), part.end(), [](unsigned char c) { return std::isspace(c); }),
                   part.end());
        if (part == "left") {
            s.left = true;
        } else if (part == "right") {
            s.right = true;
        } else if (part == "bottom") {
            s.bottom = true;
        } else if (part == "top") {
            s.top = true;
        } else if (part == "none" || part.empty()) {
        } else {
            throw ParseError("unknown square side '" + part + "'", 0);
        }
    }
    return s;
}

TriMesh unit_square_mesh(int m, SquareSides neumann) {
    if (m < 1) {
        throw DomainError("unit_square_mesh: m must be at least 1");
    }
    TriMesh mesh;
    const int w = m + 1;
    mesh.nodes.reserve(static_cast<std::size_t>(w * w));
    for (int j = 0; j <= m; ++j) {
        for (int i = 0; i <= m; ++i) {
            mesh.nodes.push_back({static_cast<double>(i) / m, static_cast<double>(j) / m});
        }
    }
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            const int v00 = j * w + i;
            const int v10 = v00 + 1;
            const int v01 = v00 + w;
            const int v11 = v01 + 1;
            mesh.triangles.push_back({v00, v10, v11});
            mesh.triangles.push_back({v00, v11, v01});
        }
    }
    auto tag = [](bool n) { return n ? BoundaryTag::GammaN : BoundaryTag::Gamma; };
    for (int i = 0; i < m; ++i) {
        mesh.boundary_edges.push_back({i, i + 1, tag(neumann.bottom)});
    }
    for (int j = 0; j < m; ++j) {
        mesh.boundary_edges.push_back({j * w + m, (j + 1) * w + m, tag(neumann.right)});
    }
    for (int i = m; i > 0; --i) {
        mesh.boundary_edges.push_back({m * w + i, m * w + i - 1, tag(neumann.top)});
    }
    for (int j = m; j > 0; --j) {
        mesh.boundary_edges.push_back({j * w, (j - 1) * w, tag(neumann.left)});
    }
    return mesh;
}

TriMesh refine_uniform(const TriMesh& mesh) {
    TriMesh out;
    out.nodes = mesh.nodes;
    std::unordered_map<std::uint64_t, int> mid;
    auto midpoint = [&](int a, int b) {
        const auto key = edge_key(a, b);
        if (auto it = mid.find(key); it != mid.end()) {
            return it->second;
        }
        const auto& pa = mesh.nodes[static_cast<std::size_t>(a)];
        const auto& pb = mesh.nodes[static_cast<std::size_t>(b)];
        const int id = static_cast<int>(out.nodes.size());
        out.nodes.push_back({0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)});
        mid.emplace(key, id);
        return id;
    };
    for (const auto& t : mesh.triangles) {
        const int a = t[0], b = t[1], c = t[2];
        const int ab = midpoint(a, b), bc = midpoint(b, c), ca = midpoint(c, a);
        out.triangles.push_back({a, ab, ca});
        out.triangles.push_back({ab, b, bc});
        out.triangles.push_back({ca, bc, c});
        out.triangles.push_back({ab, bc, ca});
    }
    for (const auto& e : mesh.boundary_edges) {
        const int m = midpoint(e.a, e.b);
        out.boundary_edges.push_back({e.a, m, e.tag});
        out.boundary_edges.push_back({m, e.b, e.tag});
    }
    return out;
}

constants::GeometrySummary geometry_summary(const TriMesh& mesh) {
    constants::GeometrySummary g;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        g.vol_omega += mesh.signed_area(t);
    }
    std::vector<char> on_boundary(mesh.nodes.size(), 0);
    for (const auto& e : mesh.boundary_edges) {
        const double len = mesh.edge_length(e);
        g.meas_boundary += len;
        (e.tag == BoundaryTag::Gamma ? g.meas_gamma : g.meas_gamma_n) += len;
        on_boundary[static_cast<std::size_t>(e.a)] = 1;
        on_boundary[static_cast<std::size_t>(e.b)] = 1;
    }

    std::vector<Point> bnodes;
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        if (on_boundary[i]) {
            bnodes.push_back(mesh.nodes[i]);
        }
    }
    // The diameter of a polygon is attained at boundary vertices.
    double d2 = 0.0;
    for (std::size_t i = 0; i < bnodes.size(); ++i) {
        for (std::size_t j = i + 1; j < bnodes.size(); ++j) {
            const double dx = bnodes[i].x - bnodes[j].x;
            const double dy = bnodes[i].y - bnodes[j].y;
            d2 = std::max(d2, dx * dx + dy * dy);
        }
    }
    g.diameter = std::sqrt(d2);

    double rmin = std::numeric_limits<double>::infinity();
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        if (!on_boundary[static_cast<std::size_t>(tri[0])] && !on_boundary[static_cast<std::size_t>(tri[1])] &&
            !on_boundary[static_cast<std::size_t>(tri[2])]) {
            continue;
        }
        double perim = 0.0;
        for (int k = 0; k < 3; ++k) {
            const auto& a = mesh.nodes[static_cast<std::size_t>(tri[static_cast<std::size_t>(k)])];
            const auto& b = mesh.nodes[static_cast<std::size_t>(tri[static_cast<std::size_t>((k + 1) % 3)])];
            perim += std::hypot(b.x - a.x, b.y - a.y);
        }
        rmin = std::min(rmin, 2.0 * mesh.signed_area(t) / perim);
    }
    g.r_sharp = 0.5 * rmin;
    g.r_sharp_heuristic = true;
    g.convex = std::abs(hull_area(bnodes) - g.vol_omega) <= 1e-10 * g.vol_omega;
    return g;
}

} // namespace thermoflux
