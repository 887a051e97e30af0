#pragma once

// Conforming triangle meshes with a radiative (G) / Neumann (GN) boundary split.

#include "thermoflux/constants.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace thermoflux {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

enum class BoundaryTag { Gamma, GammaN };

const char* tag_name(BoundaryTag tag);

struct BoundaryEdge {
    int a = 0;
    int b = 0;
    BoundaryTag tag = BoundaryTag::Gamma;
};

struct TriMesh {
    std::vector<Point> nodes;
    std::vector<std::array<int, 3>> triangles;  ///< counterclockwise
    std::vector<BoundaryEdge> boundary_edges;

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    /// Signed area of triangle t.
    double signed_area(int t) const;
    double edge_length(const BoundaryEdge& e) const;
};

/// Throws InvariantError naming the offending entity.
void validate_mesh(const TriMesh& mesh);

/// Parses and validates the `tmesh 1` text format.
TriMesh parse_mesh(std::istream& in);
TriMesh load_mesh(const std::string& path);
void write_mesh(const TriMesh& mesh, std::ostream& out);

/// Which sides of the unit square carry the Neumann tag; the rest is radiative.
struct SquareSides {
    bool left = false;
    bool right = false;
    bool bottom = false;
    bool top = false;
};

/// Parses a comma-separated list such as "left,right" (or "none").
SquareSides parse_square_sides(const std::string& spec);

/// Structured mesh of [0,1]^2 with m x m cells, each split along its
/// lower-left to upper-right diagonal.
TriMesh unit_square_mesh(int m, SquareSides neumann = {});

/// Splits every triangle into four through its edge midpoints.
TriMesh refine_uniform(const TriMesh& mesh);

/// Areas, boundary measures and diameter. r_sharp defaults to half the
/// smallest inradius among triangles touching the boundary (flagged heuristic).
constants::GeometrySummary geometry_summary(const TriMesh& mesh);

} // namespace thermoflux
