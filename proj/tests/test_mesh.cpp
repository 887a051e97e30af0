#include "thermoflux/error.hpp"
#include "thermoflux/mesh.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace thermoflux;

namespace {

TriMesh parse(const std::string& text) {
    std::istringstream in(text);
    return parse_mesh(in);
}

const char* kSquare = R"(tmesh 1
# unit square, two triangles
nodes 4
0 0
1 0
1 1
0 1
triangles 2
0 1 2
0 2 3
bedges 4
0 1 G
1 2 G
2 3 G
3 0 G
)";

// Three unit squares forming an L: [0,2]x[0,1] plus [0,1]x[1,2].
TriMesh l_shape() {
    TriMesh m;
    m.nodes = {{0, 0}, {1, 0}, {2, 0}, {0, 1}, {1, 1}, {2, 1}, {0, 2}, {1, 2}};
    m.triangles = {{0, 1, 4}, {0, 4, 3}, {1, 2, 5}, {1, 5, 4}, {3, 4, 7}, {3, 7, 6}};
    m.boundary_edges = {{0, 1, BoundaryTag::Gamma}, {1, 2, BoundaryTag::Gamma}, {2, 5, BoundaryTag::GammaN},
                        {5, 4, BoundaryTag::Gamma}, {4, 7, BoundaryTag::Gamma}, {7, 6, BoundaryTag::Gamma},
                        {6, 3, BoundaryTag::GammaN}, {3, 0, BoundaryTag::GammaN}};
    return m;
}

} // namespace

TEST(MeshLoad, HandSquare) {
    const auto m = parse(kSquare);
    EXPECT_EQ(m.num_nodes(), 4);
    EXPECT_EQ(m.num_triangles(), 2);
    const auto g = geometry_summary(m);
    EXPECT_DOUBLE_EQ(g.vol_omega, 1.0);
    EXPECT_DOUBLE_EQ(g.meas_gamma, 4.0);
}

TEST(MeshLoad, ZeroAreaTriangleRejected) {
    std::string text = kSquare;
    text.replace(text.find("1 1\n0 1"), 7, "1 1\n2 2");
    EXPECT_THROW(parse(text), InvariantError);
}

TEST(MeshLoad, InteriorEdgeTaggedRejected) {
    std::string text = kSquare;
    text.replace(text.find("bedges 4"), 8, "bedges 5");
    text += "0 2 G\n";
    try {
        parse(text);
        FAIL() << "expected an invariant error";
    } catch (const InvariantError& e) {
        EXPECT_NE(std::string(e.what()).find("interior"), std::string::npos);
    }
}

TEST(MeshLoad, MissingTagRejected) {
    std::string text = kSquare;
    text.replace(text.find("bedges 4"), 8, "bedges 3");
    text.erase(text.find("3 0 G\n"));
    EXPECT_THROW(parse(text), InvariantError);
}

TEST(MeshLoad, ClockwiseTriangleRejected) {
    std::string text = kSquare;
    text.replace(text.find("0 1 2\n"), 6, "0 2 1\n");
    EXPECT_THROW(parse(text), InvariantError);
}

TEST(MeshLoad, ParseErrorsCarryLineNumbers) {
    std::string text = kSquare;
    text.replace(text.find("2 3 G"), 5, "2 3 X");
    try {
        parse(text);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 14);
        EXPECT_NE(std::string(e.what()).find("line 14"), std::string::npos);
    }
    EXPECT_THROW(parse("tmesh 2\n"), ParseError);
    EXPECT_THROW(parse("tmesh 1\nnodes 2\n0 0\n"), ParseError);
}

TEST(MeshLoad, MissingFileNamesPath) {
    try {
        load_mesh("/nonexistent/mesh.tmesh");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent/mesh.tmesh"), std::string::npos);
    }
}

TEST(MeshLoad, RoundTrip) {
    const auto m = unit_square_mesh(3, {.left = true});
    std::stringstream ss;
    write_mesh(m, ss);
    const auto back = parse_mesh(ss);
    ASSERT_EQ(back.num_nodes(), m.num_nodes());
    for (int i = 0; i < m.num_nodes(); ++i) {
        EXPECT_EQ(back.nodes[static_cast<std::size_t>(i)].x, m.nodes[static_cast<std::size_t>(i)].x);
    }
    EXPECT_EQ(back.boundary_edges.size(), m.boundary_edges.size());
}

TEST(UnitSquare, Examples) {
    const auto m1 = unit_square_mesh(1);
    EXPECT_EQ(m1.num_triangles(), 2);
    const auto g1 = geometry_summary(m1);
    EXPECT_DOUBLE_EQ(g1.meas_gamma, 4.0);
    EXPECT_DOUBLE_EQ(g1.meas_gamma_n, 0.0);

    const auto m2 = unit_square_mesh(2);
    EXPECT_EQ(m2.num_triangles(), 8);
    EXPECT_NEAR(geometry_summary(m2).vol_omega, 1.0, 1e-15);

    const auto m4 = unit_square_mesh(4, {.left = true});
    const auto g4 = geometry_summary(m4);
    EXPECT_NEAR(g4.meas_gamma_n, 1.0, 1e-15);
    EXPECT_NEAR(g4.meas_gamma, 3.0, 1e-15);
    EXPECT_THROW(unit_square_mesh(0), DomainError);
}

TEST(UnitSquare, ValidForManySizes) {
    for (int m = 1; m <= 12; ++m) {
        EXPECT_NO_THROW(validate_mesh(unit_square_mesh(m, {.left = true, .top = true}))) << m;
    }
}

TEST(Geometry, UnitSquareSummary) {
    const auto g = geometry_summary(unit_square_mesh(1));
    EXPECT_DOUBLE_EQ(g.vol_omega, 1.0);
    EXPECT_DOUBLE_EQ(g.meas_boundary, 4.0);
    EXPECT_DOUBLE_EQ(g.meas_gamma, 4.0);
    EXPECT_DOUBLE_EQ(g.meas_gamma_n, 0.0);
    EXPECT_DOUBLE_EQ(g.diameter, std::sqrt(2.0));
    EXPECT_TRUE(g.convex);
    EXPECT_TRUE(g.r_sharp_heuristic);
    EXPECT_GT(g.r_sharp, 0.0);
}

TEST(Geometry, RefinementInvariance) {
    const auto a = geometry_summary(unit_square_mesh(1));
    const auto b = geometry_summary(unit_square_mesh(8));
    EXPECT_NEAR(b.vol_omega, a.vol_omega, 1e-14);
    EXPECT_NEAR(b.meas_boundary, a.meas_boundary, 1e-14);
    EXPECT_NEAR(b.diameter, a.diameter, 1e-14);

    auto mesh = l_shape();
    validate_mesh(mesh);
    const auto g0 = geometry_summary(mesh);
    for (int level = 0; level < 3; ++level) {
        mesh = refine_uniform(mesh);
        validate_mesh(mesh);
        const auto g = geometry_summary(mesh);
        EXPECT_NEAR(g.vol_omega, g0.vol_omega, 1e-13 * g0.vol_omega);
        EXPECT_NEAR(g.meas_gamma, g0.meas_gamma, 1e-13 * g0.meas_gamma);
        EXPECT_NEAR(g.meas_gamma_n, g0.meas_gamma_n, 1e-13 * g0.meas_gamma_n);
        EXPECT_NEAR(g.diameter, g0.diameter, 1e-13 * g0.diameter);
    }
}

TEST(Geometry, LShape) {
    const auto g = geometry_summary(l_shape());
    EXPECT_DOUBLE_EQ(g.vol_omega, 3.0);
    EXPECT_DOUBLE_EQ(g.meas_boundary, 8.0);
    EXPECT_DOUBLE_EQ(g.meas_gamma_n, 3.0);
    EXPECT_FALSE(g.convex);
}

TEST(MeshValidate, AnnulusEulerMatchesTwoLoops) {
    // Square with a square hole: 8 nodes, 8 triangles, two boundary loops.
    TriMesh m;
    m.nodes = {{0, 0}, {3, 0}, {3, 3}, {0, 3}, {1, 1}, {2, 1}, {2, 2}, {1, 2}};
    m.triangles = {{0, 1, 5}, {0, 5, 4}, {1, 2, 6}, {1, 6, 5}, {2, 3, 7}, {2, 7, 6}, {3, 0, 4}, {3, 4, 7}};
    m.boundary_edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6}, {6, 7}, {7, 4}};
    EXPECT_NO_THROW(validate_mesh(m));
    m.nodes.push_back({5, 5});
    EXPECT_THROW(validate_mesh(m), InvariantError);
}

TEST(SquareSides, Parsing) {
    const auto s = parse_square_sides("left, right");
    EXPECT_TRUE(s.left && s.right && !s.top && !s.bottom);
    EXPECT_THROW(parse_square_sides("middle"), ParseError);
}
