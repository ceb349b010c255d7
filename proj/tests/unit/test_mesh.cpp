#include "test_support.hpp"

#include "vagsim/common/errors.hpp"
#include "vagsim/mesh/connectivity.hpp"
#include "vagsim/mesh/mesh.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

using namespace vagsim;

namespace {

BoxMeshSpec two_fracture_box(std::array<int, 3> n)
{
    BoxMeshSpec spec;
    spec.cells_per_axis = n;
    spec.extent = Vec3(2.0, 1.0, 1.0);
    spec.fractures.push_back({0, 0, 1.0, {0.0, 0.0}, {1.0, 1.0}, 0.01});
    spec.fractures.push_back({1, 1, 0.5, {0.0, 0.0}, {2.0, 1.0}, 0.02});
    return spec;
}

double total_volume(const Mesh& m)
{
    double v = 0.0;
    for (int k = 0; k < m.num_cells(); ++k)
        v += cell_volume(m, k);
    return v;
}

double fracture_area(const Mesh& m, int fracture)
{
    double a = 0.0;
    for (const FractureFace& ff : m.fracture_faces)
        if (ff.fracture == fracture) a += face_area(m, ff.face);
    return a;
}

} // namespace

TEST_SUITE("mesh")
{
    TEST_CASE("hex generator counts, volume and fracture area")
    {
        const Mesh m = build_cartesian_hex_mesh(two_fracture_box({4, 4, 3}));
        CHECK(m.num_cells() == 48);
        CHECK(m.num_nodes() == 5 * 5 * 4);
        CHECK(total_volume(m) == doctest::Approx(2.0).epsilon(1e-13));
        CHECK(fracture_area(m, 0) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(fracture_area(m, 1) == doctest::Approx(2.0).epsilon(1e-13));
        CHECK_NOTHROW(validate(m));
    }

    TEST_CASE("Kuhn tetrahedra tile the box and keep fractures conforming")
    {
        const Mesh m = build_kuhn_tet_mesh(two_fracture_box({2, 2, 2}));
        CHECK(m.num_cells() == 6 * 8);
        CHECK(total_volume(m) == doctest::Approx(2.0).epsilon(1e-13));
        CHECK(fracture_area(m, 0) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(fracture_area(m, 1) == doctest::Approx(2.0).epsilon(1e-13));
        CHECK_NOTHROW(validate(m));
    }

    TEST_CASE("graded axis hits breakpoints and refines toward fracture planes")
    {
        const auto x = graded_axis(8, 100.0, {}, {50.0}, 0.7);
        REQUIRE(x.size() == 9);
        CHECK(x.front() == 0.0);
        CHECK(x.back() == 100.0);
        CHECK(std::count(x.begin(), x.end(), 50.0) == 1);
        CHECK(std::is_sorted(x.begin(), x.end()));
        // Spacing shrinks geometrically toward the plane on both sides.
        const double h_far = x[1] - x[0], h_near = x[4] - x[3];
        CHECK(h_near < h_far);
        CHECK((x[4] - x[3]) / (x[3] - x[2]) == doctest::Approx(0.7));
        CHECK((x[5] - x[4]) == doctest::Approx(x[4] - x[3]));

        const auto u = graded_axis(4, 1.0, {}, {}, std::nullopt);
        for (int i = 0; i < 4; ++i)
            CHECK(u[i + 1] - u[i] == doctest::Approx(0.25));
    }

    TEST_CASE("face centres and normals of a unit cube face")
    {
        const Mesh m = build_cartesian_hex_mesh(two_fracture_box({2, 2, 2}));
        for (int f = 0; f < m.num_faces(); ++f) {
            const Vec3 n = face_normal(m, f);
            CHECK(n.norm() == doctest::Approx(1.0));
            // Axis-aligned grid: the normal is a coordinate direction.
            CHECK(n.cwiseAbs().maxCoeff() == doctest::Approx(1.0));
            const Vec3 c = m.face_center(f);
            for (int s : m.faces[f].nodes)
                CHECK(std::abs((m.nodes[s] - c).dot(n)) < 1e-14);
        }
    }

    TEST_CASE("text format round trip is exact")
    {
        std::mt19937 rng(3);
        Mesh m = build_kuhn_tet_mesh(two_fracture_box({2, 2, 2}));
        test::jitter_interior_nodes(m, 0.2, rng);
        m.node_tags[0] = BoundaryTag::dirichlet_matrix;
        m.face_tags[1] = BoundaryTag::neumann;
        std::stringstream ss;
        write_mesh(m, ss);
        const Mesh back = read_mesh(ss);
        CHECK(back == m);
    }

    TEST_CASE("parse errors name the offending line")
    {
        const Mesh m = build_cartesian_hex_mesh(two_fracture_box({2, 2, 2}));
        std::stringstream ss;
        write_mesh(m, ss);
        std::vector<std::string> lines;
        for (std::string l; std::getline(ss, l);)
            lines.push_back(l);
        const auto it = std::find_if(lines.begin(), lines.end(), [](const std::string& l) { return l.rfind("NODES", 0) == 0; });
        REQUIRE(it != lines.end());
        const int bad = static_cast<int>(it - lines.begin()) + 3; // third node entry
        lines[bad - 1] = "2 0.5 zero 0.0";
        std::stringstream broken;
        for (const auto& l : lines)
            broken << l << '\n';
        try {
            (void)read_mesh(broken);
            FAIL("malformed number accepted");
        } catch (const ParseError& e) {
            CHECK(e.line() == bad);
        }

        std::stringstream truncated("NODES 3\n0 0 0 0\n");
        CHECK_THROWS_AS((void)read_mesh(truncated), ParseError);
    }

    TEST_CASE("validation rejects broken geometry")
    {
        Mesh m = build_cartesian_hex_mesh(two_fracture_box({2, 2, 2}));
        SUBCASE("centre outside its cell")
        {
            m.cells[0].center += Vec3(5.0, 0.0, 0.0);
            CHECK_THROWS_AS(validate(m), GeometryError);
        }
        SUBCASE("negative barycentric weight")
        {
            m.faces[0].beta[0] = -0.5;
            m.faces[0].beta[1] = 1.0;
            CHECK_THROWS_AS(validate(m), MeshError);
        }
        SUBCASE("fracture face with zero width")
        {
            m.fracture_faces[0].width = 0.0;
            CHECK_THROWS_AS(validate(m), MeshError);
        }
        SUBCASE("more fracture segments than cells")
        {
            BoxMeshSpec spec = two_fracture_box({2, 2, 2});
            spec.fractures.push_back({2, 0, 0.5, {0.0, 0.0}, {1.0, 1.0}, 0.01});
            CHECK_THROWS_AS(build_cartesian_hex_mesh(spec), ConformityError);
        }
    }

    TEST_CASE("connectivity is mutually consistent")
    {
        const Mesh m = build_kuhn_tet_mesh(two_fracture_box({3, 2, 2}));
        const Connectivity c = build_connectivity(m);
        REQUIRE(c.num_cells() == m.num_cells());
        REQUIRE(c.num_fracture_faces() == m.num_fracture_faces());
        for (int k = 0; k < c.num_cells(); ++k)
            for (int s : c.cell_nodes[k]) {
                const auto cells = c.node_cells[s];
                CHECK(std::binary_search(cells.begin(), cells.end(), k));
            }
        for (int f = 0; f < c.num_fracture_faces(); ++f) {
            CHECK(c.fracture_face_cells.degree(f) == 2);
            CHECK(c.face_fracture[m.fracture_faces[f].face] == f);
            for (int s : c.fracture_face_nodes[f]) {
                CHECK(c.fracture_node[s]);
                const auto ff = c.node_fracture_faces[s];
                CHECK(std::binary_search(ff.begin(), ff.end(), f));
            }
        }
        // Intersection nodes are exactly the nodes on both planes.
        for (int s = 0; s < m.num_nodes(); ++s) {
            const bool on_both = std::abs(m.nodes[s].x() - 1.0) < 1e-12 && std::abs(m.nodes[s].y() - 0.5) < 1e-12;
            CHECK(static_cast<bool>(c.intersection_node[s]) == on_both);
        }

        const DofNumbering dofs(c);
        CHECK(dofs.size() == m.num_cells() + m.num_nodes() + m.num_fracture_faces());
        const auto st = cell_stencil(c, dofs, 0);
        CHECK(static_cast<int>(st.size()) == c.cell_nodes.degree(0) + c.cell_fracture_faces.degree(0));
        CHECK(std::all_of(st.begin(), st.end(), [&](int d) { return !dofs.is_cell(d); }));
    }
}
