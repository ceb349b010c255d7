#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vagsim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class BoundaryTag : std::uint8_t {
    none,
    dirichlet_matrix,
    dirichlet_fracture,
    neumann,
};

const char* to_string(BoundaryTag tag);
BoundaryTag boundary_tag_from_string(const std::string& s);

struct Face {
    /// Closed node loop; consecutive entries (and last/first) are the edges.
    std::vector<int> nodes;
    /// Barycentric weights of the face centre, one per node, convex.
    std::vector<double> beta;
};

struct Cell {
    std::vector<int> faces;
    Vec3 center = Vec3::Zero();
};

struct FractureFace {
    int face = -1;
    int fracture = 0;
    double width = 0.0;
};

/// Polyhedral mesh conforming to a planar fracture network. Immutable once
/// built; every consumer shares it read-only.
struct Mesh {
    std::vector<Vec3> nodes;
    std::vector<Face> faces;
    std::vector<Cell> cells;
    std::vector<FractureFace> fracture_faces;
    std::vector<BoundaryTag> node_tags;
    std::vector<BoundaryTag> face_tags;

    int num_nodes() const noexcept { return static_cast<int>(nodes.size()); }
    int num_faces() const noexcept { return static_cast<int>(faces.size()); }
    int num_cells() const noexcept { return static_cast<int>(cells.size()); }
    int num_fracture_faces() const noexcept { return static_cast<int>(fracture_faces.size()); }

    Vec3 face_center(int f) const;

    friend bool operator==(const Mesh& a, const Mesh& b);
};

/// Throws MeshError (or a subclass) naming the first offending entity.
void validate(const Mesh& mesh);

double face_area(const Mesh& mesh, int face);
double cell_volume(const Mesh& mesh, int cell);

/// Unit normal of the least-squares plane through the face nodes.
Vec3 face_normal(const Mesh& mesh, int face);

/// Axis-aligned planar fracture: the plane `x[axis] == position`, restricted to
/// the rectangle [lo, hi] in the two remaining axes (taken in increasing order).
struct FractureRect {
    int id = 0;
    int axis = 0;
    double position = 0.0;
    std::array<double, 2> lo{};
    std::array<double, 2> hi{};
    double width = 0.0;

    double area() const { return (hi[0] - lo[0]) * (hi[1] - lo[1]); }
};

struct BoxMeshSpec {
    std::array<int, 3> cells_per_axis{2, 2, 2};
    Vec3 extent = Vec3::Ones();
    std::vector<FractureRect> fractures;
    /// Geometric spacing ratio toward fracture planes; std::nullopt keeps the
    /// spacing uniform inside every segment.
    std::optional<double> grading;
};

/// Grid line coordinates along one axis, including every breakpoint.
std::vector<double> graded_axis(int cells, double length, const std::vector<double>& breakpoints,
                                const std::vector<double>& fracture_planes, std::optional<double> grading);

Mesh build_cartesian_hex_mesh(const BoxMeshSpec& spec);

/// Same grid split into six tetrahedra per hexahedron around its main
/// diagonal; conforming because every quad is cut along the same diagonal.
Mesh build_kuhn_tet_mesh(const BoxMeshSpec& spec);

void write_mesh(const Mesh& mesh, std::ostream& os);
void write_mesh(const Mesh& mesh, const std::string& path);
Mesh read_mesh(std::istream& is);
Mesh load_mesh(const std::string& path);

} // namespace vagsim
