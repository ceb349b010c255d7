#include "vagsim/mesh/mesh.hpp"

#include "vagsim/common/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace vagsim {

const char* to_string(BoundaryTag tag)
{
    switch (tag) {
    case BoundaryTag::none: return "none";
    case BoundaryTag::dirichlet_matrix: return "dirichlet_matrix";
    case BoundaryTag::dirichlet_fracture: return "dirichlet_fracture";
    case BoundaryTag::neumann: return "neumann";
    }
    return "none";
}

BoundaryTag boundary_tag_from_string(const std::string& s)
{
    if (s == "none") return BoundaryTag::none;
    if (s == "dirichlet_matrix") return BoundaryTag::dirichlet_matrix;
    if (s == "dirichlet_fracture") return BoundaryTag::dirichlet_fracture;
    if (s == "neumann") return BoundaryTag::neumann;
    throw MeshError("unknown boundary tag '" + s + "'");
}

Vec3 Mesh::face_center(int f) const
{
    const Face& face = faces[f];
    Vec3 c = Vec3::Zero();
    for (std::size_t i = 0; i < face.nodes.size(); ++i)
        c += face.beta[i] * nodes[face.nodes[i]];
    return c;
}

bool operator==(const Mesh& a, const Mesh& b)
{
    if (a.nodes.size() != b.nodes.size() || a.faces.size() != b.faces.size() ||
        a.cells.size() != b.cells.size() || a.fracture_faces.size() != b.fracture_faces.size())
        return false;
    for (std::size_t i = 0; i < a.nodes.size(); ++i)
        if (a.nodes[i] != b.nodes[i]) return false;
    for (std::size_t i = 0; i < a.faces.size(); ++i)
        if (a.faces[i].nodes != b.faces[i].nodes || a.faces[i].beta != b.faces[i].beta) return false;
    for (std::size_t i = 0; i < a.cells.size(); ++i)
        if (a.cells[i].faces != b.cells[i].faces || a.cells[i].center != b.cells[i].center) return false;
    for (std::size_t i = 0; i < a.fracture_faces.size(); ++i) {
        const auto& x = a.fracture_faces[i];
        const auto& y = b.fracture_faces[i];
        if (x.face != y.face || x.fracture != y.fracture || x.width != y.width) return false;
    }
    return a.node_tags == b.node_tags && a.face_tags == b.face_tags;
}

double face_area(const Mesh& mesh, int f)
{
    const Face& face = mesh.faces[f];
    const Vec3 xs = mesh.face_center(f);
    const int k = static_cast<int>(face.nodes.size());
    double area = 0.0;
    for (int i = 0; i < k; ++i) {
        const Vec3& a = mesh.nodes[face.nodes[i]];
        const Vec3& b = mesh.nodes[face.nodes[(i + 1) % k]];
        area += 0.5 * (a - xs).cross(b - xs).norm();
    }
    return area;
}

namespace {

double signed_subtet_volume(const Vec3& xk, const Vec3& xs, const Vec3& a, const Vec3& b)
{
    return (xs - xk).dot((a - xk).cross(b - xk)) / 6.0;
}

} // namespace

double cell_volume(const Mesh& mesh, int c)
{
    const Cell& cell = mesh.cells[c];
    double vol = 0.0;
    for (int f : cell.faces) {
        const Face& face = mesh.faces[f];
        const Vec3 xs = mesh.face_center(f);
        const int k = static_cast<int>(face.nodes.size());
        double fv = 0.0;
        for (int i = 0; i < k; ++i)
            fv += signed_subtet_volume(cell.center, xs, mesh.nodes[face.nodes[i]], mesh.nodes[face.nodes[(i + 1) % k]]);
        vol += std::abs(fv);
    }
    return vol;
}

Vec3 face_normal(const Mesh& mesh, int f)
{
    const Face& face = mesh.faces[f];
    const Vec3 xs = mesh.face_center(f);
    const int k = static_cast<int>(face.nodes.size());
    // Newell's vector is the area-weighted normal of the projected polygon.
    Vec3 n = Vec3::Zero();
    for (int i = 0; i < k; ++i) {
        const Vec3& a = mesh.nodes[face.nodes[i]];
        const Vec3& b = mesh.nodes[face.nodes[(i + 1) % k]];
        n += (a - xs).cross(b - xs);
    }
    const double len = n.norm();
    if (!(len > 0.0))
        throw GeometryError("face " + std::to_string(f) + " has zero area");
    return n / len;
}

void validate(const Mesh& mesh)
{
    const int nn = mesh.num_nodes();
    const int nf = mesh.num_faces();
    for (int s = 0; s < nn; ++s)
        if (!mesh.nodes[s].allFinite())
            throw GeometryError("node " + std::to_string(s) + " has non-finite coordinates");
    if (!mesh.node_tags.empty() && static_cast<int>(mesh.node_tags.size()) != nn)
        throw MeshError("node tag count does not match node count");
    if (!mesh.face_tags.empty() && static_cast<int>(mesh.face_tags.size()) != nf)
        throw MeshError("face tag count does not match face count");

    for (int f = 0; f < nf; ++f) {
        const Face& face = mesh.faces[f];
        const std::string id = "face " + std::to_string(f);
        if (face.nodes.size() < 3)
            throw MeshError(id + " has fewer than 3 nodes");
        if (face.beta.size() != face.nodes.size())
            throw MeshError(id + " has " + std::to_string(face.beta.size()) + " weights for " +
                            std::to_string(face.nodes.size()) + " nodes");
        double sum = 0.0;
        for (std::size_t i = 0; i < face.nodes.size(); ++i) {
            if (face.nodes[i] < 0 || face.nodes[i] >= nn)
                throw MeshError(id + " references missing node " + std::to_string(face.nodes[i]));
            if (!(face.beta[i] >= 0.0))
                throw MeshError(id + " has a negative barycentric weight");
            sum += face.beta[i];
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw MeshError(id + " barycentric weights sum to " + std::to_string(sum));
    }

    std::vector<int> face_uses(nf, 0);
    for (int c = 0; c < mesh.num_cells(); ++c) {
        const Cell& cell = mesh.cells[c];
        const std::string id = "cell " + std::to_string(c);
        if (cell.faces.size() < 4)
            throw MeshError(id + " has fewer than 4 faces");
        if (!cell.center.allFinite())
            throw GeometryError(id + " has a non-finite center");
        for (int f : cell.faces) {
            if (f < 0 || f >= nf)
                throw MeshError(id + " references missing face " + std::to_string(f));
            if (++face_uses[f] > 2)
                throw MeshError("face " + std::to_string(f) + " is shared by more than two cells");
        }

        double scale = 0.0;
        for (int f : cell.faces)
            for (int s : mesh.faces[f].nodes)
                scale = std::max(scale, (mesh.nodes[s] - cell.center).norm());
        const double tol = 1e-12 * scale * scale * scale;
        Vec3 mean = Vec3::Zero();
        int count = 0;
        for (int f : cell.faces)
            for (int s : mesh.faces[f].nodes) {
                mean += mesh.nodes[s];
                ++count;
            }
        mean /= count;
        double v_center = 0.0, v_mean = 0.0;
        for (int f : cell.faces) {
            const Face& face = mesh.faces[f];
            const Vec3 xs = mesh.face_center(f);
            const int k = static_cast<int>(face.nodes.size());
            int sign = 0;
            for (int i = 0; i < k; ++i) {
                const Vec3& a = mesh.nodes[face.nodes[i]];
                const Vec3& b = mesh.nodes[face.nodes[(i + 1) % k]];
                const double v = signed_subtet_volume(cell.center, xs, a, b);
                v_center += std::abs(v);
                v_mean += std::abs(signed_subtet_volume(mean, xs, a, b));
                const int sv = v > tol ? 1 : (v < -tol ? -1 : 0);
                if (sv == 0 || (sign != 0 && sv != sign))
                    throw GeometryError(id + " is not star-shaped with respect to its center (face " +
                                        std::to_string(f) + ")");
                sign = sv;
            }
        }
        // Unsigned sub-volumes sum to |K| from any star centre and exceed it
        // from a point outside, so an excess over the node mean flags x_K.
        if (v_center > v_mean + 1e-10 * v_mean + tol)
            throw GeometryError(id + " is not star-shaped with respect to its center");
    }

    std::vector<char> tagged(nf, 0);
    for (int i = 0; i < mesh.num_fracture_faces(); ++i) {
        const FractureFace& ff = mesh.fracture_faces[i];
        const std::string id = "fracture face " + std::to_string(i);
        if (ff.face < 0 || ff.face >= nf)
            throw MeshError(id + " references missing face " + std::to_string(ff.face));
        if (tagged[ff.face]++)
            throw MeshError("face " + std::to_string(ff.face) + " is tagged as a fracture face twice");
        if (!(ff.width > 0.0))
            throw MeshError(id + " has non-positive width");
        if (face_uses[ff.face] < 1)
            throw MeshError(id + " is not a face of any cell");
    }
}

} // namespace vagsim
