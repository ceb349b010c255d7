#include "vagsim/common/errors.hpp"
#include "vagsim/mesh/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

namespace vagsim {

namespace {

std::vector<int> distribute_cells(int cells, const std::vector<double>& lengths, double total)
{
    const int nseg = static_cast<int>(lengths.size());
    std::vector<int> count(nseg);
    std::vector<double> remainder(nseg);
    int used = 0;
    for (int i = 0; i < nseg; ++i) {
        const double ideal = cells * lengths[i] / total;
        count[i] = std::max(1, static_cast<int>(std::floor(ideal)));
        remainder[i] = ideal - count[i];
        used += count[i];
    }
    std::vector<int> order(nseg);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] > remainder[b]; });
    for (int i = 0; used < cells; i = (i + 1) % nseg) {
        ++count[order[i]];
        ++used;
    }
    while (used > cells) {
        // Forcing a cell into a short segment overshot the budget; take it back
        // from the segment that is most over-resolved relative to its length.
        int best = -1;
        double best_excess = -1e300;
        for (int i = 0; i < nseg; ++i) {
            if (count[i] <= 1) continue;
            const double excess = count[i] - cells * lengths[i] / total;
            if (excess > best_excess) {
                best_excess = excess;
                best = i;
            }
        }
        --count[best];
        --used;
    }
    return count;
}

bool contains(const std::vector<double>& planes, double x, double tol)
{
    return std::any_of(planes.begin(), planes.end(), [&](double p) { return std::abs(p - x) <= tol; });
}

struct Grid {
    std::array<std::vector<double>, 3> coord;

    int n(int axis) const { return static_cast<int>(coord[axis].size()) - 1; }
    int node(int i, int j, int k) const { return i + (n(0) + 1) * (j + (n(1) + 1) * k); }
    int index_of(int axis, double x) const
    {
        const auto& c = coord[axis];
        const double tol = 1e-12 * (c.back() - c.front());
        for (int i = 0; i < static_cast<int>(c.size()); ++i)
            if (std::abs(c[i] - x) <= tol) return i;
        return -1;
    }
};

void check_spec(const BoxMeshSpec& spec)
{
    for (int a = 0; a < 3; ++a) {
        if (!(spec.extent[a] > 0.0) || !std::isfinite(spec.extent[a]))
            throw GeometryError("degenerate box: extent along axis " + std::to_string(a) + " is not positive");
        if (spec.cells_per_axis[a] < 2)
            throw MeshError("at least 2 cells per axis are required");
    }
    if (spec.grading && !(*spec.grading > 0.0 && *spec.grading <= 1.0))
        throw MeshError("grading ratio must lie in (0, 1]");
    for (const FractureRect& fr : spec.fractures) {
        const std::string id = "fracture " + std::to_string(fr.id);
        if (fr.axis < 0 || fr.axis > 2)
            throw ConformityError(id + " has no valid normal axis");
        if (!(fr.width > 0.0))
            throw ConformityError(id + " has non-positive width");
        if (fr.position < 0.0 || fr.position > spec.extent[fr.axis])
            throw ConformityError(id + " plane lies outside the domain");
        const int b = fr.axis == 0 ? 1 : 0;
        const int c = fr.axis == 2 ? 1 : 2;
        const std::array<int, 2> in_plane{b, c};
        for (int t = 0; t < 2; ++t)
            if (!(fr.lo[t] < fr.hi[t]) || fr.lo[t] < 0.0 || fr.hi[t] > spec.extent[in_plane[t]])
                throw ConformityError(id + " rectangle is empty or leaves the domain");
    }
}

Grid build_grid(const BoxMeshSpec& spec)
{
    Grid g;
    for (int a = 0; a < 3; ++a) {
        std::vector<double> breaks{0.0, spec.extent[a]};
        std::vector<double> planes;
        for (const FractureRect& fr : spec.fractures) {
            if (fr.axis == a) {
                breaks.push_back(fr.position);
                planes.push_back(fr.position);
            } else {
                // in-plane slot of axis a: the smaller remaining axis is slot 0
                const int other = 3 - a - fr.axis;
                const int slot = a < other ? 0 : 1;
                breaks.push_back(fr.lo[slot]);
                breaks.push_back(fr.hi[slot]);
            }
        }
        g.coord[a] = graded_axis(spec.cells_per_axis[a], spec.extent[a], breaks, planes, spec.grading);
    }
    return g;
}

/// In-plane coordinates of point x for a fracture with the given normal axis.
std::array<double, 2> in_plane(const Vec3& x, int axis)
{
    const int b = axis == 0 ? 1 : 0;
    const int c = axis == 2 ? 1 : 2;
    return {x[b], x[c]};
}

bool inside(const FractureRect& fr, const Vec3& x)
{
    const auto p = in_plane(x, fr.axis);
    return p[0] > fr.lo[0] && p[0] < fr.hi[0] && p[1] > fr.lo[1] && p[1] < fr.hi[1];
}

void tag_fracture_faces(Mesh& mesh, const BoxMeshSpec& spec, const Grid& g)
{
    std::vector<int> plane_index(spec.fractures.size());
    for (std::size_t i = 0; i < spec.fractures.size(); ++i) {
        plane_index[i] = g.index_of(spec.fractures[i].axis, spec.fractures[i].position);
        if (plane_index[i] < 0)
            throw ConformityError("fracture " + std::to_string(spec.fractures[i].id) + " plane is not a grid plane");
    }
    std::vector<double> tagged_area(spec.fractures.size(), 0.0);
    for (int f = 0; f < mesh.num_faces(); ++f) {
        const Face& face = mesh.faces[f];
        const Vec3 xc = mesh.face_center(f);
        int owner = -1;
        for (std::size_t i = 0; i < spec.fractures.size(); ++i) {
            const FractureRect& fr = spec.fractures[i];
            const double pos = g.coord[fr.axis][plane_index[i]];
            bool on_plane = true;
            for (int s : face.nodes)
                on_plane = on_plane && mesh.nodes[s][fr.axis] == pos;
            if (!on_plane || !inside(fr, xc)) continue;
            if (owner >= 0)
                throw ConformityError("fractures " + std::to_string(spec.fractures[owner].id) + " and " +
                                      std::to_string(fr.id) + " overlap");
            owner = static_cast<int>(i);
        }
        if (owner >= 0) {
            mesh.fracture_faces.push_back({f, spec.fractures[owner].id, spec.fractures[owner].width});
            tagged_area[owner] += face_area(mesh, f);
        }
    }
    for (std::size_t i = 0; i < spec.fractures.size(); ++i) {
        const double a = spec.fractures[i].area();
        if (std::abs(tagged_area[i] - a) > 1e-10 * a)
            throw ConformityError("fracture " + std::to_string(spec.fractures[i].id) +
                                  " is not tiled by mesh faces");
    }
}

Face make_face(std::vector<int> nodes)
{
    Face f;
    f.beta.assign(nodes.size(), 1.0 / static_cast<double>(nodes.size()));
    f.nodes = std::move(nodes);
    return f;
}

void fill_nodes(Mesh& mesh, const Grid& g)
{
    mesh.nodes.reserve((g.n(0) + 1) * (g.n(1) + 1) * (g.n(2) + 1));
    for (int k = 0; k <= g.n(2); ++k)
        for (int j = 0; j <= g.n(1); ++j)
            for (int i = 0; i <= g.n(0); ++i)
                mesh.nodes.emplace_back(g.coord[0][i], g.coord[1][j], g.coord[2][k]);
}

void finish(Mesh& mesh)
{
    mesh.node_tags.assign(mesh.nodes.size(), BoundaryTag::none);
    mesh.face_tags.assign(mesh.faces.size(), BoundaryTag::none);
}

} // namespace

std::vector<double> graded_axis(int cells, double length, const std::vector<double>& breakpoints,
                                const std::vector<double>& fracture_planes, std::optional<double> grading)
{
    const double tol = 1e-12 * length;
    std::vector<double> b = breakpoints;
    b.insert(b.end(), fracture_planes.begin(), fracture_planes.end());
    b.push_back(0.0);
    b.push_back(length);
    std::sort(b.begin(), b.end());
    if (b.front() < -tol || b.back() > length + tol)
        throw ConformityError("breakpoint outside [0, " + std::to_string(length) + "]");
    std::vector<double> uniq;
    for (double x : b)
        if (uniq.empty() || x - uniq.back() > tol) uniq.push_back(x);
    const int nseg = static_cast<int>(uniq.size()) - 1;
    if (nseg > cells)
        throw ConformityError("fracture planes need " + std::to_string(nseg) + " cells along an axis with only " +
                              std::to_string(cells));

    std::vector<double> lengths(nseg);
    for (int i = 0; i < nseg; ++i)
        lengths[i] = uniq[i + 1] - uniq[i];
    const std::vector<int> count = distribute_cells(cells, lengths, length);

    std::vector<double> coord{uniq.front()};
    for (int i = 0; i < nseg; ++i) {
        const int m = count[i];
        const bool fine_lo = grading && contains(fracture_planes, uniq[i], tol);
        const bool fine_hi = grading && contains(fracture_planes, uniq[i + 1], tol);
        std::vector<double> w(m, 1.0);
        for (int j = 0; j < m; ++j) {
            int d = -1;
            if (fine_lo && fine_hi) d = std::min(j, m - 1 - j);
            else if (fine_lo) d = j;
            else if (fine_hi) d = m - 1 - j;
            if (d >= 0) w[j] = std::pow(1.0 / *grading, d);
        }
        const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
        double acc = 0.0;
        for (int j = 0; j + 1 < m; ++j) {
            acc += w[j];
            coord.push_back(uniq[i] + lengths[i] * (acc / wsum));
        }
        coord.push_back(uniq[i + 1]);
    }
    return coord;
}

Mesh build_cartesian_hex_mesh(const BoxMeshSpec& spec)
{
    check_spec(spec);
    const Grid g = build_grid(spec);
    const int nx = g.n(0), ny = g.n(1), nz = g.n(2);

    Mesh mesh;
    fill_nodes(mesh, g);

    const int nfx = (nx + 1) * ny * nz;
    const int nfy = nx * (ny + 1) * nz;
    auto xface = [&](int i, int j, int k) { return i + (nx + 1) * (j + ny * k); };
    auto yface = [&](int i, int j, int k) { return nfx + i + nx * (j + (ny + 1) * k); };
    auto zface = [&](int i, int j, int k) { return nfx + nfy + i + nx * (j + ny * k); };

    mesh.faces.reserve(nfx + nfy + nx * ny * (nz + 1));
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i <= nx; ++i)
                mesh.faces.push_back(
                    make_face({g.node(i, j, k), g.node(i, j + 1, k), g.node(i, j + 1, k + 1), g.node(i, j, k + 1)}));
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j <= ny; ++j)
            for (int i = 0; i < nx; ++i)
                mesh.faces.push_back(
                    make_face({g.node(i, j, k), g.node(i, j, k + 1), g.node(i + 1, j, k + 1), g.node(i + 1, j, k)}));
    for (int k = 0; k <= nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                mesh.faces.push_back(
                    make_face({g.node(i, j, k), g.node(i + 1, j, k), g.node(i + 1, j + 1, k), g.node(i, j + 1, k)}));

    mesh.cells.reserve(nx * ny * nz);
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                Cell c;
                c.faces = {xface(i, j, k), xface(i + 1, j, k), yface(i, j, k),
                           yface(i, j + 1, k), zface(i, j, k), zface(i, j, k + 1)};
                c.center = 0.125 * (mesh.nodes[g.node(i, j, k)] + mesh.nodes[g.node(i + 1, j, k)] +
                                    mesh.nodes[g.node(i, j + 1, k)] + mesh.nodes[g.node(i + 1, j + 1, k)] +
                                    mesh.nodes[g.node(i, j, k + 1)] + mesh.nodes[g.node(i + 1, j, k + 1)] +
                                    mesh.nodes[g.node(i, j + 1, k + 1)] + mesh.nodes[g.node(i + 1, j + 1, k + 1)]);
                mesh.cells.push_back(std::move(c));
            }

    finish(mesh);
    tag_fracture_faces(mesh, spec, g);
    return mesh;
}

Mesh build_kuhn_tet_mesh(const BoxMeshSpec& spec)
{
    check_spec(spec);
    const Grid g = build_grid(spec);
    const int nx = g.n(0), ny = g.n(1), nz = g.n(2);

    Mesh mesh;
    fill_nodes(mesh, g);

    std::map<std::array<int, 3>, int> face_id;
    auto get_face = [&](int a, int b, int c) {
        std::array<int, 3> key{a, b, c};
        std::sort(key.begin(), key.end());
        auto [it, fresh] = face_id.try_emplace(key, mesh.num_faces());
        if (fresh) mesh.faces.push_back(make_face({a, b, c}));
        return it->second;
    };

    static constexpr std::array<std::array<int, 3>, 6> perms{
        {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                for (const auto& p : perms) {
                    std::array<int, 3> ijk{i, j, k};
                    std::array<int, 4> v;
                    v[0] = g.node(ijk[0], ijk[1], ijk[2]);
                    for (int step = 0; step < 3; ++step) {
                        ++ijk[p[step]];
                        v[step + 1] = g.node(ijk[0], ijk[1], ijk[2]);
                    }
                    Cell c;
                    c.faces = {get_face(v[1], v[2], v[3]), get_face(v[0], v[2], v[3]), get_face(v[0], v[1], v[3]),
                               get_face(v[0], v[1], v[2])};
                    c.center = 0.25 * (mesh.nodes[v[0]] + mesh.nodes[v[1]] + mesh.nodes[v[2]] + mesh.nodes[v[3]]);
                    mesh.cells.push_back(std::move(c));
                }

    finish(mesh);
    tag_fracture_faces(mesh, spec, g);
    return mesh;
}

} // namespace vagsim
