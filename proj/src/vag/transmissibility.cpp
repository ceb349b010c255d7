#include "vagsim/common/errors.hpp"
#include "vagsim/vag/vag.hpp"

#include <algorithm>
#include <string>

namespace vagsim {

namespace {

int local_index(std::span<const int> sorted, int id)
{
    auto it = std::lower_bound(sorted.begin(), sorted.end(), id);
    return static_cast<int>(it - sorted.begin());
}

} // namespace

Eigen::MatrixXd compute_cell_transmissibility(const Mesh& mesh, const Connectivity& conn, int cell,
                                              const Mat3& lambda)
{
    const auto nodes = conn.cell_nodes[cell];
    const auto fracs = conn.cell_fracture_faces[cell];
    const int nv = static_cast<int>(nodes.size());
    const int n = 1 + nv + static_cast<int>(fracs.size());
    const Vec3& xk = mesh.cells[cell].center;

    // Local dofs: 0 is the cell, then Ξ_K. Each sub-tet vertex value is a
    // linear combination of local dofs, held in one row of `coef`.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::Matrix<double, 4, Eigen::Dynamic> coef(4, n);
    for (int f : mesh.cells[cell].faces) {
        const Face& face = mesh.faces[f];
        const Vec3 xs = mesh.face_center(f);
        Eigen::RowVectorXd center = Eigen::RowVectorXd::Zero(n);
        if (const int ff = conn.face_fracture[f]; ff >= 0) {
            center[1 + nv + local_index(fracs, ff)] = 1.0;
        } else {
            for (std::size_t i = 0; i < face.nodes.size(); ++i)
                center[1 + local_index(nodes, face.nodes[i])] += face.beta[i];
        }
        const int k = static_cast<int>(face.nodes.size());
        for (int e = 0; e < k; ++e) {
            const int sa = face.nodes[e];
            const int sb = face.nodes[(e + 1) % k];
            Mat3 m;
            m.col(0) = xs - xk;
            m.col(1) = mesh.nodes[sa] - xk;
            m.col(2) = mesh.nodes[sb] - xk;
            const double det = m.determinant();
            const double scale = m.colwise().norm().prod();
            if (!(std::abs(det) > 1e-14 * scale))
                throw GeometryError("cell " + std::to_string(cell) + " has a degenerate sub-tetrahedron on face " +
                                    std::to_string(f));
            // Rows of m^{-1} are the gradients of the barycentric coordinates
            // of the three non-center vertices.
            const Mat3 ginv = m.inverse();
            Eigen::Matrix<double, 3, 4> g;
            g.col(1) = ginv.row(0).transpose();
            g.col(2) = ginv.row(1).transpose();
            g.col(3) = ginv.row(2).transpose();
            g.col(0) = -(g.col(1) + g.col(2) + g.col(3));
            coef.setZero();
            coef(0, 0) = 1.0;
            coef.row(1) = center;
            coef(2, 1 + local_index(nodes, sa)) = 1.0;
            coef(3, 1 + local_index(nodes, sb)) = 1.0;
            const Eigen::Matrix<double, 3, Eigen::Dynamic> grad = g * coef;
            a.noalias() += (std::abs(det) / 6.0) * (grad.transpose() * lambda * grad);
        }
    }
    Eigen::MatrixXd t = a.bottomRightCorner(n - 1, n - 1);
    // Symmetrize bitwise: the accumulation above is symmetric only up to round-off.
    t = (0.5 * (t + t.transpose())).eval();
    return t;
}

Eigen::Matrix<double, 3, 2> fracture_face_frame(const Mesh& mesh, int face)
{
    const Vec3 n = face_normal(mesh, face);
    const Vec3 xs = mesh.face_center(face);
    Vec3 t1 = mesh.nodes[mesh.faces[face].nodes[0]] - xs;
    t1 -= t1.dot(n) * n;
    t1.normalize();
    Eigen::Matrix<double, 3, 2> frame;
    frame.col(0) = t1;
    frame.col(1) = n.cross(t1);
    return frame;
}

Eigen::MatrixXd compute_fracture_transmissibility(const Mesh& mesh, int face, double width,
                                                  const Eigen::Matrix2d& lambda_t)
{
    const Face& fc = mesh.faces[face];
    const int k = static_cast<int>(fc.nodes.size());
    const Vec3 xs = mesh.face_center(face);
    const auto frame = fracture_face_frame(mesh, face);
    std::vector<Eigen::Vector2d> p(k);
    for (int i = 0; i < k; ++i)
        p[i] = frame.transpose() * (mesh.nodes[fc.nodes[i]] - xs);

    // Local dofs: 0 is the face, 1..k its nodes; triangles (x_σ, s_i, s_i+1).
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k + 1, k + 1);
    const Eigen::Matrix2d d = width * lambda_t;
    for (int e = 0; e < k; ++e) {
        const int j = (e + 1) % k;
        Eigen::Matrix2d m;
        m.col(0) = p[e];
        m.col(1) = p[j];
        const double det = m.determinant();
        if (!(std::abs(det) > 1e-14 * p[e].norm() * p[j].norm()))
            throw GeometryError("fracture face on mesh face " + std::to_string(face) + " has a degenerate triangle");
        const Eigen::Matrix2d ginv = m.inverse();
        Eigen::Matrix<double, 2, 3> g;
        g.col(1) = ginv.row(0).transpose();
        g.col(2) = ginv.row(1).transpose();
        g.col(0) = -(g.col(1) + g.col(2));
        const std::array<int, 3> idx{0, 1 + e, 1 + j};
        const Eigen::Matrix3d loc = (std::abs(det) / 2.0) * (g.transpose() * d * g);
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                a(idx[r], idx[c]) += loc(r, c);
    }
    Eigen::MatrixXd t = a.bottomRightCorner(k, k);
    t = (0.5 * (t + t.transpose())).eval();
    return t;
}

TransmissibilityStencil unit_stencils(const Mesh& mesh, const Connectivity& conn)
{
    TransmissibilityStencil st;
    st.cell.reserve(mesh.num_cells());
    for (int c = 0; c < mesh.num_cells(); ++c)
        st.cell.push_back(compute_cell_transmissibility(mesh, conn, c, Mat3::Identity()));
    st.fracture.reserve(mesh.num_fracture_faces());
    for (const FractureFace& ff : mesh.fracture_faces)
        st.fracture.push_back(compute_fracture_transmissibility(mesh, ff.face, 1.0, Eigen::Matrix2d::Identity()));
    return st;
}

namespace {

TransmissibilityStencil scaled(const TransmissibilityStencil& unit, const Mesh& mesh, const std::vector<double>& kc,
                               const std::vector<double>& kf, const char* what, bool strict)
{
    if (kc.size() != unit.cell.size() || kf.size() != unit.fracture.size())
        throw ConfigError(std::string(what) + ": one value per cell and per fracture face is required");
    auto check = [&](double v) {
        if (strict ? !(v > 0.0) : !(v >= 0.0))
            throw ConfigError(std::string(what) + (strict ? " must be positive" : " must be non-negative"));
    };
    TransmissibilityStencil st;
    st.cell.resize(unit.cell.size());
    for (std::size_t c = 0; c < unit.cell.size(); ++c) {
        check(kc[c]);
        st.cell[c] = kc[c] * unit.cell[c];
    }
    st.fracture.resize(unit.fracture.size());
    for (std::size_t f = 0; f < unit.fracture.size(); ++f) {
        check(kf[f]);
        st.fracture[f] = (kf[f] * mesh.fracture_faces[f].width) * unit.fracture[f];
    }
    return st;
}

} // namespace

TransmissibilityStencil darcy_stencils(const TransmissibilityStencil& unit, const Mesh& mesh,
                                       const std::vector<double>& perm_cell, const std::vector<double>& perm_fracture)
{
    return scaled(unit, mesh, perm_cell, perm_fracture, "permeability", false);
}

TransmissibilityStencil fourier_transmissibilities(const TransmissibilityStencil& unit, const Mesh& mesh,
                                                   const std::vector<double>& lambda_cell,
                                                   const std::vector<double>& lambda_fracture)
{
    return scaled(unit, mesh, lambda_cell, lambda_fracture, "thermal conductivity", true);
}

Eigen::VectorXd darcy_flux(const Eigen::MatrixXd& t, double u_owner, const Eigen::VectorXd& u_stencil)
{
    return t * (Eigen::VectorXd::Constant(u_stencil.size(), u_owner) - u_stencil);
}

} // namespace vagsim
