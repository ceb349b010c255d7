#include "test_support.hpp"

#include "vagsim/common/errors.hpp"
#include "vagsim/vag/vag.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <random>

using namespace vagsim;

namespace {

Mesh jittered_mesh(bool tets, std::mt19937& rng)
{
    BoxMeshSpec spec;
    spec.cells_per_axis = {3, 3, 2};
    spec.extent = Vec3(3.0, 3.0, 2.0);
    spec.fractures.push_back({0, 0, 1.0, {0.0, 0.0}, {3.0, 2.0}, 0.05});
    spec.fractures.push_back({1, 1, 2.0, {0.0, 0.0}, {3.0, 2.0}, 0.02});
    Mesh m = tets ? build_kuhn_tet_mesh(spec) : build_cartesian_hex_mesh(spec);
    test::jitter_interior_nodes(m, 0.2, rng);
    return m;
}

Mat3 random_spd(std::mt19937& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0), e(0.1, 3.0);
    Mat3 a;
    for (int i = 0; i < 9; ++i)
        a(i / 3, i % 3) = u(rng);
    const Eigen::HouseholderQR<Mat3> qr(a);
    const Mat3 q = qr.householderQ();
    return q * Vec3(e(rng), e(rng), e(rng)).asDiagonal() * q.transpose();
}

Vec3 random_vec(std::mt19937& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return {u(rng), u(rng), u(rng)};
}

/// Position of every stencil member of a cell, in cell_stencil order.
std::vector<Vec3> stencil_points(const Mesh& m, const Connectivity& c, int k)
{
    std::vector<Vec3> p;
    for (int s : c.cell_nodes[k])
        p.push_back(m.nodes[s]);
    for (int f : c.cell_fracture_faces[k])
        p.push_back(m.face_center(m.fracture_faces[f].face));
    return p;
}

} // namespace

TEST_SUITE("vag")
{
    TEST_CASE("cell transmissibility is symmetric positive semidefinite")
    {
        std::mt19937 rng(11);
        for (bool tets : {false, true}) {
            const Mesh m = jittered_mesh(tets, rng);
            const Connectivity c = build_connectivity(m);
            for (int k = 0; k < m.num_cells(); ++k) {
                const Eigen::MatrixXd t = compute_cell_transmissibility(m, c, k, random_spd(rng));
                const double scale = t.cwiseAbs().maxCoeff();
                CHECK((t - t.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * scale);
                const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (t + t.transpose()));
                CHECK(es.eigenvalues().minCoeff() >= -1e-12 * scale);
            }
        }
    }

    TEST_CASE("affine fields reproduce the energy of the cell exactly")
    {
        // For affine u and v, Σ_ν F_ν(u)(v_K - v_ν) = |K| ∇v·Λ∇u.
        std::mt19937 rng(12);
        for (bool tets : {false, true}) {
            const Mesh m = jittered_mesh(tets, rng);
            const Connectivity c = build_connectivity(m);
            for (int k = 0; k < m.num_cells(); ++k) {
                const Mat3 lambda = random_spd(rng);
                const Vec3 gu = random_vec(rng), gv = random_vec(rng);
                const Eigen::MatrixXd t = compute_cell_transmissibility(m, c, k, lambda);
                const auto pts = stencil_points(m, c, k);
                const Vec3 xk = m.cells[k].center;
                Eigen::VectorXd us(pts.size());
                double form = 0.0;
                for (std::size_t i = 0; i < pts.size(); ++i)
                    us[i] = gu.dot(pts[i]);
                const Eigen::VectorXd f = darcy_flux(t, gu.dot(xk), us);
                for (std::size_t i = 0; i < pts.size(); ++i)
                    form += f[i] * (gv.dot(xk) - gv.dot(pts[i]));
                const double exact = cell_volume(m, k) * gv.dot(lambda * gu);
                CHECK(form == doctest::Approx(exact).epsilon(1e-11).scale(lambda.norm() * cell_volume(m, k)));
                // Constant fields carry no flux.
                CHECK(darcy_flux(t, 1.0, Eigen::VectorXd::Ones(pts.size())).cwiseAbs().maxCoeff() <=
                      1e-14 * t.cwiseAbs().maxCoeff());
            }
        }
    }

    TEST_CASE("fracture transmissibility reproduces the tangential energy")
    {
        std::mt19937 rng(13);
        const Mesh m = jittered_mesh(true, rng);
        std::uniform_real_distribution<double> u(0.2, 2.0);
        for (const FractureFace& ff : m.fracture_faces) {
            const Eigen::Matrix<double, 3, 2> frame = fracture_face_frame(m, ff.face);
            CHECK((frame.transpose() * frame - Eigen::Matrix2d::Identity()).norm() < 1e-14);
            Eigen::Matrix2d lt;
            lt << u(rng), 0.1, 0.1, u(rng);
            const Eigen::MatrixXd t = compute_fracture_transmissibility(m, ff.face, ff.width, lt);
            CHECK((t - t.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * t.cwiseAbs().maxCoeff());
            const Vec3 gu = random_vec(rng), gv = random_vec(rng);
            const Vec3 xs = m.face_center(ff.face);
            const auto& nodes = m.faces[ff.face].nodes;
            Eigen::VectorXd us(nodes.size());
            for (std::size_t i = 0; i < nodes.size(); ++i)
                us[i] = gu.dot(m.nodes[nodes[i]]);
            const Eigen::VectorXd f = darcy_flux(t, gu.dot(xs), us);
            double form = 0.0;
            for (std::size_t i = 0; i < nodes.size(); ++i)
                form += f[i] * (gv.dot(xs) - gv.dot(m.nodes[nodes[i]]));
            const Eigen::Vector2d tu = frame.transpose() * gu, tv = frame.transpose() * gv;
            const double exact = face_area(m, ff.face) * ff.width * tv.dot(lt * tu);
            CHECK(form == doctest::Approx(exact).epsilon(1e-11).scale(face_area(m, ff.face) * ff.width));
        }
    }

    TEST_CASE("Darcy and Fourier stencils scale the unit stencils")
    {
        std::mt19937 rng(14);
        const Mesh m = jittered_mesh(false, rng);
        const Connectivity c = build_connectivity(m);
        const TransmissibilityStencil unit = unit_stencils(m, c);
        std::vector<double> kc(m.num_cells()), kf(m.num_fracture_faces());
        std::uniform_real_distribution<double> u(0.5, 2.0);
        for (double& v : kc)
            v = u(rng) * 1e-14;
        for (double& v : kf)
            v = u(rng) * 1e-11;
        const TransmissibilityStencil darcy = darcy_stencils(unit, m, kc, kf);
        for (int k = 0; k < m.num_cells(); ++k)
            CHECK((darcy.cell[k] - kc[k] * unit.cell[k]).norm() <= 1e-14 * darcy.cell[k].norm());
        for (int f = 0; f < m.num_fracture_faces(); ++f) {
            // Unit fracture stencils carry d_f Λ_f = I; Darcy ones d_f Λ_f.
            const double w = m.fracture_faces[f].width;
            CHECK((darcy.fracture[f] - w * kf[f] * unit.fracture[f]).norm() <= 1e-14 * darcy.fracture[f].norm());
        }
        const TransmissibilityStencil fourier = fourier_transmissibilities(unit, m, std::vector<double>(kc.size(), 2.0),
                                                                           std::vector<double>(kf.size(), 3.0));
        CHECK((fourier.cell[0] - 2.0 * unit.cell[0]).norm() <= 1e-14 * fourier.cell[0].norm());
        CHECK_THROWS_AS(fourier_transmissibilities(unit, m, std::vector<double>(kc.size(), 0.0),
                                                   std::vector<double>(kf.size(), 3.0)),
                        ConfigError);
    }

    TEST_CASE("porous volumes conserve the total pore volume")
    {
        std::mt19937 rng(15);
        Mesh m = jittered_mesh(true, rng);
        for (int s = 0; s < m.num_nodes(); ++s)
            if (m.nodes[s].z() < 1e-12) m.node_tags[s] = BoundaryTag::dirichlet_matrix;
        const Connectivity c = build_connectivity(m);
        const DofNumbering dofs(c);
        std::vector<double> pm(m.num_cells(), 0.1), pf(m.num_fracture_faces(), 0.4);
        const PorousVolumeTable t = distribute_porous_volumes(m, c, pm, pf, 0.05);

        double expected = 0.0, total_phi = 0.0, total_bar = 0.0, rock = 0.0;
        for (int k = 0; k < m.num_cells(); ++k) {
            expected += 0.1 * cell_volume(m, k);
            rock += 0.9 * cell_volume(m, k);
        }
        for (int f = 0; f < m.num_fracture_faces(); ++f) {
            const double v = face_area(m, m.fracture_faces[f].face) * m.fracture_faces[f].width;
            expected += 0.4 * v;
            rock += 0.6 * v;
        }
        for (int d = 0; d < dofs.size(); ++d) {
            CHECK(t.phi[d] >= 0.0);
            total_phi += t.phi[d];
            total_bar += t.phi_bar[d];
        }
        CHECK(t.pore_volume_total == doctest::Approx(expected).epsilon(1e-13));
        CHECK(total_phi == doctest::Approx(expected).epsilon(1e-13));
        CHECK(total_bar == doctest::Approx(rock).epsilon(1e-13));
        for (int s = 0; s < m.num_nodes(); ++s)
            if (c.dirichlet_node[s]) CHECK(t.phi[dofs.node(s)] == 0.0);
    }

    TEST_CASE("volume fraction weight must keep the cell share positive")
    {
        std::mt19937 rng(16);
        const Mesh m = jittered_mesh(false, rng);
        const Connectivity c = build_connectivity(m);
        std::vector<double> pm(m.num_cells(), 0.1), pf(m.num_fracture_faces(), 0.4);
        CHECK_THROWS_AS(distribute_porous_volumes(m, c, pm, pf, 0.0), ConfigError);
        // Hexahedra have eight nodes, so 0.2 would hand out 160% of a cell.
        CHECK_THROWS_AS(distribute_porous_volumes(m, c, pm, pf, 0.2), ConfigError);
        pm[3] = 1.5;
        CHECK_THROWS_AS(distribute_porous_volumes(m, c, pm, pf, 0.05), ConfigError);
    }
}
