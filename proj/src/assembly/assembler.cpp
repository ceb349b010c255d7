#include "vagsim/assembly/assembly.hpp"

#include <algorithm>

namespace vagsim {

namespace {

constexpr int NX = kMaxUnknowns;
constexpr int NE = kNumEquations;
using D6 = Dual<NX>;
using D12 = Dual<2 * NX>;

/// Saturation sum below which the weighted phase density is the plain mean.
constexpr double kWeightFloor = 1e-12;

struct DofProps {
    std::array<D6, kMaxPhases> s{};
    std::array<D6, kMaxPhases> rho{};
    std::array<std::array<D6, kMaxComponents>, kMaxPhases> mob{};
    std::array<D6, kMaxPhases> mobe{};
    std::array<D6, NE> acc{};
};

template <class S>
std::array<S, NE> accumulation_impl(const FluidModel& m, const NaturalState<S>& x, double phi, double phi_bar)
{
    std::array<S, NE> a{};
    const int nc = m.num_components();
    for (int i = 0; i < nc; ++i)
        a[i] = phi * component_moles(m, x, i);
    if (m.thermal()) a[nc] = phi * fluid_energy(m, x) + phi_bar * m.rock_energy(x.p, x.t);
    return a;
}

DofProps evaluate(const FluidModel& m, const CoatsState& x, double phi, double phi_bar)
{
    const UnknownLayout& lay = select_unknown_split(m, x.q);
    const NaturalState<D6> st = seed_state<NX>(x, lay);
    DofProps d;
    for (int a = 0; a < m.num_phases(); ++a) {
        d.s[a] = st.s[a];
        d.rho[a] = m.rho(a, st.p, st.t, st.c[a]);
        if (!st.present(a)) continue;
        const D6 kr = m.kr(a, st.s[a]);
        const D6 zk = m.zeta(a, st.p, st.t, st.c[a]) * kr / m.mu(a, st.p, st.t, st.c[a]);
        for (int i = 0; i < m.num_components(); ++i)
            if (m.contains(a, i)) d.mob[a][i] = st.c[a][i] * zk;
        if (m.thermal()) d.mobe[a] = m.enthalpy(a, st.p, st.t, st.c[a]) * zk;
    }
    d.acc = accumulation_impl(m, st, phi, phi_bar);
    return d;
}

} // namespace

std::array<double, kNumEquations> accumulation(const FluidModel& m, const CoatsState& x, double phi, double phi_bar)
{
    return accumulation_impl(m, x, phi, phi_bar);
}

Discretization make_discretization(const Mesh& mesh, const Connectivity& conn, TransmissibilityStencil darcy,
                                   TransmissibilityStencil fourier, const PorousVolumeTable& volumes,
                                   const Vec3& gravity)
{
    Discretization d;
    d.dofs = DofNumbering(conn);
    d.cell_nodes = conn.cell_nodes;
    d.cell_fracture_faces = conn.cell_fracture_faces;
    d.fracture_face_nodes = conn.fracture_face_nodes;
    d.darcy = std::move(darcy);
    d.fourier = std::move(fourier);
    d.phi = volumes.phi;
    d.phi_bar = volumes.phi_bar;
    d.gravity.resize(d.dofs.size());
    for (int k = 0; k < mesh.num_cells(); ++k)
        d.gravity[d.dofs.cell(k)] = -gravity.dot(mesh.cells[k].center);
    for (int s = 0; s < mesh.num_nodes(); ++s)
        d.gravity[d.dofs.node(s)] = -gravity.dot(mesh.nodes[s]);
    for (int f = 0; f < mesh.num_fracture_faces(); ++f)
        d.gravity[d.dofs.fracture_face(f)] = -gravity.dot(mesh.face_center(mesh.fracture_faces[f].face));
    d.node_kind.assign(mesh.num_nodes(), NodeKind::free);
    for (int s = 0; s < mesh.num_nodes(); ++s)
        if (conn.dirichlet_node[s]) d.node_kind[s] = NodeKind::dirichlet;
    d.pinned_temperature.assign(mesh.num_nodes(), 0.0);
    d.source.assign(mesh.num_nodes(), {0.0, 0.0});
    return d;
}

namespace {

/// Local dof ids of a cell element: the cell, then Ξ_K.
void cell_element(const Discretization& d, int k, std::vector<int>& out)
{
    out.clear();
    out.push_back(d.dofs.cell(k));
    for (int s : d.cell_nodes[k])
        out.push_back(d.dofs.node(s));
    for (int f : d.cell_fracture_faces[k])
        out.push_back(d.dofs.fracture_face(f));
}

void fracture_element(const Discretization& d, int f, std::vector<int>& out)
{
    out.clear();
    out.push_back(d.dofs.fracture_face(f));
    for (int s : d.fracture_face_nodes[f])
        out.push_back(d.dofs.node(s));
}

} // namespace

BlockPattern build_pattern(const Discretization& d)
{
    std::vector<std::vector<int>> rows(d.dofs.size());
    std::vector<int> el;
    auto add = [&] {
        for (int a : el)
            rows[a].insert(rows[a].end(), el.begin(), el.end());
    };
    for (int k = 0; k < d.dofs.num_cells; ++k) {
        cell_element(d, k, el);
        add();
    }
    for (int f = 0; f < d.dofs.num_fracture_faces; ++f) {
        fracture_element(d, f, el);
        add();
    }
    for (int i = 0; i < d.dofs.size(); ++i)
        rows[i].push_back(i);
    return BlockPattern::from_rows(std::move(rows));
}

Assembler::Assembler(const FluidModel& model, const Discretization& disc)
    : model_(model), disc_(disc), pattern_(std::make_shared<const BlockPattern>(build_pattern(disc)))
{
    std::vector<int> el;
    auto table = [&](std::vector<int>& entries, std::vector<std::size_t>& offsets) {
        offsets.push_back(entries.size());
        for (int a : el)
            for (int b : el)
                entries.push_back(pattern_->find(a, b));
    };
    for (int k = 0; k < disc.dofs.num_cells; ++k) {
        cell_element(disc, k, el);
        table(cell_entries_, cell_entry_offset_);
    }
    cell_entry_offset_.push_back(cell_entries_.size());
    for (int f = 0; f < disc.dofs.num_fracture_faces; ++f) {
        fracture_element(disc, f, el);
        table(frac_entries_, frac_entry_offset_);
    }
    frac_entry_offset_.push_back(frac_entries_.size());
}

void Assembler::freeze_upwind(std::vector<std::uint8_t> choices)
{
    upwind_ = std::move(choices);
    frozen_ = true;
}

void Assembler::residual(const std::vector<CoatsState>& x, const std::vector<CoatsState>& prev, double dt,
                         JacobianSystem& out)
{
    run(x, prev, dt, out, false);
}

void Assembler::assemble(const std::vector<CoatsState>& x, const std::vector<CoatsState>& prev, double dt,
                         JacobianSystem& out)
{
    run(x, prev, dt, out, true);
}

void Assembler::run(const std::vector<CoatsState>& x, const std::vector<CoatsState>& prev, double dt,
                    JacobianSystem& out, bool with_jac)
{
    const Discretization& d = disc_;
    const FluidModel& m = model_;
    const int ndof = d.dofs.size();
    const int nc = m.num_components();
    const bool thermal = m.thermal();
    const double inv_dt = 1.0 / dt;

    out.residual.assign(static_cast<std::size_t>(ndof) * NE, 0.0);
    out.accumulation_prev.assign(static_cast<std::size_t>(ndof) * NE, 0.0);
    out.closure.assign(static_cast<std::size_t>(ndof) * JacobianSystem::kMaxClosures, 0.0);
    out.boundary_outflow.fill(0.0);
    out.source_inflow.fill(0.0);
    out.pinned_energy_inflow = 0.0;
    if (with_jac) {
        out.jac.assign(static_cast<std::size_t>(pattern_->nnz()) * JacobianSystem::kBlock, 0.0);
        out.closure_jac.assign(static_cast<std::size_t>(ndof) * JacobianSystem::kMaxClosures * NX, 0.0);
    }

    // Per-dof properties, accumulation and closure rows.
    std::vector<DofProps> props(ndof);
    for (int v = 0; v < ndof; ++v) {
        props[v] = evaluate(m, x[v], d.phi[v], d.phi_bar[v]);
        const auto aprev = accumulation(m, prev[v], d.phi[v], d.phi_bar[v]);
        for (int e = 0; e < NE; ++e) {
            out.accumulation_prev[v * NE + e] = aprev[e];
            out.r(v, e) = (props[v].acc[e].v - aprev[e]) * inv_dt;
        }
        if (with_jac) {
            double* blk = out.block(pattern_->diag[v]);
            for (int e = 0; e < NE; ++e)
                for (int j = 0; j < NX; ++j)
                    blk[e * NX + j] = props[v].acc[e].d[j] * inv_dt;
        }
        const UnknownLayout& lay = select_unknown_split(m, x[v].q);
        const NaturalState<D6> st = seed_state<NX>(x[v], lay);
        std::array<D6, JacobianSystem::kMaxClosures> cl{};
        const int ncl = closure_residual(m, st, cl.data());
        for (int r = 0; r < ncl; ++r) {
            out.closure[v * JacobianSystem::kMaxClosures + r] = cl[r].v;
            if (with_jac)
                for (int j = 0; j < NX; ++j)
                    out.closure_jac[(static_cast<std::size_t>(v) * JacobianSystem::kMaxClosures + r) * NX + j] =
                        cl[r].d[j];
        }
    }

    auto is_dirichlet = [&](int dof) {
        return d.dofs.is_node(dof) && d.node_kind[d.dofs.node_of(dof)] == NodeKind::dirichlet;
    };

    std::size_t upwind_index = 0;
    const std::size_t nflux = d.cell_nodes.items.size() + d.cell_fracture_faces.items.size() +
                              d.fracture_face_nodes.items.size();
    if (!frozen_) upwind_.assign(nflux * kMaxPhases, 0);

    std::vector<int> el;
    // Fluxes from element owner (local 0) to each stencil member.
    auto element = [&](const Eigen::MatrixXd& t, const Eigen::MatrixXd* tf, const int* entries) {
        const int nm = static_cast<int>(el.size()) - 1;
        const int o = el[0];
        const bool tally = d.is_owned(o);
        auto jadd = [&](int row_local, int col_local, int eq, int var, double w) {
            out.block(entries[row_local * (nm + 1) + col_local])[eq * NX + var] += w;
        };
        for (int jm = 0; jm < nm; ++jm) {
            const int jl = jm + 1;
            const int j = el[jl];
            double fp = 0.0, fg = 0.0, rowsum = 0.0;
            for (int k = 0; k < nm; ++k) {
                const double tjk = t(jm, k);
                fp += tjk * (x[o].p - x[el[k + 1]].p);
                fg += tjk * (d.gravity[o] - d.gravity[el[k + 1]]);
                rowsum += tjk;
            }
            const bool to_boundary = is_dirichlet(j);
            for (int a = 0; a < m.num_phases(); ++a) {
                // A phase absent at both ends carries nothing whichever way it
                // is upwinded; keep the orientation for frozen reuse.
                if (!x[o].present(a) && !x[j].present(a)) {
                    if (!frozen_) upwind_[upwind_index] = 0;
                    ++upwind_index;
                    continue;
                }
                const DofProps& po = props[o];
                const DofProps& pj = props[j];
                D12 rbar;
                const D12 so = lift<2 * NX>(po.s[a], 0), sj = lift<2 * NX>(pj.s[a], NX);
                const D12 ro = lift<2 * NX>(po.rho[a], 0), rj = lift<2 * NX>(pj.rho[a], NX);
                // Below the floor the weights carry no information and their
                // derivatives overflow; fall back to the plain mean.
                if (so.v + sj.v > kWeightFloor) rbar = (so * ro + sj * rj) / (so + sj);
                else rbar = 0.5 * (ro + rj);
                const double vflux = fp + rbar.v * fg;
                std::uint8_t up;
                if (frozen_) up = upwind_[upwind_index];
                else upwind_[upwind_index] = up = vflux >= 0.0 ? 0 : 1;
                ++upwind_index;
                const DofProps& pu = up == 0 ? po : pj;
                const int ul = up == 0 ? 0 : jl;
                if (!x[el[ul]].present(a)) continue;
                for (int e = 0; e < NE; ++e) {
                    const D6& mq = e < nc ? pu.mob[a][e] : pu.mobe[a];
                    const double q = mq.v * vflux;
                    out.r(o, e) += q;
                    out.r(j, e) -= q;
                    if (to_boundary && tally) out.boundary_outflow[e] += q;
                    if (!with_jac) continue;
                    for (int var = 0; var < NX; ++var) {
                        const double w = mq.d[var] * vflux;
                        if (w == 0.0) continue;
                        jadd(0, ul, e, var, w);
                        jadd(jl, ul, e, var, -w);
                    }
                    const double mg = mq.v * fg;
                    for (int var = 0; var < NX; ++var) {
                        const double wo = mg * rbar.d[var];
                        const double wj = mg * rbar.d[NX + var];
                        if (wo != 0.0) {
                            jadd(0, 0, e, var, wo);
                            jadd(jl, 0, e, var, -wo);
                        }
                        if (wj != 0.0) {
                            jadd(0, jl, e, var, wj);
                            jadd(jl, jl, e, var, -wj);
                        }
                    }
                    jadd(0, 0, e, 0, mq.v * rowsum);
                    jadd(jl, 0, e, 0, -mq.v * rowsum);
                    for (int k = 0; k < nm; ++k) {
                        const double w = -mq.v * t(jm, k);
                        jadd(0, k + 1, e, 0, w);
                        jadd(jl, k + 1, e, 0, -w);
                    }
                }
            }
            if (thermal && tf) {
                double g = 0.0, fsum = 0.0;
                for (int k = 0; k < nm; ++k) {
                    g += (*tf)(jm, k) * (x[o].t - x[el[k + 1]].t);
                    fsum += (*tf)(jm, k);
                }
                out.r(o, nc) += g;
                out.r(j, nc) -= g;
                if (to_boundary && tally) out.boundary_outflow[nc] += g;
                if (with_jac) {
                    jadd(0, 0, nc, 1, fsum);
                    jadd(jl, 0, nc, 1, -fsum);
                    for (int k = 0; k < nm; ++k) {
                        const double w = -(*tf)(jm, k);
                        jadd(0, k + 1, nc, 1, w);
                        jadd(jl, k + 1, nc, 1, -w);
                    }
                }
            }
        }
    };

    for (int k = 0; k < d.dofs.num_cells; ++k) {
        cell_element(d, k, el);
        element(d.darcy.cell[k], thermal ? &d.fourier.cell[k] : nullptr, cell_entries_.data() + cell_entry_offset_[k]);
    }
    for (int f = 0; f < d.dofs.num_fracture_faces; ++f) {
        fracture_element(d, f, el);
        element(d.darcy.fracture[f], thermal ? &d.fourier.fracture[f] : nullptr,
                frac_entries_.data() + frac_entry_offset_[f]);
    }

    for (int s = 0; s < d.dofs.num_nodes; ++s) {
        const int v = d.dofs.node(s);
        const NodeKind kind = d.node_kind[s];
        if (kind == NodeKind::dirichlet) {
            for (int e = 0; e < NE; ++e)
                out.r(v, e) = 0.0;
            if (with_jac)
                for (int p = pattern_->row_ptr[v]; p < pattern_->row_ptr[v + 1]; ++p)
                    std::fill_n(out.block(p), JacobianSystem::kBlock, 0.0);
            continue;
        }
        const bool tally = d.is_owned(v);
        for (int e = 0; e < NE; ++e) {
            out.r(v, e) -= d.source[s][e];
            if (tally) out.source_inflow[e] += d.source[s][e];
        }
        if (kind == NodeKind::pinned_temperature && thermal) {
            if (tally) out.pinned_energy_inflow += out.r(v, nc);
            out.r(v, nc) = x[v].t - d.pinned_temperature[s];
            if (with_jac) {
                for (int p = pattern_->row_ptr[v]; p < pattern_->row_ptr[v + 1]; ++p)
                    std::fill_n(out.block(p) + nc * NX, NX, 0.0);
                out.block(pattern_->diag[v])[nc * NX + 1] = 1.0;
            }
        }
    }
}

} // namespace vagsim
