#include "vagsim/sim/simulation.hpp"

#include "vagsim/common/errors.hpp"
#include "vagsim/common/log.hpp"
#include "vagsim/sim/output.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace vagsim {

struct Simulation::RankData {
    std::unique_ptr<Discretization> disc;
    std::unique_ptr<Assembler> assembler;
    std::vector<int> global_dof; // local -> global
    std::vector<int> owned;      // owned local dofs, ascending
    std::vector<int> entry_map;  // local pattern entry -> global entry, -1 outside owned rows
    JacobianSystem sys;
    PrimarySystem primary;
};

Simulation::Simulation(const Scenario& scenario, bool threaded)
    : sc_(scenario), exec_(scenario.ranks, threaded), model_(FluidModel::from_name(scenario.fluid.model))
{
    setup();
}

Simulation::~Simulation() = default;

void Simulation::setup()
{
    model_.residual_saturation[0] = sc_.fluid.residual_water_saturation;
    model_.rock_heat_capacity = sc_.rock.rock_heat_capacity;

    switch (sc_.mesh.kind) {
    case MeshSource::Kind::hex: mesh_ = build_cartesian_hex_mesh(sc_.mesh.box); break;
    case MeshSource::Kind::tet: mesh_ = build_kuhn_tet_mesh(sc_.mesh.box); break;
    case MeshSource::Kind::file: mesh_ = load_mesh(sc_.mesh.file.string()); break;
    }
    conn_ = build_connectivity(mesh_);
    const BoundarySetup bs = resolve_boundary(sc_, mesh_, conn_);
    mesh_.node_tags.assign(mesh_.num_nodes(), BoundaryTag::none);
    for (int s = 0; s < mesh_.num_nodes(); ++s)
        if (bs.dirichlet[s])
            mesh_.node_tags[s] = conn_.fracture_node[s] ? BoundaryTag::dirichlet_fracture : BoundaryTag::dirichlet_matrix;
    conn_ = build_connectivity(mesh_);

    const int nc = mesh_.num_cells(), nf = mesh_.num_fracture_faces();
    const TransmissibilityStencil unit = unit_stencils(mesh_, conn_);
    TransmissibilityStencil darcy = darcy_stencils(unit, mesh_, std::vector<double>(nc, sc_.rock.perm_matrix),
                                                   std::vector<double>(nf, sc_.rock.perm_fracture));
    TransmissibilityStencil fourier;
    if (model_.thermal())
        fourier = fourier_transmissibilities(unit, mesh_, std::vector<double>(nc, sc_.rock.conductivity),
                                             std::vector<double>(nf, sc_.rock.conductivity));
    volumes_ = distribute_porous_volumes(mesh_, conn_, std::vector<double>(nc, sc_.rock.porosity_matrix),
                                         std::vector<double>(nf, sc_.rock.porosity_fracture),
                                         sc_.rock.node_volume_fraction);
    disc_ = make_discretization(mesh_, conn_, std::move(darcy), std::move(fourier), volumes_,
                                Vec3(0.0, 0.0, -sc_.fluid.gravity));

    const double mass_to_moles = model_.kind() == ModelKind::water ? 1.0 / kWaterMolarMass : 1.0;
    for (int s = 0; s < mesh_.num_nodes(); ++s) {
        if (bs.pinned[s]) {
            if (!model_.thermal()) throw ConfigError("temperature boundary requires a thermal fluid model");
            disc_.node_kind[s] = NodeKind::pinned_temperature;
            disc_.pinned_temperature[s] = bs.pinned_temperature[s];
        }
        disc_.source[s][0] = bs.mass_rate[s] * mass_to_moles;
    }

    // Initial state, then boundary states on top of it.
    const std::vector<Vec3> xyz = dof_positions(mesh_, disc_.dofs);
    double z_lo = mesh_.nodes.empty() ? 0.0 : mesh_.nodes[0][2], z_hi = z_lo;
    for (const Vec3& p : mesh_.nodes) {
        z_lo = std::min(z_lo, p[2]);
        z_hi = std::max(z_hi, p[2]);
    }
    initial_ = initial_state(sc_, model_, xyz, z_hi, z_lo);
    for (int s = 0; s < mesh_.num_nodes(); ++s) {
        const int v = disc_.dofs.node(s);
        if (bs.dirichlet[s]) initial_[v] = apply_state_spec(model_, initial_[v], bs.dirichlet_state[s]);
        if (bs.pinned[s]) {
            initial_[v].t = bs.pinned_temperature[s];
            initial_[v] = flash(model_, initial_[v]);
        }
    }

    part_ = make_partition(conn_, sc_.ranks);
    plan_ = build_sync_plan(part_, disc_.dofs);
    pattern_ = std::make_shared<const BlockPattern>(build_pattern(disc_));

    ranks_.clear();
    for (int p = 0; p < part_.num_ranks; ++p) {
        auto r = std::make_unique<RankData>();
        r->disc = std::make_unique<Discretization>(restrict_discretization(disc_, part_, p));
        r->assembler = std::make_unique<Assembler>(model_, *r->disc);
        r->global_dof = part_.ranks[p].global_dofs(disc_.dofs);
        const BlockPattern& lp = r->assembler->pattern();
        r->entry_map.assign(lp.nnz(), -1);
        for (int l = 0; l < lp.n; ++l) {
            if (!r->disc->is_owned(l)) continue;
            r->owned.push_back(l);
            for (int q = lp.row_ptr[l]; q < lp.row_ptr[l + 1]; ++q) {
                const int ge = pattern_->find(r->global_dof[l], r->global_dof[lp.col[q]]);
                if (ge < 0) throw PartitionError("rank-local Jacobian entry missing from the global pattern");
                r->entry_map[q] = ge;
            }
            if (lp.row_ptr[l + 1] - lp.row_ptr[l] != pattern_->row_ptr[r->global_dof[l] + 1] - pattern_->row_ptr[r->global_dof[l]])
                throw PartitionError("owned row " + std::to_string(r->global_dof[l]) + " is incomplete on rank " +
                                     std::to_string(p));
        }
        ranks_.push_back(std::move(r));
    }
    set_state(initial_);
}

std::vector<CoatsState> Simulation::state() const
{
    std::vector<CoatsState> g(disc_.dofs.size());
    for (std::size_t p = 0; p < ranks_.size(); ++p)
        for (int l : ranks_[p]->owned)
            g[ranks_[p]->global_dof[l]] = x_[p][l];
    return g;
}

void Simulation::set_state(const std::vector<CoatsState>& global)
{
    x_.resize(ranks_.size());
    for (std::size_t p = 0; p < ranks_.size(); ++p) {
        x_[p].resize(ranks_[p]->global_dof.size());
        for (std::size_t l = 0; l < x_[p].size(); ++l)
            x_[p][l] = global[ranks_[p]->global_dof[l]];
    }
}

std::array<double, kNumEquations> Simulation::totals() const
{
    std::array<double, kNumEquations> t{};
    for (std::size_t p = 0; p < ranks_.size(); ++p) {
        const Discretization& d = *ranks_[p]->disc;
        for (int l : ranks_[p]->owned) {
            const auto a = accumulation(model_, x_[p][l], d.phi[l], d.phi_bar[l]);
            for (int e = 0; e < kNumEquations; ++e)
                t[e] += a[e];
        }
    }
    return t;
}

void Simulation::assemble_all(double dt)
{
    exec_.run([&](int p) { ranks_[p]->assembler->assemble(x_[p], prev_[p], dt, ranks_[p]->sys); });
}

double Simulation::residual_norm() const
{
    const int nc = model_.num_components();
    std::vector<double> local(ranks_.size(), 0.0);
    exec_.run([&](int p) {
        const RankData& r = *ranks_[p];
        const Discretization& d = *r.disc;
        double m = 0.0;
        for (int l : r.owned) {
            const bool node = d.dofs.is_node(l);
            const NodeKind kind = node ? d.node_kind[d.dofs.node_of(l)] : NodeKind::free;
            if (kind == NodeKind::dirichlet) continue;
            for (int e = 0; e < kNumEquations; ++e) {
                const bool replaced = kind == NodeKind::pinned_temperature && model_.thermal() && e == nc;
                const double scale = replaced ? 1.0 : std::max(1.0, std::abs(r.sys.accumulation_prev[l * kNumEquations + e]));
                const double v = std::abs(r.sys.r(l, e)) / scale;
                if (!(v <= m)) m = std::isnan(v) ? v : std::max(m, v);
            }
            const int ncl = select_unknown_split(model_, x_[p][l].q).num_closures();
            for (int k = 0; k < ncl; ++k) {
                const double v = std::abs(r.sys.closure[l * JacobianSystem::kMaxClosures + k]);
                if (!(v <= m)) m = std::isnan(v) ? v : std::max(m, v);
            }
        }
        local[p] = m;
    });
    double m = 0.0;
    for (double v : local)
        if (!(v <= m)) m = std::isnan(v) ? v : std::max(m, v);
    return m;
}

PrimarySystem Simulation::gather_primary()
{
    exec_.run([&](int p) {
        RankData& r = *ranks_[p];
        r.primary = eliminate_closure(*r.assembler, r.sys, x_[p]);
    });
    PrimarySystem g;
    g.a = BlockMatrix(pattern_);
    g.b = Eigen::VectorXd::Zero(2 * pattern_->n);
    for (const auto& rp : ranks_) {
        const RankData& r = *rp;
        const BlockPattern& lp = r.assembler->pattern();
        for (int l : r.owned) {
            const int gr = r.global_dof[l];
            g.b.segment<2>(2 * gr) = r.primary.b.segment<2>(2 * l);
            for (int q = lp.row_ptr[l]; q < lp.row_ptr[l + 1]; ++q)
                g.a.val[r.entry_map[q]] = r.primary.a.val[q];
        }
    }
    return g;
}

Eigen::VectorXd Simulation::solve_reduced(const SchurSystem& schur, int& iterations, bool& ok) const
{
    const SolverControls& c = sc_.solver;
    const LinearOperator a = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) { schur.a.multiply(x, y); };
    LinearOperator m;
    std::unique_ptr<CprPreconditioner> cpr;
    std::unique_ptr<BlockIlu0> ilu;
    if (c.preconditioner == SolverControls::Preconditioner::cpr) {
        cpr = std::make_unique<CprPreconditioner>(schur.a, model_.num_components());
        m = [&](const Eigen::VectorXd& b, Eigen::VectorXd& x) { cpr->apply(b, x); };
    } else {
        ilu = std::make_unique<BlockIlu0>(schur.a);
        m = [&](const Eigen::VectorXd& b, Eigen::VectorXd& x) { ilu->apply(b, x); };
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(schur.b.size());
    const GmresResult res = gmres(a, m, schur.b, y, {c.gmres_tolerance, c.gmres_max_iterations, c.gmres_restart});
    iterations = res.iterations;
    ok = res.converged;
    return y;
}

NewtonResult Simulation::newton_solve(double dt)
{
    const SolverControls& c = sc_.solver;
    const int np = static_cast<int>(ranks_.size());
    prev_ = x_;
    NewtonResult res;
    try {
        assemble_all(dt);
        const double r0 = residual_norm();
        res.initial_norm = res.final_norm = r0;
        if (!std::isfinite(r0)) throw SolverError("non-finite initial residual");
        if (r0 <= 1e-14) res.converged = true;
        for (int it = 1; it <= c.newton_max_iterations && !res.converged; ++it) {
            res.iterations = it;
            PrimarySystem g = gather_primary();
            const SchurSystem schur = schur_eliminate_cells(g, disc_.dofs);
            int lin = 0;
            bool ok = false;
            const Eigen::VectorXd y = solve_reduced(schur, lin, ok);
            res.gmres_iterations += lin;
            if (!ok) {
                res.failure = "linear solver did not converge in " + std::to_string(lin) + " iterations";
                break;
            }
            const Eigen::VectorXd dx = recover_cells(g, schur, disc_.dofs, y);

            // Natural-unknown increments and the relaxation factor.
            std::vector<std::vector<Eigen::Matrix<double, kMaxUnknowns, 1>>> dnat(np);
            std::vector<double> change(np, 0.0);
            exec_.run([&](int p) {
                const RankData& r = *ranks_[p];
                dnat[p].resize(r.owned.size());
                double m = 0.0;
                for (std::size_t k = 0; k < r.owned.size(); ++k) {
                    const int l = r.owned[k];
                    const int gdof = r.global_dof[l];
                    dnat[p][k] = expand_secondary(r.primary.elim, l, dx.segment<2>(2 * gdof));
                    const CoatsState& s = x_[p][l];
                    const UnknownLayout& lay = select_unknown_split(model_, s.q);
                    for (int v = 0; v < lay.num_unknowns; ++v) {
                        const double d = std::abs(dnat[p][k](v));
                        double rel = 0.0;
                        switch (lay.vars[v].kind) {
                        case VarKind::pressure: rel = d / std::abs(s.p); break;
                        case VarKind::temperature: rel = d / std::abs(s.t); break;
                        case VarKind::saturation: rel = d; break;
                        default: break;
                        }
                        if (!(rel <= m)) m = std::isnan(rel) ? rel : std::max(m, rel);
                    }
                }
                change[p] = m;
            });
            double mc = 0.0;
            for (double v : change)
                if (!(v <= mc)) mc = std::isnan(v) ? v : std::max(mc, v);
            if (!std::isfinite(mc)) throw SolverError("non-finite Newton increment");
            const double theta = mc > c.max_change ? c.max_change / mc : 1.0;

            exec_.run([&](int p) {
                const RankData& r = *ranks_[p];
                for (std::size_t k = 0; k < r.owned.size(); ++k) {
                    const int l = r.owned[k];
                    CoatsState s = x_[p][l];
                    const UnknownLayout& lay = select_unknown_split(model_, s.q);
                    for (int v = 0; v < lay.num_unknowns; ++v)
                        set_var(s, lay.vars[v], get_var(s, lay.vars[v]) + theta * dnat[p][k](v));
                    x_[p][l] = flash(model_, s);
                }
            });
            plan_.sync(x_);

            assemble_all(dt);
            const double rn = residual_norm();
            res.final_norm = rn;
            if (!std::isfinite(rn)) throw SolverError("non-finite residual");
            if (rn <= c.newton_tolerance * r0) res.converged = true;
        }
        if (!res.converged && res.failure.empty())
            res.failure = "no convergence in " + std::to_string(c.newton_max_iterations) + " Newton iterations";
    } catch (const Error& e) {
        res.converged = false;
        res.failure = e.what();
    }
    if (!res.converged) x_ = prev_;
    return res;
}

PrimarySystem Simulation::primary_system(double dt, SchurSystem* schur)
{
    prev_ = x_;
    assemble_all(dt);
    PrimarySystem g = gather_primary();
    if (schur) *schur = schur_eliminate_cells(g, disc_.dofs);
    return g;
}

void Simulation::write_fields(int index)
{
    const std::filesystem::path dir = sc_.output.directory;
    const std::vector<CoatsState> x = state();
    const std::string stem = sc_.name + "_" + std::to_string(index);
    std::vector<std::string> cell_pieces, frac_pieces;
    std::vector<std::string> names;
    for (int p = 0; p < part_.num_ranks; ++p) {
        const RankDomain& r = part_.ranks[p];
        const std::string suffix = part_.num_ranks > 1 ? "_r" + std::to_string(p) : "";
        std::vector<int> dofs;
        for (int k : r.owned_cells)
            dofs.push_back(disc_.dofs.cell(k));
        const FieldSet cf = state_fields(model_, x, dofs);
        names = cf.names;
        const std::string cname = stem + "_cells" + suffix + ".vtu";
        write_cells_vtu(dir / cname, mesh_, r.owned_cells, cf);
        cell_pieces.push_back(cname);
        if (mesh_.num_fracture_faces() > 0) {
            dofs.clear();
            for (int f : r.owned_fracture_faces)
                dofs.push_back(disc_.dofs.fracture_face(f));
            const std::string fname = stem + "_fractures" + suffix + ".vtu";
            write_fracture_vtu(dir / fname, mesh_, r.owned_fracture_faces, state_fields(model_, x, dofs));
            frac_pieces.push_back(fname);
        }
    }
    const double days = time_ / kSecondsPerDay;
    if (part_.num_ranks > 1) {
        write_pvtu(dir / (stem + "_cells.pvtu"), cell_pieces, names);
        pvd_cells_.push_back({days, stem + "_cells.pvtu"});
        if (!frac_pieces.empty()) {
            write_pvtu(dir / (stem + "_fractures.pvtu"), frac_pieces, names);
            pvd_fractures_.push_back({days, stem + "_fractures.pvtu"});
        }
    } else {
        pvd_cells_.push_back({days, cell_pieces.front()});
        if (!frac_pieces.empty()) pvd_fractures_.push_back({days, frac_pieces.front()});
    }
    write_pvd(dir / (sc_.name + "_cells.pvd"), pvd_cells_);
    if (!pvd_fractures_.empty()) write_pvd(dir / (sc_.name + "_fractures.pvd"), pvd_fractures_);
}

std::string RunReport::to_json() const
{
    nlohmann::ordered_json j;
    j["scenario"] = scenario;
    j["ranks"] = ranks;
    j["completed"] = completed;
    j["abort_reason"] = abort_reason;
    j["final_time_days"] = final_time / kSecondsPerDay;
    j["N_timestep"] = time_steps;
    j["N_failed_timestep"] = failed_steps;
    j["N_newton"] = newton_iterations;
    j["N_gmres"] = gmres_iterations;
    j["N_newton_per_timestep"] = newton_per_step();
    j["N_gmres_per_newton"] = gmres_per_newton();
    return j.dump(2);
}

RunReport Simulation::run(const Observer& observer)
{
    RunReport rep;
    rep.scenario = sc_.name;
    rep.ranks = part_.num_ranks;
    balances_.clear();
    pvd_cells_.clear();
    pvd_fractures_.clear();
    time_ = 0.0;

    const std::filesystem::path dir = sc_.output.directory;
    const bool write = !dir.empty();
    std::ofstream csv;
    const int ne = kNumEquations;
    auto eq_name = [&](int e) {
        return e < model_.num_components() ? std::string(model_.component_name(e)) : std::string("energy");
    };
    if (write) {
        std::filesystem::create_directories(dir);
        csv.open(dir / (sc_.name + "_balance.csv"));
        if (!csv) throw Error("cannot write " + (dir / (sc_.name + "_balance.csv")).string());
        csv.precision(17);
        csv << "time_days,dt_days,newton,gmres";
        for (const char* col : {"total_", "outflow_rate_", "source_rate_", "imbalance_"})
            for (int e = 0; e < ne; ++e)
                csv << ',' << col << eq_name(e);
        csv << ",pinned_energy_rate\n";
        if (sc_.output.fields) write_fields(0);
    }
    std::vector<double> out_times = sc_.output.times;
    std::sort(out_times.begin(), out_times.end());
    std::size_t next_out = 0;
    int out_index = 0;

    std::array<double, kNumEquations> before = totals();
    TimeController tc(sc_.time);
    try {
        while (!tc.finished()) {
            const double dt = tc.proposed_step();
            const NewtonResult nr = newton_solve(dt);
            rep.newton_iterations += nr.iterations;
            rep.gmres_iterations += nr.gmres_iterations;
            if (!nr.converged) {
                ++rep.failed_steps;
                log_info("t = " + std::to_string(tc.time() / kSecondsPerDay) + " d, dt = " +
                         std::to_string(dt / kSecondsPerDay) + " d rejected: " + nr.failure);
                tc.reject();
                continue;
            }
            tc.accept();
            time_ = tc.time();
            ++rep.time_steps;

            StepBalance sb;
            sb.time = time_;
            sb.dt = dt;
            sb.newton_iterations = nr.iterations;
            sb.gmres_iterations = nr.gmres_iterations;
            sb.newton_initial_norm = nr.initial_norm;
            sb.newton_final_norm = nr.final_norm;
            sb.total = totals();
            for (const auto& r : ranks_) {
                for (int e = 0; e < ne; ++e) {
                    sb.boundary_outflow[e] += r->sys.boundary_outflow[e];
                    sb.source_inflow[e] += r->sys.source_inflow[e];
                }
                sb.pinned_energy_inflow += r->sys.pinned_energy_inflow;
            }
            for (int e = 0; e < ne; ++e) {
                const double pinned = (model_.thermal() && e == model_.num_components()) ? sb.pinned_energy_inflow : 0.0;
                sb.imbalance[e] =
                    (sb.total[e] - before[e]) - dt * (sb.source_inflow[e] + pinned - sb.boundary_outflow[e]);
            }
            before = sb.total;
            balances_.push_back(sb);

            if (write) {
                csv << time_ / kSecondsPerDay << ',' << dt / kSecondsPerDay << ',' << nr.iterations << ','
                    << nr.gmres_iterations;
                for (const auto* arr : {&sb.total, &sb.boundary_outflow, &sb.source_inflow, &sb.imbalance})
                    for (int e = 0; e < ne; ++e)
                        csv << ',' << (*arr)[e];
                csv << ',' << sb.pinned_energy_inflow << '\n';
                while (next_out < out_times.size() && time_ >= out_times[next_out] * (1.0 - 1e-12)) {
                    if (sc_.output.fields) write_fields(++out_index);
                    ++next_out;
                }
            }
            if (observer && !observer(*this, sb)) break;
        }
        rep.completed = tc.finished();
        if (!rep.completed) rep.abort_reason = "stopped by observer";
    } catch (const SolverError& e) {
        rep.abort_reason = e.what();
    }
    rep.final_time = time_;
    if (write) {
        csv.flush();
        if (!csv) throw Error("I/O error while writing the balance file");
        std::ofstream rj(dir / (sc_.name + "_report.json"));
        rj << rep.to_json() << '\n';
        if (!rj) throw Error("cannot write the run report");
    }
    return rep;
}

} // namespace vagsim
