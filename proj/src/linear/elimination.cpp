#include "vagsim/linear/reduction.hpp"

#include "vagsim/common/errors.hpp"

#include <Eigen/LU>

namespace vagsim {

namespace {

constexpr int NX = kMaxUnknowns;
constexpr int NE = kNumEquations;
constexpr int NCL = JacobianSystem::kMaxClosures;

using FullBlock = Eigen::Matrix<double, NE, NX, Eigen::RowMajor>;
// Closure blocks are at most NCL x NX; bounded storage avoids heap traffic.
using SmallMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, NCL, NX>;
using SmallVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, NCL, 1>;

bool dirichlet_dof(const Discretization& d, int v)
{
    return d.dofs.is_node(v) && d.node_kind[d.dofs.node_of(v)] == NodeKind::dirichlet;
}

Block2 invert_block(const Block2& m, int dof)
{
    const double det = m.determinant();
    const double scale = m.cwiseAbs().maxCoeff();
    if (!(std::abs(det) > 1e-300) || !(std::abs(det) > 1e-14 * scale * scale))
        throw EliminationError("singular diagonal block", dof);
    return m.inverse();
}

} // namespace

PrimarySystem eliminate_closure(const Assembler& assembler, const JacobianSystem& sys,
                                const std::vector<CoatsState>& x)
{
    const Discretization& d = assembler.discretization();
    const FluidModel& m = assembler.model();
    const BlockPattern& pat = assembler.pattern();
    const int ndof = d.dofs.size();

    PrimarySystem out;
    out.a = BlockMatrix(assembler.shared_pattern());
    out.b.resize(2 * ndof);
    out.elim.e_mat.assign(ndof, Eigen::Matrix<double, NX, NE>::Zero());
    out.elim.e_vec.assign(ndof, Eigen::Matrix<double, NX, 1>::Zero());

    std::vector<char> fixed(ndof, 0);
    for (int v = 0; v < ndof; ++v) {
        if (dirichlet_dof(d, v)) {
            fixed[v] = 1;
            continue;
        }
        const UnknownLayout& lay = select_unknown_split(m, x[v].q);
        auto& E = out.elim.e_mat[v];
        auto& e = out.elim.e_vec[v];
        for (int p = 0; p < lay.num_primary; ++p)
            E(lay.primary[p], p) = 1.0;
        const int ncl = lay.num_closures();
        if (ncl == 0) continue;
        SmallMat lsd(ncl, ncl), lpr(ncl, lay.num_primary);
        SmallVec l(ncl);
        for (int r = 0; r < ncl; ++r) {
            const double* row = &sys.closure_jac[(static_cast<std::size_t>(v) * NCL + r) * NX];
            for (int k = 0; k < ncl; ++k)
                lsd(r, k) = row[lay.secondary[k]];
            for (int p = 0; p < lay.num_primary; ++p)
                lpr(r, p) = row[lay.primary[p]];
            l(r) = sys.closure[v * NCL + r];
        }
        Eigen::FullPivLU<SmallMat> lu(lsd);
        if (!lu.isInvertible()) throw EliminationError("singular closure block", v);
        const SmallMat xs = -lu.solve(lpr);
        const SmallVec xv = -lu.solve(l);
        for (int k = 0; k < ncl; ++k) {
            for (int p = 0; p < lay.num_primary; ++p)
                E(lay.secondary[k], p) = xs(k, p);
            e(lay.secondary[k]) = xv(k);
        }
    }

    for (int r = 0; r < ndof; ++r) {
        if (fixed[r]) {
            out.a.val[pat.diag[r]] = Block2::Identity();
            out.b.segment<2>(2 * r).setZero();
            continue;
        }
        Eigen::Vector2d rhs(-sys.r(r, 0), -sys.r(r, 1));
        for (int q = pat.row_ptr[r]; q < pat.row_ptr[r + 1]; ++q) {
            const int c = pat.col[q];
            const Eigen::Map<const FullBlock> j(sys.block(q));
            if (fixed[c]) continue;
            out.a.val[q] = j * out.elim.e_mat[c];
            rhs.noalias() -= j * out.elim.e_vec[c];
        }
        out.b.segment<2>(2 * r) = rhs;
    }
    return out;
}

SchurSystem schur_eliminate_cells(const PrimarySystem& sys, const DofNumbering& dofs)
{
    const BlockPattern& pat = *sys.a.pattern;
    const int nc = dofs.num_cells;
    const int nr = pat.n - nc;

    std::vector<std::vector<int>> rows(nr);
    for (int i = 0; i < nr; ++i)
        for (int q = pat.row_ptr[nc + i]; q < pat.row_ptr[nc + i + 1]; ++q)
            if (pat.col[q] >= nc) rows[i].push_back(pat.col[q] - nc);
    auto rp = std::make_shared<const BlockPattern>(BlockPattern::from_rows(std::move(rows)));

    SchurSystem out;
    out.a = BlockMatrix(rp);
    out.b = sys.b.tail(2 * nr);
    for (int i = 0; i < nr; ++i) {
        int q = pat.row_ptr[nc + i];
        while (pat.col[q] < nc) ++q;
        for (int s = rp->row_ptr[i]; s < rp->row_ptr[i + 1]; ++s, ++q)
            out.a.val[s] = sys.a.val[q];
    }

    out.cell_inverse.resize(nc);
    for (int k = 0; k < nc; ++k) {
        const Block2 inv = invert_block(sys.a.val[pat.diag[k]], k);
        out.cell_inverse[k] = inv;
        const Eigen::Vector2d bk = sys.b.segment<2>(2 * k);
        // Cell rows couple only the cell and its own stencil, so row k lists Ξ_K.
        for (int qa = pat.row_ptr[k]; qa < pat.row_ptr[k + 1]; ++qa) {
            const int a = pat.col[qa];
            if (a < nc) continue;
            const int qak = pat.find(a, k);
            const Block2 y = sys.a.val[qak] * inv;
            out.b.segment<2>(2 * (a - nc)).noalias() -= y * bk;
            // Both rows are sorted, so one forward walk finds every (a, b).
            int s = rp->row_ptr[a - nc];
            for (int qb = pat.row_ptr[k]; qb < pat.row_ptr[k + 1]; ++qb) {
                const int b = pat.col[qb];
                if (b < nc) continue;
                while (rp->col[s] < b - nc) ++s;
                out.a.val[s].noalias() -= y * sys.a.val[qb];
            }
        }
    }
    return out;
}

Eigen::VectorXd recover_cells(const PrimarySystem& sys, const SchurSystem& schur, const DofNumbering& dofs,
                              const Eigen::VectorXd& reduced_solution)
{
    const BlockPattern& pat = *sys.a.pattern;
    const int nc = dofs.num_cells;
    Eigen::VectorXd dx(2 * pat.n);
    dx.tail(reduced_solution.size()) = reduced_solution;
    for (int k = 0; k < nc; ++k) {
        Eigen::Vector2d rhs = sys.b.segment<2>(2 * k);
        for (int q = pat.row_ptr[k]; q < pat.row_ptr[k + 1]; ++q) {
            const int c = pat.col[q];
            if (c < nc) continue;
            rhs.noalias() -= sys.a.val[q] * dx.segment<2>(2 * c);
        }
        dx.segment<2>(2 * k) = schur.cell_inverse[k] * rhs;
    }
    return dx;
}

Eigen::Matrix<double, kMaxUnknowns, 1> expand_secondary(const ClosureElimination& elim, int v,
                                                        const Eigen::Vector2d& dpr)
{
    return elim.e_mat[v] * dpr + elim.e_vec[v];
}

} // namespace vagsim
