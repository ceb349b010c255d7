#include "vagsim/linear/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace vagsim {

namespace {

using Triplet = Eigen::Triplet<double>;

/// Strong connections |a_ij| >= theta max_{k != i} |a_ik|, symmetrized. The
/// row-relative measure keeps the wide node stencils of the reduced system
/// connected, where a diagonal-relative one drops most of their entries.
std::vector<std::vector<int>> strong_graph(const SparseMatrix& a, double theta)
{
    const int n = static_cast<int>(a.rows());
    std::vector<std::vector<int>> s(n);
    for (int i = 0; i < n; ++i) {
        double row_max = 0.0;
        for (SparseMatrix::InnerIterator it(a, i); it; ++it)
            if (it.col() != i) row_max = std::max(row_max, std::abs(it.value()));
        if (row_max == 0.0) continue;
        for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
            const int j = static_cast<int>(it.col());
            if (j != i && std::abs(it.value()) >= theta * row_max) {
                s[i].push_back(j);
                s[j].push_back(i);
            }
        }
    }
    for (auto& r : s) {
        std::sort(r.begin(), r.end());
        r.erase(std::unique(r.begin(), r.end()), r.end());
    }
    return s;
}

/// Three-pass greedy aggregation; returns the aggregate of every row (-1 for
/// isolated rows, which only the smoother sees) and the count.
int aggregate(const std::vector<std::vector<int>>& g, std::vector<int>& agg)
{
    const int n = static_cast<int>(g.size());
    agg.assign(n, -1);
    int count = 0;
    // Pass 1: roots whose whole strong neighbourhood is free.
    for (int i = 0; i < n; ++i) {
        if (agg[i] >= 0 || g[i].empty()) continue;
        bool free = true;
        for (int j : g[i])
            if (agg[j] >= 0) {
                free = false;
                break;
            }
        if (!free) continue;
        agg[i] = count;
        for (int j : g[i])
            agg[j] = count;
        ++count;
    }
    // Pass 2: attach leftovers to a neighbouring aggregate from pass 1.
    std::vector<int> pass1 = agg;
    for (int i = 0; i < n; ++i) {
        if (agg[i] >= 0) continue;
        for (int j : g[i])
            if (pass1[j] >= 0) {
                agg[i] = pass1[j];
                break;
            }
    }
    // Pass 3: whatever is left forms aggregates with its free neighbours.
    for (int i = 0; i < n; ++i) {
        if (agg[i] >= 0 || g[i].empty()) continue;
        agg[i] = count;
        for (int j : g[i])
            if (agg[j] < 0) agg[j] = count;
        ++count;
    }
    return count;
}

Eigen::VectorXd diagonal(const SparseMatrix& a)
{
    Eigen::VectorXd d = a.diagonal();
    return d;
}

Eigen::VectorXd safe_inverse(const Eigen::VectorXd& d)
{
    Eigen::VectorXd r(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i)
        r[i] = d[i] != 0.0 ? 1.0 / d[i] : 1.0;
    return r;
}

} // namespace

Amg::Amg(const SparseMatrix& a, const AmgOptions& opt) : opt_(opt)
{
    SparseMatrix cur = a;
    cur.makeCompressed();
    while (true) {
        Level lv;
        lv.a = cur;
        const Eigen::VectorXd d = diagonal(cur);
        lv.dinv = safe_inverse(d);
        const int n = static_cast<int>(cur.rows());
        if (n <= opt_.coarse_size || static_cast<int>(levels_.size()) + 1 >= opt_.max_levels) {
            levels_.push_back(std::move(lv));
            break;
        }
        std::vector<int> agg;
        const int nagg = aggregate(strong_graph(cur, opt_.strength_threshold), agg);
        if (nagg == 0 || nagg >= n) {
            // No coarsening possible: fall back to smoothing only on this level.
            degraded_ = true;
            levels_.push_back(std::move(lv));
            break;
        }
        std::vector<int> size(nagg, 0);
        for (int i = 0; i < n; ++i)
            if (agg[i] >= 0) ++size[agg[i]];
        std::vector<Triplet> tp;
        tp.reserve(n);
        for (int i = 0; i < n; ++i)
            if (agg[i] >= 0) tp.emplace_back(i, agg[i], 1.0 / std::sqrt(static_cast<double>(size[agg[i]])));
        SparseMatrix p0(n, nagg);
        p0.setFromTriplets(tp.begin(), tp.end());
        SparseMatrix da = lv.dinv.asDiagonal() * cur;
        const SparseMatrix smooth = da * p0;
        SparseMatrix p = p0 - opt_.prolongator_weight * smooth;
        p.prune(0.0);
        SparseMatrix r = p.transpose();
        SparseMatrix coarse = r * cur * p;
        coarse.makeCompressed();
        lv.p = std::move(p);
        lv.r = std::move(r);
        levels_.push_back(std::move(lv));
        cur = std::move(coarse);
    }
    const Level& last = levels_.back();
    if (!degraded_ || last.a.rows() <= opt_.coarse_size) {
        if (last.a.rows() <= 4 * opt_.coarse_size) {
            coarse_.compute(Eigen::MatrixXd(last.a));
            degraded_ = false;
        } else {
            degraded_ = true;
        }
    }
}

void Amg::vcycle(const Eigen::VectorXd& b, Eigen::VectorXd& x) const
{
    x.setZero(b.size());
    cycle(0, b, x);
}

void Amg::cycle(int l, const Eigen::VectorXd& b, Eigen::VectorXd& x) const
{
    const Level& lv = levels_[l];
    const double w = opt_.jacobi_weight;
    if (l + 1 == num_levels()) {
        if (!degraded_) {
            x = coarse_.solve(b);
        } else {
            for (int s = 0; s < opt_.pre_sweeps + opt_.post_sweeps; ++s)
                x += w * lv.dinv.cwiseProduct(b - lv.a * x);
        }
        return;
    }
    for (int s = 0; s < opt_.pre_sweeps; ++s)
        x += w * lv.dinv.cwiseProduct(b - lv.a * x);
    const Eigen::VectorXd rc = lv.r * (b - lv.a * x);
    Eigen::VectorXd ec = Eigen::VectorXd::Zero(rc.size());
    cycle(l + 1, rc, ec);
    x += lv.p * ec;
    for (int s = 0; s < opt_.post_sweeps; ++s)
        x += w * lv.dinv.cwiseProduct(b - lv.a * x);
}

} // namespace vagsim
