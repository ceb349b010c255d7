#pragma once

#include <algorithm>
#include <vector>

namespace vagsim {

/// Block sparsity pattern in CSR form with sorted column indices per row.
struct BlockPattern {
    int n = 0;
    std::vector<int> row_ptr{0};
    std::vector<int> col;
    std::vector<int> diag; // position of (i, i) in row i, -1 if absent

    int nnz() const noexcept { return static_cast<int>(col.size()); }

    /// Position of (i, j), or -1.
    int find(int i, int j) const noexcept
    {
        auto b = col.begin() + row_ptr[i];
        auto e = col.begin() + row_ptr[i + 1];
        auto it = std::lower_bound(b, e, j);
        return (it != e && *it == j) ? static_cast<int>(it - col.begin()) : -1;
    }

    /// Pattern from unsorted, possibly duplicated column lists.
    static BlockPattern from_rows(std::vector<std::vector<int>> rows)
    {
        BlockPattern p;
        p.n = static_cast<int>(rows.size());
        p.row_ptr.reserve(rows.size() + 1);
        for (auto& r : rows) {
            std::sort(r.begin(), r.end());
            r.erase(std::unique(r.begin(), r.end()), r.end());
            p.col.insert(p.col.end(), r.begin(), r.end());
            p.row_ptr.push_back(static_cast<int>(p.col.size()));
        }
        p.diag.assign(p.n, -1);
        for (int i = 0; i < p.n; ++i)
            p.diag[i] = p.find(i, i);
        return p;
    }
};

} // namespace vagsim
