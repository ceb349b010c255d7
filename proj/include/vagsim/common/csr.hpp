#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vagsim {

/// Compressed adjacency list: row i owns items[offsets[i], offsets[i+1]).
struct Adjacency {
    std::vector<int> offsets{0};
    std::vector<int> items;

    int size() const noexcept { return static_cast<int>(offsets.size()) - 1; }
    std::span<const int> operator[](int i) const noexcept
    {
        return {items.data() + offsets[i], static_cast<std::size_t>(offsets[i + 1] - offsets[i])};
    }
    int degree(int i) const noexcept { return offsets[i + 1] - offsets[i]; }

    template <class Range>
    void push_row(const Range& r)
    {
        items.insert(items.end(), r.begin(), r.end());
        offsets.push_back(static_cast<int>(items.size()));
    }

    static Adjacency from_lists(const std::vector<std::vector<int>>& lists)
    {
        Adjacency a;
        a.offsets.reserve(lists.size() + 1);
        for (const auto& l : lists)
            a.push_row(l);
        return a;
    }
};

} // namespace vagsim
