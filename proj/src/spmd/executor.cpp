#include "vagsim/spmd/spmd.hpp"

#include <exception>
#include <thread>

namespace vagsim {

void Executor::run(const std::function<void(int)>& body) const
{
    std::vector<std::exception_ptr> errors(num_ranks_);
    auto guarded = [&](int p) {
        try {
            body(p);
        } catch (...) {
            errors[p] = std::current_exception();
        }
    };
    if (threaded_ && num_ranks_ > 1) {
        std::vector<std::thread> threads;
        threads.reserve(num_ranks_);
        for (int p = 0; p < num_ranks_; ++p)
            threads.emplace_back(guarded, p);
        for (auto& t : threads)
            t.join();
    } else {
        for (int p = 0; p < num_ranks_; ++p)
            guarded(p);
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace vagsim
