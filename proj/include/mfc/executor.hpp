#pragma once

#include <memory>

#include <tbb/global_control.h>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

namespace mfc {

/// Runs per-agent work on a fixed number of workers. With one worker the loop runs inline.
/// More workers than cores is allowed; the requested count is honoured.
class Executor {
public:
    explicit Executor(int workers = 1)
        : workers_(workers < 1 ? 1 : workers),
          limit_(workers_ > 1 ? std::make_unique<tbb::global_control>(
                                    tbb::global_control::max_allowed_parallelism,
                                    static_cast<std::size_t>(workers_))
                              : nullptr),
          arena_(workers_ > 1 ? std::make_unique<tbb::task_arena>(workers_) : nullptr) {}

    int workers() const { return workers_; }

    /// Calls fn(i) for i in [0, n). Callers must not depend on the visiting order.
    template <typename Fn>
    void for_each(int n, Fn&& fn) const {
        if (!arena_ || n <= 1) {
            for (int i = 0; i < n; ++i) {
                fn(i);
            }
            return;
        }
        arena_->execute([&] {
            tbb::parallel_for(0, n, [&](int i) { fn(i); });
        });
    }

private:
    int workers_;
    std::unique_ptr<tbb::global_control> limit_;
    std::unique_ptr<tbb::task_arena> arena_;
};

} // namespace mfc
