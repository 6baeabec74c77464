#pragma once

#include <atomic>
#include <cstdint>
#include <memory>

namespace dgp {

// Forward-pass counter shared by copies of a network.
class EvalCounter {
public:
    EvalCounter() : count_(std::make_shared<std::atomic<std::uint64_t>>(0)) {}
    void increment(std::uint64_t n = 1) const { count_->fetch_add(n, std::memory_order_relaxed); }
    std::uint64_t value() const { return count_->load(std::memory_order_relaxed); }

private:
    std::shared_ptr<std::atomic<std::uint64_t>> count_;
};

}  // namespace dgp
