#include "bsam/kernels.hpp"

#include <atomic>

namespace bsam::kernels {

namespace {
std::atomic<std::size_t> g_threshold{1u << 16};
}

std::size_t parallel_threshold() { return g_threshold.load(std::memory_order_relaxed); }

void set_parallel_threshold(std::size_t work) { g_threshold.store(work, std::memory_order_relaxed); }

}  // namespace bsam::kernels
