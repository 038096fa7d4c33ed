#include "capmeas/parallel.hpp"

#include <atomic>

namespace capmeas {
namespace {
std::atomic<unsigned> g_threads{1};
}

void set_thread_count(unsigned threads) noexcept { g_threads.store(threads == 0 ? 1 : threads); }

unsigned thread_count() noexcept { return g_threads.load(); }

}  // namespace capmeas
