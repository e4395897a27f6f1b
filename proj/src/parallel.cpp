#include "mfgce/parallel.hpp"

#include <atomic>

namespace mfgce {

namespace {
std::atomic<unsigned> g_cap{0};
}

void set_thread_cap(unsigned cap) { g_cap.store(cap); }

unsigned thread_cap() {
    const unsigned cap = g_cap.load();
    if (cap != 0) return cap;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace mfgce
