#pragma once

#include <cstddef>
#include <functional>

namespace cea {

// Run fn(i) for i in [0, n). With workers <= 1 execution is strictly serial
// and in order. Tasks must be independent (each i writes only its own slot);
// under that contract parallel and serial execution produce identical
// results. The first exception thrown by any task is rethrown on the caller.
void parallel_for(size_t n, size_t workers, const std::function<void(size_t)>& fn);

size_t hardware_workers();

}  // namespace cea
