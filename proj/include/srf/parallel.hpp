#pragma once

#include <cstddef>
#include <functional>

namespace srf {

// Runs fn(i) for i in [0, n) on up to `threads` workers. The first exception
// thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

}  // namespace srf
