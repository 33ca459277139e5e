#pragma once

#include <functional>

namespace wb::util {

// Runs `body` on a dedicated thread with a 256 MiB stack and waits for it.
// The proof engines keep every completed branch premise on the call stack
// while its siblings run, so their depth is bounded by nodes-per-proof
// rather than recursion depth; the default thread stack is not enough.
// Exceptions propagate to the caller.
void runWithBigStack(const std::function<void()>& body);

}  // namespace wb::util
