#include "wb/util/bigstack.hpp"

#include <pthread.h>

#include <exception>

namespace wb::util {

namespace {

struct Call {
  const std::function<void()>* body;
  std::exception_ptr error;
};

void* trampoline(void* arg) {
  auto* call = static_cast<Call*>(arg);
  try {
    (*call->body)();
  } catch (...) {
    call->error = std::current_exception();
  }
  return nullptr;
}

}  // namespace

void runWithBigStack(const std::function<void()>& body) {
  pthread_attr_t attr;
  pthread_attr_init(&attr);
  pthread_attr_setstacksize(&attr, 256u << 20);
  Call call{&body, nullptr};
  pthread_t tid;
  int rc = pthread_create(&tid, &attr, trampoline, &call);
  pthread_attr_destroy(&attr);
  if (rc != 0) {
    body();  // fall back to the caller's stack
    return;
  }
  pthread_join(tid, nullptr);
  if (call.error) std::rethrow_exception(call.error);
}

}  // namespace wb::util
