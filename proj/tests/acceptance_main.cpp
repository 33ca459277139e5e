// Acceptance suite: one line of output per criterion, pass or fail, and a
// nonzero exit code when anything fails. Criteria are filled in as the
// corresponding subsystems land; an unimplemented criterion fails loudly.

#include <cstdio>
#include <functional>
#include <string>
#include <vector>

namespace {

struct Criterion {
  std::string name;
  std::function<bool()> run;
};

std::vector<Criterion>& registry() {
  static std::vector<Criterion> r;
  return r;
}

}  // namespace

int main() {
  if (registry().empty()) {
    std::puts("acceptance: no criteria registered");
    return 1;
  }
  int failures = 0;
  for (auto& c : registry()) {
    bool ok = false;
    try {
      ok = c.run();
    } catch (const std::exception& e) {
      std::printf("FAIL %s (exception: %s)\n", c.name.c_str(), e.what());
      ++failures;
      continue;
    }
    std::printf("%s %s\n", ok ? "PASS" : "FAIL", c.name.c_str());
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
