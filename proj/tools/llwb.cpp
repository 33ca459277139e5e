#include <cstdio>

int main() {
  std::fputs("llwb: command dispatch not wired yet\n", stderr);
  return 3;
}
