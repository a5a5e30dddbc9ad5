#include <cstdio>

int main() {
  std::puts("stable-op-lab: cli under construction");
  return 0;
}
