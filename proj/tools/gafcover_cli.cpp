// Placeholder driver; replaced by the full experiment runner.
#include <cstdio>

#include "gafcover/version.hpp"

int main() {
  std::printf("gafcover %s\n", gafcover::kVersion);
  return 0;
}
