// Runs the ten acceptance checks and prints one PASS/FAIL line each.

#include "folhe/reproduce.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

int main(int argc, char** argv) {
  folhe::ReproduceOptions opt;
  if (const char* s = std::getenv("FOLHE_SEED")) opt.seed = std::strtoull(s, nullptr, 10);
  folhe::Reproducer rep(opt);
  int failed = 0;
  auto one = [&](int id) {
    auto r = rep.run(id);
    failed += !r.pass;
    std::printf("criterion %2d %s: %s [%s] (%.1f s)\n", id, r.pass ? "PASS" : "FAIL", r.title.c_str(),
                r.summary.c_str(), r.seconds);
    std::fflush(stdout);
  };
  if (argc > 1) {
    for (int i = 1; i < argc; ++i) one(std::atoi(argv[i]));
  } else {
    for (int id = 1; id <= folhe::Reproducer::kCount; ++id) one(id);
  }
  std::printf("%s: %d failed\n", failed ? "FAIL" : "PASS", failed);
  return failed ? 1 : 0;
}
