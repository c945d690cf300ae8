#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <string>
#include <vector>

// Arguments after a literal "--" are stashed here for tests that need paths
// (the CLI binary, the bundled config directory).
std::vector<std::string> g_test_args;

int main(int argc, char** argv) {
  int n = argc;
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--") {
      n = i;
      for (int j = i + 1; j < argc; ++j) g_test_args.emplace_back(argv[j]);
      break;
    }
  }
  doctest::Context ctx;
  ctx.applyCommandLine(n, argv);
  return ctx.run();
}
