#pragma once

#include <stdexcept>

namespace tusla {

// Exit-code contract of the command-line tool:
//   0 success, 1 unexpected error, 2 config/schema error, 3 data error,
//   4 unexpected blow-up, 5 stage-1 non-convergence (transfer).
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BlowupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct StageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int run_cli(int argc, char** argv);

}  // namespace tusla
