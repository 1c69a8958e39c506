#pragma once

namespace qimetro {

// Exit codes: 0 ok, 1 usage/precondition, 2 numerical convergence, 3 I/O.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;
inline constexpr int kExitIo = 3;

int cli_main(int argc, char** argv);

}  // namespace qimetro
