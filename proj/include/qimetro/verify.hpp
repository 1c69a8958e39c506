#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qimetro {

struct VerifyCheck {
  std::string name;
  bool passed = false;
  double deviation = 0;  // worst relative deviation observed
  double tolerance = 0;
  std::string detail;
};

/// Cross-oracle suite: closed forms vs SLD vs Bures vs the square-root expansion.
std::vector<VerifyCheck> run_verify_suite(std::uint64_t seed);

}  // namespace qimetro
