#pragma once

#include "siw/common.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace siw {

struct SelftestCase {
  std::string name;
  bool pass = false;
  double value = 0.0;  // measured quantity
  double limit = 0.0;  // pass threshold on value
  std::string detail;
};

// Fast in-memory checks: manufactured and hydrostatic Stokes, the linear
// energy identity, the Vandermonde extension and the coercivity bound.
// Nothing touches the filesystem.
std::vector<SelftestCase> run_selftest(Exec exec = Exec::Parallel);
void print_selftest(std::ostream& os, const std::vector<SelftestCase>& cases);
bool all_pass(const std::vector<SelftestCase>& cases);

}  // namespace siw
