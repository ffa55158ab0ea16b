#pragma once

#include <string>
#include <vector>

namespace wavestruct::selftest {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast invariant checks across the modules (a few seconds in total).
std::vector<Check> run_all();

}  // namespace wavestruct::selftest
