#pragma once

#include <string>
#include <utility>
#include <vector>

namespace gridsurv {

std::string version();

// (component, version) for the library and every numerical dependency.
std::vector<std::pair<std::string, std::string>> component_versions();

}  // namespace gridsurv
