#include "gridsurv/version.hpp"

#include <Eigen/Core>
#include <ceres/version.h>
#include <fftw3.h>
#include <tbb/version.h>

namespace gridsurv {

std::string version() { return GRIDSURV_VERSION; }

std::vector<std::pair<std::string, std::string>> component_versions() {
  return {
      {"gridsurv", version()},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"fftw", fftw_version},
      {"ceres", CERES_VERSION_STRING},
      {"tbb", TBB_VERSION_STRING},
      {"compiler", __VERSION__},
  };
}

}  // namespace gridsurv
