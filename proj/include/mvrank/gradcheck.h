// Finite-difference checks of every analytic gradient in the library.

#ifndef MVRANK_GRADCHECK_H_
#define MVRANK_GRADCHECK_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mvrank/netcore.h"

namespace mvrank {

// |a - n| / max(|a|, |n|, floor). The suites use a floor of 1e-3 times the
// largest gradient magnitude of each random instance, so entries that are
// numerically zero relative to the rest do not dominate the comparison.
double RelativeError(double analytic, double numeric, double floor);

// Central difference of f at x along coordinate i.
double CentralDifference(const std::function<double(const Vector&)>& f,
                         Vector x, Eigen::Index i, double h);

struct GradCheckSuiteResult {
  std::string name;
  int instances = 0;
  long long entries = 0;  // gradient entries compared
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  double seconds = 0.0;
  bool passed() const { return instances > 0 && max_rel_error <= tolerance; }
};

// Suites, in order:
//   mlp_backprop      network parameter gradients    h 1e-5, tol 1e-5
//   trace_ratio_cca   dJ/dZ, centering Laplacians    h 1e-6, tol 1e-4
//   trace_ratio_mda   dJ/dZ, class Laplacians        h 1e-6, tol 1e-4
//   autoencoder       encoder and decoder parameters h 1e-6, tol 1e-4
//   mvccae, mvmdae    encoders and decoders          h 1e-4, tol 1e-3
//   dmvdr             encoders, heads and fused net  h 1e-4, tol 1e-3
std::vector<std::string> GradCheckSuiteNames();
GradCheckSuiteResult RunGradCheckSuite(const std::string& name, int instances,
                                       std::uint64_t seed);
std::vector<GradCheckSuiteResult> RunAllGradChecks(int instances,
                                                   std::uint64_t seed);

}  // namespace mvrank

#endif  // MVRANK_GRADCHECK_H_
