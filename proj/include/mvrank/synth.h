// Seeded synthetic multi-view ranking data.

#ifndef MVRANK_SYNTH_H_
#define MVRANK_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mvrank/pairdata.h"

namespace mvrank {

enum class SynthNonlinearity { kLinear, kSigmoid };

struct SynthSpec {
  int views = 3;
  int samples = 300;
  std::vector<int> view_dims = {10, 12, 8};
  int latent_dim = 5;
  double noise_sigma = 0.3;
  SynthNonlinearity nonlinearity = SynthNonlinearity::kSigmoid;
  std::uint64_t seed = 42;

  void Validate() const;
};

SynthSpec DefaultSynthSpec();
SynthSpec ReadSynthSpec(const std::filesystem::path& path);
void WriteSynthSpec(const SynthSpec& spec, const std::filesystem::path& path);

// Latent factors u ~ N(0, I) drive both a latent score (a fixed random
// direction of u, scaled to unit variance) and every view. View v is a
// random linear map of u, optionally passed through a sigmoid, with each
// column scaled to unit variance and Gaussian noise of std `noise_sigma`
// added. Each view ranks the samples by the latent score plus its own
// N(0, noise_sigma^2) perturbation (rank 1 = highest).
std::vector<RankedView> SynthGenerate(const SynthSpec& spec);

}  // namespace mvrank

#endif  // MVRANK_SYNTH_H_
