#include "mvrank/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "mvrank/errors.h"

namespace mvrank {
namespace {

// Gain applied before the sigmoid warp so that features saturate noticeably.
constexpr double kWarpGain = 2.0;

Matrix Gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
  }
  return m;
}

void ScaleColumnsToUnitVariance(Matrix& m) {
  const Matrix centered = m.rowwise() - m.colwise().mean();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const double sd = std::sqrt(centered.col(c).squaredNorm() /
                                static_cast<double>(m.rows()));
    m.col(c) = sd > 1e-12 ? Vector(centered.col(c) / sd)
                          : Vector(Vector::Zero(m.rows()));
  }
}

// Position 1 for the highest score; equal scores share a position.
Vector RankPositions(const Vector& score) {
  const Eigen::Index n = score.size();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return score(a) > score(b);
  });
  Vector ranks(n);
  for (Eigen::Index pos = 0; pos < n; ++pos) {
    const Eigen::Index i = order[pos];
    ranks(i) = (pos > 0 && score(i) == score(order[pos - 1]))
                   ? ranks(order[pos - 1])
                   : static_cast<double>(pos + 1);
  }
  return ranks;
}

}  // namespace

void SynthSpec::Validate() const {
  if (views < 2) throw InputError("synthetic data needs at least two views");
  if (samples < 2) throw InputError("synthetic data needs at least two samples");
  if (latent_dim < 1) throw InputError("latent dimension must be positive");
  if (static_cast<int>(view_dims.size()) != views) {
    throw InputError("view_dims must list one dimension per view");
  }
  for (int d : view_dims) {
    if (d < 1) throw InputError("view dimensions must be positive");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw InputError("noise_sigma must be finite and >= 0");
  }
}

SynthSpec DefaultSynthSpec() { return SynthSpec{}; }

SynthSpec ReadSynthSpec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open synth spec " + path.string());
  SynthSpec s;
  try {
    nlohmann::json j;
    in >> j;
    s.views = j.value("views", s.views);
    s.samples = j.value("samples", s.samples);
    s.view_dims = j.value("view_dims", s.view_dims);
    s.latent_dim = j.value("latent_dim", s.latent_dim);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    const std::string nl = j.value("nonlinearity", std::string("sigmoid"));
    if (nl == "linear") {
      s.nonlinearity = SynthNonlinearity::kLinear;
    } else if (nl == "sigmoid") {
      s.nonlinearity = SynthNonlinearity::kSigmoid;
    } else {
      throw InputError("unknown nonlinearity '" + nl + "'");
    }
    s.seed = j.value("seed", s.seed);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("synth spec " + path.string() + ": " + e.what());
  }
  s.Validate();
  return s;
}

void WriteSynthSpec(const SynthSpec& spec, const std::filesystem::path& path) {
  nlohmann::json j = {
      {"views", spec.views},
      {"samples", spec.samples},
      {"view_dims", spec.view_dims},
      {"latent_dim", spec.latent_dim},
      {"noise_sigma", spec.noise_sigma},
      {"nonlinearity",
       spec.nonlinearity == SynthNonlinearity::kLinear ? "linear" : "sigmoid"},
      {"seed", spec.seed}};
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

std::vector<RankedView> SynthGenerate(const SynthSpec& spec) {
  spec.Validate();
  Rng rng(spec.seed);
  const int n = spec.samples;
  const Matrix latent = Gaussian(n, spec.latent_dim, rng);
  Vector direction = Gaussian(spec.latent_dim, 1, rng).col(0);
  direction.normalize();
  Matrix score = latent * direction;
  ScaleColumnsToUnitVariance(score);

  std::vector<std::string> keys(n);
  for (int i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%04d", i + 1);
    keys[i] = buf;
  }

  std::vector<RankedView> views;
  for (int v = 0; v < spec.views; ++v) {
    const int d = spec.view_dims[v];
    const Matrix mixing =
        Gaussian(spec.latent_dim, d, rng) / std::sqrt(static_cast<double>(spec.latent_dim));
    Matrix clean = latent * mixing;
    if (spec.nonlinearity == SynthNonlinearity::kSigmoid) {
      clean = clean.unaryExpr(
          [](double x) { return 1.0 / (1.0 + std::exp(-kWarpGain * x)); });
    }
    ScaleColumnsToUnitVariance(clean);
    RankedView rv;
    rv.view_id = v + 1;
    rv.keys = keys;
    rv.features = clean + spec.noise_sigma * Gaussian(n, d, rng);
    const Vector noisy_score =
        score.col(0) + spec.noise_sigma * Gaussian(n, 1, rng).col(0);
    rv.ranks = RankPositions(noisy_score);
    views.push_back(std::move(rv));
  }
  return views;
}

}  // namespace mvrank
