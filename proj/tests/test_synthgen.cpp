#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "nse/errors.hpp"
#include "nse/rng.hpp"
#include "nse/parallel.hpp"
#include "nse/spatial.hpp"
#include "nse/synthgen.hpp"
#include "nse/welch.hpp"
#include "oracles.hpp"

using namespace nse;

namespace {

SynthSpec small_spec() {
  SynthSpec spec;
  spec.n_channels = 8;
  spec.n_classes = 3;
  spec.trials_per_class = 30;
  spec.epoch_seconds = 1.0;
  spec.fs_hz = 500.0;
  spec.seed = 77;
  return spec;
}

}  // namespace

TEST_CASE("generate: shapes, labels and domain tags") {
  auto spec = small_spec();
  const SynthData data = generate(spec);
  CHECK(data.imagined.n_epochs() == 90);
  CHECK(data.spoken.n_epochs() == 90);
  CHECK(data.imagined.n_channels() == 8);
  CHECK(data.imagined.n_samples_per_epoch() == 500);
  CHECK(data.imagined.labels.front() == 0);
  CHECK(data.imagined.labels.back() == 2);
  CHECK(data.imagined.domains.front() == Domain::imagined);
  CHECK(data.spoken.domains.front() == Domain::spoken);
  CHECK(data.truth.directions.rows() == 3);
  CHECK(data.truth.mixing_perturbation.rows() == 8);
}

TEST_CASE("generate: bitwise deterministic, independent of thread count") {
  auto spec = small_spec();
  spec.trials_per_class = 5;

  thread_cap() = 1;
  const SynthData a = generate(spec);
  thread_cap() = 2;
  const SynthData b = generate(spec);
  thread_cap() = 0;

  REQUIRE(a.imagined.n_epochs() == b.imagined.n_epochs());
  for (std::size_t k = 0; k < a.imagined.n_epochs(); ++k) {
    CHECK(a.imagined.epochs[k] == b.imagined.epochs[k]);
    CHECK(a.spoken.epochs[k] == b.spoken.epochs[k]);
  }
  CHECK(a.truth.mixing_perturbation == b.truth.mixing_perturbation);
}

TEST_CASE("planted directions: unit norm, pairwise separation") {
  auto spec = small_spec();
  const SynthData data = generate(spec);
  for (int c = 0; c < 3; ++c) {
    CHECK(data.truth.directions.row(c).norm() == doctest::Approx(1.0).epsilon(1e-9));
    for (int p = 0; p < c; ++p)
      CHECK(std::abs(data.truth.directions.row(c).dot(data.truth.directions.row(p))) < 0.5);
  }
}

TEST_CASE("pink noise: fitted log-log PSD slope tracks the exponent") {
  for (double alpha : {0.5, 1.0, 1.5}) {
    // Average several PSDs for a stable fit.
    std::vector<double> mean_density;
    std::vector<double> freqs;
    const int reps = 8;
    for (int r = 0; r < reps; ++r) {
      const auto x = pink_noise(8192, alpha, mix64(123, static_cast<uint64_t>(r)));
      const Psd psd = welch_psd(x, 1000.0, 1024);
      if (mean_density.empty()) {
        mean_density.assign(psd.density.size(), 0.0);
        freqs = psd.freq_hz;
      }
      for (std::size_t i = 0; i < psd.density.size(); ++i) mean_density[i] += psd.density[i];
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < freqs.size(); ++i) {
      if (freqs[i] < 4.0 || freqs[i] > 300.0) continue;
      const double lx = std::log10(freqs[i]);
      const double ly = std::log10(mean_density[i] / reps);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++n;
    }
    const double slope = (static_cast<double>(n) * sxy - sx * sy) /
                         (static_cast<double>(n) * sxx - sx * sx);
    CHECK(slope == doctest::Approx(-alpha).scale(1.0).epsilon(0.3 / std::max(alpha, 1.0)));
  }
}

TEST_CASE("boost = 8, eps = 0: per-class top CSP filter recovers the planted direction") {
  auto spec = small_spec();
  spec.boosts = {8.0, 8.0, 8.0};
  spec.shift_epsilon = 0.0;
  spec.shift_noise_sigma = 0.0;
  const SynthData data = generate(spec);

  const ClassCovariances covs = class_covariances(data.imagined);
  for (std::size_t ci = 0; ci < covs.n_classes(); ++ci) {
    Eigen::MatrixXd rest = Eigen::MatrixXd::Zero(8, 8);
    for (std::size_t other = 0; other < covs.n_classes(); ++other)
      if (other != ci) rest += covs.covariances[other];
    rest /= static_cast<double>(covs.n_classes() - 1);

    // Brute-force generalized eigensolve, then compare in pattern space.
    const Eigen::VectorXd w = oracle::top_generalized_eigvec(covs.covariances[ci], rest);
    const Eigen::VectorXd pattern = (covs.covariances[ci] + rest) * w;
    const double cos = std::abs(pattern.normalized().dot(data.truth.directions.row(ci).transpose()));
    CHECK(cos > 0.95);
  }
}

TEST_CASE("boost = 1 degenerate: CSP eigenvalues sit near 1/2") {
  auto spec = small_spec();
  spec.boosts = {1.0, 1.0, 1.0};
  const SynthData data = generate(spec);
  const auto bank = csp_multiclass(class_covariances(data.imagined), 2);
  for (double lambda : bank.eigenvalues) CHECK(lambda == doctest::Approx(0.5).scale(1.0).epsilon(0.05 / 0.5));
}

TEST_CASE("class separation: top per-class eigenvalue increases with boost") {
  double previous = 0.0;
  for (double boost : {2.0, 4.0, 8.0}) {
    auto spec = small_spec();
    spec.boosts = {boost, boost, boost};
    const SynthData data = generate(spec);
    const auto bank = csp_multiclass(class_covariances(data.imagined), 2);
    double top = 0.0;
    for (double lambda : bank.eigenvalues) top = std::max(top, lambda);
    CHECK(top > previous);
    previous = top;
  }
}

TEST_CASE("invalid specs are rejected") {
  auto spec = small_spec();
  spec.boosts = {0.5, 1.0, 1.0};
  CHECK_THROWS_AS(generate(spec), ValidationError);

  spec = small_spec();
  spec.n_channels = 0;
  CHECK_THROWS_AS(generate(spec), ValidationError);

  spec = small_spec();
  spec.planted_directions = Eigen::MatrixXd::Ones(3, 8);  // not unit, not separated
  CHECK_THROWS_AS(generate(spec), ValidationError);
}

TEST_CASE("artifact mixture: rank, blink copy, determinism") {
  const ArtifactMixture mix = generate_artifact_mixture(99, 8, 4);
  CHECK(mix.mixed.n_channels() == 8);
  CHECK(mix.sources.rows() == 4);
  CHECK(mix.blink_source_index == 3);

  // Mixing of 4 sources: sample covariance of the 8 channels has rank 4.
  const Eigen::MatrixXd cov =
      mix.mixed.samples * mix.mixed.samples.transpose() / static_cast<double>(mix.mixed.n_samples());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  int significant = 0;
  for (Eigen::Index i = 0; i < 8; ++i)
    if (es.eigenvalues()(i) > 1e-9 * es.eigenvalues().maxCoeff()) ++significant;
  CHECK(significant == 4);

  // The EOG reference is the blink source, verbatim.
  CHECK(mix.references.samples.row(0) == mix.sources.row(3));

  const ArtifactMixture again = generate_artifact_mixture(99, 8, 4);
  CHECK(again.mixed.samples == mix.mixed.samples);

  CHECK_THROWS_AS(generate_artifact_mixture(1, 4, 5), ValidationError);
}

TEST_CASE("synth truth JSON round-trip") {
  auto spec = small_spec();
  const SynthData data = generate(spec);
  const auto dir = std::filesystem::temp_directory_path() / "nse_test_synth";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "truth.json").string();
  write_synth_truth(path, data.truth);
  const SynthTruth back = read_synth_truth(path);
  CHECK(back.seed == data.truth.seed);
  CHECK(back.directions == data.truth.directions);
  CHECK(back.mixing_perturbation == data.truth.mixing_perturbation);
  CHECK(back.boosts == data.truth.boosts);
}
