#include "nse/tsne.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "nse/errors.hpp"
#include "nse/rng.hpp"

namespace nse {

namespace {

constexpr double kTiny = 1e-12;

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& x) {
  const Eigen::VectorXd sq = x.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = sq.replicate(1, x.rows()) + sq.transpose().replicate(x.rows(), 1) -
                       2.0 * (x * x.transpose());
  return d2.cwiseMax(0.0);
}

// Conditional affinities with per-point precision matched to the target
// log-perplexity by binary search.
Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& d2, double perplexity) {
  const auto n = d2.rows();
  const double target_entropy = std::log(perplexity);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);

  for (Eigen::Index i = 0; i < n; ++i) {
    double beta = 1.0;
    double beta_lo = -std::numeric_limits<double>::infinity();
    double beta_hi = std::numeric_limits<double>::infinity();

    Eigen::VectorXd row(n);
    for (int iter = 0; iter < 50; ++iter) {
      double sum = 0.0;
      double weighted_d2 = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) {
          row(j) = 0.0;
          continue;
        }
        const double w = std::exp(-beta * d2(i, j));
        row(j) = w;
        sum += w;
        weighted_d2 += w * d2(i, j);
      }
      // Shannon entropy of the conditional distribution, in nats.
      const double entropy = sum > 0.0 ? std::log(sum) + beta * weighted_d2 / sum : 0.0;
      const double diff = entropy - target_entropy;
      if (std::abs(diff) < 1e-5) break;
      if (diff > 0.0) {
        beta_lo = beta;
        beta = std::isfinite(beta_hi) ? 0.5 * (beta + beta_hi) : beta * 2.0;
      } else {
        beta_hi = beta;
        beta = std::isfinite(beta_lo) ? 0.5 * (beta + beta_lo) : beta * 0.5;
      }
    }
    const double sum = row.sum();
    if (sum > 0.0) p.row(i) = row.transpose() / sum;
  }
  return p;
}

double kl_divergence(const Eigen::MatrixXd& p, const Eigen::MatrixXd& w, double z) {
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    for (Eigen::Index j = 0; j < p.cols(); ++j) {
      if (i == j || p(i, j) <= 0.0) continue;
      const double q = std::max(w(i, j) / z, kTiny);
      kl += p(i, j) * std::log(p(i, j) / q);
    }
  }
  return kl;
}

// Student-t kernel weights w_ij = 1/(1+d2) with zero diagonal, and their sum.
double student_weights(const Eigen::MatrixXd& y, Eigen::MatrixXd& w) {
  w = (1.0 + squared_distances(y).array()).inverse();
  w.diagonal().setZero();
  return w.sum();
}

}  // namespace

namespace {

void check_tsne_inputs(const Eigen::MatrixXd& features, const TsneOptions& opts) {
  const auto n = features.rows();
  if (n < 4) throw InvalidParameterError("tsne: need at least 4 points, got " + std::to_string(n));
  if (!(opts.perplexity >= 1.0))
    throw InvalidParameterError("tsne: perplexity must be >= 1");
  if (opts.perplexity >= (static_cast<double>(n) - 1.0) / 3.0)
    throw InvalidParameterError("tsne: perplexity must be below (n - 1) / 3 = " +
                                std::to_string((static_cast<double>(n) - 1.0) / 3.0));
  if (opts.iterations < 1) throw InvalidParameterError("tsne: iterations must be >= 1");
}

}  // namespace

Eigen::MatrixXd tsne_affinities(const Eigen::MatrixXd& features, double perplexity) {
  TsneOptions opts;
  opts.perplexity = perplexity;
  check_tsne_inputs(features, opts);
  const Eigen::MatrixXd d2 = squared_distances(features);
  if (d2.maxCoeff() <= 0.0) throw DegenerateInputError("tsne: all points are identical");
  Eigen::MatrixXd p = conditional_affinities(d2, perplexity);
  return (p + p.transpose()) / (2.0 * static_cast<double>(features.rows()));
}

TsneResult tsne(const Eigen::MatrixXd& features, const TsneOptions& opts) {
  const auto n = features.rows();
  check_tsne_inputs(features, opts);

  // Symmetrized affinities; sum over all pairs is exactly 1.
  const Eigen::MatrixXd p = tsne_affinities(features, opts.perplexity);

  TsneResult result;
  result.options = opts;

  Eigen::MatrixXd y(n, 2);
  {
    Rng rng(mix64(opts.seed, 0x75f3));
    for (Eigen::Index i = 0; i < n; ++i)
      for (int c = 0; c < 2; ++c) y(i, c) = 1e-4 * rng.normal();
  }

  Eigen::MatrixXd w(n, n);
  double z = student_weights(y, w);
  result.kl_initial = kl_divergence(p, w, std::max(z, kTiny));

  Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(n, 2);
  for (int iter = 0; iter < opts.iterations; ++iter) {
    const double exaggeration = iter < opts.exaggeration_iterations ? opts.early_exaggeration : 1.0;
    const double momentum =
        iter < opts.momentum_switch_iteration ? opts.momentum_initial : opts.momentum_final;

    z = std::max(student_weights(y, w), kTiny);
    // grad_i = 4 * sum_j (e*p_ij - q_ij) w_ij (y_i - y_j)
    Eigen::MatrixXd c = ((exaggeration * p - w / z).array() * w.array()).matrix();
    c.diagonal().setZero();
    const Eigen::VectorXd row_sums = c.rowwise().sum();
    const Eigen::MatrixXd grad = 4.0 * (row_sums.asDiagonal() * y - c * y);

    velocity = momentum * velocity - opts.learning_rate * grad;
    y += velocity;
    y.rowwise() -= y.colwise().mean();
  }

  z = std::max(student_weights(y, w), kTiny);
  result.kl_final = kl_divergence(p, w, z);
  result.points = y;
  if (!result.points.allFinite())
    throw ConvergenceError("tsne: optimization diverged to non-finite coordinates");
  return result;
}

TsneResult tsne(const Eigen::MatrixXd& features, double perplexity, int iterations,
                uint64_t seed) {
  TsneOptions opts;
  opts.perplexity = perplexity;
  opts.iterations = iterations;
  opts.seed = seed;
  return tsne(features, opts);
}

void write_tsne_csv(const std::string& path, const TsneResult& result,
                    const std::vector<EmbeddingMatrix>& source) {
  if (static_cast<Eigen::Index>(source.size()) != result.points.rows())
    throw ShapeError("write_tsne_csv: point count does not match source embeddings");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "epoch_id,label,domain,x,y\n";
  char buf[80];
  for (std::size_t i = 0; i < source.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g", result.points(r, 0), result.points(r, 1));
    out << source[i].epoch_id << ',' << source[i].label << ',' << domain_name(source[i].domain)
        << ',' << buf << '\n';
  }
  if (!out) throw IoError("short write to '" + path + "'");
}

}  // namespace nse
