#include "nse/ica.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "nse/errors.hpp"
#include "nse/log.hpp"
#include "nse/rng.hpp"

namespace nse {

namespace {

Eigen::MatrixXd concat_epochs(const EpochSet& set) {
  set.validate();
  if (set.epochs.empty()) throw InsufficientDataError("fit_ica: empty epoch set");
  const auto n_ch = set.n_channels();
  const auto len = set.n_samples_per_epoch();
  Eigen::MatrixXd all(n_ch, static_cast<Eigen::Index>(set.n_epochs()) * len);
  for (std::size_t k = 0; k < set.n_epochs(); ++k)
    all.middleCols(static_cast<Eigen::Index>(k) * len, len) = set.epochs[k];
  return all;
}

// Inverse square root of a symmetric positive definite matrix.
Eigen::MatrixXd sym_inv_sqrt(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success)
    throw DecompositionError("fit_ica: eigendecomposition failed during decorrelation");
  const auto& vals = es.eigenvalues();
  if (vals.minCoeff() <= 0.0)
    throw DecompositionError("fit_ica: non-positive matrix in symmetric decorrelation");
  Eigen::VectorXd inv_sqrt = vals.array().rsqrt();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
}

double pearson(const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
  const double n = static_cast<double>(a.size());
  const double ma = a.mean();
  const double mb = b.mean();
  const Eigen::RowVectorXd da = a.array() - ma;
  const Eigen::RowVectorXd db = b.array() - mb;
  const double va = da.squaredNorm() / n;
  const double vb = db.squaredNorm() / n;
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return (da.dot(db) / n) / std::sqrt(va * vb);
}

}  // namespace

Eigen::MatrixXd IcaModel::activations(const Eigen::MatrixXd& samples) const {
  return unmixing * (whitening * (samples.colwise() - channel_means));
}

IcaModel fit_ica(const Eigen::MatrixXd& samples, int k, uint64_t seed, IcaOptions opts) {
  const auto n_ch = samples.rows();
  const auto n_t = samples.cols();
  if (k < 1 || k > n_ch)
    throw InvalidParameterError("fit_ica: k must be in [1, n_channels], got " + std::to_string(k));
  if (n_t < 10 * n_ch)
    throw InsufficientDataError("fit_ica: need at least 10 x n_channels samples, got " +
                                std::to_string(n_t) + " for " + std::to_string(n_ch) +
                                " channels");

  IcaModel model;
  model.channel_means = samples.rowwise().mean();
  Eigen::MatrixXd centered = samples.colwise() - model.channel_means;

  const Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(n_t);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success)
    throw DecompositionError("fit_ica: covariance eigendecomposition failed");
  const double trace = es.eigenvalues().sum();
  if (!(trace > 0.0)) throw RankError("fit_ica: covariance has zero trace (constant data)");

  // Eigenvalues ascending from Eigen; keep the largest, drop near-zero ones.
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = n_ch - 1; i >= 0; --i) {
    if (es.eigenvalues()(i) >= 1e-10 * trace) kept.push_back(i);
  }
  if (kept.empty()) throw RankError("fit_ica: covariance is rank deficient");
  if (static_cast<int>(kept.size()) < k) {
    log_warn("fit_ica: dropped " + std::to_string(n_ch - static_cast<Eigen::Index>(kept.size())) +
             " near-zero covariance eigenvalues; k reduced from " + std::to_string(k) + " to " +
             std::to_string(kept.size()));
    k = static_cast<int>(kept.size());
  }

  model.k = k;
  model.whitening.resize(k, n_ch);
  for (int i = 0; i < k; ++i) {
    const Eigen::Index src = kept[static_cast<std::size_t>(i)];
    model.whitening.row(i) =
        es.eigenvectors().col(src).transpose() / std::sqrt(es.eigenvalues()(src));
  }

  const Eigen::MatrixXd z = model.whitening * centered;

  // Symmetric FastICA, g(u) = tanh(u).
  Eigen::MatrixXd w(k, k);
  {
    Rng rng(mix64(seed, 0x1ca));
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) w(i, j) = rng.normal();
    w = sym_inv_sqrt(w * w.transpose()) * w;
  }

  double delta = 0.0;
  bool converged = false;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    const Eigen::MatrixXd proj = w * z;                      // k x T
    const Eigen::MatrixXd g = proj.array().tanh();           // g(u)
    const Eigen::VectorXd gprime_mean =
        (1.0 - g.array().square()).rowwise().mean().matrix();  // E[g'(u)]
    Eigen::MatrixXd w_new =
        g * z.transpose() / static_cast<double>(n_t) - gprime_mean.asDiagonal() * w;
    w_new = sym_inv_sqrt(w_new * w_new.transpose()) * w_new;

    delta = 0.0;
    for (int i = 0; i < k; ++i)
      delta = std::max(delta, std::abs(1.0 - std::abs(w_new.row(i).dot(w.row(i)))));
    w = std::move(w_new);
    if (delta < opts.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw ConvergenceError("fit_ica: no convergence after " +
                           std::to_string(opts.max_iterations) +
                           " iterations (last delta " + std::to_string(delta) + ")");

  // Dewhitening: pseudo-inverse of (unmixing * whitening).
  Eigen::MatrixXd dewhiten(n_ch, k);
  for (int i = 0; i < k; ++i) {
    const Eigen::Index src = kept[static_cast<std::size_t>(i)];
    dewhiten.col(i) = es.eigenvectors().col(src) * std::sqrt(es.eigenvalues()(src));
  }
  Eigen::MatrixXd mixing = dewhiten * w.transpose();  // n_ch x k

  // Order components by descending explained variance (mixing column norms).
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> var(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) var[static_cast<std::size_t>(i)] = mixing.col(i).squaredNorm();
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return var[static_cast<std::size_t>(a)] > var[static_cast<std::size_t>(b)];
  });

  model.unmixing.resize(k, k);
  model.mixing_pseudo_inverse.resize(n_ch, k);
  for (int i = 0; i < k; ++i) {
    model.unmixing.row(i) = w.row(order[static_cast<std::size_t>(i)]);
    model.mixing_pseudo_inverse.col(i) = mixing.col(order[static_cast<std::size_t>(i)]);
  }
  return model;
}

IcaModel fit_ica(const Recording& rec, int k, uint64_t seed, IcaOptions opts) {
  rec.validate();
  return fit_ica(rec.samples, k, seed, opts);
}

IcaModel fit_ica(const EpochSet& epochs, int k, uint64_t seed, IcaOptions opts) {
  return fit_ica(concat_epochs(epochs), k, seed, opts);
}

Recording reject_components(const IcaModel& model, const Recording& data,
                            const Recording& references, double threshold,
                            std::vector<int>* rejected) {
  data.validate();
  references.validate();
  if (!(threshold > 0.0 && threshold <= 1.0))
    throw InvalidParameterError("reject_components: threshold must be in (0, 1]");
  if (data.n_channels() != model.n_channels())
    throw ShapeError("reject_components: model was fitted on " +
                     std::to_string(model.n_channels()) + " channels, data has " +
                     std::to_string(data.n_channels()));
  if (references.fs_hz != data.fs_hz || references.n_samples() != data.n_samples())
    throw AlignmentError(
        "reject_components: references must match the data sample rate and length");

  Eigen::MatrixXd activations = model.activations(data.samples);

  std::vector<int> removed;
  for (int i = 0; i < model.k; ++i) {
    double max_r = 0.0;
    for (Eigen::Index r = 0; r < references.n_channels(); ++r)
      max_r = std::max(max_r, std::abs(pearson(activations.row(i), references.samples.row(r))));
    if (max_r > threshold) {
      activations.row(i).setZero();
      removed.push_back(i);
    }
  }
  if (!removed.empty())
    log_info("reject_components: removed " + std::to_string(removed.size()) + " of " +
             std::to_string(model.k) + " components");
  if (rejected) *rejected = std::move(removed);

  Recording out;
  out.fs_hz = data.fs_hz;
  out.channel_names = data.channel_names;
  out.samples = (model.mixing_pseudo_inverse * activations).colwise() + model.channel_means;
  return out;
}

namespace {

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& rows, const std::string& what) {
  if (!rows.is_array() || rows.empty() || !rows.front().is_array())
    throw ParseError("ica model: bad matrix field '" + what + "'");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size())
      throw ParseError("ica model: ragged matrix field '" + what + "'");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
  }
  return m;
}

}  // namespace

void write_ica_model(const std::string& path, const IcaModel& model) {
  nlohmann::json j;
  j["version"] = 1;
  j["k"] = model.k;
  j["n_channels"] = model.n_channels();
  j["whitening"] = matrix_json(model.whitening);
  j["unmixing"] = matrix_json(model.unmixing);
  j["mixing_pseudo_inverse"] = matrix_json(model.mixing_pseudo_inverse);
  j["channel_means"] = std::vector<double>(model.channel_means.data(),
                                           model.channel_means.data() + model.channel_means.size());
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump() << '\n';
}

IcaModel read_ica_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path + "': " + std::string(e.what()));
  }
  IcaModel model;
  try {
    model.k = j.at("k").get<int>();
    model.whitening = matrix_from_json(j.at("whitening"), "whitening");
    model.unmixing = matrix_from_json(j.at("unmixing"), "unmixing");
    model.mixing_pseudo_inverse =
        matrix_from_json(j.at("mixing_pseudo_inverse"), "mixing_pseudo_inverse");
    const auto means = j.at("channel_means").get<std::vector<double>>();
    model.channel_means = Eigen::Map<const Eigen::VectorXd>(means.data(),
                                                            static_cast<Eigen::Index>(means.size()));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path + "': " + std::string(e.what()));
  }
  return model;
}

}  // namespace nse
