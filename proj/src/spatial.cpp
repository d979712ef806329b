#include "nse/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "nse/errors.hpp"
#include "nse/parallel.hpp"

#include <json.hpp>

namespace nse {

const Eigen::MatrixXd& ClassCovariances::covariance_for(uint32_t class_id) const {
  for (std::size_t i = 0; i < class_ids.size(); ++i)
    if (class_ids[i] == class_id) return covariances[i];
  throw OutOfRangeError("ClassCovariances: no class " + std::to_string(class_id));
}

ClassCovariances class_covariances(const EpochSet& epochs, double ridge) {
  epochs.validate();
  if (ridge < 0.0) throw InvalidParameterError("class_covariances: ridge must be >= 0");
  if (epochs.n_epochs() == 0) throw InsufficientDataError("class_covariances: empty epoch set");

  const Eigen::Index n_ch = epochs.n_channels();
  std::map<uint32_t, std::vector<std::size_t>> by_class;
  for (std::size_t k = 0; k < epochs.n_epochs(); ++k) by_class[epochs.labels[k]].push_back(k);
  for (const auto& [cls, idx] : by_class) {
    if (idx.size() < 2)
      throw InsufficientDataError("class_covariances: class " + std::to_string(cls) +
                                  " has fewer than 2 epochs");
  }

  ClassCovariances out;
  for (const auto& [cls, idx] : by_class) {
    out.class_ids.push_back(cls);
    out.trial_counts.push_back(idx.size());
    out.covariances.emplace_back(Eigen::MatrixXd::Zero(n_ch, n_ch));
  }

  // Per-class accumulation; classes are independent.
  parallel_for(out.class_ids.size(), [&](std::size_t ci) {
    const auto& idx = by_class.at(out.class_ids[ci]);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n_ch, n_ch);
    for (std::size_t k : idx) {
      const Eigen::MatrixXd& x = epochs.epochs[k];
      Eigen::MatrixXd c = x * x.transpose();
      const double tr = c.trace();
      if (!(tr > 0.0))
        throw InsufficientDataError("class_covariances: zero-variance epoch in class " +
                                    std::to_string(out.class_ids[ci]));
      acc += c / tr;
    }
    acc /= static_cast<double>(idx.size());
    if (ridge > 0.0)
      acc += (ridge * acc.trace() / static_cast<double>(n_ch)) *
             Eigen::MatrixXd::Identity(n_ch, n_ch);
    acc /= acc.trace();
    out.covariances[ci] = 0.5 * (acc + acc.transpose());
  });
  return out;
}

namespace {

void fix_sign(Eigen::VectorXd& w) {
  Eigen::Index imax = 0;
  w.cwiseAbs().maxCoeff(&imax);
  if (w(imax) < 0.0) w = -w;
}

}  // namespace

SpatialFilterBank csp_binary(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2, int n_pairs,
                             uint32_t class_a, uint32_t class_b) {
  const Eigen::Index n_ch = c1.rows();
  if (c1.cols() != n_ch || c2.rows() != n_ch || c2.cols() != n_ch)
    throw ShapeError("csp_binary: covariance shapes disagree");
  if (n_pairs < 1 || 2 * n_pairs > n_ch)
    throw InvalidParameterError("csp_binary: need 1 <= 2*n_pairs <= n_channels, got n_pairs=" +
                                std::to_string(n_pairs));

  // Whiten with the composite: M = L^-1 C1 L^-T for C1 + C2 = L L^T, then an
  // ordinary symmetric eigenproblem. Eigenvectors w = L^-T y automatically
  // satisfy w^T (C1 + C2) w = 1.
  const Eigen::MatrixXd composite = c1 + c2;
  Eigen::LLT<Eigen::MatrixXd> llt(composite);
  if (llt.info() != Eigen::Success)
    throw DecompositionError("csp_binary: composite covariance is not positive definite");

  const Eigen::MatrixXd l = llt.matrixL();
  const Eigen::MatrixXd m =
      l.triangularView<Eigen::Lower>().solve(
           l.triangularView<Eigen::Lower>().solve(c1).transpose())
          .transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (m + m.transpose()));
  if (es.info() != Eigen::Success)
    throw DecompositionError("csp_binary: eigendecomposition failed");

  const Eigen::MatrixXd w_all =
      l.transpose().triangularView<Eigen::Upper>().solve(es.eigenvectors());

  SpatialFilterBank bank;
  bank.patterns_per_class = n_pairs;
  bank.class_ids = {class_a, class_b};
  bank.filters.resize(2 * n_pairs, n_ch);

  auto push = [&](int row, Eigen::Index src, uint32_t cls) {
    Eigen::VectorXd w = w_all.col(src);
    fix_sign(w);
    double lambda = es.eigenvalues()(src);
    if (lambda < -1e-9 || lambda > 1.0 + 1e-9)
      throw DecompositionError("csp_binary: eigenvalue " + std::to_string(lambda) +
                               " outside [0, 1]");
    lambda = std::clamp(lambda, 0.0, 1.0);
    bank.filters.row(row) = w.transpose();
    bank.eigenvalues.push_back(lambda);
    bank.source_class.push_back(cls);
  };

  // Largest eigenvalues descending, then smallest ascending.
  for (int i = 0; i < n_pairs; ++i) push(i, n_ch - 1 - i, class_a);
  for (int i = 0; i < n_pairs; ++i) push(n_pairs + i, i, class_b);
  return bank;
}

SpatialFilterBank csp_multiclass(const ClassCovariances& covs, int patterns_per_class) {
  if (covs.n_classes() < 2)
    throw InvalidParameterError("csp_multiclass: need at least 2 classes, got " +
                                std::to_string(covs.n_classes()));
  if (patterns_per_class < 2 || patterns_per_class % 2 != 0)
    throw InvalidParameterError(
        "csp_multiclass: patterns_per_class must be even and >= 2, got " +
        std::to_string(patterns_per_class));

  const Eigen::Index n_ch = covs.n_channels();
  const auto n_classes = covs.n_classes();
  SpatialFilterBank bank;
  bank.patterns_per_class = patterns_per_class;
  bank.class_ids = covs.class_ids;
  bank.filters.resize(static_cast<Eigen::Index>(n_classes) * patterns_per_class, n_ch);
  bank.eigenvalues.assign(static_cast<std::size_t>(n_classes) *
                              static_cast<std::size_t>(patterns_per_class),
                          0.0);
  bank.source_class.assign(bank.eigenvalues.size(), 0);

  // One-vs-rest problems are independent.
  parallel_for(n_classes, [&](std::size_t ci) {
    Eigen::MatrixXd rest = Eigen::MatrixXd::Zero(n_ch, n_ch);
    for (std::size_t other = 0; other < n_classes; ++other)
      if (other != ci) rest += covs.covariances[other];
    rest /= static_cast<double>(n_classes - 1);

    SpatialFilterBank sub;
    try {
      sub = csp_binary(covs.covariances[ci], rest, patterns_per_class / 2);
    } catch (const Error& e) {
      throw Error(e.category(), "csp_multiclass: class " + std::to_string(covs.class_ids[ci]) +
                                    ": " + e.what());
    }
    const auto base = static_cast<Eigen::Index>(ci) * patterns_per_class;
    bank.filters.middleRows(base, patterns_per_class) = sub.filters;
    for (int i = 0; i < patterns_per_class; ++i) {
      bank.eigenvalues[static_cast<std::size_t>(base + i)] =
          sub.eigenvalues[static_cast<std::size_t>(i)];
      bank.source_class[static_cast<std::size_t>(base + i)] = covs.class_ids[ci];
    }
  });
  return bank;
}

Eigen::MatrixXd project_epoch(const SpatialFilterBank& bank, const Eigen::MatrixXd& epoch) {
  if (epoch.rows() != bank.n_channels())
    throw ShapeError("project: bank expects " + std::to_string(bank.n_channels()) +
                     " channels, epoch has " + std::to_string(epoch.rows()));
  return bank.filters * epoch;
}

EpochSet project(const SpatialFilterBank& bank, const EpochSet& epochs) {
  epochs.validate();
  if (epochs.n_epochs() > 0 && epochs.n_channels() != bank.n_channels())
    throw ShapeError("project: bank expects " + std::to_string(bank.n_channels()) +
                     " channels, epochs have " + std::to_string(epochs.n_channels()));
  EpochSet out;
  out.fs_hz = epochs.fs_hz;
  out.labels = epochs.labels;
  out.domains = epochs.domains;
  out.epochs.resize(epochs.n_epochs());
  parallel_for(epochs.n_epochs(), [&](std::size_t k) {
    out.epochs[k] = bank.filters * epochs.epochs[k];
  });
  return out;
}

void write_filter_bank(const std::string& path, const SpatialFilterBank& bank) {
  nlohmann::json j;
  j["version"] = 1;
  j["n_channels"] = bank.n_channels();
  j["class_ids"] = bank.class_ids;
  j["patterns_per_class"] = bank.patterns_per_class;
  j["eigenvalues"] = bank.eigenvalues;
  j["source_class"] = bank.source_class;
  j["fitted_domain"] = domain_name(bank.fitted_domain);
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < bank.filters.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < bank.filters.cols(); ++c) row.push_back(bank.filters(i, c));
    rows.push_back(std::move(row));
  }
  j["filters"] = std::move(rows);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << j.dump() << '\n';
}

SpatialFilterBank read_filter_bank(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path + "': " + std::string(e.what()));
  }
  SpatialFilterBank bank;
  try {
    bank.class_ids = j.at("class_ids").get<std::vector<uint32_t>>();
    bank.patterns_per_class = j.at("patterns_per_class").get<int>();
    bank.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
    bank.source_class = j.at("source_class").get<std::vector<uint32_t>>();
    bank.fitted_domain = domain_from_name(j.at("fitted_domain").get<std::string>());
    const auto& rows = j.at("filters");
    const auto n_ch = j.at("n_channels").get<Eigen::Index>();
    if (!rows.is_array() || rows.empty()) throw ParseError("'" + path + "': empty filters");
    bank.filters.resize(static_cast<Eigen::Index>(rows.size()), n_ch);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<Eigen::Index>(rows[i].size()) != n_ch)
        throw ParseError("'" + path + "': ragged filters matrix");
      for (Eigen::Index c = 0; c < n_ch; ++c)
        bank.filters(static_cast<Eigen::Index>(i), c) = rows[i][static_cast<std::size_t>(c)].get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path + "': " + std::string(e.what()));
  }
  if (bank.filters.rows() !=
      static_cast<Eigen::Index>(bank.class_ids.size()) * bank.patterns_per_class)
    throw ParseError("'" + path + "': filter count does not match classes x patterns_per_class");
  if (bank.eigenvalues.size() != static_cast<std::size_t>(bank.filters.rows()) ||
      bank.source_class.size() != static_cast<std::size_t>(bank.filters.rows()))
    throw ParseError("'" + path + "': eigenvalue/source_class lengths do not match the filters");
  return bank;
}

}  // namespace nse
