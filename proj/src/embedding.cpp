#include "nse/embedding.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "nse/errors.hpp"
#include "nse/parallel.hpp"

namespace nse {

EmbeddingMatrix embed_epoch(const Eigen::MatrixXd& epoch, int n_windows, double eps,
                            uint32_t epoch_id, uint32_t label, Domain domain) {
  if (n_windows < 1) throw InvalidParameterError("embed: n_windows must be >= 1");
  if (!(eps > 0.0)) throw InvalidParameterError("embed: eps must be positive");
  const Eigen::Index window_len = epoch.cols() / n_windows;
  if (window_len < 2)
    throw InvalidParameterError("embed: window of " + std::to_string(window_len) +
                                " samples is shorter than 2 samples");

  EmbeddingMatrix m;
  m.epoch_id = epoch_id;
  m.label = label;
  m.domain = domain;
  m.values.resize(n_windows, epoch.rows());
  for (int t = 0; t < n_windows; ++t) {
    const auto block = epoch.middleCols(static_cast<Eigen::Index>(t) * window_len, window_len);
    for (Eigen::Index j = 0; j < epoch.rows(); ++j) {
      const double mean = block.row(j).mean();
      const double var =
          (block.row(j).array() - mean).square().sum() / static_cast<double>(window_len);
      m.values(t, j) = std::log(std::max(var, eps));
    }
  }
  return m;
}

std::vector<EmbeddingMatrix> embed(const EpochSet& projected, int n_windows, double eps) {
  projected.validate();
  std::vector<EmbeddingMatrix> out(projected.n_epochs());
  parallel_for(projected.n_epochs(), [&](std::size_t k) {
    out[k] = embed_epoch(projected.epochs[k], n_windows, eps, static_cast<uint32_t>(k),
                         projected.labels[k], projected.domains[k]);
  });
  return out;
}

MaskedEmbedding column_mean_mask(const EmbeddingMatrix& m) {
  MaskedEmbedding out;
  out.values = m.values;
  out.epoch_id = m.epoch_id;
  out.label = m.label;
  out.domain = m.domain;
  out.masked.resize(m.values.rows(), m.values.cols());
  for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
    const double mean = m.values.col(j).mean();
    for (Eigen::Index t = 0; t < m.values.rows(); ++t) out.masked(t, j) = m.values(t, j) < mean;
  }
  return out;
}

MaskedEmbedding column_mean_mask(const MaskedEmbedding& m) {
  MaskedEmbedding out = m;
  for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
    double sum = 0.0;
    Eigen::Index kept = 0;
    for (Eigen::Index t = 0; t < m.values.rows(); ++t) {
      if (!m.masked(t, j)) {
        sum += m.values(t, j);
        ++kept;
      }
    }
    if (kept == 0) continue;
    const double mean = sum / static_cast<double>(kept);
    for (Eigen::Index t = 0; t < m.values.rows(); ++t) {
      if (!m.masked(t, j) && m.values(t, j) < mean) out.masked(t, j) = true;
    }
  }
  return out;
}

Eigen::MatrixXd masked_export_values(const MaskedEmbedding& m) {
  Eigen::MatrixXd out(m.values.rows(), m.values.cols());
  for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
    const double col_min = m.values.col(j).minCoeff();
    for (Eigen::Index t = 0; t < m.values.rows(); ++t)
      out(t, j) = m.masked(t, j) ? 0.0 : m.values(t, j) - col_min;
  }
  return out;
}

namespace {

#pragma pack(push, 1)
struct RecordHeader {
  uint32_t epoch_id;
  uint32_t label;
  uint8_t domain;
  uint8_t pad[7];
};
#pragma pack(pop)
static_assert(sizeof(RecordHeader) == 16);

}  // namespace

void save_embeddings(const std::string& path, const std::vector<EmbeddingMatrix>& ms) {
  Eigen::Index n_windows = ms.empty() ? 0 : ms.front().n_windows();
  Eigen::Index n_filters = ms.empty() ? 0 : ms.front().n_filters();
  for (const auto& m : ms) {
    if (m.n_windows() != n_windows || m.n_filters() != n_filters)
      throw ShapeError("save_embeddings: matrices have mixed shapes");
  }

  nlohmann::json header;
  header["version"] = 1;
  header["n_windows"] = n_windows;
  header["n_filters"] = n_filters;
  header["count"] = ms.size();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << header.dump() << '\n';

  std::vector<float> buf(static_cast<std::size_t>(n_windows * n_filters));
  for (const auto& m : ms) {
    RecordHeader rh{};
    rh.epoch_id = m.epoch_id;
    rh.label = m.label;
    rh.domain = static_cast<uint8_t>(m.domain);
    out.write(reinterpret_cast<const char*>(&rh), sizeof(rh));
    std::size_t i = 0;
    for (Eigen::Index t = 0; t < n_windows; ++t)
      for (Eigen::Index j = 0; j < n_filters; ++j) buf[i++] = static_cast<float>(m.values(t, j));
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size() * sizeof(float)));
  }
  if (!out) throw IoError("short write to '" + path + "'");
}

std::vector<EmbeddingMatrix> load_embeddings(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");

  std::string header_line;
  if (!std::getline(in, header_line))
    throw ParseError("'" + path + "': missing embedding header (byte offset 0)");
  Eigen::Index n_windows = 0, n_filters = 0;
  std::size_t count = 0;
  try {
    const auto header = nlohmann::json::parse(header_line);
    if (header.at("version").get<int>() != 1)
      throw ParseError("'" + path + "': unsupported embedding file version");
    n_windows = header.at("n_windows").get<Eigen::Index>();
    n_filters = header.at("n_filters").get<Eigen::Index>();
    count = header.at("count").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path + "': bad embedding header: " + std::string(e.what()));
  }

  const std::size_t header_bytes = header_line.size() + 1;
  const std::size_t record_bytes =
      sizeof(RecordHeader) + static_cast<std::size_t>(n_windows * n_filters) * sizeof(float);

  std::vector<EmbeddingMatrix> ms;
  ms.reserve(count);
  std::vector<float> buf(static_cast<std::size_t>(n_windows * n_filters));
  for (std::size_t r = 0; r < count; ++r) {
    RecordHeader rh{};
    in.read(reinterpret_cast<char*>(&rh), sizeof(rh));
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * sizeof(float)));
    if (!in) {
      const std::size_t offset = header_bytes + r * record_bytes;
      throw ParseError("'" + path + "': truncated at record " + std::to_string(r) +
                       " (byte offset " + std::to_string(offset) + ")");
    }
    if (rh.domain > 1)
      throw ParseError("'" + path + "': record " + std::to_string(r) + " has bad domain tag");
    EmbeddingMatrix m;
    m.epoch_id = rh.epoch_id;
    m.label = rh.label;
    m.domain = static_cast<Domain>(rh.domain);
    m.values.resize(n_windows, n_filters);
    std::size_t i = 0;
    for (Eigen::Index t = 0; t < n_windows; ++t)
      for (Eigen::Index j = 0; j < n_filters; ++j) m.values(t, j) = static_cast<double>(buf[i++]);
    ms.push_back(std::move(m));
  }
  return ms;
}

namespace {

void write_csv_rows(std::ofstream& out, const Eigen::MatrixXd& values, uint32_t epoch_id,
                    uint32_t label, Domain domain) {
  char num[32];
  for (Eigen::Index t = 0; t < values.rows(); ++t) {
    out << epoch_id << ',' << label << ',' << domain_name(domain) << ',' << t;
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      std::snprintf(num, sizeof(num), "%.17g", values(t, j));
      out << ',' << num;
    }
    out << '\n';
  }
}

void csv_header(std::ofstream& out, Eigen::Index n_filters) {
  out << "epoch_id,label,domain,window";
  for (Eigen::Index j = 0; j < n_filters; ++j) out << ",f" << j;
  out << '\n';
}

}  // namespace

void export_embeddings_csv(const std::string& path, const std::vector<EmbeddingMatrix>& ms) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  csv_header(out, ms.empty() ? 0 : ms.front().n_filters());
  for (const auto& m : ms) write_csv_rows(out, m.values, m.epoch_id, m.label, m.domain);
  if (!out) throw IoError("short write to '" + path + "'");
}

void export_masked_csv(const std::string& path, const std::vector<MaskedEmbedding>& ms) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  csv_header(out, ms.empty() ? 0 : ms.front().values.cols());
  for (const auto& m : ms)
    write_csv_rows(out, masked_export_values(m), m.epoch_id, m.label, m.domain);
  if (!out) throw IoError("short write to '" + path + "'");
}

Eigen::VectorXd flatten(const EmbeddingMatrix& m) {
  Eigen::VectorXd v(m.values.size());
  Eigen::Index i = 0;
  for (Eigen::Index t = 0; t < m.values.rows(); ++t)
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) v(i++) = m.values(t, j);
  return v;
}

Eigen::MatrixXd stack_flattened(const std::vector<EmbeddingMatrix>& ms) {
  if (ms.empty()) return {};
  Eigen::MatrixXd out(static_cast<Eigen::Index>(ms.size()), ms.front().values.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (ms[i].values.size() != ms.front().values.size())
      throw ShapeError("stack_flattened: matrices have mixed shapes");
    out.row(static_cast<Eigen::Index>(i)) = flatten(ms[i]).transpose();
  }
  return out;
}

}  // namespace nse
