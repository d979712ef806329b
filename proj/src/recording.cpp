#include "nse/recording.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nse/errors.hpp"

namespace nse {

void Recording::validate() const {
  if (fs_hz <= 0.0) throw ValidationError("Recording: sample_rate_hz must be positive");
  if (static_cast<Eigen::Index>(channel_names.size()) != samples.rows())
    throw ValidationError("Recording: channel name count does not match sample rows");
  if (samples.cols() <= 0) throw ValidationError("Recording: n_samples must be > 0");
  if (!samples.allFinite()) throw ValidationError("Recording: samples contain non-finite values");
}

void EventList::validate() const {
  int64_t prev = -1;
  for (const auto& e : events) {
    if (e.onset_sample <= prev)
      throw ValidationError("EventList: onsets must be strictly increasing (at sample " +
                            std::to_string(e.onset_sample) + ")");
    prev = e.onset_sample;
    if (n_classes > 0 && e.label >= n_classes)
      throw ValidationError("EventList: label " + std::to_string(e.label) +
                            " outside vocabulary of size " + std::to_string(n_classes));
  }
}

uint32_t EventList::vocabulary_size() const {
  if (n_classes > 0) return n_classes;
  uint32_t max_label = 0;
  for (const auto& e : events) max_label = std::max(max_label, e.label);
  return events.empty() ? 0 : max_label + 1;
}

const char* domain_name(Domain d) { return d == Domain::imagined ? "imagined" : "spoken"; }

Domain domain_from_name(const std::string& name) {
  if (name == "imagined") return Domain::imagined;
  if (name == "spoken") return Domain::spoken;
  throw ValidationError("unknown domain tag '" + name + "' (expected imagined|spoken)");
}

void EpochSet::validate() const {
  if (fs_hz <= 0.0) throw ValidationError("EpochSet: sample_rate_hz must be positive");
  if (labels.size() != epochs.size() || domains.size() != epochs.size())
    throw ValidationError("EpochSet: labels/domains length must equal n_epochs");
  for (const auto& e : epochs) {
    if (e.rows() != n_channels() || e.cols() != n_samples_per_epoch())
      throw ValidationError("EpochSet: ragged epoch shapes");
  }
}

void write_eegb(const std::string& path, const Recording& rec) {
  rec.validate();
  nlohmann::json header;
  header["version"] = 1;
  header["fs_hz"] = rec.fs_hz;
  header["channels"] = rec.channel_names;
  header["n_samples"] = rec.n_samples();
  header["dtype"] = "f32le";
  header["layout"] = "channel_major";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << header.dump() << '\n';

  std::vector<float> row(static_cast<std::size_t>(rec.n_samples()));
  for (Eigen::Index c = 0; c < rec.n_channels(); ++c) {
    for (Eigen::Index t = 0; t < rec.n_samples(); ++t)
      row[static_cast<std::size_t>(t)] = static_cast<float>(rec.samples(c, t));
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("short write to '" + path + "'");
}

Recording read_eegb(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");

  std::string header_line;
  if (!std::getline(in, header_line))
    throw ParseError("'" + path + "': missing EEGB header line (byte offset 0)");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path + "': bad EEGB header: " + std::string(e.what()));
  }

  Recording rec;
  try {
    if (header.at("version").get<int>() != 1)
      throw ParseError("'" + path + "': unsupported EEGB version");
    if (header.at("dtype").get<std::string>() != "f32le" ||
        header.at("layout").get<std::string>() != "channel_major")
      throw ParseError("'" + path + "': unsupported dtype/layout");
    rec.fs_hz = header.at("fs_hz").get<double>();
    rec.channel_names = header.at("channels").get<std::vector<std::string>>();
    const auto n_samples = header.at("n_samples").get<int64_t>();
    const auto n_channels = static_cast<int64_t>(rec.channel_names.size());
    if (n_samples <= 0 || n_channels <= 0)
      throw ParseError("'" + path + "': empty channel list or sample count");
    rec.samples.resize(n_channels, n_samples);

    const std::size_t header_bytes = header_line.size() + 1;
    std::vector<float> row(static_cast<std::size_t>(n_samples));
    for (int64_t c = 0; c < n_channels; ++c) {
      in.read(reinterpret_cast<char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
      if (in.gcount() != static_cast<std::streamsize>(row.size() * sizeof(float))) {
        const std::size_t offset =
            header_bytes + static_cast<std::size_t>(c) * row.size() * sizeof(float) +
            static_cast<std::size_t>(std::max<std::streamsize>(in.gcount(), 0));
        throw ParseError("'" + path + "': truncated EEGB payload at byte offset " +
                         std::to_string(offset));
      }
      for (int64_t t = 0; t < n_samples; ++t)
        rec.samples(c, t) = static_cast<double>(row[static_cast<std::size_t>(t)]);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("'" + path + "': bad EEGB header field: " + std::string(e.what()));
  }
  rec.validate();
  return rec;
}

void write_events_csv(const std::string& path, const EventList& events) {
  events.validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "onset_sample,label\n";
  for (const auto& e : events.events) out << e.onset_sample << ',' << e.label << '\n';
  if (!out) throw IoError("short write to '" + path + "'");
}

EventList read_events_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("'" + path + "': empty events file");
  // Tolerate a trailing \r from CRLF files.
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "onset_sample,label")
    throw ParseError("'" + path + "': expected header 'onset_sample,label', got '" + line + "'");

  EventList list;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ParseError("'" + path + "': line " + std::to_string(line_no) + ": missing comma");
    try {
      std::size_t used = 0;
      const int64_t onset = std::stoll(line.substr(0, comma), &used);
      if (used != comma) throw std::invalid_argument("trailing junk");
      const unsigned long label = std::stoul(line.substr(comma + 1), &used);
      if (used != line.size() - comma - 1) throw std::invalid_argument("trailing junk");
      list.events.push_back({onset, static_cast<uint32_t>(label)});
    } catch (const std::exception&) {
      throw ParseError("'" + path + "': line " + std::to_string(line_no) + ": bad event row '" +
                       line + "'");
    }
  }
  list.validate();
  return list;
}

}  // namespace nse
