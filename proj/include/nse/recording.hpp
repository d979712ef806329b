#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace nse {

// Continuous multi-channel signal. Samples are channel-major:
// row c of `samples` is channel c, in microvolts for EEG.
struct Recording {
  double fs_hz = 0.0;
  std::vector<std::string> channel_names;
  Eigen::MatrixXd samples;  // n_channels x n_samples

  Eigen::Index n_channels() const { return samples.rows(); }
  Eigen::Index n_samples() const { return samples.cols(); }

  // Throws ValidationError if the invariants do not hold
  // (name/row count match, positive fs, finite samples).
  void validate() const;
};

struct Event {
  int64_t onset_sample = 0;
  uint32_t label = 0;
};

// Cue onsets with class labels. Onsets must be strictly increasing;
// labels come from a vocabulary of n_classes ids (0 = derive from data).
struct EventList {
  std::vector<Event> events;
  uint32_t n_classes = 0;

  std::size_t size() const { return events.size(); }
  auto begin() const { return events.begin(); }
  auto end() const { return events.end(); }
  void validate() const;
  uint32_t vocabulary_size() const;
};

enum class Domain : uint8_t { imagined = 0, spoken = 1 };

const char* domain_name(Domain d);
Domain domain_from_name(const std::string& name);

// Stack of fixed-length trials. epochs[k] is n_channels x n_samples_per_epoch.
struct EpochSet {
  double fs_hz = 0.0;
  std::vector<Eigen::MatrixXd> epochs;
  std::vector<uint32_t> labels;
  std::vector<Domain> domains;

  std::size_t n_epochs() const { return epochs.size(); }
  Eigen::Index n_channels() const { return epochs.empty() ? 0 : epochs.front().rows(); }
  Eigen::Index n_samples_per_epoch() const { return epochs.empty() ? 0 : epochs.front().cols(); }

  void validate() const;
};

// EEGB container: one UTF-8 JSON header line, then raw little-endian float32
// samples, channel-major.
void write_eegb(const std::string& path, const Recording& rec);
Recording read_eegb(const std::string& path);

// Events file: CSV with header `onset_sample,label`.
void write_events_csv(const std::string& path, const EventList& events);
EventList read_events_csv(const std::string& path);

}  // namespace nse
