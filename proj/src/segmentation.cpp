#include "nse/segmentation.hpp"

#include <cmath>
#include <sstream>

#include "nse/errors.hpp"

namespace nse {

EpochSet segment(const Recording& rec, const EventList& events, double epoch_seconds,
                 Domain domain) {
  rec.validate();
  events.validate();
  if (epoch_seconds <= 0.0) throw InvalidParameterError("segment: epoch_seconds must be positive");

  const auto epoch_len = static_cast<int64_t>(std::llround(epoch_seconds * rec.fs_hz));
  if (epoch_len <= 0) throw InvalidParameterError("segment: epoch shorter than one sample");

  std::vector<int64_t> offenders;
  for (const auto& e : events) {
    if (e.onset_sample < 0 || e.onset_sample + epoch_len > rec.n_samples())
      offenders.push_back(e.onset_sample);
  }
  if (!offenders.empty()) {
    std::ostringstream msg;
    msg << "segment: " << offenders.size() << " event(s) exceed the recording (onsets:";
    for (auto o : offenders) msg << ' ' << o;
    msg << "; epoch length " << epoch_len << ", recording length " << rec.n_samples() << ")";
    throw OutOfRangeError(msg.str());
  }

  EpochSet set;
  set.fs_hz = rec.fs_hz;
  set.epochs.reserve(events.size());
  set.labels.reserve(events.size());
  set.domains.reserve(events.size());
  for (const auto& e : events) {
    set.epochs.push_back(rec.samples.middleCols(e.onset_sample, epoch_len));
    set.labels.push_back(e.label);
    set.domains.push_back(domain);
  }
  return set;
}

Recording baseline_correct(const Recording& rec, const EventList& events, double baseline_seconds,
                           double epoch_seconds) {
  rec.validate();
  events.validate();
  if (baseline_seconds <= 0.0)
    throw InvalidParameterError("baseline_correct: baseline_seconds must be positive");

  const auto baseline_len = static_cast<int64_t>(std::llround(baseline_seconds * rec.fs_hz));
  const auto epoch_len = static_cast<int64_t>(std::llround(epoch_seconds * rec.fs_hz));
  if (baseline_len <= 0) throw InvalidParameterError("baseline_correct: empty baseline window");

  for (const auto& e : events) {
    if (e.onset_sample < baseline_len)
      throw OutOfRangeError("baseline_correct: onset " + std::to_string(e.onset_sample) +
                            " is earlier than the baseline window of " +
                            std::to_string(baseline_len) + " samples");
    if (e.onset_sample + epoch_len > rec.n_samples())
      throw OutOfRangeError("baseline_correct: trial at onset " + std::to_string(e.onset_sample) +
                            " exceeds the recording");
  }

  Recording out = rec;
  for (const auto& e : events) {
    const Eigen::VectorXd means =
        rec.samples.middleCols(e.onset_sample - baseline_len, baseline_len).rowwise().mean();
    // Assign from the input so overlapping trials stay well-defined.
    out.samples.middleCols(e.onset_sample, epoch_len) =
        rec.samples.middleCols(e.onset_sample, epoch_len).colwise() - means;
  }
  return out;
}

}  // namespace nse
