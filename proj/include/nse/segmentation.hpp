#pragma once

#include "nse/recording.hpp"

namespace nse {

// Cut fixed-length epochs at event onsets. Epoch k covers
// samples[:, onset_k .. onset_k + round(epoch_seconds * fs)).
EpochSet segment(const Recording& rec, const EventList& events, double epoch_seconds,
                 Domain domain = Domain::imagined);

// Subtract, per event and channel, the mean over the baseline_seconds window
// preceding the onset from the trial span [onset, onset + epoch_length).
// Non-trial samples are untouched; all means come from the input signal.
Recording baseline_correct(const Recording& rec, const EventList& events, double baseline_seconds,
                           double epoch_seconds);

}  // namespace nse
