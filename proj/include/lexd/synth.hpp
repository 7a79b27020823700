#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "lexd/features.hpp"
#include "lexd/ingest.hpp"

namespace lexd::synth {

/// Team-recording analog with a planted lagged relation. Movement slices are
/// either small or large in scale and either step up late in the slice (long
/// strike below the mean) or take another shape (noise, random walk, step
/// down). Planted slices are small and step up; the speech energy in the
/// slice `lag` later alternates between loud and quiet seconds (high dynamic
/// complexity). Decoys fill the two mixed cells.
struct PlantedCorpusSpec {
    std::size_t recordings = 10;
    std::size_t slices_per_recording = 35;
    std::size_t planted_per_recording = 3;
    std::size_t still_decoys_per_recording = 9;
    std::size_t step_decoys_per_recording = 6;
    double slice_seconds = 60.0;
    std::size_t movement_channels = 4;
    double movement_rate = 5.0;
    double speech_rate = 4.0;
    std::size_t lag = 1;
    std::uint64_t seed = 20240517;
};

struct PlantedCorpus {
    std::vector<RecordingGroup> groups;
    std::vector<RowKey> planted;  // feature slices carrying the movement signature
};

PlantedCorpus make_planted_corpus(const PlantedCorpusSpec& spec = {});

/// Long-format CSV accepted by load_recordings.
void write_recordings_csv(std::ostream& out, const std::vector<RecordingGroup>& groups);

}  // namespace lexd::synth
