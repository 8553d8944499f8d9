#pragma once

#include <cstdint>
#include <string>

#include "rdt/config.hpp"
#include "rdt/data_model.hpp"
#include "rdt/tracker.hpp"

namespace rdt {

// One experiment: a model variant, its training schedule, and where its data
// lives. Parsed from a key=value file; unknown keys are config errors.
struct ExperimentConfig {
    ModelConfig model;
    TrainConfig train;
    std::string data_root;
    std::string out_dir;
    std::string resume;        // checkpoint to continue training from
    std::string rgb_backbone;  // pretrained RGB checkpoint to build on

    static ExperimentConfig from_config(const KeyValueConfig& kv);
};

// Synthetic benchmark recipe: `count` sequences of `length` frames, with a
// degradation kind rotating across sequences so every modality is
// periodically the unreliable one.
struct SynthProfile {
    int count = 4;
    int length = 40;
    int width = 128;
    int height = 96;
    double noise_rgb = 0.0;
    double noise_depth = 0.0;
    double noise_tir = 0.0;
    bool degradations = true;
    std::string prefix = "seq";
    std::string out_dir;
    uint64_t seed = 0;

    static SynthProfile from_config(const KeyValueConfig& kv);
};

// Sequence index % 4 picks: clean, darkened RGB, flat depth, thermal
// crossover — each applied over the middle third of the frames.
DegradationProfile degradation_for(const SynthProfile& profile, int index);

}  // namespace rdt
