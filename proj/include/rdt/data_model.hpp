#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rdt/box.hpp"
#include "rdt/image.hpp"

namespace rdt {

// One time step of spatially aligned RGB, depth and thermal images.
// All three share the same H x W.
struct TriModalFrame {
    Image rgb;    // 3 channels
    Image depth;  // 1 channel
    Image tir;    // 1 channel
    int timestamp_index = 0;
};

struct Sequence {
    std::string name;
    std::vector<TriModalFrame> frames;
    // Sparse map: unannotated frames simply have no entry. Frame 0 is
    // always annotated (tracker initialization).
    std::map<int, BoundingBox> annotations;

    int length() const { return static_cast<int>(frames.size()); }
    bool dense() const { return annotations.size() == frames.size(); }
    bool has_annotation(int i) const { return annotations.count(i) > 0; }
};

// Half-open frame interval [begin, end).
struct FrameSpan {
    int begin = 0;
    int end = 0;
    bool contains(int f) const { return f >= begin && f < end; }
};

// Modality degradations applied on declared frame intervals. Mirrors the
// failure modes the tracker must survive: darkened RGB, planar scenes with
// no depth variation, thermal crossover.
struct DegradationProfile {
    int width = 128;
    int height = 96;
    std::vector<std::pair<FrameSpan, double>> rgb_darken;  // factor in [0,1]
    std::vector<FrameSpan> depth_flatten;
    std::vector<FrameSpan> tir_crossover;
    double noise_rgb = 0.0;
    double noise_depth = 0.0;
    double noise_tir = 0.0;

    double darken_factor_at(int f) const;  // 1.0 when no span covers f
    bool depth_flat_at(int f) const;
    bool tir_crossover_at(int f) const;

    // spans inside [0, length), non-overlapping per degradation kind
    void validate(int length) const;
};

// Deterministic synthetic tri-modal sequence: a textured rectangle target
// moving over a background with distractors. RGB carries texture, depth
// encodes target distance, TIR encodes target heat. Ground truth is the
// exact rendered rectangle per frame.
Sequence generate_synthetic_sequence(int length, const DegradationProfile& profile,
                                     uint64_t seed);

// On-disk layout: <root>/<name>/{rgb,depth,tir}/%06d.png + groundtruth.txt.
// Dense annotation files carry one "x,y,w,h" line per frame in order; sparse
// files carry "index:x,y,w,h" lines.
void save_sequence(const Sequence& seq, const std::string& root);
Sequence load_sequence(const std::string& root, const std::string& name);

// Names of sequence directories directly under `root` (sorted).
std::vector<std::string> list_sequence_dirs(const std::string& root);

// groundtruth.txt / prediction-file codec, shared by dataset and eval output
std::map<int, BoundingBox> parse_box_lines(const std::string& path, bool enforce_valid);
void write_box_lines(const std::string& path, const std::map<int, BoundingBox>& boxes,
                     int n_frames);

}  // namespace rdt
