#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rdt/box.hpp"
#include "rdt/data_model.hpp"
#include "rdt/fusion.hpp"
#include "rdt/graph.hpp"
#include "rdt/prompt.hpp"
#include "rdt/tokenizer.hpp"

namespace rdt {

struct LossWeights {
    double lambda_giou = 2.0;
    double lambda_l1 = 5.0;
    double focal_alpha = 0.25;  // balanced-variant weight; the center-map loss does not use it
    double focal_gamma = 2.0;
    double focal_neg_exponent = 4.0;  // penalty reduction around the peak

    void validate() const;
};

// Geometry + behaviour switches of one model instance. use_depth/use_tir
// select the auxiliary modalities (RGB is always present). With neither,
// the model is the plain RGB tracker used for backbone pretraining: no
// fusion, no prompt injection.
struct ModelConfig {
    int patch_size = 8;
    int embed_dim = 64;
    int template_size = 32;
    int search_size = 64;
    int num_layers = 2;
    int num_heads = 4;
    int ffn_ratio = 4;
    int prompt_reduction = 4;
    double lambda_fovea = 1.0;
    FusionMode fusion_mode = FusionMode::Paper;
    bool disable_orthogonal = false;
    bool freeze_alpha_beta = false;
    bool use_depth = true;
    bool use_tir = true;
    LossWeights loss;

    bool rgb_only() const { return !use_depth && !use_tir; }
    bool dual_modal() const { return use_depth != use_tir; }
    PatchEmbedConfig patch_cfg() const;
    void validate() const;
};

struct TrainConfig {
    int epochs = 2;             // total target epoch count (resume continues)
    int samples_per_epoch = 256;
    double learning_rate = 1e-3;
    int lr_drop_epoch = 1;      // epochs >= this index use lr * lr_drop_factor
    double lr_drop_factor = 0.1;
    int batch_size = 8;
    double weight_decay = 1e-4;
    uint64_t seed = 0;

    void validate() const;
};

struct Param {
    std::string name;
    Mat value;
    bool frozen = true;
    Mat adam_m, adam_v;  // allocated on first optimizer step
};

struct EpochLog {
    int epoch = 0;
    double mean_loss = 0, mean_cls = 0, mean_giou = 0, mean_l1 = 0;
    double lr = 0;
    int rejected = 0;
};

// Six aligned crops of one training/inference step. Depth and TIR are
// already three-channel here (single-channel planes replicated).
struct CropPair {
    Image rgb_template, rgb_search;
    Image d_template, d_search;
    Image tir_template, tir_search;
};

struct HeadIds {
    int score = -1;   // 1 x n_search, sigmoid
    int offset = -1;  // 2 x n_search, sigmoid
    int size = -1;    // 2 x n_search, sigmoid
};

struct ForwardOut {
    HeadIds head;
    std::vector<int> prompts;  // P^0 .. P^{L-1} node ids (empty when rgb-only)
    int h_final = -1;
};

struct LossOut {
    int total = -1;  // 1x1 node id; -1 when the sample was rejected
    double cls = 0, giou = 0, l1 = 0;
    bool rejected = false;
};

class TrackerModel {
  public:
    ModelConfig cfg;
    int epoch = 0;         // training epochs completed
    int64_t adam_step = 0;

    static TrackerModel create(const ModelConfig& cfg, uint64_t seed);

    size_t num_params() const { return params_.size(); }
    const Param& param(size_t i) const { return params_[i]; }
    Param& param(size_t i) { return params_[i]; }
    bool has(const std::string& name) const { return index_.count(name) > 0; }
    Param& at(const std::string& name);
    const Param& at(const std::string& name) const;
    std::vector<std::string> trainable_names() const;

    // one graph leaf per parameter, in parameter order; gradients are
    // requested for trainable parameters when training is set
    std::vector<int> make_leaves(Graph& g, bool training) const;

    // full forward from token node ids (template block first). d_tokens /
    // tir_tokens are ignored when the config does not use them.
    ForwardOut forward_tokens(Graph& g, const std::vector<int>& leaves, int rgb_tokens,
                              int d_tokens, int tir_tokens) const;

    // embeds the crops per modality, then forward_tokens
    ForwardOut forward(Graph& g, const std::vector<int>& leaves, const CropPair& crops) const;

  private:
    std::vector<Param> params_;
    std::map<std::string, int> index_;

    int add(const std::string& name, Mat value);
    friend TrackerModel assemble_from_rgb(const TrackerModel&, const ModelConfig&, uint64_t);
    void apply_freeze_rule();
};

// Composite loss for one sample; gt is in search-crop pixel coordinates.
// A gt center outside the crop yields rejected=true and no loss node.
LossOut build_loss(Graph& g, const HeadIds& head, const BoundingBox& gt,
                   const ModelConfig& cfg);

// Gaussian center-target map (row-major h_X x h_X flattened to 1 x n);
// peak cell value is exactly 1.
Mat gaussian_target_map(const BoundingBox& gt, const ModelConfig& cfg);

// Decode head value maps to a box in search-crop pixel coordinates
// (argmax cell + offset + size), sizes clamped to >= 1 pixel.
BoundingBox decode_box(const Mat& score, const Mat& offset, const Mat& size,
                       const ModelConfig& cfg);

// Crop construction shared by training and inference.
CropPair make_crops(const TriModalFrame& template_frame, const BoundingBox& template_box,
                    const TriModalFrame& search_frame, double search_cx, double search_cy,
                    double search_side, const ModelConfig& cfg);
double template_crop_side(const BoundingBox& b);  // 2 * sqrt(w*h)
double search_crop_side(const BoundingBox& b);    // 4 * sqrt(w*h)

// Frozen-mask-respecting training loop (decoupled-weight-decay Adam).
// Returns one log entry per epoch run; model.epoch advances.
std::vector<EpochLog> train(TrackerModel& model, const std::vector<Sequence>& train_set,
                            const TrainConfig& cfg);

// One-pass evaluation protocol: frame 0 reports the ground-truth box and
// initializes the template; later frames search around the previous output.
std::vector<BoundingBox> track_sequence(const TrackerModel& model, const Sequence& seq);

// Copies backbone/head/RGB-embedding tensors from a pretrained RGB model
// into a fresh multi-modal model; auxiliary patch embeddings start as
// copies of the RGB one. Frozen masks follow full_cfg's freeze rule.
TrackerModel assemble_from_rgb(const TrackerModel& rgb_model, const ModelConfig& full_cfg,
                               uint64_t seed);

void save_checkpoint(const TrackerModel& model, const std::string& path);
TrackerModel load_checkpoint(const std::string& path);

}  // namespace rdt
