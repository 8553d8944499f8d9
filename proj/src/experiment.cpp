#include "rdt/experiment.hpp"

#include <set>

#include "rdt/error.hpp"

namespace rdt {

ExperimentConfig ExperimentConfig::from_config(const KeyValueConfig& kv) {
    static const std::set<std::string> allowed = {
        "modalities",      "fusion_mode",       "disable_orthogonal",
        "freeze_alpha_beta", "patch_size",      "embed_dim",
        "template_size",   "search_size",       "num_layers",
        "num_heads",       "ffn_ratio",         "prompt_reduction",
        "lambda_fovea",    "lambda_giou",       "lambda_l1",
        "focal_alpha",     "focal_gamma",       "focal_neg_exponent",
        "epochs",          "samples_per_epoch", "learning_rate",
        "lr_drop_epoch",   "lr_drop_factor",    "batch_size",
        "weight_decay",    "seed",              "data_root",
        "out_dir",         "resume",            "rgb_backbone"};
    kv.restrict_keys(allowed);

    ExperimentConfig ec;
    ModelConfig& m = ec.model;

    m.use_depth = false;
    m.use_tir = false;
    bool saw_rgb = false;
    for (const std::string& mod : split_list(kv.get_string("modalities", "rgb,d,tir"))) {
        bool dup = false;
        if (mod == "rgb") {
            dup = saw_rgb;
            saw_rgb = true;
        } else if (mod == "d") {
            dup = m.use_depth;
            m.use_depth = true;
        } else if (mod == "tir") {
            dup = m.use_tir;
            m.use_tir = true;
        } else {
            fail(ErrorCode::config, "unknown modality '" + mod + "' (expected rgb, d or tir)");
        }
        if (dup) fail(ErrorCode::config, "modality '" + mod + "' listed twice");
    }
    if (!saw_rgb) fail(ErrorCode::config, "the modality set must include rgb");

    std::string fm = kv.get_string("fusion_mode", "paper");
    if (fm == "paper")
        m.fusion_mode = FusionMode::Paper;
    else if (fm == "strict")
        m.fusion_mode = FusionMode::Strict;
    else
        fail(ErrorCode::config, "fusion_mode must be paper or strict, got '" + fm + "'");

    m.disable_orthogonal = kv.get_bool("disable_orthogonal", false);
    m.freeze_alpha_beta = kv.get_bool("freeze_alpha_beta", false);
    m.patch_size = static_cast<int>(kv.get_int("patch_size", m.patch_size));
    m.embed_dim = static_cast<int>(kv.get_int("embed_dim", m.embed_dim));
    m.template_size = static_cast<int>(kv.get_int("template_size", m.template_size));
    m.search_size = static_cast<int>(kv.get_int("search_size", m.search_size));
    m.num_layers = static_cast<int>(kv.get_int("num_layers", m.num_layers));
    m.num_heads = static_cast<int>(kv.get_int("num_heads", m.num_heads));
    m.ffn_ratio = static_cast<int>(kv.get_int("ffn_ratio", m.ffn_ratio));
    m.prompt_reduction = static_cast<int>(kv.get_int("prompt_reduction", m.prompt_reduction));
    m.lambda_fovea = kv.get_double("lambda_fovea", m.lambda_fovea);
    m.loss.lambda_giou = kv.get_double("lambda_giou", m.loss.lambda_giou);
    m.loss.lambda_l1 = kv.get_double("lambda_l1", m.loss.lambda_l1);
    m.loss.focal_alpha = kv.get_double("focal_alpha", m.loss.focal_alpha);
    m.loss.focal_gamma = kv.get_double("focal_gamma", m.loss.focal_gamma);
    m.loss.focal_neg_exponent = kv.get_double("focal_neg_exponent", m.loss.focal_neg_exponent);

    TrainConfig& t = ec.train;
    t.epochs = static_cast<int>(kv.get_int("epochs", t.epochs));
    t.samples_per_epoch = static_cast<int>(kv.get_int("samples_per_epoch", t.samples_per_epoch));
    t.learning_rate = kv.get_double("learning_rate", t.learning_rate);
    t.lr_drop_epoch = static_cast<int>(kv.get_int("lr_drop_epoch", t.lr_drop_epoch));
    t.lr_drop_factor = kv.get_double("lr_drop_factor", t.lr_drop_factor);
    t.batch_size = static_cast<int>(kv.get_int("batch_size", t.batch_size));
    t.weight_decay = kv.get_double("weight_decay", t.weight_decay);
    t.seed = static_cast<uint64_t>(kv.get_int("seed", 0));

    ec.data_root = kv.get_string("data_root", "");
    ec.out_dir = kv.get_string("out_dir", "");
    ec.resume = kv.get_string("resume", "");
    ec.rgb_backbone = kv.get_string("rgb_backbone", "");
    if (!ec.resume.empty() && !ec.rgb_backbone.empty())
        fail(ErrorCode::config, "resume and rgb_backbone are mutually exclusive");

    m.validate();
    t.validate();
    return ec;
}

SynthProfile SynthProfile::from_config(const KeyValueConfig& kv) {
    static const std::set<std::string> allowed = {
        "count",      "length", "width",  "height", "noise_rgb", "noise_depth",
        "noise_tir",  "degradations", "prefix", "out_dir", "seed"};
    kv.restrict_keys(allowed);

    SynthProfile p;
    p.count = static_cast<int>(kv.get_int("count", p.count));
    p.length = static_cast<int>(kv.get_int("length", p.length));
    p.width = static_cast<int>(kv.get_int("width", p.width));
    p.height = static_cast<int>(kv.get_int("height", p.height));
    p.noise_rgb = kv.get_double("noise_rgb", p.noise_rgb);
    p.noise_depth = kv.get_double("noise_depth", p.noise_depth);
    p.noise_tir = kv.get_double("noise_tir", p.noise_tir);
    p.degradations = kv.get_bool("degradations", p.degradations);
    p.prefix = kv.get_string("prefix", p.prefix);
    p.out_dir = kv.get_string("out_dir", "");
    p.seed = static_cast<uint64_t>(kv.get_int("seed", 0));

    if (p.count < 1) fail(ErrorCode::config, "count must be at least 1");
    if (p.length < 2) fail(ErrorCode::config, "length must be at least 2");
    if (p.noise_rgb < 0 || p.noise_depth < 0 || p.noise_tir < 0)
        fail(ErrorCode::config, "noise levels must be non-negative");
    return p;
}

DegradationProfile degradation_for(const SynthProfile& profile, int index) {
    DegradationProfile d;
    d.width = profile.width;
    d.height = profile.height;
    d.noise_rgb = profile.noise_rgb;
    d.noise_depth = profile.noise_depth;
    d.noise_tir = profile.noise_tir;
    if (!profile.degradations) return d;
    FrameSpan mid{profile.length / 3, 2 * profile.length / 3};
    if (mid.begin >= mid.end) return d;
    switch (index % 4) {
        case 1: d.rgb_darken.push_back({mid, 0.2}); break;
        case 2: d.depth_flatten.push_back(mid); break;
        case 3: d.tir_crossover.push_back(mid); break;
        default: break;
    }
    return d;
}

}  // namespace rdt
