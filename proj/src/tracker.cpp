#include "rdt/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "rdt/error.hpp"

namespace rdt {

void LossWeights::validate() const {
    if (lambda_giou < 0 || lambda_l1 < 0 || focal_alpha < 0 || focal_gamma < 0 ||
        focal_neg_exponent < 0)
        fail(ErrorCode::config, "loss weights must be non-negative");
}

PatchEmbedConfig ModelConfig::patch_cfg() const {
    PatchEmbedConfig p;
    p.patch_size = patch_size;
    p.embed_dim = embed_dim;
    p.template_size = template_size;
    p.search_size = search_size;
    return p;
}

void ModelConfig::validate() const {
    patch_cfg().validate();
    if (num_layers < 1) fail(ErrorCode::config, "num_layers must be at least 1");
    if (num_heads < 1 || embed_dim % num_heads != 0)
        fail(ErrorCode::config, "num_heads " + std::to_string(num_heads) +
                                    " must divide embed_dim " + std::to_string(embed_dim));
    if (ffn_ratio < 1) fail(ErrorCode::config, "ffn_ratio must be at least 1");
    if (prompt_reduction < 1 || embed_dim % prompt_reduction != 0)
        fail(ErrorCode::config, "prompt_reduction must divide embed_dim");
    if (lambda_fovea <= 0) fail(ErrorCode::config, "lambda_fovea must be positive");
    loss.validate();
}

void TrainConfig::validate() const {
    if (epochs < 1 || samples_per_epoch < 1 || batch_size < 1)
        fail(ErrorCode::config, "epochs, samples_per_epoch and batch_size must be positive");
    if (learning_rate <= 0) fail(ErrorCode::config, "learning_rate must be positive");
    if (lr_drop_epoch >= epochs)
        fail(ErrorCode::config, "lr_drop_epoch must be smaller than epochs");
    if (lr_drop_factor <= 0) fail(ErrorCode::config, "lr_drop_factor must be positive");
    if (weight_decay < 0) fail(ErrorCode::config, "weight_decay must be non-negative");
}

// ---------------------------------------------------------------------------
// model construction

Param& TrackerModel::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) fail(ErrorCode::state, "no parameter named '" + name + "'");
    return params_[it->second];
}

const Param& TrackerModel::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) fail(ErrorCode::state, "no parameter named '" + name + "'");
    return params_[it->second];
}

std::vector<std::string> TrackerModel::trainable_names() const {
    std::vector<std::string> out;
    for (const auto& p : params_)
        if (!p.frozen) out.push_back(p.name);
    return out;
}

int TrackerModel::add(const std::string& name, Mat value) {
    Param p;
    p.name = name;
    p.value = std::move(value);
    p.frozen = true;
    index_[name] = static_cast<int>(params_.size());
    params_.push_back(std::move(p));
    return static_cast<int>(params_.size()) - 1;
}

void TrackerModel::apply_freeze_rule() {
    // RGB-only models train the backbone, embedding and head (the
    // pretraining phase). Multi-modal models freeze all of those and train
    // exactly the fusion and prompt parameters.
    for (auto& p : params_) {
        bool is_fusion = p.name.rfind("fusion.", 0) == 0;
        bool is_prompt = p.name.rfind("prompt", 0) == 0;
        bool is_rgb_side = p.name.rfind("enc", 0) == 0 || p.name.rfind("head.", 0) == 0 ||
                           p.name.rfind("embed.", 0) == 0;
        if (cfg.rgb_only())
            p.frozen = !(is_rgb_side && p.name.rfind("embed.d.", 0) != 0 &&
                         p.name.rfind("embed.tir.", 0) != 0);
        else
            p.frozen = !(is_fusion || is_prompt);
    }
    if (!cfg.rgb_only()) {
        // ablations: fixed projection scalars leave the trainable set
        if (cfg.freeze_alpha_beta || cfg.disable_orthogonal) {
            at("fusion.alpha").frozen = true;
            at("fusion.beta").frozen = true;
        }
        if (cfg.freeze_alpha_beta) {
            at("fusion.alpha").value.fill(1.0);
            at("fusion.beta").value.fill(1.0);
        }
        // dual-modal mode bypasses fusion entirely
        if (cfg.dual_modal())
            for (auto& p : params_)
                if (p.name.rfind("fusion.", 0) == 0) p.frozen = true;
    }
}

TrackerModel TrackerModel::create(const ModelConfig& cfg, uint64_t seed) {
    cfg.validate();
    TrackerModel m;
    m.cfg = cfg;
    Rng rng(seed);
    PatchEmbedConfig pc = cfg.patch_cfg();
    const int C = cfg.embed_dim;
    const int F = C * cfg.ffn_ratio;
    const int inner = C / cfg.prompt_reduction;
    double sC = 1.0 / std::sqrt(static_cast<double>(C));
    double sF = 1.0 / std::sqrt(static_cast<double>(F));
    double sI = 1.0 / std::sqrt(static_cast<double>(inner));

    for (const char* mod : {"rgb", "d", "tir"}) {
        PatchEmbedParams pe;
        pe.init(pc, rng);
        std::string base = std::string("embed.") + mod + ".";
        m.add(base + "weight", pe.weight);
        m.add(base + "bias", pe.bias);
        m.add(base + "pos_template", pe.pos_template);
        m.add(base + "pos_search", pe.pos_search);
    }
    for (int l = 0; l < cfg.num_layers; l++) {
        std::string base = "enc" + std::to_string(l) + ".";
        m.add(base + "ln1.gamma", Mat(C, 1, 1.0));
        m.add(base + "ln1.beta", Mat(C, 1));
        m.add(base + "attn.wq", rng.normal_mat(C, C, sC));
        m.add(base + "attn.bq", Mat(C, 1));
        m.add(base + "attn.wk", rng.normal_mat(C, C, sC));
        m.add(base + "attn.bk", Mat(C, 1));
        m.add(base + "attn.wv", rng.normal_mat(C, C, sC));
        m.add(base + "attn.bv", Mat(C, 1));
        m.add(base + "attn.wo", rng.normal_mat(C, C, sC));
        m.add(base + "attn.bo", Mat(C, 1));
        m.add(base + "ln2.gamma", Mat(C, 1, 1.0));
        m.add(base + "ln2.beta", Mat(C, 1));
        m.add(base + "ffn.w1", rng.normal_mat(F, C, sC));
        m.add(base + "ffn.b1", Mat(F, 1));
        m.add(base + "ffn.w2", rng.normal_mat(C, F, sF));
        m.add(base + "ffn.b2", Mat(C, 1));
    }
    const struct { const char* name; int out; double bias2; } branches[] = {
        {"score", 1, -2.0},  // negative prior keeps early score maps sparse
        {"offset", 2, 0.0},
        {"size", 2, 0.0},
    };
    for (const auto& br : branches) {
        std::string base = std::string("head.") + br.name + ".";
        m.add(base + "w1", rng.normal_mat(C, C, sC));
        m.add(base + "b1", Mat(C, 1));
        m.add(base + "w2", rng.normal_mat(br.out, C, sC));
        m.add(base + "b2", Mat(br.out, 1, br.bias2));
    }
    {
        FusionParams f;
        f.init(C, rng);
        m.add("fusion.conv_d.w", f.conv_d_w);
        m.add("fusion.conv_d.b", f.conv_d_b);
        m.add("fusion.conv_tir.w", f.conv_tir_w);
        m.add("fusion.conv_tir.b", f.conv_tir_b);
        m.add("fusion.conv_fuse.w", f.conv_fuse_w);
        m.add("fusion.conv_fuse.b", f.conv_fuse_b);
        m.add("fusion.alpha", Mat(1, 1, 1.0));
        m.add("fusion.beta", Mat(1, 1, 1.0));
    }
    for (int l = 0; l < cfg.num_layers; l++) {
        PromptBlockParams pb;
        pb.init(C, cfg.prompt_reduction, rng);
        std::string base = "prompt" + std::to_string(l) + ".";
        m.add(base + "down_h.w", pb.down_h_w);
        m.add(base + "down_h.b", pb.down_h_b);
        m.add(base + "down_p.w", pb.down_p_w);
        m.add(base + "down_p.b", pb.down_p_b);
        m.add(base + "up.w", pb.up_w);
        m.add(base + "up.b", pb.up_b);
    }
    m.apply_freeze_rule();
    return m;
}

std::vector<int> TrackerModel::make_leaves(Graph& g, bool training) const {
    std::vector<int> leaves;
    leaves.reserve(params_.size());
    for (const auto& p : params_) leaves.push_back(g.leaf(p.value, training && !p.frozen));
    return leaves;
}

// ---------------------------------------------------------------------------
// forward

namespace {

struct LeafLookup {
    const TrackerModel& model;
    const std::vector<int>& leaves;
    int operator()(const std::string& name) const {
        return leaves[static_cast<size_t>(&model.at(name) - &model.param(0))];
    }
};

int conv1x1(Graph& g, int w, int b, int x) {
    return g.add(g.matmul(w, x), g.bcast_across_cols(b, g.val(x).cols));
}

int softmax_rows(Graph& g, int s) {
    int n = g.val(s).cols;
    int m = g.row_max_detached(s);
    int e = g.exp_(g.sub(s, g.bcast_across_cols(m, n)));
    return g.div(e, g.bcast_across_cols(g.rowsum(e), n));
}

int layer_norm(Graph& g, int x, int gamma, int beta) {
    const Mat& v = g.val(x);
    int C = v.rows, N = v.cols;
    int mu = g.scale(g.colsum(x), 1.0 / C);
    int xc = g.sub(x, g.bcast_across_rows(mu, C));
    int var = g.scale(g.colsum(g.mul(xc, xc)), 1.0 / C);
    int rstd = g.reciprocal(g.sqrt_(g.add_const(var, 1e-5)));
    int xn = g.mul(xc, g.bcast_across_rows(rstd, C));
    return g.add(g.mul(xn, g.bcast_across_cols(gamma, N)), g.bcast_across_cols(beta, N));
}

int attention(Graph& g, int x, const LeafLookup& L, const std::string& base, int heads) {
    const Mat& v = g.val(x);
    int C = v.rows, N = v.cols;
    int dh = C / heads;
    int q = conv1x1(g, L(base + "wq"), L(base + "bq"), x);
    int k = conv1x1(g, L(base + "wk"), L(base + "bk"), x);
    int val = conv1x1(g, L(base + "wv"), L(base + "bv"), x);
    std::vector<int> outs;
    for (int h = 0; h < heads; h++) {
        int qh = g.slice_rows(q, h * dh, dh);
        int kh = g.slice_rows(k, h * dh, dh);
        int vh = g.slice_rows(val, h * dh, dh);
        int s = g.scale(g.matmul(g.transpose(qh), kh), 1.0 / std::sqrt(static_cast<double>(dh)));
        int a = softmax_rows(g, s);  // N x N, row = query token
        outs.push_back(g.matmul(vh, g.transpose(a)));
    }
    int cat = heads == 1 ? outs[0] : g.concat_rows(outs);
    (void)N;
    return conv1x1(g, L(base + "wo"), L(base + "bo"), cat);
}

int encoder_layer(Graph& g, int x, const LeafLookup& L, int layer, int heads) {
    std::string base = "enc" + std::to_string(layer) + ".";
    int y = g.add(x, attention(g, layer_norm(g, x, L(base + "ln1.gamma"), L(base + "ln1.beta")),
                               L, base + "attn.", heads));
    int h = layer_norm(g, y, L(base + "ln2.gamma"), L(base + "ln2.beta"));
    int f = conv1x1(g, L(base + "ffn.w2"), L(base + "ffn.b2"),
                    g.gelu(conv1x1(g, L(base + "ffn.w1"), L(base + "ffn.b1"), h)));
    return g.add(y, f);
}

int head_branch(Graph& g, int s, const LeafLookup& L, const std::string& name) {
    std::string base = "head." + name + ".";
    int h = g.gelu(conv1x1(g, L(base + "w1"), L(base + "b1"), s));
    return g.sigmoid(conv1x1(g, L(base + "w2"), L(base + "b2"), h));
}

}  // namespace

ForwardOut TrackerModel::forward_tokens(Graph& g, const std::vector<int>& leaves,
                                        int rgb_tokens, int d_tokens, int tir_tokens) const {
    LeafLookup L{*this, leaves};
    PatchEmbedConfig pc = cfg.patch_cfg();
    const int nZ = pc.n_template(), nX = pc.n_search();
    const Mat& rv = g.val(rgb_tokens);
    if (rv.rows != cfg.embed_dim || rv.cols != nZ + nX)
        fail(ErrorCode::shape, "rgb tokens are " + std::to_string(rv.rows) + "x" +
                                   std::to_string(rv.cols) + ", model wants " +
                                   std::to_string(cfg.embed_dim) + "x" +
                                   std::to_string(nZ + nX));

    ForwardOut out;
    int H = rgb_tokens;
    if (cfg.rgb_only()) {
        for (int l = 0; l < cfg.num_layers; l++) H = encoder_layer(g, H, L, l, cfg.num_heads);
    } else {
        int aux;
        if (cfg.use_depth && cfg.use_tir) {
            FusionIds f;
            f.conv_d_w = L("fusion.conv_d.w");
            f.conv_d_b = L("fusion.conv_d.b");
            f.conv_tir_w = L("fusion.conv_tir.w");
            f.conv_tir_b = L("fusion.conv_tir.b");
            f.conv_fuse_w = L("fusion.conv_fuse.w");
            f.conv_fuse_b = L("fusion.conv_fuse.b");
            f.alpha = L("fusion.alpha");
            f.beta = L("fusion.beta");
            aux = fuse_graph(g, d_tokens, tir_tokens, f, 1e-6, cfg.fusion_mode,
                             cfg.disable_orthogonal);
        } else {
            // dual-modal mode: the single auxiliary stream passes through
            aux = cfg.use_depth ? d_tokens : tir_tokens;
        }
        auto prompt_ids = [&](int l) {
            PromptIds ids;
            std::string base = "prompt" + std::to_string(l) + ".";
            ids.down_h_w = L(base + "down_h.w");
            ids.down_h_b = L(base + "down_h.b");
            ids.down_p_w = L(base + "down_p.w");
            ids.down_p_b = L(base + "down_p.b");
            ids.up_w = L(base + "up.w");
            ids.up_b = L(base + "up.b");
            ids.lambda = g.leaf(Mat(1, 1, cfg.lambda_fovea), false);
            return ids;
        };
        // block l produces the prompt consumed by encoder layer l, computed
        // from the hidden state *entering* that layer
        int P = prompt_block_graph(g, rgb_tokens, aux, prompt_ids(0), nZ, nX);
        out.prompts.push_back(P);
        for (int l = 0; l < cfg.num_layers; l++) {
            int input = g.add(H, P);
            int p_next = -1;
            if (l + 1 < cfg.num_layers)
                p_next = prompt_block_graph(g, H, P, prompt_ids(l + 1), nZ, nX);
            H = encoder_layer(g, input, L, l, cfg.num_heads);
            if (p_next >= 0) {
                P = p_next;
                out.prompts.push_back(P);
            }
        }
    }
    out.h_final = H;
    int search = g.slice_cols(H, nZ, nX);
    out.head.score = head_branch(g, search, L, "score");
    out.head.offset = head_branch(g, search, L, "offset");
    out.head.size = head_branch(g, search, L, "size");
    return out;
}

ForwardOut TrackerModel::forward(Graph& g, const std::vector<int>& leaves,
                                 const CropPair& crops) const {
    LeafLookup L{*this, leaves};
    PatchEmbedConfig pc = cfg.patch_cfg();
    auto embed_ids = [&](const char* mod) {
        PatchEmbedIds ids;
        std::string base = std::string("embed.") + mod + ".";
        ids.weight = L(base + "weight");
        ids.bias = L(base + "bias");
        ids.pos_template = L(base + "pos_template");
        ids.pos_search = L(base + "pos_search");
        return ids;
    };
    int rgb = embed_tokens(g, embed_ids("rgb"), crops.rgb_template, crops.rgb_search, pc);
    int d = -1, tir = -1;
    if (cfg.use_depth)
        d = embed_tokens(g, embed_ids("d"), crops.d_template, crops.d_search, pc);
    if (cfg.use_tir)
        tir = embed_tokens(g, embed_ids("tir"), crops.tir_template, crops.tir_search, pc);
    return forward_tokens(g, leaves, rgb, d, tir);
}

// ---------------------------------------------------------------------------
// loss

Mat gaussian_target_map(const BoundingBox& gt, const ModelConfig& cfg) {
    int hX = cfg.search_size / cfg.patch_size;
    double stride = cfg.patch_size;
    double cxf = gt.cx() / stride, cyf = gt.cy() / stride;
    int jx = std::clamp(static_cast<int>(std::floor(cxf)), 0, hX - 1);
    int jy = std::clamp(static_cast<int>(std::floor(cyf)), 0, hX - 1);
    double diag = std::hypot(gt.w / stride, gt.h / stride);
    double sigma = std::max(0.5, diag / 6.0);
    Mat y(1, hX * hX);
    for (int gy = 0; gy < hX; gy++)
        for (int gx = 0; gx < hX; gx++) {
            double d2 = (gx - jx) * double(gx - jx) + (gy - jy) * double(gy - jy);
            y.at(0, gy * hX + gx) = std::exp(-d2 / (2.0 * sigma * sigma));
        }
    y.at(0, jy * hX + jx) = 1.0;
    return y;
}

namespace {

// x^p elementwise for x >= 0; exact squaring when p == 2
int pow_graph(Graph& g, int x, double p) {
    if (p == 2.0) return g.mul(x, x);
    return g.exp_(g.scale(g.log_(g.add_const(x, 1e-12)), p));
}

}  // namespace

LossOut build_loss(Graph& g, const HeadIds& head, const BoundingBox& gt,
                   const ModelConfig& cfg) {
    LossOut out;
    const int S = cfg.search_size;
    const int hX = S / cfg.patch_size;
    const double stride = cfg.patch_size;
    if (!gt.valid() || gt.cx() < 0 || gt.cx() >= S || gt.cy() < 0 || gt.cy() >= S) {
        out.rejected = true;
        return out;
    }
    int n = hX * hX;
    int jx = std::clamp(static_cast<int>(std::floor(gt.cx() / stride)), 0, hX - 1);
    int jy = std::clamp(static_cast<int>(std::floor(gt.cy() / stride)), 0, hX - 1);
    int j = jy * hX + jx;

    // classification: penalty-reduced focal loss against the Gaussian map
    Mat y = gaussian_target_map(gt, cfg);
    Mat pos_mask(1, n), neg_weight(1, n);
    for (int i = 0; i < n; i++) {
        pos_mask.at(0, i) = i == j ? 1.0 : 0.0;
        neg_weight.at(0, i) =
            i == j ? 0.0 : std::pow(1.0 - y.at(0, i), cfg.loss.focal_neg_exponent);
    }
    int p = head.score;
    int ones = g.leaf(Mat(1, n, 1.0), false);
    int log_p = g.log_(g.add_const(p, 1e-12));
    int one_minus_p = g.sub(ones, p);
    int log_1mp = g.log_(g.add_const(one_minus_p, 1e-12));
    int pos_id = g.leaf(pos_mask, false);
    int negw_id = g.leaf(neg_weight, false);
    int pos_term = g.sum_all(g.mul(pos_id, g.mul(pow_graph(g, one_minus_p, cfg.loss.focal_gamma),
                                                 log_p)));
    int neg_term = g.sum_all(g.mul(negw_id, g.mul(pow_graph(g, p, cfg.loss.focal_gamma),
                                                  log_1mp)));
    int cls = g.scale(g.add(pos_term, neg_term), -1.0);  // normalized by N_pos = 1

    // box regression at the ground-truth center cell
    int off = g.slice_cols(head.offset, j, 1);  // 2 x 1
    int sz = g.slice_cols(head.size, j, 1);
    int ox = g.slice_rows(off, 0, 1), oy = g.slice_rows(off, 1, 1);
    int sw = g.slice_rows(sz, 0, 1), sh = g.slice_rows(sz, 1, 1);
    int pcx = g.scale(g.add_const(ox, jx), stride);
    int pcy = g.scale(g.add_const(oy, jy), stride);
    int pw = g.scale(sw, S);
    int ph = g.scale(sh, S);
    int px1 = g.sub(pcx, g.scale(pw, 0.5));
    int py1 = g.sub(pcy, g.scale(ph, 0.5));
    int px2 = g.add(pcx, g.scale(pw, 0.5));
    int py2 = g.add(pcy, g.scale(ph, 0.5));
    auto cst = [&](double v) { return g.leaf(Mat(1, 1, v), false); };
    int gx1 = cst(gt.x), gy1 = cst(gt.y), gx2 = cst(gt.x2()), gy2 = cst(gt.y2());
    int zero = cst(0.0);

    int ix1 = g.maximum(px1, gx1), iy1 = g.maximum(py1, gy1);
    int ix2 = g.minimum(px2, gx2), iy2 = g.minimum(py2, gy2);
    int iw = g.maximum(g.sub(ix2, ix1), zero);
    int ih = g.maximum(g.sub(iy2, iy1), zero);
    int inter = g.mul(iw, ih);
    int uni = g.sub(g.add(g.mul(pw, ph), cst(gt.area())), inter);
    int ex1 = g.minimum(px1, gx1), ey1 = g.minimum(py1, gy1);
    int ex2 = g.maximum(px2, gx2), ey2 = g.maximum(py2, gy2);
    int enc = g.mul(g.sub(ex2, ex1), g.sub(ey2, ey1));
    int iou = g.div(inter, uni);
    int giou = g.sub(iou, g.div(g.sub(enc, uni), enc));
    int l_giou = g.sub(cst(1.0), giou);

    int l1 = g.scale(g.add(g.add(g.abs_(g.sub(px1, gx1)), g.abs_(g.sub(py1, gy1))),
                           g.add(g.abs_(g.sub(px2, gx2)), g.abs_(g.sub(py2, gy2)))),
                     0.25 / S);

    int total = g.add(cls, g.add(g.scale(l_giou, cfg.loss.lambda_giou),
                                 g.scale(l1, cfg.loss.lambda_l1)));
    out.total = total;
    out.cls = g.val(cls).d[0];
    out.giou = g.val(l_giou).d[0];
    out.l1 = g.val(l1).d[0];
    return out;
}

BoundingBox decode_box(const Mat& score, const Mat& offset, const Mat& size,
                       const ModelConfig& cfg) {
    const int S = cfg.search_size;
    const int hX = S / cfg.patch_size;
    int best = 0;
    for (int i = 1; i < score.cols; i++)
        if (score.at(0, i) > score.at(0, best)) best = i;
    int jx = best % hX, jy = best / hX;
    double cx = (jx + offset.at(0, best)) * cfg.patch_size;
    double cy = (jy + offset.at(1, best)) * cfg.patch_size;
    double w = std::max(1.0, size.at(0, best) * S);
    double h = std::max(1.0, size.at(1, best) * S);
    return {cx - w / 2.0, cy - h / 2.0, w, h};
}

// ---------------------------------------------------------------------------
// crops

double template_crop_side(const BoundingBox& b) { return 2.0 * std::sqrt(b.w * b.h); }
double search_crop_side(const BoundingBox& b) { return 4.0 * std::sqrt(b.w * b.h); }

CropPair make_crops(const TriModalFrame& template_frame, const BoundingBox& template_box,
                    const TriModalFrame& search_frame, double search_cx, double search_cy,
                    double search_side, const ModelConfig& cfg) {
    CropPair c;
    double tz = template_crop_side(template_box);
    double tcx = template_box.cx(), tcy = template_box.cy();
    c.rgb_template = crop_resize(template_frame.rgb, tcx, tcy, tz, cfg.template_size);
    c.rgb_search = crop_resize(search_frame.rgb, search_cx, search_cy, search_side,
                               cfg.search_size);
    if (cfg.use_depth) {
        c.d_template =
            to_three_channel(crop_resize(template_frame.depth, tcx, tcy, tz, cfg.template_size));
        c.d_search = to_three_channel(
            crop_resize(search_frame.depth, search_cx, search_cy, search_side, cfg.search_size));
    }
    if (cfg.use_tir) {
        c.tir_template =
            to_three_channel(crop_resize(template_frame.tir, tcx, tcy, tz, cfg.template_size));
        c.tir_search = to_three_channel(
            crop_resize(search_frame.tir, search_cx, search_cy, search_side, cfg.search_size));
    }
    return c;
}

// ---------------------------------------------------------------------------
// training

namespace {

struct SampleDraw {
    CropPair crops;
    BoundingBox gt_crop;
};

SampleDraw draw_sample(const std::vector<Sequence>& seqs,
                       const std::vector<std::vector<int>>& annotated, Rng& rng,
                       const ModelConfig& cfg) {
    int si = rng.uniform_int(static_cast<int>(seqs.size()));
    const Sequence& seq = seqs[si];
    const std::vector<int>& ann = annotated[si];
    int t0 = ann[rng.uniform_int(static_cast<int>(ann.size()))];
    int t1 = ann[rng.uniform_int(static_cast<int>(ann.size()))];
    const BoundingBox& b0 = seq.annotations.at(t0);
    const BoundingBox& b1 = seq.annotations.at(t1);
    double side = search_crop_side(b1) * rng.uniform(0.8, 1.25);
    double cx = b1.cx() + rng.uniform(-0.3, 0.3) * side / 2.0;
    double cy = b1.cy() + rng.uniform(-0.3, 0.3) * side / 2.0;
    SampleDraw s;
    s.crops = make_crops(seq.frames[t0], b0, seq.frames[t1], cx, cy, side, cfg);
    double k = cfg.search_size / side;
    s.gt_crop = {(b1.x - (cx - side / 2.0)) * k, (b1.y - (cy - side / 2.0)) * k, b1.w * k,
                 b1.h * k};
    return s;
}

}  // namespace

std::vector<EpochLog> train(TrackerModel& model, const std::vector<Sequence>& train_set,
                            const TrainConfig& cfg) {
    cfg.validate();
    if (train_set.empty()) fail(ErrorCode::args, "training set is empty");
    std::vector<std::vector<int>> annotated(train_set.size());
    for (size_t i = 0; i < train_set.size(); i++) {
        for (const auto& [idx, b] : train_set[i].annotations)
            if (b.valid()) annotated[i].push_back(idx);
        if (annotated[i].empty())
            fail(ErrorCode::args, "sequence '" + train_set[i].name + "' has no valid annotations");
    }

    size_t np = model.num_params();
    std::vector<Mat> accum(np);
    std::vector<int> accum_n(np, 0);
    int batch_samples = 0;

    auto step = [&](double lr) {
        if (batch_samples == 0) return;
        model.adam_step++;
        double t = static_cast<double>(model.adam_step);
        double bc1 = 1.0 - std::pow(0.9, t);
        double bc2 = 1.0 - std::pow(0.999, t);
        for (size_t i = 0; i < np; i++) {
            if (accum_n[i] == 0) continue;
            Param& p = model.param(i);
            if (p.adam_m.empty()) {
                p.adam_m = Mat(p.value.rows, p.value.cols);
                p.adam_v = Mat(p.value.rows, p.value.cols);
            }
            bool decay = p.value.cols > 1;  // weight matrices only
            for (size_t k = 0; k < p.value.size(); k++) {
                double grad = accum[i].d[k] / batch_samples;
                double& mm = p.adam_m.d[k];
                double& vv = p.adam_v.d[k];
                mm = 0.9 * mm + 0.1 * grad;
                vv = 0.999 * vv + 0.001 * grad * grad;
                double upd = (mm / bc1) / (std::sqrt(vv / bc2) + 1e-8);
                p.value.d[k] -= lr * (upd + (decay ? cfg.weight_decay * p.value.d[k] : 0.0));
            }
            accum[i].fill(0.0);
            accum_n[i] = 0;
        }
        batch_samples = 0;
    };

    Rng rng(cfg.seed);
    std::vector<EpochLog> logs;
    while (model.epoch < cfg.epochs) {
        int e = model.epoch;
        double lr = cfg.learning_rate * (e >= cfg.lr_drop_epoch ? cfg.lr_drop_factor : 1.0);
        EpochLog log;
        log.epoch = e;
        log.lr = lr;
        int used = 0;
        for (int s = 0; s < cfg.samples_per_epoch; s++) {
            SampleDraw d = draw_sample(train_set, annotated, rng, model.cfg);
            Graph g;
            std::vector<int> leaves = model.make_leaves(g, true);
            ForwardOut out = model.forward(g, leaves, d.crops);
            LossOut loss = build_loss(g, out.head, d.gt_crop, model.cfg);
            if (loss.rejected) {
                log.rejected++;
                continue;
            }
            g.backward(loss.total);
            for (size_t i = 0; i < np; i++) {
                if (model.param(i).frozen || !g.has_grad(leaves[i])) continue;
                if (accum[i].empty())
                    accum[i] = Mat(model.param(i).value.rows, model.param(i).value.cols);
                const Mat& gr = g.grad(leaves[i]);
                for (size_t k = 0; k < gr.size(); k++) accum[i].d[k] += gr.d[k];
                accum_n[i]++;
            }
            batch_samples++;
            used++;
            log.mean_loss += g.val(loss.total).d[0];
            log.mean_cls += loss.cls;
            log.mean_giou += loss.giou;
            log.mean_l1 += loss.l1;
            if (batch_samples >= cfg.batch_size) step(lr);
        }
        step(lr);  // flush the remainder
        if (used > 0) {
            log.mean_loss /= used;
            log.mean_cls /= used;
            log.mean_giou /= used;
            log.mean_l1 /= used;
        }
        logs.push_back(log);
        model.epoch++;
    }
    return logs;
}

// ---------------------------------------------------------------------------
// inference

std::vector<BoundingBox> track_sequence(const TrackerModel& model, const Sequence& seq) {
    if (!seq.has_annotation(0))
        fail(ErrorCode::args, "sequence '" + seq.name + "' does not annotate frame 0");
    const BoundingBox init = seq.annotations.at(0);
    std::vector<BoundingBox> out;
    out.push_back(init);
    BoundingBox prev = init;
    const TriModalFrame& f0 = seq.frames[0];
    for (int i = 1; i < seq.length(); i++) {
        double side = search_crop_side(prev);
        double cx = prev.cx(), cy = prev.cy();
        CropPair crops = make_crops(f0, init, seq.frames[i], cx, cy, side, model.cfg);
        Graph g;
        std::vector<int> leaves = model.make_leaves(g, false);
        ForwardOut fo = model.forward(g, leaves, crops);
        BoundingBox crop_box =
            decode_box(g.val(fo.head.score), g.val(fo.head.offset), g.val(fo.head.size),
                       model.cfg);
        double k = side / model.cfg.search_size;
        BoundingBox img_box{(cx - side / 2.0) + crop_box.x * k, (cy - side / 2.0) + crop_box.y * k,
                            std::max(1.0, crop_box.w * k), std::max(1.0, crop_box.h * k)};
        out.push_back(img_box);
        prev = img_box;
    }
    return out;
}

// ---------------------------------------------------------------------------
// assembly and checkpoints

TrackerModel assemble_from_rgb(const TrackerModel& rgb_model, const ModelConfig& full_cfg,
                               uint64_t seed) {
    if (!rgb_model.cfg.rgb_only())
        fail(ErrorCode::state, "assembly source must be an RGB-only model");
    if (full_cfg.rgb_only())
        fail(ErrorCode::state, "assembly target must use at least one auxiliary modality");
    const ModelConfig& a = rgb_model.cfg;
    if (a.patch_size != full_cfg.patch_size || a.embed_dim != full_cfg.embed_dim ||
        a.template_size != full_cfg.template_size || a.search_size != full_cfg.search_size ||
        a.num_layers != full_cfg.num_layers || a.num_heads != full_cfg.num_heads ||
        a.ffn_ratio != full_cfg.ffn_ratio)
        fail(ErrorCode::state, "checkpoint geometry does not match the requested model");
    TrackerModel m = TrackerModel::create(full_cfg, seed);
    for (size_t i = 0; i < m.num_params(); i++) {
        Param& p = m.param(i);
        bool backbone = p.name.rfind("enc", 0) == 0 || p.name.rfind("head.", 0) == 0 ||
                        p.name.rfind("embed.rgb.", 0) == 0;
        if (backbone) p.value = rgb_model.at(p.name).value;
    }
    // auxiliary-modality embeddings start from the pretrained RGB embedding
    for (const char* mod : {"d", "tir"}) {
        for (const char* field : {"weight", "bias", "pos_template", "pos_search"}) {
            m.at(std::string("embed.") + mod + "." + field).value =
                rgb_model.at(std::string("embed.rgb.") + field).value;
        }
    }
    m.apply_freeze_rule();
    return m;
}

static const char* kCkptMagic = "rdttrack-ckpt v1";

void save_checkpoint(const TrackerModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::io, "cannot write checkpoint '" + path + "'");
    const ModelConfig& c = model.cfg;
    out << kCkptMagic << "\n";
    out << "config patch_size " << c.patch_size << "\n";
    out << "config embed_dim " << c.embed_dim << "\n";
    out << "config template_size " << c.template_size << "\n";
    out << "config search_size " << c.search_size << "\n";
    out << "config num_layers " << c.num_layers << "\n";
    out << "config num_heads " << c.num_heads << "\n";
    out << "config ffn_ratio " << c.ffn_ratio << "\n";
    out << "config prompt_reduction " << c.prompt_reduction << "\n";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", c.lambda_fovea);
    out << "config lambda_fovea " << buf << "\n";
    out << "config fusion_mode " << (c.fusion_mode == FusionMode::Strict ? "strict" : "paper")
        << "\n";
    out << "config disable_orthogonal " << (c.disable_orthogonal ? 1 : 0) << "\n";
    out << "config freeze_alpha_beta " << (c.freeze_alpha_beta ? 1 : 0) << "\n";
    out << "config use_depth " << (c.use_depth ? 1 : 0) << "\n";
    out << "config use_tir " << (c.use_tir ? 1 : 0) << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", c.loss.lambda_giou);
    out << "config lambda_giou " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", c.loss.lambda_l1);
    out << "config lambda_l1 " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", c.loss.focal_alpha);
    out << "config focal_alpha " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", c.loss.focal_gamma);
    out << "config focal_gamma " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", c.loss.focal_neg_exponent);
    out << "config focal_neg_exponent " << buf << "\n";
    out << "meta epoch " << model.epoch << "\n";
    out << "meta adam_step " << model.adam_step << "\n";
    auto write_values = [&](const Mat& m) {
        for (size_t k = 0; k < m.size(); k++) {
            std::snprintf(buf, sizeof(buf), "%.17g", m.d[k]);
            out << buf << (k + 1 == m.size() ? "" : " ");
        }
        out << "\n";
    };
    for (size_t i = 0; i < model.num_params(); i++) {
        const Param& p = model.param(i);
        out << "tensor " << p.name << " " << (p.frozen ? 1 : 0) << " " << p.value.rows << " "
            << p.value.cols << "\n";
        write_values(p.value);
        if (!p.adam_m.empty()) {
            out << "adam " << p.name << "\n";
            write_values(p.adam_m);
            write_values(p.adam_v);
        }
    }
    out << "end\n";
    if (!out) fail(ErrorCode::io, "cannot write checkpoint '" + path + "'");
}

namespace {

std::vector<double> parse_values(std::istream& in, size_t n, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) fail(ErrorCode::state, "truncated checkpoint '" + path + "'");
    std::istringstream ss(line);
    std::vector<double> vals;
    vals.reserve(n);
    double v;
    while (ss >> v) vals.push_back(v);
    if (vals.size() != n)
        fail(ErrorCode::state, "checkpoint '" + path + "': expected " + std::to_string(n) +
                                   " values, got " + std::to_string(vals.size()));
    return vals;
}

}  // namespace

TrackerModel load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot read checkpoint '" + path + "'");
    std::string line;
    if (!std::getline(in, line) || line != kCkptMagic)
        fail(ErrorCode::state, "'" + path + "' is not a tracker checkpoint");

    std::map<std::string, std::string> conf;
    int epoch = 0;
    int64_t adam_step = 0;
    std::streampos tensors_start = in.tellg();
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "config") {
            std::string k, v;
            ss >> k >> v;
            conf[k] = v;
        } else if (tag == "meta") {
            std::string k;
            ss >> k;
            if (k == "epoch") ss >> epoch;
            if (k == "adam_step") ss >> adam_step;
        } else {
            break;
        }
        tensors_start = in.tellg();
    }

    auto geti = [&](const std::string& k, int def) {
        auto it = conf.find(k);
        return it == conf.end() ? def : std::stoi(it->second);
    };
    auto getd = [&](const std::string& k, double def) {
        auto it = conf.find(k);
        return it == conf.end() ? def : std::stod(it->second);
    };
    ModelConfig c;
    c.patch_size = geti("patch_size", c.patch_size);
    c.embed_dim = geti("embed_dim", c.embed_dim);
    c.template_size = geti("template_size", c.template_size);
    c.search_size = geti("search_size", c.search_size);
    c.num_layers = geti("num_layers", c.num_layers);
    c.num_heads = geti("num_heads", c.num_heads);
    c.ffn_ratio = geti("ffn_ratio", c.ffn_ratio);
    c.prompt_reduction = geti("prompt_reduction", c.prompt_reduction);
    c.lambda_fovea = getd("lambda_fovea", c.lambda_fovea);
    c.fusion_mode = conf.count("fusion_mode") && conf["fusion_mode"] == "strict"
                        ? FusionMode::Strict
                        : FusionMode::Paper;
    c.disable_orthogonal = geti("disable_orthogonal", 0) != 0;
    c.freeze_alpha_beta = geti("freeze_alpha_beta", 0) != 0;
    c.use_depth = geti("use_depth", 1) != 0;
    c.use_tir = geti("use_tir", 1) != 0;
    c.loss.lambda_giou = getd("lambda_giou", c.loss.lambda_giou);
    c.loss.lambda_l1 = getd("lambda_l1", c.loss.lambda_l1);
    c.loss.focal_alpha = getd("focal_alpha", c.loss.focal_alpha);
    c.loss.focal_gamma = getd("focal_gamma", c.loss.focal_gamma);
    c.loss.focal_neg_exponent = getd("focal_neg_exponent", c.loss.focal_neg_exponent);

    TrackerModel m = TrackerModel::create(c, 0);
    m.epoch = epoch;
    m.adam_step = adam_step;

    in.clear();
    in.seekg(tensors_start);
    std::set<std::string> seen;
    bool ended = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "end") {
            ended = true;
            break;
        }
        if (tag == "tensor") {
            std::string name;
            int frozen, rows, cols;
            if (!(ss >> name >> frozen >> rows >> cols))
                fail(ErrorCode::state, "malformed tensor header in '" + path + "'");
            if (!m.has(name))
                fail(ErrorCode::state, "checkpoint tensor '" + name + "' is not a model parameter");
            Param& p = m.at(name);
            if (p.value.rows != rows || p.value.cols != cols)
                fail(ErrorCode::state, "tensor '" + name + "' is " + std::to_string(rows) + "x" +
                                           std::to_string(cols) + ", model wants " +
                                           std::to_string(p.value.rows) + "x" +
                                           std::to_string(p.value.cols));
            std::vector<double> vals = parse_values(in, p.value.size(), path);
            std::copy(vals.begin(), vals.end(), p.value.d.begin());
            p.frozen = frozen != 0;
            seen.insert(name);
        } else if (tag == "adam") {
            std::string name;
            ss >> name;
            if (!m.has(name))
                fail(ErrorCode::state, "optimizer state for unknown tensor '" + name + "'");
            Param& p = m.at(name);
            p.adam_m = Mat(p.value.rows, p.value.cols);
            p.adam_v = Mat(p.value.rows, p.value.cols);
            std::vector<double> mv = parse_values(in, p.value.size(), path);
            std::copy(mv.begin(), mv.end(), p.adam_m.d.begin());
            std::vector<double> vv = parse_values(in, p.value.size(), path);
            std::copy(vv.begin(), vv.end(), p.adam_v.d.begin());
        } else {
            fail(ErrorCode::state, "unexpected line in checkpoint '" + path + "': " + tag);
        }
    }
    if (!ended) fail(ErrorCode::state, "checkpoint '" + path + "' is missing its end marker");
    if (seen.size() != m.num_params())
        fail(ErrorCode::state, "checkpoint '" + path + "' covers " +
                                   std::to_string(seen.size()) + " of " +
                                   std::to_string(m.num_params()) + " parameters");
    return m;
}

}  // namespace rdt
