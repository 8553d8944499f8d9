// Acceptance suite: one check per release criterion, each printing a single
// [PASS]/[FAIL]/[SKIP] line with its measurement and runtime budget.
// Run all with no arguments or a single one with --criterion N.
#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rdt/data_model.hpp"
#include "rdt/dataset_tools.hpp"
#include "rdt/error.hpp"
#include "rdt/experiment.hpp"
#include "rdt/fusion.hpp"
#include "rdt/graph.hpp"
#include "rdt/metrics.hpp"
#include "rdt/tracker.hpp"

using namespace rdt;

namespace {

struct Outcome {
    bool pass = false;
    bool skip = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

// ---------------------------------------------------------------- criterion 1

Outcome criterion1() {
    Outcome o;
    o.pass = true;
    o.skip = true;
    o.detail =
        "published benchmark numbers (AUC 0.752 / DP 0.792 and the ablation tables) are out of "
        "scope at desk scale: they need the unreleased RGBDT500 recordings and pretrained "
        "foundation weights; criteria 2-9 check the properties instead";
    return o;
}

// ---------------------------------------------------------------- criterion 2
// strict mode, alpha = 1: projected depth must be orthogonal to the original
// thermal vector, normalized inner product < 1e-5 for 1000 random C=64 columns

Outcome criterion2() {
    const int C = 64, N = 1000;
    Rng rng(2024);
    Mat d(C, N), t(C, N);
    for (auto& v : d.d) v = rng.uniform(-1.0, 1.0);
    for (auto& v : t.d) v = rng.uniform(-1.0, 1.0);

    auto [pd, pt] = orthogonal_project(d, t, 1.0, 1.0, 1e-6, FusionMode::Strict);

    double worst = 0.0;
    for (int j = 0; j < N; j++) {
        double dot = 0, npd = 0, nt = 0;
        for (int i = 0; i < C; i++) {
            dot += pd.at(i, j) * t.at(i, j);
            npd += pd.at(i, j) * pd.at(i, j);
            nt += t.at(i, j) * t.at(i, j);
        }
        double cosine = std::abs(dot) / (std::sqrt(npd) * std::sqrt(nt) + 1e-6);
        worst = std::max(worst, cosine);
    }
    Outcome o;
    o.pass = worst < 1e-5;
    o.detail = "worst normalized inner product " + fmt(worst) + " over " + std::to_string(N) +
               " random C=" + std::to_string(C) + " vectors (limit 1e-5)";
    return o;
}

// ---------------------------------------------------------------- criterion 3
// analytic gradients vs central finite differences for every parameter group
// of the full tiny model (L=2, C=16, template 16, search 32), step 1e-6

ModelConfig tiny16_config() {
    ModelConfig cfg;
    cfg.patch_size = 8;
    cfg.embed_dim = 16;
    cfg.template_size = 16;
    cfg.search_size = 32;
    cfg.num_layers = 2;
    cfg.num_heads = 2;
    cfg.ffn_ratio = 2;
    cfg.prompt_reduction = 4;
    return cfg;
}

CropPair random_crops(const ModelConfig& cfg, Rng& rng) {
    auto rnd = [&](int ch, int side) {
        Image img(ch, side, side);
        for (auto& v : img.d) v = rng.uniform();
        return img;
    };
    CropPair c;
    c.rgb_template = rnd(3, cfg.template_size);
    c.rgb_search = rnd(3, cfg.search_size);
    c.d_template = rnd(3, cfg.template_size);
    c.d_search = rnd(3, cfg.search_size);
    c.tir_template = rnd(3, cfg.template_size);
    c.tir_search = rnd(3, cfg.search_size);
    return c;
}

Outcome criterion3() {
    ModelConfig cfg = tiny16_config();
    TrackerModel model = TrackerModel::create(cfg, 42);
    for (size_t i = 0; i < model.num_params(); i++) model.param(i).frozen = false;

    Rng rng(7);
    CropPair crops = random_crops(cfg, rng);
    BoundingBox gt{10, 8, 12, 9};

    auto loss_value = [&]() {
        Graph g;
        std::vector<int> leaves = model.make_leaves(g, false);
        ForwardOut f = model.forward(g, leaves, crops);
        LossOut l = build_loss(g, f.head, gt, cfg);
        return g.val(l.total).at(0, 0);
    };

    // one backward pass for all analytic gradients
    Graph g;
    std::vector<int> leaves = model.make_leaves(g, true);
    ForwardOut f = model.forward(g, leaves, crops);
    LossOut l = build_loss(g, f.head, gt, cfg);
    g.backward(l.total);

    const double h = 1e-6;
    double worst = 0.0;
    std::string worst_group;
    int probes = 0;
    for (size_t i = 0; i < model.num_params(); i++) {
        Param& p = model.param(i);
        const Mat& grad = g.grad(leaves[i]);
        size_t n = p.value.d.size();
        size_t stride = std::max<size_t>(1, n / 4);
        for (size_t j = 0; j < n; j += stride) {
            double keep = p.value.d[j];
            p.value.d[j] = keep + h;
            double up = loss_value();
            p.value.d[j] = keep - h;
            double down = loss_value();
            p.value.d[j] = keep;
            double fd = (up - down) / (2.0 * h);
            double an = grad.d[j];
            double rel = std::abs(fd - an) / std::max({1e-6, std::abs(fd), std::abs(an)});
            probes++;
            if (rel > worst) {
                worst = rel;
                worst_group = p.name;
            }
        }
    }
    Outcome o;
    o.pass = worst < 1e-3;
    o.detail = "max relative error " + fmt(worst) + " (limit 1e-3), worst group " + worst_group +
               ", " + std::to_string(probes) + " probes over " +
               std::to_string(model.num_params()) + " parameter groups";
    return o;
}

// ---------------------------------------------------------------- criterion 4
// 50 optimizer steps: frozen tensors bitwise unchanged; fusion and every
// prompt block each see at least one changed parameter

Outcome criterion4() {
    ModelConfig cfg = tiny16_config();
    TrackerModel model = TrackerModel::create(cfg, 11);

    SynthProfile prof;
    prof.width = 64;
    prof.height = 64;
    prof.length = 12;
    std::vector<Sequence> train_set;
    for (int i = 0; i < 2; i++) {
        Sequence s = generate_synthetic_sequence(prof.length, degradation_for(prof, i),
                                                 300 + static_cast<uint64_t>(i));
        s.name = "t" + std::to_string(i);
        train_set.push_back(std::move(s));
    }

    std::vector<Mat> before;
    for (size_t i = 0; i < model.num_params(); i++) before.push_back(model.param(i).value);

    TrainConfig tc;
    tc.epochs = 1;
    tc.lr_drop_epoch = 0;
    tc.samples_per_epoch = 50;
    tc.batch_size = 1;
    tc.seed = 5;
    train(model, train_set, tc);

    int frozen_total = 0, frozen_touched = 0, fusion_changed = 0;
    std::map<int, int> prompt_changed;
    for (int lvl = 0; lvl < cfg.num_layers; lvl++) prompt_changed[lvl] = 0;
    for (size_t i = 0; i < model.num_params(); i++) {
        const Param& p = model.param(i);
        bool same = std::memcmp(p.value.d.data(), before[i].d.data(),
                                p.value.d.size() * sizeof(double)) == 0;
        if (p.frozen) {
            frozen_total++;
            if (!same) frozen_touched++;
        } else if (!same) {
            if (p.name.rfind("fusion.", 0) == 0) fusion_changed++;
            for (int lvl = 0; lvl < cfg.num_layers; lvl++)
                if (p.name.rfind("prompt" + std::to_string(lvl) + ".", 0) == 0)
                    prompt_changed[lvl]++;
        }
    }
    bool prompts_ok = true;
    for (auto& [lvl, cnt] : prompt_changed) prompts_ok = prompts_ok && cnt >= 1;

    Outcome o;
    o.pass = frozen_touched == 0 && fusion_changed >= 1 && prompts_ok;
    std::ostringstream d;
    d << model.adam_step << " optimizer steps; " << frozen_touched << "/" << frozen_total
      << " frozen tensors touched (must be 0); changed " << fusion_changed
      << " fusion tensors and per-prompt-block";
    for (auto& [lvl, cnt] : prompt_changed) d << " " << cnt;
    o.detail = d.str();
    return o;
}

// ---------------------------------------------------------------- criterion 5
// ten hand-made frames: library DP/AUC must equal an independent brute-force
// recomputation to 1e-12, with the analytic IoU/GIoU/AUC spot values

double bf_iou(const BoundingBox& a, const BoundingBox& b) {
    double ax2 = a.x + a.w, ay2 = a.y + a.h, bx2 = b.x + b.w, by2 = b.y + b.h;
    double iw = std::min(ax2, bx2) - std::max(a.x, b.x);
    double ih = std::min(ay2, by2) - std::max(a.y, b.y);
    double inter = (iw > 0 && ih > 0) ? iw * ih : 0.0;
    double uni = (ax2 - a.x) * (ay2 - a.y) + (bx2 - b.x) * (by2 - b.y) - inter;
    return uni <= 0 ? 0.0 : inter / uni;
}

double bf_center_err(const BoundingBox& a, const BoundingBox& b) {
    double dx = (a.x + a.w / 2) - (b.x + b.w / 2);
    double dy = (a.y + a.h / 2) - (b.y + b.h / 2);
    return std::sqrt(dx * dx + dy * dy);
}

double bf_dp20(const std::vector<double>& errs) {
    int hit = 0;
    for (double e : errs)
        if (e <= 20.0) hit++;
    return static_cast<double>(hit) / errs.size();
}

double bf_auc(const std::vector<double>& ovs) {
    double sum = 0;
    for (int i = 0; i <= 20; i++) {
        double t = i / 20.0;
        int hit = 0;
        for (double o : ovs)
            if (o > t) hit++;
        sum += static_cast<double>(hit) / ovs.size();
    }
    return sum / 21.0;
}

Outcome criterion5() {
    // frame pairs covering identity, the analytic overlaps, the inclusive
    // 20px distance boundary, containment, touching edges and messy values
    std::vector<BoundingBox> gt = {
        {10.5, 20.25, 30, 40}, {0, 0, 10, 10}, {0, 0, 10, 10}, {0, 0, 10, 10},
        {0, 0, 10, 10},        {3.7, 8.21, 12.4, 9.3}, {0, 0, 20, 20}, {0, 0, 10, 10},
        {0, 0, 8, 8},          {50, 50, 30, 30}};
    std::vector<BoundingBox> pr = {
        {10.5, 20.25, 30, 40}, {5, 0, 10, 10}, {100, 100, 10, 10}, {16, 12, 10, 10},
        {0, 0, 10, 5},         {4.1, 7.9, 11.8, 10.2}, {5, 5, 10, 10}, {10, 0, 10, 10},
        {0, 2, 8, 6},          {51, 52, 29, 31}};

    GroundTruth t1{"mixed", 10, {}};
    SequencePrediction p1{"mixed", pr};
    for (int i = 0; i < 10; i++) t1.boxes[i] = gt[i];

    GroundTruth t2{"half", 10, {}};
    SequencePrediction p2{"half", {}};
    for (int i = 0; i < 10; i++) {
        t2.boxes[i] = {0, 0, 10, 10};
        p2.boxes.push_back({0, 0, 10, 5});
    }

    OpeResult lib = evaluate_ope({p1, p2}, {t1, t2});

    // independent recomputation
    std::vector<double> e1, o1, e2, o2;
    for (int i = 0; i < 10; i++) {
        e1.push_back(bf_center_err(pr[i], gt[i]));
        o1.push_back(bf_iou(pr[i], gt[i]));
        e2.push_back(bf_center_err(p2.boxes[i], t2.boxes[i]));
        o2.push_back(bf_iou(p2.boxes[i], t2.boxes[i]));
    }
    double dp1 = bf_dp20(e1), auc1 = bf_auc(o1);
    double dp2 = bf_dp20(e2), auc2 = bf_auc(o2);
    double agg_dp = (dp1 + dp2) / 2.0, agg_auc = (auc1 + auc2) / 2.0;

    double worst = 0.0;
    auto diff = [&](double a, double b) { worst = std::max(worst, std::abs(a - b)); };
    diff(lib.per_sequence[0].dp20, dp1);
    diff(lib.per_sequence[0].auc, auc1);
    diff(lib.per_sequence[1].dp20, dp2);
    diff(lib.per_sequence[1].auc, auc2);
    diff(lib.aggregate_dp20, agg_dp);
    diff(lib.aggregate_auc, agg_auc);
    for (int i = 0; i < 10; i++) {
        diff(lib.per_sequence[0].per_frame_overlap[i], o1[i]);
        diff(lib.per_sequence[0].per_frame_center_error[i], e1[i]);
    }

    // analytic spot values
    bool spots = std::abs(iou({0, 0, 10, 10}, {5, 0, 10, 10}) - 1.0 / 3.0) <= 1e-15 &&
                 std::abs(giou({0, 0, 10, 10}, {20, 0, 10, 10}) - (-1.0 / 3.0)) <= 1e-15 &&
                 std::abs(lib.per_sequence[1].auc - 10.0 / 21.0) <= 1e-15;

    Outcome o;
    o.pass = worst <= 1e-12 && spots;
    o.detail = "max |library - brute force| " + fmt(worst) +
               " (limit 1e-12); analytic IoU 1/3, GIoU -1/3, AUC 10/21 " +
               (spots ? "hold" : "VIOLATED");
    return o;
}

// ---------------------------------------------------------------- criterion 6
// fixed synthetic benchmark: tri-modal AUC must not trail either dual-modal
// variant by more than 0.01, and full fusion must not trail the
// no-projection ablation by more than 0.01, averaged over 3 seeds

ModelConfig bench_config() {
    ModelConfig cfg;
    cfg.patch_size = 8;
    cfg.embed_dim = 32;
    cfg.template_size = 16;
    cfg.search_size = 32;
    cfg.num_layers = 2;
    cfg.num_heads = 4;
    cfg.ffn_ratio = 2;
    cfg.prompt_reduction = 4;
    return cfg;
}

// degradation rotation used by the benchmark: clean / dark RGB / dark RGB +
// flat depth / dark RGB + thermal crossover / clean. The combined spans make
// exactly one auxiliary modality the only usable one.
DegradationProfile bench_degradation(int index, int length) {
    DegradationProfile d;
    d.width = 64;
    d.height = 64;
    d.noise_rgb = 0.02;
    d.noise_depth = 0.02;
    d.noise_tir = 0.02;
    FrameSpan mid{length / 4, 3 * length / 4};
    switch (index % 5) {
        case 1: d.rgb_darken.push_back({mid, 0.1}); break;
        case 2:
            d.rgb_darken.push_back({mid, 0.1});
            d.depth_flatten.push_back(mid);
            break;
        case 3:
            d.rgb_darken.push_back({mid, 0.1});
            d.tir_crossover.push_back(mid);
            break;
        default: break;
    }
    return d;
}

std::vector<Sequence> bench_set(int count, int length, uint64_t seed_base) {
    std::vector<Sequence> out;
    for (int i = 0; i < count; i++) {
        Sequence s = generate_synthetic_sequence(length, bench_degradation(i, length),
                                                 seed_base + static_cast<uint64_t>(i));
        s.name = "s" + std::to_string(i);
        out.push_back(std::move(s));
    }
    return out;
}

double aggregate_auc_of(const TrackerModel& model, const std::vector<Sequence>& test_set) {
    std::vector<SequencePrediction> preds;
    std::vector<GroundTruth> truths;
    for (const Sequence& s : test_set) {
        preds.push_back({s.name, track_sequence(model, s)});
        truths.push_back(ground_truth_of(s));
    }
    return evaluate_ope(preds, truths).aggregate_auc;
}

// clean sequences used to pretrain the RGB backbone, mirroring the protocol
// of adapting a tracker that was trained on RGB-only data
std::vector<Sequence> clean_pretrain_set() {
    std::vector<Sequence> out;
    for (int i = 0; i < 10; i++) {
        DegradationProfile clean;
        clean.width = 64;
        clean.height = 64;
        clean.noise_rgb = 0.01;
        clean.noise_depth = 0.01;
        clean.noise_tir = 0.01;
        Sequence s = generate_synthetic_sequence(24, clean, 400 + static_cast<uint64_t>(i));
        s.name = "p" + std::to_string(i);
        out.push_back(std::move(s));
    }
    return out;
}

Outcome criterion6() {
    std::vector<Sequence> pretrain_set = clean_pretrain_set();
    std::vector<Sequence> train_set = bench_set(20, 24, 100);
    std::vector<Sequence> test_set = bench_set(5, 30, 900);

    ModelConfig base = bench_config();
    struct Variant {
        const char* name;
        bool use_d, use_t, no_proj;
        double auc_sum = 0;
    };
    Variant variants[4] = {{"tri", true, true, false},
                           {"rgb+d", true, false, false},
                           {"rgb+tir", false, true, false},
                           {"no-projection", true, true, true}};

    const int kSeeds = 3;
    for (int s = 0; s < kSeeds; s++) {
        ModelConfig rgb_cfg = base;
        rgb_cfg.use_depth = false;
        rgb_cfg.use_tir = false;
        TrackerModel backbone = TrackerModel::create(rgb_cfg, 7000 + s);
        TrainConfig pre;
        pre.epochs = 8;
        pre.samples_per_epoch = 2500;
        pre.batch_size = 8;
        pre.learning_rate = 1e-3;
        pre.lr_drop_epoch = 7;
        pre.seed = 100 + s;
        train(backbone, pretrain_set, pre);

        for (Variant& v : variants) {
            ModelConfig vc = base;
            vc.use_depth = v.use_d;
            vc.use_tir = v.use_t;
            vc.disable_orthogonal = v.no_proj;
            TrackerModel m = assemble_from_rgb(backbone, vc, 7100 + s);
            TrainConfig ad;
            ad.epochs = 4;
            ad.samples_per_epoch = 1200;
            ad.batch_size = 8;
            ad.learning_rate = 1e-3;
            ad.lr_drop_epoch = 3;
            ad.seed = 200 + s;
            train(m, train_set, ad);
            v.auc_sum += aggregate_auc_of(m, test_set);
        }
    }

    double tri = variants[0].auc_sum / kSeeds;
    double rgbd = variants[1].auc_sum / kSeeds;
    double rgbt = variants[2].auc_sum / kSeeds;
    double noproj = variants[3].auc_sum / kSeeds;

    Outcome o;
    o.pass = tri >= rgbd - 0.01 && tri >= rgbt - 0.01 && tri >= noproj - 0.01;
    o.detail = "mean AUC over 3 seeds: tri " + fmt(tri) + ", rgb+d " + fmt(rgbd) + ", rgb+tir " +
               fmt(rgbt) + ", no-projection " + fmt(noproj) +
               "; required tri >= dual - 0.01 and tri >= no-projection - 0.01";
    return o;
}

// ---------------------------------------------------------------- criterion 7
// homography recovery: 20 points with 0.2 px noise fit within 0.5 px RMS;
// a noise-free translation is recovered to 1e-9

Outcome criterion7() {
    AlignmentMap truth;
    truth.matrix = Mat(3, 3);
    double vals[9] = {1.02, 0.013, 3.0, -0.011, 0.98, -2.0, 1e-4, -5e-5, 1.0};
    for (int i = 0; i < 9; i++) truth.matrix.d[i] = vals[i];

    Rng rng(77);
    Mat noise = rng.normal_mat(2, 20, 0.2);
    std::vector<PointPair> pts;
    for (int i = 0; i < 20; i++) {
        PointPair p;
        p.tx = rng.uniform(0.0, 100.0);
        p.ty = rng.uniform(0.0, 100.0);
        map_point(truth, p.tx, p.ty, p.rx, p.ry);
        p.rx += noise.at(0, i);
        p.ry += noise.at(1, i);
        pts.push_back(p);
    }
    AlignmentMap noisy = estimate_alignment(pts);

    std::vector<PointPair> tr;
    double xs[6] = {0, 30, 60, 5, 45, 20}, ys[6] = {0, 4, 50, 33, 18, 60};
    for (int i = 0; i < 6; i++) tr.push_back({xs[i], ys[i], xs[i] + 5.0, ys[i] + 3.0});
    AlignmentMap shift = estimate_alignment(tr);
    double expect[9] = {1, 0, 5, 0, 1, 3, 0, 0, 1};
    double worst_entry = 0;
    for (int i = 0; i < 9; i++)
        worst_entry = std::max(worst_entry, std::abs(shift.matrix.d[i] - expect[i]));

    Outcome o;
    o.pass = noisy.rms <= 0.5 && worst_entry <= 1e-9;
    o.detail = "noisy fit RMS " + fmt(noisy.rms) + " px (limit 0.5); translation recovered to " +
               fmt(worst_entry) + " (limit 1e-9)";
    return o;
}

// ---------------------------------------------------------------- criterion 8
// three visually distinct segments, k=3: exactly one selected frame per
// segment for every selection seed 0..4

Outcome criterion8() {
    Sequence seq;
    seq.name = "segments";
    Rng rng(4242);
    const double levels[3] = {0.15, 0.5, 0.85};
    for (int t = 0; t < 12; t++) {
        TriModalFrame f;
        f.rgb = Image(3, 32, 32, levels[t / 4]);
        for (auto& v : f.rgb.d) v += rng.uniform(-0.01, 0.01);
        f.depth = Image(1, 32, 32, 0.5);
        f.tir = Image(1, 32, 32, 0.5);
        f.timestamp_index = t;
        seq.frames.push_back(std::move(f));
    }
    seq.annotations[0] = {1, 1, 4, 4};

    bool all_ok = true;
    std::string picks;
    for (uint64_t seed = 0; seed < 5; seed++) {
        FrameSelection sel = select_representative_frames(seq, 3, seed);
        int per[3] = {0, 0, 0};
        for (int f : sel.frames)
            if (f >= 0 && f < 12) per[f / 4]++;
        bool ok = sel.frames.size() == 3 && per[0] == 1 && per[1] == 1 && per[2] == 1 &&
                  sel.collapsed == 0;
        all_ok = all_ok && ok;
        picks += (seed ? " / " : "");
        for (size_t i = 0; i < sel.frames.size(); i++)
            picks += (i ? "," : "") + std::to_string(sel.frames[i]);
    }
    Outcome o;
    o.pass = all_ok;
    o.detail = "selections per seed 0..4: " + picks + " (segments are frames 0-3, 4-7, 8-11)";
    return o;
}

// ---------------------------------------------------------------- criterion 9
// end-to-end: pretrain the RGB backbone, adapt the tri-modal model, then
// track a held-out easy sequence with IoU >= 0.5 on at least 90% of frames

Outcome criterion9() {
    std::vector<Sequence> train_set = clean_pretrain_set();

    ModelConfig base = bench_config();
    ModelConfig rgb_cfg = base;
    rgb_cfg.use_depth = false;
    rgb_cfg.use_tir = false;
    TrackerModel backbone = TrackerModel::create(rgb_cfg, 31);
    TrainConfig pre;
    pre.epochs = 8;
    pre.samples_per_epoch = 2500;
    pre.batch_size = 8;
    pre.learning_rate = 1e-3;
    pre.lr_drop_epoch = 7;
    pre.seed = 131;
    train(backbone, train_set, pre);

    TrackerModel tri = assemble_from_rgb(backbone, base, 32);
    TrainConfig ad = pre;
    ad.epochs = 5;
    ad.samples_per_epoch = 1500;
    ad.lr_drop_epoch = 4;
    ad.seed = 132;
    train(tri, train_set, ad);

    DegradationProfile clean;
    clean.width = 64;
    clean.height = 64;
    Sequence easy = generate_synthetic_sequence(40, clean, 555);
    easy.name = "easy";
    std::vector<BoundingBox> boxes = track_sequence(tri, easy);

    int good = 0;
    for (int t = 0; t < easy.length(); t++)
        if (iou(boxes[t], easy.annotations.at(t)) >= 0.5) good++;
    double frac = static_cast<double>(good) / easy.length();

    Outcome o;
    o.pass = frac >= 0.9;
    o.detail = "IoU >= 0.5 on " + std::to_string(good) + "/" + std::to_string(easy.length()) +
               " frames (" + fmt(100 * frac) + "%, need >= 90%)";
    return o;
}

// -----------------------------------------------------------------------

struct Entry {
    int id;
    const char* title;
    double budget_seconds;
    Outcome (*fn)();
};

const Entry kEntries[] = {
    {1, "published-benchmark reproduction", 10, criterion1},
    {2, "strict-mode projection orthogonality", 1, criterion2},
    {3, "analytic gradients vs finite differences", 120, criterion3},
    {4, "freezing contract over 50 training steps", 120, criterion4},
    {5, "tracking metrics vs brute-force recomputation", 1, criterion5},
    {6, "modality and projection ablation ordering", 900, criterion6},
    {7, "alignment recovery under noise", 1, criterion7},
    {8, "representative-frame selection per segment", 5, criterion8},
    {9, "end-to-end training and tracking smoke", 600, criterion9},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; i++) {
        std::string a = argv[i];
        if (a == "--criterion" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::cerr << "usage: acceptance [--criterion N]\n";
            return 2;
        }
    }
    if (only < 0 || only > 9) {
        std::cerr << "criterion must be 1..9\n";
        return 2;
    }

    int failures = 0;
    for (const Entry& e : kEntries) {
        if (only != 0 && e.id != only) continue;
        auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = e.fn();
        } catch (const std::exception& ex) {
            o.pass = false;
            o.detail = std::string("threw: ") + ex.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                          .count();
        bool in_budget = secs <= e.budget_seconds;
        bool pass = o.pass && in_budget;
        const char* tag = o.skip ? "[SKIP]" : pass ? "[PASS]" : "[FAIL]";
        std::cout << tag << " criterion " << e.id << ": " << e.title << " -- " << o.detail;
        if (!o.skip) {
            std::ostringstream t;
            t.precision(1);
            t << std::fixed << secs;
            std::cout << " [" << t.str() << "s of " << e.budget_seconds << "s budget"
                      << (in_budget ? "" : " EXCEEDED") << "]";
        }
        std::cout << "\n";
        if (!pass && !o.skip) failures++;
    }
    return failures == 0 ? 0 : 1;
}
