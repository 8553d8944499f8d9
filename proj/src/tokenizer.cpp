#include "rdt/tokenizer.hpp"

#include <string>

#include "rdt/error.hpp"

namespace rdt {

void PatchEmbedConfig::validate() const {
    if (patch_size < 1 || embed_dim < 1)
        fail(ErrorCode::config, "patch_size and embed_dim must be positive");
    if (template_size % patch_size != 0)
        fail(ErrorCode::config, "template_size " + std::to_string(template_size) +
                                    " not divisible by patch_size " + std::to_string(patch_size));
    if (search_size % patch_size != 0)
        fail(ErrorCode::config, "search_size " + std::to_string(search_size) +
                                    " not divisible by patch_size " + std::to_string(patch_size));
}

void PatchEmbedParams::init(const PatchEmbedConfig& cfg, Rng& rng) {
    double scale = 1.0 / std::sqrt(static_cast<double>(cfg.patch_dim()));
    weight = rng.normal_mat(cfg.embed_dim, cfg.patch_dim(), scale);
    bias = Mat(cfg.embed_dim, 1);
    pos_template = rng.normal_mat(cfg.embed_dim, cfg.n_template(), 0.02);
    pos_search = rng.normal_mat(cfg.embed_dim, cfg.n_search(), 0.02);
}

Image to_three_channel(const Image& img) {
    if (img.ch == 3) return img;
    if (img.ch != 1) fail(ErrorCode::shape, "expected 1 or 3 channels, got " + std::to_string(img.ch));
    Image out(3, img.h, img.w);
    for (int c = 0; c < 3; c++)
        for (int y = 0; y < img.h; y++)
            for (int x = 0; x < img.w; x++) out.at(c, y, x) = img.at(0, y, x);
    return out;
}

Mat patch_matrix(const Image& img, int patch_size) {
    if (img.ch != 3) fail(ErrorCode::shape, "patch_matrix expects a 3-channel image");
    if (img.h % patch_size != 0 || img.w % patch_size != 0)
        fail(ErrorCode::shape, "image " + std::to_string(img.w) + "x" + std::to_string(img.h) +
                                   " not divisible into " + std::to_string(patch_size) +
                                   "px patches");
    int gh = img.h / patch_size, gw = img.w / patch_size;
    Mat m(3 * patch_size * patch_size, gh * gw);
    for (int gy = 0; gy < gh; gy++)
        for (int gx = 0; gx < gw; gx++) {
            int col = gy * gw + gx;
            int row = 0;
            for (int c = 0; c < 3; c++)
                for (int py = 0; py < patch_size; py++)
                    for (int px = 0; px < patch_size; px++)
                        m.at(row++, col) =
                            img.at(c, gy * patch_size + py, gx * patch_size + px);
        }
    return m;
}

int embed_tokens(Graph& g, const PatchEmbedIds& ids, const Image& template_crop,
                 const Image& search_crop, const PatchEmbedConfig& cfg) {
    cfg.validate();
    if (template_crop.h != cfg.template_size || template_crop.w != cfg.template_size)
        fail(ErrorCode::shape, "template crop is " + std::to_string(template_crop.w) + "x" +
                                   std::to_string(template_crop.h) + ", config wants " +
                                   std::to_string(cfg.template_size) + "x" +
                                   std::to_string(cfg.template_size));
    if (search_crop.h != cfg.search_size || search_crop.w != cfg.search_size)
        fail(ErrorCode::shape, "search crop is " + std::to_string(search_crop.w) + "x" +
                                   std::to_string(search_crop.h) + ", config wants " +
                                   std::to_string(cfg.search_size) + "x" +
                                   std::to_string(cfg.search_size));

    int pz = g.leaf(patch_matrix(template_crop, cfg.patch_size), false);
    int px = g.leaf(patch_matrix(search_crop, cfg.patch_size), false);
    int tz = g.add(g.matmul(ids.weight, pz),
                   g.bcast_across_cols(ids.bias, cfg.n_template()));
    int tx = g.add(g.matmul(ids.weight, px),
                   g.bcast_across_cols(ids.bias, cfg.n_search()));
    tz = g.add(tz, ids.pos_template);
    tx = g.add(tx, ids.pos_search);
    return g.concat_cols({tz, tx});
}

TokenSet embed(const PatchEmbedParams& params, const Image& template_crop,
               const Image& search_crop, const PatchEmbedConfig& cfg, Modality modality) {
    Graph g;
    PatchEmbedIds ids;
    ids.weight = g.leaf(params.weight, false);
    ids.bias = g.leaf(params.bias, false);
    ids.pos_template = g.leaf(params.pos_template, false);
    ids.pos_search = g.leaf(params.pos_search, false);
    int t = embed_tokens(g, ids, template_crop, search_crop, cfg);
    TokenSet out;
    out.tokens = g.val(t);
    out.modality = modality;
    out.n_template = cfg.n_template();
    out.n_search = cfg.n_search();
    return out;
}

}  // namespace rdt
