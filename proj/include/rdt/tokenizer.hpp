#pragma once

#include "rdt/graph.hpp"
#include "rdt/image.hpp"
#include "rdt/mat.hpp"

namespace rdt {

enum class Modality { RGB, D, TIR, Fused };

// Geometry of the patch tokenization. Template and search crops are square;
// each is cut into non-overlapping patch_size x patch_size patches.
struct PatchEmbedConfig {
    int patch_size = 8;
    int embed_dim = 64;     // C
    int template_size = 32; // pixels per side
    int search_size = 64;

    int h_template() const { return template_size / patch_size; }
    int h_search() const { return search_size / patch_size; }
    int n_template() const { return h_template() * h_template(); }
    int n_search() const { return h_search() * h_search(); }
    int n_tokens() const { return n_template() + n_search(); }
    int patch_dim() const { return 3 * patch_size * patch_size; }

    void validate() const;  // divisibility and positivity
};

// Learned parameters of one modality's embedding: linear projection of
// flattened patches plus separate positional tables for the two regions.
struct PatchEmbedParams {
    Mat weight;        // C x 3*P*P
    Mat bias;          // C x 1
    Mat pos_template;  // C x n_template
    Mat pos_search;    // C x n_search

    void init(const PatchEmbedConfig& cfg, Rng& rng);
};

// Token matrix with the template block first, search block second.
struct TokenSet {
    Mat tokens;  // C x (n_template + n_search)
    Modality modality = Modality::RGB;
    int n_template = 0;
    int n_search = 0;
};

// Graph node ids of one modality's embedding parameters.
struct PatchEmbedIds {
    int weight = -1;
    int bias = -1;
    int pos_template = -1;
    int pos_search = -1;
};

Image to_three_channel(const Image& img);

// Flattened non-overlapping patches as columns: (3*P*P) x n_patches, patch
// scan order row-major over the grid, within-patch order channel-major.
Mat patch_matrix(const Image& img, int patch_size);

// Differentiable embedding: weight @ patches + bias, plus the positional
// table of each region, concatenated template-first.
int embed_tokens(Graph& g, const PatchEmbedIds& ids, const Image& template_crop,
                 const Image& search_crop, const PatchEmbedConfig& cfg);

// Value-level convenience wrapper around embed_tokens.
TokenSet embed(const PatchEmbedParams& params, const Image& template_crop,
               const Image& search_crop, const PatchEmbedConfig& cfg, Modality modality);

}  // namespace rdt
