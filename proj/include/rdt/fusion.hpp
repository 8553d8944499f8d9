#pragma once

#include <utility>

#include "rdt/graph.hpp"
#include "rdt/tokenizer.hpp"

namespace rdt {

enum class Region { Template, Search };

// Spatial view of one region's tokens: C x (h*h) values on an h x h grid.
// Token order is row-major over the grid, so the reshape is layout-free.
struct FeatureMap {
    Mat data;  // C x (h*h)
    int h = 0;
    Region region = Region::Template;
    Modality modality = Modality::D;
};

enum class FusionMode { Paper, Strict };

// Depth/TIR fusion parameters: per-modality 1x1 convolutions, the mutual
// orthogonal-projection scalars, and the 2C->C merge convolution.
// `Paper` mode divides the projection by (norm + eps), `Strict` by
// (norm^2 + eps), the exact projection.
struct FusionParams {
    Mat conv_d_w, conv_d_b;        // C x C, C x 1
    Mat conv_tir_w, conv_tir_b;    // C x C, C x 1
    Mat conv_fuse_w, conv_fuse_b;  // C x 2C, C x 1
    double alpha = 1.0;
    double beta = 1.0;
    double epsilon = 1e-6;  // fixed, never trained
    FusionMode mode = FusionMode::Paper;

    void init(int embed_dim, Rng& rng);
};

// Graph node ids of the trainable fusion parameters.
struct FusionIds {
    int conv_d_w = -1, conv_d_b = -1;
    int conv_tir_w = -1, conv_tir_b = -1;
    int conv_fuse_w = -1, conv_fuse_b = -1;
    int alpha = -1, beta = -1;  // 1x1 leaves
};

std::pair<FeatureMap, FeatureMap> tokens_to_maps(const TokenSet& tokens);
TokenSet maps_to_tokens(const FeatureMap& template_map, const FeatureMap& search_map,
                        Modality modality);

// Mutual orthogonal projection, simultaneous semantics: both outputs are
// computed from the original inputs. The inner product and norm run over the
// channel axis independently at every spatial location (matrix column).
std::pair<int, int> orthogonal_project_graph(Graph& g, int f_d, int f_tir, int alpha,
                                             int beta, double epsilon, FusionMode mode);

// Value-level wrapper over C x n column vectors.
std::pair<Mat, Mat> orthogonal_project(const Mat& f_d, const Mat& f_tir, double alpha,
                                       double beta, double epsilon, FusionMode mode);

// Full fusion pipeline on token matrices (template block then search block):
// per-modality 1x1 conv, orthogonal projection, channel concat, 1x1 merge.
// Every step is per-token, so the declared split/reshape into the two
// spatial maps and back is the identity on this layout.
int fuse_graph(Graph& g, int d_tokens, int tir_tokens, const FusionIds& ids, double epsilon,
               FusionMode mode, bool disable_orthogonal);

TokenSet fuse(const TokenSet& d_tokens, const TokenSet& tir_tokens, const FusionParams& params,
              bool disable_orthogonal = false);

}  // namespace rdt
