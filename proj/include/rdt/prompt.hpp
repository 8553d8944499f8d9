#pragma once

#include "rdt/graph.hpp"
#include "rdt/mat.hpp"

namespace rdt {

// One prompt-generation block: channel down-projections of the backbone
// stream and of the running prompt, a lambda-scaled spatial softmax
// (fovea) on the backbone branch, and an up-projection back to C channels.
struct PromptBlockParams {
    Mat down_h_w, down_h_b;  // (C/r) x C, (C/r) x 1
    Mat down_p_w, down_p_b;
    Mat up_w, up_b;          // C x (C/r), C x 1
    double lambda = 1.0;     // smoothing scale, fixed hyperparameter
    int layer_index = 0;

    void init(int embed_dim, int reduction, Rng& rng);
};

struct PromptIds {
    int down_h_w = -1, down_h_b = -1;
    int down_p_w = -1, down_p_b = -1;
    int up_w = -1, up_b = -1;
    int lambda = -1;  // 1x1 leaf; kept constant during training
};

// Spatial softmax scaled by lambda, applied to each channel independently
// and to the template / search column blocks separately; returns
// a ⊙ weights, where weights over each region sum to lambda per channel.
int fovea_graph(Graph& g, int a, int lambda, int n_template, int n_search);
Mat fovea(const Mat& a, double lambda, int n_template, int n_search);

// P^l = up( fovea(down_h(h)) + down_p(p) ); the initial prompt is the same
// map applied to (RGB tokens, fused auxiliary tokens).
int prompt_block_graph(Graph& g, int h_prev, int p_prev, const PromptIds& ids, int n_template,
                       int n_search);
Mat prompt_block(const Mat& h_prev, const Mat& p_prev, const PromptBlockParams& params,
                 int n_template, int n_search);
Mat initial_prompt(const Mat& t_rgb, const Mat& t_dtir, const PromptBlockParams& params,
                   int n_template, int n_search);

}  // namespace rdt
