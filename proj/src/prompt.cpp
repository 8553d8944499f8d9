#include "rdt/prompt.hpp"

#include <cmath>
#include <string>

#include "rdt/error.hpp"

namespace rdt {

void PromptBlockParams::init(int embed_dim, int reduction, Rng& rng) {
    if (reduction < 1 || embed_dim % reduction != 0)
        fail(ErrorCode::config, "reduction ratio " + std::to_string(reduction) +
                                    " must divide embed_dim " + std::to_string(embed_dim));
    int inner = embed_dim / reduction;
    double s_down = 1.0 / std::sqrt(static_cast<double>(embed_dim));
    double s_up = 1.0 / std::sqrt(static_cast<double>(inner));
    down_h_w = rng.normal_mat(inner, embed_dim, s_down);
    down_h_b = Mat(inner, 1);
    down_p_w = rng.normal_mat(inner, embed_dim, s_down);
    down_p_b = Mat(inner, 1);
    up_w = rng.normal_mat(embed_dim, inner, s_up);
    up_b = Mat(embed_dim, 1);
}

// softmax over the columns of one region, per row, scaled by lambda
static int region_fovea(Graph& g, int a, int lambda, int c0, int len) {
    int s = g.slice_cols(a, c0, len);
    int C = g.val(s).rows;
    int m = g.row_max_detached(s);
    int e = g.exp_(g.sub(s, g.bcast_across_cols(m, len)));
    int denom = g.rowsum(e);  // C x 1
    int w = g.div(e, g.bcast_across_cols(denom, len));
    // expand the 1x1 lambda to C x len
    int lam_cxn = g.bcast_across_cols(g.transpose(g.bcast_across_cols(lambda, C)), len);
    int weights = g.mul(w, lam_cxn);
    return g.mul(s, weights);
}

int fovea_graph(Graph& g, int a, int lambda, int n_template, int n_search) {
    const Mat& v = g.val(a);
    if (v.cols != n_template + n_search)
        fail(ErrorCode::shape, "fovea input has " + std::to_string(v.cols) +
                                   " columns, layout declares " +
                                   std::to_string(n_template + n_search));
    int t = region_fovea(g, a, lambda, 0, n_template);
    int s = region_fovea(g, a, lambda, n_template, n_search);
    return g.concat_cols({t, s});
}

Mat fovea(const Mat& a, double lambda, int n_template, int n_search) {
    Graph g;
    int lam = g.leaf(Mat(1, 1, lambda), false);
    return g.val(fovea_graph(g, g.leaf(a, false), lam, n_template, n_search));
}

static int conv1x1(Graph& g, int w, int b, int x) {
    return g.add(g.matmul(w, x), g.bcast_across_cols(b, g.val(x).cols));
}

int prompt_block_graph(Graph& g, int h_prev, int p_prev, const PromptIds& ids, int n_template,
                       int n_search) {
    const Mat& hv = g.val(h_prev);
    const Mat& pv = g.val(p_prev);
    if (hv.rows != pv.rows || hv.cols != pv.cols)
        fail(ErrorCode::shape, "prompt block inputs differ: " + std::to_string(hv.rows) + "x" +
                                   std::to_string(hv.cols) + " vs " + std::to_string(pv.rows) +
                                   "x" + std::to_string(pv.cols));
    int ah = fovea_graph(g, conv1x1(g, ids.down_h_w, ids.down_h_b, h_prev), ids.lambda,
                         n_template, n_search);
    int ap = conv1x1(g, ids.down_p_w, ids.down_p_b, p_prev);
    return conv1x1(g, ids.up_w, ids.up_b, g.add(ah, ap));
}

static PromptIds leaf_ids(Graph& g, const PromptBlockParams& p) {
    PromptIds ids;
    ids.down_h_w = g.leaf(p.down_h_w, false);
    ids.down_h_b = g.leaf(p.down_h_b, false);
    ids.down_p_w = g.leaf(p.down_p_w, false);
    ids.down_p_b = g.leaf(p.down_p_b, false);
    ids.up_w = g.leaf(p.up_w, false);
    ids.up_b = g.leaf(p.up_b, false);
    ids.lambda = g.leaf(Mat(1, 1, p.lambda), false);
    return ids;
}

Mat prompt_block(const Mat& h_prev, const Mat& p_prev, const PromptBlockParams& params,
                 int n_template, int n_search) {
    Graph g;
    PromptIds ids = leaf_ids(g, params);
    return g.val(prompt_block_graph(g, g.leaf(h_prev, false), g.leaf(p_prev, false), ids,
                                    n_template, n_search));
}

Mat initial_prompt(const Mat& t_rgb, const Mat& t_dtir, const PromptBlockParams& params,
                   int n_template, int n_search) {
    return prompt_block(t_rgb, t_dtir, params, n_template, n_search);
}

}  // namespace rdt
