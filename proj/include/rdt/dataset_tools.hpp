#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rdt/data_model.hpp"
#include "rdt/mat.hpp"

namespace rdt {

// clustering feature of one frame: 16x16 area-averaged grayscale, flattened
struct FrameDescriptor {
    int frame_index = 0;
    std::vector<double> feature;
};
FrameDescriptor frame_descriptor(const Image& rgb, int frame_index);

struct FrameSelection {
    std::vector<int> frames;  // strictly increasing
    int collapsed = 0;        // clusters whose nearest frame duplicated another's
};

// k-means (k-means++ seeding, max 300 iterations, tolerance 1e-6) over frame
// descriptors; picks the frame nearest each centroid, ties to the lowest
// index, result sorted ascending.
FrameSelection select_representative_frames(const Sequence& seq, int k, uint64_t seed);

// 3x3 homogeneous map, thermal pixel -> RGB pixel, bottom-right entry 1
struct AlignmentMap {
    Mat matrix;              // 3x3
    double rms = 0.0;        // reprojection error of the fit, pixels
    double condition = 0.0;  // of the solved linear system
    bool affine = false;     // fitted with the affine fallback
};

struct PointPair {
    double tx = 0, ty = 0;  // thermal
    double rx = 0, ry = 0;  // rgb
};

// Normalized-DLT homography (or 6-DoF affine fit when `affine` is set),
// least squares over all correspondences.
AlignmentMap estimate_alignment(const std::vector<PointPair>& points, bool affine = false);

// map a thermal-image point through the alignment
void map_point(const AlignmentMap& map, double tx, double ty, double& rx, double& ry);

// Inverse-warp with bilinear sampling; pixels that fall outside the source
// are zero.
Image apply_alignment(const AlignmentMap& map, const Image& img, int out_h, int out_w);

// nine whitespace-separated numbers, row-major
void save_alignment(const AlignmentMap& map, const std::string& path);
AlignmentMap load_alignment(const std::string& path);

}  // namespace rdt
