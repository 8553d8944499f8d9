#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "rdt/box.hpp"
#include "rdt/data_model.hpp"

namespace rdt {

double iou(const BoundingBox& a, const BoundingBox& b);
double giou(const BoundingBox& a, const BoundingBox& b);
double center_distance(const BoundingBox& a, const BoundingBox& b);

struct Curve {
    std::vector<double> thresholds;
    std::vector<double> values;
};

// fraction of errors <= t for t = 0, 1, ..., 50 pixels
Curve precision_curve(const std::vector<double>& errors);
// fraction of overlaps strictly greater than t for t = 0.00, 0.05, ..., 1.00;
// second member is the arithmetic mean of the 21 curve values
std::pair<Curve, double> success_auc(const std::vector<double>& overlaps);

// annotations of one sequence, without the pixel data
struct GroundTruth {
    std::string name;
    int length = 0;
    std::map<int, BoundingBox> boxes;
};
GroundTruth ground_truth_of(const Sequence& seq);

struct SequencePrediction {
    std::string name;
    std::vector<BoundingBox> boxes;  // one per frame
};

struct EvalResult {
    std::string sequence;
    std::vector<double> per_frame_center_error;  // annotated frames, ascending index
    std::vector<double> per_frame_overlap;
    Curve precision;
    Curve success;
    double dp20 = 0.0;
    double auc = 0.0;
};

struct OpeResult {
    std::vector<EvalResult> per_sequence;
    double aggregate_dp20 = 0.0;  // mean of per-sequence values (sequence-balanced)
    double aggregate_auc = 0.0;
};

// One-pass evaluation: every prediction list is scored against the ground
// truth of the same name on its annotated frames (frame 0 included).
OpeResult evaluate_ope(const std::vector<SequencePrediction>& predictions,
                       const std::vector<GroundTruth>& truth);

// shortest decimal representation that round-trips the double
std::string format_double(double v);

void write_curve_csv(const Curve& curve, const std::string& path);
// rows `sequence,dp20,auc`, final row AGGREGATE
void write_summary_csv(const OpeResult& result, const std::string& path);

}  // namespace rdt
