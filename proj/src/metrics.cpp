#include "rdt/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "rdt/error.hpp"

namespace rdt {

namespace {

// Area from the same corner arithmetic the intersection uses, so identical
// boxes make intersection == union exactly and IoU stays within [0, 1].
double corner_area(const BoundingBox& b) {
    return (b.x2() - b.x) * (b.y2() - b.y);
}

}  // namespace

double iou(const BoundingBox& a, const BoundingBox& b) {
    double inter = intersection_area(a, b);
    double uni = corner_area(a) + corner_area(b) - inter;
    return uni <= 0.0 ? 0.0 : inter / uni;
}

double giou(const BoundingBox& a, const BoundingBox& b) {
    double inter = intersection_area(a, b);
    double uni = corner_area(a) + corner_area(b) - inter;
    double ex = std::max(a.x2(), b.x2()) - std::min(a.x, b.x);
    double ey = std::max(a.y2(), b.y2()) - std::min(a.y, b.y);
    double enclose = ex * ey;
    if (uni <= 0.0 || enclose <= 0.0) return 0.0;
    return inter / uni - (enclose - uni) / enclose;
}

double center_distance(const BoundingBox& a, const BoundingBox& b) {
    return std::hypot(a.cx() - b.cx(), a.cy() - b.cy());
}

Curve precision_curve(const std::vector<double>& errors) {
    if (errors.empty()) fail(ErrorCode::args, "precision curve needs at least one frame");
    Curve c;
    for (int t = 0; t <= 50; t++) {
        int hit = 0;
        for (double e : errors)
            if (e <= t) hit++;
        c.thresholds.push_back(t);
        c.values.push_back(static_cast<double>(hit) / errors.size());
    }
    return c;
}

std::pair<Curve, double> success_auc(const std::vector<double>& overlaps) {
    if (overlaps.empty()) fail(ErrorCode::args, "success curve needs at least one frame");
    Curve c;
    double sum = 0.0;
    for (int i = 0; i <= 20; i++) {
        double t = i / 20.0;
        int hit = 0;
        for (double o : overlaps)
            if (o > t) hit++;  // "exceeds": strictly greater
        double v = static_cast<double>(hit) / overlaps.size();
        c.thresholds.push_back(t);
        c.values.push_back(v);
        sum += v;
    }
    return {c, sum / 21.0};
}

GroundTruth ground_truth_of(const Sequence& seq) {
    GroundTruth g;
    g.name = seq.name;
    g.length = seq.length();
    g.boxes = seq.annotations;
    return g;
}

OpeResult evaluate_ope(const std::vector<SequencePrediction>& predictions,
                       const std::vector<GroundTruth>& truth) {
    if (predictions.empty()) fail(ErrorCode::args, "nothing to evaluate");
    std::map<std::string, const GroundTruth*> by_name;
    for (const GroundTruth& g : truth) by_name[g.name] = &g;

    OpeResult out;
    for (const SequencePrediction& pred : predictions) {
        auto it = by_name.find(pred.name);
        if (it == by_name.end())
            fail(ErrorCode::eval, "no ground truth for sequence '" + pred.name + "'");
        const GroundTruth& gt = *it->second;
        if (static_cast<int>(pred.boxes.size()) != gt.length)
            fail(ErrorCode::eval, "sequence '" + pred.name + "': " +
                                      std::to_string(pred.boxes.size()) + " predictions for " +
                                      std::to_string(gt.length) + " frames");
        EvalResult r;
        r.sequence = pred.name;
        for (const auto& [t, box] : gt.boxes) {
            if (t < 0 || t >= gt.length || !box.valid()) continue;
            r.per_frame_center_error.push_back(center_distance(pred.boxes[t], box));
            r.per_frame_overlap.push_back(iou(pred.boxes[t], box));
        }
        if (r.per_frame_center_error.empty())
            fail(ErrorCode::eval, "sequence '" + pred.name + "' has no annotated frames");
        r.precision = precision_curve(r.per_frame_center_error);
        r.dp20 = r.precision.values[20];
        auto [curve, auc] = success_auc(r.per_frame_overlap);
        r.success = curve;
        r.auc = auc;
        out.per_sequence.push_back(std::move(r));
    }
    for (const EvalResult& r : out.per_sequence) {
        out.aggregate_dp20 += r.dp20;
        out.aggregate_auc += r.auc;
    }
    out.aggregate_dp20 /= out.per_sequence.size();
    out.aggregate_auc /= out.per_sequence.size();
    return out;
}

std::string format_double(double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, end);
}

void write_curve_csv(const Curve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::io, "cannot write '" + path + "'");
    out << "threshold,value\n";
    for (size_t i = 0; i < curve.thresholds.size(); i++)
        out << format_double(curve.thresholds[i]) << "," << format_double(curve.values[i])
            << "\n";
    if (!out) fail(ErrorCode::io, "cannot write '" + path + "'");
}

void write_summary_csv(const OpeResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::io, "cannot write '" + path + "'");
    out << "sequence,dp20,auc\n";
    for (const EvalResult& r : result.per_sequence)
        out << r.sequence << "," << format_double(r.dp20) << "," << format_double(r.auc)
            << "\n";
    out << "AGGREGATE," << format_double(result.aggregate_dp20) << ","
        << format_double(result.aggregate_auc) << "\n";
    if (!out) fail(ErrorCode::io, "cannot write '" + path + "'");
}

}  // namespace rdt
