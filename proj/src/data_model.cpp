#include "rdt/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rdt/error.hpp"
#include "rdt/image_io.hpp"
#include "rdt/mat.hpp"

namespace fs = std::filesystem;

namespace rdt {

double DegradationProfile::darken_factor_at(int f) const {
    for (const auto& [span, factor] : rgb_darken)
        if (span.contains(f)) return factor;
    return 1.0;
}

bool DegradationProfile::depth_flat_at(int f) const {
    for (const auto& span : depth_flatten)
        if (span.contains(f)) return true;
    return false;
}

bool DegradationProfile::tir_crossover_at(int f) const {
    for (const auto& span : tir_crossover)
        if (span.contains(f)) return true;
    return false;
}

static void validate_spans(const std::vector<FrameSpan>& spans, int length, const char* kind) {
    std::vector<FrameSpan> sorted = spans;
    std::sort(sorted.begin(), sorted.end(),
              [](const FrameSpan& a, const FrameSpan& b) { return a.begin < b.begin; });
    int prev_end = 0;
    bool first = true;
    for (const auto& s : sorted) {
        if (s.begin < 0 || s.end > length || s.begin >= s.end)
            fail(ErrorCode::config, std::string(kind) + " span [" + std::to_string(s.begin) +
                                        "," + std::to_string(s.end) +
                                        ") out of range for length " + std::to_string(length));
        if (!first && s.begin < prev_end)
            fail(ErrorCode::config, std::string(kind) + " spans overlap at frame " +
                                        std::to_string(s.begin));
        prev_end = s.end;
        first = false;
    }
}

void DegradationProfile::validate(int length) const {
    if (width < 32 || height < 32)
        fail(ErrorCode::config, "frame size must be at least 32x32");
    std::vector<FrameSpan> darken_spans;
    for (const auto& [span, factor] : rgb_darken) {
        darken_spans.push_back(span);
        if (factor < 0.0 || factor > 1.0)
            fail(ErrorCode::config, "rgb darken factor must be in [0,1]");
    }
    validate_spans(darken_spans, length, "rgb_darken");
    validate_spans(depth_flatten, length, "depth_flatten");
    validate_spans(tir_crossover, length, "tir_crossover");
    if (noise_rgb < 0 || noise_depth < 0 || noise_tir < 0)
        fail(ErrorCode::config, "noise level must be non-negative");
}

namespace {

// Pixel (ix,iy) covers the unit square [ix,ix+1) x [iy,iy+1). Returns the
// covered fraction of that square for an axis-aligned rectangle, giving
// anti-aliased edges.
double rect_coverage(const BoundingBox& b, int ix, int iy) {
    double ox = std::min(b.x2(), ix + 1.0) - std::max(b.x, static_cast<double>(ix));
    double oy = std::min(b.y2(), iy + 1.0) - std::max(b.y, static_cast<double>(iy));
    if (ox <= 0.0 || oy <= 0.0) return 0.0;
    return ox * oy;
}

struct Mover {
    double cx0, cy0, ax, ay, wx, wy, px, py;
    double w0, h0, pulse, wp, pp;

    BoundingBox box_at(int t) const {
        double w = w0 * (1.0 + pulse * std::sin(wp * t + pp));
        double h = h0 * (1.0 + pulse * std::cos(wp * t + pp));
        double cx = cx0 + ax * std::sin(wx * t + px);
        double cy = cy0 + ay * std::sin(wy * t + py);
        return {cx - w / 2.0, cy - h / 2.0, w, h};
    }
};

void draw_rect_rgb(Image& img, const BoundingBox& b, const double color_a[3],
                   const double color_b[3]) {
    int x0 = std::max(0, static_cast<int>(std::floor(b.x)));
    int y0 = std::max(0, static_cast<int>(std::floor(b.y)));
    int x1 = std::min(img.w - 1, static_cast<int>(std::ceil(b.x2())));
    int y1 = std::min(img.h - 1, static_cast<int>(std::ceil(b.y2())));
    for (int y = y0; y <= y1; y++)
        for (int x = x0; x <= x1; x++) {
            double cov = rect_coverage(b, x, y);
            if (cov <= 0.0) continue;
            // 4px checker anchored to the rectangle so texture moves with it
            int cxi = static_cast<int>(std::floor((x - b.x) / 4.0));
            int cyi = static_cast<int>(std::floor((y - b.y) / 4.0));
            const double* col = ((cxi + cyi) & 1) ? color_b : color_a;
            for (int c = 0; c < 3; c++)
                img.at(c, y, x) = (1.0 - cov) * img.at(c, y, x) + cov * col[c];
        }
}

void draw_rect_flat(Image& img, const BoundingBox& b, double value) {
    int x0 = std::max(0, static_cast<int>(std::floor(b.x)));
    int y0 = std::max(0, static_cast<int>(std::floor(b.y)));
    int x1 = std::min(img.w - 1, static_cast<int>(std::ceil(b.x2())));
    int y1 = std::min(img.h - 1, static_cast<int>(std::ceil(b.y2())));
    for (int y = y0; y <= y1; y++)
        for (int x = x0; x <= x1; x++) {
            double cov = rect_coverage(b, x, y);
            if (cov <= 0.0) continue;
            img.at(0, y, x) = (1.0 - cov) * img.at(0, y, x) + cov * value;
        }
}

void add_noise_clamp(Image& img, double sigma, Rng& rng) {
    if (sigma > 0.0)
        for (double& v : img.d) v += sigma * rng.normal();
    for (double& v : img.d) v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

}  // namespace

Sequence generate_synthetic_sequence(int length, const DegradationProfile& profile,
                                     uint64_t seed) {
    if (length < 1) fail(ErrorCode::config, "sequence length must be at least 1");
    profile.validate(length);
    const int W = profile.width, H = profile.height;
    Rng rng(seed);

    // target trajectory: two incommensurate sinusoids keep it inside margins
    Mover target;
    target.w0 = (0.11 + 0.05 * rng.uniform()) * W;
    target.h0 = (0.11 + 0.05 * rng.uniform()) * H;
    target.pulse = 0.06 + 0.04 * rng.uniform();
    target.wp = 0.05 + 0.05 * rng.uniform();
    target.pp = rng.uniform(0.0, 6.28318);
    target.cx0 = W * 0.5;
    target.cy0 = H * 0.5;
    target.ax = W * (0.20 + 0.08 * rng.uniform());
    target.ay = H * (0.20 + 0.08 * rng.uniform());
    target.wx = 0.06 + 0.06 * rng.uniform();
    target.wy = (0.06 + 0.06 * rng.uniform()) * 1.618;
    target.px = rng.uniform(0.0, 6.28318);
    target.py = rng.uniform(0.0, 6.28318);

    double tcol_a[3], tcol_b[3];
    for (int c = 0; c < 3; c++) {
        tcol_a[c] = 0.55 + 0.4 * rng.uniform();
        tcol_b[c] = std::max(0.0, tcol_a[c] - 0.25 - 0.1 * rng.uniform());
    }

    // two distractors: one shares the target palette, one does not
    Mover dist[2];
    double dcol[2][3];
    for (int k = 0; k < 2; k++) {
        dist[k].w0 = (0.08 + 0.05 * rng.uniform()) * W;
        dist[k].h0 = (0.08 + 0.05 * rng.uniform()) * H;
        dist[k].pulse = 0.0;
        dist[k].wp = 0.0;
        dist[k].pp = 0.0;
        dist[k].cx0 = W * (k == 0 ? 0.25 : 0.75);
        dist[k].cy0 = H * (k == 0 ? 0.72 : 0.28);
        dist[k].ax = W * 0.12;
        dist[k].ay = H * 0.12;
        dist[k].wx = 0.03 + 0.04 * rng.uniform();
        dist[k].wy = 0.03 + 0.04 * rng.uniform();
        dist[k].px = rng.uniform(0.0, 6.28318);
        dist[k].py = rng.uniform(0.0, 6.28318);
        for (int c = 0; c < 3; c++)
            dcol[k][c] = k == 0 ? std::min(1.0, tcol_a[c] + 0.05)
                                : 0.2 + 0.3 * rng.uniform();
    }

    double bg_base = 0.30 + 0.15 * rng.uniform();
    double bg_gx = rng.uniform(-0.1, 0.1), bg_gy = rng.uniform(-0.1, 0.1);
    double tir_bg_base = 0.18 + 0.05 * rng.uniform();
    double tir_gx = rng.uniform(-0.04, 0.04), tir_gy = rng.uniform(-0.04, 0.04);

    const double kDepthBg = 0.25, kDepthDist = 0.55, kDepthTarget = 0.85;
    const double kTirDist = 0.45, kTirTarget = 0.9;

    Sequence seq;
    for (int t = 0; t < length; t++) {
        TriModalFrame frame;
        frame.timestamp_index = t;
        frame.rgb = Image(3, H, W);
        frame.depth = Image(1, H, W);
        frame.tir = Image(1, H, W);

        for (int y = 0; y < H; y++)
            for (int x = 0; x < W; x++) {
                double u = static_cast<double>(x) / W, v = static_cast<double>(y) / H;
                double shade = bg_base + bg_gx * u + bg_gy * v +
                               0.02 * std::sin(0.55 * x) * std::sin(0.47 * y);
                for (int c = 0; c < 3; c++) frame.rgb.at(c, y, x) = shade * (0.9 + 0.05 * c);
                frame.depth.at(0, y, x) = kDepthBg;
                frame.tir.at(0, y, x) = tir_bg_base + tir_gx * u + tir_gy * v;
            }

        BoundingBox tb = target.box_at(t);
        bool flat = profile.depth_flat_at(t);
        bool crossover = profile.tir_crossover_at(t);
        for (int k = 0; k < 2; k++) {
            BoundingBox db = dist[k].box_at(t);
            double dc[3] = {dcol[k][0], dcol[k][1], dcol[k][2]};
            draw_rect_rgb(frame.rgb, db, dc, dc);
            if (!flat) draw_rect_flat(frame.depth, db, kDepthDist);
            draw_rect_flat(frame.tir, db, kTirDist);
        }
        draw_rect_rgb(frame.rgb, tb, tcol_a, tcol_b);
        if (!flat) draw_rect_flat(frame.depth, tb, kDepthTarget);
        // thermal crossover: target temperature matches the background, so
        // it is simply not rendered in TIR on those frames
        if (!crossover) draw_rect_flat(frame.tir, tb, kTirTarget);

        double factor = profile.darken_factor_at(t);
        if (factor != 1.0)
            for (double& v : frame.rgb.d) v *= factor;

        add_noise_clamp(frame.rgb, profile.noise_rgb, rng);
        add_noise_clamp(frame.depth, profile.noise_depth, rng);
        add_noise_clamp(frame.tir, profile.noise_tir, rng);

        seq.frames.push_back(std::move(frame));
        seq.annotations[t] = tb;
    }
    return seq;
}

// ---------------------------------------------------------------------------
// disk format

static std::string frame_name(int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%06d.png", i);
    return buf;
}

std::map<int, BoundingBox> parse_box_lines(const std::string& path, bool enforce_valid) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::io, "cannot open '" + path + "'");
    std::map<int, BoundingBox> boxes;
    std::string line;
    int line_no = 0;
    int next_dense = 0;
    bool saw_sparse = false, saw_dense = false;
    while (std::getline(in, line)) {
        line_no++;
        // tolerate trailing CR and blank lines
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        std::string where = path + ":" + std::to_string(line_no);
        int index;
        std::string rest;
        auto colon = line.find(':');
        if (colon != std::string::npos) {
            saw_sparse = true;
            try {
                size_t used = 0;
                index = std::stoi(line.substr(0, colon), &used);
                if (used != colon) throw std::invalid_argument("");
            } catch (const std::exception&) {
                fail(ErrorCode::parse, "bad frame index at " + where);
            }
            if (index < 0) fail(ErrorCode::parse, "negative frame index at " + where);
            rest = line.substr(colon + 1);
        } else {
            saw_dense = true;
            index = next_dense++;
            rest = line;
        }
        if (saw_sparse && saw_dense)
            fail(ErrorCode::parse, "mixed dense and indexed annotation lines in '" + path + "'");
        double vals[4];
        char trailing;
        int n = std::sscanf(rest.c_str(), " %lf , %lf , %lf , %lf %c", &vals[0], &vals[1],
                            &vals[2], &vals[3], &trailing);
        if (n != 4) fail(ErrorCode::parse, "expected x,y,w,h at " + where);
        BoundingBox b{vals[0], vals[1], vals[2], vals[3]};
        if (enforce_valid && !b.valid())
            fail(ErrorCode::parse, "box width and height must be positive at " + where);
        if (boxes.count(index))
            fail(ErrorCode::parse, "duplicate annotation for frame " + std::to_string(index) +
                                       " at " + where);
        boxes[index] = b;
    }
    return boxes;
}

void write_box_lines(const std::string& path, const std::map<int, BoundingBox>& boxes,
                     int n_frames) {
    std::ofstream out(path);
    if (!out) fail(ErrorCode::io, "cannot write '" + path + "'");
    bool dense = static_cast<int>(boxes.size()) == n_frames;
    char buf[160];
    for (const auto& [idx, b] : boxes) {
        if (dense)
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", b.x, b.y, b.w, b.h);
        else
            std::snprintf(buf, sizeof(buf), "%d:%.17g,%.17g,%.17g,%.17g\n", idx, b.x, b.y, b.w,
                          b.h);
        out << buf;
    }
    if (!out) fail(ErrorCode::io, "cannot write '" + path + "'");
}

void save_sequence(const Sequence& seq, const std::string& root) {
    fs::path dir = fs::path(root) / seq.name;
    std::error_code ec;
    fs::create_directories(dir / "rgb", ec);
    fs::create_directories(dir / "depth", ec);
    fs::create_directories(dir / "tir", ec);
    if (ec) fail(ErrorCode::io, "cannot create '" + dir.string() + "': " + ec.message());
    for (int i = 0; i < seq.length(); i++) {
        const TriModalFrame& f = seq.frames[i];
        save_png8((dir / "rgb" / frame_name(i)).string(), f.rgb);
        save_png16((dir / "depth" / frame_name(i)).string(), f.depth);
        save_png8((dir / "tir" / frame_name(i)).string(), f.tir);
    }
    write_box_lines((dir / "groundtruth.txt").string(), seq.annotations, seq.length());
}

static std::vector<std::string> png_files(const fs::path& dir) {
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
}

Sequence load_sequence(const std::string& root, const std::string& name) {
    fs::path dir = fs::path(root) / name;
    if (!fs::is_directory(dir)) fail(ErrorCode::io, "no sequence directory '" + dir.string() + "'");
    const char* mods[3] = {"rgb", "depth", "tir"};
    for (const char* m : mods)
        if (!fs::is_directory(dir / m))
            fail(ErrorCode::io, "sequence '" + name + "' is missing modality folder '" +
                                    std::string(m) + "/'");
    std::vector<std::string> rgb_files = png_files(dir / "rgb");
    std::vector<std::string> depth_files = png_files(dir / "depth");
    std::vector<std::string> tir_files = png_files(dir / "tir");
    if (rgb_files.size() != depth_files.size() || rgb_files.size() != tir_files.size())
        fail(ErrorCode::align,
             "frame count mismatch in '" + name + "': rgb=" + std::to_string(rgb_files.size()) +
                 " depth=" + std::to_string(depth_files.size()) +
                 " tir=" + std::to_string(tir_files.size()));
    if (rgb_files.empty()) fail(ErrorCode::io, "sequence '" + name + "' has no frames");

    Sequence seq;
    seq.name = name;
    for (size_t i = 0; i < rgb_files.size(); i++) {
        TriModalFrame f;
        f.timestamp_index = static_cast<int>(i);
        f.rgb = load_png((dir / "rgb" / rgb_files[i]).string(), 3);
        f.depth = load_png((dir / "depth" / depth_files[i]).string(), 1);
        f.tir = load_png((dir / "tir" / tir_files[i]).string(), 1);
        if (f.depth.h != f.rgb.h || f.depth.w != f.rgb.w || f.tir.h != f.rgb.h ||
            f.tir.w != f.rgb.w)
            fail(ErrorCode::align, "modality size mismatch at frame " + std::to_string(i) +
                                       " of '" + name + "'");
        seq.frames.push_back(std::move(f));
    }
    seq.annotations = parse_box_lines((dir / "groundtruth.txt").string(), true);
    for (const auto& [idx, b] : seq.annotations)
        if (idx >= seq.length())
            fail(ErrorCode::parse, "annotation index " + std::to_string(idx) +
                                       " out of range in '" + name + "'");
    if (!seq.has_annotation(0))
        fail(ErrorCode::parse, "sequence '" + name + "' does not annotate frame 0");
    return seq;
}

std::vector<std::string> list_sequence_dirs(const std::string& root) {
    if (!fs::is_directory(root)) fail(ErrorCode::io, "no directory '" + root + "'");
    std::vector<std::string> names;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory()) names.push_back(entry.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
}

}  // namespace rdt
