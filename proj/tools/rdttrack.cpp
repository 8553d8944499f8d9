// rdttrack — single entry point for synthetic data generation, training,
// one-pass evaluation, thermal-RGB alignment, representative-frame selection
// and plot-data export. Every subcommand reads a key=value config file;
// errors leave on stderr as "ERROR:<code>:<message>" and a nonzero exit.
#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

#include "rdt/config.hpp"
#include "rdt/data_model.hpp"
#include "rdt/dataset_tools.hpp"
#include "rdt/error.hpp"
#include "rdt/experiment.hpp"
#include "rdt/image_io.hpp"
#include "rdt/metrics.hpp"
#include "rdt/tracker.hpp"

namespace fs = std::filesystem;
using namespace rdt;

namespace {

// precedence: --out flag, then RDTTRACK_OUT, then the config's out_dir
std::string resolve_out(const std::string& flag_out, const std::string& cfg_out) {
    if (!flag_out.empty()) return flag_out;
    if (const char* env = std::getenv("RDTTRACK_OUT"); env && *env) return env;
    return cfg_out;
}

std::string require_out(const std::string& flag_out, const std::string& cfg_out) {
    std::string out = resolve_out(flag_out, cfg_out);
    if (out.empty())
        fail(ErrorCode::args, "no output directory: pass --out, set out_dir or RDTTRACK_OUT");
    return out;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::io, "cannot create directory '" + dir + "': " + ec.message());
}

std::string zero_padded(const std::string& prefix, int i) {
    std::ostringstream s;
    s << prefix << std::setw(3) << std::setfill('0') << i;
    return s.str();
}

void cmd_synth(const std::string& config, const std::string& out_flag,
               std::optional<uint64_t> seed, bool force) {
    SynthProfile p = SynthProfile::from_config(KeyValueConfig::parse_file(config));
    if (seed) p.seed = *seed;
    std::string out = require_out(out_flag, p.out_dir);
    if (fs::exists(out) && fs::is_directory(out) && !fs::is_empty(out) && !force)
        fail(ErrorCode::io, "output directory '" + out + "' is not empty (use --force)");
    ensure_dir(out);
    for (int i = 0; i < p.count; i++) {
        Sequence seq = generate_synthetic_sequence(p.length, degradation_for(p, i),
                                                   p.seed + static_cast<uint64_t>(i));
        seq.name = zero_padded(p.prefix, i);
        save_sequence(seq, out);
    }
    std::cout << "wrote " << p.count << " sequences of " << p.length << " frames to " << out
              << "\n";
}

void cmd_train(const std::string& config, const std::string& out_flag,
               std::optional<uint64_t> seed) {
    ExperimentConfig ec = ExperimentConfig::from_config(KeyValueConfig::parse_file(config));
    if (seed) ec.train.seed = *seed;
    std::string out = require_out(out_flag, ec.out_dir);
    if (ec.data_root.empty()) fail(ErrorCode::config, "train needs data_root");

    bool resuming = !ec.resume.empty();
    TrackerModel model =
        resuming ? load_checkpoint(ec.resume)
        : !ec.rgb_backbone.empty()
            ? assemble_from_rgb(load_checkpoint(ec.rgb_backbone), ec.model, ec.train.seed)
            : TrackerModel::create(ec.model, ec.train.seed);

    std::vector<Sequence> train_set;
    for (const std::string& name : list_sequence_dirs(ec.data_root))
        train_set.push_back(load_sequence(ec.data_root, name));

    std::vector<EpochLog> logs = train(model, train_set, ec.train);

    ensure_dir(out);
    save_checkpoint(model, out + "/model.ckpt");
    std::string log_path = out + "/train_log.csv";
    bool append = resuming && fs::exists(log_path);
    std::ofstream f(log_path, append ? std::ios::app : std::ios::trunc);
    if (!f) fail(ErrorCode::io, "cannot write '" + log_path + "'");
    if (!append) f << "epoch,loss,cls,giou,l1,lr,rejected\n";
    for (const EpochLog& el : logs) {
        f << el.epoch << "," << format_double(el.mean_loss) << "," << format_double(el.mean_cls)
          << "," << format_double(el.mean_giou) << "," << format_double(el.mean_l1) << ","
          << format_double(el.lr) << "," << el.rejected << "\n";
        std::cout << "epoch " << el.epoch << ": loss " << el.mean_loss << " (cls " << el.mean_cls
                  << " giou " << el.mean_giou << " l1 " << el.mean_l1 << ") lr " << el.lr << "\n";
    }
    if (!f) fail(ErrorCode::io, "cannot write '" + log_path + "'");
    std::cout << "checkpoint: " << out << "/model.ckpt\n";
}

// oracle predictions repeat the most recent annotated box
SequencePrediction oracle_prediction(const Sequence& seq) {
    SequencePrediction sp;
    sp.name = seq.name;
    auto it = seq.annotations.find(0);
    if (it == seq.annotations.end())
        fail(ErrorCode::eval, "sequence '" + seq.name + "' has no frame-0 annotation");
    BoundingBox last = it->second;
    for (int t = 0; t < seq.length(); t++) {
        auto a = seq.annotations.find(t);
        if (a != seq.annotations.end()) last = a->second;
        sp.boxes.push_back(last);
    }
    return sp;
}

// Tracks (or oracles) every sequence under `data_root`, up to `jobs` at a
// time. Results come back in directory order regardless of scheduling.
void run_predictions(const TrackerModel* model, bool oracle, const std::string& data_root,
                     int jobs, std::vector<SequencePrediction>& preds,
                     std::vector<GroundTruth>& truths, std::vector<int>& lengths) {
    std::vector<std::string> names = list_sequence_dirs(data_root);
    if (names.empty()) fail(ErrorCode::eval, "no sequences under '" + data_root + "'");
    preds.assign(names.size(), {});
    truths.assign(names.size(), {});
    lengths.assign(names.size(), 0);

    std::atomic<size_t> next{0};
    std::mutex mu;
    std::optional<Error> first_error;
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= names.size()) return;
            {
                std::lock_guard<std::mutex> lock(mu);
                if (first_error) return;
            }
            try {
                Sequence seq = load_sequence(data_root, names[i]);
                preds[i] = oracle ? oracle_prediction(seq)
                                  : SequencePrediction{seq.name, track_sequence(*model, seq)};
                truths[i] = ground_truth_of(seq);
                lengths[i] = seq.length();
            } catch (const Error& e) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first_error) first_error = e;
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first_error) first_error = Error(ErrorCode::state, e.what());
            }
        }
    };
    int n = std::max(1, std::min(jobs, static_cast<int>(names.size())));
    if (n == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n; t++) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (first_error) throw *first_error;
}

void write_eval_outputs(const std::string& dir, const OpeResult& r,
                        const std::vector<SequencePrediction>& preds,
                        const std::vector<int>& lengths) {
    ensure_dir(dir + "/curves");
    ensure_dir(dir + "/predictions");
    write_summary_csv(r, dir + "/summary.csv");
    for (const EvalResult& er : r.per_sequence) {
        write_curve_csv(er.precision, dir + "/curves/precision_" + er.sequence + ".csv");
        write_curve_csv(er.success, dir + "/curves/success_" + er.sequence + ".csv");
    }
    for (size_t i = 0; i < preds.size(); i++) {
        std::map<int, BoundingBox> boxes;
        for (size_t t = 0; t < preds[i].boxes.size(); t++)
            boxes[static_cast<int>(t)] = preds[i].boxes[t];
        write_box_lines(dir + "/predictions/" + preds[i].name + ".txt", boxes, lengths[i]);
    }
}

OpeResult eval_one(const TrackerModel* model, bool oracle, const std::string& data_root,
                   int jobs, const std::string& out_dir) {
    std::vector<SequencePrediction> preds;
    std::vector<GroundTruth> truths;
    std::vector<int> lengths;
    run_predictions(model, oracle, data_root, jobs, preds, truths, lengths);
    OpeResult r = evaluate_ope(preds, truths);
    write_eval_outputs(out_dir, r, preds, lengths);
    return r;
}

void cmd_eval(const std::string& config, const std::string& out_flag, int jobs, bool oracle_flag) {
    KeyValueConfig kv = KeyValueConfig::parse_file(config);
    kv.restrict_keys({"checkpoint", "data_root", "out_dir", "oracle", "variants"});
    std::string data_root = kv.require_string("data_root");
    bool oracle = oracle_flag || kv.get_bool("oracle", false);
    std::string out = require_out(out_flag, kv.get_string("out_dir", ""));
    std::string variants = kv.get_string("variants", "");
    ensure_dir(out);

    if (!variants.empty()) {
        if (oracle) fail(ErrorCode::args, "oracle and variants are mutually exclusive");
        std::string mpath = out + "/matrix.csv";
        std::ofstream mf(mpath);
        if (!mf) fail(ErrorCode::io, "cannot write '" + mpath + "'");
        mf << "variant,dp20,auc\n";
        for (const std::string& entry : split_list(variants)) {
            size_t colon = entry.find(':');
            if (colon == std::string::npos)
                fail(ErrorCode::config, "variant '" + entry + "' is not name:checkpoint");
            std::string vname = entry.substr(0, colon);
            std::string vpath = entry.substr(colon + 1);
            if (vname.empty() || vpath.empty())
                fail(ErrorCode::config, "variant '" + entry + "' is not name:checkpoint");
            TrackerModel model = load_checkpoint(vpath);
            OpeResult r = eval_one(&model, false, data_root, jobs, out + "/" + vname);
            mf << vname << "," << format_double(r.aggregate_dp20) << ","
               << format_double(r.aggregate_auc) << "\n";
            std::cout << vname << ": DP20 " << format_double(r.aggregate_dp20) << " AUC "
                      << format_double(r.aggregate_auc) << "\n";
        }
        if (!mf) fail(ErrorCode::io, "cannot write '" + mpath + "'");
        std::cout << "matrix: " << mpath << "\n";
        return;
    }

    TrackerModel model;
    bool have_model = false;
    std::string ckpt = kv.get_string("checkpoint", "");
    if (!oracle) {
        if (ckpt.empty()) fail(ErrorCode::config, "eval needs checkpoint (or oracle)");
        model = load_checkpoint(ckpt);
        have_model = true;
    }
    OpeResult r = eval_one(have_model ? &model : nullptr, oracle, data_root, jobs, out);
    std::cout << "DP20 " << format_double(r.aggregate_dp20) << " AUC "
              << format_double(r.aggregate_auc) << " over " << r.per_sequence.size()
              << " sequences\n";
}

std::vector<PointPair> parse_points(const std::string& path) {
    std::ifstream f(path);
    if (!f) fail(ErrorCode::io, "cannot open '" + path + "'");
    std::vector<PointPair> pts;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        lineno++;
        std::string body = line.substr(0, line.find('#'));
        if (body.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream iss(body);
        PointPair p;
        std::string extra;
        if (!(iss >> p.tx >> p.ty >> p.rx >> p.ry) || (iss >> extra))
            fail(ErrorCode::parse,
                 "line " + std::to_string(lineno) + " of '" + path + "' does not hold 4 numbers");
        pts.push_back(p);
    }
    return pts;
}

void cmd_align(const std::string& config, const std::string& out_flag) {
    KeyValueConfig kv = KeyValueConfig::parse_file(config);
    kv.restrict_keys({"points", "image_dir", "affine", "out_dir"});
    std::vector<PointPair> pts = parse_points(kv.require_string("points"));
    AlignmentMap m = estimate_alignment(pts, kv.get_bool("affine", false));
    std::string out = require_out(out_flag, kv.get_string("out_dir", ""));
    ensure_dir(out);
    save_alignment(m, out + "/alignment.txt");
    std::cout << "rms " << format_double(m.rms) << " px over " << pts.size()
              << " points, condition " << format_double(m.condition)
              << (m.affine ? ", affine" : "") << "\n";

    std::string image_dir = kv.get_string("image_dir", "");
    if (image_dir.empty()) return;
    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(image_dir, ec))
        if (e.path().extension() == ".png") files.push_back(e.path());
    if (ec) fail(ErrorCode::io, "cannot list '" + image_dir + "': " + ec.message());
    if (files.empty()) fail(ErrorCode::io, "no .png files under '" + image_dir + "'");
    std::sort(files.begin(), files.end());
    ensure_dir(out + "/aligned");
    for (const fs::path& p : files) {
        Image img = load_png(p.string(), 1);
        Image warped = apply_alignment(m, img, img.h, img.w);
        save_png8(out + "/aligned/" + p.filename().string(), warped);
    }
    std::cout << "aligned " << files.size() << " images into " << out << "/aligned\n";
}

void cmd_select_frames(const std::string& config, const std::string& out_flag,
                       std::optional<uint64_t> seed) {
    KeyValueConfig kv = KeyValueConfig::parse_file(config);
    kv.restrict_keys({"data_root", "sequence", "k", "out_dir", "seed"});
    Sequence seq = load_sequence(kv.require_string("data_root"), kv.require_string("sequence"));
    int k = static_cast<int>(kv.get_int("k", 3));
    uint64_t s = seed ? *seed : static_cast<uint64_t>(kv.get_int("seed", 0));
    FrameSelection sel = select_representative_frames(seq, k, s);
    for (int f : sel.frames) std::cout << f << "\n";
    if (sel.collapsed > 0)
        std::cerr << "note: " << sel.collapsed << " cluster(s) collapsed onto the same frame\n";
    std::string out = resolve_out(out_flag, kv.get_string("out_dir", ""));
    if (out.empty()) return;
    ensure_dir(out);
    std::string path = out + "/selected_frames.txt";
    std::ofstream f(path);
    if (!f) fail(ErrorCode::io, "cannot write '" + path + "'");
    for (int idx : sel.frames) f << idx << "\n";
    if (!f) fail(ErrorCode::io, "cannot write '" + path + "'");
}

void cmd_plot_data(const std::string& config, const std::string& out_flag) {
    KeyValueConfig kv = KeyValueConfig::parse_file(config);
    kv.restrict_keys({"eval_dir", "out_dir"});
    std::string src = kv.require_string("eval_dir");
    std::vector<fs::path> files;
    std::error_code ec;
    for (const auto& e : fs::directory_iterator(src + "/curves", ec))
        if (e.path().extension() == ".csv") files.push_back(e.path());
    if (ec) fail(ErrorCode::io, "cannot list '" + src + "/curves': " + ec.message());
    if (files.empty()) fail(ErrorCode::io, "no curve files under '" + src + "/curves'");
    std::sort(files.begin(), files.end());

    std::string out = require_out(out_flag, kv.get_string("out_dir", ""));
    ensure_dir(out);
    std::string path = out + "/plot.csv";
    std::ofstream f(path);
    if (!f) fail(ErrorCode::io, "cannot write '" + path + "'");
    f << "curve,sequence,threshold,value\n";
    long long rows = 0;
    for (const fs::path& p : files) {
        std::string stem = p.stem().string();
        size_t us = stem.find('_');
        std::string curve = us == std::string::npos ? stem : stem.substr(0, us);
        std::string sequence = us == std::string::npos ? "" : stem.substr(us + 1);
        std::ifstream in(p);
        if (!in) fail(ErrorCode::io, "cannot open '" + p.string() + "'");
        std::string line;
        std::getline(in, line);  // header
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            f << curve << "," << sequence << "," << line << "\n";
            rows++;
        }
    }
    if (!f) fail(ErrorCode::io, "cannot write '" + path + "'");
    std::cout << path << ": " << rows << " rows from " << files.size() << " curves\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tri-modal (RGB + depth + thermal) tracking toolkit"};
    app.require_subcommand(1);

    std::string config, out;
    uint64_t seed_val = 0;
    bool force = false, oracle = false;
    int jobs = 1;

    CLI::App* synth = app.add_subcommand("synth", "render a synthetic tri-modal dataset");
    CLI::App* train_c = app.add_subcommand("train", "train a tracker variant");
    CLI::App* eval_c = app.add_subcommand("eval", "one-pass evaluation of a checkpoint");
    CLI::App* align_c = app.add_subcommand("align", "fit a thermal-to-RGB pixel alignment");
    CLI::App* select_c = app.add_subcommand("select-frames", "pick representative frames");
    CLI::App* plot_c = app.add_subcommand("plot-data", "merge evaluation curves into one table");

    std::vector<CLI::Option*> seed_opts;
    for (CLI::App* c : {synth, train_c, eval_c, align_c, select_c, plot_c}) {
        c->add_option("--config", config, "key=value configuration file")->required();
        c->add_option("--out", out, "output directory (beats config out_dir and RDTTRACK_OUT)");
    }
    for (CLI::App* c : {synth, train_c, select_c})
        seed_opts.push_back(c->add_option("--seed", seed_val, "seed override"));
    synth->add_flag("--force", force, "write into a non-empty output directory");
    eval_c->add_option("--jobs", jobs, "sequences evaluated in parallel")
        ->check(CLI::PositiveNumber);
    eval_c->add_flag("--oracle", oracle, "score the ground truth against itself");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "ERROR:args:" << e.what() << "\n";
        return 1;
    }

    std::optional<uint64_t> seed;
    for (CLI::Option* o : seed_opts)
        if (o->count() > 0) seed = seed_val;

    try {
        if (synth->parsed())
            cmd_synth(config, out, seed, force);
        else if (train_c->parsed())
            cmd_train(config, out, seed);
        else if (eval_c->parsed())
            cmd_eval(config, out, jobs, oracle);
        else if (align_c->parsed())
            cmd_align(config, out);
        else if (select_c->parsed())
            cmd_select_frames(config, out, seed);
        else if (plot_c->parsed())
            cmd_plot_data(config, out);
    } catch (const Error& e) {
        std::cerr << "ERROR:" << e.code_str() << ":" << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "ERROR:state:" << e.what() << "\n";
        return 1;
    }
    return 0;
}
