// Spawns the rdttrack binary and checks exit codes, the ERROR:<code>: stderr
// contract, and the files each subcommand leaves behind.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "rdt/data_model.hpp"
#include "rdt/dataset_tools.hpp"
#include "rdt/error.hpp"
#include "rdt/tracker.hpp"

namespace fs = std::filesystem;
using namespace rdt;

namespace {

std::string g_root;

struct RunResult {
    int exit_code = -1;
    std::string out, err;
};

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') n++;
    return n;
}

bool starts_with(const std::string& s, const std::string& prefix) {
    return s.rfind(prefix, 0) == 0;
}

RunResult run_prefixed(const std::string& env_prefix, const std::string& args) {
    static int n = 0;
    std::string out = g_root + "/cap_out" + std::to_string(n) + ".txt";
    std::string err = g_root + "/cap_err" + std::to_string(n) + ".txt";
    n++;
    std::string cmd =
        env_prefix + (env_prefix.empty() ? "" : " ") + RDTTRACK_BIN + " " + args + " >" + out +
        " 2>" + err;
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

RunResult run(const std::string& args) { return run_prefixed("", args); }

// one shared tiny dataset: 2 sequences x 6 frames
std::string dataset() {
    std::string dir = g_root + "/data";
    if (!fs::exists(dir)) {
        std::string cfg = g_root + "/data_profile.cfg";
        spit(cfg, "count = 2\nlength = 6\nwidth = 48\nheight = 48\nseed = 4\n");
        RunResult r = run("synth --config " + cfg + " --out " + dir);
        REQUIRE(r.exit_code == 0);
    }
    return dir;
}

std::string tiny_model_cfg_body() {
    return "patch_size = 8\nembed_dim = 16\ntemplate_size = 16\nsearch_size = 32\n"
           "num_layers = 1\nnum_heads = 2\nffn_ratio = 2\n";
}

// one shared trained checkpoint
std::string checkpoint() {
    std::string ckpt = g_root + "/shared_run/model.ckpt";
    if (!fs::exists(ckpt)) {
        std::string cfg = g_root + "/shared_train.cfg";
        spit(cfg, "modalities = rgb,d,tir\n" + tiny_model_cfg_body() +
                      "epochs = 1\nlr_drop_epoch = 0\nsamples_per_epoch = 4\nbatch_size = 2\n"
                      "data_root = " + dataset() + "\nseed = 3\n");
        RunResult r = run("train --config " + cfg + " --out " + g_root + "/shared_run");
        REQUIRE(r.exit_code == 0);
    }
    return ckpt;
}

}  // namespace

TEST_CASE("synth writes a loadable dataset and repeats byte-identically per seed") {
    std::string cfg = g_root + "/synth.cfg";
    spit(cfg, "count = 2\nlength = 6\nwidth = 48\nheight = 48\nseed = 4\n");
    RunResult a = run("synth --config " + cfg + " --out " + g_root + "/synth_a");
    CHECK(a.exit_code == 0);
    CHECK(a.err.empty());

    Sequence seq = load_sequence(g_root + "/synth_a", "seq000");
    CHECK(seq.length() == 6);
    CHECK(seq.dense());
    CHECK(seq.frames[0].rgb.w == 48);

    RunResult b = run("synth --config " + cfg + " --out " + g_root + "/synth_b");
    CHECK(b.exit_code == 0);
    for (const char* name : {"seq000", "seq001"})
        CHECK(slurp(g_root + "/synth_a/" + name + "/groundtruth.txt") ==
              slurp(g_root + "/synth_b/" + name + "/groundtruth.txt"));

    RunResult c = run("synth --config " + cfg + " --seed 9 --out " + g_root + "/synth_c");
    CHECK(c.exit_code == 0);
    CHECK(slurp(g_root + "/synth_a/seq000/groundtruth.txt") !=
          slurp(g_root + "/synth_c/seq000/groundtruth.txt"));
}

TEST_CASE("synth refuses a non-empty output directory unless forced") {
    std::string cfg = g_root + "/synth.cfg";  // written by the previous case
    RunResult refuse = run("synth --config " + cfg + " --out " + g_root + "/synth_a");
    CHECK(refuse.exit_code == 1);
    CHECK(starts_with(refuse.err, "ERROR:io:"));
    RunResult forced = run("synth --config " + cfg + " --force --out " + g_root + "/synth_a");
    CHECK(forced.exit_code == 0);
}

TEST_CASE("an unknown profile key is a config error naming the key") {
    std::string cfg = g_root + "/bad_synth.cfg";
    spit(cfg, "count = 1\nwibble = 2\n");
    RunResult r = run("synth --config " + cfg + " --out " + g_root + "/nowhere");
    CHECK(r.exit_code == 1);
    CHECK(starts_with(r.err, "ERROR:config:"));
    CHECK(r.err.find("wibble") != std::string::npos);
    CHECK(!fs::exists(g_root + "/nowhere"));
}

TEST_CASE("train writes a checkpoint plus loss log and resume continues the numbering") {
    std::string ckpt = checkpoint();
    TrackerModel m = load_checkpoint(ckpt);
    CHECK(m.epoch == 1);
    CHECK(m.cfg.embed_dim == 16);

    std::string log = slurp(g_root + "/shared_run/train_log.csv");
    CHECK(starts_with(log, "epoch,loss,cls,giou,l1,lr,rejected\n0,"));
    CHECK(count_lines(log) == 2);

    std::string cfg = g_root + "/resume.cfg";
    spit(cfg, "resume = " + ckpt + "\nepochs = 2\nlr_drop_epoch = 1\nsamples_per_epoch = 4\n"
                  "batch_size = 2\ndata_root = " + dataset() + "\nseed = 3\n");
    RunResult r = run("train --config " + cfg + " --out " + g_root + "/shared_run");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("epoch 1:") != std::string::npos);
    TrackerModel m2 = load_checkpoint(ckpt);
    CHECK(m2.epoch == 2);
    // the log keeps the earlier rows and appends the new epoch
    std::string log2 = slurp(g_root + "/shared_run/train_log.csv");
    CHECK(count_lines(log2) == 3);
    CHECK(log2.find("\n1,") != std::string::npos);
}

TEST_CASE("training without the projection leaves its scalars frozen") {
    std::string cfg = g_root + "/noproj.cfg";
    spit(cfg, "modalities = rgb,d,tir\ndisable_orthogonal = true\n" + tiny_model_cfg_body() +
                  "epochs = 1\nlr_drop_epoch = 0\nsamples_per_epoch = 2\nbatch_size = 2\n"
                  "data_root = " + dataset() + "\nseed = 5\n");
    RunResult r = run("train --config " + cfg + " --out " + g_root + "/noproj_run");
    CHECK(r.exit_code == 0);
    TrackerModel m = load_checkpoint(g_root + "/noproj_run/model.ckpt");
    CHECK(m.cfg.disable_orthogonal);
    CHECK(m.at("fusion.alpha").frozen);
    CHECK(m.at("fusion.beta").frozen);
    for (const std::string& name : m.trainable_names()) {
        CHECK(name != "fusion.alpha");
        CHECK(name != "fusion.beta");
    }
}

TEST_CASE("a config error in train names the bad value") {
    std::string cfg = g_root + "/badmod.cfg";
    spit(cfg, "modalities = rgb,sonar\ndata_root = x\n");
    RunResult r = run("train --config " + cfg + " --out " + g_root + "/never");
    CHECK(r.exit_code == 1);
    CHECK(starts_with(r.err, "ERROR:config:"));
    CHECK(r.err.find("sonar") != std::string::npos);
}

TEST_CASE("oracle evaluation scores a perfect distance precision") {
    std::string cfg = g_root + "/eval_oracle.cfg";
    spit(cfg, "data_root = " + dataset() + "\noracle = true\n");
    RunResult r = run("eval --config " + cfg + " --out " + g_root + "/ev_oracle");
    CHECK(r.exit_code == 0);
    std::string summary = slurp(g_root + "/ev_oracle/summary.csv");
    CHECK(starts_with(summary, "sequence,dp20,auc\n"));
    CHECK(summary.find("\nAGGREGATE,1,") != std::string::npos);

    // curve files carry the full threshold grids
    std::string succ = slurp(g_root + "/ev_oracle/curves/success_seq000.csv");
    std::string prec = slurp(g_root + "/ev_oracle/curves/precision_seq000.csv");
    CHECK(count_lines(succ) == 22);
    CHECK(count_lines(prec) == 52);
    // a perfect overlap never exceeds the strict threshold 1 bin
    CHECK(succ.find("\n1,0\n") != std::string::npos);
    CHECK(succ.find("\n0.95,1\n") != std::string::npos);

    // predictions mirror the ground-truth format, one line per frame
    std::string pred = slurp(g_root + "/ev_oracle/predictions/seq000.txt");
    CHECK(count_lines(pred) == 6);
    CHECK(pred == slurp(dataset() + "/seq000/groundtruth.txt"));
}

TEST_CASE("evaluating a checkpoint is deterministic across jobs counts") {
    std::string cfg = g_root + "/eval_ckpt.cfg";
    spit(cfg, "data_root = " + dataset() + "\ncheckpoint = " + checkpoint() + "\n");
    RunResult one = run("eval --config " + cfg + " --jobs 1 --out " + g_root + "/ev_j1");
    RunResult many = run("eval --config " + cfg + " --jobs 4 --out " + g_root + "/ev_j4");
    CHECK(one.exit_code == 0);
    CHECK(many.exit_code == 0);
    CHECK(slurp(g_root + "/ev_j1/summary.csv") == slurp(g_root + "/ev_j4/summary.csv"));
    CHECK(slurp(g_root + "/ev_j1/predictions/seq001.txt") ==
          slurp(g_root + "/ev_j4/predictions/seq001.txt"));
    CHECK(one.out == many.out);
}

TEST_CASE("the variant matrix emits one summary row per entry") {
    std::string cfg = g_root + "/eval_matrix.cfg";
    spit(cfg, "data_root = " + dataset() + "\nvariants = full:" + checkpoint() +
                  ", rerun:" + checkpoint() + "\n");
    RunResult r = run("eval --config " + cfg + " --out " + g_root + "/ev_matrix");
    CHECK(r.exit_code == 0);
    std::string matrix = slurp(g_root + "/ev_matrix/matrix.csv");
    CHECK(starts_with(matrix, "variant,dp20,auc\n"));
    CHECK(count_lines(matrix) == 3);
    CHECK(matrix.find("\nfull,") != std::string::npos);
    CHECK(matrix.find("\nrerun,") != std::string::npos);
    CHECK(fs::exists(g_root + "/ev_matrix/full/summary.csv"));
    CHECK(fs::exists(g_root + "/ev_matrix/rerun/summary.csv"));
    // identical checkpoints score identically
    CHECK(slurp(g_root + "/ev_matrix/full/summary.csv") ==
          slurp(g_root + "/ev_matrix/rerun/summary.csv"));
}

TEST_CASE("plot-data merges every curve into one long table") {
    REQUIRE(fs::exists(g_root + "/ev_oracle/curves"));  // built two cases above
    std::string cfg = g_root + "/plot.cfg";
    spit(cfg, "eval_dir = " + g_root + "/ev_oracle\n");
    RunResult r = run("plot-data --config " + cfg + " --out " + g_root + "/plot");
    CHECK(r.exit_code == 0);
    std::string table = slurp(g_root + "/plot/plot.csv");
    CHECK(starts_with(table, "curve,sequence,threshold,value\n"));
    // 2 sequences x (51 precision + 21 success) rows + header
    CHECK(count_lines(table) == 2 * (51 + 21) + 1);
    CHECK(table.find("precision,seq001,20,") != std::string::npos);
    CHECK(table.find("success,seq000,0.5,") != std::string::npos);
}

TEST_CASE("align recovers a translation and reports malformed lines") {
    std::string pts = g_root + "/pts.txt";
    spit(pts,
         "# thermal -> rgb\n0 0 5 3\n40 0 45 3\n0 40 5 43\n40 40 45 43\n10 25 15 28\n");
    std::string cfg = g_root + "/align.cfg";
    spit(cfg, "points = " + pts + "\n");
    RunResult r = run("align --config " + cfg + " --out " + g_root + "/align_out");
    CHECK(r.exit_code == 0);
    AlignmentMap m = load_alignment(g_root + "/align_out/alignment.txt");
    CHECK(m.matrix.at(0, 2) == doctest::Approx(5.0).epsilon(1e-9));
    CHECK(m.matrix.at(1, 2) == doctest::Approx(3.0).epsilon(1e-9));

    spit(pts, "0 0 5\n");
    RunResult bad = run("align --config " + cfg + " --out " + g_root + "/align_bad");
    CHECK(bad.exit_code == 1);
    CHECK(starts_with(bad.err, "ERROR:parse:"));
    CHECK(bad.err.find("line 1") != std::string::npos);

    spit(pts, "0 0 5 3\n1 0 6 3\n0 1 5 4\n");
    RunResult few = run("align --config " + cfg + " --out " + g_root + "/align_few");
    CHECK(few.exit_code == 1);
    CHECK(starts_with(few.err, "ERROR:args:"));
}

TEST_CASE("select-frames prints one index per line, deterministically") {
    std::string cfg = g_root + "/select.cfg";
    spit(cfg, "data_root = " + dataset() + "\nsequence = seq000\nk = 2\n");
    RunResult a = run("select-frames --config " + cfg + " --seed 3 --out " + g_root + "/sel");
    RunResult b = run("select-frames --config " + cfg + " --seed 3");
    CHECK(a.exit_code == 0);
    CHECK(b.exit_code == 0);
    CHECK(a.out == b.out);
    CHECK(count_lines(a.out) == 2);
    CHECK(slurp(g_root + "/sel/selected_frames.txt") == a.out);
    for (std::istringstream iss(a.out); !iss.eof();) {
        int idx = -1;
        if (iss >> idx) {
            CHECK(idx >= 0);
            CHECK(idx < 6);
        }
    }

    spit(cfg, "data_root = " + dataset() + "\nsequence = seq000\nk = 99\n");
    RunResult big = run("select-frames --config " + cfg);
    CHECK(big.exit_code == 1);
    CHECK(starts_with(big.err, "ERROR:args:"));
}

TEST_CASE("the environment variable supplies a default output directory") {
    std::string cfg = g_root + "/envsel.cfg";
    spit(cfg, "data_root = " + dataset() + "\nsequence = seq000\nk = 2\n");
    RunResult r = run_prefixed("RDTTRACK_OUT=" + g_root + "/env_out",
                               "select-frames --config " + cfg + " --seed 3");
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(g_root + "/env_out/selected_frames.txt"));
}

TEST_CASE("usage problems exit nonzero with the args error prefix") {
    RunResult none = run("");
    CHECK(none.exit_code == 1);
    CHECK(starts_with(none.err, "ERROR:args:"));

    RunResult noconfig = run("synth");
    CHECK(noconfig.exit_code == 1);
    CHECK(starts_with(noconfig.err, "ERROR:args:"));
    CHECK(noconfig.err.find("--config") != std::string::npos);

    RunResult missing = run("eval --config " + g_root + "/does_not_exist.cfg --out x");
    CHECK(missing.exit_code == 1);
    CHECK(starts_with(missing.err, "ERROR:io:"));

    RunResult help = run("--help");
    CHECK(help.exit_code == 0);
    CHECK(help.out.find("select-frames") != std::string::npos);
}

int main(int argc, char** argv) {
    g_root = "/tmp/rdt_cli_" + std::to_string(getpid());
    fs::remove_all(g_root);
    fs::create_directories(g_root);
    unsetenv("RDTTRACK_OUT");
    doctest::Context ctx(argc, argv);
    int res = ctx.run();
    if (res == 0 && !ctx.shouldExit()) fs::remove_all(g_root);
    return res;
}
