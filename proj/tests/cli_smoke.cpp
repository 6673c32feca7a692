// End-to-end CLI exercise on a micro configuration: every subcommand, output
// file formats, and the machine-parsable error surface.
//
//   cli_smoke <path-to-vfg-cli>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int failures = 0;

#define REQUIRE(cond, msg)                                                       \
    do {                                                                         \
        if (!(cond)) {                                                           \
            std::cerr << "[FAIL] " << __FILE__ << ":" << __LINE__ << " " << msg \
                      << "\n";                                                   \
            ++failures;                                                          \
        }                                                                        \
    } while (0)

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

std::string first_line(const std::string& s) {
    auto nl = s.find('\n');
    return nl == std::string::npos ? s : s.substr(0, nl);
}

struct RunResult {
    int code;
    std::string err;
};

RunResult run(const std::string& cli, const std::string& args, const fs::path& dir) {
    fs::path err = dir / "stderr.txt";
    std::string cmd = cli + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " +
                      err.string();
    int rc = std::system(cmd.c_str());
    return {rc == 0 ? 0 : 1, slurp(err)};
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: cli_smoke <path-to-vfg-cli>\n";
        return 2;
    }
    std::string cli = argv[1];
    fs::path dir = fs::temp_directory_path() / "vfg_cli_smoke";
    fs::remove_all(dir);
    fs::create_directories(dir);
    fs::path out = dir / "run";

    std::string micro_dae =
        "--dae.base-width 8 --dae.d 8 --dae.groups 4 --dae.sin-dim 16 --dae.time-embed-dim 32 "
        "--dae.batch-size 16 --dae.total-samples 320 --dae.train-t 100";

    // synth
    auto r = run(cli, "synth --out " + out.string() + " --n-train 40 --n-val 10 --n-test 10 --seed 3",
                 dir);
    REQUIRE(r.code == 0, "synth failed: " << r.err);
    REQUIRE(fs::exists(out / "dataset" / "manifest.csv"), "manifest missing");
    {
        std::ifstream m(out / "dataset" / "manifest.csv");
        std::string header;
        std::getline(m, header);
        REQUIRE(header == "filename,split,compression,grade,fractured,graded",
                "manifest header wrong: " << header);
        int rows = 0;
        std::string line;
        while (std::getline(m, line))
            if (!line.empty()) ++rows;
        REQUIRE(rows == 60, "manifest row count " << rows);
    }

    // paper-like preset reaches the CLI surface
    r = run(cli,
            "synth --out " + (dir / "pl").string() +
                " --preset paper-like --n-train 40 --n-val 10 --n-test 10 --seed 3",
            dir);
    REQUIRE(r.code == 0, "paper-like synth failed: " << r.err);

    // train
    r = run(cli, "train --single-thread --out " + out.string() + " " + micro_dae + " --seed 7",
            dir);
    REQUIRE(r.code == 0, "train failed: " << r.err);
    REQUIRE(fs::exists(out / "dae.ckpt"), "checkpoint missing");
    {
        std::ifstream l(out / "loss.csv");
        std::string header;
        std::getline(l, header);
        REQUIRE(header == "step,loss", "loss csv header wrong");
        int rows = 0;
        std::string line;
        while (std::getline(l, line))
            if (!line.empty()) ++rows;
        REQUIRE(rows == 20, "loss rows " << rows);  // 320 samples / batch 16
    }

    // probe refuses a dataset lacking both classes: train on a healthy-only set
    {
        fs::path hdir = dir / "healthy";
        r = run(cli,
                "synth --out " + hdir.string() +
                    " --n-train 30 --n-val 8 --n-test 8 --seed 3 --healthy-frac 1.0",
                dir);
        REQUIRE(r.code == 0, "healthy-only synth failed");
        r = run(cli,
                "train --out " + hdir.string() + " " + micro_dae + " --seed 7", dir);
        REQUIRE(r.code == 0, "healthy-only train failed");
        r = run(cli, "probe --out " + hdir.string(), dir);
        REQUIRE(r.code != 0, "probe should fail on single-class data");
        REQUIRE(first_line(r.err).rfind("error: degenerate-labels:", 0) == 0,
                "probe error line: " << first_line(r.err));
    }

    // probe + calibrate on the mixed dataset
    r = run(cli, "probe --out " + out.string(), dir);
    REQUIRE(r.code == 0, "probe failed: " << r.err);
    REQUIRE(fs::exists(out / "probe.json"), "probe.json missing");
    REQUIRE(fs::exists(out / "report" / "probe_report.json"), "probe report missing");

    r = run(cli, "calibrate --out " + out.string(), dir);
    REQUIRE(r.code == 0, "calibrate failed: " << r.err);
    REQUIRE(fs::exists(out / "calibration.json"), "calibration.json missing");

    r = run(cli, "calibrate --out " + out.string() + " --kind poly3 --calibration " +
                     (out / "cal3.json").string(),
            dir);
    REQUIRE(r.code == 0, "poly3 calibrate failed: " << r.err);
    {
        auto body = slurp(out / "cal3.json");
        REQUIRE(body.find("\"monotone\"") != std::string::npos, "poly3 missing monotone flag");
    }

    // grade
    r = run(cli,
            "grade --out " + out.string() + " " + (out / "dataset" / "test_000001.png").string() +
                " " + (out / "dataset" / "test_000002.png").string(),
            dir);
    REQUIRE(r.code == 0, "grade failed: " << r.err);
    {
        std::ifstream g(out / "grades.csv");
        std::string header, row;
        std::getline(g, header);
        REQUIRE(header == "filename,distance,continuous_grade,ordinal_grade",
                "grades header wrong: " << header);
        int rows = 0;
        while (std::getline(g, row)) {
            if (row.empty()) continue;
            ++rows;
            // ordinal = round(clamp(continuous)) is re-checkable from the row
            std::stringstream ss(row);
            std::string fn, dist, cont, ord;
            std::getline(ss, fn, ',');
            std::getline(ss, dist, ',');
            std::getline(ss, cont, ',');
            std::getline(ss, ord, ',');
            double c = std::stod(cont);
            int o = std::stoi(ord);
            double clamped = std::min(3.0, std::max(0.0, c));
            REQUIRE(o == static_cast<int>(std::lround(clamped)),
                    "ordinal/continuous mismatch in " << row);
        }
        REQUIRE(rows == 2, "grade rows " << rows);
    }

    // sweep (short schedules keep the decode cheap)
    r = run(cli,
            "sweep --out " + out.string() + " " + (out / "dataset" / "test_000001.png").string() +
                " --steps.eval-t 5 --steps.gen-t 8",
            dir);
    REQUIRE(r.code == 0, "sweep failed: " << r.err);
    REQUIRE(fs::exists(out / "test_000001_sweep.png"), "sweep strip missing");
    {
        std::ifstream s(out / "test_000001_sweep.csv");
        std::string header;
        std::getline(s, header);
        REQUIRE(header == "target_grade,target_distance,measured_reduction",
                "sweep header wrong: " << header);
        int rows = 0;
        std::string line;
        while (std::getline(s, line))
            if (!line.empty()) ++rows;
        REQUIRE(rows == 6, "sweep rows " << rows);
    }

    // sweep must refuse a polynomial calibration for grade inversion
    r = run(cli,
            "sweep --out " + out.string() + " " + (out / "dataset" / "test_000001.png").string() +
                " --calibration " + (out / "cal3.json").string() + " --steps.eval-t 5 --steps.gen-t 8",
            dir);
    REQUIRE(r.code != 0, "sweep should fail with poly calibration");
    REQUIRE(first_line(r.err).rfind("error: unsupported-inversion:", 0) == 0,
            "sweep error line: " << first_line(r.err));

    // eval
    r = run(cli, "eval --out " + out.string() + " --recon-images 8 --steps.eval-t 5", dir);
    REQUIRE(r.code == 0, "eval failed: " << r.err);
    REQUIRE(fs::exists(out / "report" / "report.json"), "report.json missing");
    REQUIRE(fs::exists(out / "report" / "report.txt"), "report.txt missing");
    {
        std::ifstream p(out / "report" / "latent_pca.csv");
        std::string header;
        std::getline(p, header);
        REQUIRE(header == "filename,compression,grade,fractured,pc1,pc2",
                "pca header wrong: " << header);
    }

    // error surface: missing checkpoint is a one-line machine-parsable error
    r = run(cli, "grade --out " + (dir / "nowhere").string() + " x.png", dir);
    REQUIRE(r.code != 0, "grade on missing artifacts should fail");
    REQUIRE(first_line(r.err).rfind("error: io-error:", 0) == 0,
            "error line format: " << first_line(r.err));

    fs::remove_all(dir);
    if (failures == 0) {
        std::puts("cli smoke: all checks passed");
        return 0;
    }
    std::printf("cli smoke: %d checks failed\n", failures);
    return 1;
}
