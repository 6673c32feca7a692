// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria 3-7 share one desk-scale training run; criterion 8
// exercises the CLI binary (path in argv[1]) on a small configuration.
//
//   acceptance <path-to-vfg-cli> [scratch-dir]
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "vfg/common.hpp"
#include "vfg/dae.hpp"
#include "vfg/diffusion.hpp"
#include "vfg/editing.hpp"
#include "vfg/grading.hpp"
#include "vfg/latent.hpp"
#include "vfg/metrics.hpp"
#include "vfg/synth.hpp"

using namespace vfg;
namespace fs = std::filesystem;
using clk = std::chrono::steady_clock;

namespace {

struct Criterion {
    int id;
    std::string description;
    bool pass = false;
    std::string detail;
};

std::vector<Criterion> results;

void record(int id, const std::string& description, bool pass, const std::string& detail) {
    results.push_back({id, description, pass, detail});
    std::fprintf(stderr, "  -> criterion %d %s (%s)\n", id, pass ? "pass" : "FAIL",
                 detail.c_str());
}

std::string file_bytes(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

double auc_pair_oracle(const std::vector<double>& s, const std::vector<int>& y) {
    double wins = 0.0;
    long pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!y[i]) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[j]) continue;
            ++pairs;
            if (s[i] > s[j]) wins += 1.0;
            else if (s[i] == s[j]) wins += 0.5;
        }
    }
    return wins / static_cast<double>(pairs);
}

// ---------------------------------------------------------------- criterion 1

void criterion1_math_properties() {
    bool ok = true;
    std::string why = "all properties held";
    auto fail_with = [&](const std::string& msg) {
        if (ok) why = msg;
        ok = false;
    };

    // DDIM step/invert round trip, 1e-5 relative
    {
        auto s = linear_beta_schedule(1000);
        Rng rng(401);
        for (int rep = 0; rep < 200 && ok; ++rep) {
            int tp = static_cast<int>(rng.uniform_int(0, 998));
            int t = static_cast<int>(rng.uniform_int(tp + 1, 999));
            Eigen::MatrixXd x(4, 4), e(4, 4);
            for (int i = 0; i < 16; ++i) {
                x.data()[i] = 2.0 * rng.normal();
                e.data()[i] = rng.normal();
            }
            auto up = ddim_invert_step(x, e, tp, t, s);
            auto back = ddim_step(up, e, t, tp, s);
            if ((back - x).norm() / (x.norm() + 1e-12) > 1e-5)
                fail_with("ddim round trip exceeded 1e-5");
        }
    }
    // q_sample linearity
    {
        auto s = linear_beta_schedule(1000);
        Rng rng(402);
        Eigen::MatrixXd x(3, 3), y(3, 3), zero = Eigen::MatrixXd::Zero(3, 3);
        for (int i = 0; i < 9; ++i) {
            x.data()[i] = rng.normal();
            y.data()[i] = rng.normal();
        }
        auto lhs = q_sample<Eigen::MatrixXd>(0.3 * x + 1.7 * y, 500, zero, s);
        auto rhs = 0.3 * q_sample<Eigen::MatrixXd>(x, 500, zero, s) +
                   1.7 * q_sample<Eigen::MatrixXd>(y, 500, zero, s);
        if ((lhs - rhs).cwiseAbs().maxCoeff() > 1e-12) fail_with("q_sample not linear");
    }
    // schedule monotonicity
    {
        for (int T : {1, 10, 1000}) {
            auto s = linear_beta_schedule(T);
            for (int t = 1; t <= T; ++t)
                if (!(s.alpha_bar[t] < s.alpha_bar[t - 1]))
                    fail_with("alpha_bar not strictly decreasing");
        }
        Rng rng(403);
        for (int rep = 0; rep < 100; ++rep) {
            int T = static_cast<int>(rng.uniform_int(1, 1500));
            int n = static_cast<int>(rng.uniform_int(1, T));
            auto sched = make_step_schedule(T, n);
            if (sched.t.front() != 0 || sched.t.back() != T)
                fail_with("step schedule endpoints wrong");
            for (std::size_t i = 1; i < sched.t.size(); ++i)
                if (sched.t[i] <= sched.t[i - 1]) fail_with("step schedule not increasing");
        }
    }
    // hyperplane distance vs projection oracle (1e-6)
    {
        Rng rng(404);
        LatentStandardizer id{LatentVec::Zero(16), LatentVec::Ones(16)};
        for (int rep = 0; rep < 1000 && ok; ++rep) {
            LatentVec w(16), z(16);
            for (int i = 0; i < 16; ++i) {
                w[i] = rng.normal();
                z[i] = 2.0 * rng.normal();
            }
            auto h = canonicalize(w, rng.normal(), "svm");
            LatentVec proj = z - (h.n.dot(z) + h.b) * h.n;
            if (std::abs(std::abs(distance(z, h, id)) - (z - proj).norm()) > 1e-6)
                fail_with("distance disagrees with projection oracle");
        }
    }
    // edit-latent exactness (1e-9)
    {
        Rng rng(405);
        for (int rep = 0; rep < 1000 && ok; ++rep) {
            int d = 8 + rep % 8;
            LatentVec w(d), z(d), mu(d), sg(d);
            for (int i = 0; i < d; ++i) {
                w[i] = rng.normal();
                z[i] = 3.0 * rng.normal();
                mu[i] = rng.normal();
                sg[i] = 0.5 + rng.uniform();
            }
            auto h = canonicalize(w, rng.normal(), "svm");
            LatentStandardizer st{mu, sg};
            double target = 4.0 * rng.normal();
            if (std::abs(distance(edit_latent(z, h, st, target), h, st) - target) > 1e-9)
                fail_with("edit_latent missed target distance");
        }
    }
    // two-point calibration anchors + affine invariance
    {
        Rng rng(406);
        std::vector<double> g0, g3, probes;
        for (int i = 0; i < 30; ++i) g0.push_back(-1.8 + rng.normal());
        for (int i = 0; i < 30; ++i) g3.push_back(3.6 + rng.normal());
        for (int i = 0; i < 40; ++i) probes.push_back(rng.uniform(-5.0, 7.0));
        auto cal = calibrate_two_point(g0, g3);
        if (std::abs(continuous_grade(cal.d0, cal)) > 1e-12 ||
            std::abs(continuous_grade(cal.d3, cal) - 3.0) > 1e-12)
            fail_with("two-point anchors broken");
        double a = 1.9, c = -0.7;
        auto scale = [&](std::vector<double> v) {
            for (auto& x : v) x = a * x + c;
            return v;
        };
        auto cal2 = calibrate_two_point(scale(g0), scale(g3));
        for (double d : probes)
            if (std::abs(continuous_grade(d, cal) - continuous_grade(a * d + c, cal2)) > 1e-9)
                fail_with("two-point affine invariance broken");
    }
    // roc_auc equals brute-force pair counting on 200 random instances
    {
        Rng rng(407);
        int done = 0;
        while (done < 200) {
            int n = static_cast<int>(rng.uniform_int(4, 60));
            std::vector<double> s;
            std::vector<int> y;
            int pos = 0;
            for (int i = 0; i < n; ++i) {
                s.push_back(std::round(rng.uniform() * 10.0) / 10.0);
                y.push_back(rng.uniform() < 0.4 ? 1 : 0);
                pos += y.back();
            }
            if (pos == 0 || pos == n) continue;
            ++done;
            if (std::abs(roc_auc(s, y) - auc_pair_oracle(s, y)) > 1e-12)
                fail_with("roc_auc disagrees with pair counting");
        }
    }
    // macro F1 hand-computed case, exact to 1e-9
    {
        std::vector<Grade> truth = {Grade::G0, Grade::G0, Grade::G2, Grade::G3};
        std::vector<Grade> pred = {Grade::G0, Grade::G2, Grade::G2, Grade::G0};
        if (std::abs(macro_f1(pred, truth) - 7.0 / 18.0) > 1e-9)
            fail_with("macro F1 hand case wrong");
    }
    // spearman 0.8 case
    {
        if (std::abs(spearman({1, 2, 3, 4}, {1, 3, 2, 4}) - 0.8) > 1e-12)
            fail_with("spearman hand case wrong");
    }
    record(1, "math property suite", ok, why);
}

// ---------------------------------------------------------------- criterion 2

void criterion2_gradcheck() {
    auto t0 = clk::now();
    DaeConfig cfg;
    cfg.image_size = 4;
    cfg.d = 4;
    cfg.base_width = 2;
    cfg.mult = {1, 2};
    cfg.time_embed_dim = 8;
    cfg.sin_dim = 8;
    cfg.groups = 2;
    cfg.train_t = 50;
    cfg.batch_size = 2;
    cfg.seed = 3;

    DaeModel<double> m;
    m.build(cfg);
    Rng rng(23);
    for (auto& p : m.param_list)
        for (Eigen::Index i = 0; i < p.value->size(); ++i)
            p.value->data()[i] = 0.3 * rng.normal();

    nn::Mat<double> x0(1, 32), eps(1, 32);
    std::vector<int> t = {11, 37};
    for (Eigen::Index i = 0; i < x0.size(); ++i) {
        x0.data()[i] = rng.uniform(-1.0, 1.0);
        eps.data()[i] = rng.normal();
    }
    nn::zero_grads(m.param_list);
    m.loss_and_grad(x0, t, eps);
    std::vector<nn::Mat<double>> analytic;
    for (auto& p : m.param_list) analytic.push_back(*p.grad);

    std::size_t total = 0, ok_count = 0;
    for (std::size_t pi = 0; pi < m.param_list.size(); ++pi) {
        auto& p = m.param_list[pi];
        for (Eigen::Index i = 0; i < p.value->size(); ++i) {
            double* v = p.value->data() + i;
            double h = 1e-5 * std::max(1.0, std::abs(*v));
            double orig = *v;
            *v = orig + h;
            double up = m.loss_and_grad(x0, t, eps);
            *v = orig - h;
            double down = m.loss_and_grad(x0, t, eps);
            *v = orig;
            double fd = (up - down) / (2.0 * h);
            double a = analytic[pi].data()[i];
            double denom = std::max({std::abs(fd), std::abs(a), 1e-8});
            ++total;
            if (std::abs(a - fd) <= 1e-3 * denom) ++ok_count;
        }
    }
    double frac = static_cast<double>(ok_count) / static_cast<double>(total);
    double secs = std::chrono::duration<double>(clk::now() - t0).count();
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%zu/%zu params within 1e-3 (%.1f%%), %.1fs", ok_count,
                  total, 100.0 * frac, secs);
    record(2, "gradient check on tiny model", frac >= 0.95 && secs < 60.0, buf);
}

// ------------------------------------------------------- shared pipeline state

struct Pipeline {
    fs::path dir;
    DatasetManifest manifest;
    std::vector<Image> train_images, test_images;
    std::vector<const ManifestRecord*> train_recs, test_recs;
    Dae model;
    LatentStandardizer standardizer;
    Hyperplane svm_plane, linear_plane;
    std::vector<LatentVec> train_latents, test_latents;
    Calibration cal_two_point, cal_poly1, cal_poly3;
    double train_minutes = 0.0;
    double final_val_mse = 1e9;
};

std::vector<LatentVec> encode_all(Dae& model, const std::vector<Image>& images) {
    std::vector<LatentVec> out;
    for (std::size_t i = 0; i < images.size(); i += 64) {
        std::size_t n = std::min<std::size_t>(64, images.size() - i);
        std::vector<const Image*> batch;
        for (std::size_t j = 0; j < n; ++j) batch.push_back(&images[i + j]);
        auto z = model.encode_semantic_batch(batch);
        for (std::size_t j = 0; j < n; ++j) {
            LatentVec v(z.rows());
            for (Eigen::Index k = 0; k < z.rows(); ++k)
                v[k] = z(k, static_cast<Eigen::Index>(j));
            out.push_back(std::move(v));
        }
    }
    return out;
}

void criterion3_train(Pipeline& p) {
    std::fprintf(stderr, "generating desk dataset...\n");
    DatasetSpec spec;  // desk defaults: 3000/300/500, seed 1
    p.manifest = generate_dataset(spec, (p.dir / "dataset").string());

    auto load = [&](const std::string& split, std::vector<Image>& images,
                    std::vector<const ManifestRecord*>& recs) {
        recs = p.manifest.split(split);
        for (const auto* r : recs)
            images.push_back(read_png_gray8((p.dir / "dataset" / r->filename).string()));
    };
    std::vector<Image> val_images;
    std::vector<const ManifestRecord*> val_recs;
    load("train", p.train_images, p.train_recs);
    load("val", val_images, val_recs);
    load("test", p.test_images, p.test_recs);

    DaeConfig cfg = DaeConfig::desk();
    std::fprintf(stderr, "training desk preset (%lld samples)...\n", cfg.total_samples);
    auto t0 = clk::now();
    TrainOptions opt;
    opt.loss_csv = (p.dir / "loss.csv").string();
    p.model = train_dae(p.train_images, cfg, val_images, opt);
    p.train_minutes = std::chrono::duration<double>(clk::now() - t0).count() / 60.0;

    // held-out reconstruction at eval_T = 20
    auto steps = make_step_schedule(cfg.train_t, 20);
    std::vector<const Image*> val_ptrs;
    for (std::size_t i = 0; i < std::min<std::size_t>(64, val_images.size()); ++i)
        val_ptrs.push_back(&val_images[i]);
    p.final_val_mse = p.model.reconstruction_mse(val_ptrs, steps);

    std::string detail;
    {
        char buf[200];
        std::snprintf(buf, sizeof(buf), "%.1f min, held-out recon MSE %.5f (limit 0.01)",
                      p.train_minutes, p.final_val_mse);
        detail = buf;
        for (const auto& m : p.model.milestones) {
            std::snprintf(buf, sizeof(buf), "; %lldk: %.5f", m.samples / 1000, m.val_mse);
            detail += buf;
        }
    }
    record(3, "desk training sanity", p.train_minutes <= 60.0 && p.final_val_mse <= 0.01,
           detail);
}

void criterion4_detection(Pipeline& p) {
    p.train_latents = encode_all(p.model, p.train_images);
    p.test_latents = encode_all(p.model, p.test_images);

    std::vector<LatentVec> z;
    std::vector<int> y;
    for (std::size_t i = 0; i < p.train_recs.size(); ++i) {
        const auto* r = p.train_recs[i];
        if (r->grade == Grade::G0) {
            z.push_back(p.train_latents[i]);
            y.push_back(0);
        } else if (r->fractured && r->graded) {
            z.push_back(p.train_latents[i]);
            y.push_back(1);
        }
    }
    p.standardizer = fit_standardizer(z);
    std::vector<LatentVec> zs;
    for (const auto& v : z) zs.push_back(p.standardizer.apply(v));
    p.svm_plane = train_svm(zs, y);
    p.linear_plane = train_linear_probe(zs, y);

    std::vector<double> s_svm, s_lin;
    std::vector<int> labels;
    for (std::size_t i = 0; i < p.test_recs.size(); ++i) {
        const auto* r = p.test_recs[i];
        if (r->grade == Grade::G1) continue;
        s_svm.push_back(distance(p.test_latents[i], p.svm_plane, p.standardizer));
        s_lin.push_back(distance(p.test_latents[i], p.linear_plane, p.standardizer));
        labels.push_back(r->fractured ? 1 : 0);
    }
    double auc_svm = roc_auc(s_svm, labels);
    double auc_lin = roc_auc(s_lin, labels);
    char buf[120];
    std::snprintf(buf, sizeof(buf), "AUC svm %.4f, linear %.4f (need >= 0.95)", auc_svm,
                  auc_lin);
    record(4, "detection AUC for both probes", auc_svm >= 0.95 && auc_lin >= 0.95, buf);
}

void criterion5_grading(Pipeline& p) {
    std::vector<double> d_g0, d_g3, dists, targets;
    for (std::size_t i = 0; i < p.train_recs.size(); ++i) {
        const auto* r = p.train_recs[i];
        double d = distance(p.train_latents[i], p.svm_plane, p.standardizer);
        if (r->grade == Grade::G0) d_g0.push_back(d);
        else if (r->graded && r->grade == Grade::G3) d_g3.push_back(d);
        if (r->grade == Grade::G0 || (r->graded && r->fractured)) {
            dists.push_back(d);
            targets.push_back(static_cast<double>(grade_value(r->grade)));
        }
    }
    p.cal_two_point = calibrate_two_point(d_g0, d_g3);
    p.cal_poly1 = calibrate_poly(dists, targets, 1);
    p.cal_poly3 = calibrate_poly(dists, targets, 3);

    auto f1_of = [&](const Calibration& cal) {
        std::vector<Grade> pred, truth;
        for (std::size_t i = 0; i < p.test_recs.size(); ++i) {
            const auto* r = p.test_recs[i];
            if (r->grade == Grade::G1) continue;
            double d = distance(p.test_latents[i], p.svm_plane, p.standardizer);
            pred.push_back(eval_label(ordinal_grade(continuous_grade(d, cal))));
            truth.push_back(r->grade);
        }
        return macro_f1(pred, truth);
    };
    double f1_two = f1_of(p.cal_two_point);
    double f1_p1 = f1_of(p.cal_poly1);
    double f1_p3 = f1_of(p.cal_poly3);
    bool ok = f1_two >= 0.75 && std::abs(f1_p1 - f1_two) <= 0.1 && f1_p3 >= f1_p1 - 0.05;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "macro F1 two-point %.4f (>=0.75), poly1 %.4f (+-0.1), poly3 %.4f (>= poly1-0.05)",
                  f1_two, f1_p1, f1_p3);
    record(5, "grading macro F1", ok, buf);
}

void criterion6_continuity(Pipeline& p) {
    std::vector<double> dists, comps;
    for (std::size_t i = 0; i < p.test_recs.size(); ++i) {
        const auto* r = p.test_recs[i];
        if (!r->fractured) continue;
        dists.push_back(distance(p.test_latents[i], p.svm_plane, p.standardizer));
        comps.push_back(r->compression);
    }
    double rho = spearman(dists, comps);
    char buf[120];
    std::snprintf(buf, sizeof(buf), "spearman(distance, compression) = %.4f on %zu fractured",
                  rho, dists.size());
    record(6, "severity continuity", rho >= 0.8, buf);
}

void criterion7_counterfactuals(Pipeline& p) {
    std::fprintf(stderr, "running counterfactual battery...\n");
    auto eval_steps = make_step_schedule(p.model.cfg.train_t, 20);
    auto gen_steps = make_step_schedule(p.model.cfg.train_t, 100);
    const GeneratorConfig& gc = p.manifest.gen;

    std::vector<double> requested, measured;
    int battery = 0, g3_hits = 0, g3_total = 0;
    for (std::size_t i = 0; i < p.test_recs.size() && battery < 20; ++i) {
        const auto* r = p.test_recs[i];
        if (r->grade != Grade::G0) continue;
        ++battery;
        const Image& src = p.test_images[i];
        double base = 0.0;
        bool base_ok = true;
        try {
            base = measure_height_reduction(src, gc);
        } catch (const Error&) {
            base_ok = false;
        }
        for (double g : {-1.0, 0.0, 1.0, 2.0, 3.0, 4.0}) {
            Image cf = counterfactual(p.model, p.svm_plane, p.standardizer, p.cal_two_point,
                                      src, g, eval_steps, gen_steps);
            double m = std::numeric_limits<double>::quiet_NaN();
            try {
                m = measure_height_reduction(cf, gc);
            } catch (const Error&) {
            }
            if (std::isfinite(m)) {
                requested.push_back(g);
                measured.push_back(m);
            }
            if (g == 3.0) {
                ++g3_total;
                if (base_ok && std::isfinite(m) && m - base >= 0.15) ++g3_hits;
            }
        }
    }
    double rho = spearman(requested, measured);
    double hit_rate = static_cast<double>(g3_hits) / static_cast<double>(g3_total);
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "spearman(requested, measured) %.4f (>=0.6) on %zu pairs; G0->G3 +0.15 in %d/%d (>=70%%)",
                  rho, requested.size(), g3_hits, g3_total);
    record(7, "counterfactual direction", rho >= 0.6 && hit_rate >= 0.7, buf);
}

// ---------------------------------------------------------------- criterion 8

int run_cli(const std::string& cli, const std::string& args, const fs::path& log) {
    std::string cmd = cli + " " + args + " >> " + log.string() + " 2>&1";
    return std::system(cmd.c_str());
}

void criterion8_determinism(const std::string& cli, const fs::path& dir) {
    std::fprintf(stderr, "checking artifact determinism through the CLI...\n");
    fs::path log = dir / "cli.log";
    bool ok = true;
    std::string why = "synth/train/probe/calibrate reruns byte-identical";
    auto fail_with = [&](const std::string& msg) {
        if (ok) why = msg;
        ok = false;
    };

    std::string synth_args = "--n-train 60 --n-val 16 --n-test 16 --seed 5";
    std::string small_dae =
        "--dae.base-width 8 --dae.d 8 --dae.groups 4 --dae.sin-dim 16 --dae.time-embed-dim 32 "
        "--dae.batch-size 16 --dae.total-samples 640 --dae.train-t 100 --seed 7";

    fs::path a = dir / "det_a", b = dir / "det_b";
    if (run_cli(cli, "synth --out " + a.string() + " " + synth_args, log) != 0 ||
        run_cli(cli, "synth --out " + b.string() + " " + synth_args, log) != 0)
        fail_with("synth run failed");
    if (ok && file_bytes(a / "dataset" / "manifest.csv") != file_bytes(b / "dataset" / "manifest.csv"))
        fail_with("manifests differ across reruns");
    if (ok && file_bytes(a / "dataset" / "train_000000.png") !=
                  file_bytes(b / "dataset" / "train_000000.png"))
        fail_with("images differ across reruns");

    if (ok && (run_cli(cli, "train --single-thread --out " + a.string() + " " + small_dae, log) != 0 ||
               run_cli(cli, "train --single-thread --out " + b.string() + " " + small_dae, log) != 0))
        fail_with("train run failed");
    if (ok && file_bytes(a / "dae.ckpt") != file_bytes(b / "dae.ckpt"))
        fail_with("checkpoints differ across reruns");
    if (ok && file_bytes(a / "loss.csv") != file_bytes(b / "loss.csv"))
        fail_with("loss curves differ across reruns");

    if (ok && (run_cli(cli, "probe --out " + a.string() + " --seed 7", log) != 0 ||
               run_cli(cli, "probe --out " + b.string() + " --seed 7", log) != 0))
        fail_with("probe run failed");
    if (ok && file_bytes(a / "probe.json") != file_bytes(b / "probe.json"))
        fail_with("probe files differ across reruns");

    if (ok && (run_cli(cli, "calibrate --out " + a.string() + " --seed 7", log) != 0 ||
               run_cli(cli, "calibrate --out " + b.string() + " --seed 7", log) != 0))
        fail_with("calibrate run failed");
    if (ok && file_bytes(a / "calibration.json") != file_bytes(b / "calibration.json"))
        fail_with("calibration files differ across reruns");

    record(8, "artifact determinism via CLI", ok, why);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: acceptance <path-to-vfg-cli> [scratch-dir]\n");
        return 2;
    }
    std::string cli = argv[1];
    fs::path dir = argc > 2 ? fs::path(argv[2])
                            : fs::temp_directory_path() / "vfg_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);

    try {
        criterion1_math_properties();
        criterion2_gradcheck();
        criterion8_determinism(cli, dir);

        Pipeline p;
        p.dir = dir;
        criterion3_train(p);
        criterion4_detection(p);
        criterion5_grading(p);
        criterion6_continuity(p);
        criterion7_counterfactuals(p);
    } catch (const Error& e) {
        std::fprintf(stderr, "acceptance aborted: %s: %s\n", e.code().c_str(), e.what());
        return 2;
    }

    std::sort(results.begin(), results.end(),
              [](const Criterion& a, const Criterion& b) { return a.id < b.id; });
    bool all = true;
    for (const auto& r : results) {
        std::printf("[%s] criterion %d: %s: %s\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.description.c_str(), r.detail.c_str());
        all = all && r.pass;
    }
    std::printf("%s\n", all ? "acceptance: all criteria passed"
                            : "acceptance: one or more criteria FAILED");
    fs::remove_all(dir);
    return all ? 0 : 1;
}
