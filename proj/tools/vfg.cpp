// Pipeline driver: synth | train | probe | calibrate | grade | sweep | eval.
// Global flags: --config <path> --seed <int> --single-thread --out <dir>;
// any config key can be overridden with --<section>.<key> <value> (bare keys
// resolve against the subcommand's own section first).
#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

#include "vfg/config.hpp"
#include "vfg/dae.hpp"
#include "vfg/editing.hpp"
#include "vfg/grading.hpp"
#include "vfg/latent.hpp"
#include "vfg/metrics.hpp"
#include "vfg/pca.hpp"
#include "vfg/synth.hpp"

namespace fs = std::filesystem;
using namespace vfg;

namespace {

struct LoadedSplit {
    std::vector<const ManifestRecord*> records;
    std::vector<Image> images;
};

LoadedSplit load_split(const DatasetManifest& manifest, const std::string& dir,
                       const std::string& split) {
    LoadedSplit out;
    out.records = manifest.split(split);
    check(!out.records.empty(), "empty-input", "dataset has no '" + split + "' split");
    out.images.reserve(out.records.size());
    for (const auto* r : out.records)
        out.images.push_back(read_png_gray8((fs::path(dir) / r->filename).string()));
    return out;
}

// batched semantic encoding of a whole split
std::vector<LatentVec> encode_split(Dae& model, const LoadedSplit& split) {
    std::vector<LatentVec> out;
    out.reserve(split.images.size());
    const std::size_t chunk = 64;
    for (std::size_t i = 0; i < split.images.size(); i += chunk) {
        std::size_t n = std::min(chunk, split.images.size() - i);
        std::vector<const Image*> batch;
        for (std::size_t j = 0; j < n; ++j) batch.push_back(&split.images[i + j]);
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

// probe training set: all G0 plus fractured samples whose grade is exposed
void probe_training_set(const LoadedSplit& split, const std::vector<LatentVec>& latents,
                        std::vector<LatentVec>& z, std::vector<int>& y) {
    for (std::size_t i = 0; i < split.records.size(); ++i) {
        const auto* r = split.records[i];
        if (r->grade == Grade::G0) {
            z.push_back(latents[i]);
            y.push_back(0);
        } else if (r->fractured && r->graded) {
            z.push_back(latents[i]);
            y.push_back(1);
        }
    }
    check(!z.empty(), "empty-input", "no probe-eligible samples in the train split");
}

Calibration fit_calibration(const RunConfig& rc, const LoadedSplit& split,
                            const std::vector<LatentVec>& latents, const Hyperplane& plane,
                            const LatentStandardizer& std_) {
    if (rc.calibration_kind == "two_point") {
        std::vector<double> d_g0, d_g3;
        for (std::size_t i = 0; i < split.records.size(); ++i) {
            const auto* r = split.records[i];
            double d = distance(latents[i], plane, std_);
            if (r->grade == Grade::G0) d_g0.push_back(d);
            else if (r->graded && r->grade == Grade::G3) d_g3.push_back(d);
        }
        return calibrate_two_point(d_g0, d_g3);
    }
    int degree = rc.calibration_kind == "poly1" ? 1 : 3;
    std::vector<double> dists, targets;
    for (std::size_t i = 0; i < split.records.size(); ++i) {
        const auto* r = split.records[i];
        bool use = r->grade == Grade::G0 || (r->graded && r->fractured);
        if (!use) continue;
        dists.push_back(distance(latents[i], plane, std_));
        targets.push_back(static_cast<double>(grade_value(r->grade)));
    }
    return calibrate_poly(dists, targets, degree);
}

int cmd_synth(const RunConfig& rc) {
    auto manifest = generate_dataset(rc.synth, rc.dataset_dir);
    std::map<std::string, std::array<int, 4>> per_split;
    for (const auto& r : manifest.records)
        ++per_split[r.split][static_cast<std::size_t>(grade_value(r.grade))];
    std::printf("dataset written to %s (%zu images)\n", rc.dataset_dir.c_str(),
                manifest.records.size());
    for (const auto& [split, counts] : per_split)
        std::printf("  %-5s  G0=%d G1=%d G2=%d G3=%d\n", split.c_str(), counts[0], counts[1],
                    counts[2], counts[3]);
    return 0;
}

int cmd_train(const RunConfig& rc) {
    auto manifest = read_manifest_csv((fs::path(rc.dataset_dir) / "manifest.csv").string());
    auto train = load_split(manifest, rc.dataset_dir, "train");
    auto val = load_split(manifest, rc.dataset_dir, "val");
    DaeConfig cfg = rc.dae;
    cfg.image_size = train.images.front().h;

    fs::create_directories(fs::path(rc.checkpoint).parent_path().empty()
                               ? "."
                               : fs::path(rc.checkpoint).parent_path().string());
    TrainOptions opt;
    opt.loss_csv = rc.loss_csv;
    opt.checkpoint_path = rc.checkpoint;
    opt.eval_steps = rc.eval_t;
    std::printf("training on %zu images (%lld samples, batch %d, lr %g)\n", train.images.size(),
                cfg.total_samples, cfg.batch_size, cfg.lr);
    Dae model = train_dae(train.images, cfg, val.images, opt);
    std::printf("checkpoint written to %s\n", rc.checkpoint.c_str());
    for (const auto& m : model.milestones)
        std::printf("  %lld samples: val recon MSE %.6f\n", m.samples, m.val_mse);
    return 0;
}

int cmd_probe(const RunConfig& rc) {
    Dae model = load_checkpoint(rc.checkpoint);
    auto manifest = read_manifest_csv((fs::path(rc.dataset_dir) / "manifest.csv").string());
    auto train = load_split(manifest, rc.dataset_dir, "train");
    auto latents = encode_split(model, train);

    std::vector<LatentVec> z;
    std::vector<int> y;
    probe_training_set(train, latents, z, y);

    auto std_ = fit_standardizer(z);
    std::vector<LatentVec> zs;
    zs.reserve(z.size());
    for (const auto& v : z) zs.push_back(std_.apply(v));
    LatentStandardizer identity{LatentVec::Zero(zs.front().size()),
                                LatentVec::Ones(zs.front().size())};
    Hyperplane plane = rc.probe_kind == "svm" ? train_svm(zs, y, rc.probe)
                                              : train_linear_probe(zs, y, rc.probe);
    // plane is fitted in standardized space; persist with the standardizer
    save_probe(rc.probe_file, plane, std_);

    // validation AUC on G0 vs G2/G3
    auto val = load_split(manifest, rc.dataset_dir, "val");
    auto val_latents = encode_split(model, val);
    std::vector<double> scores;
    std::vector<int> labels;
    int val_pos = 0;
    for (std::size_t i = 0; i < val.records.size(); ++i) {
        if (val.records[i]->grade == Grade::G1) continue;
        scores.push_back(distance(val_latents[i], plane, std_));
        labels.push_back(val.records[i]->fractured ? 1 : 0);
        val_pos += labels.back();
    }
    bool auc_defined = val_pos > 0 && val_pos < static_cast<int>(labels.size());
    double auc = auc_defined ? roc_auc(scores, labels) : -1.0;
    if (auc_defined)
        std::printf("probe (%s) on %zu samples: validation AUC (G0 vs G2/G3) = %.4f\n",
                    rc.probe_kind.c_str(), z.size(), auc);
    else
        std::printf("probe (%s) on %zu samples: validation AUC n/a (single-class val split)\n",
                    rc.probe_kind.c_str(), z.size());
    std::printf("probe written to %s\n", rc.probe_file.c_str());

    fs::create_directories(rc.report_dir);
    nlohmann::json j;
    j["probe_kind"] = rc.probe_kind;
    j["train_samples"] = z.size();
    if (auc_defined) j["validation_auc"] = auc;
    std::ofstream((fs::path(rc.report_dir) / "probe_report.json").string(), std::ios::binary)
        << j.dump(2) << '\n';
    return 0;
}

int cmd_calibrate(const RunConfig& rc) {
    Dae model = load_checkpoint(rc.checkpoint);
    Hyperplane plane;
    LatentStandardizer std_;
    load_probe(rc.probe_file, plane, std_);
    auto manifest = read_manifest_csv((fs::path(rc.dataset_dir) / "manifest.csv").string());
    auto train = load_split(manifest, rc.dataset_dir, "train");
    auto latents = encode_split(model, train);

    Calibration cal = fit_calibration(rc, train, latents, plane, std_);
    save_calibration(rc.calibration_file, cal);
    if (cal.kind == Calibration::Kind::TwoPointLinear)
        std::printf("calibration two_point: d0=%.4f d3=%.4f\n", cal.d0, cal.d3);
    else
        std::printf("calibration poly degree %d: monotone=%s on [%.4f, %.4f]\n", cal.degree(),
                    cal.monotone ? "yes" : "no", cal.d_min, cal.d_max);
    std::printf("calibration written to %s\n", rc.calibration_file.c_str());
    return 0;
}

int cmd_grade(const RunConfig& rc, const std::vector<std::string>& images) {
    check(!images.empty(), "empty-input", "grade needs at least one image path");
    Dae model = load_checkpoint(rc.checkpoint);
    Hyperplane plane;
    LatentStandardizer std_;
    load_probe(rc.probe_file, plane, std_);
    Calibration cal = load_calibration(rc.calibration_file);

    fs::create_directories(rc.out);
    std::string csv_path = (fs::path(rc.out) / "grades.csv").string();
    std::ofstream csv(csv_path, std::ios::binary);
    check(csv.good(), "io-error", "cannot write " + csv_path);
    csv << "filename,distance,continuous_grade,ordinal_grade\n";
    std::printf("filename,distance,continuous_grade,ordinal_grade\n");
    for (const auto& path : images) {
        Image img = read_png_gray8(path);
        auto zv = model.encode_semantic(img);
        LatentVec z = Eigen::Map<const LatentVec>(zv.data(), static_cast<Eigen::Index>(zv.size()));
        double d = distance(z, plane, std_);
        double g = continuous_grade(d, cal);
        Grade og = ordinal_grade(g);
        char line[512];
        std::snprintf(line, sizeof(line), "%s,%.6f,%.6f,%d", fs::path(path).filename().c_str(),
                      d, g, grade_value(og));
        csv << line << '\n';
        std::printf("%s\n", line);
    }
    std::printf("grades written to %s\n", csv_path.c_str());
    return 0;
}

int cmd_sweep(const RunConfig& rc, const std::string& image_path,
              const std::vector<double>& grades) {
    Dae model = load_checkpoint(rc.checkpoint);
    Hyperplane plane;
    LatentStandardizer std_;
    load_probe(rc.probe_file, plane, std_);
    Calibration cal = load_calibration(rc.calibration_file);

    Image img = read_png_gray8(image_path);
    auto eval_steps = make_step_schedule(model.cfg.train_t, rc.eval_t);
    auto gen_steps = make_step_schedule(model.cfg.train_t, rc.gen_t);
    GeneratorConfig gen_cfg = rc.synth.gen;
    gen_cfg.image_size = model.cfg.image_size;

    SweepResult sweep =
        grade_sweep(model, plane, std_, cal, img, grades, eval_steps, gen_steps, gen_cfg);
    fs::create_directories(rc.out);
    std::string stem = (fs::path(rc.out) / fs::path(image_path).stem()).string();
    save_sweep(stem, sweep);
    std::printf("target_grade,target_distance,measured_reduction\n");
    for (const auto& row : sweep.rows)
        std::printf("%g,%.6f,%.6f\n", row.target_grade, row.target_dist,
                    row.measured_reduction);
    std::printf("sweep written to %s_sweep.png / %s_sweep.csv\n", stem.c_str(), stem.c_str());
    return 0;
}

int cmd_eval(const RunConfig& rc) {
    Dae model = load_checkpoint(rc.checkpoint);
    Hyperplane plane;
    LatentStandardizer std_;
    load_probe(rc.probe_file, plane, std_);
    Calibration cal = load_calibration(rc.calibration_file);
    auto manifest = read_manifest_csv((fs::path(rc.dataset_dir) / "manifest.csv").string());
    auto test = load_split(manifest, rc.dataset_dir, "test");
    auto latents = encode_split(model, test);

    EvalReport report;
    report.probe_kind = plane.probe_kind;
    report.calibration_kind = rc.calibration_kind;
    report.calibration_monotone = cal.monotone;

    std::vector<double> det_scores, frac_dists, frac_comp;
    std::vector<int> det_labels;
    std::vector<Grade> pred, truth;
    for (std::size_t i = 0; i < test.records.size(); ++i) {
        const auto* r = test.records[i];
        double d = distance(latents[i], plane, std_);
        if (r->fractured) {
            frac_dists.push_back(d);
            frac_comp.push_back(r->compression);
        }
        if (r->grade == Grade::G1) continue;  // excluded from detection and grading
        det_scores.push_back(d);
        det_labels.push_back(r->fractured ? 1 : 0);
        Grade g = eval_label(ordinal_grade(continuous_grade(d, cal)));
        pred.push_back(g);
        truth.push_back(r->grade);
        report.confusion.add(r->grade, g);
    }
    report.detection_auc = roc_auc(det_scores, det_labels);
    report.macro_f1 = macro_f1(pred, truth, &report.per_class);
    report.n_detection = det_scores.size();
    report.n_grading = pred.size();
    report.n_fractured = frac_dists.size();
    report.spearman_distance_compression = spearman(frac_dists, frac_comp);

    // reconstruction quality on the first test images
    auto steps = make_step_schedule(model.cfg.train_t, rc.eval_t);
    std::size_t n_recon =
        std::min<std::size_t>(static_cast<std::size_t>(rc.eval_recon_images), test.images.size());
    double mse_sum = 0.0;
    for (std::size_t i = 0; i < n_recon; i += 32) {
        std::size_t n = std::min<std::size_t>(32, n_recon - i);
        std::vector<const Image*> batch;
        for (std::size_t j = 0; j < n; ++j) batch.push_back(&test.images[i + j]);
        mse_sum += model.reconstruction_mse(batch, steps) * static_cast<double>(n);
    }
    report.recon_mse = mse_sum / static_cast<double>(n_recon);
    report.recon_psnr =
        report.recon_mse == 0.0 ? std::numeric_limits<double>::infinity()
                                : 10.0 * std::log10(1.0 / report.recon_mse);
    report.n_recon = n_recon;

    // 2-D PCA of the test latents (t-SNE substitute)
    fs::create_directories(rc.report_dir);
    Pca2 pca = fit_pca2(latents);
    std::ofstream scatter((fs::path(rc.report_dir) / "latent_pca.csv").string(),
                          std::ios::binary);
    scatter << "filename,compression,grade,fractured,pc1,pc2\n";
    for (std::size_t i = 0; i < test.records.size(); ++i) {
        auto p = pca.project(latents[i]);
        char line[512];
        std::snprintf(line, sizeof(line), "%s,%.6f,%d,%d,%.6f,%.6f",
                      test.records[i]->filename.c_str(), test.records[i]->compression,
                      grade_value(test.records[i]->grade), test.records[i]->fractured ? 1 : 0,
                      p[0], p[1]);
        scatter << line << '\n';
    }

    std::ofstream((fs::path(rc.report_dir) / "report.json").string(), std::ios::binary)
        << eval_report_to_json(report).dump(2) << '\n';
    std::string text = eval_report_text(report);
    std::ofstream((fs::path(rc.report_dir) / "report.txt").string(), std::ios::binary) << text;
    std::fputs(text.c_str(), stdout);
    std::printf("report written to %s\n", rc.report_dir.c_str());
    return 0;
}

// bare --key overrides resolve against the subcommand's own section first
std::string qualify_key(const std::string& raw, const std::string& section) {
    std::string key = KvConfig::normalize(raw);
    if (key.find('.') != std::string::npos) return key;
    static const std::map<std::string, std::string, std::less<>> bare_paths = {
        {"out", "paths.out"},           {"dataset_dir", "paths.dataset_dir"},
        {"checkpoint", "paths.checkpoint"}, {"probe", "paths.probe"},
        {"calibration", "paths.calibration"}, {"report_dir", "paths.report_dir"},
        {"eval_t", "steps.eval_t"},     {"gen_t", "steps.gen_t"},
        {"seed", "seed"},               {"single_thread", "single_thread"}};
    if (auto it = bare_paths.find(key); it != bare_paths.end()) return it->second;
    return section + "." + key;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic vertebral fracture grading with a diffusion autoencoder"};
    app.require_subcommand(1);
    app.allow_extras();

    std::string config_path, out_dir;
    std::optional<long long> seed;
    bool single_thread = false;
    app.add_option("--config", config_path, "INI config file");
    app.add_option("--seed", seed, "global seed (overrides stage seeds)");
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--single-thread", single_thread, "force deterministic single-thread mode");

    std::map<std::string, std::string> sections = {
        {"synth", "synth"}, {"train", "dae"},   {"probe", "probe"}, {"calibrate", "calibrate"},
        {"grade", "paths"}, {"sweep", "sweep"}, {"eval", "eval"}};
    std::vector<std::string> grade_images;
    std::string sweep_image;
    std::string sweep_grades = "-1,0,1,2,3,4";

    auto* sc_synth = app.add_subcommand("synth", "generate the labeled synthetic dataset");
    auto* sc_train = app.add_subcommand("train", "train the diffusion autoencoder (unsupervised)");
    auto* sc_probe = app.add_subcommand("probe", "fit the fracture hyperplane on frozen latents");
    auto* sc_cal = app.add_subcommand("calibrate", "fit the distance-to-grade calibration");
    auto* sc_grade = app.add_subcommand("grade", "grade images with the fitted pipeline");
    sc_grade->add_option("images", grade_images, "image files to grade");
    auto* sc_sweep = app.add_subcommand("sweep", "decode one image at a row of target grades");
    sc_sweep->add_option("image", sweep_image, "source image")->required();
    sc_sweep->add_option("--grades", sweep_grades, "comma-separated target grades");
    auto* sc_eval = app.add_subcommand("eval", "full test-split evaluation report");
    for (auto* sc : {sc_synth, sc_train, sc_probe, sc_cal, sc_grade, sc_sweep, sc_eval})
        sc->allow_extras();

    CLI11_PARSE(app, argc, argv);

    try {
        auto* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();

        KvConfig kv;
        if (!config_path.empty()) kv.load_file(config_path);
        // leftover --key value pairs override file values
        auto extras = sub->remaining();
        for (std::size_t i = 0; i < extras.size(); ++i) {
            std::string tok = extras[i];
            check(tok.rfind("--", 0) == 0 && i + 1 < extras.size(), "bad-flag",
                  "expected --key value pairs, got: " + tok);
            kv.set(qualify_key(tok.substr(2), sections.at(name)), extras[++i]);
        }
        if (seed) kv.set("seed", std::to_string(*seed));
        if (!out_dir.empty()) kv.set("paths.out", out_dir);
        if (single_thread) kv.set("single_thread", "1");

        RunConfig rc = RunConfig::from_kv(kv);

        if (name == "synth") return cmd_synth(rc);
        if (name == "train") return cmd_train(rc);
        if (name == "probe") return cmd_probe(rc);
        if (name == "calibrate") return cmd_calibrate(rc);
        if (name == "grade") return cmd_grade(rc, grade_images);
        if (name == "sweep") {
            std::vector<double> grades;
            std::stringstream ss(kv.get("sweep.grades", sweep_grades));
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!tok.empty()) grades.push_back(std::stod(tok));
            return cmd_sweep(rc, sweep_image, grades);
        }
        if (name == "eval") return cmd_eval(rc);
        fail("bad-command", "unknown subcommand: " + name);
    } catch (const Error& e) {
        std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
}
