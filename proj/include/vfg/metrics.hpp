// Evaluation metrics: ROC-AUC (midrank form), macro F1 over {G0,G2,G3},
// reconstruction MSE/PSNR, Spearman rank correlation.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vfg/common.hpp"
#include "vfg/image.hpp"
#include "vfg/synth.hpp"

namespace vfg {

namespace detail {

// Average ranks (1-based), ties get the midrank.
inline std::vector<double> midranks(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
        i = j + 1;
    }
    return rank;
}

}  // namespace detail

// P(random positive outscores random negative), ties 0.5.
inline double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check(scores.size() == labels.size(), "shape-mismatch", "scores/labels length differ");
    std::size_t n_pos = 0, n_neg = 0;
    for (int l : labels) (l ? n_pos : n_neg)++;
    check(n_pos > 0 && n_neg > 0, "single-class", "roc_auc needs both classes");
    auto rank = detail::midranks(scores);
    double rank_sum_pos = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i]) rank_sum_pos += rank[i];
    double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

struct ClassScore {
    Grade cls;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

// Unweighted mean of per-class F1 over {G0, G2, G3}. A class with no true
// and no predicted samples contributes F1 = 0.
inline double macro_f1(const std::vector<Grade>& pred, const std::vector<Grade>& truth,
                       std::vector<ClassScore>* per_class = nullptr) {
    check(!pred.empty() && pred.size() == truth.size(), "invalid-input",
          "macro_f1 needs equal-length nonempty inputs");
    const std::array<Grade, 3> classes = {Grade::G0, Grade::G2, Grade::G3};
    double sum = 0.0;
    if (per_class) per_class->clear();
    for (Grade cls : classes) {
        std::size_t tp = 0, fp = 0, fn = 0, support = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            bool p = pred[i] == cls, t = truth[i] == cls;
            if (t) ++support;
            if (p && t) ++tp;
            else if (p) ++fp;
            else if (t) ++fn;
        }
        double prec = (tp + fp) ? static_cast<double>(tp) / (tp + fp) : 0.0;
        double rec = (tp + fn) ? static_cast<double>(tp) / (tp + fn) : 0.0;
        double f1 = (prec + rec > 0.0) ? 2.0 * prec * rec / (prec + rec) : 0.0;
        sum += f1;
        if (per_class) per_class->push_back({cls, prec, rec, f1, support});
    }
    return sum / static_cast<double>(classes.size());
}

// MSE over [0,1] pixels; PSNR = 10 log10(1/MSE), +inf for identical images.
inline std::pair<double, double> mse_psnr(const Image& a, const Image& b) {
    double m = mse(a, b);
    double psnr = m == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(1.0 / m);
    return {m, psnr};
}

// Confusion counts over {G0, G2, G3}; rows = truth, cols = prediction.
struct Confusion3 {
    std::array<std::array<std::size_t, 3>, 3> m{};

    static int index_of(Grade g) { return g == Grade::G0 ? 0 : (g == Grade::G2 ? 1 : 2); }

    void add(Grade truth, Grade pred) { ++m[static_cast<std::size_t>(index_of(truth))]
                                            [static_cast<std::size_t>(index_of(pred))]; }
};

// Pearson correlation of midranks.
inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    check(x.size() == y.size() && x.size() >= 3, "invalid-input",
          "spearman needs equal lengths >= 3");
    auto rx = detail::midranks(x);
    auto ry = detail::midranks(y);
    double n = static_cast<double>(x.size());
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        double dx = rx[i] - mx, dy = ry[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    check(sxx > 0.0 && syy > 0.0, "undefined-correlation",
          "spearman undefined for constant input");
    return sxy / std::sqrt(sxx * syy);
}

// Full test-split evaluation summary.
struct EvalReport {
    std::string probe_kind;
    std::string calibration_kind;
    double detection_auc = 0.0;
    double macro_f1 = 0.0;
    std::vector<ClassScore> per_class;
    Confusion3 confusion;
    double recon_mse = 0.0;
    double recon_psnr = 0.0;
    double spearman_distance_compression = 0.0;  // fractured test samples
    bool calibration_monotone = true;
    std::size_t n_detection = 0;
    std::size_t n_grading = 0;
    std::size_t n_fractured = 0;
    std::size_t n_recon = 0;
};

inline nlohmann::json eval_report_to_json(const EvalReport& r) {
    nlohmann::json j;
    j["probe_kind"] = r.probe_kind;
    j["calibration_kind"] = r.calibration_kind;
    j["detection_auc"] = r.detection_auc;
    j["macro_f1"] = r.macro_f1;
    nlohmann::json pc = nlohmann::json::array();
    const char* names[] = {"G0", "G2", "G3"};
    for (std::size_t i = 0; i < r.per_class.size(); ++i) {
        pc.push_back({{"class", names[i]},
                      {"precision", r.per_class[i].precision},
                      {"recall", r.per_class[i].recall},
                      {"f1", r.per_class[i].f1},
                      {"support", r.per_class[i].support}});
    }
    j["per_class"] = pc;
    j["confusion"] = r.confusion.m;
    j["recon_mse"] = r.recon_mse;
    j["recon_psnr"] = std::isfinite(r.recon_psnr) ? r.recon_psnr : 1e9;
    j["spearman_distance_compression"] = r.spearman_distance_compression;
    j["calibration_monotone"] = r.calibration_monotone;
    j["counts"] = {{"detection", r.n_detection},
                   {"grading", r.n_grading},
                   {"fractured", r.n_fractured},
                   {"reconstruction", r.n_recon}};
    return j;
}

inline std::string eval_report_text(const EvalReport& r) {
    char buf[256];
    std::string out;
    out += "evaluation report\n";
    out += "-----------------\n";
    std::snprintf(buf, sizeof(buf), "probe: %s   calibration: %s%s\n", r.probe_kind.c_str(),
                  r.calibration_kind.c_str(), r.calibration_monotone ? "" : "  [non-monotone]");
    out += buf;
    std::snprintf(buf, sizeof(buf), "detection AUC (G0 vs G2/G3): %.4f   (n=%zu)\n",
                  r.detection_auc, r.n_detection);
    out += buf;
    std::snprintf(buf, sizeof(buf), "grading macro F1 {G0,G2,G3}: %.4f   (n=%zu)\n", r.macro_f1,
                  r.n_grading);
    out += buf;
    const char* names[] = {"G0", "G2", "G3"};
    for (std::size_t i = 0; i < r.per_class.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "  %s  precision %.4f  recall %.4f  f1 %.4f  support %zu\n",
                      names[i], r.per_class[i].precision, r.per_class[i].recall,
                      r.per_class[i].f1, r.per_class[i].support);
        out += buf;
    }
    out += "confusion (rows = truth G0/G2/G3):\n";
    for (int i = 0; i < 3; ++i) {
        std::snprintf(buf, sizeof(buf), "  %6zu %6zu %6zu\n", r.confusion.m[i][0],
                      r.confusion.m[i][1], r.confusion.m[i][2]);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "reconstruction: MSE %.6f  PSNR %.2f dB  (n=%zu)\n",
                  r.recon_mse, r.recon_psnr, r.n_recon);
    out += buf;
    std::snprintf(buf, sizeof(buf), "spearman(distance, compression) on fractured: %.4f  (n=%zu)\n",
                  r.spearman_distance_compression, r.n_fractured);
    out += buf;
    return out;
}

}  // namespace vfg
