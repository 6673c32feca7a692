// Distance-to-grade calibration: two-point linear map through the G0/G3 mean
// distances, or per-sample polynomial least squares; ordinal rounding and the
// below-G2-is-healthy evaluation rule.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vfg/common.hpp"
#include "vfg/synth.hpp"

namespace vfg {

struct Calibration {
    enum class Kind { TwoPointLinear, Polynomial };
    Kind kind = Kind::TwoPointLinear;

    // two-point: g(d) = 3 (d - d0) / (d3 - d0)
    double d0 = 0.0;
    double d3 = 1.0;

    // polynomial: g(d) = sum_j coef[j] d^j, degree = coef.size() - 1
    std::vector<double> coef;

    double d_min = 0.0;  // fitted distance range
    double d_max = 0.0;
    bool monotone = true;  // whether g' keeps one sign on [d_min, d_max]

    int degree() const { return static_cast<int>(coef.size()) - 1; }
};

inline double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline Calibration calibrate_two_point(const std::vector<double>& dists_g0,
                                       const std::vector<double>& dists_g3) {
    check(!dists_g0.empty() && !dists_g3.empty(), "empty-input",
          "two-point calibration needs G0 and G3 distances");
    Calibration cal;
    cal.kind = Calibration::Kind::TwoPointLinear;
    cal.d0 = mean_of(dists_g0);
    cal.d3 = mean_of(dists_g3);
    check(std::abs(cal.d3 - cal.d0) > 1e-12, "degenerate-calibration",
          "G0 and G3 mean distances coincide");
    auto [lo0, hi0] = std::minmax_element(dists_g0.begin(), dists_g0.end());
    auto [lo3, hi3] = std::minmax_element(dists_g3.begin(), dists_g3.end());
    cal.d_min = std::min(*lo0, *lo3);
    cal.d_max = std::max(*hi0, *hi3);
    cal.monotone = true;
    return cal;
}

namespace detail {

// Whether the polynomial derivative changes sign strictly inside [lo, hi].
// Degree <= 3, so g' is at most quadratic; roots in closed form.
inline bool derivative_sign_change(const std::vector<double>& coef, double lo, double hi) {
    double c1 = coef.size() > 1 ? coef[1] : 0.0;
    double c2 = coef.size() > 2 ? coef[2] : 0.0;
    double c3 = coef.size() > 3 ? coef[3] : 0.0;
    // g'(d) = c1 + 2 c2 d + 3 c3 d^2
    double a = 3.0 * c3, b = 2.0 * c2, c = c1;
    std::vector<double> roots;
    if (std::abs(a) < 1e-14) {
        if (std::abs(b) > 1e-14) roots.push_back(-c / b);
    } else {
        double disc = b * b - 4.0 * a * c;
        if (disc > 0.0) {
            double sq = std::sqrt(disc);
            roots.push_back((-b - sq) / (2.0 * a));
            roots.push_back((-b + sq) / (2.0 * a));
        }
    }
    auto deriv = [&](double d) { return c + b * d + a * d * d; };
    for (double r : roots) {
        if (r <= lo || r >= hi) continue;
        // sign change across the root (tangency does not count)
        double eps = 1e-9 * std::max(1.0, std::abs(hi - lo));
        if (deriv(r - eps) * deriv(r + eps) < 0.0) return true;
    }
    return false;
}

}  // namespace detail

// Ordinary least squares over individual samples, normal equations with a
// 1e-9 ridge jitter. targets use grade numerals {0, 2, 3}.
inline Calibration calibrate_poly(const std::vector<double>& dists,
                                  const std::vector<double>& targets, int degree) {
    check(degree == 1 || degree == 3, "invalid-degree", "polynomial degree must be 1 or 3");
    check(dists.size() == targets.size(), "shape-mismatch", "dists/targets length differ");
    std::vector<double> distinct(dists);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    check(static_cast<int>(distinct.size()) >= degree + 1, "invalid-input",
          "need at least degree+1 distinct distance values");

    const int k = degree + 1;
    const auto n = static_cast<Eigen::Index>(dists.size());
    Eigen::MatrixXd x(n, k);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double p = 1.0;
        for (int j = 0; j < k; ++j) {
            x(i, j) = p;
            p *= dists[static_cast<std::size_t>(i)];
        }
        y[i] = targets[static_cast<std::size_t>(i)];
    }
    Eigen::MatrixXd a = x.transpose() * x;
    a.diagonal().array() += 1e-9;
    Eigen::VectorXd rhs = x.transpose() * y;

    // partial-pivot elimination; a vanishing pivot means the jitter did not help
    Eigen::VectorXd c(k);
    {
        Eigen::MatrixXd m(k, k + 1);
        m << a, rhs;
        for (int col = 0; col < k; ++col) {
            int piv = col;
            for (int r = col + 1; r < k; ++r)
                if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
            if (std::abs(m(piv, col)) < 1e-300)
                fail("singular-fit", "rank-deficient polynomial design");
            m.row(col).swap(m.row(piv));
            for (int r = 0; r < k; ++r) {
                if (r == col) continue;
                double f = m(r, col) / m(col, col);
                m.row(r) -= f * m.row(col);
            }
        }
        for (int i = 0; i < k; ++i) c[i] = m(i, k) / m(i, i);
    }

    Calibration cal;
    cal.kind = Calibration::Kind::Polynomial;
    cal.coef.assign(c.data(), c.data() + k);
    for (double v : cal.coef)
        check(std::isfinite(v), "singular-fit", "non-finite polynomial coefficients");
    cal.d_min = distinct.front();
    cal.d_max = distinct.back();
    cal.monotone = !detail::derivative_sign_change(cal.coef, cal.d_min, cal.d_max);
    return cal;
}

// Continuous grade; deliberately unclamped so out-of-range sweeps stay linear.
inline double continuous_grade(double d, const Calibration& cal) {
    if (cal.kind == Calibration::Kind::TwoPointLinear)
        return 3.0 * (d - cal.d0) / (cal.d3 - cal.d0);
    double g = 0.0, p = 1.0;
    for (double c : cal.coef) {
        g += c * p;
        p *= d;
    }
    return g;
}

// Clamp to [0,3], then round half away from zero.
inline Grade ordinal_grade(double g) {
    check(std::isfinite(g), "non-finite-grade", "continuous grade is not finite");
    double clamped = std::clamp(g, 0.0, 3.0);
    return grade_from_int(static_cast<int>(std::round(clamped)));
}

// Evaluation rule: predicted grades below G2 are considered healthy.
inline Grade eval_label(Grade g) { return g == Grade::G1 ? Grade::G0 : g; }

// ---------------------------------------------------------------------------
// Persistence

inline nlohmann::json calibration_to_json(const Calibration& cal) {
    nlohmann::json j;
    j["version"] = 1;
    j["kind"] = cal.kind == Calibration::Kind::TwoPointLinear ? "two_point_linear" : "polynomial";
    if (cal.kind == Calibration::Kind::TwoPointLinear) {
        j["d0"] = cal.d0;
        j["d3"] = cal.d3;
    } else {
        j["coef"] = cal.coef;
    }
    j["d_min"] = cal.d_min;
    j["d_max"] = cal.d_max;
    j["monotone"] = cal.monotone;
    return j;
}

inline Calibration calibration_from_json(const nlohmann::json& j) {
    check(j.at("version").get<int>() == 1, "bad-format", "unknown calibration file version");
    Calibration cal;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "two_point_linear") {
        cal.kind = Calibration::Kind::TwoPointLinear;
        cal.d0 = j.at("d0").get<double>();
        cal.d3 = j.at("d3").get<double>();
    } else if (kind == "polynomial") {
        cal.kind = Calibration::Kind::Polynomial;
        cal.coef = j.at("coef").get<std::vector<double>>();
    } else {
        fail("bad-format", "unknown calibration kind: " + kind);
    }
    cal.d_min = j.at("d_min").get<double>();
    cal.d_max = j.at("d_max").get<double>();
    cal.monotone = j.at("monotone").get<bool>();
    return cal;
}

inline void save_calibration(const std::string& path, const Calibration& cal) {
    std::ofstream f(path, std::ios::binary);
    check(f.good(), "io-error", "cannot write calibration file: " + path);
    f << calibration_to_json(cal).dump(2) << '\n';
}

inline Calibration load_calibration(const std::string& path) {
    std::ifstream f(path);
    check(f.good(), "io-error", "cannot read calibration file: " + path);
    nlohmann::json j;
    f >> j;
    return calibration_from_json(j);
}

}  // namespace vfg
