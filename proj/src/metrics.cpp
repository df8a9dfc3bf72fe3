#include "rgi/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace rgi {

namespace {

void check_same_shape(const char* who, const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(who) + ": shape mismatch " + shape_str(a.shape()) +
                                    " vs " + shape_str(b.shape()));
    }
}

void check_binary(const char* who, const Tensor& mask) {
    for (std::size_t i = 0; i < mask.numel(); ++i) {
        if (mask[i] != 0.0 && mask[i] != 1.0) {
            throw std::invalid_argument(std::string(who) + ": non-binary mask entry " +
                                        std::to_string(mask[i]));
        }
    }
}

double mse(const Tensor& a, const Tensor& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return acc / static_cast<double>(a.numel());
}

constexpr std::size_t kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;
constexpr double kSsimRange = 2.0;

std::vector<double> gaussian_window_2d() {
    std::vector<double> w1(kSsimWindow);
    const double c = (kSsimWindow - 1) / 2.0;
    double norm = 0.0;
    for (std::size_t i = 0; i < kSsimWindow; ++i) {
        double d = static_cast<double>(i) - c;
        w1[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        norm += w1[i];
    }
    for (double& v : w1) v /= norm;
    std::vector<double> w2(kSsimWindow * kSsimWindow);
    for (std::size_t i = 0; i < kSsimWindow; ++i)
        for (std::size_t j = 0; j < kSsimWindow; ++j) w2[i * kSsimWindow + j] = w1[i] * w1[j];
    return w2;
}

// single channel, rows x cols, data strided by `stride` elements per pixel
double ssim_channel(const double* a, const double* b, std::size_t rows, std::size_t cols,
                    std::size_t stride) {
    static const std::vector<double> window = gaussian_window_2d();
    const double c1 = (kSsimK1 * kSsimRange) * (kSsimK1 * kSsimRange);
    const double c2 = (kSsimK2 * kSsimRange) * (kSsimK2 * kSsimRange);

    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t r = 0; r + kSsimWindow <= rows; ++r) {
        for (std::size_t c = 0; c + kSsimWindow <= cols; ++c) {
            double mu_a = 0.0, mu_b = 0.0;
            for (std::size_t i = 0; i < kSsimWindow; ++i)
                for (std::size_t j = 0; j < kSsimWindow; ++j) {
                    double w = window[i * kSsimWindow + j];
                    std::size_t idx = ((r + i) * cols + (c + j)) * stride;
                    mu_a += w * a[idx];
                    mu_b += w * b[idx];
                }
            double var_a = 0.0, var_b = 0.0, cov = 0.0;
            for (std::size_t i = 0; i < kSsimWindow; ++i)
                for (std::size_t j = 0; j < kSsimWindow; ++j) {
                    double w = window[i * kSsimWindow + j];
                    std::size_t idx = ((r + i) * cols + (c + j)) * stride;
                    double da = a[idx] - mu_a;
                    double db = b[idx] - mu_b;
                    var_a += w * da * da;
                    var_b += w * db * db;
                    cov += w * da * db;
                }
            double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
            double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
            total += num / den;
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

}  // namespace

double rmse(const std::vector<Tensor>& restored, const std::vector<Tensor>& truth) {
    if (restored.size() != truth.size() || restored.empty()) {
        throw std::invalid_argument("rmse: lists must be equal-length and nonempty");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < restored.size(); ++i) {
        check_same_shape("rmse", restored[i], truth[i]);
        acc += mse(restored[i], truth[i]);
    }
    return std::sqrt(acc / static_cast<double>(restored.size()));
}

double psnr(const Tensor& a, const Tensor& b, double peak) {
    check_same_shape("psnr", a, b);
    double m = mse(a, b);
    if (m < 1e-12) return 99.0;
    return 10.0 * std::log10(peak * peak / m);
}

double ssim(const Tensor& a, const Tensor& b) {
    check_same_shape("ssim", a, b);
    if (a.rank() != 2 && !(a.rank() == 3 && a.shape()[2] == 3)) {
        throw std::invalid_argument("ssim: expected {m,n} or {m,n,3}, got " + shape_str(a.shape()));
    }
    const std::size_t rows = a.shape()[0];
    const std::size_t cols = a.shape()[1];
    if (rows < kSsimWindow || cols < kSsimWindow) {
        throw std::invalid_argument("ssim: image " + shape_str(a.shape()) + " smaller than " +
                                    std::to_string(kSsimWindow) + "x" + std::to_string(kSsimWindow) +
                                    " window");
    }
    const std::size_t ch = a.rank() == 3 ? 3 : 1;
    double total = 0.0;
    for (std::size_t c = 0; c < ch; ++c) {
        total += ssim_channel(a.data() + c, b.data() + c, rows, cols, ch);
    }
    return total / static_cast<double>(ch);
}

double dice(const Tensor& pred_mask, const Tensor& true_mask) {
    check_same_shape("dice", pred_mask, true_mask);
    check_binary("dice", pred_mask);
    check_binary("dice", true_mask);
    std::size_t pred = 0, truth = 0, overlap = 0;
    for (std::size_t i = 0; i < pred_mask.numel(); ++i) {
        bool p = pred_mask[i] == 1.0;
        bool t = true_mask[i] == 1.0;
        pred += p;
        truth += t;
        overlap += p && t;
    }
    if (pred + truth == 0) return 1.0;  // both empty: perfect agreement
    return 2.0 * static_cast<double>(overlap) / static_cast<double>(pred + truth);
}

double pixel_auroc(const Tensor& score_map, const Tensor& true_mask) {
    check_same_shape("pixel_auroc", score_map, true_mask);
    check_binary("pixel_auroc", true_mask);
    const std::size_t n = score_map.numel();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return score_map[i] < score_map[j]; });

    // midranks over tied score groups
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && score_map[order[j + 1]] == score_map[order[i]]) ++j;
        double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
        i = j + 1;
    }

    double pos_rank_sum = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (true_mask[k] == 1.0) {
            pos_rank_sum += rank[k];
            ++n_pos;
        }
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw std::invalid_argument("pixel_auroc: mask must contain both classes");
    }
    double np = static_cast<double>(n_pos);
    return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

std::pair<double, double> best_threshold_dice(const Tensor& score_map, const Tensor& true_mask) {
    check_same_shape("best_threshold_dice", score_map, true_mask);
    check_binary("best_threshold_dice", true_mask);

    std::vector<double> values(score_map.values());
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());

    // thresholds: below the minimum (all positive), midpoints between
    // consecutive distinct values, and the maximum (all negative)
    std::vector<double> thresholds;
    thresholds.push_back(values.front() - 1.0);
    for (std::size_t i = 0; i + 1 < values.size(); ++i)
        thresholds.push_back(0.5 * (values[i] + values[i + 1]));
    thresholds.push_back(values.back());

    double best_t = thresholds.front();
    double best_d = -1.0;
    Tensor pred(score_map.shape());
    for (double t : thresholds) {
        for (std::size_t i = 0; i < pred.numel(); ++i) pred[i] = score_map[i] > t ? 1.0 : 0.0;
        double d = dice(pred, true_mask);
        if (d > best_d) {
            best_d = d;
            best_t = t;
        }
    }
    return {best_t, best_d};
}

void MetricReport::add_row(std::vector<double> row) {
    if (row.size() != names.size()) {
        throw std::invalid_argument("MetricReport: row width " + std::to_string(row.size()) +
                                    " != metric count " + std::to_string(names.size()));
    }
    rows.push_back(std::move(row));
}

std::vector<double> MetricReport::mean() const {
    std::vector<double> m(names.size(), 0.0);
    for (const auto& row : rows)
        for (std::size_t j = 0; j < m.size(); ++j) m[j] += row[j];
    for (double& v : m) v /= static_cast<double>(rows.size());
    return m;
}

std::vector<double> MetricReport::stddev() const {
    std::vector<double> m = mean();
    std::vector<double> s(names.size(), 0.0);
    for (const auto& row : rows)
        for (std::size_t j = 0; j < s.size(); ++j) {
            double d = row[j] - m[j];
            s[j] += d * d;
        }
    for (double& v : s) v = std::sqrt(v / static_cast<double>(rows.size()));
    return s;
}

void MetricReport::write_csv(std::ostream& out) const {
    out << "sample";
    for (const auto& n : names) out << "," << n;
    out << "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << i;
        for (double v : rows[i]) out << "," << format_float(v);
        out << "\n";
    }
    if (!rows.empty()) {
        std::vector<double> m = mean();
        std::vector<double> s = stddev();
        out << "__mean";
        for (double v : m) out << "," << format_float(v);
        out << "\n__std";
        for (double v : s) out << "," << format_float(v);
        out << "\n";
    }
}

std::string format_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

}  // namespace rgi
