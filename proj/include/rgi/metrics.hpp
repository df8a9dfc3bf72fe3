#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "rgi/tensor.hpp"

namespace rgi {

// Root mean squared restoration error over a batch:
// sqrt( (1/N) sum_i (1/(m n)) ||a_i - b_i||_2^2 )
double rmse(const std::vector<Tensor>& restored, const std::vector<Tensor>& truth);

// 10 log10(peak^2 / MSE); capped at 99 dB when MSE < 1e-12. Peak defaults to
// 2 because pixels span [-1, 1].
double psnr(const Tensor& a, const Tensor& b, double peak = 2.0);

// Mean SSIM over valid 11x11 Gaussian windows (sigma 1.5, K1 0.01, K2 0.03,
// dynamic range 2); 3-channel images are averaged per channel.
double ssim(const Tensor& a, const Tensor& b);

// 2|A and B| / (|A| + |B|) on binary masks; 1 when both empty.
double dice(const Tensor& pred_mask, const Tensor& true_mask);

// Rank-based AUROC with midrank tie handling.
double pixel_auroc(const Tensor& score_map, const Tensor& true_mask);

// Maximizes dice over the thresholds induced by the observed score values
// (midpoints between consecutive distinct values plus the two all-in/all-out
// endpoints, prediction = score > threshold); returns (threshold, dice).
std::pair<double, double> best_threshold_dice(const Tensor& score_map, const Tensor& true_mask);

// Per-sample metric rows plus mean/std aggregates, CSV-emittable.
struct MetricReport {
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;  // one row per sample

    void add_row(std::vector<double> row);
    std::vector<double> mean() const;
    std::vector<double> stddev() const;
    void write_csv(std::ostream& out) const;
};

// fixed 9-significant-digit float formatting shared by all CSV/metadata output
std::string format_float(double v);

}  // namespace rgi
