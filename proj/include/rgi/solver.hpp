#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rgi/corruption.hpp"
#include "rgi/generator.hpp"
#include "rgi/optim.hpp"
#include "rgi/tensor.hpp"

namespace rgi {

enum class Loss : std::uint8_t { l2, l1 };
enum class MaskStrategy : std::uint8_t { closed_form, gradient };
enum class LatentInit : std::uint8_t { zero, seeded_normal };

struct SolverConfig {
    double lambda = 0.1;
    Loss loss = Loss::l2;
    std::size_t iterations = 2000;
    double lr_z = 0.1;
    double lr_m = 0.1;
    double lr_theta = 1e-5;
    // theta frozen before this iteration; absent = frozen for the whole run
    std::optional<std::size_t> finetune_start_iter;
    MaskStrategy mask_strategy = MaskStrategy::closed_form;
    std::optional<double> latent_bound;      // clamp |z_i| <= R after each step
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    LatentInit init_z = LatentInit::zero;
    double binarize_threshold = 0.5;

    void validate() const;
};

struct InversionResult {
    Tensor z_hat;
    Tensor m_hat;        // continuous mask in [0,1]^{m x n}
    Tensor restored;     // G(z_hat) under the final parameters
    Tensor binary_mask;
    std::optional<GeneratorModel> model_final;  // present iff fine-tuning ran
    std::vector<std::pair<std::size_t, double>> loss_trace;
    double final_objective = 0.0;
    SolverConfig config;
};

// Exact per-pixel mask minimizer (1 - lambda / (2 r^2))_+ of
// (1 - M)^2 r^2 + lambda |M| over M in [0, 1].
double optimal_mask_pixel(double residual, double lambda);

// The loss induced by substituting the optimal mask: r^2 when 2 r^2 < lambda,
// else lambda - lambda^2 / (4 r^2). Bounded by lambda, continuous at the seam.
double robust_loss_pixel(double residual, double lambda);

// Per-pixel objective the two functions above minimize; grid/oracle helper.
double mask_pixel_objective(double mask, double residual, double lambda);

Tensor closed_form_mask(const Tensor& residual, double lambda);

Tensor binarize_mask(const Tensor& m_hat, double threshold);

// Full objective L_rec((1-M) o x, (1-M) o G(z)) + lambda ||M||_1 evaluated at
// plain tensors (no graph); shared by solvers, tests and the oracle harness.
double joint_objective(const GeneratorModel& model, const Tensor& x, const Tensor& z,
                       const Tensor& mask, double lambda, Loss loss);

// Latent-only inversion; the mask stays identically zero.
InversionResult invert_baseline(const GeneratorModel& model, const Tensor& x,
                                const SolverConfig& config);

// Joint (z, M) inversion with the mask either updated in closed form each
// iteration or driven by ADAM and clamped to [0, 1].
InversionResult solve_rgi(const GeneratorModel& model, const Tensor& x,
                          const SolverConfig& config);

// solve_rgi plus staged generator fine-tuning: theta unfreezes at
// finetune_start_iter and follows lr_theta. The input model is not mutated;
// fine-tuned parameters live only in the result.
InversionResult solve_rrgi(const GeneratorModel& model, const Tensor& x,
                           const SolverConfig& config);

struct SweepEntry {
    double lambda;
    InversionResult result;
    std::map<std::string, double> metrics;  // dice/rmse/psnr/ssim when ground truth present
};

std::vector<SweepEntry> sweep_lambda(const GeneratorModel& model, const Tensor& x,
                                     const std::vector<double>& lambdas,
                                     const SolverConfig& config_template,
                                     const CorruptedSample* ground_truth = nullptr,
                                     bool theorem_mode = false);

}  // namespace rgi
