#include "rgi/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "rgi/autodiff.hpp"
#include "rgi/metrics.hpp"
#include "rgi/rng.hpp"

namespace rgi {

void SolverConfig::validate() const {
    if (lambda < 0.0) throw std::invalid_argument("SolverConfig: lambda must be >= 0");
    if (finetune_start_iter && *finetune_start_iter > iterations) {
        throw std::invalid_argument("SolverConfig: finetune_start_iter " +
                                    std::to_string(*finetune_start_iter) + " > iterations " +
                                    std::to_string(iterations));
    }
    if (!(lr_z > 0.0) || !(lr_m > 0.0)) {
        throw std::invalid_argument("SolverConfig: learning rates must be > 0");
    }
    if (lr_theta < 0.0) throw std::invalid_argument("SolverConfig: lr_theta must be >= 0");
    if (!(binarize_threshold > 0.0 && binarize_threshold < 1.0)) {
        throw std::invalid_argument("SolverConfig: binarize_threshold must lie in (0,1)");
    }
    if (latent_bound && !(*latent_bound > 0.0)) {
        throw std::invalid_argument("SolverConfig: latent_bound must be > 0");
    }
}

double optimal_mask_pixel(double residual, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("optimal_mask_pixel: lambda must be >= 0");
    double two_r2 = 2.0 * residual * residual;
    if (two_r2 <= lambda) return 0.0;  // covers r == 0, so the division below is safe
    return 1.0 - lambda / two_r2;
}

double robust_loss_pixel(double residual, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("robust_loss_pixel: lambda must be >= 0");
    double r2 = residual * residual;
    if (2.0 * r2 < lambda) return r2;
    if (r2 == 0.0) return 0.0;  // lambda == 0 as well
    return lambda - lambda * lambda / (4.0 * r2);
}

double mask_pixel_objective(double mask, double residual, double lambda) {
    double keep = 1.0 - mask;
    return keep * keep * residual * residual + lambda * std::abs(mask);
}

Tensor closed_form_mask(const Tensor& residual, double lambda) {
    Tensor mask(residual.shape());
    for (std::size_t i = 0; i < residual.numel(); ++i) {
        mask[i] = optimal_mask_pixel(residual[i], lambda);
    }
    return mask;
}

Tensor binarize_mask(const Tensor& m_hat, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw std::invalid_argument("binarize_mask: threshold must lie in (0,1)");
    }
    Tensor out(m_hat.shape());
    for (std::size_t i = 0; i < m_hat.numel(); ++i) out[i] = m_hat[i] > threshold ? 1.0 : 0.0;
    return out;
}

double joint_objective(const GeneratorModel& model, const Tensor& x, const Tensor& z,
                       const Tensor& mask, double lambda, Loss loss) {
    Tensor image = generator_eval(model, z);
    if (!x.same_shape(image)) {
        throw std::invalid_argument("joint_objective: input shape " + shape_str(x.shape()) +
                                    " != generated shape " + shape_str(image.shape()));
    }
    const std::size_t pixels = mask.numel();
    const std::size_t ch = x.numel() / pixels;
    double recon = 0.0;
    for (std::size_t p = 0; p < pixels; ++p) {
        double keep = 1.0 - mask[p];
        for (std::size_t c = 0; c < ch; ++c) {
            double d = keep * (x[p * ch + c] - image[p * ch + c]);
            recon += loss == Loss::l2 ? d * d : std::abs(d);
        }
    }
    double mask_l1 = 0.0;
    for (std::size_t p = 0; p < pixels; ++p) mask_l1 += std::abs(mask[p]);
    return recon + lambda * mask_l1;
}

namespace {

enum class SolveMode { baseline, rgi, rrgi };

// spatial mask {m,n} broadcast over channels as the elementwise factor
Tensor mask_as_image(const Tensor& mask, const Shape& image_shape) {
    if (image_shape.size() == 2) return Tensor(image_shape, mask.values());
    Tensor out(image_shape);
    const std::size_t ch = image_shape[2];
    for (std::size_t p = 0; p < mask.numel(); ++p)
        for (std::size_t c = 0; c < ch; ++c) out[p * ch + c] = mask[p];
    return out;
}

// per-pixel residual magnitude; multichannel pixels collapse to the l2 norm
// over channels so optimal_mask_pixel stays exact for them
Tensor spatial_residual_magnitude(const Tensor& x, const Tensor& image, std::size_t rows,
                                  std::size_t cols, std::size_t ch) {
    Tensor r({rows, cols});
    for (std::size_t p = 0; p < rows * cols; ++p) {
        if (ch == 1) {
            r[p] = x[p] - image[p];
        } else {
            double acc = 0.0;
            for (std::size_t c = 0; c < ch; ++c) {
                double d = x[p * ch + c] - image[p * ch + c];
                acc += d * d;
            }
            r[p] = std::sqrt(acc);
        }
    }
    return r;
}

struct SolveState {
    Tensor z;
    Tensor mask;  // spatial {m,n}
    GeneratorModel work;
};

InversionResult solve_core(const GeneratorModel& model, const Tensor& x,
                           const SolverConfig& config, SolveMode mode) {
    config.validate();
    model.validate();
    if (x.shape() != model.image_shape) {
        throw std::invalid_argument("solver: input shape " + shape_str(x.shape()) +
                                    " != model image shape " + shape_str(model.image_shape));
    }
    if (mode != SolveMode::baseline && config.mask_strategy == MaskStrategy::closed_form &&
        config.loss != Loss::l2) {
        throw std::invalid_argument("solver: closed_form mask updates are defined for the l2 loss only");
    }

    const std::size_t rows = model.image_shape[0];
    const std::size_t cols = model.image_shape[1];
    const std::size_t ch = model.image_shape.size() == 3 ? model.image_shape[2] : 1;

    SolveState st;
    st.work = model;  // owned copy; fine-tuning must not drift the shared model
    if (config.init_z == LatentInit::zero) {
        st.z = Tensor({model.latent_dim});
    } else {
        Rng rng(derive_seed(config.seed, 0xA11CE));
        st.z = rng.normal_tensor({model.latent_dim});
    }
    st.mask = Tensor({rows, cols});  // init_M = zero always

    AdamState adam_z(st.z.shape());
    AdamState adam_m(st.mask.shape());
    std::vector<AdamState> adam_theta;
    for (const Tensor& t : st.work.theta) adam_theta.emplace_back(t.shape());

    const bool gradient_mask = mode != SolveMode::baseline &&
                               config.mask_strategy == MaskStrategy::gradient;
    const bool closed_mask = mode != SolveMode::baseline &&
                             config.mask_strategy == MaskStrategy::closed_form;

    InversionResult result;
    result.config = config;
    result.loss_trace.reserve(config.iterations);

    const std::size_t finetune_start = config.finetune_start_iter.value_or(config.iterations);
    for (std::size_t iter = 0; iter < config.iterations; ++iter) {
        const bool finetune = mode == SolveMode::rrgi && iter >= finetune_start;

        if (closed_mask) {
            Tensor image = generator_eval(st.work, st.z);
            Tensor r = spatial_residual_magnitude(x, image, rows, cols, ch);
            st.mask = closed_form_mask(r, config.lambda);
        }

        NodePtr z_leaf = leaf(st.z, true);
        NodePtr m_leaf = leaf(mask_as_image(st.mask, model.image_shape), gradient_mask);
        std::vector<NodePtr> theta_leaves = make_theta_leaves(st.work.theta, finetune);
        NodePtr image = generator_forward_with(st.work, z_leaf, theta_leaves);

        NodePtr keep = sub(constant(Tensor::full(model.image_shape, 1.0)), m_leaf);
        NodePtr masked_diff = mul_elementwise(keep, sub(constant(x), image));
        NodePtr recon = config.loss == Loss::l2 ? sum_squares(masked_diff) : abs_sum(masked_diff);
        // the broadcast mask repeats each spatial entry `ch` times, so the
        // penalty weight divides by ch to keep lambda * ||M||_1 exact
        NodePtr objective =
            add(recon, scalar_mul(config.lambda / static_cast<double>(ch), abs_sum(m_leaf)));

        double obj = objective->value[0];
        if (!std::isfinite(obj)) {
            throw std::runtime_error("solver: objective became non-finite at iteration " +
                                     std::to_string(iter));
        }
        result.loss_trace.emplace_back(iter, obj);

        backward(objective);

        adam_step(adam_z, st.z, z_leaf->grad, config.lr_z, config.beta1, config.beta2,
                  config.epsilon);
        if (config.latent_bound) {
            double r_bound = *config.latent_bound;
            for (std::size_t i = 0; i < st.z.numel(); ++i) {
                if (st.z[i] > r_bound) st.z[i] = r_bound;
                else if (st.z[i] < -r_bound) st.z[i] = -r_bound;
            }
        }

        if (gradient_mask) {
            // grads on the broadcast image-shaped mask fold back onto {m,n}
            Tensor m_grad({rows, cols});
            for (std::size_t p = 0; p < rows * cols; ++p) {
                double acc = 0.0;
                for (std::size_t c = 0; c < ch; ++c) acc += m_leaf->grad[p * ch + c];
                m_grad[p] = acc;
            }
            adam_step(adam_m, st.mask, m_grad, config.lr_m, config.beta1, config.beta2,
                      config.epsilon);
            for (std::size_t i = 0; i < st.mask.numel(); ++i) {
                if (st.mask[i] < 0.0) st.mask[i] = 0.0;
                else if (st.mask[i] > 1.0) st.mask[i] = 1.0;
            }
        }

        if (finetune) {
            for (std::size_t t = 0; t < st.work.theta.size(); ++t) {
                adam_step(adam_theta[t], st.work.theta[t], theta_leaves[t]->grad, config.lr_theta,
                          config.beta1, config.beta2, config.epsilon);
            }
        }
    }

    // the alternation ends on a mask update so the reported mask matches z_hat
    if (closed_mask) {
        Tensor image = generator_eval(st.work, st.z);
        Tensor r = spatial_residual_magnitude(x, image, rows, cols, ch);
        st.mask = closed_form_mask(r, config.lambda);
    }

    result.z_hat = st.z;
    result.m_hat = st.mask;
    result.restored = generator_eval(st.work, st.z);
    result.binary_mask = binarize_mask(st.mask, config.binarize_threshold);
    result.final_objective =
        joint_objective(st.work, x, st.z, st.mask, config.lambda, config.loss);
    if (mode == SolveMode::rrgi) result.model_final = std::move(st.work);
    return result;
}

}  // namespace

InversionResult invert_baseline(const GeneratorModel& model, const Tensor& x,
                                const SolverConfig& config) {
    return solve_core(model, x, config, SolveMode::baseline);
}

InversionResult solve_rgi(const GeneratorModel& model, const Tensor& x,
                          const SolverConfig& config) {
    return solve_core(model, x, config, SolveMode::rgi);
}

InversionResult solve_rrgi(const GeneratorModel& model, const Tensor& x,
                           const SolverConfig& config) {
    return solve_core(model, x, config, SolveMode::rrgi);
}

std::vector<SweepEntry> sweep_lambda(const GeneratorModel& model, const Tensor& x,
                                     const std::vector<double>& lambdas,
                                     const SolverConfig& config_template,
                                     const CorruptedSample* ground_truth, bool theorem_mode) {
    if (lambdas.empty()) throw std::invalid_argument("sweep_lambda: empty lambda list");
    if (theorem_mode) {
        for (std::size_t i = 1; i < lambdas.size(); ++i) {
            if (!(lambdas[i] < lambdas[i - 1])) {
                throw std::invalid_argument("sweep_lambda: theorem mode requires a strictly "
                                            "decreasing lambda list");
            }
        }
    }

    std::vector<SweepEntry> entries;
    entries.reserve(lambdas.size());
    for (double lam : lambdas) {
        SolverConfig config = config_template;
        config.lambda = lam;
        SweepEntry entry;
        entry.lambda = lam;
        entry.result = solve_rgi(model, x, config);
        if (ground_truth) {
            entry.metrics["dice"] = dice(entry.result.binary_mask, ground_truth->true_mask);
            entry.metrics["rmse"] = rmse({entry.result.restored}, {ground_truth->clean});
            entry.metrics["psnr"] = psnr(entry.result.restored, ground_truth->clean);
            entry.metrics["ssim"] = ssim(entry.result.restored, ground_truth->clean);
        }
        entries.push_back(std::move(entry));
    }
    return entries;
}

}  // namespace rgi
