#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "rgi/autodiff.hpp"
#include "rgi/tensor.hpp"

namespace rgi {

enum class Activation : std::uint8_t { tanh = 0, leaky_relu = 1, identity = 2 };

// Differentiable decoder G(z; theta): latent R^d -> image (m x n [x 3]).
// Dense layers only; an affine generator is a single identity layer, which
// keeps ground truth computable in closed form.
struct GeneratorModel {
    enum class Kind : std::uint8_t { affine = 0, mlp = 1 };

    Kind kind = Kind::affine;
    std::vector<std::size_t> layer_dims;   // layer_dims[0] == latent_dim
    std::vector<Activation> activations;   // one per layer
    std::vector<Tensor> theta;             // W0 {out,in}, b0 {out}, W1, b1, ...
    std::size_t latent_dim = 0;
    Shape image_shape;
    double leaky_slope = 0.2;

    std::size_t pixel_count() const { return shape_numel(image_shape); }
    void validate() const;
};

struct ManifoldSpec {
    std::size_t latent_dim = 8;
    Shape image_shape = {16, 16};
    std::uint64_t seed = 0;
    void validate() const;
};

// G(z) = reshape(A z + b); A, b seeded standard normal, A column-normalized
// so every column has unit l2 norm.
GeneratorModel make_affine_generator(const ManifoldSpec& spec, std::uint64_t seed);

// Dense decoder, leaky_relu hidden layers and tanh head. Default hidden
// widths {32, 64}.
GeneratorModel make_mlp_generator(const ManifoldSpec& spec,
                                  std::vector<std::size_t> hidden_dims,
                                  std::uint64_t seed);

struct GeneratorGraph {
    NodePtr image;
    std::vector<NodePtr> theta;  // leaves, trainable iff requested
};

GeneratorGraph generator_forward(const GeneratorModel& model, const NodePtr& z,
                                 bool trainable_theta);

// Forward pass against caller-owned parameter leaves (shared across a batch
// or across solver state); model supplies architecture only.
NodePtr generator_forward_with(const GeneratorModel& model, const NodePtr& z,
                               const std::vector<NodePtr>& theta_leaves);

std::vector<NodePtr> make_theta_leaves(const std::vector<Tensor>& theta, bool trainable);

// Plain evaluation without graph construction (lattice enumeration hot path).
Tensor generator_eval(const GeneratorModel& model, const Tensor& z);

struct TrainResult {
    GeneratorModel model;
    std::vector<double> loss_trace;  // one MSE value per epoch
};

// Full-batch ADAM on mean squared reconstruction over (z, x) pairs.
TrainResult train_decoder(const std::vector<std::pair<Tensor, Tensor>>& pairs,
                          const GeneratorModel& model, std::size_t epochs, double lr,
                          std::uint64_t seed);

// RGT1-based model container, bit-exact round trip.
void save_model(const GeneratorModel& model, const std::filesystem::path& path);
GeneratorModel load_model(const std::filesystem::path& path);

}  // namespace rgi
