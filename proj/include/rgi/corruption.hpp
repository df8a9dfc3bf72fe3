#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "rgi/generator.hpp"
#include "rgi/tensor.hpp"

namespace rgi {

enum class Mechanism : std::uint8_t { central_block, random_missing, irregular, defect_fill };

// Fill for masked pixels. `normal` draws N(mean_level, 1); `uniform` draws
// from the interval [-1, 1] (the other reading of the same notation);
// `mean_fill` uses the per-channel mean of the clean pixels under the mask.
enum class Fill : std::uint8_t { normal, uniform, mean_fill };

struct CorruptionSpec {
    Mechanism mechanism = Mechanism::central_block;
    std::size_t block_size = 8;       // central_block
    double missing_fraction = 0.25;   // random_missing, in (0,1)
    std::size_t target_area = 0;      // irregular; 0 -> 25% of pixels
    Fill fill = Fill::normal;
    double mean_level = 1.0;          // e
    std::uint64_t seed = 0;

    void validate(const Shape& image_shape) const;
};

struct CorruptedSample {
    Tensor x;
    Tensor clean;
    Tensor true_mask;  // {m,n}, entries 0/1; 1 = corrupted pixel
    std::optional<Tensor> true_latent;
    std::size_t corruption_budget = 0;  // n0 = ||M*||_0
    CorruptionSpec provenance;
};

// z* ~ seeded standard normal, clean = G(z*)
std::pair<Tensor, Tensor> sample_clean(const GeneratorModel& model, std::uint64_t seed);

CorruptedSample corrupt(const Tensor& clean, std::optional<Tensor> true_latent,
                        const CorruptionSpec& spec);

// Constant per-channel fill with the masked mean of the clean image; outside
// the mask the image is untouched.
CorruptedSample synthesize_defect(const Tensor& clean, const Tensor& mask);

// Seeded random-walk mask dilated to the target pixel count.
Tensor random_walk_mask(const Shape& image_shape, std::size_t target_area, std::uint64_t seed);

// Binary masks from PGM (P5) files in a directory, thresholded at 128 and
// center-cropped to the image shape. Files are taken in lexicographic order.
std::vector<Tensor> load_irregular_masks(const std::filesystem::path& dir, const Shape& image_shape);

}  // namespace rgi
