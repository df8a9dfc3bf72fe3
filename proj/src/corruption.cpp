#include "rgi/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rgi/image_io.hpp"
#include "rgi/rng.hpp"

namespace rgi {

namespace {

std::size_t spatial_rows(const Shape& s) { return s[0]; }
std::size_t spatial_cols(const Shape& s) { return s[1]; }
std::size_t channels_of(const Shape& s) { return s.size() == 3 ? s[2] : 1; }

void check_image_shape(const Tensor& image, const char* who) {
    if (image.rank() != 2 && !(image.rank() == 3 && image.shape()[2] == 3)) {
        throw std::invalid_argument(std::string(who) + ": expected {m,n} or {m,n,3}, got " +
                                    shape_str(image.shape()));
    }
}

void check_binary_mask(const Tensor& mask, const char* who) {
    if (mask.rank() != 2) {
        throw std::invalid_argument(std::string(who) + ": mask must be rank 2, got " +
                                    shape_str(mask.shape()));
    }
    for (std::size_t i = 0; i < mask.numel(); ++i) {
        if (mask[i] != 0.0 && mask[i] != 1.0) {
            throw std::invalid_argument(std::string(who) + ": mask entry " + std::to_string(mask[i]) +
                                        " is not binary");
        }
    }
}

std::size_t mask_count(const Tensor& mask) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < mask.numel(); ++i) n += mask[i] == 1.0;
    return n;
}

// fill x inside the mask; clean pixels stay bit-identical
void apply_fill(Tensor& x, const Tensor& clean, const Tensor& mask, Fill fill,
                double mean_level, Rng& rng) {
    const std::size_t rows = spatial_rows(x.shape());
    const std::size_t cols = spatial_cols(x.shape());
    const std::size_t ch = channels_of(x.shape());

    std::vector<double> channel_mean(ch, 0.0);
    if (fill == Fill::mean_fill) {
        std::size_t count = mask_count(mask);
        if (count == 0) throw std::invalid_argument("mean_fill: empty mask, masked mean undefined");
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) {
                if (mask.at(i, j) != 1.0) continue;
                for (std::size_t c = 0; c < ch; ++c)
                    channel_mean[c] += clean[(i * cols + j) * ch + c];
            }
        for (double& m : channel_mean) m /= static_cast<double>(count);
    }

    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) {
            if (mask.at(i, j) != 1.0) continue;
            for (std::size_t c = 0; c < ch; ++c) {
                double v = 0.0;
                switch (fill) {
                    case Fill::normal: v = rng.normal(mean_level, 1.0); break;
                    case Fill::uniform: v = rng.uniform(-1.0, 1.0); break;
                    case Fill::mean_fill: v = channel_mean[c]; break;
                }
                x[(i * cols + j) * ch + c] = v;
            }
        }
}

CorruptedSample finish_sample(Tensor x, const Tensor& clean, Tensor mask,
                              std::optional<Tensor> true_latent, const CorruptionSpec& spec) {
    CorruptedSample sample;
    sample.corruption_budget = mask_count(mask);
    sample.x = std::move(x);
    sample.clean = clean;
    sample.true_mask = std::move(mask);
    sample.true_latent = std::move(true_latent);
    sample.provenance = spec;
    return sample;
}

}  // namespace

void CorruptionSpec::validate(const Shape& image_shape) const {
    const std::size_t rows = spatial_rows(image_shape);
    const std::size_t cols = spatial_cols(image_shape);
    switch (mechanism) {
        case Mechanism::central_block:
            if (block_size > rows || block_size > cols) {
                throw std::invalid_argument("central_block: block " + std::to_string(block_size) +
                                            " exceeds image " + shape_str(image_shape));
            }
            break;
        case Mechanism::random_missing:
            if (!(missing_fraction > 0.0 && missing_fraction < 1.0)) {
                throw std::invalid_argument("random_missing: fraction must lie in (0,1), got " +
                                            std::to_string(missing_fraction));
            }
            break;
        case Mechanism::irregular:
        case Mechanism::defect_fill:
            if (target_area > rows * cols) {
                throw std::invalid_argument("irregular: target area exceeds image");
            }
            break;
    }
}

std::pair<Tensor, Tensor> sample_clean(const GeneratorModel& model, std::uint64_t seed) {
    Rng rng(seed);
    Tensor z = rng.normal_tensor({model.latent_dim});
    Tensor clean = generator_eval(model, z);
    return {std::move(z), std::move(clean)};
}

CorruptedSample corrupt(const Tensor& clean, std::optional<Tensor> true_latent,
                        const CorruptionSpec& spec) {
    check_image_shape(clean, "corrupt");
    spec.validate(clean.shape());

    const std::size_t rows = spatial_rows(clean.shape());
    const std::size_t cols = spatial_cols(clean.shape());
    Rng rng(spec.seed);

    Tensor mask({rows, cols});
    switch (spec.mechanism) {
        case Mechanism::central_block: {
            const std::size_t r0 = (rows - spec.block_size) / 2;
            const std::size_t c0 = (cols - spec.block_size) / 2;
            for (std::size_t i = 0; i < spec.block_size; ++i)
                for (std::size_t j = 0; j < spec.block_size; ++j)
                    mask.at(r0 + i, c0 + j) = 1.0;
            break;
        }
        case Mechanism::random_missing: {
            const std::size_t total = rows * cols;
            const std::size_t n0 =
                static_cast<std::size_t>(std::llround(spec.missing_fraction * static_cast<double>(total)));
            std::vector<std::size_t> idx(total);
            for (std::size_t i = 0; i < total; ++i) idx[i] = i;
            for (std::size_t i = 0; i < n0; ++i) {
                std::size_t j = i + rng.uniform_index(total - i);
                std::swap(idx[i], idx[j]);
                mask[idx[i]] = 1.0;
            }
            break;
        }
        case Mechanism::irregular:
        case Mechanism::defect_fill: {
            std::size_t target = spec.target_area ? spec.target_area : rows * cols / 4;
            mask = random_walk_mask(clean.shape(), target, rng.next_u64());
            break;
        }
    }

    Tensor x = clean;
    if (mask_count(mask) > 0) {
        Fill fill = spec.mechanism == Mechanism::defect_fill ? Fill::mean_fill : spec.fill;
        apply_fill(x, clean, mask, fill, spec.mean_level, rng);
    }
    return finish_sample(std::move(x), clean, std::move(mask), std::move(true_latent), spec);
}

CorruptedSample synthesize_defect(const Tensor& clean, const Tensor& mask) {
    check_image_shape(clean, "synthesize_defect");
    check_binary_mask(mask, "synthesize_defect");
    if (mask.shape()[0] != clean.shape()[0] || mask.shape()[1] != clean.shape()[1]) {
        throw std::invalid_argument("synthesize_defect: mask " + shape_str(mask.shape()) +
                                    " does not match image " + shape_str(clean.shape()));
    }
    if (mask_count(mask) == 0) {
        throw std::invalid_argument("synthesize_defect: empty mask, masked mean undefined");
    }
    Tensor x = clean;
    Rng unused(0);
    apply_fill(x, clean, mask, Fill::mean_fill, 0.0, unused);
    CorruptionSpec spec;
    spec.mechanism = Mechanism::defect_fill;
    spec.fill = Fill::mean_fill;
    return finish_sample(std::move(x), clean, mask, std::nullopt, spec);
}

Tensor random_walk_mask(const Shape& image_shape, std::size_t target_area, std::uint64_t seed) {
    const std::size_t rows = spatial_rows(image_shape);
    const std::size_t cols = spatial_cols(image_shape);
    const std::size_t total = rows * cols;
    Tensor mask({rows, cols});
    if (target_area == 0) return mask;
    if (target_area >= total) {
        mask.fill(1.0);
        return mask;
    }

    Rng rng(seed);
    std::size_t r = rng.uniform_index(rows);
    std::size_t c = rng.uniform_index(cols);
    std::size_t marked = 0;
    const std::size_t walk_target = std::max<std::size_t>(1, target_area / 4);
    std::size_t steps = 0;
    while (marked < walk_target && steps < 64 * total) {
        ++steps;
        if (mask.at(r, c) == 0.0) {
            mask.at(r, c) = 1.0;
            ++marked;
        }
        switch (rng.uniform_index(4)) {
            case 0: if (r + 1 < rows) ++r; break;
            case 1: if (r > 0) --r; break;
            case 2: if (c + 1 < cols) ++c; break;
            case 3: if (c > 0) --c; break;
        }
    }

    // grow by 3x3 dilation until the area target is met
    while (marked < target_area) {
        Tensor grown = mask;
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) {
                if (mask.at(i, j) != 1.0) continue;
                for (int di = -1; di <= 1; ++di)
                    for (int dj = -1; dj <= 1; ++dj) {
                        std::size_t ni = i + static_cast<std::size_t>(di);
                        std::size_t nj = j + static_cast<std::size_t>(dj);
                        if ((di < 0 && i == 0) || (dj < 0 && j == 0)) continue;
                        if (ni >= rows || nj >= cols) continue;
                        grown.at(ni, nj) = 1.0;
                    }
            }
        std::size_t new_count = 0;
        for (std::size_t i = 0; i < total; ++i) new_count += grown[i] == 1.0;
        if (new_count == marked) break;  // saturated
        mask = std::move(grown);
        marked = new_count;
    }
    return mask;
}

std::vector<Tensor> load_irregular_masks(const std::filesystem::path& dir, const Shape& image_shape) {
    const std::size_t rows = spatial_rows(image_shape);
    const std::size_t cols = spatial_cols(image_shape);
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    std::vector<Tensor> masks;
    masks.reserve(files.size());
    for (const auto& file : files) {
        PnmImage img = read_pnm(file);
        if (img.channels != 1) throw std::runtime_error("irregular mask must be P5: " + file.string());
        if (img.height < rows || img.width < cols) {
            throw std::runtime_error("irregular mask " + file.string() + " smaller than image " +
                                     shape_str(image_shape));
        }
        const std::size_t r0 = (img.height - rows) / 2;
        const std::size_t c0 = (img.width - cols) / 2;
        Tensor mask({rows, cols});
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j)
                mask.at(i, j) = img.bytes[(r0 + i) * img.width + (c0 + j)] >= 128 ? 1.0 : 0.0;
        masks.push_back(std::move(mask));
    }
    return masks;
}

}  // namespace rgi
