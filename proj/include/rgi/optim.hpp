#pragma once

#include <cstddef>

#include "rgi/tensor.hpp"

namespace rgi {

struct AdamState {
    Tensor first_moment;
    Tensor second_moment;
    std::size_t step = 0;

    explicit AdamState(const Shape& shape)
        : first_moment(shape), second_moment(shape) {}
};

// Standard bias-corrected ADAM update, in place.
void adam_step(AdamState& state, Tensor& param, const Tensor& grad, double lr,
               double beta1, double beta2, double epsilon);

}  // namespace rgi
