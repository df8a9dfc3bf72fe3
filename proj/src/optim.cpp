#include "rgi/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace rgi {

void adam_step(AdamState& state, Tensor& param, const Tensor& grad, double lr,
               double beta1, double beta2, double epsilon) {
    if (!param.same_shape(grad) || !param.same_shape(state.first_moment)) {
        throw std::invalid_argument("adam_step: shape mismatch, param " + shape_str(param.shape()) +
                                    " vs grad " + shape_str(grad.shape()));
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < param.numel(); ++i) {
        double g = grad[i];
        double m = beta1 * state.first_moment[i] + (1.0 - beta1) * g;
        double v = beta2 * state.second_moment[i] + (1.0 - beta2) * g * g;
        state.first_moment[i] = m;
        state.second_moment[i] = v;
        param[i] -= lr * (m / bc1) / (std::sqrt(v / bc2) + epsilon);
    }
}

}  // namespace rgi
