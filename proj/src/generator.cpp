#include "rgi/generator.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "rgi/optim.hpp"
#include "rgi/rng.hpp"

namespace rgi {

void GeneratorModel::validate() const {
    if (layer_dims.size() < 2) throw std::invalid_argument("GeneratorModel: need at least one layer");
    if (layer_dims.front() != latent_dim) {
        throw std::invalid_argument("GeneratorModel: first layer dim " +
                                    std::to_string(layer_dims.front()) + " != latent_dim " +
                                    std::to_string(latent_dim));
    }
    if (layer_dims.back() != pixel_count()) {
        throw std::invalid_argument("GeneratorModel: last layer dim " +
                                    std::to_string(layer_dims.back()) + " != image pixels " +
                                    std::to_string(pixel_count()));
    }
    const std::size_t layers = layer_dims.size() - 1;
    if (activations.size() != layers) {
        throw std::invalid_argument("GeneratorModel: expected " + std::to_string(layers) +
                                    " activation tags, got " + std::to_string(activations.size()));
    }
    if (theta.size() != 2 * layers) {
        throw std::invalid_argument("GeneratorModel: expected " + std::to_string(2 * layers) +
                                    " parameter tensors, got " + std::to_string(theta.size()));
    }
    for (std::size_t l = 0; l < layers; ++l) {
        const Tensor& w = theta[2 * l];
        const Tensor& b = theta[2 * l + 1];
        Shape want_w = {layer_dims[l + 1], layer_dims[l]};
        Shape want_b = {layer_dims[l + 1]};
        if (w.shape() != want_w || b.shape() != want_b) {
            throw std::invalid_argument("GeneratorModel: layer " + std::to_string(l) +
                                        " parameter shapes " + shape_str(w.shape()) + "/" +
                                        shape_str(b.shape()) + " do not match dims");
        }
    }
}

void ManifoldSpec::validate() const {
    if (latent_dim < 1) throw std::invalid_argument("ManifoldSpec: latent_dim must be >= 1");
    if (image_shape.size() != 2 && image_shape.size() != 3) {
        throw std::invalid_argument("ManifoldSpec: image shape must be {m,n} or {m,n,3}");
    }
    if (image_shape[0] < 2 || image_shape[1] < 2) {
        throw std::invalid_argument("ManifoldSpec: image dims must be >= 2");
    }
    if (image_shape.size() == 3 && image_shape[2] != 3) {
        throw std::invalid_argument("ManifoldSpec: third image dim must be 3");
    }
}

GeneratorModel make_affine_generator(const ManifoldSpec& spec, std::uint64_t seed) {
    spec.validate();
    const std::size_t p = shape_numel(spec.image_shape);
    const std::size_t d = spec.latent_dim;
    Rng rng(seed);
    Tensor a = rng.normal_tensor({p, d});
    Tensor b = rng.normal_tensor({p});
    // unit l2 norm per column bounds the Lipschitz constant across seeds
    for (std::size_t j = 0; j < d; ++j) {
        double norm_sq = 0.0;
        for (std::size_t i = 0; i < p; ++i) norm_sq += a[i * d + j] * a[i * d + j];
        double norm = std::sqrt(norm_sq);
        if (norm > 0.0)
            for (std::size_t i = 0; i < p; ++i) a[i * d + j] /= norm;
    }

    GeneratorModel model;
    model.kind = GeneratorModel::Kind::affine;
    model.latent_dim = d;
    model.image_shape = spec.image_shape;
    model.layer_dims = {d, p};
    model.activations = {Activation::identity};
    model.theta = {std::move(a), std::move(b)};
    model.validate();
    return model;
}

GeneratorModel make_mlp_generator(const ManifoldSpec& spec,
                                  std::vector<std::size_t> hidden_dims,
                                  std::uint64_t seed) {
    spec.validate();
    if (hidden_dims.empty()) hidden_dims = {32, 64};
    const std::size_t p = shape_numel(spec.image_shape);

    GeneratorModel model;
    model.kind = GeneratorModel::Kind::mlp;
    model.latent_dim = spec.latent_dim;
    model.image_shape = spec.image_shape;
    model.layer_dims.push_back(spec.latent_dim);
    for (std::size_t h : hidden_dims) model.layer_dims.push_back(h);
    model.layer_dims.push_back(p);

    Rng rng(seed);
    const std::size_t layers = model.layer_dims.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = model.layer_dims[l];
        const std::size_t out = model.layer_dims[l + 1];
        double scale = 1.0 / std::sqrt(static_cast<double>(in));
        model.theta.push_back(rng.normal_tensor({out, in}, 0.0, scale));
        model.theta.push_back(Tensor({out}));
        model.activations.push_back(l + 1 < layers ? Activation::leaky_relu : Activation::tanh);
    }
    model.validate();
    return model;
}

std::vector<NodePtr> make_theta_leaves(const std::vector<Tensor>& theta, bool trainable) {
    std::vector<NodePtr> leaves;
    leaves.reserve(theta.size());
    for (const Tensor& t : theta) leaves.push_back(leaf(t, trainable));
    return leaves;
}

NodePtr generator_forward_with(const GeneratorModel& model, const NodePtr& z,
                               const std::vector<NodePtr>& theta_leaves) {
    if (z->value.numel() != model.latent_dim || z->value.rank() != 1) {
        throw std::invalid_argument("generator_forward: latent shape " +
                                    shape_str(z->value.shape()) + " does not match latent_dim " +
                                    std::to_string(model.latent_dim));
    }
    if (theta_leaves.size() != model.theta.size()) {
        throw std::invalid_argument("generator_forward: wrong parameter leaf count");
    }
    NodePtr h = z;
    const std::size_t layers = model.layer_dims.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
        NodePtr pre = add(matmul(theta_leaves[2 * l], h), theta_leaves[2 * l + 1]);
        switch (model.activations[l]) {
            case Activation::tanh: h = tanh(pre); break;
            case Activation::leaky_relu: h = leaky_relu(pre, model.leaky_slope); break;
            case Activation::identity: h = pre; break;
        }
    }
    return reshape(h, model.image_shape);
}

GeneratorGraph generator_forward(const GeneratorModel& model, const NodePtr& z,
                                 bool trainable_theta) {
    GeneratorGraph graph;
    graph.theta = make_theta_leaves(model.theta, trainable_theta);
    graph.image = generator_forward_with(model, z, graph.theta);
    return graph;
}

Tensor generator_eval(const GeneratorModel& model, const Tensor& z) {
    if (z.numel() != model.latent_dim) {
        throw std::invalid_argument("generator_eval: latent shape " + shape_str(z.shape()) +
                                    " does not match latent_dim " + std::to_string(model.latent_dim));
    }
    std::vector<double> h(z.values());
    const std::size_t layers = model.layer_dims.size() - 1;
    for (std::size_t l = 0; l < layers; ++l) {
        const std::size_t in = model.layer_dims[l];
        const std::size_t out = model.layer_dims[l + 1];
        const Tensor& w = model.theta[2 * l];
        const Tensor& b = model.theta[2 * l + 1];
        std::vector<double> next(out);
        for (std::size_t i = 0; i < out; ++i) {
            double acc = b[i];
            const double* row = w.data() + i * in;
            for (std::size_t j = 0; j < in; ++j) acc += row[j] * h[j];
            switch (model.activations[l]) {
                case Activation::tanh: acc = std::tanh(acc); break;
                case Activation::leaky_relu:
                    if (acc < 0.0) acc *= model.leaky_slope;
                    break;
                case Activation::identity: break;
            }
            next[i] = acc;
        }
        h = std::move(next);
    }
    return Tensor(model.image_shape, std::move(h));
}

TrainResult train_decoder(const std::vector<std::pair<Tensor, Tensor>>& pairs,
                          const GeneratorModel& model, std::size_t epochs, double lr,
                          std::uint64_t seed) {
    if (pairs.empty()) throw std::invalid_argument("train_decoder: empty pair list");
    for (const auto& [z, x] : pairs) {
        if (z.numel() != model.latent_dim)
            throw std::invalid_argument("train_decoder: latent size mismatch");
        if (x.shape() != model.image_shape)
            throw std::invalid_argument("train_decoder: image shape " + shape_str(x.shape()) +
                                        " != model shape " + shape_str(model.image_shape));
    }
    (void)seed;  // full-batch updates, nothing stochastic beyond the inputs

    TrainResult result{model, {}};
    result.loss_trace.reserve(epochs);
    const double inv = 1.0 / (static_cast<double>(pairs.size()) *
                              static_cast<double>(model.pixel_count()));

    std::vector<AdamState> states;
    states.reserve(model.theta.size());
    for (const Tensor& t : model.theta) states.emplace_back(t.shape());

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::vector<NodePtr> theta_leaves = make_theta_leaves(result.model.theta, true);
        NodePtr total;
        for (const auto& [z_i, x_i] : pairs) {
            NodePtr image = generator_forward_with(result.model, constant(z_i), theta_leaves);
            NodePtr term = sum_squares(sub(image, constant(x_i)));
            total = total ? add(total, term) : term;
        }
        NodePtr loss = scalar_mul(inv, total);
        result.loss_trace.push_back(loss->value[0]);
        backward(loss);
        for (std::size_t t = 0; t < result.model.theta.size(); ++t) {
            adam_step(states[t], result.model.theta[t], theta_leaves[t]->grad, lr, 0.9, 0.999, 1e-8);
        }
    }
    return result;
}

namespace {

constexpr char kModelMagic[4] = {'R', 'G', 'M', '1'};

void put_u64le(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

std::uint64_t get_u64le(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw std::runtime_error("model file: truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

std::uint8_t get_u8(std::istream& in) {
    char c;
    in.read(&c, 1);
    if (!in) throw std::runtime_error("model file: truncated");
    return static_cast<std::uint8_t>(c);
}

}  // namespace

void save_model(const GeneratorModel& model, const std::filesystem::path& path) {
    model.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path.string());
    out.write(kModelMagic, 4);
    out.put(static_cast<char>(model.kind));
    out.put(static_cast<char>(model.image_shape.size()));
    for (std::size_t d : model.image_shape) put_u64le(out, d);
    put_u64le(out, model.latent_dim);
    put_u64le(out, model.layer_dims.size());
    for (std::size_t d : model.layer_dims) put_u64le(out, d);
    out.put(static_cast<char>(model.activations.size()));
    for (Activation a : model.activations) out.put(static_cast<char>(a));
    put_u64le(out, std::bit_cast<std::uint64_t>(model.leaky_slope));
    put_u64le(out, model.theta.size());
    for (const Tensor& t : model.theta) write_rgt1(t, out);
    if (!out) throw std::runtime_error("model file: write failed");
}

GeneratorModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for read: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != std::string(kModelMagic, 4)) {
        throw std::runtime_error("model file: bad magic");
    }
    GeneratorModel model;
    std::uint8_t kind = get_u8(in);
    if (kind > 1) throw std::runtime_error("model file: unknown kind code " + std::to_string(kind));
    model.kind = static_cast<GeneratorModel::Kind>(kind);
    std::uint8_t img_rank = get_u8(in);
    model.image_shape.resize(img_rank);
    for (std::size_t& d : model.image_shape) d = static_cast<std::size_t>(get_u64le(in));
    model.latent_dim = static_cast<std::size_t>(get_u64le(in));
    std::size_t n_dims = static_cast<std::size_t>(get_u64le(in));
    model.layer_dims.resize(n_dims);
    for (std::size_t& d : model.layer_dims) d = static_cast<std::size_t>(get_u64le(in));
    std::uint8_t n_act = get_u8(in);
    model.activations.resize(n_act);
    for (Activation& a : model.activations) {
        std::uint8_t code = get_u8(in);
        if (code > 2) throw std::runtime_error("model file: unknown activation code " + std::to_string(code));
        a = static_cast<Activation>(code);
    }
    model.leaky_slope = std::bit_cast<double>(get_u64le(in));
    std::size_t n_theta = static_cast<std::size_t>(get_u64le(in));
    model.theta.reserve(n_theta);
    for (std::size_t i = 0; i < n_theta; ++i) model.theta.push_back(read_rgt1(in));
    model.validate();
    return model;
}

}  // namespace rgi
