#include "rgi/tensor.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rgi {

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(shape[i]);
    }
    s += "]";
    return s;
}

Tensor::Tensor(Shape shape)
    : shape_(std::move(shape)), values_(shape_numel(shape_), 0.0) {
    for (std::size_t d : shape_) {
        if (d == 0) throw std::invalid_argument("Tensor: zero dimension in shape " + shape_str(shape_));
    }
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
    if (shape_numel(shape_) != values_.size()) {
        throw std::invalid_argument("Tensor: shape " + shape_str(shape_) + " expects " +
                                    std::to_string(shape_numel(shape_)) + " values, got " +
                                    std::to_string(values_.size()));
    }
    for (std::size_t d : shape_) {
        if (d == 0) throw std::invalid_argument("Tensor: zero dimension in shape " + shape_str(shape_));
    }
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::full(Shape shape, double v) {
    Tensor t(std::move(shape));
    t.fill(v);
    return t;
}

double& Tensor::at(std::size_t i, std::size_t j) {
    if (rank() != 2) throw std::logic_error("Tensor::at(i,j) requires rank 2, shape is " + shape_str(shape_));
    return values_[i * shape_[1] + j];
}

double Tensor::at(std::size_t i, std::size_t j) const {
    if (rank() != 2) throw std::logic_error("Tensor::at(i,j) requires rank 2, shape is " + shape_str(shape_));
    return values_[i * shape_[1] + j];
}

bool Tensor::all_finite() const {
    for (double v : values_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void Tensor::fill(double v) {
    for (double& x : values_) x = v;
}

namespace {

constexpr char kMagic[4] = {'R', 'G', 'T', '1'};
constexpr std::uint8_t kDtypeF64 = 0x01;

void put_u64le(std::ostream& out, std::uint64_t v) {
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

std::uint64_t get_u64le(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    if (!in) throw std::runtime_error("RGT1: truncated file while reading u64");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

}  // namespace

void write_rgt1(const Tensor& t, std::ostream& out) {
    out.write(kMagic, 4);
    char hdr[2] = {static_cast<char>(kDtypeF64), static_cast<char>(t.rank())};
    out.write(hdr, 2);
    for (std::size_t d : t.shape()) put_u64le(out, d);
    for (double v : t.values()) put_u64le(out, std::bit_cast<std::uint64_t>(v));
    if (!out) throw std::runtime_error("RGT1: write failed");
}

Tensor read_rgt1(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != std::string(kMagic, 4)) {
        throw std::runtime_error("RGT1: bad magic");
    }
    unsigned char hdr[2];
    in.read(reinterpret_cast<char*>(hdr), 2);
    if (!in) throw std::runtime_error("RGT1: truncated header");
    if (hdr[0] != kDtypeF64) {
        throw std::runtime_error("RGT1: unsupported dtype code " + std::to_string(int(hdr[0])));
    }
    Shape shape(hdr[1]);
    for (std::size_t& d : shape) d = static_cast<std::size_t>(get_u64le(in));
    std::vector<double> values(shape_numel(shape));
    for (double& v : values) v = std::bit_cast<double>(get_u64le(in));
    return Tensor(std::move(shape), std::move(values));
}

void save_tensor(const Tensor& t, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path.string());
    write_rgt1(t, out);
}

Tensor load_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for read: " + path.string());
    return read_rgt1(in);
}

}  // namespace rgi
