#include "rgi/image_io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace rgi {

namespace {

// next whitespace-delimited token, skipping '#' comment lines
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok += static_cast<char>(c);
    }
    if (tok.empty()) throw std::runtime_error("PNM: unexpected end of header");
    return tok;
}

std::size_t parse_dim(const std::string& tok) {
    for (char c : tok)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw std::runtime_error("PNM: malformed header token '" + tok + "'");
    return static_cast<std::size_t>(std::stoull(tok));
}

std::uint8_t to_byte(double v) {
    double mapped = std::round((v + 1.0) / 2.0 * 255.0);
    if (mapped < 0.0) mapped = 0.0;
    if (mapped > 255.0) mapped = 255.0;
    return static_cast<std::uint8_t>(mapped);
}

}  // namespace

PnmImage read_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for read: " + path.string());

    std::string magic = next_token(in);
    PnmImage img;
    if (magic == "P5") img.channels = 1;
    else if (magic == "P6") img.channels = 3;
    else throw std::runtime_error("PNM: unsupported magic '" + magic + "'");

    img.width = parse_dim(next_token(in));
    img.height = parse_dim(next_token(in));
    std::size_t maxval = parse_dim(next_token(in));
    if (maxval != 255) throw std::runtime_error("PNM: only maxval 255 supported, got " + std::to_string(maxval));
    if (img.width == 0 || img.height == 0) throw std::runtime_error("PNM: zero dimension");

    img.bytes.resize(img.width * img.height * img.channels);
    in.read(reinterpret_cast<char*>(img.bytes.data()), static_cast<std::streamsize>(img.bytes.size()));
    if (in.gcount() != static_cast<std::streamsize>(img.bytes.size())) {
        throw std::runtime_error("PNM: truncated payload in " + path.string());
    }
    return img;
}

void write_pnm(const PnmImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path.string());
    out << (img.channels == 3 ? "P6" : "P5") << "\n"
        << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.bytes.data()),
              static_cast<std::streamsize>(img.bytes.size()));
    if (!out) throw std::runtime_error("PNM: write failed");
}

PnmImage image_to_pnm(const Tensor& image) {
    if (image.rank() != 2 && !(image.rank() == 3 && image.shape()[2] == 3)) {
        throw std::invalid_argument("image_to_pnm: expected {m,n} or {m,n,3}, got " +
                                    shape_str(image.shape()));
    }
    PnmImage img;
    img.height = image.shape()[0];
    img.width = image.shape()[1];
    img.channels = image.rank() == 3 ? 3 : 1;
    img.bytes.resize(image.numel());
    for (std::size_t i = 0; i < image.numel(); ++i) img.bytes[i] = to_byte(image[i]);
    return img;
}

Tensor pnm_to_image(const PnmImage& img) {
    Shape shape = img.channels == 3 ? Shape{img.height, img.width, 3} : Shape{img.height, img.width};
    Tensor t(shape);
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = img.bytes[i] / 255.0 * 2.0 - 1.0;
    return t;
}

PnmImage mask_to_pnm(const Tensor& mask) {
    if (mask.rank() != 2) throw std::invalid_argument("mask_to_pnm: expected rank-2 mask");
    PnmImage img;
    img.height = mask.shape()[0];
    img.width = mask.shape()[1];
    img.channels = 1;
    img.bytes.resize(mask.numel());
    for (std::size_t i = 0; i < mask.numel(); ++i)
        img.bytes[i] = mask[i] > 0.5 ? 255 : 0;
    return img;
}

Tensor pnm_to_mask(const PnmImage& img) {
    if (img.channels != 1) throw std::invalid_argument("pnm_to_mask: expected single channel");
    Tensor t({img.height, img.width});
    for (std::size_t i = 0; i < t.numel(); ++i) t[i] = img.bytes[i] >= 128 ? 1.0 : 0.0;
    return t;
}

void write_image_pnm(const Tensor& image, const std::filesystem::path& path) {
    write_pnm(image_to_pnm(image), path);
}

void write_mask_pgm(const Tensor& mask, const std::filesystem::path& path) {
    write_pnm(mask_to_pnm(mask), path);
}

}  // namespace rgi
