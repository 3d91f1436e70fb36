#include "stereoranger/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "stereoranger/errors.hpp"

namespace stereoranger {

Image8::Image8(int width, int height, std::uint8_t fill)
    : width_(width), height_(height), pixels_(static_cast<std::size_t>(width) * height, fill) {
    if (width <= 0 || height <= 0)
        throw InvalidArgument("image dimensions must be positive");
}

double Image8::sample(double x, double y) const {
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const int x1 = std::min(x0 + 1, width_ - 1);
    const int y1 = std::min(y0 + 1, height_ - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    const double top = (1.0 - fx) * at(x0, y0) + fx * at(x1, y0);
    const double bot = (1.0 - fx) * at(x0, y1) + fx * at(x1, y1);
    return (1.0 - fy) * top + fy * bot;
}

void save_pgm(const Image8& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot open '" + path + "' for writing");
    out << "P5\n" << img.width() << " " << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels().data()),
              static_cast<std::streamsize>(img.pixels().size()));
    if (!out)
        throw Error("write failed for '" + path + "'");
}

namespace {

// Reads the next whitespace-delimited PGM header token, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
        } else if (!std::isspace(c)) {
            tok.push_back(static_cast<char>(c));
            while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#')
                tok.push_back(static_cast<char>(in.get()));
            return tok;
        }
    }
    return tok;
}

}  // namespace

Image8 load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot open '" + path + "'");
    if (next_token(in) != "P5")
        throw FormatError("pgm-magic", 1, "expected P5 in '" + path + "'");
    int width = 0, height = 0, maxval = 0;
    try {
        width = std::stoi(next_token(in));
        height = std::stoi(next_token(in));
        maxval = std::stoi(next_token(in));
    } catch (const std::exception&) {
        throw FormatError("pgm-header", 1, "bad header in '" + path + "'");
    }
    if (width <= 0 || height <= 0 || maxval != 255)
        throw FormatError("pgm-header", 1, "unsupported dimensions or maxval in '" + path + "'");
    in.get();  // single whitespace after maxval
    Image8 img(width, height);
    in.read(reinterpret_cast<char*>(img.pixels().data()),
            static_cast<std::streamsize>(img.pixels().size()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixels().size()))
        throw FormatError("pgm-data", 1, "truncated pixel data in '" + path + "'");
    return img;
}

}  // namespace stereoranger
