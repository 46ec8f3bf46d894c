#include "symspace/descriptors.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace symspace::descriptors {

namespace {

/// Next whitespace-separated token, skipping '#' comments to end of line.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw std::invalid_argument("pgm: truncated header");
    return tok;
}

int parse_int(const std::string& tok, const char* what) {
    try {
        size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("pgm: malformed ") + what + ": " + tok);
    }
}

}  // namespace

GrayImage load_pgm(std::istream& in) {
    const std::string magic = next_token(in);
    if (magic != "P2" && magic != "P5") throw std::invalid_argument("pgm: expected P2 or P5 header");
    const int width = parse_int(next_token(in), "width");
    const int height = parse_int(next_token(in), "height");
    const int maxval = parse_int(next_token(in), "maxval");
    if (width < 3 || height < 3) throw std::invalid_argument("pgm: image must be at least 3x3");
    if (maxval < 1 || maxval > 65535) throw std::invalid_argument("pgm: maxval out of range");

    GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<size_t>(width) * height);

    if (magic == "P2") {
        for (auto& px : img.pixels) {
            const int v = parse_int(next_token(in), "pixel");
            if (v < 0 || v > maxval) throw std::invalid_argument("pgm: pixel exceeds maxval");
            px = static_cast<double>(v) / maxval;
        }
    } else {
        if (maxval > 255) throw std::invalid_argument("pgm: binary pgm supports maxval <= 255");
        // Exactly one whitespace byte separates the header from the raster.
        for (auto& px : img.pixels) {
            const int v = in.get();
            if (v == EOF) throw std::invalid_argument("pgm: truncated pixel data");
            if (v > maxval) throw std::invalid_argument("pgm: pixel exceeds maxval");
            px = static_cast<double>(v) / maxval;
        }
    }
    return img;
}

GrayImage load_pgm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("pgm: cannot open " + path);
    return load_pgm(in);
}

std::vector<Vec> feature_stack(const GrayImage& img) {
    if (img.width < 3 || img.height < 3) throw std::invalid_argument("feature_stack: image too small");
    std::vector<Vec> features(static_cast<size_t>(img.width) * img.height, Vec::Zero(kFeatureCount));
    for (int r = 1; r < img.height - 1; ++r) {
        for (int c = 1; c < img.width - 1; ++c) {
            Vec f(kFeatureCount);
            const double center = img.at(r, c);
            f[0] = center;
            f[1] = std::abs(0.5 * (img.at(r, c + 1) - img.at(r, c - 1)));
            f[2] = std::abs(0.5 * (img.at(r + 1, c) - img.at(r - 1, c)));
            f[3] = std::abs(img.at(r, c + 1) - 2.0 * center + img.at(r, c - 1));
            f[4] = std::abs(img.at(r + 1, c) - 2.0 * center + img.at(r - 1, c));
            features[static_cast<size_t>(r) * img.width + c] = std::move(f);
        }
    }
    return features;
}

namespace {

/// grid evenly spaced interior indices along an axis of the given extent.
std::vector<int> grid_indices(int extent, int grid) {
    const int lo = 1;
    const int hi = extent - 2;
    if (hi - lo + 1 < grid) throw std::invalid_argument("covariance_descriptor: grid does not fit interior");
    std::vector<int> idx(static_cast<size_t>(grid));
    for (int i = 0; i < grid; ++i) {
        const double t = grid == 1 ? 0.5 : static_cast<double>(i) / (grid - 1);
        idx[static_cast<size_t>(i)] = lo + static_cast<int>(std::llround(t * (hi - lo)));
    }
    return idx;
}

}  // namespace

linalg::PdMatrix covariance_descriptor(const GrayImage& img, const DescriptorConfig& cfg) {
    if (cfg.grid < 2) throw std::invalid_argument("covariance_descriptor: grid must be >= 2");
    if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("covariance_descriptor: epsilon must be > 0");
    const auto features = feature_stack(img);
    const std::vector<int> cols = grid_indices(img.width, cfg.grid);
    const std::vector<int> rows = grid_indices(img.height, cfg.grid);

    const double count = static_cast<double>(rows.size() * cols.size());
    Vec mean = Vec::Zero(kFeatureCount);
    for (int r : rows) {
        for (int c : cols) mean += features[static_cast<size_t>(r) * img.width + c];
    }
    mean /= count;

    Mat cov = Mat::Zero(kFeatureCount, kFeatureCount);
    for (int r : rows) {
        for (int c : cols) {
            const Vec diff = features[static_cast<size_t>(r) * img.width + c] - mean;
            cov += diff * diff.transpose();
        }
    }
    cov /= count;
    cov += cfg.epsilon * Mat::Identity(kFeatureCount, kFeatureCount);
    return linalg::PdMatrix(cov);
}

}  // namespace symspace::descriptors
