#pragma once

#include <istream>
#include <string>
#include <vector>

#include "symspace/common.hpp"
#include "symspace/linalg.hpp"

namespace symspace::descriptors {

/// Grayscale image with intensities in [0, 1]; at least 3×3 so the interior
/// supports central differences.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;  // row-major

    double at(int row, int col) const { return pixels[static_cast<size_t>(row) * width + col]; }
};

/// Parses a PGM image (text P2 or binary P5).
GrayImage load_pgm(std::istream& in);
GrayImage load_pgm_file(const std::string& path);

/// Per-pixel feature vectors [I, |∂I/∂u|, |∂I/∂v|, |∂²I/∂u²|, |∂²I/∂v²|]
/// with u the column axis and v the row axis, by central differences at unit
/// pixel spacing. Border pixels carry zeros and are excluded downstream.
constexpr int kFeatureCount = 5;
std::vector<Vec> feature_stack(const GrayImage& img);

struct DescriptorConfig {
    int grid = 32;
    double epsilon = 1e-8;
};

/// Empirical covariance (MLE, divided by count) of the features at grid×grid
/// evenly spaced interior pixels, regularized by epsilon·I. Always PD.
linalg::PdMatrix covariance_descriptor(const GrayImage& img, const DescriptorConfig& cfg = {});

}  // namespace symspace::descriptors
