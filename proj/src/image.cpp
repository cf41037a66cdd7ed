#include "dpc/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpc {

std::vector<int> GridSegmentation::labels(const ImageShape& shape) const {
  if (grid_rows < 1 || grid_cols < 1) throw std::invalid_argument("grid must have positive size");
  if (shape.rows % grid_rows != 0 || shape.cols % grid_cols != 0)
    throw std::invalid_argument("grid does not tile the image");
  const int cell_r = shape.rows / grid_rows;
  const int cell_c = shape.cols / grid_cols;
  std::vector<int> out(static_cast<std::size_t>(shape.pixels()));
  for (int r = 0; r < shape.rows; ++r)
    for (int c = 0; c < shape.cols; ++c)
      out[static_cast<std::size_t>(shape.index(r, c))] = (r / cell_r) * grid_cols + c / cell_c;
  return out;
}

Eigen::MatrixXd to_matrix(const Eigen::VectorXd& image, const ImageShape& shape) {
  if (image.size() != shape.pixels()) throw std::invalid_argument("image size does not match shape");
  Eigen::MatrixXd out(shape.rows, shape.cols);
  for (int r = 0; r < shape.rows; ++r)
    for (int c = 0; c < shape.cols; ++c) out(r, c) = image[shape.index(r, c)];
  return out;
}

Eigen::VectorXd to_vector(const Eigen::MatrixXd& image) {
  Eigen::VectorXd out(image.size());
  for (Eigen::Index r = 0; r < image.rows(); ++r)
    for (Eigen::Index c = 0; c < image.cols(); ++c) out[r * image.cols() + c] = image(r, c);
  return out;
}

namespace {

double at_clamped(const Eigen::MatrixXd& m, Eigen::Index r, Eigen::Index c) {
  r = std::clamp<Eigen::Index>(r, 0, m.rows() - 1);
  c = std::clamp<Eigen::Index>(c, 0, m.cols() - 1);
  return m(r, c);
}

}  // namespace

Eigen::MatrixXd sobel_magnitude(const Eigen::MatrixXd& image) {
  Eigen::MatrixXd out(image.rows(), image.cols());
  for (Eigen::Index r = 0; r < image.rows(); ++r) {
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      const auto p = [&](int dr, int dc) { return at_clamped(image, r + dr, c + dc); };
      const double gx = (p(-1, 1) + 2 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2 * p(0, -1) + p(1, -1));
      const double gy = (p(1, -1) + 2 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2 * p(-1, 0) + p(-1, 1));
      out(r, c) = std::hypot(gx, gy);
    }
  }
  return out;
}

Eigen::MatrixXd gaussian_blur(const Eigen::MatrixXd& image, double sigma) {
  if (sigma < 0.0) throw std::invalid_argument("gaussian_blur: sigma must be >= 0");
  if (sigma == 0.0) return image;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double w = std::exp(-0.5 * k * k / (sigma * sigma));
    kernel[static_cast<std::size_t>(k + radius)] = w;
    total += w;
  }
  for (double& w : kernel) w /= total;

  Eigen::MatrixXd horizontal(image.rows(), image.cols());
  for (Eigen::Index r = 0; r < image.rows(); ++r)
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[static_cast<std::size_t>(k + radius)] * at_clamped(image, r, c + k);
      horizontal(r, c) = acc;
    }
  Eigen::MatrixXd out(image.rows(), image.cols());
  for (Eigen::Index r = 0; r < image.rows(); ++r)
    for (Eigen::Index c = 0; c < image.cols(); ++c) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[static_cast<std::size_t>(k + radius)] * at_clamped(horizontal, r + k, c);
      out(r, c) = acc;
    }
  return out;
}

}  // namespace dpc
