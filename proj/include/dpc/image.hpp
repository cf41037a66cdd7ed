#pragma once

#include <vector>

#include <Eigen/Dense>

namespace dpc {

/// Single-channel image stored as a flat vector, pixel (r, c) at r * cols + c.
struct ImageShape {
  int rows = 0;
  int cols = 0;
  int pixels() const noexcept { return rows * cols; }
  int index(int r, int c) const noexcept { return r * cols + c; }
};

/// Regular grid of rectangular segments; must tile the image exactly.
struct GridSegmentation {
  int grid_rows = 4;
  int grid_cols = 4;

  int segments() const noexcept { return grid_rows * grid_cols; }
  /// Segment id of every pixel. Throws unless the grid divides the image.
  std::vector<int> labels(const ImageShape& shape) const;
};

/// Image as a rows x cols matrix view-copy and back.
Eigen::MatrixXd to_matrix(const Eigen::VectorXd& image, const ImageShape& shape);
Eigen::VectorXd to_vector(const Eigen::MatrixXd& image);

/// Sobel gradient magnitude with replicated borders.
Eigen::MatrixXd sobel_magnitude(const Eigen::MatrixXd& image);

/// Separable Gaussian blur, truncated at 3 sigma, replicated borders.
/// sigma = 0 returns the input unchanged.
Eigen::MatrixXd gaussian_blur(const Eigen::MatrixXd& image, double sigma);

}  // namespace dpc
