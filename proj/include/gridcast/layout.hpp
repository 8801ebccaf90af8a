#pragma once

#include <array>
#include <utility>
#include <vector>

#include "gridcast/metrics.hpp"

namespace gridcast {

// 2D projection of the K topics plus the projection axes used.
struct TopicEmbedding2D {
  std::vector<std::array<double, 2>> points;    // one per topic
  std::array<std::vector<double>, 2> axes;      // orthonormal, length D
  std::array<double, 2> eigenvalues{};          // descending
};

struct GridSpec {
  int k = 1;  // side length; K must equal k*k
};

// Bijection topic -> (row, col).
struct GridAssignment {
  int k = 0;
  std::vector<std::pair<int, int>> cell_of;  // indexed by topic

  int topic_at(int row, int col) const;  // inverse lookup
};

// k x k image of one entity's topical metrics for one period.
struct MetricFrame {
  std::string entity_id;
  std::int64_t period_index = 0;
  int k = 0;
  std::vector<double> cells;  // row-major

  double at(int row, int col) const {
    return cells[static_cast<std::size_t>(row) * k + col];
  }
};

// Element-wise square root of the K x V topic-word matrix: the Hellinger
// representation under which Euclidean distance is meaningful for
// probability rows.
std::vector<double> hellinger_features(const LdaModel& model);

// Principal component projection onto the top-2 axes of the covariance of
// the K feature rows. Rows are centered; covariance uses the 1/(K-1)
// normalization; axis signs are fixed so each axis's largest-magnitude
// loading is positive. Throws NumericError if the eigensolver fails.
TopicEmbedding2D pca_embed(const std::vector<double>& features, int K, int D);

// Recursive median partition onto the grid. At each node the wider grid
// dimension is split (ties split columns); the low side gets floor(n/2)
// rows or columns; points are partitioned by rank along the matching
// embedding axis (axis 0 -> columns, axis 1 -> rows; ties broken by topic
// index ascending). The result is a bijection and every split sends points
// with smaller coordinates to the lower-indexed sub-rectangle.
GridAssignment split_diffuse_map(const TopicEmbedding2D& embedding,
                                 const GridSpec& grid);

// Pure permutation of a metric vector into the grid.
MetricFrame apply_assignment(const TopicalMetricVector& vec,
                             const GridAssignment& assignment);

// Inverse permutation: frame cells back to a topic-indexed vector.
std::vector<double> invert_assignment(const MetricFrame& frame,
                                      const GridAssignment& assignment);

void write_assignment(const std::filesystem::path& path, const GridAssignment& a);
GridAssignment read_assignment(const std::filesystem::path& path);

// Frame tensor dump: the metrics dump format with layout
// [entity][period][row][col] (manifest carries grid_k alongside K = k*k).
void write_frame_tensor(const std::filesystem::path& dir,
                        const std::map<std::string, MetricSeries>& series,
                        const GridAssignment& assignment);


// Symmetric eigendecomposition by cyclic Jacobi rotations; returns
// eigenvalues (descending) and matching unit eigenvectors as rows.
// Exposed for reuse; n is expected to stay modest (hundreds).
struct EigenResult {
  std::vector<double> values;
  std::vector<double> vectors;  // row i is the eigenvector of values[i]
};
EigenResult jacobi_eigen_symmetric(std::vector<double> matrix, int n);

}  // namespace gridcast
