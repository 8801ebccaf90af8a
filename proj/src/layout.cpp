#include "gridcast/layout.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

namespace gridcast {

int GridAssignment::topic_at(int row, int col) const {
  for (std::size_t t = 0; t < cell_of.size(); ++t)
    if (cell_of[t].first == row && cell_of[t].second == col)
      return static_cast<int>(t);
  throw DataError("assignment has no topic at requested cell");
}

std::vector<double> hellinger_features(const LdaModel& model) {
  std::vector<double> features(model.phi.size());
  for (std::size_t i = 0; i < model.phi.size(); ++i)
    features[i] = std::sqrt(model.phi[i]);
  return features;
}

EigenResult jacobi_eigen_symmetric(std::vector<double> a, int n) {
  std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;

  auto at = [&](std::vector<double>& m, int r, int c) -> double& {
    return m[static_cast<std::size_t>(r) * n + c];
  };

  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(at(a, i, j)));
  if (scale == 0.0) scale = 1.0;

  const int max_sweeps = 100;
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += at(a, p, q) * at(a, p, q);
    if (std::sqrt(off) <= 1e-14 * scale * n) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = at(a, p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double app = at(a, p, p);
        const double aqq = at(a, q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (int i = 0; i < n; ++i) {
          const double aip = at(a, i, p);
          const double aiq = at(a, i, q);
          at(a, i, p) = c * aip - s * aiq;
          at(a, i, q) = s * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          const double api = at(a, p, i);
          const double aqi = at(a, q, i);
          at(a, p, i) = c * api - s * aqi;
          at(a, q, i) = s * api + c * aqi;
        }
        for (int i = 0; i < n; ++i) {
          const double vip = at(v, i, p);
          const double viq = at(v, i, q);
          at(v, i, p) = c * vip - s * viq;
          at(v, i, q) = s * vip + c * viq;
        }
      }
    }
  }
  if (sweep == max_sweeps)
    throw NumericError("jacobi eigensolver failed to converge");

  EigenResult result;
  result.values.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) result.values[i] = at(a, i, i);

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    return result.values[x] > result.values[y];
  });

  EigenResult sorted;
  sorted.values.resize(static_cast<std::size_t>(n));
  sorted.vectors.resize(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    sorted.values[i] = result.values[order[i]];
    for (int j = 0; j < n; ++j)
      sorted.vectors[static_cast<std::size_t>(i) * n + j] =
          at(v, j, order[i]);  // columns of v are eigenvectors
  }
  return sorted;
}

namespace {

void fix_axis_sign(std::vector<double>& axis) {
  std::size_t arg = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < axis.size(); ++i) {
    if (std::abs(axis[i]) > best) {
      best = std::abs(axis[i]);
      arg = i;
    }
  }
  if (axis[arg] < 0.0)
    for (auto& v : axis) v = -v;
}

}  // namespace

TopicEmbedding2D pca_embed(const std::vector<double>& features, int K, int D) {
  if (K < 2 || D < 2) throw DataError("pca_embed: need K >= 2 and D >= 2");
  if (features.size() != static_cast<std::size_t>(K) * D)
    throw DataError("pca_embed: feature matrix size mismatch");

  // Center rows (subtract the column means).
  std::vector<double> centered(features);
  for (int j = 0; j < D; ++j) {
    double mean = 0.0;
    for (int i = 0; i < K; ++i) mean += centered[static_cast<std::size_t>(i) * D + j];
    mean /= K;
    for (int i = 0; i < K; ++i) centered[static_cast<std::size_t>(i) * D + j] -= mean;
  }

  const double norm = 1.0 / (K - 1);
  std::array<std::vector<double>, 2> axes;
  std::array<double, 2> eigenvalues{};

  if (D <= K) {
    // Covariance D x D.
    std::vector<double> cov(static_cast<std::size_t>(D) * D, 0.0);
    for (int i = 0; i < K; ++i) {
      const double* row = centered.data() + static_cast<std::size_t>(i) * D;
      for (int a = 0; a < D; ++a)
        for (int b = a; b < D; ++b)
          cov[static_cast<std::size_t>(a) * D + b] += row[a] * row[b];
    }
    for (int a = 0; a < D; ++a)
      for (int b = a; b < D; ++b) {
        cov[static_cast<std::size_t>(a) * D + b] *= norm;
        cov[static_cast<std::size_t>(b) * D + a] =
            cov[static_cast<std::size_t>(a) * D + b];
      }
    const EigenResult eig = jacobi_eigen_symmetric(std::move(cov), D);
    for (int c = 0; c < 2; ++c) {
      eigenvalues[c] = eig.values[c];
      axes[c].assign(eig.vectors.begin() + static_cast<std::size_t>(c) * D,
                     eig.vectors.begin() + static_cast<std::size_t>(c + 1) * D);
    }
  } else {
    // Gram trick: the K x K matrix X Xt / (K-1) shares the covariance's
    // nonzero eigenvalues; covariance eigenvectors are Xt u, normalized.
    std::vector<double> gram(static_cast<std::size_t>(K) * K, 0.0);
    for (int i = 0; i < K; ++i)
      for (int j = i; j < K; ++j) {
        double dot = 0.0;
        const double* ri = centered.data() + static_cast<std::size_t>(i) * D;
        const double* rj = centered.data() + static_cast<std::size_t>(j) * D;
        for (int d = 0; d < D; ++d) dot += ri[d] * rj[d];
        gram[static_cast<std::size_t>(i) * K + j] = dot * norm;
        gram[static_cast<std::size_t>(j) * K + i] = dot * norm;
      }
    const EigenResult eig = jacobi_eigen_symmetric(std::move(gram), K);
    for (int c = 0; c < 2; ++c) {
      eigenvalues[c] = eig.values[c];
      std::vector<double> axis(static_cast<std::size_t>(D), 0.0);
      const double* u = eig.vectors.data() + static_cast<std::size_t>(c) * K;
      for (int i = 0; i < K; ++i) {
        const double* row = centered.data() + static_cast<std::size_t>(i) * D;
        for (int d = 0; d < D; ++d) axis[d] += u[i] * row[d];
      }
      double len = 0.0;
      for (double vd : axis) len += vd * vd;
      len = std::sqrt(len);
      if (len > 0.0)
        for (auto& vd : axis) vd /= len;
      axes[c] = std::move(axis);
    }
    // Guard orthogonality when the top eigenvalues are (near) degenerate.
    double dot = 0.0;
    for (int d = 0; d < D; ++d) dot += axes[0][d] * axes[1][d];
    if (std::abs(dot) > 1e-12) {
      double len = 0.0;
      for (int d = 0; d < D; ++d) {
        axes[1][d] -= dot * axes[0][d];
        len += axes[1][d] * axes[1][d];
      }
      len = std::sqrt(len);
      if (len > 0.0)
        for (auto& vd : axes[1]) vd /= len;
    }
  }

  fix_axis_sign(axes[0]);
  fix_axis_sign(axes[1]);

  TopicEmbedding2D embedding;
  embedding.axes = std::move(axes);
  embedding.eigenvalues = eigenvalues;
  embedding.points.resize(static_cast<std::size_t>(K));
  for (int i = 0; i < K; ++i) {
    const double* row = centered.data() + static_cast<std::size_t>(i) * D;
    for (int c = 0; c < 2; ++c) {
      double dot = 0.0;
      for (int d = 0; d < D; ++d) dot += row[d] * embedding.axes[c][d];
      embedding.points[i][c] = dot;
    }
  }
  for (const auto& p : embedding.points)
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]))
      throw NumericError("pca_embed produced non-finite coordinates");
  return embedding;
}

namespace {

// Recursive partition. Points are referenced by topic index; the node covers
// rows [row0, row0+rows) x cols [col0, col0+cols).
void split_diffuse_rec(const std::vector<std::array<double, 2>>& points,
                       std::vector<int>& topics, int begin, int end, int row0,
                       int rows, int col0, int cols, GridAssignment& out) {
  const int count = end - begin;
  if (count != rows * cols)
    throw NumericError("split_diffuse: point/cell count mismatch");
  if (count == 1) {
    out.cell_of[static_cast<std::size_t>(topics[begin])] = {row0, col0};
    return;
  }
  const bool split_rows = rows > cols;  // ties split columns
  const int axis = split_rows ? 1 : 0;  // axis 1 = rows, axis 0 = cols

  std::sort(topics.begin() + begin, topics.begin() + end, [&](int a, int b) {
    if (points[a][axis] != points[b][axis]) return points[a][axis] < points[b][axis];
    return a < b;
  });

  if (split_rows) {
    const int low_rows = rows / 2;
    const int low_count = low_rows * cols;
    split_diffuse_rec(points, topics, begin, begin + low_count, row0, low_rows,
                      col0, cols, out);
    split_diffuse_rec(points, topics, begin + low_count, end, row0 + low_rows,
                      rows - low_rows, col0, cols, out);
  } else {
    const int low_cols = cols / 2;
    const int low_count = rows * low_cols;
    split_diffuse_rec(points, topics, begin, begin + low_count, row0, rows,
                      col0, low_cols, out);
    split_diffuse_rec(points, topics, begin + low_count, end, row0, rows,
                      col0 + low_cols, cols - low_cols, out);
  }
}

}  // namespace

GridAssignment split_diffuse_map(const TopicEmbedding2D& embedding,
                                 const GridSpec& grid) {
  const int k = grid.k;
  if (k < 1) throw DataError("split_diffuse_map: grid side must be >= 1");
  const int K = static_cast<int>(embedding.points.size());
  if (K != k * k)
    throw DataError("split_diffuse_map: K must equal k*k (K=" +
                    std::to_string(K) + ", k=" + std::to_string(k) + ")");

  GridAssignment out;
  out.k = k;
  out.cell_of.assign(static_cast<std::size_t>(K), {-1, -1});
  std::vector<int> topics(static_cast<std::size_t>(K));
  std::iota(topics.begin(), topics.end(), 0);
  split_diffuse_rec(embedding.points, topics, 0, K, 0, k, 0, k, out);
  return out;
}

MetricFrame apply_assignment(const TopicalMetricVector& vec,
                             const GridAssignment& assignment) {
  const int k = assignment.k;
  if (vec.values.size() != static_cast<std::size_t>(k) * k)
    throw DataError("apply_assignment: vector length != k*k");
  MetricFrame frame;
  frame.entity_id = vec.entity_id;
  frame.period_index = vec.period_index;
  frame.k = k;
  frame.cells.assign(static_cast<std::size_t>(k) * k, 0.0);
  for (std::size_t t = 0; t < vec.values.size(); ++t) {
    const auto [row, col] = assignment.cell_of[t];
    frame.cells[static_cast<std::size_t>(row) * k + col] = vec.values[t];
  }
  return frame;
}

std::vector<double> invert_assignment(const MetricFrame& frame,
                                      const GridAssignment& assignment) {
  if (frame.k != assignment.k)
    throw DataError("invert_assignment: grid size mismatch");
  std::vector<double> values(assignment.cell_of.size(), 0.0);
  for (std::size_t t = 0; t < assignment.cell_of.size(); ++t) {
    const auto [row, col] = assignment.cell_of[t];
    values[t] = frame.at(row, col);
  }
  return values;
}

void write_assignment(const std::filesystem::path& path, const GridAssignment& a) {
  nlohmann::json j;
  j["k"] = a.k;
  auto cells = nlohmann::json::array();
  for (std::size_t t = 0; t < a.cell_of.size(); ++t)
    cells.push_back({t, a.cell_of[t].first, a.cell_of[t].second});
  j["cells"] = cells;
  write_text_file(path, j.dump(1));
}

GridAssignment read_assignment(const std::filesystem::path& path) {
  const auto j = nlohmann::json::parse(read_text_file(path));
  GridAssignment a;
  a.k = j.at("k").get<int>();
  a.cell_of.assign(static_cast<std::size_t>(a.k) * a.k, {-1, -1});
  for (const auto& cell : j.at("cells")) {
    const auto t = cell.at(0).get<std::size_t>();
    a.cell_of.at(t) = {cell.at(1).get<int>(), cell.at(2).get<int>()};
  }
  return a;
}

void write_frame_tensor(const std::filesystem::path& dir,
                        const std::map<std::string, MetricSeries>& series,
                        const GridAssignment& assignment) {
  std::filesystem::create_directories(dir);
  const int k = assignment.k;
  nlohmann::json manifest;
  std::vector<std::string> entities;
  std::vector<double> data;
  std::int64_t period_begin = 0, period_count = 0;
  for (const auto& [id, s] : series) {
    if (entities.empty() && !s.periods.empty()) {
      period_begin = s.periods.front().period_index;
      period_count = static_cast<std::int64_t>(s.periods.size());
    }
    entities.push_back(id);
    for (const auto& vec : s.periods) {
      const MetricFrame frame = apply_assignment(vec, assignment);
      data.insert(data.end(), frame.cells.begin(), frame.cells.end());
    }
  }
  manifest["entities"] = entities;
  manifest["period_begin"] = period_begin;
  manifest["period_count"] = period_count;
  manifest["K"] = k * k;
  manifest["grid_k"] = k;
  write_text_file(dir / "manifest.json", manifest.dump(1));
  write_f64_file(dir / "values.f64", data);
}

}  // namespace gridcast
