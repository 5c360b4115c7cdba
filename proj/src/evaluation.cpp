#include "gappy/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "gappy/linalg.hpp"
#include "gappy/rigidity.hpp"
#include "gappy/rng.hpp"

namespace gappy {

namespace {

double det_small(Matrix m) {
  const std::size_t n = m.rows();
  double det = 1.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t pivot = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(m(r, c)) > std::abs(m(pivot, c))) pivot = r;
    if (m(pivot, c) == 0.0) return 0.0;
    if (pivot != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(m(pivot, j), m(c, j));
      det = -det;
    }
    det *= m(c, c);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = m(r, c) / m(c, c);
      for (std::size_t j = c; j < n; ++j) m(r, j) -= f * m(c, j);
    }
  }
  return det;
}

double row_distance(const Matrix& a, std::size_t i, const Matrix& b,
                    std::size_t j) {
  double acc = 0.0;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    const double diff = a(i, c) - b(j, c);
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

}  // namespace

Matrix apply_transform(const RigidTransform& transform, const Matrix& points) {
  check_shape(points.cols() == transform.rotation.rows(),
              "apply_transform: dimension mismatch");
  Matrix out = matmul_nt(points, transform.rotation);
  for (std::size_t i = 0; i < out.rows(); ++i)
    for (std::size_t j = 0; j < out.cols(); ++j)
      out(i, j) += transform.translation[j];
  return out;
}

RigidTransform procrustes_fit(const Matrix& source, const Matrix& target,
                              bool allow_reflection) {
  const std::size_t n = source.rows();
  const std::size_t p = source.cols();
  check_shape(n == target.rows() && p == target.cols(),
              "procrustes_fit: point sets must have matching shape");
  check_shape(p >= 1, "procrustes_fit: empty points");
  if (n < p)
    throw std::invalid_argument(
        "procrustes_fit: need at least p points for a p-dimensional fit");

  const std::vector<double> s_mean = column_mean(source);
  const std::vector<double> t_mean = column_mean(target);
  Matrix s_hat(n, p), t_hat(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) {
      s_hat(i, j) = source(i, j) - s_mean[j];
      t_hat(i, j) = target(i, j) - t_mean[j];
    }

  // Cross-covariance H = sum_i s_hat_i t_hat_i^T, then SVD through the Gram
  // matrix: H^T H = V S^2 V^T and u_i = H v_i / s_i.
  Matrix h(p, p);
  add_matmul_tn(s_hat, t_hat, h);
  Matrix gram(p, p);
  add_matmul_tn(h, h, gram);
  const EigResult eig = sym_eig_small(gram);

  std::vector<double> sing(p);
  for (std::size_t i = 0; i < p; ++i)
    sing[i] = std::sqrt(std::max(eig.values[i], 0.0));
  const double tol = 1e-10 * std::max(sing[0], 1e-30);
  std::size_t rank = 0;
  while (rank < p && sing[rank] > tol) ++rank;
  if (rank + 1 < p)
    throw std::runtime_error(
        "procrustes_fit: degenerate point configuration (cross-covariance "
        "rank " +
        std::to_string(rank) + " < " + std::to_string(p - 1) + ")");

  Matrix u(p, p);
  for (std::size_t i = 0; i < rank; ++i)
    for (std::size_t r = 0; r < p; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < p; ++c) acc += h(r, c) * eig.vectors(c, i);
      u(r, i) = acc / sing[i];
    }
  // Complete the orthonormal basis for null singular directions (at most one
  // given the rank check). Pick the coordinate axis with the largest residual
  // after projecting out known columns.
  for (std::size_t i = rank; i < p; ++i) {
    std::vector<double> best(p, 0.0);
    double best_norm = -1.0;
    for (std::size_t axis = 0; axis < p; ++axis) {
      std::vector<double> cand(p, 0.0);
      cand[axis] = 1.0;
      for (std::size_t k = 0; k < i; ++k) {
        double dot = 0.0;
        for (std::size_t r = 0; r < p; ++r) dot += cand[r] * u(r, k);
        for (std::size_t r = 0; r < p; ++r) cand[r] -= dot * u(r, k);
      }
      double norm2 = 0.0;
      for (const double v : cand) norm2 += v * v;
      if (norm2 > best_norm) {
        best_norm = norm2;
        best = cand;
      }
    }
    const double norm = std::sqrt(best_norm);
    for (std::size_t r = 0; r < p; ++r) u(r, i) = best[r] / norm;
  }

  const auto compose = [&](double last_sign) {
    Matrix q(p, p);
    for (std::size_t r = 0; r < p; ++r)
      for (std::size_t c = 0; c < p; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
          const double sign = k + 1 == p ? last_sign : 1.0;
          acc += eig.vectors(r, k) * sign * u(c, k);
        }
        q(r, c) = acc;
      }
    return q;
  };

  Matrix q = compose(1.0);
  double det = det_small(q);
  // With a rank p-1 cross-covariance the held-out direction's sign carries no
  // information; settle on a proper rotation for determinism.
  if ((det < 0.0 && !allow_reflection) || (det < 0.0 && rank < p)) {
    q = compose(-1.0);
    det = det_small(q);
  }

  RigidTransform out;
  out.rotation = std::move(q);
  out.reflected = det < 0.0;
  out.translation.resize(p);
  for (std::size_t r = 0; r < p; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < p; ++c) acc += out.rotation(r, c) * s_mean[c];
    out.translation[r] = t_mean[r] - acc;
  }
  return out;
}

IsometrySummary isometry_error(const Matrix& embedded, const Matrix& latent,
                               std::size_t pair_sample, std::uint64_t seed) {
  const std::size_t n = embedded.rows();
  check_shape(n == latent.rows(),
              "isometry_error: embedded and latent point counts differ");
  check_shape(n >= 2, "isometry_error: need at least 2 points");

  constexpr std::size_t kAllPairsLimit = 2000;
  constexpr std::size_t kPairCap = 200000;
  const bool exhaustive = n <= kAllPairsLimit;
  const std::size_t total = exhaustive
                                ? n * (n - 1) / 2
                                : std::min(pair_sample == 0 ? kPairCap
                                                            : pair_sample,
                                           kPairCap);

  IsometrySummary out;
  out.n_pairs = total;
  constexpr std::size_t kScatterCap = 5000;
  const std::size_t stride = total <= kScatterCap ? 1 : (total + kScatterCap - 1) / kScatterCap;
  out.scatter.reserve(std::min(total, kScatterCap) + 1);

  Rng rng(derive_seed(seed, 0x150e712ull));
  double sq_sum = 0.0, lat_sum = 0.0;
  std::size_t index = 0;
  const auto visit = [&](std::size_t i, std::size_t j) {
    const double d_lat = row_distance(latent, i, latent, j);
    const double d_emb = row_distance(embedded, i, embedded, j);
    const double diff = d_emb - d_lat;
    sq_sum += diff * diff;
    lat_sum += d_lat;
    out.max_error = std::max(out.max_error, std::abs(diff));
    if (index % stride == 0) out.scatter.push_back({d_lat, d_emb});
    ++index;
  };

  if (exhaustive) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) visit(i, j);
  } else {
    for (std::size_t k = 0; k < total; ++k) {
      std::size_t i = 0, j = 0;
      do {
        i = rng.uniform_index(n);
        j = rng.uniform_index(n);
      } while (i == j);
      visit(i, j);
    }
  }

  out.rmse = std::sqrt(sq_sum / static_cast<double>(total));
  const double lat_mean = lat_sum / static_cast<double>(total);
  out.relative_rmse = lat_mean > 0.0 ? out.rmse / lat_mean
                                     : (out.rmse == 0.0 ? 0.0 : HUGE_VAL);
  return out;
}

Matrix pca_project(const Matrix& points, int target_dim) {
  const std::size_t n = points.rows();
  const std::size_t p = points.cols();
  check_shape(target_dim >= 1 && static_cast<std::size_t>(target_dim) <= p,
              "pca_project: target dimension out of range");
  check_shape(n >= 2, "pca_project: need at least 2 points");
  const std::vector<double> mean = column_mean(points);
  Matrix centered(n, p);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j)
      centered(i, j) = points(i, j) - mean[j];
  Matrix cov(p, p);
  add_matmul_tn(centered, centered, cov);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = 0; j < p; ++j) cov(i, j) /= static_cast<double>(n);

  const EigResult eig = sym_eig_small(cov);
  const std::size_t t = static_cast<std::size_t>(target_dim);
  Matrix basis(p, t);
  for (std::size_t c = 0; c < t; ++c) {
    // Sign convention: dominant coordinate positive.
    std::size_t arg = 0;
    for (std::size_t r = 1; r < p; ++r)
      if (std::abs(eig.vectors(r, c)) > std::abs(eig.vectors(arg, c))) arg = r;
    const double sign = eig.vectors(arg, c) < 0.0 ? -1.0 : 1.0;
    for (std::size_t r = 0; r < p; ++r) basis(r, c) = sign * eig.vectors(r, c);
  }
  return matmul(centered, basis);
}

Matrix stack_rows(const std::vector<Matrix>& blocks) {
  check_shape(!blocks.empty(), "stack_rows: no blocks");
  std::size_t rows = 0;
  const std::size_t cols = blocks.front().cols();
  for (const Matrix& b : blocks) {
    check_shape(b.cols() == cols, "stack_rows: column count mismatch");
    rows += b.rows();
  }
  Matrix out(rows, cols);
  std::size_t at = 0;
  for (const Matrix& b : blocks) {
    std::copy(b.data(), b.data() + b.rows() * b.cols(), out.data() + at * cols);
    at += b.rows();
  }
  return out;
}

MergedPoints build_merged_points(const FusionDataset& data) {
  const std::size_t k_count = data.modalities.size();
  std::vector<std::size_t> offset(k_count + 1, 0);
  for (std::size_t k = 0; k < k_count; ++k)
    offset[k + 1] = offset[k] + data.modalities[k].bursts.size();
  const std::size_t n_nodes = offset[k_count];

  std::vector<std::size_t> parent(n_nodes);
  std::iota(parent.begin(), parent.end(), 0);
  const auto find = [&](std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  for (const CalibrationLink& link : data.calibration) {
    const std::size_t a = offset[link.modality_k] + link.burst_i;
    const std::size_t b = offset[link.modality_s] + link.burst_j;
    parent[find(a)] = find(b);
  }

  MergedPoints out;
  out.point_of.resize(k_count);
  std::vector<int> point_id(n_nodes, -1);
  for (std::size_t k = 0; k < k_count; ++k) {
    out.point_of[k].resize(data.modalities[k].bursts.size());
    for (std::size_t i = 0; i < data.modalities[k].bursts.size(); ++i) {
      const std::size_t root = find(offset[k] + i);
      if (point_id[root] < 0) {
        point_id[root] = static_cast<int>(out.members.size());
        out.members.emplace_back();
      }
      out.point_of[k][i] = point_id[root];
      out.members[point_id[root]].push_back(
          {static_cast<int>(k), static_cast<int>(i)});
    }
  }
  return out;
}

namespace {

void validate_partial(const PartialDistanceMatrix& partial) {
  const std::size_t n = partial.size();
  check_shape(partial.values.cols() == n,
              "distance completion: partial matrix must be square");
  check_shape(partial.known.size() == n,
              "distance completion: mask size mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    check_shape(partial.known[i].size() == n,
                "distance completion: mask row size mismatch");
    if (!partial.known[i][i] || partial.values(i, i) != 0.0)
      throw std::invalid_argument(
          "distance completion: diagonal must be known and zero (row " +
          std::to_string(i) + ")");
    for (std::size_t j = i + 1; j < n; ++j) {
      if (partial.known[i][j] != partial.known[j][i])
        throw std::invalid_argument(
            "distance completion: mask must be symmetric at (" +
            std::to_string(i) + "," + std::to_string(j) + ")");
      if (partial.known[i][j]) {
        if (partial.values(i, j) != partial.values(j, i))
          throw std::invalid_argument(
              "distance completion: known entries must be symmetric at (" +
              std::to_string(i) + "," + std::to_string(j) + ")");
        if (!(partial.values(i, j) >= 0.0))
          throw std::invalid_argument(
              "distance completion: negative known distance at (" +
              std::to_string(i) + "," + std::to_string(j) + ")");
      }
    }
  }
}

Matrix merged_mean_embeddings(const DatasetEmbedding& embedding,
                              const MergedPoints& merged, std::size_t p) {
  Matrix means(merged.size(), p);
  for (std::size_t pt = 0; pt < merged.size(); ++pt) {
    for (const auto& [k, i] : merged.members[pt]) {
      const std::vector<double>& m = embedding[k][i].mean;
      for (std::size_t c = 0; c < p; ++c) means(pt, c) += m[c];
    }
    const double inv = 1.0 / static_cast<double>(merged.members[pt].size());
    for (std::size_t c = 0; c < p; ++c) means(pt, c) *= inv;
  }
  return means;
}

}  // namespace

Matrix complete_distance_matrix(const GappyLocaModel& model,
                                const FusionDataset& data,
                                const PartialDistanceMatrix& partial) {
  const MergedPoints merged = build_merged_points(data);
  if (partial.size() != merged.size())
    throw std::invalid_argument(
        "distance completion: partial matrix has " +
        std::to_string(partial.size()) + " rows but the dataset merges to " +
        std::to_string(merged.size()) + " points");
  validate_partial(partial);

  const DatasetEmbedding embedding = embed_dataset(model, data);
  const Matrix means = merged_mean_embeddings(
      embedding, merged, static_cast<std::size_t>(model.embedding_dim));

  const std::size_t n = merged.size();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = partial.known[i][j] ? partial.values(i, j)
                                           : row_distance(means, i, means, j);
      out(i, j) = v;
      out(j, i) = v;
    }
  return out;
}

Matrix merged_centers(const GroundTruth& gt, const MergedPoints& merged) {
  check_shape(!merged.members.empty(), "merged_centers: no points");
  const std::size_t d = static_cast<std::size_t>(gt.intrinsic_dim);
  Matrix out(merged.size(), d);
  for (std::size_t pt = 0; pt < merged.size(); ++pt) {
    const auto& [k, i] = merged.members[pt].front();
    check_shape(static_cast<std::size_t>(k) < gt.centers.size() &&
                    static_cast<std::size_t>(i) < gt.centers[k].rows(),
                "merged_centers: ground truth does not cover the dataset");
    for (std::size_t c = 0; c < d; ++c) out(pt, c) = gt.centers[k](i, c);
  }
  return out;
}

PartialDistanceMatrix make_partial_from_ground_truth(const FusionDataset& data,
                                                     const GroundTruth& gt) {
  const MergedPoints merged = build_merged_points(data);
  const Matrix centers = merged_centers(gt, merged);
  const std::size_t n = merged.size();

  std::vector<std::vector<bool>> seen_by(n);
  for (std::size_t pt = 0; pt < n; ++pt) {
    seen_by[pt].assign(data.modalities.size(), false);
    for (const auto& [k, i] : merged.members[pt]) seen_by[pt][k] = true;
  }

  PartialDistanceMatrix partial(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      bool shared = false;
      for (std::size_t k = 0; k < data.modalities.size() && !shared; ++k)
        shared = seen_by[i][k] && seen_by[j][k];
      if (!shared) continue;
      const double dist = row_distance(centers, i, centers, j);
      partial.values(i, j) = dist;
      partial.values(j, i) = dist;
      partial.known[i][j] = true;
      partial.known[j][i] = true;
    }
  return partial;
}

CompletionScore score_completion(const Matrix& completed,
                                 const PartialDistanceMatrix& partial,
                                 const Matrix& true_points) {
  const std::size_t n = partial.size();
  check_shape(completed.rows() == n && completed.cols() == n,
              "score_completion: matrix size mismatch");
  check_shape(true_points.rows() == n,
              "score_completion: true point count mismatch");
  CompletionScore out;
  double sq_sum = 0.0, true_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      if (partial.known[i][j]) continue;
      const double truth = row_distance(true_points, i, true_points, j);
      const double diff = completed(i, j) - truth;
      sq_sum += diff * diff;
      true_sum += truth;
      out.max_error = std::max(out.max_error, std::abs(diff));
      ++out.n_filled;
    }
  if (out.n_filled == 0) return out;
  out.rmse = std::sqrt(sq_sum / static_cast<double>(out.n_filled));
  const double mean_true = true_sum / static_cast<double>(out.n_filled);
  out.relative_rmse = mean_true > 0.0 ? out.rmse / mean_true
                                      : (out.rmse == 0.0 ? 0.0 : HUGE_VAL);
  return out;
}

BaselineResult baseline_register(const FusionDataset& data,
                                 const TrainConfig& cfg) {
  require_valid(data);
  const std::size_t k_count = data.modalities.size();
  const int d = data.intrinsic_dim;

  BaselineResult out;
  std::vector<Matrix> raw_means(k_count);
  int p = 0;
  for (std::size_t k = 0; k < k_count; ++k) {
    FusionDataset single;
    single.intrinsic_dim = data.intrinsic_dim;
    single.modalities.push_back(data.modalities[k]);
    TrainConfig sub = cfg;
    sub.w_calib = 0.0;
    sub.seed = derive_seed(cfg.seed, 1000 + k);
    TrainResult trained = train(single, sub);
    p = trained.model.embedding_dim;
    const DatasetEmbedding emb = embed_dataset(trained.model, single);
    Matrix means(emb[0].size(), static_cast<std::size_t>(p));
    for (std::size_t i = 0; i < emb[0].size(); ++i)
      for (int c = 0; c < p; ++c) means(i, c) = emb[0][i].mean[c];
    raw_means[k] = std::move(means);
    out.histories.push_back(std::move(trained.history));
  }

  if (k_count == 1) {
    out.means = std::move(raw_means[0]);
    return out;
  }

  // Modality graph: one edge per pair with at least one calibration link.
  std::vector<std::vector<std::vector<std::pair<int, int>>>> pair_links(
      k_count, std::vector<std::vector<std::pair<int, int>>>(k_count));
  for (const CalibrationLink& link : data.calibration) {
    pair_links[link.modality_k][link.modality_s].push_back(
        {link.burst_i, link.burst_j});
    pair_links[link.modality_s][link.modality_k].push_back(
        {link.burst_j, link.burst_i});
  }

  Graph graph;
  graph.vertices = static_cast<int>(k_count);
  for (std::size_t a = 0; a < k_count; ++a)
    for (std::size_t b = a + 1; b < k_count; ++b)
      if (!pair_links[a][b].empty())
        graph.add_edge(static_cast<int>(a), static_cast<int>(b));
  const auto components = disconnected_subgraphs(graph);
  if (components.size() > 1) {
    std::ostringstream msg;
    msg << "baseline registration: modality graph is disconnected;";
    for (const auto& comp : components) {
      msg << " {";
      for (std::size_t i = 0; i < comp.size(); ++i)
        msg << (i ? "," : "") << "modality "
            << data.modalities[comp[i]].modality_id;
      msg << "}";
    }
    throw std::runtime_error(msg.str());
  }

  // Spanning tree by breadth-first search from modality 1, ascending ids.
  std::vector<int> bfs_parent(k_count, -1);
  std::vector<std::size_t> order;
  std::vector<bool> seen(k_count, false);
  std::vector<std::size_t> queue{0};
  seen[0] = true;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.erase(queue.begin());
    order.push_back(v);
    for (std::size_t w = 0; w < k_count; ++w)
      if (!seen[w] && !pair_links[v][w].empty()) {
        seen[w] = true;
        bfs_parent[w] = static_cast<int>(v);
        queue.push_back(w);
      }
  }

  const int needed = d * (d + 1) / 2;
  std::vector<Matrix> placed = raw_means;
  for (const std::size_t child : order) {
    if (bfs_parent[child] < 0) continue;  // root keeps its own frame
    const std::size_t par = static_cast<std::size_t>(bfs_parent[child]);
    const auto& links = pair_links[par][child];
    if (static_cast<int>(links.size()) < needed)
      out.warnings.push_back(
          "modalities " + std::to_string(data.modalities[par].modality_id) +
          " and " + std::to_string(data.modalities[child].modality_id) +
          " share only " + std::to_string(links.size()) +
          " calibration link(s); rigid registration needs " +
          std::to_string(needed));
    Matrix source(links.size(), static_cast<std::size_t>(p));
    Matrix target(links.size(), static_cast<std::size_t>(p));
    for (std::size_t l = 0; l < links.size(); ++l)
      for (int c = 0; c < p; ++c) {
        target(l, c) = placed[par](links[l].first, c);
        source(l, c) = raw_means[child](links[l].second, c);
      }
    const RigidTransform transform = procrustes_fit(source, target, true);
    placed[child] = apply_transform(transform, raw_means[child]);
  }

  out.means = stack_rows(placed);
  return out;
}

}  // namespace gappy
