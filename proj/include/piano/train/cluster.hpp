#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "piano/core/errors.hpp"
#include "piano/core/rng.hpp"

namespace piano {

namespace detail {

inline double sqdist(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

}  // namespace detail

struct KMeansResult {
  std::vector<int> labels;
  std::vector<double> centers;  // [k, d]
  double inertia = 0.0;
};

// Lloyd's algorithm with k-means++ seeding; best of n_restarts runs.
inline KMeansResult kmeans(const std::vector<double>& X, int n, int d, int k,
                           Rng& rng, int n_restarts = 10, int max_iter = 300) {
  if (k < 1 || k > n) throw ConfigError("kmeans: k out of range");
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();

  std::vector<double> centers(static_cast<std::size_t>(k) * d);
  std::vector<double> dist2(n);
  std::vector<int> labels(n);
  std::vector<int> counts(k);

  for (int r = 0; r < n_restarts; ++r) {
    // k-means++ seeding.
    int first = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    std::copy(X.begin() + static_cast<std::size_t>(first) * d,
              X.begin() + static_cast<std::size_t>(first + 1) * d,
              centers.begin());
    for (int i = 0; i < n; ++i)
      dist2[i] = detail::sqdist(X.data() + static_cast<std::size_t>(i) * d,
                                centers.data(), d);
    for (int c = 1; c < k; ++c) {
      double total = 0.0;
      for (double v : dist2) total += v;
      int pick;
      if (total > 0.0) {
        double u = rng.uniform(0.0, total);
        pick = n - 1;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
          acc += dist2[i];
          if (u <= acc) {
            pick = i;
            break;
          }
        }
      } else {
        pick = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
      }
      std::copy(X.begin() + static_cast<std::size_t>(pick) * d,
                X.begin() + static_cast<std::size_t>(pick + 1) * d,
                centers.begin() + static_cast<std::size_t>(c) * d);
      for (int i = 0; i < n; ++i)
        dist2[i] = std::min(
            dist2[i],
            detail::sqdist(X.data() + static_cast<std::size_t>(i) * d,
                           centers.data() + static_cast<std::size_t>(c) * d,
                           d));
    }

    // Lloyd iterations.
    double inertia = 0.0;
    for (int it = 0; it < max_iter; ++it) {
      bool changed = it == 0;
      inertia = 0.0;
      for (int i = 0; i < n; ++i) {
        double bd = std::numeric_limits<double>::infinity();
        int bc = 0;
        for (int c = 0; c < k; ++c) {
          double dd = detail::sqdist(
              X.data() + static_cast<std::size_t>(i) * d,
              centers.data() + static_cast<std::size_t>(c) * d, d);
          if (dd < bd) {
            bd = dd;
            bc = c;
          }
        }
        if (labels[i] != bc || it == 0) changed = true;
        labels[i] = bc;
        inertia += bd;
      }
      if (!changed) break;
      std::fill(counts.begin(), counts.end(), 0);
      std::vector<double> sums(static_cast<std::size_t>(k) * d, 0.0);
      for (int i = 0; i < n; ++i) {
        ++counts[labels[i]];
        const double* xi = X.data() + static_cast<std::size_t>(i) * d;
        double* s = sums.data() + static_cast<std::size_t>(labels[i]) * d;
        for (int j = 0; j < d; ++j) s[j] += xi[j];
      }
      for (int c = 0; c < k; ++c) {
        if (counts[c] == 0) {
          // Reseed an empty cluster at the farthest point.
          int far = 0;
          double fd = -1.0;
          for (int i = 0; i < n; ++i) {
            double dd = detail::sqdist(
                X.data() + static_cast<std::size_t>(i) * d,
                centers.data() +
                    static_cast<std::size_t>(labels[i]) * d, d);
            if (dd > fd) {
              fd = dd;
              far = i;
            }
          }
          std::copy(X.begin() + static_cast<std::size_t>(far) * d,
                    X.begin() + static_cast<std::size_t>(far + 1) * d,
                    centers.begin() + static_cast<std::size_t>(c) * d);
        } else {
          double* cc = centers.data() + static_cast<std::size_t>(c) * d;
          const double* s = sums.data() + static_cast<std::size_t>(c) * d;
          for (int j = 0; j < d; ++j) cc[j] = s[j] / counts[c];
        }
      }
    }
    if (inertia < best.inertia) {
      best.inertia = inertia;
      best.labels = labels;
      best.centers = centers;
    }
  }
  return best;
}

namespace detail {

// Contingency table between two labelings (values remapped to 0..).
struct Contingency {
  int n = 0, r = 0, c = 0;
  std::vector<long> table;  // [r, c]
  std::vector<long> row, col;
};

inline Contingency contingency(const std::vector<int>& a,
                               const std::vector<int>& b) {
  if (a.size() != b.size() || a.empty())
    throw ConfigError("contingency: label size mismatch");
  auto remap = [](const std::vector<int>& v, std::vector<int>& out) {
    std::vector<int> uniq(v);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    out.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
      out[i] = static_cast<int>(
          std::lower_bound(uniq.begin(), uniq.end(), v[i]) - uniq.begin());
    return static_cast<int>(uniq.size());
  };
  std::vector<int> ra, rb;
  Contingency t;
  t.n = static_cast<int>(a.size());
  t.r = remap(a, ra);
  t.c = remap(b, rb);
  t.table.assign(static_cast<std::size_t>(t.r) * t.c, 0);
  t.row.assign(t.r, 0);
  t.col.assign(t.c, 0);
  for (int i = 0; i < t.n; ++i) {
    ++t.table[static_cast<std::size_t>(ra[i]) * t.c + rb[i]];
    ++t.row[ra[i]];
    ++t.col[rb[i]];
  }
  return t;
}

inline double choose2(long n) { return 0.5 * n * (n - 1); }

}  // namespace detail

// Adjusted Rand index.
inline double adjusted_rand_index(const std::vector<int>& a,
                                  const std::vector<int>& b) {
  auto t = detail::contingency(a, b);
  double sum_ij = 0.0;
  for (long v : t.table) sum_ij += detail::choose2(v);
  double sum_a = 0.0, sum_b = 0.0;
  for (long v : t.row) sum_a += detail::choose2(v);
  for (long v : t.col) sum_b += detail::choose2(v);
  double total = detail::choose2(t.n);
  double expected = sum_a * sum_b / total;
  double max_idx = 0.5 * (sum_a + sum_b);
  if (max_idx == expected) return 1.0;
  return (sum_ij - expected) / (max_idx - expected);
}

// Normalized mutual information (arithmetic-mean normalization).
inline double normalized_mutual_information(const std::vector<int>& a,
                                            const std::vector<int>& b) {
  auto t = detail::contingency(a, b);
  const double n = t.n;
  double mi = 0.0, ha = 0.0, hb = 0.0;
  for (int i = 0; i < t.r; ++i)
    for (int j = 0; j < t.c; ++j) {
      long nij = t.table[static_cast<std::size_t>(i) * t.c + j];
      if (!nij) continue;
      double pij = nij / n;
      mi += pij * std::log(pij / ((t.row[i] / n) * (t.col[j] / n)));
    }
  for (long v : t.row)
    if (v) ha -= (v / n) * std::log(v / n);
  for (long v : t.col)
    if (v) hb -= (v / n) * std::log(v / n);
  double denom = 0.5 * (ha + hb);
  if (denom <= 0.0) return 1.0;
  return mi / denom;
}

// Fowlkes-Mallows index.
inline double fowlkes_mallows_index(const std::vector<int>& a,
                                    const std::vector<int>& b) {
  auto t = detail::contingency(a, b);
  double tp = 0.0;
  for (long v : t.table) tp += detail::choose2(v);
  double pa = 0.0, pb = 0.0;
  for (long v : t.row) pa += detail::choose2(v);
  for (long v : t.col) pb += detail::choose2(v);
  if (pa == 0.0 || pb == 0.0) return 0.0;
  return tp / std::sqrt(pa * pb);
}

// Mean silhouette coefficient over all points (Euclidean distance).
inline double silhouette_score(const std::vector<double>& X, int n, int d,
                               const std::vector<int>& labels) {
  int k = *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<long> counts(k, 0);
  for (int l : labels) ++counts[l];
  double total = 0.0;
  std::vector<double> mean_dist(k);
  for (int i = 0; i < n; ++i) {
    std::fill(mean_dist.begin(), mean_dist.end(), 0.0);
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      mean_dist[labels[j]] += std::sqrt(detail::sqdist(
          X.data() + static_cast<std::size_t>(i) * d,
          X.data() + static_cast<std::size_t>(j) * d, d));
    }
    int li = labels[i];
    if (counts[li] <= 1) continue;  // singleton clusters contribute 0
    double ai = mean_dist[li] / (counts[li] - 1);
    double bi = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == li || counts[c] == 0) continue;
      bi = std::min(bi, mean_dist[c] / counts[c]);
    }
    total += (bi - ai) / std::max(ai, bi);
  }
  return total / n;
}

}  // namespace piano
