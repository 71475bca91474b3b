#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>

#include "moralmap/cluster.hpp"
#include "moralmap/embedding.hpp"
#include "moralmap/parallel.hpp"

namespace moralmap {
namespace {

struct MstEdge {
  std::size_t a;
  std::size_t b;
  double weight;
};

struct Merge {
  std::size_t left;
  std::size_t right;
  double distance;
  std::size_t size;
};

struct CondensedRow {
  std::size_t parent;
  std::size_t child;
  double lambda;
  std::size_t child_size;
};

std::vector<double> core_distances(const Matrix& x, std::size_t min_samples, Metric metric) {
  const std::size_t n = x.rows();
  const std::size_t k = std::min(min_samples, n);
  std::vector<double> core(n, 0.0);
  if (k <= 1) return core;
  parallel_for(n, [&](std::size_t i) {
    std::vector<double> d(n);
    for (std::size_t j = 0; j < n; ++j) d[j] = j == i ? 0.0 : distance(metric, x.row(i), x.row(j));
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
    core[i] = d[k - 1];
  });
  return core;
}

// Prim on the implicit mutual-reachability graph. Ties go to the lowest
// vertex index, then the edges are sorted by (weight, min end, max end).
std::vector<MstEdge> mutual_reachability_mst(const Matrix& x, const std::vector<double>& core,
                                             Metric metric) {
  const std::size_t n = x.rows();
  std::vector<MstEdge> edges;
  if (n < 2) return edges;
  edges.reserve(n - 1);
  std::vector<char> in_tree(n, 0);
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> from(n, 0);
  std::size_t current = 0;
  in_tree[0] = 1;
  for (std::size_t step = 1; step < n; ++step) {
    std::size_t next = n;
    double next_w = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (in_tree[j]) continue;
      const double mr =
          std::max({distance(metric, x.row(current), x.row(j)), core[current], core[j]});
      if (mr < best[j]) {
        best[j] = mr;
        from[j] = current;
      }
      if (next == n || best[j] < next_w) {
        next_w = best[j];
        next = j;
      }
    }
    in_tree[next] = 1;
    edges.push_back({from[next], next, next_w});
    current = next;
  }
  // Ties break on the unordered endpoint pair; the stored direction (tree
  // side first) only decides which child is left in the hierarchy.
  std::sort(edges.begin(), edges.end(), [](const MstEdge& p, const MstEdge& q) {
    if (p.weight != q.weight) return p.weight < q.weight;
    const auto pk = std::minmax(p.a, p.b), qk = std::minmax(q.a, q.b);
    return pk < qk;
  });
  return edges;
}

std::vector<Merge> single_linkage(const std::vector<MstEdge>& mst, std::size_t n) {
  std::vector<std::size_t> parent(2 * n - 1);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<std::size_t> size(2 * n - 1, 1);
  auto find = [&](std::size_t v) {
    std::size_t root = v;
    while (parent[root] != root) root = parent[root];
    while (parent[v] != root) {
      const std::size_t up = parent[v];
      parent[v] = root;
      v = up;
    }
    return root;
  };
  std::vector<Merge> merges;
  merges.reserve(mst.size());
  std::size_t next_label = n;
  for (const auto& e : mst) {
    const std::size_t ra = find(e.a), rb = find(e.b);
    const std::size_t sz = size[ra] + size[rb];
    merges.push_back({ra, rb, e.weight, sz});
    parent[ra] = parent[rb] = next_label;
    size[next_label] = sz;
    ++next_label;
  }
  return merges;
}

// Breadth-first walk of the single-linkage hierarchy rooted at `root`.
std::vector<std::size_t> bfs_hierarchy(const std::vector<Merge>& merges, std::size_t n, std::size_t root) {
  std::vector<std::size_t> out;
  std::vector<std::size_t> level{root};
  while (!level.empty()) {
    out.insert(out.end(), level.begin(), level.end());
    std::vector<std::size_t> next;
    for (std::size_t v : level) {
      if (v < n) continue;
      next.push_back(merges[v - n].left);
      next.push_back(merges[v - n].right);
    }
    level = std::move(next);
  }
  return out;
}

std::vector<CondensedRow> condense(const std::vector<Merge>& merges, std::size_t n, std::size_t min_size) {
  const std::size_t root = 2 * n - 2;
  std::vector<std::size_t> relabel(2 * n - 1, 0);
  std::vector<char> ignore(2 * n - 1, 0);
  relabel[root] = n;
  std::size_t next_label = n + 1;
  std::vector<CondensedRow> rows;

  auto size_of = [&](std::size_t v) { return v < n ? std::size_t{1} : merges[v - n].size; };
  auto fall_out = [&](std::size_t sub_root, std::size_t parent_label, double lambda) {
    for (std::size_t v : bfs_hierarchy(merges, n, sub_root)) {
      if (v < n) rows.push_back({parent_label, v, lambda, 1});
      ignore[v] = 1;
    }
  };

  for (std::size_t node : bfs_hierarchy(merges, n, root)) {
    if (ignore[node] || node < n) continue;
    const Merge& m = merges[node - n];
    const double lambda = m.distance > 0.0 ? 1.0 / m.distance : std::numeric_limits<double>::infinity();
    const std::size_t lc = size_of(m.left), rc = size_of(m.right);
    if (lc >= min_size && rc >= min_size) {
      relabel[m.left] = next_label++;
      rows.push_back({relabel[node], relabel[m.left], lambda, lc});
      relabel[m.right] = next_label++;
      rows.push_back({relabel[node], relabel[m.right], lambda, rc});
    } else if (lc < min_size && rc < min_size) {
      fall_out(m.left, relabel[node], lambda);
      fall_out(m.right, relabel[node], lambda);
    } else if (lc < min_size) {
      relabel[m.right] = relabel[node];
      fall_out(m.left, relabel[node], lambda);
    } else {
      relabel[m.left] = relabel[node];
      fall_out(m.right, relabel[node], lambda);
    }
  }
  return rows;
}

}  // namespace

ClusterModel hdbscan(const Matrix& points, const ClusteringParams& params) {
  params.validate();
  const std::size_t n = points.rows();
  ClusterModel model;
  model.params = params;
  model.labels.assign(n, kNoise);
  if (n < params.min_cluster_size || n < 2) return model;

  const auto core = core_distances(points, params.min_samples, params.metric);
  const auto mst = mutual_reachability_mst(points, core, params.metric);
  const auto merges = single_linkage(mst, n);
  const auto tree = condense(merges, n, params.min_cluster_size);

  // Cluster ids in the condensed tree run from n (root) to max_id.
  std::size_t max_id = n;
  for (const auto& r : tree) max_id = std::max({max_id, r.parent, r.child_size > 1 ? r.child : n});
  const std::size_t n_nodes = max_id - n + 1;

  std::vector<double> birth(n_nodes, 0.0);
  std::vector<std::size_t> tree_parent(n_nodes, 0);
  std::vector<std::vector<std::size_t>> children(n_nodes);
  for (const auto& r : tree) {
    if (r.child_size > 1) {
      birth[r.child - n] = r.lambda;
      tree_parent[r.child - n] = r.parent;
      children[r.parent - n].push_back(r.child);
    }
  }
  std::vector<double> stability(n_nodes, 0.0);
  for (const auto& r : tree)
    stability[r.parent - n] += (r.lambda - birth[r.parent - n]) * static_cast<double>(r.child_size);

  // Excess of mass, deepest clusters first; the root is not eligible.
  std::vector<char> selected(n_nodes, 0);
  for (std::size_t id = max_id; id > n; --id) {
    const std::size_t c = id - n;
    double subtree = 0.0;
    for (std::size_t ch : children[c]) subtree += stability[ch - n];
    if (subtree > stability[c]) {
      stability[c] = subtree;
    } else {
      selected[c] = 1;
      std::deque<std::size_t> q(children[c].begin(), children[c].end());
      while (!q.empty()) {
        const std::size_t v = q.front();
        q.pop_front();
        selected[v - n] = 0;
        q.insert(q.end(), children[v - n].begin(), children[v - n].end());
      }
    }
  }

  std::vector<int> label_of(n_nodes, kNoise);
  int next = 0;
  for (std::size_t c = 1; c < n_nodes; ++c)
    if (selected[c]) label_of[c] = next++;
  model.n_clusters = next;

  for (const auto& r : tree) {
    if (r.child_size != 1) continue;
    std::size_t c = r.parent;
    while (c != n && !selected[c - n]) c = tree_parent[c - n];
    model.labels[r.child] = c == n ? kNoise : label_of[c - n];
  }
  return model;
}

}  // namespace moralmap
