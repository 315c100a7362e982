#include "reml/ordering.hpp"

#include <numeric>
#include <set>

namespace reml {

std::vector<int> natural_ordering(int n) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  return perm;
}

std::vector<int> minimum_degree_ordering(const SparseSymmetric& a) {
  const int n = a.n;
  // Adjacency sets over the full symmetric pattern, diagonal excluded.
  std::vector<std::set<int>> adj(n);
  for (int j = 0; j < n; ++j) {
    for (int k = a.col_ptr[j]; k < a.col_ptr[j + 1]; ++k) {
      const int i = a.row_ind[k];
      if (i != j) {
        adj[i].insert(j);
        adj[j].insert(i);
      }
    }
  }

  std::vector<bool> eliminated(n, false);
  std::vector<int> perm;
  perm.reserve(n);
  for (int step = 0; step < n; ++step) {
    int best = -1;
    size_t best_deg = 0;
    for (int v = 0; v < n; ++v) {
      if (eliminated[v]) continue;
      if (best == -1 || adj[v].size() < best_deg) {
        best = v;
        best_deg = adj[v].size();
      }
    }
    perm.push_back(best);
    eliminated[best] = true;
    // Eliminating `best` turns its neighborhood into a clique.
    for (int u : adj[best]) {
      adj[u].erase(best);
      for (int w : adj[best]) {
        if (w != u) adj[u].insert(w);
      }
    }
    adj[best].clear();
  }
  return perm;
}

}  // namespace reml
