#ifndef REML_ORDERING_HPP
#define REML_ORDERING_HPP

#include <vector>

#include "reml/sparse.hpp"

namespace reml {

/// Fill-reducing ordering by greedy minimum degree on the elimination graph.
/// Ties break toward the smallest index so the result is deterministic.
/// Returns perm where perm[k] is the original index eliminated at step k.
std::vector<int> minimum_degree_ordering(const SparseSymmetric& a);

/// Identity ordering, for tests and for callers that bring their own.
std::vector<int> natural_ordering(int n);

}  // namespace reml

#endif  // REML_ORDERING_HPP
