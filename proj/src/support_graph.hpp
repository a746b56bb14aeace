#pragma once

#include "gsn/core.hpp"

#include <vector>

namespace gsn::detail {

/// Adjacency lists of the support graph (edge i -> j when k(i, j) > 0).
std::vector<std::vector<Index>> support_graph(const Matrix& k);

/// Strongly connected component id per state (Tarjan, iterative).
std::vector<Index> strongly_connected_components(const std::vector<std::vector<Index>>& adj, Index& count);

/// Number of communicating classes with no edge leaving them.
Index closed_class_count(const Matrix& k);

}  // namespace gsn::detail
