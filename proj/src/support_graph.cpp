#include "support_graph.hpp"

#include <algorithm>
#include <utility>

namespace gsn::detail {

std::vector<std::vector<Index>> support_graph(const Matrix& k) {
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(k.rows()));
  for (Index i = 0; i < k.rows(); ++i)
    for (Index j = 0; j < k.cols(); ++j)
      if (k(i, j) > 0.0) adj[static_cast<std::size_t>(i)].push_back(j);
  return adj;
}

std::vector<Index> strongly_connected_components(const std::vector<std::vector<Index>>& adj, Index& count) {
  const auto n = static_cast<Index>(adj.size());
  std::vector<Index> index(adj.size(), -1), low(adj.size(), 0), comp(adj.size(), -1);
  std::vector<char> on_stack(adj.size(), 0);
  std::vector<Index> stack;
  std::vector<std::pair<Index, std::size_t>> call;  // (node, next edge)
  Index next_index = 0;
  count = 0;

  for (Index root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] >= 0) continue;
    call.emplace_back(root, 0);
    while (!call.empty()) {
      auto& [v, edge] = call.back();
      const auto vs = static_cast<std::size_t>(v);
      if (edge == 0 && index[vs] < 0) {
        index[vs] = low[vs] = next_index++;
        stack.push_back(v);
        on_stack[vs] = 1;
      }
      if (edge < adj[vs].size()) {
        const Index w = adj[vs][edge++];
        const auto ws = static_cast<std::size_t>(w);
        if (index[ws] < 0) {
          call.emplace_back(w, 0);
        } else if (on_stack[ws]) {
          low[vs] = std::min(low[vs], index[ws]);
        }
        continue;
      }
      if (low[vs] == index[vs]) {
        Index w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[static_cast<std::size_t>(w)] = 0;
          comp[static_cast<std::size_t>(w)] = count;
        } while (w != v);
        ++count;
      }
      const Index finished = v;
      call.pop_back();
      if (!call.empty()) {
        const auto parent = static_cast<std::size_t>(call.back().first);
        low[parent] = std::min(low[parent], low[static_cast<std::size_t>(finished)]);
      }
    }
  }
  return comp;
}

Index closed_class_count(const Matrix& k) {
  const auto adj = support_graph(k);
  Index count = 0;
  const auto comp = strongly_connected_components(adj, count);
  std::vector<char> leaks(static_cast<std::size_t>(count), 0);
  for (std::size_t v = 0; v < adj.size(); ++v)
    for (Index w : adj[v])
      if (comp[v] != comp[static_cast<std::size_t>(w)]) leaks[static_cast<std::size_t>(comp[v])] = 1;
  return static_cast<Index>(std::count(leaks.begin(), leaks.end(), 0));
}

}  // namespace gsn::detail
