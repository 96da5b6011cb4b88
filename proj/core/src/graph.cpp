#include "netlqr/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "netlqr/errors.hpp"

namespace netlqr {

NetworkGraph::NetworkGraph(int num_agents, const std::vector<std::pair<int, int>>& edges,
                           std::vector<int> state_dims, std::vector<int> input_dims)
    : num_agents_(num_agents),
      state_dims_(std::move(state_dims)),
      input_dims_(std::move(input_dims)) {
  if (num_agents_ <= 0) throw ArgumentError("NetworkGraph: num_agents must be positive");
  if (static_cast<int>(state_dims_.size()) != num_agents_ ||
      static_cast<int>(input_dims_.size()) != num_agents_) {
    throw ArgumentError("NetworkGraph: dimension lists must have one entry per agent");
  }
  for (int i = 0; i < num_agents_; ++i) {
    if (state_dims_[i] <= 0 || input_dims_[i] <= 0) {
      throw ArgumentError("NetworkGraph: per-agent dimensions must be positive");
    }
  }

  state_offsets_.resize(num_agents_);
  input_offsets_.resize(num_agents_);
  for (int i = 0; i < num_agents_; ++i) {
    state_offsets_[i] = total_state_;
    input_offsets_[i] = total_input_;
    total_state_ += state_dims_[i];
    total_input_ += input_dims_[i];
  }

  std::set<std::pair<int, int>> unique_edges;
  adjacency_.assign(num_agents_, {});
  for (auto [a, b] : edges) {
    if (a < 0 || a >= num_agents_ || b < 0 || b >= num_agents_) {
      throw ArgumentError("NetworkGraph: edge endpoint out of range");
    }
    if (a == b) continue;  // irreflexive
    unique_edges.insert({std::min(a, b), std::max(a, b)});
  }
  for (auto [a, b] : unique_edges) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
    edges_.emplace_back(a, b);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());

  // BFS from every source; rejects disconnected graphs.
  dist_.assign(num_agents_, std::vector<int>(num_agents_, -1));
  for (int src = 0; src < num_agents_; ++src) {
    auto& d = dist_[src];
    d[src] = 0;
    std::deque<int> queue{src};
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int w : adjacency_[v]) {
        if (d[w] < 0) {
          d[w] = d[v] + 1;
          queue.push_back(w);
        }
      }
    }
    for (int j = 0; j < num_agents_; ++j) {
      if (d[j] < 0) throw ArgumentError("NetworkGraph: graph is disconnected");
      diameter_ = std::max(diameter_, d[j]);
    }
  }
}

NetworkGraph NetworkGraph::grid(int rows, int cols) {
  return grid(rows, cols, std::vector<int>(static_cast<size_t>(rows) * cols, 1),
              std::vector<int>(static_cast<size_t>(rows) * cols, 1));
}

NetworkGraph NetworkGraph::grid(int rows, int cols, const std::vector<int>& state_dims,
                                const std::vector<int>& input_dims) {
  if (rows <= 0 || cols <= 0) throw ArgumentError("NetworkGraph::grid: shape must be positive");
  std::vector<std::pair<int, int>> edges;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int id = r * cols + c;
      if (c + 1 < cols) edges.emplace_back(id, id + 1);
      if (r + 1 < rows) edges.emplace_back(id, id + cols);
    }
  }
  return NetworkGraph(rows * cols, edges, state_dims, input_dims);
}

NetworkGraph NetworkGraph::from_files(const std::string& edge_path,
                                      const std::string& dims_path) {
  std::ifstream dims_file(dims_path);
  if (!dims_file) throw ArgumentError("NetworkGraph: cannot open dims file " + dims_path);
  std::vector<int> state_dims, input_dims;
  std::string line;
  while (std::getline(dims_file, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    int n, m;
    if (ls >> n >> m) {
      state_dims.push_back(n);
      input_dims.push_back(m);
    }
  }
  std::ifstream edge_file(edge_path);
  if (!edge_file) throw ArgumentError("NetworkGraph: cannot open edge file " + edge_path);
  std::vector<std::pair<int, int>> edges;
  while (std::getline(edge_file, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    int a, b;
    if (ls >> a >> b) edges.emplace_back(a, b);
  }
  return NetworkGraph(static_cast<int>(state_dims.size()), edges, state_dims, input_dims);
}

void NetworkGraph::check_agent(int agent) const {
  if (agent < 0 || agent >= num_agents_) {
    throw ArgumentError("NetworkGraph: agent id " + std::to_string(agent) + " out of range");
  }
}

int NetworkGraph::state_dim(int agent) const {
  check_agent(agent);
  return state_dims_[agent];
}

int NetworkGraph::input_dim(int agent) const {
  check_agent(agent);
  return input_dims_[agent];
}

int NetworkGraph::state_offset(int agent) const {
  check_agent(agent);
  return state_offsets_[agent];
}

int NetworkGraph::input_offset(int agent) const {
  check_agent(agent);
  return input_offsets_[agent];
}

bool NetworkGraph::adjacent(int i, int j) const {
  check_agent(i);
  check_agent(j);
  return std::binary_search(adjacency_[i].begin(), adjacency_[i].end(), j);
}

int NetworkGraph::distance(int i, int j) const {
  check_agent(i);
  check_agent(j);
  return dist_[i][j];
}

int NetworkGraph::eccentricity(int agent) const {
  check_agent(agent);
  return *std::max_element(dist_[agent].begin(), dist_[agent].end());
}

std::vector<int> NetworkGraph::neighborhood(int agent, int kappa) const {
  check_agent(agent);
  if (kappa <= 0) throw ArgumentError("NetworkGraph: kappa must be >= 1");
  std::vector<int> members;
  for (int j = 0; j < num_agents_; ++j) {
    if (dist_[agent][j] < kappa) members.push_back(j);
  }
  return members;  // ascending because j runs in order
}

void NetworkGraph::check_block_dims(const Eigen::MatrixXd& M, Dim row_kind,
                                    Dim col_kind) const {
  if (M.rows() != total(row_kind) || M.cols() != total(col_kind)) {
    throw ArgumentError("NetworkGraph: matrix does not match the agent partition");
  }
}

Eigen::Block<const Eigen::MatrixXd> NetworkGraph::block(const Eigen::MatrixXd& M, int i,
                                                        int j, Dim row_kind,
                                                        Dim col_kind) const {
  check_agent(i);
  check_agent(j);
  check_block_dims(M, row_kind, col_kind);
  return M.block(offset(i, row_kind), offset(j, col_kind), dim(i, row_kind), dim(j, col_kind));
}

Eigen::Block<Eigen::MatrixXd> NetworkGraph::block(Eigen::MatrixXd& M, int i, int j,
                                                  Dim row_kind, Dim col_kind) const {
  check_agent(i);
  check_agent(j);
  check_block_dims(M, row_kind, col_kind);
  return M.block(offset(i, row_kind), offset(j, col_kind), dim(i, row_kind), dim(j, col_kind));
}

Eigen::VectorBlock<const Eigen::VectorXd> NetworkGraph::segment(const Eigen::VectorXd& v,
                                                                int agent, Dim kind) const {
  check_agent(agent);
  if (v.size() != total(kind)) {
    throw ArgumentError("NetworkGraph: vector does not match the agent partition");
  }
  return v.segment(offset(agent, kind), dim(agent, kind));
}

}  // namespace netlqr
