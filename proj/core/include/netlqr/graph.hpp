#pragma once

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

namespace netlqr {

/// Which side of the agent partition a matrix dimension ranges over.
enum class Dim { State, Input };

/// Undirected, connected agent graph plus the block bookkeeping for matrices
/// partitioned by per-agent state/input dimensions.
///
/// Graph distance is the shortest-path hop count; all pairwise distances are
/// computed once at construction (BFS per source) and cached. The object is
/// immutable afterwards and safe to share across threads.
class NetworkGraph {
 public:
  /// General constructor. Edges are unordered pairs of 0-based agent ids;
  /// self-loops and duplicates are ignored. Throws ArgumentError if the graph
  /// is disconnected, empty, or any dimension is non-positive.
  NetworkGraph(int num_agents, const std::vector<std::pair<int, int>>& edges,
               std::vector<int> state_dims, std::vector<int> input_dims);

  /// rows x cols 4-neighbor grid, agent id = r*cols + c, one state and one
  /// input per agent.
  static NetworkGraph grid(int rows, int cols);

  /// Same grid with explicit per-agent dimensions.
  static NetworkGraph grid(int rows, int cols, const std::vector<int>& state_dims,
                           const std::vector<int>& input_dims);

  /// Loads a graph from an edge-list file ("i j" per line, 0-based, '#'
  /// comments) and a dimensions file ("n_i m_i" per line, one per agent).
  static NetworkGraph from_files(const std::string& edge_path, const std::string& dims_path);

  int num_agents() const { return num_agents_; }
  int state_dim() const { return total_state_; }
  int input_dim() const { return total_input_; }
  int state_dim(int agent) const;
  int input_dim(int agent) const;
  int state_offset(int agent) const;
  int input_offset(int agent) const;
  int dim(int agent, Dim d) const { return d == Dim::State ? state_dim(agent) : input_dim(agent); }
  int offset(int agent, Dim d) const {
    return d == Dim::State ? state_offset(agent) : input_offset(agent);
  }
  int total(Dim d) const { return d == Dim::State ? total_state_ : total_input_; }

  bool adjacent(int i, int j) const;
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  /// Shortest-path distance; dist(i, i) == 0.
  int distance(int i, int j) const;

  /// Largest pairwise distance.
  int diameter() const { return diameter_; }

  /// Largest distance from `agent` to any other agent.
  int eccentricity(int agent) const;

  /// N_i^kappa = { j : dist(i, j) < kappa }, ascending agent ids. The sorted
  /// order fixes the concatenation order of neighborhood state/input vectors
  /// everywhere downstream. kappa <= 0 throws.
  std::vector<int> neighborhood(int agent, int kappa) const;

  /// Read-only block [M]_{ij} where rows range over `row_kind` of agent i and
  /// columns over `col_kind` of agent j. Dimension mismatches throw.
  Eigen::Block<const Eigen::MatrixXd> block(const Eigen::MatrixXd& M, int i, int j,
                                            Dim row_kind, Dim col_kind) const;

  /// Writable block with the same addressing.
  Eigen::Block<Eigen::MatrixXd> block(Eigen::MatrixXd& M, int i, int j, Dim row_kind,
                                      Dim col_kind) const;

  /// Segment of a stacked vector belonging to `agent`.
  Eigen::VectorBlock<const Eigen::VectorXd> segment(const Eigen::VectorXd& v, int agent,
                                                    Dim kind) const;

 private:
  void check_agent(int agent) const;
  void check_block_dims(const Eigen::MatrixXd& M, Dim row_kind, Dim col_kind) const;

  int num_agents_ = 0;
  int total_state_ = 0;
  int total_input_ = 0;
  int diameter_ = 0;
  std::vector<int> state_dims_, input_dims_;
  std::vector<int> state_offsets_, input_offsets_;
  std::vector<std::vector<int>> adjacency_;       // sorted neighbor lists
  std::vector<std::vector<int>> dist_;            // cached N x N distances
  std::vector<std::pair<int, int>> edges_;        // deduplicated, i < j
};

}  // namespace netlqr
