#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <utility>
#include <vector>

namespace asmp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

/// Sentinel class id for nodes without a label.
inline constexpr int kUnlabeled = -1;

/// Default floor applied to degrees before inversion. Keeps the iteration
/// well-defined if the prox drives a row of S toward zero.
inline constexpr double kDegreeFloor = 1e-8;

enum class NormMode { rw, sym };

/// Immutable input graph: symmetric 0/1 adjacency (self-loops on the
/// diagonal), dense node features, one class id per node.
struct Graph {
    int n_nodes = 0;
    int n_features = 0;
    int n_classes = 0;
    SpMat adjacency;           // N x N, entries exactly 0 or 1
    Matrix features;           // N x M
    std::vector<int> labels;   // length N, kUnlabeled where missing

    /// Count of undirected non-loop edges.
    int n_edges() const;
    bool has_self_loops() const;
};

/// Dense learnable adjacency S constrained to the box [0,1]^{N x N}.
struct StructureMatrix {
    Matrix values;

    int n() const { return static_cast<int>(values.rows()); }
    bool in_box(double tol = 0.0) const;
};

/// Row sums of a structure/adjacency matrix plus the floor used when
/// inverting. effective(i) is what every D^{-1} in the pipeline divides by.
struct DegreeView {
    Vector degrees;
    double floor = kDegreeFloor;

    double effective(int i) const { return std::max(degrees[i], floor); }
    double min_effective() const;
    int n_floored() const;  // rows whose raw degree fell below the floor
};

DegreeView degree_view(const Matrix& m, double floor = kDegreeFloor);
DegreeView degree_view(const SpMat& m, double floor = kDegreeFloor);

/// Build a Graph from an undirected edge list. Duplicate and reversed edge
/// entries are merged; self-loops are added to every node when requested
/// (the default, and what the rest of the pipeline assumes). n_classes = 0
/// derives the class count from the labels.
Graph build_graph(const std::vector<std::pair<int, int>>& edges, Matrix features,
                  std::vector<int> labels, bool add_self_loops = true, int n_classes = 0);

/// Throws ValidationError if any Graph invariant is violated.
void validate_graph(const Graph& g);

struct LccResult {
    Graph graph;
    std::vector<int> orig_ids;  // new id -> original id, ascending
};

/// Induced subgraph on the largest connected component (self-loops do not
/// connect anything). Ties go to the component with the smallest node id.
LccResult largest_connected_component(const Graph& g);

/// D^{-1} S (rw) or D^{-1/2} S D^{-1/2} (sym), degrees floored before
/// inversion. A zero row stays (almost) zero rather than blowing up.
Matrix normalize(const Matrix& m, NormMode mode, double floor = kDegreeFloor);
SpMat normalize(const SpMat& m, NormMode mode, double floor = kDegreeFloor);

/// I minus the corresponding normalized matrix, computed through normalize()
/// so the two share one floating-point path.
Matrix laplacian(const Matrix& m, NormMode mode, double floor = kDegreeFloor);
Matrix laplacian(const SpMat& m, NormMode mode, double floor = kDegreeFloor);

/// Symmetrized normalized propagator 0.5 (P + P'). The quadratic smoothing
/// term only sees the symmetric part of the propagator, so this is the
/// operator its exact H-gradient involves; it equals normalize() whenever
/// that is already symmetric.
Matrix sym_propagator(const Matrix& m, NormMode mode, double floor = kDegreeFloor);

}  // namespace asmp
