#include "asmp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

#include "asmp/errors.hpp"

namespace asmp {

int Graph::n_edges() const {
    int count = 0;
    for (int j = 0; j < adjacency.outerSize(); ++j)
        for (SpMat::InnerIterator it(adjacency, j); it; ++it)
            if (it.row() < it.col()) ++count;
    return count;
}

bool Graph::has_self_loops() const {
    for (int i = 0; i < n_nodes; ++i)
        if (adjacency.coeff(i, i) != 1.0) return false;
    return true;
}

bool StructureMatrix::in_box(double tol) const {
    return (values.array() >= -tol).all() && (values.array() <= 1.0 + tol).all();
}

double DegreeView::min_effective() const {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < degrees.size(); ++i) m = std::min(m, effective(i));
    return m;
}

int DegreeView::n_floored() const {
    int count = 0;
    for (int i = 0; i < degrees.size(); ++i)
        if (degrees[i] < floor) ++count;
    return count;
}

DegreeView degree_view(const Matrix& m, double floor) {
    DegreeView view;
    view.degrees = m.rowwise().sum();
    view.floor = floor;
    return view;
}

DegreeView degree_view(const SpMat& m, double floor) {
    DegreeView view;
    view.degrees = Vector::Zero(m.rows());
    for (int j = 0; j < m.outerSize(); ++j)
        for (SpMat::InnerIterator it(m, j); it; ++it) view.degrees[it.row()] += it.value();
    view.floor = floor;
    return view;
}

Graph build_graph(const std::vector<std::pair<int, int>>& edges, Matrix features,
                  std::vector<int> labels, bool add_self_loops, int n_classes) {
    const int n = static_cast<int>(features.rows());
    if (n <= 0) throw ValidationError("build_graph: empty feature matrix");
    if (static_cast<int>(labels.size()) != n)
        throw ValidationError("build_graph: labels size " + std::to_string(labels.size()) +
                              " != node count " + std::to_string(n));

    int max_label = -1;
    for (int lbl : labels) {
        if (lbl < kUnlabeled) throw ValidationError("build_graph: label below unlabeled sentinel");
        max_label = std::max(max_label, lbl);
    }
    if (n_classes == 0) n_classes = std::max(max_label + 1, 1);
    if (max_label >= n_classes)
        throw ValidationError("build_graph: label id " + std::to_string(max_label) +
                              " >= n_classes " + std::to_string(n_classes));

    std::set<std::pair<int, int>> slots;
    for (const auto& [i, j] : edges) {
        if (i < 0 || i >= n || j < 0 || j >= n)
            throw ValidationError("build_graph: edge index out of range [0," + std::to_string(n) +
                                  "): (" + std::to_string(i) + "," + std::to_string(j) + ")");
        slots.emplace(i, j);
        slots.emplace(j, i);
    }
    if (add_self_loops)
        for (int i = 0; i < n; ++i) slots.emplace(i, i);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(slots.size());
    for (const auto& [i, j] : slots) triplets.emplace_back(i, j, 1.0);

    Graph g;
    g.n_nodes = n;
    g.n_features = static_cast<int>(features.cols());
    g.n_classes = n_classes;
    g.adjacency = SpMat(n, n);
    g.adjacency.setFromTriplets(triplets.begin(), triplets.end());
    g.adjacency.makeCompressed();
    g.features = std::move(features);
    g.labels = std::move(labels);
    return g;
}

void validate_graph(const Graph& g) {
    if (g.n_nodes <= 0) throw ValidationError("graph: no nodes");
    if (g.adjacency.rows() != g.n_nodes || g.adjacency.cols() != g.n_nodes)
        throw ValidationError("graph: adjacency shape mismatch");
    if (g.features.rows() != g.n_nodes || g.features.cols() != g.n_features)
        throw ValidationError("graph: feature shape mismatch");
    if (static_cast<int>(g.labels.size()) != g.n_nodes)
        throw ValidationError("graph: label count mismatch");
    for (int lbl : g.labels)
        if (lbl != kUnlabeled && (lbl < 0 || lbl >= g.n_classes))
            throw ValidationError("graph: label id out of range");
    for (int j = 0; j < g.adjacency.outerSize(); ++j)
        for (SpMat::InnerIterator it(g.adjacency, j); it; ++it) {
            if (it.value() != 0.0 && it.value() != 1.0)
                throw ValidationError("graph: adjacency entry not 0/1");
            if (g.adjacency.coeff(it.col(), it.row()) != it.value())
                throw ValidationError("graph: adjacency not symmetric");
        }
}

LccResult largest_connected_component(const Graph& g) {
    const int n = g.n_nodes;
    std::vector<int> component(n, -1);
    int n_components = 0;
    std::vector<int> comp_size;

    for (int start = 0; start < n; ++start) {
        if (component[start] >= 0) continue;
        const int c = n_components++;
        comp_size.push_back(0);
        std::deque<int> queue{start};
        component[start] = c;
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            ++comp_size[c];
            for (SpMat::InnerIterator it(g.adjacency, u); it; ++it) {
                const int v = static_cast<int>(it.row());
                if (v != u && component[v] < 0) {
                    component[v] = c;
                    queue.push_back(v);
                }
            }
        }
    }

    int best = 0;
    for (int c = 1; c < n_components; ++c)
        if (comp_size[c] > comp_size[best]) best = c;

    LccResult result;
    std::vector<int> new_id(n, -1);
    for (int i = 0; i < n; ++i)
        if (component[i] == best) {
            new_id[i] = static_cast<int>(result.orig_ids.size());
            result.orig_ids.push_back(i);
        }

    const int m = static_cast<int>(result.orig_ids.size());
    Matrix features(m, g.n_features);
    std::vector<int> labels(m);
    for (int i = 0; i < m; ++i) {
        features.row(i) = g.features.row(result.orig_ids[i]);
        labels[i] = g.labels[result.orig_ids[i]];
    }

    std::vector<Eigen::Triplet<double>> triplets;
    for (int j = 0; j < g.adjacency.outerSize(); ++j)
        for (SpMat::InnerIterator it(g.adjacency, j); it; ++it) {
            const int r = new_id[static_cast<int>(it.row())];
            const int c = new_id[static_cast<int>(it.col())];
            if (r >= 0 && c >= 0) triplets.emplace_back(r, c, it.value());
        }

    result.graph.n_nodes = m;
    result.graph.n_features = g.n_features;
    result.graph.n_classes = g.n_classes;
    result.graph.adjacency = SpMat(m, m);
    result.graph.adjacency.setFromTriplets(triplets.begin(), triplets.end());
    result.graph.adjacency.makeCompressed();
    result.graph.features = std::move(features);
    result.graph.labels = std::move(labels);
    return result;
}

Matrix normalize(const Matrix& m, NormMode mode, double floor) {
    const DegreeView deg = degree_view(m, floor);
    const int n = static_cast<int>(m.rows());
    Matrix out(n, static_cast<int>(m.cols()));
    if (mode == NormMode::rw) {
        for (int i = 0; i < n; ++i) out.row(i) = m.row(i) / deg.effective(i);
    } else {
        Vector inv_sqrt(n);
        for (int i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(deg.effective(i));
        out = inv_sqrt.asDiagonal() * m * inv_sqrt.asDiagonal();
    }
    return out;
}

SpMat normalize(const SpMat& m, NormMode mode, double floor) {
    const DegreeView deg = degree_view(m, floor);
    SpMat out = m;
    if (mode == NormMode::rw) {
        for (int j = 0; j < out.outerSize(); ++j)
            for (SpMat::InnerIterator it(out, j); it; ++it)
                it.valueRef() /= deg.effective(static_cast<int>(it.row()));
    } else {
        for (int j = 0; j < out.outerSize(); ++j)
            for (SpMat::InnerIterator it(out, j); it; ++it)
                it.valueRef() /= std::sqrt(deg.effective(static_cast<int>(it.row()))) *
                                 std::sqrt(deg.effective(static_cast<int>(it.col())));
    }
    return out;
}

Matrix laplacian(const Matrix& m, NormMode mode, double floor) {
    Matrix lap = -normalize(m, mode, floor);
    lap.diagonal().array() += 1.0;
    return lap;
}

Matrix laplacian(const SpMat& m, NormMode mode, double floor) {
    Matrix lap = -Matrix(normalize(m, mode, floor));
    lap.diagonal().array() += 1.0;
    return lap;
}

Matrix sym_propagator(const Matrix& m, NormMode mode, double floor) {
    const Matrix p = normalize(m, mode, floor);
    return 0.5 * (p + p.transpose());
}

}  // namespace asmp
