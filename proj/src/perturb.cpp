#include "asmp/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "asmp/errors.hpp"
#include "asmp/rng.hpp"

namespace asmp {

std::vector<Vector> separable_block_means(int n_blocks, int feature_dim, double separation) {
    const int dim = std::max(n_blocks, feature_dim);
    std::vector<Vector> means(n_blocks, Vector::Zero(dim));
    for (int b = 0; b < n_blocks; ++b) means[b][b] = separation;
    return means;
}

Graph generate_sbm(const SbmSpec& spec) {
    const int n_blocks = static_cast<int>(spec.block_sizes.size());
    if (n_blocks == 0) throw ValidationError("generate_sbm: no blocks");
    for (int size : spec.block_sizes)
        if (size <= 0) throw ValidationError("generate_sbm: empty block");
    if (static_cast<int>(spec.block_means.size()) != n_blocks)
        throw ValidationError("generate_sbm: need one mean vector per block");
    if (spec.p_in < 0.0 || spec.p_in > 1.0 || spec.p_out < 0.0 || spec.p_out > 1.0)
        throw ValidationError("generate_sbm: probabilities must lie in [0,1]");
    const int dim = static_cast<int>(spec.block_means[0].size());
    for (const Vector& m : spec.block_means)
        if (m.size() != dim) throw ValidationError("generate_sbm: mean dims differ");

    int n = 0;
    std::vector<int> block_of;
    for (int b = 0; b < n_blocks; ++b) {
        n += spec.block_sizes[b];
        block_of.insert(block_of.end(), spec.block_sizes[b], b);
    }

    Rng rng(spec.seed);
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double p = block_of[i] == block_of[j] ? spec.p_in : spec.p_out;
            if (rng.uniform01() < p) edges.emplace_back(i, j);
        }

    Matrix features(n, dim);
    for (int i = 0; i < n; ++i)
        for (int d = 0; d < dim; ++d)
            features(i, d) = spec.block_means[block_of[i]][d] + spec.noise_scale * rng.normal();

    return build_graph(edges, std::move(features), block_of, /*add_self_loops=*/true, n_blocks);
}

namespace {

using Slot = std::pair<int, int>;  // undirected non-loop pair, first < second

std::vector<Slot> edge_slots(const Graph& g) {
    std::vector<Slot> slots;
    for (int j = 0; j < g.adjacency.outerSize(); ++j)
        for (SpMat::InnerIterator it(g.adjacency, j); it; ++it)
            if (it.row() < it.col())
                slots.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()));
    std::sort(slots.begin(), slots.end());
    return slots;
}

/// Draw `count` distinct slots from `pool` (consumed) via partial shuffle.
std::vector<Slot> draw_slots(std::vector<Slot>& pool, std::size_t count, Rng& rng) {
    std::vector<Slot> picked;
    picked.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
        std::swap(pool[i], pool[j]);
        picked.push_back(pool[i]);
    }
    return picked;
}

Graph rebuild_with_edges(const Graph& g, const std::set<Slot>& edges) {
    std::vector<std::pair<int, int>> list(edges.begin(), edges.end());
    return build_graph(list, g.features, g.labels, /*add_self_loops=*/true, g.n_classes);
}

Graph perturb_global(const Graph& g, const PerturbSpec& spec) {
    std::vector<Slot> present = edge_slots(g);
    const auto n_edges = static_cast<long>(present.size());
    const long n_flips = static_cast<long>(std::ceil(spec.rate * static_cast<double>(n_edges)));
    if (n_flips == 0) return g;

    const long n_add = std::lround(spec.add_remove_mix * static_cast<double>(n_flips));
    const long n_remove = n_flips - n_add;

    std::set<Slot> present_set(present.begin(), present.end());
    std::vector<Slot> absent;
    for (int i = 0; i < g.n_nodes; ++i)
        for (int j = i + 1; j < g.n_nodes; ++j)
            if (!present_set.count({i, j})) absent.emplace_back(i, j);

    if (n_remove > n_edges || n_add > static_cast<long>(absent.size()))
        throw ValidationError("perturb: infeasible rate for this graph");

    Rng rng(spec.seed);
    std::set<Slot> edges = present_set;
    for (const Slot& slot : draw_slots(present, static_cast<std::size_t>(n_remove), rng))
        edges.erase(slot);
    for (const Slot& slot : draw_slots(absent, static_cast<std::size_t>(n_add), rng))
        edges.insert(slot);
    return rebuild_with_edges(g, edges);
}

Graph perturb_targeted(const Graph& g, const PerturbSpec& spec) {
    const long per_node = std::lround(spec.rate);
    if (per_node < 0) throw ValidationError("perturb: negative per-node count");
    if (per_node == 0 || spec.targets.empty()) return g;

    std::vector<Slot> present = edge_slots(g);
    std::set<Slot> edges(present.begin(), present.end());

    Rng rng(spec.seed);
    std::set<Slot> flipped;
    std::vector<int> targets = spec.targets;
    std::sort(targets.begin(), targets.end());

    for (int t : targets) {
        if (t < 0 || t >= g.n_nodes) throw ValidationError("perturb: target id out of range");
        const long n_add = std::lround(spec.add_remove_mix * static_cast<double>(per_node));
        const long n_remove = per_node - n_add;

        std::vector<Slot> can_add, can_remove;
        for (int u = 0; u < g.n_nodes; ++u) {
            if (u == t) continue;
            const Slot slot{std::min(t, u), std::max(t, u)};
            if (flipped.count(slot)) continue;
            const bool was_edge = g.adjacency.coeff(slot.first, slot.second) != 0.0;
            (was_edge ? can_remove : can_add).push_back(slot);
        }
        if (n_add > static_cast<long>(can_add.size()) ||
            n_remove > static_cast<long>(can_remove.size()))
            throw ValidationError("perturb: infeasible per-node count at node " +
                                  std::to_string(t));

        for (const Slot& slot : draw_slots(can_add, static_cast<std::size_t>(n_add), rng)) {
            edges.insert(slot);
            flipped.insert(slot);
        }
        for (const Slot& slot : draw_slots(can_remove, static_cast<std::size_t>(n_remove), rng)) {
            edges.erase(slot);
            flipped.insert(slot);
        }
    }
    return rebuild_with_edges(g, edges);
}

}  // namespace

Graph perturb(const Graph& g, const PerturbSpec& spec) {
    if (spec.rate < 0.0) throw ValidationError("perturb: negative rate");
    if (spec.add_remove_mix < 0.0 || spec.add_remove_mix > 1.0)
        throw ValidationError("perturb: add_remove_mix must lie in [0,1]");
    return spec.kind == PerturbKind::global_random ? perturb_global(g, spec)
                                                   : perturb_targeted(g, spec);
}

std::vector<Graph> nested_targeted_budgets(const Graph& g, const std::vector<int>& targets,
                                           int max_count, double add_remove_mix,
                                           std::uint64_t seed) {
    if (max_count < 0) throw ValidationError("nested_targeted_budgets: negative count");
    if (add_remove_mix < 0.0 || add_remove_mix > 1.0)
        throw ValidationError("nested_targeted_budgets: mix must lie in [0,1]");

    Rng rng(seed);
    std::set<Slot> flipped;
    std::vector<std::vector<Slot>> order(targets.size());
    std::vector<int> sorted = targets;
    std::sort(sorted.begin(), sorted.end());

    for (std::size_t t = 0; t < sorted.size(); ++t) {
        const int node = sorted[t];
        if (node < 0 || node >= g.n_nodes)
            throw ValidationError("nested_targeted_budgets: target id out of range");
        const long n_add = std::lround(add_remove_mix * static_cast<double>(max_count));

        std::vector<Slot> can_add, can_remove;
        for (int u = 0; u < g.n_nodes; ++u) {
            if (u == node) continue;
            const Slot slot{std::min(node, u), std::max(node, u)};
            if (flipped.count(slot)) continue;
            const bool was_edge = g.adjacency.coeff(slot.first, slot.second) != 0.0;
            (was_edge ? can_remove : can_add).push_back(slot);
        }
        if (n_add > static_cast<long>(can_add.size()) ||
            max_count - n_add > static_cast<long>(can_remove.size()))
            throw ValidationError("nested_targeted_budgets: infeasible count at node " +
                                  std::to_string(node));

        const std::vector<Slot> adds = draw_slots(can_add, static_cast<std::size_t>(n_add), rng);
        const std::vector<Slot> removes =
            draw_slots(can_remove, static_cast<std::size_t>(max_count - n_add), rng);
        // interleave so every prefix keeps roughly the requested mix
        std::size_t ai = 0, ri = 0;
        for (int c = 0; c < max_count; ++c) {
            if ((c % 2 == 0 && ai < adds.size()) || ri >= removes.size())
                order[t].push_back(adds[ai++]);
            else
                order[t].push_back(removes[ri++]);
            flipped.insert(order[t].back());
        }
    }

    std::set<Slot> current;
    {
        std::vector<Slot> present = edge_slots(g);
        current.insert(present.begin(), present.end());
    }
    std::vector<Graph> budgets;
    budgets.push_back(g);
    for (int c = 1; c <= max_count; ++c) {
        for (std::size_t t = 0; t < sorted.size(); ++t) {
            const Slot& slot = order[t][c - 1];
            if (current.count(slot)) current.erase(slot);
            else current.insert(slot);
        }
        budgets.push_back(rebuild_with_edges(g, current));
    }
    return budgets;
}

std::vector<int> select_targets(const Graph& g, int degree_threshold,
                                const std::vector<int>& test_split) {
    std::vector<int> sorted = test_split;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> targets;
    for (int node : sorted) {
        if (node < 0 || node >= g.n_nodes)
            throw ValidationError("select_targets: split index out of range");
        int degree = 0;
        for (SpMat::InnerIterator it(g.adjacency, node); it; ++it)
            if (it.row() != node) ++degree;
        if (degree > degree_threshold) targets.push_back(node);
    }
    return targets;
}

}  // namespace asmp
