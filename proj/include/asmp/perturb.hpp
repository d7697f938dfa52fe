#pragma once

#include <cstdint>
#include <vector>

#include "asmp/graph.hpp"

namespace asmp {

/// Stochastic block model instance spec. Labels are block ids; features are
/// the node's block mean plus isotropic Gaussian noise.
struct SbmSpec {
    std::vector<int> block_sizes;
    double p_in = 0.1;
    double p_out = 0.01;
    std::vector<Vector> block_means;  // one mean vector per block, equal dims
    double noise_scale = 0.5;
    std::uint64_t seed = 1;
};

/// Convenience: one-hot block means scaled by `separation` in dimension
/// max(n_blocks, feature_dim).
std::vector<Vector> separable_block_means(int n_blocks, int feature_dim, double separation);

Graph generate_sbm(const SbmSpec& spec);

enum class PerturbKind { global_random, targeted_random };

struct PerturbSpec {
    PerturbKind kind = PerturbKind::global_random;
    /// global: fraction of (non-loop, undirected) edges changed;
    /// targeted: integer flip count applied per target node.
    double rate = 0.0;
    double add_remove_mix = 0.5;  // fraction of flips that are additions
    std::uint64_t seed = 1;
    std::vector<int> targets;  // targeted mode only
};

/// Randomly flips edge slots, standing in for structure attacks. Symmetry,
/// self-loops, features, labels, and node count are preserved; the symmetric
/// difference from the input edge set has exactly the prescribed size.
Graph perturb(const Graph& g, const PerturbSpec& spec);

/// Test-split nodes whose non-self-loop degree exceeds the threshold,
/// ascending id order.
std::vector<int> select_targets(const Graph& g, int degree_threshold,
                                const std::vector<int>& test_split);

/// Incremental targeted budgets: one flip order per target drawn up front,
/// graph c applying the first c flips of every target. Element 0 is the
/// input graph; budgets are nested the way greedy targeted attacks grow.
std::vector<Graph> nested_targeted_budgets(const Graph& g, const std::vector<int>& targets,
                                           int max_count, double add_remove_mix,
                                           std::uint64_t seed);

}  // namespace asmp
