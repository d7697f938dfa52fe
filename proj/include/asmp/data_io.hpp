#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "asmp/graph.hpp"

namespace asmp {

struct Splits {
    std::vector<int> train;
    std::vector<int> val;
    std::vector<int> test;
};

/// Node split fractions over labeled nodes. When the fractions sum to one,
/// the test set takes every labeled node left after train/val; otherwise it
/// takes floor(test * L) and the remainder stays unassigned.
struct SplitSpec {
    double train = 0.10;
    double val = 0.10;
    double test = 0.80;
    std::uint64_t seed = 1;
};

struct Dataset {
    Graph graph;
    std::optional<Splits> splits;
    std::vector<int> orig_ids;  // post-LCC id -> id in the stored bundle
};

/// Read a GraphBundle directory (edges.tsv, features.csv, labels.txt,
/// meta.json, optional splits.json). Self-loops are reconstructed; the
/// largest connected component is extracted when meta says lcc=true, with
/// split indices remapped accordingly.
Dataset load_bundle(const std::filesystem::path& dir);

/// Write the bundle for an in-memory graph: canonical ascending edge order,
/// %.17g features. Output bytes depend only on the graph. lcc_on_load is
/// recorded in meta.json; leave it false when the graph should round-trip
/// unchanged (converters for raw citation data set it).
void save_bundle(const Graph& g, const std::filesystem::path& dir, bool lcc_on_load = false);

void save_splits(const Splits& splits, const std::filesystem::path& dir);

/// Deterministic disjoint train/val/test over labeled nodes.
Splits make_splits(const Graph& g, const SplitSpec& spec);

void validate_splits(const Graph& g, const Splits& splits);

/// One-time converter for the classic citation-dataset layout: a .content
/// file (id, feature..., label) and a .cites file (id id), whitespace
/// separated. Edges naming unknown ids are skipped. Labels are mapped to
/// class ids in lexicographic order.
Graph load_citation_files(const std::filesystem::path& content_path,
                          const std::filesystem::path& cites_path);

}  // namespace asmp
