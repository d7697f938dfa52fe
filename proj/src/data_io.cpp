#include "asmp/data_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <json.hpp>

#include "asmp/errors.hpp"
#include "asmp/log.hpp"
#include "asmp/rng.hpp"

namespace fs = std::filesystem;

namespace asmp {

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("missing file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string::size_type pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        pos = end + 1;
    }
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    return lines;
}

long parse_int(const std::string& token, const fs::path& file, std::size_t line_no) {
    std::size_t used = 0;
    long value = 0;
    try {
        value = std::stol(token, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != token.size())
        throw ValidationError(file.string() + ":" + std::to_string(line_no) +
                              ": expected integer, got '" + token + "'");
    return value;
}

double parse_double(const std::string& token, const fs::path& file, std::size_t line_no) {
    char* end = nullptr;
    const double value = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || token.empty())
        throw ValidationError(file.string() + ":" + std::to_string(line_no) +
                              ": expected number, got '" + token + "'");
    return value;
}

std::vector<std::string> split_on(const std::string& line, char sep) {
    std::vector<std::string> tokens;
    std::string::size_type pos = 0;
    while (true) {
        const auto end = line.find(sep, pos);
        if (end == std::string::npos) {
            tokens.push_back(line.substr(pos));
            break;
        }
        tokens.push_back(line.substr(pos, end - pos));
        pos = end + 1;
    }
    return tokens;
}

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<int> json_int_array(const nlohmann::json& j, const char* key, const fs::path& file) {
    if (!j.contains(key) || !j[key].is_array())
        throw ValidationError(file.string() + ": missing array '" + key + "'");
    std::vector<int> out;
    for (const auto& v : j[key]) out.push_back(v.get<int>());
    return out;
}

std::vector<int> remap_indices(const std::vector<int>& indices, const std::vector<int>& new_of_old) {
    std::vector<int> out;
    for (int idx : indices)
        if (idx >= 0 && idx < static_cast<int>(new_of_old.size()) && new_of_old[idx] >= 0)
            out.push_back(new_of_old[idx]);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

Dataset load_bundle(const fs::path& dir) {
    const fs::path meta_path = dir / "meta.json";
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(read_file(meta_path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(meta_path.string() + ": " + e.what());
    }
    if (!meta.contains("n") || !meta.contains("m") || !meta.contains("classes"))
        throw ValidationError(meta_path.string() + ": needs keys n, m, classes");
    const int n = meta["n"].get<int>();
    const int m = meta["m"].get<int>();
    const int classes = meta["classes"].get<int>();
    const bool lcc = meta.value("lcc", true);

    const fs::path edges_path = dir / "edges.tsv";
    std::vector<std::pair<int, int>> edges;
    for (std::size_t li = 0; const std::string& line : split_lines(read_file(edges_path))) {
        ++li;
        if (line.empty()) continue;
        const auto tokens = split_on(line, '\t');
        if (tokens.size() != 2)
            throw ValidationError(edges_path.string() + ":" + std::to_string(li) +
                                  ": expected two tab-separated columns");
        edges.emplace_back(static_cast<int>(parse_int(tokens[0], edges_path, li)),
                           static_cast<int>(parse_int(tokens[1], edges_path, li)));
    }

    const fs::path feat_path = dir / "features.csv";
    const auto feat_lines = split_lines(read_file(feat_path));
    if (static_cast<int>(feat_lines.size()) != n)
        throw ValidationError(feat_path.string() + ": " + std::to_string(feat_lines.size()) +
                              " rows, meta declares n=" + std::to_string(n));
    Matrix features(n, m);
    for (int i = 0; i < n; ++i) {
        const auto tokens = split_on(feat_lines[i], ',');
        if (static_cast<int>(tokens.size()) != m)
            throw ValidationError(feat_path.string() + ":" + std::to_string(i + 1) + ": " +
                                  std::to_string(tokens.size()) +
                                  " columns, meta declares m=" + std::to_string(m));
        for (int d = 0; d < m; ++d)
            features(i, d) = parse_double(tokens[d], feat_path, i + 1);
    }

    const fs::path labels_path = dir / "labels.txt";
    const auto label_lines = split_lines(read_file(labels_path));
    if (static_cast<int>(label_lines.size()) != n)
        throw ValidationError(labels_path.string() + ": " + std::to_string(label_lines.size()) +
                              " lines, meta declares n=" + std::to_string(n));
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i)
        labels[i] = static_cast<int>(parse_int(label_lines[i], labels_path, i + 1));

    Dataset ds;
    ds.graph = build_graph(edges, std::move(features), std::move(labels),
                           /*add_self_loops=*/true, classes);

    std::optional<Splits> splits;
    const fs::path splits_path = dir / "splits.json";
    if (fs::exists(splits_path)) {
        nlohmann::json sj;
        try {
            sj = nlohmann::json::parse(read_file(splits_path));
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(splits_path.string() + ": " + e.what());
        }
        splits = Splits{json_int_array(sj, "train", splits_path),
                        json_int_array(sj, "val", splits_path),
                        json_int_array(sj, "test", splits_path)};
    }

    if (lcc) {
        LccResult lr = largest_connected_component(ds.graph);
        std::vector<int> new_of_old(ds.graph.n_nodes, -1);
        for (std::size_t i = 0; i < lr.orig_ids.size(); ++i)
            new_of_old[lr.orig_ids[i]] = static_cast<int>(i);
        if (splits)
            splits = Splits{remap_indices(splits->train, new_of_old),
                            remap_indices(splits->val, new_of_old),
                            remap_indices(splits->test, new_of_old)};
        ds.graph = std::move(lr.graph);
        ds.orig_ids = std::move(lr.orig_ids);
    } else {
        ds.orig_ids.resize(ds.graph.n_nodes);
        for (int i = 0; i < ds.graph.n_nodes; ++i) ds.orig_ids[i] = i;
    }

    if (splits) {
        validate_splits(ds.graph, *splits);
        ds.splits = std::move(splits);
    }
    return ds;
}

void save_bundle(const Graph& g, const fs::path& dir, bool lcc_on_load) {
    fs::create_directories(dir);

    std::ofstream edges(dir / "edges.tsv", std::ios::binary);
    if (!edges) throw ValidationError("cannot write " + (dir / "edges.tsv").string());
    std::vector<std::pair<int, int>> slots;
    for (int j = 0; j < g.adjacency.outerSize(); ++j)
        for (SpMat::InnerIterator it(g.adjacency, j); it; ++it)
            if (it.row() < it.col())
                slots.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()));
    std::sort(slots.begin(), slots.end());
    for (const auto& [i, j] : slots) edges << i << '\t' << j << '\n';
    edges.close();

    std::ofstream feat(dir / "features.csv", std::ios::binary);
    for (int i = 0; i < g.n_nodes; ++i) {
        for (int d = 0; d < g.n_features; ++d) {
            if (d) feat << ',';
            feat << format_g17(g.features(i, d));
        }
        feat << '\n';
    }
    feat.close();

    std::ofstream labels(dir / "labels.txt", std::ios::binary);
    for (int lbl : g.labels) labels << lbl << '\n';
    labels.close();

    nlohmann::json meta;
    meta["n"] = g.n_nodes;
    meta["m"] = g.n_features;
    meta["classes"] = g.n_classes;
    meta["lcc"] = lcc_on_load;
    std::ofstream meta_out(dir / "meta.json", std::ios::binary);
    meta_out << meta.dump(2) << '\n';
}

void save_splits(const Splits& splits, const fs::path& dir) {
    fs::create_directories(dir);
    nlohmann::json j;
    j["train"] = splits.train;
    j["val"] = splits.val;
    j["test"] = splits.test;
    std::ofstream out(dir / "splits.json", std::ios::binary);
    out << j.dump(2) << '\n';
}

void validate_splits(const Graph& g, const Splits& splits) {
    std::vector<char> seen(g.n_nodes, 0);
    for (const auto* part : {&splits.train, &splits.val, &splits.test})
        for (int idx : *part) {
            if (idx < 0 || idx >= g.n_nodes)
                throw ValidationError("splits: index out of range");
            if (g.labels[idx] == kUnlabeled)
                throw ValidationError("splits: unlabeled node " + std::to_string(idx));
            if (seen[idx]) throw ValidationError("splits: node in two parts");
            seen[idx] = 1;
        }
}

Splits make_splits(const Graph& g, const SplitSpec& spec) {
    if (spec.train <= 0.0 || spec.val <= 0.0 || spec.test <= 0.0)
        throw ValidationError("make_splits: fractions must be positive");
    if (spec.train + spec.val + spec.test > 1.0 + 1e-12)
        throw ValidationError("make_splits: fractions sum above one");

    std::vector<int> labeled;
    for (int i = 0; i < g.n_nodes; ++i)
        if (g.labels[i] != kUnlabeled) labeled.push_back(i);
    const auto l = static_cast<double>(labeled.size());

    const auto n_train = static_cast<std::size_t>(spec.train * l);
    const auto n_val = static_cast<std::size_t>(spec.val * l);
    const bool exhaustive = spec.train + spec.val + spec.test > 1.0 - 1e-12;
    const std::size_t n_test = exhaustive ? labeled.size() - std::min(labeled.size(), n_train + n_val)
                                          : static_cast<std::size_t>(spec.test * l);
    if (n_train == 0 || n_val == 0 || n_test == 0 ||
        n_train + n_val + n_test > labeled.size())
        throw ValidationError("make_splits: fewer labeled nodes than requested");

    Rng rng(spec.seed);
    rng.shuffle(labeled);

    Splits splits;
    splits.train.assign(labeled.begin(), labeled.begin() + n_train);
    splits.val.assign(labeled.begin() + n_train, labeled.begin() + n_train + n_val);
    splits.test.assign(labeled.begin() + n_train + n_val,
                       labeled.begin() + n_train + n_val + n_test);
    std::sort(splits.train.begin(), splits.train.end());
    std::sort(splits.val.begin(), splits.val.end());
    std::sort(splits.test.begin(), splits.test.end());
    return splits;
}

Graph load_citation_files(const fs::path& content_path, const fs::path& cites_path) {
    const auto content_lines = split_lines(read_file(content_path));
    if (content_lines.empty()) throw ValidationError(content_path.string() + ": empty");

    std::map<std::string, int> id_of;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> raw_labels;
    for (std::size_t li = 0; const std::string& line : content_lines) {
        ++li;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::vector<std::string> tokens;
        for (std::string tok; ss >> tok;) tokens.push_back(tok);
        if (tokens.size() < 3)
            throw ValidationError(content_path.string() + ":" + std::to_string(li) +
                                  ": expected id, features, label");
        if (id_of.count(tokens.front()))
            throw ValidationError(content_path.string() + ":" + std::to_string(li) +
                                  ": duplicate id " + tokens.front());
        id_of[tokens.front()] = static_cast<int>(rows.size());
        std::vector<double> feats(tokens.size() - 2);
        for (std::size_t d = 1; d + 1 < tokens.size(); ++d)
            feats[d - 1] = parse_double(tokens[d], content_path, li);
        rows.push_back(std::move(feats));
        raw_labels.push_back(tokens.back());
    }

    const auto dim = rows.front().size();
    for (const auto& r : rows)
        if (r.size() != dim)
            throw ValidationError(content_path.string() + ": ragged feature rows");

    std::map<std::string, int> class_of;
    for (const std::string& lbl : raw_labels) class_of.emplace(lbl, 0);
    int next = 0;
    for (auto& [name, id] : class_of) id = next++;

    const int n = static_cast<int>(rows.size());
    Matrix features(n, static_cast<int>(dim));
    std::vector<int> labels(n);
    for (int i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dim; ++d) features(i, static_cast<int>(d)) = rows[i][d];
        labels[i] = class_of.at(raw_labels[i]);
    }

    std::vector<std::pair<int, int>> edges;
    int skipped = 0;
    for (std::size_t li = 0; const std::string& line : split_lines(read_file(cites_path))) {
        ++li;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!(ss >> a >> b))
            throw ValidationError(cites_path.string() + ":" + std::to_string(li) +
                                  ": expected two ids");
        const auto ia = id_of.find(a);
        const auto ib = id_of.find(b);
        if (ia == id_of.end() || ib == id_of.end()) {
            ++skipped;
            continue;
        }
        if (ia->second != ib->second) edges.emplace_back(ia->second, ib->second);
    }
    if (skipped > 0)
        log::warn("load_citation_files: skipped %d edges naming unknown ids", skipped);

    return build_graph(edges, std::move(features), std::move(labels), /*add_self_loops=*/true,
                       next);
}

}  // namespace asmp
