#include "facet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace facet {

std::string to_string(NodeType t) {
  switch (t) {
    case NodeType::user: return "user";
    case NodeType::source: return "source";
    default: return "article";
  }
}

std::string to_string(Factuality f) {
  switch (f) {
    case Factuality::high: return "high";
    case Factuality::mixed: return "mixed";
    default: return "low";
  }
}

std::string to_string(PoliticalBias b) {
  switch (b) {
    case PoliticalBias::left: return "left";
    case PoliticalBias::center: return "center";
    default: return "right";
  }
}

NodeType node_type_from_string(const std::string& s) {
  if (s == "user") return NodeType::user;
  if (s == "source") return NodeType::source;
  if (s == "article") return NodeType::article;
  throw ValidationError("unknown node type: " + s);
}

Factuality factuality_from_string(const std::string& s) {
  if (s == "high") return Factuality::high;
  if (s == "mixed") return Factuality::mixed;
  if (s == "low") return Factuality::low;
  throw ValidationError("unknown factuality label: " + s);
}

PoliticalBias bias_from_string(const std::string& s) {
  if (s == "left") return PoliticalBias::left;
  if (s == "center") return PoliticalBias::center;
  if (s == "right") return PoliticalBias::right;
  throw ValidationError("unknown bias label: " + s);
}

void SocialGraph::add_node(GraphNode node) {
  if (node.id.empty()) throw ValidationError("graph node with empty id");
  adjacency_.try_emplace(node.id);
  nodes_[node.id] = std::move(node);
}

namespace {

bool edge_type_allowed(NodeType a, NodeType b) {
  if (a > b) std::swap(a, b);
  return (a == NodeType::user && b == NodeType::user) ||
         (a == NodeType::user && b == NodeType::source) ||
         (a == NodeType::user && b == NodeType::article) ||
         (a == NodeType::source && b == NodeType::article);
}

}  // namespace

void SocialGraph::add_edge(const std::string& a, const std::string& b) {
  auto ita = nodes_.find(a);
  auto itb = nodes_.find(b);
  if (ita == nodes_.end() || itb == nodes_.end())
    throw ValidationError("edge references unknown node: " +
                          (ita == nodes_.end() ? a : b));
  if (a == b) throw ValidationError("self edge on " + a);
  if (!edge_type_allowed(ita->second.type, itb->second.type))
    throw ValidationError("edge type not allowed: " + a + " - " + b);
  if (adjacency_[a].insert(b).second) {
    adjacency_[b].insert(a);
    ++edge_count_;
  }
}

bool SocialGraph::has_edge(const std::string& a, const std::string& b) const {
  auto it = adjacency_.find(a);
  return it != adjacency_.end() && it->second.count(b) > 0;
}

const GraphNode& SocialGraph::node(const std::string& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw ValidationError("unknown node: " + id);
  return it->second;
}

bool SocialGraph::has_node(const std::string& id) const {
  return nodes_.count(id) > 0;
}

const std::set<std::string>& SocialGraph::neighbors(const std::string& id) const {
  auto it = adjacency_.find(id);
  if (it == adjacency_.end()) throw ValidationError("unknown node: " + id);
  return it->second;
}

std::vector<std::string> SocialGraph::node_ids(NodeType type) const {
  std::vector<std::string> out;
  for (const auto& [id, node] : nodes_)
    if (node.type == type) out.push_back(id);
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream in(line);
  std::string field;
  while (std::getline(in, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

SocialGraph SocialGraph::load_csv(const std::filesystem::path& nodes_csv,
                                  const std::filesystem::path& edges_csv) {
  // nodes: id,type,factuality,bias,feat0;feat1;...
  // edges: a,b
  SocialGraph graph;
  std::ifstream nodes(nodes_csv);
  if (!nodes) throw std::runtime_error("cannot open " + nodes_csv.string());
  std::string line;
  std::getline(nodes, line);  // header
  while (std::getline(nodes, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() < 2)
      throw ValidationError("malformed node line: " + line);
    GraphNode node;
    node.id = fields[0];
    node.type = node_type_from_string(fields[1]);
    if (fields.size() > 2 && !fields[2].empty())
      node.factuality = factuality_from_string(fields[2]);
    if (fields.size() > 3 && !fields[3].empty())
      node.bias = bias_from_string(fields[3]);
    if (fields.size() > 4 && !fields[4].empty()) {
      std::stringstream feats(fields[4]);
      std::string value;
      while (std::getline(feats, value, ';'))
        node.features.push_back(std::stod(value));
    }
    graph.add_node(std::move(node));
  }
  std::ifstream edges(edges_csv);
  if (!edges) throw std::runtime_error("cannot open " + edges_csv.string());
  std::getline(edges, line);  // header
  while (std::getline(edges, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() < 2) throw ValidationError("malformed edge line: " + line);
    graph.add_edge(fields[0], fields[1]);
  }
  return graph;
}

EmbeddingMap load_embeddings_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  EmbeddingMap out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    std::vector<double> vec;
    for (std::size_t i = 1; i < fields.size(); ++i)
      vec.push_back(std::stod(fields[i]));
    out[fields[0]] = std::move(vec);
  }
  return out;
}

void save_embeddings_csv(const EmbeddingMap& embeddings,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& [id, vec] : embeddings) {
    out << id;
    for (double v : vec) out << "," << v;
    out << "\n";
  }
}

EmbeddingMap smoothed_feature_embeddings(const SocialGraph& graph, int rounds) {
  EmbeddingMap current;
  for (NodeType t : {NodeType::user, NodeType::source, NodeType::article})
    for (const auto& id : graph.node_ids(t))
      current[id] = graph.node(id).features;

  for (int round = 0; round < rounds; ++round) {
    EmbeddingMap next;
    for (const auto& [id, vec] : current) {
      std::vector<double> acc = vec;
      int n = 1;
      for (const auto& nbr : graph.neighbors(id)) {
        const auto& other = current.at(nbr);
        for (std::size_t i = 0; i < acc.size() && i < other.size(); ++i)
          acc[i] += other[i];
        ++n;
      }
      for (double& v : acc) v /= n;
      next[id] = std::move(acc);
    }
    current = std::move(next);
  }
  return current;
}

namespace {

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sum);
}

}  // namespace

std::vector<std::string> sample_sextet_by_proximity(const SocialGraph& graph,
                                                    const EmbeddingMap& embeddings,
                                                    std::uint64_t seed,
                                                    int neighbor_pool,
                                                    int companions) {
  std::vector<std::string> users;
  for (const auto& id : graph.node_ids(NodeType::user))
    if (embeddings.count(id)) users.push_back(id);
  if (users.size() < static_cast<std::size_t>(neighbor_pool + 1))
    throw std::invalid_argument("need at least " +
                                std::to_string(neighbor_pool + 1) +
                                " users with embeddings");

  std::mt19937_64 rng(seed);
  const std::string anchor = users[rng() % users.size()];
  const auto& anchor_vec = embeddings.at(anchor);

  std::vector<std::pair<double, std::string>> by_distance;
  for (const auto& id : users) {
    if (id == anchor) continue;
    by_distance.emplace_back(euclidean(anchor_vec, embeddings.at(id)), id);
  }
  std::sort(by_distance.begin(), by_distance.end());
  by_distance.resize(neighbor_pool);

  // Uniform sample without replacement from the pool.
  std::vector<std::string> pool;
  for (const auto& [dist, id] : by_distance) pool.push_back(id);
  std::vector<std::string> out = {anchor};
  for (int i = 0; i < companions; ++i) {
    std::size_t j = rng() % pool.size();
    out.push_back(pool[j]);
    pool.erase(pool.begin() + j);
  }
  return out;
}

std::size_t inject_community_edges(
    SocialGraph& graph, const std::vector<std::set<std::string>>& communities) {
  std::size_t added = 0;
  for (const auto& community : communities) {
    std::vector<std::string> members(community.begin(), community.end());
    for (const auto& id : members)
      if (!graph.has_node(id)) throw ValidationError("unknown user id: " + id);
    for (std::size_t i = 0; i < members.size(); ++i)
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        if (graph.has_edge(members[i], members[j])) continue;
        graph.add_edge(members[i], members[j]);
        ++added;
      }
  }
  return added;
}

std::map<std::string, Factuality> propagate_user_labels(const SocialGraph& graph) {
  std::map<std::string, Factuality> labels;
  for (const auto& user_id : graph.node_ids(NodeType::user)) {
    int counts[3] = {0, 0, 0};  // high, mixed, low
    auto tally = [&](const std::string& source_id) {
      const GraphNode& node = graph.node(source_id);
      if (node.type == NodeType::source && node.factuality)
        ++counts[static_cast<int>(*node.factuality)];
    };
    for (const auto& nbr : graph.neighbors(user_id)) {
      const GraphNode& node = graph.node(nbr);
      if (node.type == NodeType::source) {
        tally(nbr);
      } else if (node.type == NodeType::article) {
        for (const auto& via : graph.neighbors(nbr)) tally(via);
      }
    }
    int total = counts[0] + counts[1] + counts[2];
    if (total == 0) continue;
    // Majority; ties toward the worse factuality (low > mixed > high).
    Factuality best = Factuality::low;
    int best_count = counts[2];
    if (counts[1] > best_count) {
      best = Factuality::mixed;
      best_count = counts[1];
    }
    if (counts[0] > best_count) best = Factuality::high;
    labels[user_id] = best;
  }
  return labels;
}

// ---------------------------------------------------------------------------
// K-means

namespace {

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    sum += (a[i] - b[i]) * (a[i] - b[i]);
  return sum;
}

struct KmeansRun {
  std::vector<int> assignment;
  double inertia = std::numeric_limits<double>::infinity();
};

KmeansRun kmeans_once(const std::vector<std::vector<double>>& points, int k,
                      std::mt19937_64& rng) {
  const std::size_t n = points.size();
  const std::size_t dim = points[0].size();

  // k-means++ seeding.
  std::vector<std::vector<double>> centroids;
  centroids.push_back(points[rng() % n]);
  std::vector<double> d2(n);
  while (centroids.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& c : centroids) best = std::min(best, sq_distance(points[i], c));
      d2[i] = best;
      total += best;
    }
    if (total <= 0.0) {
      centroids.push_back(points[rng() % n]);
      continue;
    }
    double u = ((rng() >> 11) * 0x1.0p-53) * total;
    std::size_t chosen = n - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += d2[i];
      if (u < acc) {
        chosen = i;
        break;
      }
    }
    centroids.push_back(points[chosen]);
  }

  KmeansRun run;
  run.assignment.assign(n, -1);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = sq_distance(points[i], centroids[0]);
      for (int c = 1; c < k; ++c) {
        double d = sq_distance(points[i], centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (run.assignment[i] != best) {
        run.assignment[i] = best;
        changed = true;
      }
    }
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<int> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[run.assignment[i]];
      for (std::size_t d = 0; d < dim; ++d)
        sums[run.assignment[i]][d] += points[i][d];
    }
    for (int c = 0; c < k; ++c)
      if (counts[c] > 0)
        for (std::size_t d = 0; d < dim; ++d)
          centroids[c][d] = sums[c][d] / counts[c];
    if (!changed) break;
  }

  run.inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    run.inertia += sq_distance(points[i], centroids[run.assignment[i]]);
  return run;
}

}  // namespace

std::vector<int> kmeans_assign(const std::vector<std::vector<double>>& points,
                               int k, std::uint64_t seed, int restarts) {
  if (points.size() < static_cast<std::size_t>(k))
    throw std::invalid_argument("fewer points than clusters");
  std::mt19937_64 rng(seed);
  KmeansRun best;
  for (int r = 0; r < restarts; ++r) {
    KmeansRun run = kmeans_once(points, k, rng);
    if (run.inertia < best.inertia) best = std::move(run);
  }
  return best.assignment;
}

double cluster_purity(const EmbeddingMap& embeddings,
                      const std::map<std::string, Factuality>& labels, int k,
                      std::uint64_t seed, int restarts) {
  std::vector<std::vector<double>> points;
  std::vector<Factuality> point_labels;
  for (const auto& [id, label] : labels) {
    auto it = embeddings.find(id);
    if (it == embeddings.end()) continue;
    points.push_back(it->second);
    point_labels.push_back(label);
  }
  if (points.size() < static_cast<std::size_t>(k))
    throw std::invalid_argument("fewer labeled users than clusters");

  std::vector<int> assignment = kmeans_assign(points, k, seed, restarts);
  std::vector<std::vector<int>> counts(k, std::vector<int>(3, 0));
  for (std::size_t i = 0; i < points.size(); ++i)
    ++counts[assignment[i]][static_cast<int>(point_labels[i])];
  int matched = 0;
  for (int c = 0; c < k; ++c)
    matched += *std::max_element(counts[c].begin(), counts[c].end());
  return static_cast<double>(matched) / points.size();
}

}  // namespace facet
