#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "facet/types.hpp"

namespace facet {

enum class NodeType { user, source, article };
enum class Factuality { high, mixed, low };
enum class PoliticalBias { left, center, right };

std::string to_string(NodeType t);
std::string to_string(Factuality f);
std::string to_string(PoliticalBias b);
NodeType node_type_from_string(const std::string& s);
Factuality factuality_from_string(const std::string& s);
PoliticalBias bias_from_string(const std::string& s);

struct GraphNode {
  std::string id;
  NodeType type = NodeType::user;
  std::vector<double> features;
  std::optional<Factuality> factuality;  // sources only
  std::optional<PoliticalBias> bias;     // sources only
};

// Undirected typed graph of users, sources, and articles.
class SocialGraph {
 public:
  void add_node(GraphNode node);
  // Allowed edge types: user-user, user-source, source-article, user-article.
  void add_edge(const std::string& a, const std::string& b);
  bool has_edge(const std::string& a, const std::string& b) const;

  const GraphNode& node(const std::string& id) const;
  bool has_node(const std::string& id) const;
  const std::set<std::string>& neighbors(const std::string& id) const;
  std::vector<std::string> node_ids(NodeType type) const;
  std::size_t edge_count() const { return edge_count_; }

  static SocialGraph load_csv(const std::filesystem::path& nodes_csv,
                              const std::filesystem::path& edges_csv);

 private:
  std::map<std::string, GraphNode> nodes_;
  std::map<std::string, std::set<std::string>> adjacency_;
  std::size_t edge_count_ = 0;
};

using EmbeddingMap = std::map<std::string, std::vector<double>>;

EmbeddingMap load_embeddings_csv(const std::filesystem::path& path);
void save_embeddings_csv(const EmbeddingMap& embeddings,
                         const std::filesystem::path& path);

// Deterministic embedding fallback for graphs without trained embeddings:
// each node's feature vector averaged with its neighbors', repeated `rounds`
// times with equal self/neighborhood weight.
EmbeddingMap smoothed_feature_embeddings(const SocialGraph& graph,
                                         int rounds = 2);

// One seeded anchor plus 5 users sampled uniformly from its 20 nearest
// neighbors by Euclidean distance; distance ties break by node id.
std::vector<std::string> sample_sextet_by_proximity(const SocialGraph& graph,
                                                    const EmbeddingMap& embeddings,
                                                    std::uint64_t seed,
                                                    int neighbor_pool = 20,
                                                    int companions = 5);

// Adds the clique over each community; duplicate edges are ignored, so the
// operation is idempotent. Returns the number of edges actually added.
std::size_t inject_community_edges(
    SocialGraph& graph, const std::vector<std::set<std::string>>& communities);

// Majority factuality label over the sources a user reaches directly or
// through one article hop; ties go to the worse label (low > mixed > high).
// Users reaching no labeled source are omitted.
std::map<std::string, Factuality> propagate_user_labels(const SocialGraph& graph);

// K-means (k-means++ init, fixed seed, `restarts` runs keeping best inertia)
// over the labeled users' embeddings; purity = sum of per-cluster majority
// counts over total labeled users.
double cluster_purity(const EmbeddingMap& embeddings,
                      const std::map<std::string, Factuality>& labels, int k = 17,
                      std::uint64_t seed = 0, int restarts = 10);

// Cluster assignment helper exposed for tests.
std::vector<int> kmeans_assign(const std::vector<std::vector<double>>& points,
                               int k, std::uint64_t seed, int restarts = 10);

}  // namespace facet
