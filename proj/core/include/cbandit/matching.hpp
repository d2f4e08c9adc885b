#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "cbandit/types.hpp"

namespace cbandit {

enum class MatchMetric { euclidean, cosine };

/// Euclidean distance between two contexts of equal dimension.
double euclidean_distance(const ContextVector& a, const ContextVector& b);

/// Cosine distance 1 - cos(a, b); zero vectors are treated as maximally
/// distant (distance 1).
double cosine_distance(const ContextVector& a, const ContextVector& b);

double metric_distance(MatchMetric metric, const ContextVector& a,
                       const ContextVector& b);

struct Neighbor {
  EventId event_id = kNoEvent;
  double distance = 0.0;
};

/// Predicate deciding whether an indexed event may appear in query results.
/// Empty target means "accept everything".
using AcceptFn = std::function<bool(EventId)>;

/// Query interface shared by the exact and the graph index. Results come
/// back in nondecreasing distance order with ties broken by ascending
/// event id. A built index is immutable and safe to query concurrently.
class ContextIndex {
 public:
  virtual ~ContextIndex() = default;
  virtual std::vector<Neighbor> query(const ContextVector& query, std::size_t k,
                                      const AcceptFn& accept = {}) const = 0;
  virtual std::size_t size() const = 0;
  virtual MatchMetric metric() const = 0;
};

/// Full-scan k-nearest-neighbor index. Serves as the exact oracle the graph
/// index is measured against.
class ExactIndex final : public ContextIndex {
 public:
  explicit ExactIndex(const Dataset& dataset,
                      MatchMetric metric = MatchMetric::euclidean);

  std::vector<Neighbor> query(const ContextVector& query, std::size_t k,
                              const AcceptFn& accept = {}) const override;
  std::size_t size() const override { return ids_.size(); }
  MatchMetric metric() const override { return metric_; }

 private:
  std::vector<EventId> ids_;
  Eigen::MatrixXd points_;  // one column per entry
  MatchMetric metric_;
};

struct HnswParams {
  int max_degree = 16;       // M; ground layer allows 2M links
  int ef_construction = 200;
  int ef_search = 64;
  std::uint64_t seed = 0;
  MatchMetric metric = MatchMetric::euclidean;
};

/// Layered navigable-small-world graph over the dataset contexts.
/// Construction is sequential and fully deterministic for a fixed seed.
/// Filtering is applied during search: ineligible nodes are traversed but
/// never enter the result set, so eligible neighbors are still reached.
class HnswIndex final : public ContextIndex {
 public:
  HnswIndex(const Dataset& dataset, const HnswParams& params);

  std::vector<Neighbor> query(const ContextVector& query, std::size_t k,
                              const AcceptFn& accept = {}) const override;
  std::vector<Neighbor> query(const ContextVector& query, std::size_t k,
                              int ef_search, const AcceptFn& accept) const;

  std::size_t size() const override { return ids_.size(); }
  MatchMetric metric() const override { return params_.metric; }
  const HnswParams& params() const { return params_; }

  /// Snapshot persistence; versioned binary format with a leading magic
  /// string, parameters, node list and adjacency.
  void save(const std::filesystem::path& path) const;
  static HnswIndex load(const std::filesystem::path& path);

  // Introspection used by tests.
  int node_level(std::size_t i) const { return levels_[i]; }
  const std::vector<std::int32_t>& edges(std::size_t i, int level) const {
    return links_[i][static_cast<std::size_t>(level)];
  }
  std::int32_t entry_point() const { return entry_point_; }

 private:
  HnswIndex() = default;

  double dist(const ContextVector& q, std::int32_t node) const;
  double dist(std::int32_t a, std::int32_t b) const;
  void insert(std::int32_t node, int level);
  // Greedy ef-search at one level starting from an entry candidate set.
  std::vector<std::pair<double, std::int32_t>> search_layer(
      const ContextVector& q, std::vector<std::int32_t> entries, int level,
      std::size_t ef, const AcceptFn& accept) const;
  std::vector<std::int32_t> select_neighbors(
      std::int32_t node, std::vector<std::pair<double, std::int32_t>> candidates,
      std::size_t max_links) const;

  HnswParams params_;
  std::vector<EventId> ids_;
  Eigen::MatrixXd points_;
  std::vector<int> levels_;
  // links_[node][level] = adjacency at that level (level 0 = ground).
  std::vector<std::vector<std::vector<std::int32_t>>> links_;
  std::int32_t entry_point_ = -1;
  int max_level_ = -1;
  double level_mult_ = 0.0;
};

struct EmptyPoolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Nearest logged events whose arm differs from exclude_arm, skipping
/// exclude_event, ascending by distance. Fewer than m_prime come back only
/// when the eligible pool is smaller; an empty pool is an error.
std::vector<LoggedEvent> query_counterfactual_neighbors(
    const ContextIndex& index, const Dataset& dataset,
    const ContextVector& query, ArmId exclude_arm, std::size_t m_prime,
    std::optional<EventId> exclude_event = std::nullopt);

}  // namespace cbandit
