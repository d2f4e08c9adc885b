#include "cbandit/matching.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cbandit {

namespace {

void check_dims(const ContextVector& a, const ContextVector& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("context dimension mismatch: " +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  }
}

bool neighbor_less(const Neighbor& a, const Neighbor& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.event_id < b.event_id;
}

}  // namespace

double euclidean_distance(const ContextVector& a, const ContextVector& b) {
  check_dims(a, b);
  return (a - b).norm();
}

double cosine_distance(const ContextVector& a, const ContextVector& b) {
  check_dims(a, b);
  double na = a.norm();
  double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 1.0;
  double c = a.dot(b) / (na * nb);
  return 1.0 - std::clamp(c, -1.0, 1.0);
}

double metric_distance(MatchMetric metric, const ContextVector& a,
                       const ContextVector& b) {
  return metric == MatchMetric::euclidean ? euclidean_distance(a, b)
                                          : cosine_distance(a, b);
}

ExactIndex::ExactIndex(const Dataset& dataset, MatchMetric metric)
    : metric_(metric) {
  if (dataset.empty()) {
    throw std::invalid_argument("cannot build an index over an empty dataset");
  }
  ids_.reserve(dataset.size());
  points_.resize(dataset.dimension(), static_cast<Eigen::Index>(dataset.size()));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const LoggedEvent& e = dataset.at(i);
    ids_.push_back(e.event_id);
    points_.col(static_cast<Eigen::Index>(i)) = e.context;
  }
}

std::vector<Neighbor> ExactIndex::query(const ContextVector& query,
                                        std::size_t k,
                                        const AcceptFn& accept) const {
  if (query.size() != points_.rows()) {
    throw std::invalid_argument("query dimension mismatch");
  }
  std::vector<Neighbor> found;
  found.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (accept && !accept(ids_[i])) continue;
    double d = metric_distance(metric_, query,
                               points_.col(static_cast<Eigen::Index>(i)));
    found.push_back({ids_[i], d});
  }
  std::size_t keep = std::min(k, found.size());
  std::partial_sort(found.begin(), found.begin() + static_cast<std::ptrdiff_t>(keep),
                    found.end(), neighbor_less);
  found.resize(keep);
  return found;
}

std::vector<LoggedEvent> query_counterfactual_neighbors(
    const ContextIndex& index, const Dataset& dataset,
    const ContextVector& query, ArmId exclude_arm, std::size_t m_prime,
    std::optional<EventId> exclude_event) {
  if (m_prime < 1) throw std::invalid_argument("m_prime must be >= 1");

  std::size_t eligible = dataset.size() - dataset.arm_count(exclude_arm);
  if (exclude_event) {
    const LoggedEvent* e = dataset.find(*exclude_event);
    if (e != nullptr && e->arm != exclude_arm) --eligible;
  }
  if (eligible == 0) {
    throw EmptyPoolError("no logged event with arm != " +
                         std::to_string(exclude_arm) + " to match against");
  }

  AcceptFn accept = [&dataset, exclude_arm, &exclude_event](EventId id) {
    if (exclude_event && id == *exclude_event) return false;
    const LoggedEvent* e = dataset.find(id);
    return e != nullptr && e->arm != exclude_arm;
  };

  std::vector<Neighbor> found = index.query(query, m_prime, accept);
  std::vector<LoggedEvent> out;
  out.reserve(found.size());
  for (const Neighbor& n : found) {
    const LoggedEvent* e = dataset.find(n.event_id);
    if (e != nullptr) out.push_back(*e);
  }
  return out;
}

}  // namespace cbandit
