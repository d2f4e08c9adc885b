#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <queue>
#include <random>
#include <stdexcept>

#include "cbandit/matching.hpp"
#include "cbandit/rng.hpp"

namespace cbandit {

namespace {

// Heap keys carry the node id so that equal distances order deterministically.
using DistNode = std::pair<double, std::int32_t>;

struct MinFirst {
  bool operator()(const DistNode& a, const DistNode& b) const { return a > b; }
};
struct MaxFirst {
  bool operator()(const DistNode& a, const DistNode& b) const { return a < b; }
};

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
}

constexpr char kMagic[8] = {'C', 'B', 'H', 'N', 'S', 'W', 'I', 'X'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

HnswIndex::HnswIndex(const Dataset& dataset, const HnswParams& params)
    : params_(params) {
  if (dataset.empty()) {
    throw std::invalid_argument("cannot build an index over an empty dataset");
  }
  if (params.max_degree < 2) {
    throw std::invalid_argument("max_degree must be >= 2");
  }
  if (params.ef_construction < params.max_degree) {
    throw std::invalid_argument("ef_construction must be >= max_degree");
  }

  const auto n = static_cast<std::int32_t>(dataset.size());
  ids_.reserve(dataset.size());
  points_.resize(dataset.dimension(), n);
  for (std::int32_t i = 0; i < n; ++i) {
    const LoggedEvent& e = dataset.at(static_cast<std::size_t>(i));
    ids_.push_back(e.event_id);
    points_.col(i) = e.context;
  }

  levels_.resize(dataset.size());
  links_.resize(dataset.size());
  level_mult_ = 1.0 / std::log(static_cast<double>(params_.max_degree));

  std::mt19937_64 rng = make_rng(params_.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::int32_t i = 0; i < n; ++i) {
    double u = unit(rng);
    if (u <= 0.0) u = std::numeric_limits<double>::min();
    int level = static_cast<int>(-std::log(u) * level_mult_);
    levels_[static_cast<std::size_t>(i)] = level;
    links_[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(level) + 1);
    insert(i, level);
  }
}

double HnswIndex::dist(const ContextVector& q, std::int32_t node) const {
  // Euclidean comparisons run on squared norms; the monotone map keeps the
  // ordering (including ties) identical to the exact index.
  if (params_.metric == MatchMetric::euclidean) {
    return (points_.col(node) - q).squaredNorm();
  }
  return cosine_distance(q, points_.col(node));
}

double HnswIndex::dist(std::int32_t a, std::int32_t b) const {
  if (params_.metric == MatchMetric::euclidean) {
    return (points_.col(a) - points_.col(b)).squaredNorm();
  }
  return cosine_distance(points_.col(a), points_.col(b));
}

std::vector<std::pair<double, std::int32_t>> HnswIndex::search_layer(
    const ContextVector& q, std::vector<std::int32_t> entries, int level,
    std::size_t ef, const AcceptFn& accept) const {
  std::priority_queue<DistNode, std::vector<DistNode>, MinFirst> candidates;
  std::priority_queue<DistNode, std::vector<DistNode>, MaxFirst> results;
  std::vector<char> visited(ids_.size(), 0);

  auto eligible = [&](std::int32_t node) {
    return !accept || accept(ids_[static_cast<std::size_t>(node)]);
  };

  for (std::int32_t ep : entries) {
    if (visited[static_cast<std::size_t>(ep)]) continue;
    visited[static_cast<std::size_t>(ep)] = 1;
    double d = dist(q, ep);
    candidates.emplace(d, ep);
    if (eligible(ep)) results.emplace(d, ep);
  }

  while (!candidates.empty()) {
    DistNode cur = candidates.top();
    double bound = results.size() >= ef
                       ? results.top().first
                       : std::numeric_limits<double>::infinity();
    if (cur.first > bound) break;
    candidates.pop();

    const auto& nbrs =
        links_[static_cast<std::size_t>(cur.second)][static_cast<std::size_t>(level)];
    for (std::int32_t nb : nbrs) {
      if (visited[static_cast<std::size_t>(nb)]) continue;
      visited[static_cast<std::size_t>(nb)] = 1;
      double d = dist(q, nb);
      double worst = results.size() >= ef
                         ? results.top().first
                         : std::numeric_limits<double>::infinity();
      if (d < worst || results.size() < ef) {
        candidates.emplace(d, nb);
        if (eligible(nb)) {
          results.emplace(d, nb);
          if (results.size() > ef) results.pop();
        }
      }
    }
  }

  std::vector<DistNode> out;
  out.reserve(results.size());
  while (!results.empty()) {
    out.push_back(results.top());
    results.pop();
  }
  std::reverse(out.begin(), out.end());  // ascending (distance, id)
  return out;
}

std::vector<std::int32_t> HnswIndex::select_neighbors(
    std::int32_t node, std::vector<std::pair<double, std::int32_t>> candidates,
    std::size_t max_links) const {
  std::sort(candidates.begin(), candidates.end());
  std::vector<std::int32_t> selected;
  std::vector<DistNode> pruned;
  selected.reserve(max_links);
  for (const DistNode& c : candidates) {
    if (selected.size() >= max_links) break;
    if (c.second == node) continue;
    bool keep = true;
    for (std::int32_t s : selected) {
      if (dist(c.second, s) < c.first) {
        keep = false;
        break;
      }
    }
    if (keep) {
      selected.push_back(c.second);
    } else {
      pruned.push_back(c);
    }
  }
  // Keep pruned connections to stay connected on small or clustered data.
  for (const DistNode& c : pruned) {
    if (selected.size() >= max_links) break;
    selected.push_back(c.second);
  }
  return selected;
}

void HnswIndex::insert(std::int32_t node, int level) {
  if (entry_point_ < 0) {
    entry_point_ = node;
    max_level_ = level;
    return;
  }

  const ContextVector q = points_.col(node);
  std::int32_t cur = entry_point_;
  double cur_dist = dist(q, cur);

  for (int lc = max_level_; lc > level; --lc) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::int32_t nb :
           links_[static_cast<std::size_t>(cur)][static_cast<std::size_t>(lc)]) {
        double d = dist(q, nb);
        if (d < cur_dist || (d == cur_dist && nb < cur)) {
          cur_dist = d;
          cur = nb;
          changed = true;
        }
      }
    }
  }

  std::vector<std::int32_t> entries{cur};
  for (int lc = std::min(level, max_level_); lc >= 0; --lc) {
    auto found = search_layer(q, entries, lc,
                              static_cast<std::size_t>(params_.ef_construction),
                              AcceptFn{});
    std::size_t cap = lc == 0 ? static_cast<std::size_t>(2 * params_.max_degree)
                              : static_cast<std::size_t>(params_.max_degree);
    auto selected = select_neighbors(node, found, static_cast<std::size_t>(params_.max_degree));

    auto& own = links_[static_cast<std::size_t>(node)][static_cast<std::size_t>(lc)];
    own = selected;

    for (std::int32_t nb : selected) {
      auto& back = links_[static_cast<std::size_t>(nb)][static_cast<std::size_t>(lc)];
      back.push_back(node);
      if (back.size() > cap) {
        std::vector<DistNode> cand;
        cand.reserve(back.size());
        for (std::int32_t b : back) cand.emplace_back(dist(nb, b), b);
        back = select_neighbors(nb, std::move(cand), cap);
      }
    }

    entries.clear();
    entries.reserve(found.size());
    for (const DistNode& f : found) entries.push_back(f.second);
    if (entries.empty()) entries.push_back(cur);
  }

  if (level > max_level_) {
    max_level_ = level;
    entry_point_ = node;
  }
}

std::vector<Neighbor> HnswIndex::query(const ContextVector& query, std::size_t k,
                                       const AcceptFn& accept) const {
  return this->query(query, k, params_.ef_search, accept);
}

std::vector<Neighbor> HnswIndex::query(const ContextVector& query, std::size_t k,
                                       int ef_search,
                                       const AcceptFn& accept) const {
  if (query.size() != points_.rows()) {
    throw std::invalid_argument("query dimension mismatch");
  }
  std::int32_t cur = entry_point_;
  double cur_dist = dist(query, cur);
  for (int lc = max_level_; lc > 0; --lc) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::int32_t nb :
           links_[static_cast<std::size_t>(cur)][static_cast<std::size_t>(lc)]) {
        double d = dist(query, nb);
        if (d < cur_dist || (d == cur_dist && nb < cur)) {
          cur_dist = d;
          cur = nb;
          changed = true;
        }
      }
    }
  }

  std::size_t ef = std::max<std::size_t>(static_cast<std::size_t>(ef_search), k);
  auto found = search_layer(query, {cur}, 0, ef, accept);

  std::vector<Neighbor> out;
  out.reserve(std::min(k, found.size()));
  for (std::size_t i = 0; i < found.size() && i < k; ++i) {
    double d = found[i].first;
    if (params_.metric == MatchMetric::euclidean) d = std::sqrt(d);
    out.push_back({ids_[static_cast<std::size_t>(found[i].second)], d});
  }
  return out;
}

void HnswIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint8_t>(params_.metric));
  write_pod(out, params_.max_degree);
  write_pod(out, params_.ef_construction);
  write_pod(out, params_.ef_search);
  write_pod(out, params_.seed);
  write_pod(out, static_cast<std::uint64_t>(ids_.size()));
  write_pod(out, static_cast<std::uint64_t>(points_.rows()));
  write_pod(out, entry_point_);
  write_pod(out, max_level_);
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    write_pod(out, ids_[i]);
    write_pod(out, levels_[i]);
    for (const auto& lvl : links_[i]) {
      write_pod(out, static_cast<std::uint32_t>(lvl.size()));
      out.write(reinterpret_cast<const char*>(lvl.data()),
                static_cast<std::streamsize>(lvl.size() * sizeof(std::int32_t)));
    }
  }
  out.write(reinterpret_cast<const char*>(points_.data()),
            static_cast<std::streamsize>(sizeof(double) *
                                         static_cast<std::size_t>(points_.size())));
}

HnswIndex HnswIndex::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not an index snapshot: " + path.string());
  }
  std::uint32_t version = 0;
  read_pod(in, version);
  if (version != kVersion) {
    throw std::runtime_error("unsupported index snapshot version " +
                             std::to_string(version));
  }
  HnswIndex idx;
  std::uint8_t metric = 0;
  read_pod(in, metric);
  idx.params_.metric = static_cast<MatchMetric>(metric);
  read_pod(in, idx.params_.max_degree);
  read_pod(in, idx.params_.ef_construction);
  read_pod(in, idx.params_.ef_search);
  read_pod(in, idx.params_.seed);
  std::uint64_t n = 0, d = 0;
  read_pod(in, n);
  read_pod(in, d);
  read_pod(in, idx.entry_point_);
  read_pod(in, idx.max_level_);
  idx.level_mult_ = 1.0 / std::log(static_cast<double>(idx.params_.max_degree));
  idx.ids_.resize(n);
  idx.levels_.resize(n);
  idx.links_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    read_pod(in, idx.ids_[i]);
    read_pod(in, idx.levels_[i]);
    idx.links_[i].resize(static_cast<std::size_t>(idx.levels_[i]) + 1);
    for (auto& lvl : idx.links_[i]) {
      std::uint32_t m = 0;
      read_pod(in, m);
      lvl.resize(m);
      in.read(reinterpret_cast<char*>(lvl.data()),
              static_cast<std::streamsize>(m * sizeof(std::int32_t)));
    }
  }
  idx.points_.resize(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
  in.read(reinterpret_cast<char*>(idx.points_.data()),
          static_cast<std::streamsize>(sizeof(double) * d * n));
  if (!in) throw std::runtime_error("truncated index snapshot: " + path.string());
  return idx;
}

}  // namespace cbandit
