#include "ddms/order.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace ddms {

namespace {

struct Item {
  double value;
  Index id;

  bool operator<(const Item& o) const { return value < o.value || (value == o.value && id < o.id); }
};

void reject_nan(std::span<const double> scalars) {
  for (double v : scalars)
    if (std::isnan(v)) throw std::invalid_argument("scalar field contains NaN");
}

Message order_message(int src, int dst) {
  Message m;
  m.kind = MessageKind::OrderExchange;
  m.src = src;
  m.dst = dst;
  return m;
}

}  // namespace

GlobalOrder order_sequential(std::span<const double> scalars) {
  reject_nan(scalars);
  std::vector<Index> ids(scalars.size());
  std::iota(ids.begin(), ids.end(), Index{0});
  std::sort(ids.begin(), ids.end(), [&](Index a, Index b) {
    return scalars[a] < scalars[b] || (scalars[a] == scalars[b] && a < b);
  });
  GlobalOrder order(scalars.size());
  for (std::size_t r = 0; r < ids.size(); ++r) order[ids[r]] = static_cast<Index>(r);
  return order;
}

GlobalOrder order_distributed(int rank, const Partition& partition, std::span<const double> local_scalars,
                              Transport& transport) {
  const int ranks = transport.ranks();
  const GhostedBlock& block = partition.block(rank);
  const Grid& local = block.local();
  const Grid& global = partition.grid();
  if (static_cast<Index>(local_scalars.size()) != local.simplex_count(0))
    throw std::invalid_argument("local scalar array does not match the ghosted block");

  bool has_nan = std::any_of(local_scalars.begin(), local_scalars.end(), [](double v) { return std::isnan(v); });
  if (transport.allreduce_sum(rank, has_nan ? 1 : 0) > 0) throw std::invalid_argument("scalar field contains NaN");

  std::vector<Item> items;
  for (Index v = 0; v < local.simplex_count(0); ++v)
    if (block.owns_local_vertex(v))
      items.push_back({local_scalars[v], global.vertex_index(block.to_global(local.vertex_coords(v)))});
  std::sort(items.begin(), items.end());

  // Regular samples, shared with every rank.
  std::vector<Message> out;
  {
    Message m = order_message(rank, 0);
    for (int i = 1; i < ranks; ++i) {
      if (items.empty()) break;
      const Item& s = items[static_cast<std::size_t>(i) * items.size() / ranks];
      m.payload.push_back(std::bit_cast<Index>(s.value));
      m.payload.push_back(s.id);
    }
    for (int dst = 0; dst < ranks; ++dst) {
      m.dst = dst;
      out.push_back(m);
    }
  }
  std::vector<Item> samples;
  for (const auto& m : transport.round_exchange(rank, std::move(out)).messages)
    for (std::size_t i = 0; i + 1 < m.payload.size(); i += 2)
      samples.push_back({std::bit_cast<double>(m.payload[i]), m.payload[i + 1]});
  std::sort(samples.begin(), samples.end());
  std::vector<Item> splitters;
  for (int i = 1; i < ranks && !samples.empty(); ++i)
    splitters.push_back(samples[static_cast<std::size_t>(i) * samples.size() / ranks]);

  // Scatter buckets.
  out.clear();
  for (int dst = 0; dst < ranks; ++dst) out.push_back(order_message(rank, dst));
  for (const Item& it : items) {
    const auto bucket = std::upper_bound(splitters.begin(), splitters.end(), it) - splitters.begin();
    out[bucket].payload.push_back(std::bit_cast<Index>(it.value));
    out[bucket].payload.push_back(it.id);
  }
  std::vector<Item> bucket;
  for (const auto& m : transport.round_exchange(rank, std::move(out)).messages)
    for (std::size_t i = 0; i + 1 < m.payload.size(); i += 2)
      bucket.push_back({std::bit_cast<double>(m.payload[i]), m.payload[i + 1]});
  std::sort(bucket.begin(), bucket.end());

  const auto sizes = transport.allgather(rank, static_cast<Index>(bucket.size()));
  const Index offset = std::accumulate(sizes.begin(), sizes.begin() + rank, Index{0});

  // Orders back to the vertex owners.
  out.clear();
  for (int dst = 0; dst < ranks; ++dst) out.push_back(order_message(rank, dst));
  for (std::size_t i = 0; i < bucket.size(); ++i) {
    auto& payload = out[partition.vertex_owner(bucket[i].id)].payload;
    payload.push_back(bucket[i].id);
    payload.push_back(offset + static_cast<Index>(i));
  }
  GlobalOrder order(local.simplex_count(0), -1);
  auto store = [&](Index gid, Index value) {
    const Coords l = block.to_local(global.vertex_coords(gid));
    order[local.vertex_index(l)] = value;
  };
  for (const auto& m : transport.round_exchange(rank, std::move(out)).messages)
    for (std::size_t i = 0; i + 1 < m.payload.size(); i += 2) store(m.payload[i], m.payload[i + 1]);

  // Owners forward to ghost copies.
  out.clear();
  for (int dst = 0; dst < ranks; ++dst) out.push_back(order_message(rank, dst));
  for (Index v = 0; v < local.simplex_count(0); ++v) {
    if (!block.owns_local_vertex(v)) continue;
    const Coords g = block.to_global(local.vertex_coords(v));
    for (int r : partition.ghost_ranks(g)) {
      out[r].payload.push_back(global.vertex_index(g));
      out[r].payload.push_back(order[v]);
    }
  }
  for (const auto& m : transport.round_exchange(rank, std::move(out)).messages)
    for (std::size_t i = 0; i + 1 < m.payload.size(); i += 2) store(m.payload[i], m.payload[i + 1]);
  return order;
}

SimplexKey simplex_key(const Grid& grid, std::span<const Index> order, SimplexId s) {
  SimplexKey key = {-1, -1, -1, -1};
  const VertexList verts = grid.vertices(s);
  for (std::size_t i = 0; i < verts.size(); ++i) key[i] = order[verts[i]];
  std::sort(key.begin(), key.begin() + verts.size(), std::greater<>());
  return key;
}

Index top_vertex(const Grid& grid, std::span<const Index> order, SimplexId s) {
  const VertexList verts = grid.vertices(s);
  Index top = verts[0];
  for (Index v : verts)
    if (order[v] > order[top]) top = v;
  return top;
}

}  // namespace ddms
