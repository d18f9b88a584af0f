#include "ddms/saddle_pairing.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <set>
#include <thread>
#include <unordered_map>

namespace ddms {

namespace {

enum Op : Index { kAddEdge = 1, kMerge };

struct Entry {
  SimplexKey key{};
  Index id = 0;
  bool operator<(const Entry& o) const { return key < o.key; }
};

using Part = std::set<Entry>;
using Digest = std::map<int, SimplexKey>;

struct Token {
  Index sigma = 0;
  SimplexKey key{};
  Index vertex = 0;
  Digest digest;
};

void put_key(std::vector<Index>& p, const SimplexKey& k) { p.insert(p.end(), k.begin(), k.end()); }
SimplexKey get_key(const std::vector<Index>& p, std::size_t at) { return {p[at], p[at + 1], p[at + 2], p[at + 3]}; }

void raise(Digest& d, int rank, const SimplexKey& key) {
  auto [it, fresh] = d.emplace(rank, key);
  if (!fresh && it->second < key) it->second = key;
}

class Engine {
 public:
  Engine(int rank, const SaddleComplex& complex, Transport& transport, const SaddlePairingConfig& config,
         SaddlePairingStats& stats)
      : rank_(rank), complex_(complex), transport_(transport), config_(config), stats_(stats) {}

  void start(const std::vector<CriticalTriangle>& triangles) {
    std::vector<CriticalTriangle> sorted = triangles;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.key < b.key; });
    for (const CriticalTriangle& t : sorted) {
      Token token{t.id, t.key, t.top_vertex, {}};
      facets_.clear();
      complex_.boundary(t.id, facets_);
      for (const EdgeRef& e : facets_) toggle(token, e);
      tasks_.push_back(std::move(token));
    }
  }

  void run_tasks() {
    while (!tasks_.empty()) {
      Token t = std::move(tasks_.front());
      tasks_.pop_front();
      propagate(std::move(t));
    }
  }

  // Boundary updates first, then tokens.
  void receive(std::vector<Message>& messages) {
    for (const Message& m : messages)
      if (m.kind == MessageKind::BoundaryUpdate) apply(m.payload);
    for (Message& m : messages)
      if (m.kind == MessageKind::Token) tasks_.push_back(decode(m.payload));
  }

  SaddlePairs result() const {
    SaddlePairs out;
    for (const auto& [edge, claim] : claims_) out.pairs.push_back({edge, {claim.sigma, claim.key, claim.vertex}});
    std::sort(out.pairs.begin(), out.pairs.end(), [](const auto& a, const auto& b) { return a.edge < b.edge; });
    out.exhausted = exhausted_;
    std::sort(out.exhausted.begin(), out.exhausted.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return out;
  }

  void run_one() {
    Token t = std::move(tasks_.front());
    tasks_.pop_front();
    propagate(std::move(t));
  }

  Index terminated() const { return terminated_; }
  bool has_tasks() const { return !tasks_.empty(); }
  std::vector<Message>& outbox() { return outbox_; }

  // Eager mode: the shared counter replaces the terminated-count reduction.
  std::atomic<Index>* counter = nullptr;

 private:
  void send(MessageKind kind, int dst, std::vector<Index> payload) {
    Message m;
    m.kind = kind;
    m.src = rank_;
    m.dst = dst;
    m.payload = std::move(payload);
    outbox_.push_back(std::move(m));
  }

  void toggle_local(Part& part, const Entry& e) {
    auto [it, fresh] = part.insert(e);
    if (fresh) {
      ++live_;
      stats_.peak_boundary_entries = std::max(stats_.peak_boundary_entries, live_);
    } else {
      part.erase(it);
      --live_;
    }
  }

  void toggle(Token& t, const EdgeRef& e) {
    if (e.owner == rank_) {
      toggle_local(parts_[t.sigma], {e.key, e.id});
      return;
    }
    std::vector<Index> p = {kAddEdge, t.sigma, e.id};
    put_key(p, e.key);
    send(MessageKind::BoundaryUpdate, e.owner, std::move(p));
    ++stats_.updates_sent;
    raise(t.digest, e.owner, e.key);
  }

  void apply(const std::vector<Index>& p) {
    if (p[0] == kAddEdge) {
      toggle_local(parts_[p[1]], {get_key(p, 3), p[2]});
    } else if (p[0] == kMerge) {
      merge_local(p[1], p[2]);
    } else {
      throw InternalError("unknown boundary update");
    }
  }

  void merge_local(Index into, Index from) {
    auto it = parts_.find(from);
    if (it == parts_.end()) return;
    Part& target = parts_[into];
    const Part& source = it->second;
    for (const Entry& e : source) toggle_local(target, e);
  }

  void terminate() {
    ++terminated_;
    if (counter) counter->fetch_add(1, std::memory_order_seq_cst);
  }

  struct Claim {
    Index sigma = 0;
    SimplexKey key{};
    Index vertex = 0;
    Digest digest;
  };

  void merge(Token& t, const Claim& c) {
    merge_local(t.sigma, c.sigma);
    for (const auto& [q, key] : c.digest) {
      send(MessageKind::BoundaryUpdate, q, {kMerge, t.sigma, c.sigma});
      ++stats_.updates_sent;
      raise(t.digest, q, key);
    }
    ++stats_.merges;
  }

  void expand(Token& t, Index edge) {
    facets_.clear();
    complex_.expansion(edge, facets_);
    for (const EdgeRef& e : facets_) toggle(t, e);
    ++stats_.expansions;
  }

  void pass(Token& t, int dst, const Part& part) {
    if (!part.empty()) t.digest[rank_] = part.rbegin()->key;
    std::vector<Index> p = {t.sigma};
    put_key(p, t.key);
    p.push_back(t.vertex);
    p.push_back(static_cast<Index>(t.digest.size()));
    for (const auto& [q, key] : t.digest) {
      p.push_back(q);
      put_key(p, key);
    }
    send(MessageKind::Token, dst, std::move(p));
    ++stats_.tokens_sent;
    stats_.hops.push_back({t.sigma, rank_, dst});
  }

  static Token decode(const std::vector<Index>& p) {
    Token t{p[0], get_key(p, 1), p[5], {}};
    const Index n = p[6];
    for (Index i = 0; i < n; ++i) t.digest.emplace(static_cast<int>(p[7 + 5 * i]), get_key(p, 8 + 5 * i));
    return t;
  }

  void propagate(Token t) {
    Part& part = parts_[t.sigma];
    t.digest.erase(rank_);
    Index budget = config_.anticipation;
    for (;;) {
      const Entry* top = part.empty() ? nullptr : &*part.rbegin();
      auto remote = t.digest.end();
      for (auto it = t.digest.begin(); it != t.digest.end(); ++it)
        if (remote == t.digest.end() || remote->second < it->second) remote = it;
      if (!top && remote == t.digest.end()) {
        exhausted_.push_back({t.sigma, t.key, t.vertex});
        terminate();
        return;
      }
      if (remote != t.digest.end() && (!top || top->key < remote->second)) {
        // The highest edge may live elsewhere; anticipate locally while allowed.
        if (top && budget > 0) {
          const auto kind = complex_.edge_kind(top->id);
          if (kind == SaddleComplex::EdgeKind::Expandable) {
            --budget;
            ++stats_.anticipated;
            expand(t, top->id);
            continue;
          }
          auto c = claims_.find(top->id);
          if (kind == SaddleComplex::EdgeKind::Critical && c != claims_.end() && c->second.key < t.key) {
            --budget;
            ++stats_.anticipated;
            merge(t, c->second);
            continue;
          }
        }
        pass(t, remote->first, part);
        return;
      }
      const Index edge = top->id;
      switch (complex_.edge_kind(edge)) {
        case SaddleComplex::EdgeKind::Expandable:
          expand(t, edge);
          continue;
        case SaddleComplex::EdgeKind::Negative:
          throw InternalError("propagation reached a negative edge " + std::to_string(edge));
        case SaddleComplex::EdgeKind::Critical:
          break;
      }
      auto c = claims_.find(edge);
      if (c == claims_.end()) {
        claims_.emplace(edge, Claim{t.sigma, t.key, t.vertex, std::move(t.digest)});
        terminate();
        return;
      }
      if (c->second.key < t.key) {
        merge(t, c->second);
        continue;
      }
      // Younger claimant: take the edge over and resume it here.
      Token evicted{c->second.sigma, c->second.key, c->second.vertex, std::move(c->second.digest)};
      c->second = Claim{t.sigma, t.key, t.vertex, std::move(t.digest)};
      ++stats_.evictions;
      tasks_.push_back(std::move(evicted));
      return;
    }
  }

  int rank_;
  const SaddleComplex& complex_;
  Transport& transport_;
  const SaddlePairingConfig& config_;
  SaddlePairingStats& stats_;

  std::unordered_map<Index, Part> parts_;
  std::unordered_map<Index, Claim> claims_;
  std::deque<Token> tasks_;
  std::vector<Message> outbox_;
  std::vector<CriticalTriangle> exhausted_;
  std::vector<EdgeRef> facets_;
  Index terminated_ = 0;
  Index live_ = 0;
};

void run_round(int rank, Engine& engine, Transport& transport, Index total, Index bound, SaddlePairingStats& stats) {
  engine.run_tasks();
  for (;;) {
    auto delivery = transport.round_exchange(rank, std::move(engine.outbox()));
    engine.outbox().clear();
    const Index done = transport.allreduce_sum(rank, engine.terminated());
    if (done == total) {
      for (const Message& m : delivery.messages)
        if (m.kind == MessageKind::Token) throw InternalError("token in flight after termination");
      return;
    }
    if (delivery.quiescent) throw InternalError("saddle propagation stalled with live tokens");
    if (++stats.rounds > bound)
      throw InternalError("saddle propagation did not terminate within " + std::to_string(bound) + " rounds");
    engine.receive(delivery.messages);
    engine.run_tasks();
  }
}


void run_eager(int rank, Engine& engine, Transport& transport, const SaddlePairingConfig& config, Index total,
               Index local_count, SaddlePairingStats& stats) {
  std::atomic<Index>& counter = transport.shared_counter(0);
  engine.counter = &counter;
  auto threshold_for = [&](Index n) {
    if (config.send_threshold > 0) return config.send_threshold;
    return std::max<Index>(1, static_cast<Index>(config.threshold_fraction * static_cast<double>(n)));
  };
  Index threshold = threshold_for(local_count);

  std::mutex mutex;
  std::condition_variable cv;
  bool stop = false;
  int busy = 0;
  std::exception_ptr error;

  auto worker = [&] {
    std::unique_lock lock(mutex);
    for (;;) {
      cv.wait(lock, [&] { return stop || engine.has_tasks(); });
      if (stop) return;
      ++busy;
      try {
        engine.run_one();
      } catch (...) {
        if (!error) error = std::current_exception();
        stop = true;
        cv.notify_all();
      }
      --busy;
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::max(1, config.workers); ++w) pool.emplace_back(worker);
  {
    std::lock_guard lock(mutex);
    cv.notify_all();
  }

  auto finish = [&] {
    {
      std::lock_guard lock(mutex);
      stop = true;
    }
    cv.notify_all();
    for (auto& t : pool) t.join();
  };

  try {
    auto last_progress = std::chrono::steady_clock::now();
    Index last_count = -1;
    for (;;) {
      std::vector<Message> incoming = transport.poll(rank);
      std::vector<Message> batch;
      {
        std::lock_guard lock(mutex);
        if (error) break;
        if (!incoming.empty()) {
          engine.receive(incoming);
          cv.notify_all();
        }
        auto& out = engine.outbox();
        if (!out.empty() && (static_cast<Index>(out.size()) >= threshold || (!engine.has_tasks() && busy == 0))) {
          batch = std::move(out);
          out.clear();
          ++stats.rounds;
          threshold = threshold_for((total - counter.load()) / transport.ranks());
        }
      }
      const bool moved = !incoming.empty() || !batch.empty();
      if (!batch.empty()) transport.post(rank, std::move(batch));
      const Index count = counter.load(std::memory_order_seq_cst);
      if (count == total) break;
      const auto now = std::chrono::steady_clock::now();
      if (moved || count != last_count) {
        last_progress = now;
        last_count = count;
      } else {
        if (now - last_progress > transport.config().watchdog)
          throw InternalError("saddle propagation made no progress within the watchdog period");
        std::this_thread::yield();
      }
    }
  } catch (...) {
    finish();
    throw;
  }
  finish();
  if (error) std::rethrow_exception(error);
}

}  // namespace

SaddlePairs distributed_pair_critical_simplices(int rank, const SaddleComplex& complex,
                                                const std::vector<CriticalTriangle>& triangles, Transport& transport,
                                                const SaddlePairingConfig& config, SaddlePairingStats* stats) {
  SaddlePairingStats local_stats;
  SaddlePairingStats& st = stats ? *stats : local_stats;
  Engine engine(rank, complex, transport, config, st);
  const Index total = transport.allreduce_sum(rank, static_cast<Index>(triangles.size()));
  engine.start(triangles);
  if (config.mode == TransportMode::Round) {
    const Index bound =
        config.max_rounds > 0 ? config.max_rounds : 64 * (total + 1) * transport.ranks() + 1024;
    run_round(rank, engine, transport, total, bound, st);
  } else {
    if (rank == 0) transport.shared_counter(0).store(0);
    transport.barrier(rank);
    run_eager(rank, engine, transport, config, total, static_cast<Index>(triangles.size()), st);
    transport.barrier(rank);
  }
  return engine.result();
}

}  // namespace ddms
