#include "ddms/extremum_pairing.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <unordered_map>

namespace ddms {

namespace {

enum Op : Index { kWalk = 1, kResult, kRegister, kClaim, kRelease, kUpdate };

constexpr Age kNoAge = {std::numeric_limits<Index>::max(), 0, 0, 0};

struct NodeRef {
  Index id = 0;
  int owner = 0;
  Age age{};
};

struct SaddleRef {
  Index id = 0;
  int owner = 0;
  Age age{};

  bool operator<(const SaddleRef& o) const { return id < o.id; }
};

struct NodeState {
  GraphNode info;
  bool owned = false;
  // Representative tag; `by` is the saddle paired with this node, if tagged.
  bool tagged = false;
  NodeRef rep;
  SaddleRef by;
  Index version = 0;
  std::set<SaddleRef> visitors;  // owner only
};

struct SaddleState {
  GraphSaddle info;
  Index eval = 0;
  int got = 0;
  NodeRef result[2];
  bool claiming = false;
  NodeRef claimed;
};

void put_age(std::vector<Index>& p, const Age& a) { p.insert(p.end(), a.begin(), a.end()); }

Age get_age(const std::vector<Index>& p, std::size_t at) { return {p[at], p[at + 1], p[at + 2], p[at + 3]}; }

class Protocol {
 public:
  Protocol(int rank, const LocalGraph& graph, Transport& transport, ExtremumPairingStats& stats)
      : rank_(rank), transport_(transport), stats_(stats) {
    for (const GraphNode& n : graph.nodes) {
      NodeState s;
      s.info = n;
      s.owned = n.owner == rank;
      s.rep = {n.id, n.owner, n.age};
      nodes_.emplace(n.id, std::move(s));
    }
    NodeState outside;
    outside.info = {kOutsideNode, kOutsideAge, rank, {}};
    outside.owned = true;
    outside.rep = {kOutsideNode, rank, kOutsideAge};
    nodes_.emplace(kOutsideNode, outside);

    std::vector<GraphSaddle> sorted = graph.saddles;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.age < b.age; });
    for (const GraphSaddle& s : sorted) {
      saddle_index_.emplace(s.id, saddles_.size());
      SaddleState st;
      st.info = s;
      saddles_.push_back(st);
    }
  }

  DistributedPairs run(Index max_rounds) {
    for (std::size_t i = 0; i < saddles_.size(); ++i) dirty_.insert(i);
    drain();
    for (;;) {
      auto delivery = transport_.round_exchange(rank_, std::move(outbox_));
      outbox_.clear();
      if (delivery.quiescent) break;
      if (++stats_.rounds > max_rounds)
        throw InternalError("extremum pairing did not converge within " + std::to_string(max_rounds) + " rounds");
      for (auto& m : delivery.messages) handle(m);
      drain();
    }
    DistributedPairs out;
    for (const auto& [id, n] : nodes_) {
      if (!n.owned || id == kOutsideNode) continue;
      if (n.tagged)
        out.pairs.push_back({n.by.id, n.by.owner, id});
      else
        out.unpaired.push_back(id);
    }
    std::sort(out.pairs.begin(), out.pairs.end());
    std::sort(out.unpaired.begin(), out.unpaired.end());
    return out;
  }

 private:
  void send(MessageKind kind, int dst, std::vector<Index> payload) {
    Message m;
    m.kind = kind;
    m.src = rank_;
    m.dst = dst;
    m.payload = std::move(payload);
    if (dst == rank_)
      local_.push_back(std::move(m));
    else
      outbox_.push_back(std::move(m));
  }

  void drain() {
    for (;;) {
      if (!local_.empty()) {
        Message m = std::move(local_.front());
        local_.pop_front();
        handle(m);
        continue;
      }
      if (dirty_.empty()) return;
      // Eldest first; its local messages may settle younger saddles.
      const std::size_t i = *dirty_.begin();
      dirty_.erase(dirty_.begin());
      evaluate(saddles_[i]);
    }
  }

  SaddleRef ref(const SaddleState& s) const { return {s.info.id, rank_, s.info.age}; }

  void evaluate(SaddleState& s) {
    ++stats_.evaluations;
    ++s.eval;
    s.got = 0;
    walk(ref(s), s.eval, 0, s.info.t0, nodes_.at(s.info.t0).info.owner);
    walk(ref(s), s.eval, 1, s.info.t1, nodes_.at(s.info.t1).info.owner);
  }

  void walk(const SaddleRef& s, Index eval, Index which, Index node, int node_owner) {
    for (;;) {
      auto it = nodes_.find(node);
      if (it == nodes_.end()) {
        std::vector<Index> p = {kWalk, s.id, s.owner};
        put_age(p, s.age);
        p.insert(p.end(), {eval, which, node, node_owner});
        send(MessageKind::GraphTriplet, node_owner, std::move(p));
        return;
      }
      NodeState& n = it->second;
      if (n.info.id != kOutsideNode) {
        if (n.owned) {
          n.visitors.insert(s);
        } else {
          std::vector<Index> p = {kRegister, s.id, s.owner};
          put_age(p, s.age);
          p.insert(p.end(), {node, n.version});
          send(MessageKind::GraphTriplet, n.info.owner, std::move(p));
        }
      }
      if (n.tagged && n.by.age < s.age) {
        node = n.rep.id;
        node_owner = n.rep.owner;
        continue;
      }
      std::vector<Index> p = {kResult, s.id, eval, which, node, n.info.owner};
      put_age(p, n.info.age);
      send(MessageKind::GraphTriplet, s.owner, std::move(p));
      return;
    }
  }

  void on_result(const std::vector<Index>& p) {
    SaddleState& s = saddles_[saddle_index_.at(p[1])];
    if (p[2] != s.eval) return;
    s.result[p[3]] = {p[4], static_cast<int>(p[5]), get_age(p, 6)};
    if (++s.got < 2) return;

    const NodeRef& r0 = s.result[0];
    const NodeRef& r1 = s.result[1];
    if (r0.id == r1.id) {
      release(s);
      return;
    }
    const NodeRef young = r0.age < r1.age ? r1 : r0;
    const NodeRef old = r0.age < r1.age ? r0 : r1;
    if (s.claiming && s.claimed.id != young.id) release(s);
    s.claiming = true;
    s.claimed = young;
    stats_.claims.push_back({rank_, s.info.id, young.id});
    std::vector<Index> q = {kClaim, s.info.id, rank_};
    put_age(q, s.info.age);
    q.insert(q.end(), {young.id, old.id, old.owner});
    put_age(q, old.age);
    send(MessageKind::GraphTriplet, young.owner, std::move(q));
  }

  void release(SaddleState& s) {
    if (!s.claiming) return;
    s.claiming = false;
    send(MessageKind::GraphTriplet, s.claimed.owner, {kRelease, s.info.id, s.claimed.id});
  }

  void recompute(const SaddleRef& s) {
    ++stats_.recomputes;
    send(MessageKind::Recompute, s.owner, {s.id, -1, -1});
  }

  // Owner-side state change: refresh ghost copies and re-run affected walks.
  void changed(NodeState& n, const Age& before) {
    ++n.version;
    std::vector<Index> p = {kUpdate, n.info.id, n.tagged ? 1 : 0, n.rep.id, n.rep.owner};
    put_age(p, n.rep.age);
    p.insert(p.end(), {n.by.id, n.by.owner});
    put_age(p, n.by.age);
    p.push_back(n.version);
    for (int r : n.info.ghost_ranks) send(MessageKind::GraphTriplet, r, p);
    const Age after = n.tagged ? n.by.age : kNoAge;
    const Age bound = std::min(before, after);
    for (const SaddleRef& v : n.visitors)
      if (bound < v.age) recompute(v);
  }

  void on_claim(const std::vector<Index>& p) {
    const SaddleRef s{p[1], static_cast<int>(p[2]), get_age(p, 3)};
    NodeState& n = nodes_.at(p[7]);
    const NodeRef old{p[8], static_cast<int>(p[9]), get_age(p, 10)};
    if (n.tagged && n.by.id != s.id) {
      if (n.by.age < s.age) {
        recompute(s);
        return;
      }
      ++stats_.displacements;
      recompute(n.by);
    }
    if (n.tagged && n.by.id == s.id && n.rep.id == old.id) return;
    const Age before = n.tagged ? n.by.age : kNoAge;
    n.tagged = true;
    n.by = s;
    n.rep = old;
    changed(n, before);
  }

  void on_release(const std::vector<Index>& p) {
    NodeState& n = nodes_.at(p[2]);
    if (!n.tagged || n.by.id != p[1]) return;
    const Age before = n.by.age;
    n.tagged = false;
    n.rep = {n.info.id, n.info.owner, n.info.age};
    changed(n, before);
  }

  void on_register(const std::vector<Index>& p, int src) {
    const SaddleRef s{p[1], static_cast<int>(p[2]), get_age(p, 3)};
    NodeState& n = nodes_.at(p[7]);
    n.visitors.insert(s);
    if (p[8] == n.version) return;
    // The walk used a stale ghost copy: refresh it before the recomputation.
    std::vector<Index> q = {kUpdate, n.info.id, n.tagged ? 1 : 0, n.rep.id, n.rep.owner};
    put_age(q, n.rep.age);
    q.insert(q.end(), {n.by.id, n.by.owner});
    put_age(q, n.by.age);
    q.push_back(n.version);
    send(MessageKind::GraphTriplet, src, std::move(q));
    recompute(s);
  }

  void on_update(const std::vector<Index>& p) {
    NodeState& n = nodes_.at(p[1]);
    const Index version = p[15];
    if (version <= n.version) return;
    n.version = version;
    n.tagged = p[2] != 0;
    n.rep = {p[3], static_cast<int>(p[4]), get_age(p, 5)};
    n.by = {p[9], static_cast<int>(p[10]), get_age(p, 11)};
  }

  void handle(const Message& m) {
    if (m.kind == MessageKind::Recompute) {
      dirty_.insert(saddle_index_.at(m.payload[0]));
      return;
    }
    const auto& p = m.payload;
    switch (p[0]) {
      case kWalk:
        walk({p[1], static_cast<int>(p[2]), get_age(p, 3)}, p[7], p[8], p[9], static_cast<int>(p[10]));
        break;
      case kResult: on_result(p); break;
      case kRegister: on_register(p, m.src); break;
      case kClaim: on_claim(p); break;
      case kRelease: on_release(p); break;
      case kUpdate: on_update(p); break;
      default: throw InternalError("unknown extremum pairing message");
    }
  }

  int rank_;
  Transport& transport_;
  ExtremumPairingStats& stats_;
  std::unordered_map<Index, NodeState> nodes_;
  std::vector<SaddleState> saddles_;
  std::unordered_map<Index, std::size_t> saddle_index_;
  std::set<std::size_t> dirty_;
  std::deque<Message> local_;
  std::vector<Message> outbox_;
};

}  // namespace

DistributedPairs self_correcting_pairing(int rank, const LocalGraph& graph, Transport& transport,
                                         const ExtremumPairingConfig& config, ExtremumPairingStats* stats) {
  ExtremumPairingStats local_stats;
  ExtremumPairingStats& st = stats ? *stats : local_stats;
  const Index saddles = transport.allreduce_sum(rank, static_cast<Index>(graph.saddles.size()));
  const Index bound = config.max_rounds > 0 ? config.max_rounds : 4 * (saddles + 1) * transport.ranks() + 16;
  Protocol protocol(rank, graph, transport, st);
  return protocol.run(bound);
}

}  // namespace ddms
