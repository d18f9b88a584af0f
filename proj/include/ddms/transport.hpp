#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "ddms/grid.hpp"

namespace ddms {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MessageKind : std::uint8_t {
  SetContinuation,
  GraphTriplet,
  Recompute,
  BoundaryUpdate,
  Token,
  OrderExchange,
};
inline constexpr int kMessageKinds = 6;

struct Message {
  MessageKind kind = MessageKind::OrderExchange;
  int src = 0;
  int dst = 0;
  /// Per-(src, dst) sequence number, assigned by the transport on send.
  std::uint64_t seq = 0;
  std::vector<Index> payload;
};

enum class TransportMode { Round, Eager };

struct TransportConfig {
  std::uint64_t seed = 0;
  std::chrono::milliseconds watchdog{60000};
};

struct TransportStats {
  Index rounds = 0;
  Index collectives = 0;
  Index messages = 0;
  std::array<Index, kMessageKinds> by_kind{};
};

/// In-process message transport between logical processes (one thread each).
///
/// Round mode: collective exchanges where every rank calls round_exchange()
/// once per round. Delivery is exactly-once and FIFO per sender; the
/// interleaving of different senders is shuffled by the seed.
/// Eager mode: post()/poll() mailboxes for overlapping communication with
/// computation; FIFO per sender and atomic per posted batch.
class Transport {
 public:
  Transport(int ranks, TransportConfig config = {});

  int ranks() const { return ranks_; }
  const TransportConfig& config() const { return config_; }

  struct Delivery {
    std::vector<Message> messages;
    /// True when no rank sent anything this round.
    bool quiescent = true;
  };
  Delivery round_exchange(int rank, std::vector<Message> outgoing);
  Index allreduce_sum(int rank, Index value);
  Index allreduce_max(int rank, Index value);
  std::vector<Index> allgather(int rank, Index value);
  void barrier(int rank);

  // Eager channel.
  void post(int rank, std::vector<Message> batch);
  std::vector<Message> poll(int rank);
  /// Global count of undelivered or unprocessed work items, maintained by the
  /// eager protocol (increment the successor before retiring the predecessor).
  void outstanding_add(Index delta) { outstanding_.fetch_add(delta, std::memory_order_seq_cst); }
  Index outstanding() const { return outstanding_.load(std::memory_order_seq_cst); }
  /// Shared counter for eager-mode global reductions without a collective.
  std::atomic<Index>& shared_counter(int which) { return shared_[which]; }

  void fail(const std::string& why);
  bool failed() const;
  TransportStats stats() const;

 private:
  template <typename Deposit, typename Complete, typename Collect>
  void collective(int rank, Deposit&& deposit, Complete&& complete, Collect&& collect);
  void stamp(Message& m);
  void count(const Message& m);

  int ranks_;
  TransportConfig config_;

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  int arrived_ = 0;
  std::uint64_t generation_ = 0;
  std::vector<char> arrived_mask_;
  bool failed_ = false;
  std::string failure_;

  std::vector<std::vector<Message>> outboxes_;
  std::vector<std::vector<Message>> inboxes_;
  bool quiescent_ = true;
  std::vector<Index> values_;
  std::vector<Index> gathered_;
  Index reduced_ = 0;

  std::vector<std::uint64_t> next_seq_;
  std::vector<std::deque<Message>> mailboxes_;
  std::atomic<Index> outstanding_{0};
  std::array<std::atomic<Index>, 4> shared_{};
  TransportStats stats_;
};

/// Runs body(rank) on one thread per rank; a failing rank fails the transport
/// so blocked peers wake up. Rethrows the first failure.
void run_ranks(Transport& transport, const std::function<void(int)>& body);

}  // namespace ddms
