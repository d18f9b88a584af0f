#include "ddms/transport.hpp"

#include <algorithm>
#include <exception>
#include <random>
#include <thread>

namespace ddms {

Transport::Transport(int ranks, TransportConfig config)
    : ranks_(ranks),
      config_(config),
      arrived_mask_(ranks, 0),
      outboxes_(ranks),
      inboxes_(ranks),
      values_(ranks, 0),
      gathered_(ranks, 0),
      next_seq_(static_cast<std::size_t>(ranks) * ranks, 0),
      mailboxes_(ranks) {
  if (ranks < 1) throw std::invalid_argument("transport needs at least one rank");
  for (auto& c : shared_) c.store(0);
}

void Transport::stamp(Message& m) {
  if (m.dst < 0 || m.dst >= ranks_) throw TransportError("message to unknown rank " + std::to_string(m.dst));
  m.seq = next_seq_[static_cast<std::size_t>(m.src) * ranks_ + m.dst]++;
}

void Transport::count(const Message& m) {
  ++stats_.messages;
  ++stats_.by_kind[static_cast<int>(m.kind)];
}

template <typename Deposit, typename Complete, typename Collect>
void Transport::collective(int rank, Deposit&& deposit, Complete&& complete, Collect&& collect) {
  std::unique_lock lock(mutex_);
  if (failed_) throw TransportError(failure_);
  if (arrived_mask_[rank]) throw TransportError("rank " + std::to_string(rank) + " entered a collective twice");
  deposit();
  arrived_mask_[rank] = 1;
  if (++arrived_ == ranks_) {
    complete();
    ++stats_.collectives;
    arrived_ = 0;
    std::fill(arrived_mask_.begin(), arrived_mask_.end(), 0);
    ++generation_;
    cv_.notify_all();
  } else {
    const auto gen = generation_;
    if (!cv_.wait_for(lock, config_.watchdog, [&] { return generation_ != gen || failed_; })) {
      std::string missing;
      for (int r = 0; r < ranks_; ++r)
        if (!arrived_mask_[r]) missing += (missing.empty() ? "" : ",") + std::to_string(r);
      failed_ = true;
      failure_ = "deadlock: collective incomplete, missing ranks " + missing;
      cv_.notify_all();
    }
    if (failed_) throw TransportError(failure_);
  }
  collect();
}

Transport::Delivery Transport::round_exchange(int rank, std::vector<Message> outgoing) {
  Delivery out;
  collective(
      rank,
      [&] {
        for (auto& m : outgoing) m.src = rank;
        outboxes_[rank] = std::move(outgoing);
      },
      [&] {
        ++stats_.rounds;
        quiescent_ = true;
        std::vector<std::vector<std::deque<Message*>>> queues(ranks_, std::vector<std::deque<Message*>>(ranks_));
        for (int src = 0; src < ranks_; ++src)
          for (auto& m : outboxes_[src]) {
            stamp(m);
            count(m);
            queues[m.dst][src].push_back(&m);
            quiescent_ = false;
          }
        for (int dst = 0; dst < ranks_; ++dst) {
          std::mt19937_64 rng(config_.seed * 0x9E3779B97F4A7C15ULL + stats_.rounds * 1315423911ULL + dst);
          auto& per_sender = queues[dst];
          std::size_t remaining = 0;
          for (auto& q : per_sender) remaining += q.size();
          auto& inbox = inboxes_[dst];
          inbox.clear();
          inbox.reserve(remaining);
          while (remaining > 0) {
            std::uniform_int_distribution<std::size_t> pick(0, remaining - 1);
            std::size_t k = pick(rng);
            for (auto& q : per_sender) {
              if (k < q.size()) {
                inbox.push_back(std::move(*q.front()));
                q.pop_front();
                break;
              }
              k -= q.size();
            }
            --remaining;
          }
        }
        for (auto& box : outboxes_) box.clear();
      },
      [&] {
        out.messages = std::move(inboxes_[rank]);
        inboxes_[rank].clear();
        out.quiescent = quiescent_;
      });
  return out;
}

Index Transport::allreduce_sum(int rank, Index value) {
  Index out = 0;
  collective(
      rank, [&] { values_[rank] = value; },
      [&] {
        reduced_ = 0;
        for (Index v : values_) reduced_ += v;
      },
      [&] { out = reduced_; });
  return out;
}

Index Transport::allreduce_max(int rank, Index value) {
  Index out = 0;
  collective(
      rank, [&] { values_[rank] = value; },
      [&] { reduced_ = *std::max_element(values_.begin(), values_.end()); }, [&] { out = reduced_; });
  return out;
}

std::vector<Index> Transport::allgather(int rank, Index value) {
  std::vector<Index> out;
  collective(
      rank, [&] { values_[rank] = value; }, [&] { gathered_ = values_; }, [&] { out = gathered_; });
  return out;
}

void Transport::barrier(int rank) {
  collective(rank, [] {}, [] {}, [] {});
}

void Transport::post(int rank, std::vector<Message> batch) {
  if (batch.empty()) return;
  std::lock_guard lock(mutex_);
  if (failed_) throw TransportError(failure_);
  outstanding_.fetch_add(static_cast<Index>(batch.size()));
  for (auto& m : batch) {
    m.src = rank;
    stamp(m);
    count(m);
    mailboxes_[m.dst].push_back(std::move(m));
  }
}

std::vector<Message> Transport::poll(int rank) {
  std::lock_guard lock(mutex_);
  if (failed_) throw TransportError(failure_);
  std::vector<Message> out(std::make_move_iterator(mailboxes_[rank].begin()),
                           std::make_move_iterator(mailboxes_[rank].end()));
  mailboxes_[rank].clear();
  return out;
}

void Transport::fail(const std::string& why) {
  std::lock_guard lock(mutex_);
  if (!failed_) {
    failed_ = true;
    failure_ = why;
  }
  cv_.notify_all();
}

bool Transport::failed() const {
  std::lock_guard lock(mutex_);
  return failed_;
}

TransportStats Transport::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

void run_ranks(Transport& transport, const std::function<void(int)>& body) {
  const int n = transport.ranks();
  std::vector<std::exception_ptr> errors(n);
  auto guarded = [&](int rank) {
    try {
      body(rank);
    } catch (const std::exception& e) {
      errors[rank] = std::current_exception();
      transport.fail("rank " + std::to_string(rank) + " failed: " + e.what());
    } catch (...) {
      errors[rank] = std::current_exception();
      transport.fail("rank " + std::to_string(rank) + " failed");
    }
  };
  if (n == 1) {
    guarded(0);
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n);
    for (int r = 0; r < n; ++r) threads.emplace_back(guarded, r);
    for (auto& t : threads) t.join();
  }
  // Prefer the root cause over the secondary "transport failed" errors.
  for (auto& e : errors)
    if (e) {
      try {
        std::rethrow_exception(e);
      } catch (const TransportError&) {
        continue;
      } catch (...) {
        throw;
      }
    }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace ddms
