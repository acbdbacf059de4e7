#pragma once

#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>

namespace satgym {

// Unbounded FIFO shared between threads. After close(), pushes are dropped
// and pops drain the remaining items, then return nullopt.
template <class T>
class BlockingQueue {
 public:
  // False when the queue is closed and the item was dropped.
  bool push(T item) {
    {
      std::lock_guard lock(mutex_);
      if (closed_) return false;
      items_.push_back(std::move(item));
    }
    ready_.notify_one();
    return true;
  }

  // Waits for an item. nullopt when closed and empty, or on timeout.
  std::optional<T> pop(std::optional<std::chrono::milliseconds> timeout = std::nullopt) {
    std::unique_lock lock(mutex_);
    auto available = [this] { return !items_.empty() || closed_; };
    if (timeout) {
      if (!ready_.wait_for(lock, *timeout, available)) return std::nullopt;
    } else {
      ready_.wait(lock, available);
    }
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    return item;
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    ready_.notify_all();
  }

  bool closed() const {
    std::lock_guard lock(mutex_);
    return closed_;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return items_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<T> items_;
  bool closed_ = false;
};

}  // namespace satgym
