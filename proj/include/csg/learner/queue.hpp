#ifndef CSG_LEARNER_QUEUE_HPP_
#define CSG_LEARNER_QUEUE_HPP_

#include <condition_variable>
#include <deque>
#include <mutex>
#include <optional>

#include "csg/core/real.hpp"

CSG_NAMESPACE_BEGIN
namespace learner {

// Bounded FIFO with blocking push/pop. After close(), pushes fail and pops
// drain what is left before returning nullopt.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity ? capacity : 1) {}

  bool push(T item) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(item));
    ++pushed_;
    if (items_.size() > high_water_) high_water_ = items_.size();
    not_empty_.notify_one();
    return true;
  }

  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    ++popped_;
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    not_full_.notify_all();
    not_empty_.notify_all();
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const {
    std::lock_guard lock(mu_);
    return items_.size();
  }
  std::size_t high_water() const {
    std::lock_guard lock(mu_);
    return high_water_;
  }
  std::size_t pushed() const {
    std::lock_guard lock(mu_);
    return pushed_;
  }
  std::size_t popped() const {
    std::lock_guard lock(mu_);
    return popped_;
  }

 private:
  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable not_full_, not_empty_;
  std::deque<T> items_;
  bool closed_ = false;
  std::size_t pushed_ = 0, popped_ = 0, high_water_ = 0;
};

}  // namespace learner
CSG_NAMESPACE_END

#endif  // CSG_LEARNER_QUEUE_HPP_
