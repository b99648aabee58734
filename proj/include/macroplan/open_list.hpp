#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace macroplan {

/// Open list keyed by non-negative heuristic values: one FIFO bucket per
/// value. Insertion is amortized O(1) (no sorting); pop takes the front of
/// the lowest non-empty bucket.
template <typename T> class BucketOpenList {
public:
  void push(int h, T value) {
    if (h < 0)
      throw std::invalid_argument("negative bucket key");
    auto idx = static_cast<std::size_t>(h);
    if (idx >= buckets_.size())
      buckets_.resize(idx + 1);
    buckets_[idx].push_back(std::move(value));
    if (count_ == 0 || idx < min_)
      min_ = idx;
    ++count_;
  }

  std::optional<T> pop() {
    if (count_ == 0)
      return std::nullopt;
    while (buckets_[min_].empty())
      ++min_;
    T v = std::move(buckets_[min_].front());
    buckets_[min_].pop_front();
    --count_;
    return v;
  }

  std::optional<int> min_key() {
    if (count_ == 0)
      return std::nullopt;
    while (buckets_[min_].empty())
      ++min_;
    return static_cast<int>(min_);
  }

  bool empty() const { return count_ == 0; }
  std::size_t size() const { return count_; }

private:
  std::vector<std::deque<T>> buckets_;
  std::size_t min_ = 0;
  std::size_t count_ = 0;
};

template <typename T> void open_push(BucketOpenList<T> &q, int h, T node) {
  q.push(h, std::move(node));
}

template <typename T> std::optional<T> open_pop(BucketOpenList<T> &q) {
  return q.pop();
}

} // namespace macroplan
