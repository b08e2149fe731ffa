#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace costlam::detail {

// Pairs of binders opened during a simultaneous traversal of two terms. Two
// occurrences match when both resolve to the same pair, or both are free and
// spelled alike.
template <class N>
class BinderPairs {
 public:
  void push(const N& a, const N& b) {
    left_[a.text].push_back(depth_);
    right_[b.text].push_back(depth_);
    ++depth_;
  }
  void pop(const N& a, const N& b) {
    left_[a.text].pop_back();
    right_[b.text].pop_back();
    --depth_;
  }
  bool same(const N& a, const N& b) const {
    int i = top(left_, a.text);
    int j = top(right_, b.text);
    if (i < 0 && j < 0) return a == b;
    return i == j;
  }

 private:
  static int top(const std::unordered_map<std::string, std::vector<int>>& m,
                 const std::string& k) {
    auto it = m.find(k);
    if (it == m.end() || it->second.empty()) return -1;
    return it->second.back();
  }

  std::unordered_map<std::string, std::vector<int>> left_, right_;
  int depth_ = 0;
};

// Counts how many enclosing binders currently bind each name.
template <class N>
class BoundSet {
 public:
  void add(const N& n) { ++count_[n.text]; }
  void remove(const N& n) { --count_[n.text]; }
  bool has(const N& n) const {
    auto it = count_.find(n.text);
    return it != count_.end() && it->second > 0;
  }

 private:
  std::unordered_map<std::string, int> count_;
};

}  // namespace costlam::detail
