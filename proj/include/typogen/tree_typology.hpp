#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <future>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "typogen/dataset.hpp"
#include "typogen/errors.hpp"

namespace typogen {

struct TreeNode;
using TreePtr = std::shared_ptr<const TreeNode>;

// Immutable node. Internal nodes hold the split question and No/Yes children;
// leaves hold only the member count. Subtrees are shared between candidate trees.
struct TreeNode {
  std::string question;  // empty at leaves
  TreePtr no_child;
  TreePtr yes_child;
  std::size_t count = 0;       // respondents reaching this node
  std::size_t leaf_count = 1;  // leaves in this subtree

  bool is_leaf() const { return !no_child; }
};

inline TreePtr make_leaf(std::size_t count) {
  auto n = std::make_shared<TreeNode>();
  n->count = count;
  n->leaf_count = 1;
  return n;
}

inline TreePtr make_split(std::string question, TreePtr no_child, TreePtr yes_child) {
  auto n = std::make_shared<TreeNode>();
  n->question = std::move(question);
  n->count = no_child->count + yes_child->count;
  n->leaf_count = no_child->leaf_count + yes_child->leaf_count;
  n->no_child = std::move(no_child);
  n->yes_child = std::move(yes_child);
  return n;
}

struct TaxonomicTree {
  TreePtr root;

  // Leaf member counts in preorder, No child before Yes child. Leaf k in this
  // order carries label T(k+1).
  std::vector<std::size_t> leaf_counts() const {
    std::vector<std::size_t> out;
    collect_leaves(root, out);
    return out;
  }

  std::vector<std::string> split_questions_preorder() const {
    std::vector<std::string> out;
    collect_splits(root, out);
    return out;
  }

  // Canonical serialization; two trees are identical iff these strings are equal.
  std::string serialize() const { return serialize_node(root); }

  double leaf_variance() const {
    const auto counts = leaf_counts();
    double m = 0.0;
    for (auto c : counts) m += static_cast<double>(c);
    m /= static_cast<double>(counts.size());
    double v = 0.0;
    for (auto c : counts) v += (static_cast<double>(c) - m) * (static_cast<double>(c) - m);
    return v / static_cast<double>(counts.size());
  }

 private:
  static void collect_leaves(const TreePtr& n, std::vector<std::size_t>& out) {
    if (n->is_leaf()) {
      out.push_back(n->count);
      return;
    }
    collect_leaves(n->no_child, out);
    collect_leaves(n->yes_child, out);
  }

  static void collect_splits(const TreePtr& n, std::vector<std::string>& out) {
    if (n->is_leaf()) return;
    out.push_back(n->question);
    collect_splits(n->no_child, out);
    collect_splits(n->yes_child, out);
  }

  static std::string serialize_node(const TreePtr& n) {
    if (n->is_leaf()) return "[" + std::to_string(n->count) + "]";
    return "(" + n->question + " " + serialize_node(n->no_child) + " " +
           serialize_node(n->yes_child) + ")";
  }
};

struct TreeConstraints {
  std::size_t min_leaf_grow = 40;    // split admissibility during enumeration
  std::size_t min_leaf_filter = 51;  // post-hoc lower bound on leaf size
  std::size_t max_leaf_filter = 0;   // post-hoc upper bound on leaf size
  std::set<std::string> excluded_questions;
};

struct StageCounts {
  std::size_t enumerated = 0;
  std::size_t after_min_leaf = 0;
  std::size_t after_max_leaf = 0;
  std::size_t after_exclusion = 0;
};

struct TreeCandidateSet {
  std::vector<TaxonomicTree> trees;
  StageCounts stage_counts;
};

namespace detail {

struct TreeEnumerator {
  const std::vector<const std::vector<std::uint8_t>*>& cols;
  const std::vector<std::string>& question_ids;
  std::size_t min_leaf_grow;
  std::size_t cap;
  std::atomic<std::size_t>& produced;

  // All trees over `group`, using only questions enabled in `avail`: the group may
  // stay a leaf, or split on any available question whose two sides both reach
  // min_leaf_grow.
  std::vector<TreePtr> enumerate(const std::vector<std::uint32_t>& group,
                                 std::uint32_t avail) const {
    std::vector<TreePtr> out;
    out.push_back(make_leaf(group.size()));
    bump(1);
    for (std::size_t qi = 0; qi < question_ids.size(); ++qi) {
      if (!(avail & (1u << qi))) continue;
      std::vector<std::uint32_t> no_side, yes_side;
      for (auto r : group)
        ((*cols[qi])[r] ? yes_side : no_side).push_back(r);
      if (no_side.size() < min_leaf_grow || yes_side.size() < min_leaf_grow) continue;
      const std::uint32_t remaining = avail & ~(1u << qi);
      const auto no_trees = enumerate(no_side, remaining);
      const auto yes_trees = enumerate(yes_side, remaining);
      for (const auto& nt : no_trees)
        for (const auto& yt : yes_trees) {
          out.push_back(make_split(question_ids[qi], nt, yt));
          bump(1);
        }
    }
    return out;
  }

  void bump(std::size_t k) const {
    if (produced.fetch_add(k) + k > cap)
      throw NumericError("enumerate_trees: candidate count exceeds cap of " +
                         std::to_string(cap) + "; tighten min_leaf_grow or reduce questions");
  }
};

}  // namespace detail

// Exhaustively enumerates every distinct taxonomic tree over the given questions,
// including the trivial single-leaf tree and trees that leave admissible splits
// unused. Worst-case exponential; a hard cap guards against runaway configs.
// With threads > 1 the root split choices run concurrently; the merged output is
// identical regardless of thread count.
inline TreeCandidateSet enumerate_trees(const SurveyDataset& ds,
                                        const std::vector<std::string>& questions,
                                        std::size_t min_leaf_grow,
                                        std::size_t cap = 1000000,
                                        unsigned threads = 1) {
  if (questions.empty()) throw ConfigError("enumerate_trees: no questions");
  if (min_leaf_grow < 1) throw ConfigError("enumerate_trees: min_leaf_grow must be >= 1");
  if (questions.size() > 31) throw ConfigError("enumerate_trees: too many questions");

  std::vector<const std::vector<std::uint8_t>*> cols;
  cols.reserve(questions.size());
  for (const auto& q : questions) cols.push_back(&ds.binary(q));

  std::vector<std::uint32_t> everyone(ds.n());
  for (std::size_t i = 0; i < ds.n(); ++i) everyone[i] = static_cast<std::uint32_t>(i);
  const std::uint32_t all_avail = (1u << questions.size()) - 1u;

  std::atomic<std::size_t> produced{0};
  detail::TreeEnumerator en{cols, questions, min_leaf_grow, cap, produced};

  TreeCandidateSet out;
  out.trees.push_back({make_leaf(ds.n())});
  en.bump(1);

  auto enumerate_root_split = [&](std::size_t qi) {
    std::vector<TaxonomicTree> produced_here;
    std::vector<std::uint32_t> no_side, yes_side;
    for (auto r : everyone) ((*cols[qi])[r] ? yes_side : no_side).push_back(r);
    if (no_side.size() < min_leaf_grow || yes_side.size() < min_leaf_grow)
      return produced_here;
    const std::uint32_t remaining = all_avail & ~(1u << qi);
    const auto no_trees = en.enumerate(no_side, remaining);
    const auto yes_trees = en.enumerate(yes_side, remaining);
    for (const auto& nt : no_trees)
      for (const auto& yt : yes_trees) {
        produced_here.push_back({make_split(questions[qi], nt, yt)});
        en.bump(1);
      }
    return produced_here;
  };

  if (threads <= 1 || questions.size() < 2) {
    for (std::size_t qi = 0; qi < questions.size(); ++qi) {
      auto trees = enumerate_root_split(qi);
      out.trees.insert(out.trees.end(), trees.begin(), trees.end());
    }
  } else {
    std::vector<std::future<std::vector<TaxonomicTree>>> futures;
    futures.reserve(questions.size());
    for (std::size_t qi = 0; qi < questions.size(); ++qi)
      futures.push_back(std::async(std::launch::async, enumerate_root_split, qi));
    for (auto& f : futures) {
      auto trees = f.get();
      out.trees.insert(out.trees.end(), trees.begin(), trees.end());
    }
  }

  out.stage_counts.enumerated = out.trees.size();
  return out;
}

// Applies the three candidate filters in order: leaf-size lower bound, leaf-size
// upper bound, split-question exclusion. Tallies survivors after each stage.
inline TreeCandidateSet filter_trees(const TreeCandidateSet& cands, const TreeConstraints& c) {
  TreeCandidateSet out;
  out.stage_counts = cands.stage_counts;

  std::vector<TaxonomicTree> stage;
  for (const auto& t : cands.trees) {
    const auto counts = t.leaf_counts();
    if (std::all_of(counts.begin(), counts.end(),
                    [&](std::size_t k) { return k >= c.min_leaf_filter; }))
      stage.push_back(t);
  }
  out.stage_counts.after_min_leaf = stage.size();

  std::vector<TaxonomicTree> stage2;
  for (const auto& t : stage) {
    const auto counts = t.leaf_counts();
    if (std::all_of(counts.begin(), counts.end(),
                    [&](std::size_t k) { return k <= c.max_leaf_filter; }))
      stage2.push_back(t);
  }
  out.stage_counts.after_max_leaf = stage2.size();

  for (const auto& t : stage2) {
    const auto splits = t.split_questions_preorder();
    if (std::none_of(splits.begin(), splits.end(),
                     [&](const std::string& q) { return c.excluded_questions.count(q) > 0; }))
      out.trees.push_back(t);
  }
  out.stage_counts.after_exclusion = out.trees.size();

  if (out.trees.empty()) {
    throw NumericError(
        "filter_trees: no candidate survives (enumerated " +
        std::to_string(out.stage_counts.enumerated) + ", after min-leaf " +
        std::to_string(out.stage_counts.after_min_leaf) + ", after max-leaf " +
        std::to_string(out.stage_counts.after_max_leaf) + ", after exclusion 0)");
  }
  return out;
}

// The tree with the most evenly sized leaves: minimum population variance of leaf
// counts, ties broken by fewer leaves, then by the preorder split-question sequence.
inline TaxonomicTree select_tree(const TreeCandidateSet& cands) {
  if (cands.trees.empty()) throw DataError("select_tree: empty candidate set");
  const TaxonomicTree* best = nullptr;
  double best_var = 0.0;
  std::vector<std::string> best_splits;
  for (const auto& t : cands.trees) {
    const double v = t.leaf_variance();
    const auto splits = t.split_questions_preorder();
    bool better = false;
    if (!best) {
      better = true;
    } else if (v != best_var) {
      better = v < best_var;
    } else if (t.root->leaf_count != best->root->leaf_count) {
      better = t.root->leaf_count < best->root->leaf_count;
    } else {
      better = splits < best_splits;
    }
    if (better) {
      best = &t;
      best_var = v;
      best_splits = splits;
    }
  }
  return *best;
}

// Routes one respondent from the root to a leaf and returns its label (T1..Tm,
// numbered in preorder with the No side first).
template <class AnswerFn>
inline std::string route_to_leaf(const TaxonomicTree& tree, AnswerFn&& answer) {
  TreePtr node = tree.root;
  std::size_t skipped_leaves = 0;
  while (!node->is_leaf()) {
    if (answer(node->question)) {
      skipped_leaves += node->no_child->leaf_count;
      node = node->yes_child;
    } else {
      node = node->no_child;
    }
  }
  return "T" + std::to_string(skipped_leaves + 1);
}

inline std::string assign_tree_class(const SurveyDataset& ds, std::size_t row,
                                     const TaxonomicTree& tree) {
  return route_to_leaf(tree, [&](const std::string& q) { return ds.binary(q)[row] != 0; });
}

}  // namespace typogen
