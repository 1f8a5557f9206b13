#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cubicml/space.hpp"

namespace cubicml {

struct GbdtConfig {
  std::uint32_t trees = 300;
  double shrinkage = 0.1;
  std::uint32_t max_depth = 3;
  std::uint32_t min_leaf = 2;
};

// Gradient-boosted regression trees over mixed-encoded rows (numeric slots
// split on thresholds, categorical slots on one-vs-rest equality).  Fitting
// is exact greedy and fully deterministic; the seed parameter is accepted for
// interface uniformity but never consulted.
class GbdtModel {
 public:
  struct Node {
    std::int32_t slot = -1;  // -1 marks a leaf
    bool categorical = false;
    double split = 0.0;  // threshold (x <= split goes left) or category id
    std::int32_t left = -1;
    std::int32_t right = -1;
    double value = 0.0;  // leaf output
  };
  struct Tree {
    std::vector<Node> nodes;
  };

  static GbdtModel fit(const std::vector<std::vector<double>>& rows,
                       const std::vector<double>& targets,
                       const MixedLayout& layout, const GbdtConfig& config,
                       std::uint64_t seed);

  static GbdtModel from_parts(double base, double shrinkage,
                              std::vector<SlotKind> slot_kinds,
                              std::vector<Tree> trees);

  double predict(std::span<const double> row) const;
  // Uses only the first `trees` boosting stages; predict_prefix(row, 0)
  // returns the base value.
  double predict_prefix(std::span<const double> row, std::size_t trees) const;

  std::size_t tree_count() const { return trees_.size(); }
  double base_value() const { return base_; }
  double shrinkage() const { return shrinkage_; }
  const std::vector<Tree>& trees() const { return trees_; }
  const std::vector<SlotKind>& slot_kinds() const { return slot_kinds_; }

 private:
  GbdtModel() = default;

  double base_ = 0.0;
  double shrinkage_ = 0.1;
  std::vector<SlotKind> slot_kinds_;
  std::vector<Tree> trees_;
};

}  // namespace cubicml
