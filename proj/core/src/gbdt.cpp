#include "cubicml/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#include "cubicml/errors.hpp"

namespace cubicml {

namespace {

struct SplitChoice {
  bool found = false;
  std::uint32_t slot = 0;
  bool categorical = false;
  double split = 0.0;
  double score = 0.0;
};

// Score of a candidate partition: sum_left^2/n_left + sum_right^2/n_right.
// The parent's squared-error term is constant across candidates, so
// maximizing this is maximizing variance reduction.
double partition_score(double sum_left, std::size_t n_left, double sum_right,
                       std::size_t n_right) {
  return sum_left * sum_left / static_cast<double>(n_left) +
         sum_right * sum_right / static_cast<double>(n_right);
}

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& rows,
              const std::vector<SlotKind>& kinds, const GbdtConfig& config)
      : rows_(rows), kinds_(kinds), config_(config) {}

  GbdtModel::Tree build(const std::vector<double>& residuals) {
    residuals_ = &residuals;
    tree_.nodes.clear();
    std::vector<std::uint32_t> all(rows_.size());
    std::iota(all.begin(), all.end(), 0u);
    grow(all, 0);
    return std::move(tree_);
  }

 private:
  std::int32_t grow(std::vector<std::uint32_t>& members, std::uint32_t depth) {
    const std::int32_t self = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    double sum = 0.0;
    for (std::uint32_t idx : members) sum += (*residuals_)[idx];
    const double mean = sum / static_cast<double>(members.size());

    SplitChoice choice;
    if (depth < config_.max_depth && members.size() >= 2 * config_.min_leaf) {
      choice = best_split(members, sum);
    }
    if (!choice.found) {
      tree_.nodes[self].value = mean;
      return self;
    }

    std::vector<std::uint32_t> left, right;
    left.reserve(members.size());
    right.reserve(members.size());
    for (std::uint32_t idx : members) {
      if (goes_left(rows_[idx][choice.slot], choice)) {
        left.push_back(idx);
      } else {
        right.push_back(idx);
      }
    }
    members.clear();
    members.shrink_to_fit();

    tree_.nodes[self].slot = static_cast<std::int32_t>(choice.slot);
    tree_.nodes[self].categorical = choice.categorical;
    tree_.nodes[self].split = choice.split;
    const std::int32_t l = grow(left, depth + 1);
    tree_.nodes[self].left = l;
    const std::int32_t r = grow(right, depth + 1);
    tree_.nodes[self].right = r;
    return self;
  }

  static bool goes_left(double value, const SplitChoice& choice) {
    return choice.categorical ? value == choice.split : value <= choice.split;
  }

  // Scans slots in ascending order and candidates in ascending value order,
  // accepting only strict improvements, so ties resolve to the lowest slot
  // and lowest threshold.
  SplitChoice best_split(const std::vector<std::uint32_t>& members,
                         double total_sum) const {
    SplitChoice best;
    best.score = total_sum * total_sum / static_cast<double>(members.size());
    const std::size_t n = members.size();

    std::vector<std::pair<double, double>> column(n);  // (value, residual)
    for (std::uint32_t slot = 0; slot < kinds_.size(); ++slot) {
      for (std::size_t i = 0; i < n; ++i) {
        column[i] = {rows_[members[i]][slot], (*residuals_)[members[i]]};
      }
      std::sort(column.begin(), column.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });

      if (kinds_[slot] == SlotKind::numeric) {
        double left_sum = column[0].second;
        for (std::size_t i = 1; i < n; ++i) {
          if (column[i].first > column[i - 1].first && i >= config_.min_leaf &&
              n - i >= config_.min_leaf) {
            const double threshold =
                column[i - 1].first + (column[i].first - column[i - 1].first) / 2.0;
            const double score =
                partition_score(left_sum, i, total_sum - left_sum, n - i);
            if (score > best.score) {
              best.found = true;
              best.slot = slot;
              best.categorical = false;
              best.split = threshold;
              best.score = score;
            }
          }
          left_sum += column[i].second;
        }
      } else {
        std::size_t run_start = 0;
        double run_sum = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
          if (i < n && column[i].first == column[run_start].first) {
            run_sum += column[i].second;
            continue;
          }
          const std::size_t run_len = i - run_start;
          if (run_len >= config_.min_leaf && n - run_len >= config_.min_leaf) {
            const double score = partition_score(run_sum, run_len,
                                                 total_sum - run_sum, n - run_len);
            if (score > best.score) {
              best.found = true;
              best.slot = slot;
              best.categorical = true;
              best.split = column[run_start].first;
              best.score = score;
            }
          }
          if (i < n) {
            run_start = i;
            run_sum = column[i].second;
          }
        }
      }
    }
    return best;
  }

  const std::vector<std::vector<double>>& rows_;
  const std::vector<SlotKind>& kinds_;
  const GbdtConfig& config_;
  const std::vector<double>* residuals_ = nullptr;
  GbdtModel::Tree tree_;
};

double tree_output(const GbdtModel::Tree& tree, std::span<const double> row) {
  std::int32_t node = 0;
  while (tree.nodes[static_cast<std::size_t>(node)].slot >= 0) {
    const auto& n = tree.nodes[static_cast<std::size_t>(node)];
    const double v = row[static_cast<std::size_t>(n.slot)];
    const bool left = n.categorical ? v == n.split : v <= n.split;
    node = left ? n.left : n.right;
  }
  return tree.nodes[static_cast<std::size_t>(node)].value;
}

}  // namespace

GbdtModel GbdtModel::fit(const std::vector<std::vector<double>>& rows,
                         const std::vector<double>& targets,
                         const MixedLayout& layout, const GbdtConfig& config,
                         [[maybe_unused]] std::uint64_t seed) {
  if (rows.size() != targets.size()) {
    throw ValidationError("gbdt fit: row/target count mismatch");
  }
  if (rows.empty()) throw DataError("gbdt fit: empty training set");
  if (config.min_leaf == 0) {
    throw ValidationError("gbdt fit: min_leaf must be positive");
  }
  if (!(config.shrinkage > 0.0)) {
    throw ValidationError("gbdt fit: shrinkage must be positive");
  }
  const std::size_t width = layout.slots.size();
  for (const auto& row : rows) {
    if (row.size() != width) {
      throw ValidationError("gbdt fit: row width does not match layout");
    }
    for (double v : row) {
      if (!std::isfinite(v)) throw DataError("gbdt fit: non-finite feature");
    }
  }
  for (double t : targets) {
    if (!std::isfinite(t)) throw DataError("gbdt fit: non-finite target");
  }

  GbdtModel model;
  model.shrinkage_ = config.shrinkage;
  model.slot_kinds_ = layout.slots;

  double sum = 0.0;
  for (double t : targets) sum += t;
  model.base_ = sum / static_cast<double>(targets.size());

  const double stop_below = 1e-12 * std::max(1.0, std::abs(model.base_));
  std::vector<double> residuals(targets.size());
  std::vector<double> predictions(targets.size(), model.base_);
  TreeBuilder builder(rows, model.slot_kinds_, config);

  for (std::uint32_t t = 0; t < config.trees; ++t) {
    double max_abs = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      residuals[i] = targets[i] - predictions[i];
      max_abs = std::max(max_abs, std::abs(residuals[i]));
    }
    if (max_abs <= stop_below) break;

    Tree tree = builder.build(residuals);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      predictions[i] += config.shrinkage * tree_output(tree, rows[i]);
    }
    model.trees_.push_back(std::move(tree));
  }
  return model;
}

GbdtModel GbdtModel::from_parts(double base, double shrinkage,
                                std::vector<SlotKind> slot_kinds,
                                std::vector<Tree> trees) {
  if (!(shrinkage > 0.0)) {
    throw ValidationError("gbdt: shrinkage must be positive");
  }
  for (const auto& tree : trees) {
    if (tree.nodes.empty()) throw ValidationError("gbdt: empty tree");
    for (const auto& node : tree.nodes) {
      if (node.slot >= 0) {
        if (static_cast<std::size_t>(node.slot) >= slot_kinds.size() ||
            node.left < 0 || node.right < 0 ||
            static_cast<std::size_t>(node.left) >= tree.nodes.size() ||
            static_cast<std::size_t>(node.right) >= tree.nodes.size()) {
          throw ValidationError("gbdt: malformed tree node");
        }
      }
    }
  }
  GbdtModel model;
  model.base_ = base;
  model.shrinkage_ = shrinkage;
  model.slot_kinds_ = std::move(slot_kinds);
  model.trees_ = std::move(trees);
  return model;
}

double GbdtModel::predict(std::span<const double> row) const {
  return predict_prefix(row, trees_.size());
}

double GbdtModel::predict_prefix(std::span<const double> row,
                                 std::size_t trees) const {
  if (row.size() != slot_kinds_.size()) {
    throw ValidationError("gbdt predict: row width does not match model");
  }
  if (trees > trees_.size()) {
    throw ValidationError("gbdt predict: prefix longer than model");
  }
  double out = base_;
  for (std::size_t t = 0; t < trees; ++t) {
    out += shrinkage_ * tree_output(trees_[t], row);
  }
  return out;
}

}  // namespace cubicml
