#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qrfcast/error_model.hpp"
#include "qrfcast/errors.hpp"
#include "qrfcast/parallel.hpp"
#include "qrfcast/quantile_vector.hpp"
#include "qrfcast/random.hpp"

namespace qrfcast {

struct ForestConfig {
  int num_trees = 250;
  int mtry = 1;
  int min_node_size = 1;
  int sample_count = 128;
  std::uint64_t seed = 42;
  bool replace = false;

  static constexpr int kNumCovariates = 2;

  void validate(std::size_t rows) const {
    if (num_trees < 1) throw ConfigError("num_trees must be positive");
    if (mtry < 1 || mtry > kNumCovariates) throw ConfigError("mtry must be in [1, 2]");
    if (min_node_size < 1) throw ConfigError("min_node_size must be positive");
    if (sample_count < 1) throw ConfigError("sample_count must be positive");
    if (!replace && static_cast<std::size_t>(sample_count) > rows) {
      throw DataError("sample_count " + std::to_string(sample_count) + " exceeds training rows (" +
                      std::to_string(rows) + ") when sampling without replacement");
    }
  }

  bool operator==(const ForestConfig &) const = default;
};

struct CovariateVector {
  int lead_hours = 0;
  std::string model_label;
};

enum class Covariate : std::int8_t { leaf = -1, lead_hours = 0, model_label = 1 };

/// Internal nodes route a query left when lead_hours < threshold, or when the
/// query's category is flagged in the node's category mask. Leaves reference a
/// range of in-bag row indices (duplicates allowed when sampling with replacement).
struct TreeNode {
  Covariate covariate = Covariate::leaf;
  double threshold = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint32_t mask_offset = 0;
  std::uint32_t leaf_begin = 0;
  std::uint32_t leaf_end = 0;

  bool is_leaf() const { return covariate == Covariate::leaf; }
  bool operator==(const TreeNode &) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;
  std::vector<std::uint32_t> leaf_rows;
  std::vector<std::uint8_t> category_masks;

  bool operator==(const Tree &) const = default;
};

/// Per-lead-hour out-of-bag interval coverage.
struct OobCoverageRow {
  int lead_hours = 0;
  std::size_t rows = 0;
  std::vector<std::size_t> hits;  // one per interval width

  /// Absent when no out-of-bag row exists at this lead hour.
  std::optional<double> coverage(std::size_t interval) const {
    if (rows == 0) return std::nullopt;
    return static_cast<double>(hits[interval]) / static_cast<double>(rows);
  }
};

struct OobCoverage {
  std::vector<double> widths;
  std::vector<OobCoverageRow> by_lead;  // ascending lead hours
  std::size_t skipped_all_in_bag = 0;

  /// Pools lead hours into bins of `bin_hours`.
  std::vector<OobCoverageRow> binned(int bin_hours) const {
    std::map<int, OobCoverageRow> bins;
    for (const auto &r : by_lead) {
      // The last bin is closed so lead 168 pools with [144, 168).
      const int start = std::min(r.lead_hours / bin_hours, (kMaxLeadHours - 1) / bin_hours) * bin_hours;
      auto &b = bins[start];
      b.lead_hours = start;
      b.hits.resize(widths.size(), 0);
      b.rows += r.rows;
      for (std::size_t i = 0; i < widths.size(); ++i) b.hits[i] += r.hits[i];
    }
    std::vector<OobCoverageRow> out;
    for (auto &[start, row] : bins) out.push_back(row);
    return out;
  }
};

namespace detail {

struct SplitCandidate {
  double score = -1.0;  // sum over children of (sum of responses)^2 / size; larger is better
  Covariate covariate = Covariate::leaf;
  double threshold = 0.0;
  std::vector<std::uint8_t> mask;
};

inline bool better_split(const SplitCandidate &c, const SplitCandidate &best) {
  if (best.covariate == Covariate::leaf) return true;
  if (c.score != best.score) return c.score > best.score;
  if (c.covariate != best.covariate) return c.covariate < best.covariate;
  return c.threshold < best.threshold;
}

}  // namespace detail

/// Quantile regression forest over (lead_hours, model_label).
class Forest {
 public:
  Forest() = default;

  /// Grows config.num_trees trees, each on its own seeded subsample of the table.
  static Forest train(const ErrorTable &table, const ForestConfig &config, int jobs = 1) {
    if (table.rows.empty()) throw DataError("cannot train a forest on an empty error table");
    config.validate(table.rows.size());

    Forest forest;
    forest.config_ = config;
    forest.labels_ = table.label_set;
    if (forest.labels_.empty()) {
      ErrorTable copy = table;
      copy.rebuild_label_set();
      forest.labels_ = copy.label_set;
    }
    std::sort(forest.labels_.begin(), forest.labels_.end());
    forest.labels_.erase(std::unique(forest.labels_.begin(), forest.labels_.end()), forest.labels_.end());
    forest.leads_.reserve(table.rows.size());
    forest.categories_.reserve(table.rows.size());
    forest.errors_.reserve(table.rows.size());
    for (const auto &row : table.rows) {
      const auto cat = forest.category_of(row.model_label);
      if (!cat) throw DataError("error table row label '" + row.model_label + "' missing from label set");
      if (!std::isfinite(row.error)) throw DataError("non-finite error in training table");
      forest.leads_.push_back(row.lead_hours);
      forest.categories_.push_back(*cat);
      forest.errors_.push_back(row.error);
    }

    forest.trees_.resize(static_cast<std::size_t>(config.num_trees));
    parallel_for(forest.trees_.size(), jobs, [&](std::size_t t) { forest.trees_[t] = forest.grow_tree(t); });
    return forest;
  }

  const ForestConfig &config() const { return config_; }
  const std::vector<Tree> &trees() const { return trees_; }
  const std::vector<std::string> &labels() const { return labels_; }
  std::size_t num_rows() const { return errors_.size(); }
  double row_error(std::size_t i) const { return errors_[i]; }

  std::optional<std::uint32_t> category_of(const std::string &label) const {
    auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it == labels_.end() || *it != label) return std::nullopt;
    return static_cast<std::uint32_t>(it - labels_.begin());
  }

  bool knows_label(const std::string &label) const { return category_of(label).has_value(); }

  /// Meinshausen weights: average over trees of in-bag leaf co-membership / leaf size.
  std::vector<double> predict_weights(const CovariateVector &x) const {
    const auto cat = require_category(x.model_label);
    std::vector<double> weights(errors_.size(), 0.0);
    const double per_tree = 1.0 / static_cast<double>(trees_.size());
    for (const auto &tree : trees_) {
      const auto &leaf = tree.nodes[find_leaf(tree, x.lead_hours, cat)];
      const double w = per_tree / static_cast<double>(leaf.leaf_end - leaf.leaf_begin);
      for (auto i = leaf.leaf_begin; i < leaf.leaf_end; ++i) weights[tree.leaf_rows[i]] += w;
    }
    return weights;
  }

  /// Weighted empirical quantiles of the training errors under predict_weights(x).
  QuantileVector predict_quantiles(const CovariateVector &x, std::span<const double> levels) const {
    check_levels(levels);
    const auto cat = require_category(x.model_label);
    std::vector<std::pair<double, double>> entries;
    const double per_tree = 1.0 / static_cast<double>(trees_.size());
    for (const auto &tree : trees_) append_leaf(tree, find_leaf(tree, x.lead_hours, cat), per_tree, entries);
    return quantiles_from_entries(entries, levels);
  }

  /// Out-of-bag central-interval coverage per lead hour. Each row is predicted
  /// only from trees whose subsample excluded it.
  OobCoverage oob_coverage(const ErrorTable &table, std::span<const double> widths) const {
    if (table.rows.size() != errors_.size()) throw std::invalid_argument("oob_coverage: table does not match forest");
    std::vector<double> levels;
    for (double w : widths) {
      if (!(w > 0.0 && w < 1.0)) throw std::invalid_argument("interval width must be in (0,1)");
      levels.push_back((1.0 - w) / 2.0);
      levels.push_back((1.0 + w) / 2.0);
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    auto level_index = [&](double p) {
      return static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), p) - levels.begin());
    };

    // Trees in which each row is in-bag.
    std::vector<std::vector<std::uint32_t>> in_bag(errors_.size());
    for (std::uint32_t t = 0; t < trees_.size(); ++t) {
      std::vector<std::uint32_t> rows(trees_[t].leaf_rows);
      std::sort(rows.begin(), rows.end());
      rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
      for (auto r : rows) in_bag[r].push_back(t);
    }

    // Leaf reached by each distinct covariate combination in each tree.
    std::map<std::pair<int, std::uint32_t>, std::size_t> combo_ids;
    std::vector<std::size_t> row_combo(errors_.size());
    for (std::size_t i = 0; i < errors_.size(); ++i) {
      auto [it, inserted] = combo_ids.emplace(std::pair{leads_[i], categories_[i]}, combo_ids.size());
      row_combo[i] = it->second;
    }
    std::vector<std::vector<std::uint32_t>> combo_leaf(combo_ids.size(), std::vector<std::uint32_t>(trees_.size()));
    for (const auto &[combo, id] : combo_ids) {
      for (std::size_t t = 0; t < trees_.size(); ++t) {
        combo_leaf[id][t] = find_leaf(trees_[t], combo.first, combo.second);
      }
    }

    auto oob_quantiles = [&](std::size_t combo, std::span<const std::uint32_t> excluded) {
      std::vector<std::pair<double, double>> entries;
      const double per_tree = 1.0 / static_cast<double>(trees_.size() - excluded.size());
      std::size_t e = 0;
      for (std::uint32_t t = 0; t < trees_.size(); ++t) {
        if (e < excluded.size() && excluded[e] == t) {
          ++e;
          continue;
        }
        append_leaf(trees_[t], combo_leaf[combo][t], per_tree, entries);
      }
      return quantiles_from_entries(entries, levels);
    };

    std::vector<std::optional<QuantileVector>> combo_cache(combo_ids.size());
    OobCoverage out;
    out.widths.assign(widths.begin(), widths.end());
    std::map<int, OobCoverageRow> per_lead;
    for (std::size_t i = 0; i < errors_.size(); ++i) {
      auto &row = per_lead[leads_[i]];
      row.lead_hours = leads_[i];
      row.hits.resize(widths.size(), 0);
      if (in_bag[i].size() == trees_.size()) {
        ++out.skipped_all_in_bag;
        continue;
      }
      QuantileVector q;
      if (in_bag[i].empty()) {
        auto &cached = combo_cache[row_combo[i]];
        if (!cached) cached = oob_quantiles(row_combo[i], {});
        q = *cached;
      } else {
        q = oob_quantiles(row_combo[i], in_bag[i]);
      }
      ++row.rows;
      for (std::size_t w = 0; w < widths.size(); ++w) {
        const double lo = q.values[level_index((1.0 - widths[w]) / 2.0)];
        const double hi = q.values[level_index((1.0 + widths[w]) / 2.0)];
        if (errors_[i] >= lo && errors_[i] <= hi) ++row.hits[w];
      }
    }
    for (auto &[lead, row] : per_lead) out.by_lead.push_back(std::move(row));
    return out;
  }

  bool operator==(const Forest &) const = default;

  // Versioned text format; doubles are written as hex floats so reloads are bit-exact.
  void save(std::ostream &out) const {
    out << "qrfcast-forest 1\n";
    out << "config " << config_.num_trees << ' ' << config_.mtry << ' ' << config_.min_node_size << ' '
        << config_.sample_count << ' ' << config_.seed << ' ' << (config_.replace ? 1 : 0) << '\n';
    out << "labels " << labels_.size() << '\n';
    for (const auto &l : labels_) out << l << '\n';
    out << "rows " << errors_.size() << '\n';
    for (std::size_t i = 0; i < errors_.size(); ++i) {
      out << leads_[i] << ' ' << categories_[i] << ' ' << hex(errors_[i]) << '\n';
    }
    out << "trees " << trees_.size() << '\n';
    for (const auto &tree : trees_) {
      out << "tree " << tree.nodes.size() << ' ' << tree.leaf_rows.size() << ' ' << tree.category_masks.size() << '\n';
      for (const auto &n : tree.nodes) {
        if (n.is_leaf()) {
          out << "L " << n.leaf_begin << ' ' << n.leaf_end << '\n';
        } else {
          out << "N " << static_cast<int>(n.covariate) << ' ' << hex(n.threshold) << ' ' << n.left << ' ' << n.right
              << ' ' << n.mask_offset << '\n';
        }
      }
      for (std::size_t i = 0; i < tree.leaf_rows.size(); ++i) out << (i ? " " : "") << tree.leaf_rows[i];
      out << '\n';
      for (auto m : tree.category_masks) out << static_cast<char>('0' + m);
      out << '\n';
    }
    out << "end\n";
  }

  static Forest load(std::istream &in) {
    auto fail = [](const std::string &why) -> DataError { return DataError("invalid forest file: " + why); };
    std::string word;
    int version = 0;
    if (!(in >> word >> version) || word != "qrfcast-forest" || version != 1) throw fail("bad header");
    Forest f;
    int replace = 0;
    if (!(in >> word) || word != "config" ||
        !(in >> f.config_.num_trees >> f.config_.mtry >> f.config_.min_node_size >> f.config_.sample_count >>
          f.config_.seed >> replace)) {
      throw fail("bad config line");
    }
    f.config_.replace = replace != 0;
    std::size_t count = 0;
    if (!(in >> word >> count) || word != "labels") throw fail("bad labels line");
    std::getline(in, word);
    f.labels_.resize(count);
    for (auto &l : f.labels_) {
      if (!std::getline(in, l)) throw fail("truncated labels");
    }
    if (!(in >> word >> count) || word != "rows") throw fail("bad rows line");
    f.leads_.resize(count);
    f.categories_.resize(count);
    f.errors_.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
      std::string e;
      if (!(in >> f.leads_[i] >> f.categories_[i] >> e)) throw fail("truncated rows");
      f.errors_[i] = unhex(e);
    }
    if (!(in >> word >> count) || word != "trees") throw fail("bad trees line");
    f.trees_.resize(count);
    for (auto &tree : f.trees_) {
      std::size_t nodes = 0, leaf_rows = 0, masks = 0;
      if (!(in >> word >> nodes >> leaf_rows >> masks) || word != "tree") throw fail("bad tree header");
      tree.nodes.resize(nodes);
      for (auto &n : tree.nodes) {
        if (!(in >> word)) throw fail("truncated nodes");
        if (word == "L") {
          in >> n.leaf_begin >> n.leaf_end;
        } else if (word == "N") {
          int cov = 0;
          std::string thr;
          in >> cov >> thr >> n.left >> n.right >> n.mask_offset;
          n.covariate = static_cast<Covariate>(cov);
          n.threshold = unhex(thr);
        } else {
          throw fail("bad node kind");
        }
      }
      tree.leaf_rows.resize(leaf_rows);
      for (auto &r : tree.leaf_rows) in >> r;
      std::string mask_text;
      if (masks > 0) in >> mask_text;
      if (mask_text.size() != masks) throw fail("bad category masks");
      tree.category_masks.resize(masks);
      for (std::size_t i = 0; i < masks; ++i) tree.category_masks[i] = static_cast<std::uint8_t>(mask_text[i] - '0');
      if (!in) throw fail("truncated tree");
    }
    if (!(in >> word) || word != "end") throw fail("missing end marker");
    return f;
  }

 private:
  static std::string hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
  }
  static double unhex(const std::string &s) { return std::strtod(s.c_str(), nullptr); }

  static void check_levels(std::span<const double> levels) {
    if (levels.empty()) throw std::invalid_argument("predict_quantiles: empty level list");
    for (std::size_t i = 0; i < levels.size(); ++i) {
      if (!(levels[i] > 0.0 && levels[i] < 1.0)) throw std::invalid_argument("quantile level outside (0,1)");
      if (i > 0 && !(levels[i] > levels[i - 1])) throw std::invalid_argument("quantile levels not increasing");
    }
  }

  std::uint32_t require_category(const std::string &label) const {
    const auto cat = category_of(label);
    if (!cat) throw std::invalid_argument("model label '" + label + "' was not seen in training");
    return *cat;
  }

  std::uint32_t find_leaf(const Tree &tree, int lead, std::uint32_t cat) const {
    std::uint32_t node = 0;
    while (!tree.nodes[node].is_leaf()) {
      const auto &n = tree.nodes[node];
      const bool go_left = n.covariate == Covariate::lead_hours ? static_cast<double>(lead) < n.threshold
                                                                 : tree.category_masks[n.mask_offset + cat] != 0;
      node = go_left ? n.left : n.right;
    }
    return node;
  }

  void append_leaf(const Tree &tree, std::uint32_t leaf_id, double tree_weight,
                   std::vector<std::pair<double, double>> &entries) const {
    const auto &leaf = tree.nodes[leaf_id];
    const double w = tree_weight / static_cast<double>(leaf.leaf_end - leaf.leaf_begin);
    for (auto i = leaf.leaf_begin; i < leaf.leaf_end; ++i) entries.emplace_back(errors_[tree.leaf_rows[i]], w);
  }

  static QuantileVector quantiles_from_entries(std::vector<std::pair<double, double>> &entries,
                                               std::span<const double> levels) {
    std::sort(entries.begin(), entries.end());
    QuantileVector out{std::vector<double>(levels.begin(), levels.end()), std::vector<double>(levels.size())};
    double cum = 0.0;
    std::size_t e = 0;
    for (std::size_t k = 0; k < levels.size(); ++k) {
      while (e < entries.size() && cum + entries[e].second < levels[k] - 1e-12) cum += entries[e++].second;
      out.values[k] = entries[std::min(e, entries.size() - 1)].first;
    }
    return out;
  }

  Tree grow_tree(std::size_t tree_index) const {
    RandomStream rng = RandomStream::derived(config_.seed, tree_index);
    const std::size_t n_rows = errors_.size();
    const auto n_sample = static_cast<std::size_t>(config_.sample_count);

    std::vector<std::uint32_t> sample;
    sample.reserve(n_sample);
    if (config_.replace) {
      for (std::size_t i = 0; i < n_sample; ++i) sample.push_back(static_cast<std::uint32_t>(rng.below(n_rows)));
    } else {
      std::vector<std::uint32_t> pool(n_rows);
      std::iota(pool.begin(), pool.end(), 0u);
      for (std::size_t i = 0; i < n_sample; ++i) {
        const auto j = i + rng.below(n_rows - i);
        std::swap(pool[i], pool[j]);
        sample.push_back(pool[i]);
      }
    }
    std::sort(sample.begin(), sample.end());

    Tree tree;
    struct Pending {
      std::uint32_t node;
      std::size_t begin;
      std::size_t end;
    };
    tree.nodes.emplace_back();
    std::vector<Pending> stack{{0, 0, sample.size()}};
    while (!stack.empty()) {
      const Pending p = stack.back();
      stack.pop_back();
      std::span<std::uint32_t> rows(sample.data() + p.begin, p.end - p.begin);
      auto split = find_split(rows, rng);
      if (!split) {
        auto &leaf = tree.nodes[p.node];
        leaf.covariate = Covariate::leaf;
        leaf.leaf_begin = static_cast<std::uint32_t>(tree.leaf_rows.size());
        tree.leaf_rows.insert(tree.leaf_rows.end(), rows.begin(), rows.end());
        leaf.leaf_end = static_cast<std::uint32_t>(tree.leaf_rows.size());
        continue;
      }
      auto goes_left = [&](std::uint32_t r) {
        return split->covariate == Covariate::lead_hours ? static_cast<double>(leads_[r]) < split->threshold
                                                         : split->mask[categories_[r]] != 0;
      };
      const auto mid = std::stable_partition(rows.begin(), rows.end(), goes_left) - rows.begin();

      TreeNode node;
      node.covariate = split->covariate;
      node.threshold = split->threshold;
      if (split->covariate == Covariate::model_label) {
        node.mask_offset = static_cast<std::uint32_t>(tree.category_masks.size());
        tree.category_masks.insert(tree.category_masks.end(), split->mask.begin(), split->mask.end());
      }
      node.left = static_cast<std::uint32_t>(tree.nodes.size());
      node.right = node.left + 1;
      tree.nodes[p.node] = node;
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      stack.push_back({node.right, p.begin + static_cast<std::size_t>(mid), p.end});
      stack.push_back({node.left, p.begin, p.begin + static_cast<std::size_t>(mid)});
    }
    return tree;
  }

  // Best variance-reducing split, or nothing when the node must become a leaf.
  // Candidate covariates are visited in random order; constant covariates are
  // skipped and do not count against mtry.
  std::optional<detail::SplitCandidate> find_split(std::span<const std::uint32_t> rows, RandomStream &rng) const {
    const auto n = rows.size();
    const auto min_size = static_cast<std::size_t>(config_.min_node_size);
    if (n < 2 * min_size) return std::nullopt;
    const double first = errors_[rows[0]];
    if (std::all_of(rows.begin(), rows.end(), [&](std::uint32_t r) { return errors_[r] == first; })) {
      return std::nullopt;
    }

    std::array<Covariate, 2> order{Covariate::lead_hours, Covariate::model_label};
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

    detail::SplitCandidate best;
    int tried = 0;
    for (const auto cov : order) {
      if (tried >= config_.mtry) break;
      const bool evaluated = cov == Covariate::lead_hours ? best_lead_split(rows, min_size, best)
                                                          : best_label_split(rows, min_size, best);
      if (evaluated) ++tried;
    }
    if (best.covariate == Covariate::leaf) return std::nullopt;
    return best;
  }

  // Returns false when lead_hours is constant in the node.
  bool best_lead_split(std::span<const std::uint32_t> rows, std::size_t min_size, detail::SplitCandidate &best) const {
    std::vector<std::pair<int, double>> sorted;
    sorted.reserve(rows.size());
    for (auto r : rows) sorted.emplace_back(leads_[r], errors_[r]);
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front().first == sorted.back().first) return false;

    double total = 0.0;
    for (const auto &s : sorted) total += s.second;
    const auto n = sorted.size();
    double left_sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_sum += sorted[i].second;
      if (sorted[i].first == sorted[i + 1].first) continue;
      const std::size_t n_left = i + 1;
      const std::size_t n_right = n - n_left;
      if (n_left < min_size || n_right < min_size) continue;
      const double right_sum = total - left_sum;
      detail::SplitCandidate c;
      c.score = left_sum * left_sum / static_cast<double>(n_left) + right_sum * right_sum / static_cast<double>(n_right);
      c.covariate = Covariate::lead_hours;
      c.threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
      if (detail::better_split(c, best)) best = std::move(c);
    }
    return true;
  }

  // Categories are ordered by their mean response in the node and split as if ordinal.
  // Returns false when only one category is present.
  bool best_label_split(std::span<const std::uint32_t> rows, std::size_t min_size, detail::SplitCandidate &best) const {
    std::map<std::uint32_t, std::pair<double, std::size_t>> stats;
    for (auto r : rows) {
      auto &s = stats[categories_[r]];
      s.first += errors_[r];
      s.second += 1;
    }
    if (stats.size() < 2) return false;

    struct Cat {
      std::uint32_t id;
      double mean;
      double sum;
      std::size_t count;
    };
    std::vector<Cat> cats;
    for (const auto &[id, s] : stats) cats.push_back({id, s.first / static_cast<double>(s.second), s.first, s.second});
    std::stable_sort(cats.begin(), cats.end(), [](const Cat &a, const Cat &b) { return a.mean < b.mean; });

    double total = 0.0;
    for (const auto &c : cats) total += c.sum;
    const auto n = rows.size();
    double left_sum = 0.0;
    std::size_t n_left = 0;
    for (std::size_t j = 0; j + 1 < cats.size(); ++j) {
      left_sum += cats[j].sum;
      n_left += cats[j].count;
      const std::size_t n_right = n - n_left;
      if (n_left < min_size || n_right < min_size) continue;
      const double right_sum = total - left_sum;
      detail::SplitCandidate c;
      c.score = left_sum * left_sum / static_cast<double>(n_left) + right_sum * right_sum / static_cast<double>(n_right);
      c.covariate = Covariate::model_label;
      c.threshold = static_cast<double>(j + 1);
      if (detail::better_split(c, best)) {
        c.mask.assign(labels_.size(), 0);
        for (std::size_t k = 0; k <= j; ++k) c.mask[cats[k].id] = 1;
        best = std::move(c);
      }
    }
    return true;
  }

  ForestConfig config_;
  std::vector<Tree> trees_;
  std::vector<std::string> labels_;
  std::vector<int> leads_;
  std::vector<std::uint32_t> categories_;
  std::vector<double> errors_;
};

}  // namespace qrfcast
