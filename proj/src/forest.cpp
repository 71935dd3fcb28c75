#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "araudit/error.hpp"
#include "araudit/model.hpp"
#include "araudit/rng.hpp"

namespace araudit {

namespace {

struct Split {
    std::int32_t feature = -1;
    double threshold = 0.0;
    double purity = -1.0; // sum over children of (p^2 + q^2) / size; larger is better
};

class TreeBuilder {
public:
    TreeBuilder(const LabeledDataset& data, std::size_t mtry, std::size_t max_depth, Rng& rng)
        : data_(data), n_(data.feature_count()), mtry_(mtry), max_depth_(max_depth), rng_(rng) {}

    DecisionTree build(std::vector<std::size_t> sample) {
        DecisionTree tree;
        tree.nodes.emplace_back();
        struct Pending {
            std::uint32_t node;
            std::vector<std::size_t> rows;
            std::size_t depth;
        };
        std::vector<Pending> stack;
        stack.push_back({0, std::move(sample), 0});

        while (!stack.empty()) {
            Pending job = std::move(stack.back());
            stack.pop_back();

            std::size_t pos = 0;
            for (std::size_t r : job.rows) pos += data_.label(r) == Label::Positive ? 1 : 0;
            const std::size_t neg = job.rows.size() - pos;
            tree.nodes[job.node].vote = pos > neg ? 1 : -1;

            const bool pure = pos == 0 || neg == 0;
            const bool depth_capped = max_depth_ != 0 && job.depth >= max_depth_;
            if (pure || depth_capped || job.rows.size() < 2) continue;

            const Split split = best_split(job.rows, pos, neg);
            if (split.feature < 0) continue;

            std::vector<std::size_t> left;
            std::vector<std::size_t> right;
            for (std::size_t r : job.rows) {
                (data_.row(r)[static_cast<std::size_t>(split.feature)] <= split.threshold ? left
                                                                                          : right)
                    .push_back(r);
            }
            const auto l = static_cast<std::uint32_t>(tree.nodes.size());
            tree.nodes.emplace_back();
            tree.nodes.emplace_back();
            auto& node = tree.nodes[job.node];
            node.feature = split.feature;
            node.threshold = split.threshold;
            node.left = l;
            node.right = l + 1;
            stack.push_back({l + 1, std::move(right), job.depth + 1});
            stack.push_back({l, std::move(left), job.depth + 1});
        }
        return tree;
    }

private:
    // Visits features in a random order until mtry non-constant ones have
    // been evaluated. Among equal purities the lowest feature index wins,
    // then the lowest threshold.
    Split best_split(const std::vector<std::size_t>& rows, std::size_t pos, std::size_t neg) {
        std::vector<std::size_t> order(n_);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::shuffle(order.begin(), order.end(), rng_);

        std::vector<std::size_t> candidates;
        std::vector<std::pair<double, Label>> column(rows.size());
        Split best;
        std::size_t evaluated = 0;
        for (std::size_t f : order) {
            if (evaluated == mtry_) break;
            for (std::size_t k = 0; k < rows.size(); ++k) {
                column[k] = {data_.row(rows[k])[f], data_.label(rows[k])};
            }
            std::sort(column.begin(), column.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (column.front().first == column.back().first) continue;
            ++evaluated;

            std::size_t lp = 0, ln = 0;
            for (std::size_t k = 0; k + 1 < column.size(); ++k) {
                (column[k].second == Label::Positive ? lp : ln) += 1;
                if (column[k].first == column[k + 1].first) continue;
                const auto left = static_cast<double>(lp + ln);
                const auto right = static_cast<double>(rows.size()) - left;
                const double rp = static_cast<double>(pos - lp);
                const double rn = static_cast<double>(neg - ln);
                const double purity =
                    (static_cast<double>(lp * lp + ln * ln)) / left + (rp * rp + rn * rn) / right;
                double threshold = 0.5 * (column[k].first + column[k + 1].first);
                if (threshold >= column[k + 1].first) threshold = column[k].first;

                const auto fi = static_cast<std::int32_t>(f);
                const bool better =
                    purity > best.purity ||
                    (purity == best.purity &&
                     (fi < best.feature || (fi == best.feature && threshold < best.threshold)));
                if (better) best = {fi, threshold, purity};
            }
        }
        // A split that leaves purity unchanged is still taken: Gini never
        // increases, and continuing lets deeper splits separate the classes.
        return best;
    }

    const LabeledDataset& data_;
    std::size_t n_;
    std::size_t mtry_;
    std::size_t max_depth_;
    Rng& rng_;
};

} // namespace

ScoringModel train_random_forest(const LabeledDataset& train, const TrainConfig& config) {
    config.validate();
    if (train.empty()) throw InvalidInput("training set is empty");
    if (train.count(Label::Positive) == 0 || train.count(Label::Negative) == 0) {
        throw InvalidInput("random forest training needs both classes present");
    }
    const std::size_t n = train.feature_count();
    const std::size_t m = train.size();
    const std::size_t mtry =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));

    RandomForestModel forest;
    forest.trees.resize(config.tree_count);
    for (std::size_t t = 0; t < config.tree_count; ++t) {
        Rng rng = make_rng(config.seed, {hash_tag("tree"), t});
        std::uniform_int_distribution<std::size_t> pick(0, m - 1);
        std::vector<std::size_t> bootstrap(m);
        for (auto& r : bootstrap) r = pick(rng);
        TreeBuilder builder(train, mtry, config.max_depth, rng);
        forest.trees[t] = builder.build(std::move(bootstrap));
    }
    return ScoringModel(std::move(forest), n);
}

} // namespace araudit
