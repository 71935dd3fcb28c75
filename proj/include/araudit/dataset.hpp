#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace araudit {

using UserId = std::string;

/// Class label of a sample: the target user (+1) or anyone else (-1).
enum class Label : std::int8_t { Negative = -1, Positive = 1 };

constexpr int to_int(Label l) noexcept { return static_cast<int>(l); }

/// A labelled collection of feature vectors stored row-major.
class LabeledDataset {
public:
    LabeledDataset() = default;
    explicit LabeledDataset(std::size_t feature_count) : feature_count_(feature_count) {}

    std::size_t feature_count() const noexcept { return feature_count_; }
    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }

    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * feature_count_, feature_count_};
    }
    std::span<double> row(std::size_t i) {
        return {values_.data() + i * feature_count_, feature_count_};
    }
    Label label(std::size_t i) const { return labels_[i]; }
    const UserId& user(std::size_t i) const { return users_[i]; }

    /// Appends one sample; throws InvalidInput on a length mismatch.
    void add(std::span<const double> x, Label label, UserId user);
    void append(const LabeledDataset& other);
    void reserve(std::size_t rows);

    std::size_t count(Label l) const;
    std::span<const double> values() const noexcept { return values_; }

    friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

private:
    std::size_t feature_count_ = 0;
    std::vector<double> values_;
    std::vector<Label> labels_;
    std::vector<UserId> users_;
};

/// All raw samples of one user.
struct UserPool {
    UserId id;
    std::vector<double> values; // row-major, feature_count columns

    std::size_t rows(std::size_t feature_count) const {
        return feature_count == 0 ? 0 : values.size() / feature_count;
    }
    friend bool operator==(const UserPool&, const UserPool&) = default;
};

/// Per-user sample pools sharing one feature space. Users keep insertion order.
struct Population {
    std::size_t feature_count = 0;
    std::vector<UserPool> users;

    std::size_t total_samples() const;
    /// Index of a user id; throws InvalidInput when absent.
    std::size_t index_of(const UserId& id) const;
    std::span<const double> sample(std::size_t user, std::size_t row) const {
        return {users[user].values.data() + row * feature_count, feature_count};
    }

    friend bool operator==(const Population&, const Population&) = default;
};

/// Groups samples by user id in order of first appearance. Labels are dropped.
Population group_by_user(const LabeledDataset& dataset);

/// Flattens a population, labelling every sample with `label`.
LabeledDataset flatten(const Population& population, Label label = Label::Positive);

struct NormalizationParams {
    std::vector<double> min;
    std::vector<double> max;

    /// Maps a raw vector into the fitted unit cube. Constant features map to 0.
    std::vector<double> transform(std::span<const double> x) const;
    void transform_inplace(std::span<double> x) const;

    friend bool operator==(const NormalizationParams&, const NormalizationParams&) = default;
};

NormalizationParams fit_min_max(std::span<const double> row_major, std::size_t feature_count);

std::pair<LabeledDataset, NormalizationParams> min_max_normalize(const LabeledDataset& dataset);
std::pair<Population, NormalizationParams> min_max_normalize(const Population& population);

/// Per-user stratified split: each user's rows are shuffled with a seeded
/// stream and floor(count * train_fraction) of them go to the train side.
std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& dataset,
                                                           double train_fraction,
                                                           std::uint64_t seed);
std::pair<Population, Population> train_test_split(const Population& population,
                                                   double train_fraction, std::uint64_t seed);

/// Draws about `required_count` negatives spread evenly over every user except
/// the target. Each other user contributes ceil(required / (U-1)) samples
/// (without replacement, capped at its pool); the surplus is then trimmed by
/// removing one sample from a seeded-random subset of users, so per-user
/// contributions differ by at most one.
LabeledDataset balanced_negative_sample(const Population& population, const UserId& target,
                                        std::size_t required_count, std::uint64_t seed);

struct UserTask {
    LabeledDataset train;
    LabeledDataset test;
};

/// Builds the balanced per-user train/test task from an already split
/// population. Negatives for each side come from that side's partition only.
UserTask assemble_from_split(const Population& train_part, const Population& test_part,
                             const UserId& target, std::uint64_t negative_seed);

/// Split + balance in one call; the split and negative streams derive from `seed`.
UserTask assemble_user_task(const Population& population, const UserId& target,
                            double train_fraction, std::uint64_t seed);

} // namespace araudit
