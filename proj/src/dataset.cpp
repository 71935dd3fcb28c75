#include "araudit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include <fmt/format.h>

#include "araudit/error.hpp"
#include "araudit/rng.hpp"

namespace araudit {

void LabeledDataset::add(std::span<const double> x, Label label, UserId user) {
    if (x.size() != feature_count_) {
        throw InvalidInput(fmt::format("sample has {} features, dataset expects {}", x.size(),
                                       feature_count_));
    }
    values_.insert(values_.end(), x.begin(), x.end());
    labels_.push_back(label);
    users_.push_back(std::move(user));
}

void LabeledDataset::append(const LabeledDataset& other) {
    if (other.empty()) return;
    if (other.feature_count_ != feature_count_) {
        throw InvalidInput("cannot append datasets with different feature counts");
    }
    values_.insert(values_.end(), other.values_.begin(), other.values_.end());
    labels_.insert(labels_.end(), other.labels_.begin(), other.labels_.end());
    users_.insert(users_.end(), other.users_.begin(), other.users_.end());
}

void LabeledDataset::reserve(std::size_t rows) {
    values_.reserve(rows * feature_count_);
    labels_.reserve(rows);
    users_.reserve(rows);
}

std::size_t LabeledDataset::count(Label l) const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), l));
}

std::size_t Population::total_samples() const {
    std::size_t total = 0;
    for (const auto& u : users) total += u.rows(feature_count);
    return total;
}

std::size_t Population::index_of(const UserId& id) const {
    for (std::size_t i = 0; i < users.size(); ++i) {
        if (users[i].id == id) return i;
    }
    throw InvalidInput(fmt::format("user '{}' not present", id));
}

Population group_by_user(const LabeledDataset& dataset) {
    Population pop;
    pop.feature_count = dataset.feature_count();
    std::unordered_map<UserId, std::size_t> slot;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        auto [it, inserted] = slot.try_emplace(dataset.user(i), pop.users.size());
        if (inserted) pop.users.push_back(UserPool{dataset.user(i), {}});
        auto row = dataset.row(i);
        auto& dst = pop.users[it->second].values;
        dst.insert(dst.end(), row.begin(), row.end());
    }
    return pop;
}

LabeledDataset flatten(const Population& population, Label label) {
    LabeledDataset out(population.feature_count);
    out.reserve(population.total_samples());
    for (std::size_t u = 0; u < population.users.size(); ++u) {
        const std::size_t rows = population.users[u].rows(population.feature_count);
        for (std::size_t r = 0; r < rows; ++r) {
            out.add(population.sample(u, r), label, population.users[u].id);
        }
    }
    return out;
}

std::vector<double> NormalizationParams::transform(std::span<const double> x) const {
    std::vector<double> out(x.begin(), x.end());
    transform_inplace(out);
    return out;
}

void NormalizationParams::transform_inplace(std::span<double> x) const {
    if (x.size() != min.size()) {
        throw InvalidInput(fmt::format("vector has {} features, normalization expects {}",
                                       x.size(), min.size()));
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double span = max[j] - min[j];
        x[j] = span > 0.0 ? (x[j] - min[j]) / span : 0.0;
    }
}

NormalizationParams fit_min_max(std::span<const double> row_major, std::size_t feature_count) {
    if (feature_count == 0 || row_major.empty()) {
        throw InvalidInput("cannot normalize an empty dataset");
    }
    NormalizationParams p;
    p.min.assign(row_major.begin(), row_major.begin() + static_cast<std::ptrdiff_t>(feature_count));
    p.max = p.min;
    for (std::size_t k = feature_count; k < row_major.size(); ++k) {
        const std::size_t j = k % feature_count;
        p.min[j] = std::min(p.min[j], row_major[k]);
        p.max[j] = std::max(p.max[j], row_major[k]);
    }
    return p;
}

std::pair<LabeledDataset, NormalizationParams> min_max_normalize(const LabeledDataset& dataset) {
    if (dataset.empty()) throw InvalidInput("cannot normalize an empty dataset");
    auto params = fit_min_max(dataset.values(), dataset.feature_count());
    LabeledDataset out = dataset;
    for (std::size_t i = 0; i < out.size(); ++i) params.transform_inplace(out.row(i));
    return {std::move(out), std::move(params)};
}

std::pair<Population, NormalizationParams> min_max_normalize(const Population& population) {
    std::vector<double> all;
    all.reserve(population.total_samples() * population.feature_count);
    for (const auto& u : population.users) all.insert(all.end(), u.values.begin(), u.values.end());
    if (all.empty()) throw InvalidInput("cannot normalize an empty population");
    auto params = fit_min_max(all, population.feature_count);

    Population out = population;
    const std::size_t n = population.feature_count;
    for (auto& u : out.users) {
        for (std::size_t r = 0; r * n < u.values.size(); ++r) {
            params.transform_inplace(std::span<double>(u.values.data() + r * n, n));
        }
    }
    return {std::move(out), std::move(params)};
}

namespace {

void check_fraction(double f) {
    if (!(f > 0.0 && f < 1.0)) {
        throw InvalidInput(fmt::format("train fraction must lie in (0, 1), got {}", f));
    }
}

std::size_t train_count(std::size_t rows, double fraction) {
    // Guards against 0.7 * 10 landing on 6.999...
    return static_cast<std::size_t>(std::floor(static_cast<double>(rows) * fraction + 1e-9));
}

std::vector<std::size_t> shuffled_indices(std::size_t count, Rng& rng) {
    std::vector<std::size_t> idx(count);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    return idx;
}

} // namespace

std::pair<LabeledDataset, LabeledDataset> train_test_split(const LabeledDataset& dataset,
                                                           double train_fraction,
                                                           std::uint64_t seed) {
    check_fraction(train_fraction);

    std::vector<UserId> order;
    std::unordered_map<UserId, std::vector<std::size_t>> rows_of;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        auto [it, inserted] = rows_of.try_emplace(dataset.user(i));
        if (inserted) order.push_back(dataset.user(i));
        it->second.push_back(i);
    }

    std::vector<bool> to_train(dataset.size(), false);
    for (const auto& id : order) {
        const auto& rows = rows_of[id];
        Rng rng = make_rng(seed, {hash_tag(id)});
        auto perm = shuffled_indices(rows.size(), rng);
        const std::size_t k = train_count(rows.size(), train_fraction);
        for (std::size_t j = 0; j < k; ++j) to_train[rows[perm[j]]] = true;
    }

    LabeledDataset train(dataset.feature_count());
    LabeledDataset test(dataset.feature_count());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        (to_train[i] ? train : test).add(dataset.row(i), dataset.label(i), dataset.user(i));
    }
    return {std::move(train), std::move(test)};
}

std::pair<Population, Population> train_test_split(const Population& population,
                                                   double train_fraction, std::uint64_t seed) {
    check_fraction(train_fraction);
    const std::size_t n = population.feature_count;
    Population train{n, {}};
    Population test{n, {}};
    for (const auto& user : population.users) {
        const std::size_t rows = user.rows(n);
        Rng rng = make_rng(seed, {hash_tag(user.id)});
        auto perm = shuffled_indices(rows, rng);
        const std::size_t k = train_count(rows, train_fraction);
        std::sort(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
        std::sort(perm.begin() + static_cast<std::ptrdiff_t>(k), perm.end());

        UserPool tr{user.id, {}};
        UserPool te{user.id, {}};
        for (std::size_t j = 0; j < rows; ++j) {
            auto src = user.values.begin() + static_cast<std::ptrdiff_t>(perm[j] * n);
            auto& dst = j < k ? tr.values : te.values;
            dst.insert(dst.end(), src, src + static_cast<std::ptrdiff_t>(n));
        }
        train.users.push_back(std::move(tr));
        test.users.push_back(std::move(te));
    }
    return {std::move(train), std::move(test)};
}

LabeledDataset balanced_negative_sample(const Population& population, const UserId& target,
                                        std::size_t required_count, std::uint64_t seed) {
    const std::size_t n = population.feature_count;
    std::vector<std::size_t> others;
    for (std::size_t u = 0; u < population.users.size(); ++u) {
        if (population.users[u].id != target && population.users[u].rows(n) > 0) {
            others.push_back(u);
        }
    }
    if (others.empty()) {
        throw InvalidInput(fmt::format("no users other than '{}' to draw negatives from", target));
    }

    const std::size_t quota = (required_count + others.size() - 1) / others.size();
    std::vector<std::vector<std::size_t>> drawn(others.size());
    std::size_t total = 0;
    for (std::size_t k = 0; k < others.size(); ++k) {
        const auto& pool = population.users[others[k]];
        Rng rng = make_rng(seed, {hash_tag(pool.id)});
        auto perm = shuffled_indices(pool.rows(n), rng);
        perm.resize(std::min(quota, perm.size()));
        total += perm.size();
        drawn[k] = std::move(perm);
    }

    if (total > required_count) {
        // Users that gave the full quota each give up one sample; the surplus
        // is always smaller than their number.
        std::vector<std::size_t> full;
        for (std::size_t k = 0; k < drawn.size(); ++k) {
            if (drawn[k].size() == quota) full.push_back(k);
        }
        Rng rng = make_rng(seed, {hash_tag("trim")});
        std::shuffle(full.begin(), full.end(), rng);
        const std::size_t excess = total - required_count;
        for (std::size_t j = 0; j < excess && j < full.size(); ++j) drawn[full[j]].pop_back();
    }

    LabeledDataset out(n);
    out.reserve(std::min(total, required_count));
    for (std::size_t k = 0; k < others.size(); ++k) {
        const std::size_t u = others[k];
        for (std::size_t r : drawn[k]) {
            out.add(population.sample(u, r), Label::Negative, population.users[u].id);
        }
    }
    return out;
}

UserTask assemble_from_split(const Population& train_part, const Population& test_part,
                             const UserId& target, std::uint64_t negative_seed) {
    const std::size_t n = train_part.feature_count;
    if (test_part.feature_count != n) throw InvalidInput("split partitions disagree on n");

    auto side = [&](const Population& part, std::string_view tag) {
        const std::size_t t = part.index_of(target);
        const std::size_t positives = part.users[t].rows(n);
        LabeledDataset ds(n);
        ds.reserve(2 * positives);
        for (std::size_t r = 0; r < positives; ++r) {
            ds.add(part.sample(t, r), Label::Positive, target);
        }
        ds.append(balanced_negative_sample(part, target, positives,
                                           derive_seed(negative_seed, {hash_tag(tag)})));
        return ds;
    };

    UserTask task{side(train_part, "train"), side(test_part, "test")};
    if (task.train.count(Label::Positive) == 0) {
        throw InvalidInput(fmt::format("user '{}' has no training samples", target));
    }
    return task;
}

UserTask assemble_user_task(const Population& population, const UserId& target,
                            double train_fraction, std::uint64_t seed) {
    population.index_of(target);
    auto [train, test] =
        train_test_split(population, train_fraction, derive_seed(seed, {hash_tag("split")}));
    return assemble_from_split(train, test, target, derive_seed(seed, {hash_tag("negatives")}));
}

} // namespace araudit
