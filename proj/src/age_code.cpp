#include "lfs/age_code.hpp"

#include <cmath>
#include <string>

namespace lfs {

AgeGroupTable::AgeGroupTable()
    : AgeGroupTable({{0, 0, 2}, {1, 3, 6}, {2, 7, 9}, {3, 15, 19}, {4, 30, 39}, {5, 50, 59}}) {}

AgeGroupTable::AgeGroupTable(std::vector<AgeGroupRange> groups) : groups_(std::move(groups)) {
    if (groups_.size() != kNumAgeGroups)
        throw InvalidGroup("AgeGroupTable: exactly 6 groups required");
    for (int i = 0; i < kNumAgeGroups; ++i) {
        const auto& g = groups_[static_cast<size_t>(i)];
        if (g.index != i) throw InvalidGroup("AgeGroupTable: indices must be 0..5 in order");
        if (g.min_age > g.max_age) throw InvalidGroup("AgeGroupTable: empty range");
        if (i > 0 && g.min_age <= groups_[static_cast<size_t>(i - 1)].max_age)
            throw InvalidGroup("AgeGroupTable: ranges must be strictly increasing");
    }
}

int AgeGroupTable::group_of_age(double age_years) const {
    if (age_years < 0.0) throw InvalidAge("group_of_age: negative age");
    if (age_years > 120.0) throw InvalidAge("group_of_age: age above 120");
    for (const auto& g : groups_)
        if (age_years >= g.min_age && age_years <= g.max_age) return g.index;
    // Gap between annotated ranges: nearest midpoint, ties to the lower group.
    int best = 0;
    double best_dist = 0.0;
    for (const auto& g : groups_) {
        const double mid = 0.5 * (g.min_age + g.max_age);
        const double d = std::abs(age_years - mid);
        if (g.index == 0 || d < best_dist) {
            best = g.index;
            best_dist = d;
        }
    }
    return best;
}

namespace {

Tensor block_code(int group, int n) {
    Tensor v = Tensor::zeros({kNumAgeGroups * n});
    for (int i = group * n; i < (group + 1) * n; ++i) v[i] = 1.0;
    return v;
}

}  // namespace

AgeCode make_age_code(int group, double noise_scale, Rng& rng, int n) {
    if (group < 0 || group >= kNumAgeGroups)
        throw InvalidGroup("make_age_code: group index " + std::to_string(group) +
                           " outside 0..5");
    if (noise_scale < 0.0) throw InvalidAlpha("make_age_code: negative noise scale");
    AgeCode code;
    code.values = block_code(group, n);
    code.group_lo = code.group_hi = group;
    code.alpha = 0.0;
    if (noise_scale > 0.0) {
        std::normal_distribution<double> dist(0.0, noise_scale);
        for (int64_t i = 0; i < code.values.size(); ++i) code.values[i] += dist(rng);
    }
    return code;
}

AgeCode interpolate_age_code(int group, double alpha, int n) {
    if (alpha < 0.0 || alpha > 1.0)
        throw InvalidAlpha("interpolate_age_code: alpha outside [0,1]");
    if (group < 0 || group >= kNumAgeGroups)
        throw InvalidGroup("interpolate_age_code: group index outside 0..5");
    if (group == kNumAgeGroups - 1 && alpha > 0.0)
        throw InvalidGroup("interpolate_age_code: no neighbor above group 5");
    AgeCode code;
    code.values = block_code(group, n);
    if (alpha > 0.0) {
        Tensor hi = block_code(group + 1, n);
        for (int64_t i = 0; i < code.values.size(); ++i)
            code.values[i] = (1.0 - alpha) * code.values[i] + alpha * hi[i];
    }
    code.group_lo = group;
    code.group_hi = alpha > 0.0 ? group + 1 : group;
    code.alpha = alpha;
    return code;
}

}  // namespace lfs
