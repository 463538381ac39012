#pragma once

#include "lfs/common.hpp"
#include "lfs/tensor.hpp"

namespace lfs {

inline constexpr int kNumAgeGroups = 6;
inline constexpr int kDefaultCodeBlock = 50;  // N; code length 6N = 300

struct AgeGroupRange {
    int index;
    int min_age;
    int max_age;
};

// The six discrete age groups and the calendar-age lookup. Ages falling in
// an annotation gap map to the group with the nearest range midpoint (ties
// to the lower group).
class AgeGroupTable {
public:
    AgeGroupTable();  // default groups 0-2, 3-6, 7-9, 15-19, 30-39, 50-59
    explicit AgeGroupTable(std::vector<AgeGroupRange> groups);

    const std::vector<AgeGroupRange>& groups() const { return groups_; }
    int group_of_age(double age_years) const;

private:
    std::vector<AgeGroupRange> groups_;
};

struct AgeCode {
    Tensor values;  // length 6N
    int group_lo = 0;
    int group_hi = 0;
    double alpha = 0.0;

    int length() const { return static_cast<int>(values.size()); }
};

// One-hot block code 1_i plus i.i.d. Gaussian noise of the given stddev.
AgeCode make_age_code(int group, double noise_scale, Rng& rng,
                      int n = kDefaultCodeBlock);

// Zero-noise convex combination of neighboring group codes.
AgeCode interpolate_age_code(int group, double alpha, int n = kDefaultCodeBlock);

}  // namespace lfs
