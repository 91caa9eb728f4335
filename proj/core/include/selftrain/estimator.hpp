#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "selftrain/prm.hpp"

namespace selftrain {

struct Thresholds {
    double tau_l = 0.15;
    double tau_h = 0.65;
};

// Threshold profile for runs that skip the warm-up stage.
inline Thresholds zero_setting_thresholds() { return {0.15, 0.4}; }

void validate(const Thresholds& thresholds);  // requires tau_l <= tau_h

enum class DifficultyClass { Inlier, Boundary, Outlier };
enum class EstimationSource { Rde, RdeAcc, RdeReward, Sde };

struct DifficultyVerdict {
    std::string problem_id;
    double phi_a = 0.0;
    double phi_r = 0.0;
    DifficultyClass cls = DifficultyClass::Boundary;
    EstimationSource source = EstimationSource::Rde;
};

// Oracle partition thresholds: accuracy strictly above/below defines
// Inlier/Outlier, everything else is Boundary.
inline constexpr double kSdeInlierAccuracy = 0.875;
inline constexpr double kSdeOutlierAccuracy = 0.125;

// Mean correctness indicator over the records. Records must carry verdicts.
double phi_a(const std::vector<ResponseRecord>& records);

// Mean aggregated reward over the records. Records must be scored.
double phi_r(const std::vector<ResponseRecord>& records);

// Inlier iff phi_a = 1 and phi_r > tau_h; Outlier iff phi_a = 0 and
// phi_r < tau_l; Boundary otherwise. Comparisons are strict, equality falls
// to Boundary.
DifficultyVerdict classify_rde(const std::vector<ResponseRecord>& records,
                               const Thresholds& thresholds);

enum class RdeVariant { AccOnly, RewardOnly };

DifficultyVerdict classify_variant(const std::vector<ResponseRecord>& records,
                                   const Thresholds& thresholds, RdeVariant variant);

// Oracle partition from a large sample: requires at least min_samples records
// with verdicts.
DifficultyVerdict classify_sde(const std::vector<ResponseRecord>& records,
                               std::size_t min_samples = 100);

struct AgreementReport {
    std::map<DifficultyClass, double> per_class;  // fraction of each RDE class matching SDE
    std::map<DifficultyClass, std::size_t> class_counts;
    double overall = 0.0;
    std::size_t total = 0;
};

// Fraction of problems whose SDE class matches, per RDE class and overall.
// The two verdict lists must cover the same problem ids.
AgreementReport agreement(const std::vector<DifficultyVerdict>& rde,
                          const std::vector<DifficultyVerdict>& sde);

const char* to_string(DifficultyClass cls);
const char* to_string(EstimationSource source);
DifficultyClass difficulty_class_from_string(std::string_view s);
EstimationSource estimation_source_from_string(std::string_view s);

}  // namespace selftrain
