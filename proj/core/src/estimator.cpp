#include "selftrain/estimator.hpp"

#include <unordered_map>

#include "selftrain/errors.hpp"

namespace selftrain {

void validate(const Thresholds& thresholds) {
    if (!(thresholds.tau_l <= thresholds.tau_h)) {
        throw ValidationError("thresholds must satisfy tau_l <= tau_h");
    }
    if (thresholds.tau_l < 0.0 || thresholds.tau_h > 1.0) {
        throw ValidationError("thresholds must lie in [0, 1]");
    }
}

double phi_a(const std::vector<ResponseRecord>& records) {
    if (records.empty()) throw ValidationError("phi_a over an empty record list");
    std::size_t correct = 0;
    for (const auto& r : records) {
        if (r.is_correct()) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(records.size());
}

double phi_r(const std::vector<ResponseRecord>& records) {
    if (records.empty()) throw ValidationError("phi_r over an empty record list");
    double sum = 0.0;
    for (const auto& r : records) {
        if (!r.scored()) {
            throw ValidationError("record " + r.problem_id + "#" +
                                  std::to_string(r.sample_index) + " has no reward");
        }
        sum += r.reward;
    }
    return sum / static_cast<double>(records.size());
}

namespace {

std::string shared_problem_id(const std::vector<ResponseRecord>& records) {
    const std::string& id = records.front().problem_id;
    for (const auto& r : records) {
        if (r.problem_id != id) {
            throw ValidationError("records mix problem ids: " + id + " vs " + r.problem_id);
        }
    }
    return id;
}

}  // namespace

DifficultyVerdict classify_rde(const std::vector<ResponseRecord>& records,
                               const Thresholds& thresholds) {
    if (records.empty()) throw ValidationError("classify_rde over an empty record list");
    validate(thresholds);

    DifficultyVerdict v;
    v.problem_id = shared_problem_id(records);
    v.phi_a = phi_a(records);
    v.phi_r = phi_r(records);
    v.source = EstimationSource::Rde;
    if (v.phi_a == 1.0 && v.phi_r > thresholds.tau_h) {
        v.cls = DifficultyClass::Inlier;
    } else if (v.phi_a == 0.0 && v.phi_r < thresholds.tau_l) {
        v.cls = DifficultyClass::Outlier;
    } else {
        v.cls = DifficultyClass::Boundary;
    }
    return v;
}

DifficultyVerdict classify_variant(const std::vector<ResponseRecord>& records,
                                   const Thresholds& thresholds, RdeVariant variant) {
    if (records.empty()) throw ValidationError("classify_variant over an empty record list");
    validate(thresholds);

    DifficultyVerdict v;
    v.problem_id = shared_problem_id(records);
    v.phi_a = phi_a(records);
    if (variant == RdeVariant::AccOnly) {
        v.source = EstimationSource::RdeAcc;
        // phi_r is reported when available but plays no part in the rule.
        v.phi_r = records.front().scored() ? phi_r(records) : 0.0;
        if (v.phi_a == 1.0) {
            v.cls = DifficultyClass::Inlier;
        } else if (v.phi_a == 0.0) {
            v.cls = DifficultyClass::Outlier;
        } else {
            v.cls = DifficultyClass::Boundary;
        }
        return v;
    }

    v.source = EstimationSource::RdeReward;
    v.phi_r = phi_r(records);
    if (v.phi_r > thresholds.tau_h) {
        v.cls = DifficultyClass::Inlier;
    } else if (v.phi_r < thresholds.tau_l) {
        v.cls = DifficultyClass::Outlier;
    } else {
        v.cls = DifficultyClass::Boundary;
    }
    return v;
}

DifficultyVerdict classify_sde(const std::vector<ResponseRecord>& records,
                               std::size_t min_samples) {
    if (records.empty()) throw ValidationError("classify_sde over an empty record list");
    if (records.size() < min_samples) {
        throw ValidationError("classify_sde needs at least " + std::to_string(min_samples) +
                              " records, got " + std::to_string(records.size()));
    }

    DifficultyVerdict v;
    v.problem_id = shared_problem_id(records);
    v.phi_a = phi_a(records);
    v.phi_r = records.front().scored() ? phi_r(records) : 0.0;
    v.source = EstimationSource::Sde;
    if (v.phi_a > kSdeInlierAccuracy) {
        v.cls = DifficultyClass::Inlier;
    } else if (v.phi_a < kSdeOutlierAccuracy) {
        v.cls = DifficultyClass::Outlier;
    } else {
        v.cls = DifficultyClass::Boundary;
    }
    return v;
}

AgreementReport agreement(const std::vector<DifficultyVerdict>& rde,
                          const std::vector<DifficultyVerdict>& sde) {
    if (rde.size() != sde.size()) {
        throw ValidationError("agreement: verdict lists differ in size");
    }
    std::unordered_map<std::string, DifficultyClass> oracle;
    oracle.reserve(sde.size());
    for (const auto& v : sde) {
        if (!oracle.emplace(v.problem_id, v.cls).second) {
            throw ValidationError("agreement: duplicate problem id " + v.problem_id);
        }
    }

    AgreementReport report;
    std::map<DifficultyClass, std::size_t> matches;
    for (const auto& v : rde) {
        auto it = oracle.find(v.problem_id);
        if (it == oracle.end()) {
            throw ValidationError("agreement: problem id " + v.problem_id +
                                  " missing from the oracle verdicts");
        }
        ++report.class_counts[v.cls];
        if (it->second == v.cls) ++matches[v.cls];
    }

    std::size_t matched_total = 0;
    for (const auto& [cls, count] : report.class_counts) {
        const std::size_t m = matches.count(cls) ? matches[cls] : 0;
        matched_total += m;
        report.per_class[cls] = static_cast<double>(m) / static_cast<double>(count);
    }
    report.total = rde.size();
    report.overall =
        report.total == 0 ? 0.0 : static_cast<double>(matched_total) / static_cast<double>(report.total);
    return report;
}

const char* to_string(DifficultyClass cls) {
    switch (cls) {
        case DifficultyClass::Inlier: return "Inlier";
        case DifficultyClass::Boundary: return "Boundary";
        case DifficultyClass::Outlier: return "Outlier";
    }
    return "Boundary";
}

const char* to_string(EstimationSource source) {
    switch (source) {
        case EstimationSource::Rde: return "RDE";
        case EstimationSource::RdeAcc: return "RDE-Acc";
        case EstimationSource::RdeReward: return "RDE-Reward";
        case EstimationSource::Sde: return "SDE";
    }
    return "RDE";
}

DifficultyClass difficulty_class_from_string(std::string_view s) {
    if (s == "Inlier") return DifficultyClass::Inlier;
    if (s == "Boundary") return DifficultyClass::Boundary;
    if (s == "Outlier") return DifficultyClass::Outlier;
    throw ValidationError("unknown difficulty class: " + std::string(s));
}

EstimationSource estimation_source_from_string(std::string_view s) {
    if (s == "RDE" || s == "rde") return EstimationSource::Rde;
    if (s == "RDE-Acc" || s == "acc") return EstimationSource::RdeAcc;
    if (s == "RDE-Reward" || s == "reward") return EstimationSource::RdeReward;
    if (s == "SDE" || s == "sde") return EstimationSource::Sde;
    throw ValidationError("unknown estimation source: " + std::string(s));
}

}  // namespace selftrain
