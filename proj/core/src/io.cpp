#include "selftrain/io.hpp"

#include <fstream>
#include <sstream>

#include "selftrain/errors.hpp"

namespace selftrain::io {

namespace {

nlohmann::json parse_line(const std::string& line, const std::string& path, std::size_t line_no) {
    try {
        return nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path + " line " + std::to_string(line_no) +
                              ": invalid JSON: " + e.what());
    }
}

template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        fn(line, line_no);
    }
}

}  // namespace

nlohmann::json to_json(const ResponseRecord& record) {
    nlohmann::json j{
        {"problem_id", record.problem_id},
        {"sample_index", record.sample_index},
        {"phase", to_string(record.phase)},
        {"text", record.text},
        {"steps", record.steps},
    };
    if (record.scored()) {
        j["step_rewards"] = record.step_rewards;
        j["reward"] = record.reward;
    }
    if (record.has_verdict()) j["correct"] = *record.correct;
    return j;
}

ResponseRecord record_from_json(const nlohmann::json& j) {
    ResponseRecord r;
    r.problem_id = j.at("problem_id").get<std::string>();
    r.sample_index = j.at("sample_index").get<std::uint32_t>();
    r.phase = phase_from_string(j.at("phase").get<std::string>());
    r.text = j.at("text").get<std::string>();
    if (j.contains("steps")) r.steps = j["steps"].get<std::vector<std::string>>();
    if (j.contains("step_rewards")) {
        r.step_rewards = j["step_rewards"].get<std::vector<double>>();
        r.reward = j.at("reward").get<double>();
    }
    if (j.contains("correct")) r.correct = j["correct"].get<bool>();
    return r;
}

nlohmann::json to_json(const DifficultyVerdict& verdict) {
    return {
        {"problem_id", verdict.problem_id},
        {"phi_a", verdict.phi_a},
        {"phi_r", verdict.phi_r},
        {"class", to_string(verdict.cls)},
        {"source", to_string(verdict.source)},
    };
}

DifficultyVerdict verdict_from_json(const nlohmann::json& j) {
    DifficultyVerdict v;
    v.problem_id = j.at("problem_id").get<std::string>();
    v.phi_a = j.at("phi_a").get<double>();
    v.phi_r = j.at("phi_r").get<double>();
    v.cls = difficulty_class_from_string(j.at("class").get<std::string>());
    v.source = estimation_source_from_string(j.at("source").get<std::string>());
    return v;
}

nlohmann::json to_json(const BudgetPlan& plan) {
    return {
        {"n_t", plan.budget.n_t},
        {"n_p", plan.budget.n_p},
        {"pre_counts", plan.pre_counts},
        {"re_counts", plan.re_counts},
        {"total", plan.total},
    };
}

BudgetPlan budget_plan_from_json(const nlohmann::json& j) {
    BudgetPlan plan;
    plan.budget.n_t = j.at("n_t").get<std::uint32_t>();
    plan.budget.n_p = j.at("n_p").get<std::uint32_t>();
    plan.pre_counts = j.at("pre_counts").get<std::map<std::string, std::uint32_t>>();
    plan.re_counts = j.at("re_counts").get<std::map<std::string, std::uint32_t>>();
    plan.total = j.at("total").get<std::uint64_t>();
    return plan;
}

void write_records(const std::string& path, const std::vector<ResponseRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open record file for writing: " + path);
    for (const auto& r : records) out << to_json(r).dump() << '\n';
    out.flush();
    if (!out) throw IoError("failed writing record file: " + path);
}

std::vector<ResponseRecord> read_records(const std::string& path) {
    std::vector<ResponseRecord> records;
    for_each_line(path, [&](const std::string& line, std::size_t line_no) {
        const auto j = parse_line(line, path, line_no);
        try {
            records.push_back(record_from_json(j));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path + " line " + std::to_string(line_no) + ": " + e.what());
        }
    });
    return records;
}

void write_verdicts(const std::string& path, const std::vector<DifficultyVerdict>& verdicts) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open verdict file for writing: " + path);
    for (const auto& v : verdicts) out << to_json(v).dump() << '\n';
    out.flush();
    if (!out) throw IoError("failed writing verdict file: " + path);
}

std::vector<DifficultyVerdict> read_verdicts(const std::string& path) {
    std::vector<DifficultyVerdict> verdicts;
    for_each_line(path, [&](const std::string& line, std::size_t line_no) {
        const auto j = parse_line(line, path, line_no);
        try {
            verdicts.push_back(verdict_from_json(j));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError(path + " line " + std::to_string(line_no) + ": " + e.what());
        }
    });
    return verdicts;
}

void write_budget_plan(const std::string& path, const BudgetPlan& plan) {
    write_json_file(path, to_json(plan));
}

BudgetPlan read_budget_plan(const std::string& path) {
    try {
        return budget_plan_from_json(read_json_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void write_abilities(const std::string& path, const std::map<std::string, double>& abilities) {
    write_json_file(path, nlohmann::json(abilities));
}

std::map<std::string, double> read_abilities(const std::string& path) {
    try {
        return read_json_file(path).get<std::map<std::string, double>>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path + ": invalid JSON: " + e.what());
    }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << j.dump(2) << '\n';
    out.flush();
    if (!out) throw IoError("failed writing file: " + path);
}

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<SchemaIssue> validate_pairs_file(const std::string& path) {
    std::vector<SchemaIssue> issues;
    for_each_line(path, [&](const std::string& line, std::size_t line_no) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            issues.push_back({line_no, std::string("invalid JSON: ") + e.what()});
            return;
        }
        auto expect = [&](const char* field, bool ok) {
            if (!ok) issues.push_back({line_no, std::string("bad or missing field \"") + field + "\""});
        };
        expect("prompt", j.contains("prompt") && j["prompt"].is_string());
        expect("chosen", j.contains("chosen") && j["chosen"].is_string());
        expect("rejected", j.contains("rejected") && j["rejected"].is_string());
        expect("problem_id", j.contains("problem_id") && j["problem_id"].is_string());
        expect("rank", j.contains("rank") && j["rank"].is_number_unsigned() &&
                           j["rank"].get<std::uint64_t>() >= 1);
        for (const char* field : {"chosen_reward", "rejected_reward"}) {
            if (!j.contains(field) || !j[field].is_number()) {
                issues.push_back({line_no, std::string("bad or missing field \"") + field + "\""});
            } else {
                const double v = j[field].get<double>();
                if (v < 0.0 || v > 1.0) {
                    issues.push_back({line_no, std::string(field) + " outside [0, 1]"});
                }
            }
        }
    });
    return issues;
}

std::vector<SchemaIssue> validate_records_file(const std::string& path, bool require_scored,
                                               bool require_verdict) {
    std::vector<SchemaIssue> issues;
    for_each_line(path, [&](const std::string& line, std::size_t line_no) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            issues.push_back({line_no, std::string("invalid JSON: ") + e.what()});
            return;
        }
        ResponseRecord r;
        try {
            r = record_from_json(j);
        } catch (const std::exception& e) {
            issues.push_back({line_no, e.what()});
            return;
        }
        if (require_scored && !r.scored()) {
            issues.push_back({line_no, "missing field \"reward\" (record is unscored)"});
        }
        if (require_verdict && !r.has_verdict()) {
            issues.push_back({line_no, "missing field \"correct\" (record has no verdict)"});
        }
        if (r.scored() && r.step_rewards.size() != r.steps.size()) {
            issues.push_back({line_no, "step_rewards length differs from steps length"});
        }
    });
    return issues;
}

}  // namespace selftrain::io
