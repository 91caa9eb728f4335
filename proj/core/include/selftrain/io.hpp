#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "selftrain/estimator.hpp"
#include "selftrain/prm.hpp"
#include "selftrain/scheduler.hpp"

namespace selftrain::io {

nlohmann::json to_json(const ResponseRecord& record);
ResponseRecord record_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DifficultyVerdict& verdict);
DifficultyVerdict verdict_from_json(const nlohmann::json& j);

nlohmann::json to_json(const BudgetPlan& plan);
BudgetPlan budget_plan_from_json(const nlohmann::json& j);

// JSONL files; parse and schema errors are reported with 1-based line numbers.
void write_records(const std::string& path, const std::vector<ResponseRecord>& records);
std::vector<ResponseRecord> read_records(const std::string& path);

void write_verdicts(const std::string& path, const std::vector<DifficultyVerdict>& verdicts);
std::vector<DifficultyVerdict> read_verdicts(const std::string& path);

void write_budget_plan(const std::string& path, const BudgetPlan& plan);
BudgetPlan read_budget_plan(const std::string& path);

// Simulator ability state: a flat {problem_id: p} object.
void write_abilities(const std::string& path, const std::map<std::string, double>& abilities);
std::map<std::string, double> read_abilities(const std::string& path);

// Generic helpers.
nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);
std::string read_file_bytes(const std::string& path);

struct SchemaIssue {
    std::size_t line = 0;  // 1-based; 0 = whole file
    std::string message;
};

// Required-field and type checks for exported pair files.
std::vector<SchemaIssue> validate_pairs_file(const std::string& path);

// Checks response records; optionally requires rewards and/or verdicts.
std::vector<SchemaIssue> validate_records_file(const std::string& path,
                                               bool require_scored,
                                               bool require_verdict);

}  // namespace selftrain::io
