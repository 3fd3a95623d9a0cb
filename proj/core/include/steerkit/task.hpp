#pragma once

#include <optional>
#include <string>
#include <vector>

#include "steerkit/answers.hpp"

namespace steerkit {

// One benchmark item from a task JSONL file.
struct TaskItem {
    std::string id;
    std::string query;
    std::string gold_answer;
    AnswerKind kind = AnswerKind::Integer;
    std::optional<std::string> init_generation; // required in reflection modes
};

// Strict JSONL loader: one object per line with fields id, query,
// gold_answer, kind, optional init_generation. Errors carry line numbers.
std::vector<TaskItem> load_dataset(const std::string& path);

} // namespace steerkit
