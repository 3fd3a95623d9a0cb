#include "steerkit/task.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

#include "steerkit/error.hpp"

namespace steerkit {

using nlohmann::json;

std::vector<TaskItem> load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open dataset: " + path);

    std::vector<TaskItem> items;
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
        if (obj.is_discarded() || !obj.is_object())
            throw Error(ErrorCode::ParseError,
                        path + ":" + std::to_string(line_no) + ": invalid JSON object");

        auto need = [&](const char* field) -> const json& {
            if (!obj.contains(field) || !obj[field].is_string())
                throw Error(ErrorCode::MissingField, path + ":" + std::to_string(line_no) +
                                                         ": missing string field '" + field +
                                                         "'");
            return obj[field];
        };

        TaskItem item;
        item.id = need("id").get<std::string>();
        item.query = need("query").get<std::string>();
        item.gold_answer = need("gold_answer").get<std::string>();
        item.kind = answer_kind_from_name(need("kind").get<std::string>());
        if (obj.contains("init_generation")) {
            if (!obj["init_generation"].is_string())
                throw Error(ErrorCode::ParseError, path + ":" + std::to_string(line_no) +
                                                       ": init_generation must be a string");
            item.init_generation = obj["init_generation"].get<std::string>();
        }

        if (!seen.insert(item.id).second)
            throw Error(ErrorCode::DuplicateId, path + ":" + std::to_string(line_no) +
                                                    ": duplicate id '" + item.id + "'");
        items.push_back(std::move(item));
    }
    return items;
}

} // namespace steerkit
