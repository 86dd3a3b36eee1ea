#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "led/layout.hpp"

namespace led {

enum class Task { T1, T2, T3 };
enum class Prompting { P1, P2, P3 };
enum class AttachmentRole { PageImage, VizImage, PredictionJson };

std::string_view to_string(Task t);
std::string_view to_string(Prompting p);
std::string_view to_string(AttachmentRole r);
/// Case-insensitive: "t1" or "T1".
std::optional<Task> parse_task(std::string_view s);
std::optional<Prompting> parse_prompting(std::string_view s);

/// Attachment roles a prompting method carries, in bundle order.
std::vector<AttachmentRole> attachment_roles(Prompting p);

struct Attachment {
    AttachmentRole role = AttachmentRole::PageImage;
    std::string path;  // relative to the bundle file; empty when unavailable
};

struct PromptBundle {
    std::string doc_id;
    Prompting prompting = Prompting::P1;
    Task task = Task::T1;
    std::string instruction_text;
    std::vector<Attachment> attachments;
};

/// Task instructions with the expected answer schema embedded.
std::string instruction_text(Task task, Prompting prompting);

nlohmann::json to_json(const PromptBundle& b);

/// Writes `<out>/<task>/<prompting>/<doc_id>.bundle.json` for every corpus
/// document and copies the referenced attachment files next to it.
std::vector<PromptBundle> emit_bundles(const std::filesystem::path& corpus_dir, Task task, Prompting prompting,
                                       const std::filesystem::path& out, int jobs = 0);

enum class ParseStatus { Ok, Malformed, Empty };
std::string_view to_string(ParseStatus s);

struct ParsedAnswer {
    bool has_error = false;
    ErrorSet error_types;
    std::map<ElementId, ErrorSet> element_errors;
    std::vector<ElementId> missing_gt_ids;
    std::vector<std::string> unknown_labels;
};

struct ParseResult {
    ParsedAnswer answer;
    ParseStatus status = ParseStatus::Ok;
    std::string detail;
};

/// First balanced JSON object in `text` that parses, if any.
std::optional<nlohmann::json> extract_json_object(std::string_view text);

/// Anything other than Ok leaves `answer` all-negative.
ParseResult parse_response(Task task, std::string_view raw);

struct TaskRecord {
    std::string doc_id;
    Task task = Task::T1;
    ErrorAnnotation gold;
    ParsedAnswer predicted;
    ParseStatus parse_status = ParseStatus::Ok;
};

/// Gold annotation used as a perfect answer.
ParsedAnswer answer_from_gold(const ErrorAnnotation& gold);

struct TypeScore {
    std::size_t tp = 0, fp = 0, fn = 0;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    bool included = false;  // TP + FP + FN > 0
};

struct ScoreReport {
    Task task = Task::T1;
    std::optional<Prompting> prompting;
    std::size_t n_docs = 0;
    std::optional<double> accuracy;
    std::optional<double> micro_f1;
    std::optional<double> macro_f1;
    std::size_t tp = 0, fp = 0, fn = 0;
    std::array<TypeScore, kErrorTypeCount> per_type{};
    std::size_t n_malformed = 0, n_empty = 0, n_unknown_labels = 0;
    double parse_failure_rate = 0.0;
};

/// F1 = 2TP / (2TP + FP + FN), defined as 1 when there is nothing to find
/// and nothing was claimed.
double f1_score(std::size_t tp, std::size_t fp, std::size_t fn);

ScoreReport score_t1(std::span<const TaskRecord> records);
ScoreReport score_t2(std::span<const TaskRecord> records);
ScoreReport score_t3(std::span<const TaskRecord> records);
ScoreReport score(Task task, std::span<const TaskRecord> records);

nlohmann::json to_json(const ScoreReport& r);

/// Pairs every gold annotation of a corpus with `<responses_dir>/<doc_id>.txt`.
/// A missing response file counts as an empty answer.
std::vector<TaskRecord> load_records(Task task, const std::filesystem::path& gold_dir,
                                     const std::filesystem::path& responses_dir, int jobs = 0);

}  // namespace led
