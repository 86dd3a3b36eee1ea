#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "led/layout.hpp"

namespace led {

using json = nlohmann::json;

/// Reads COCO-style JSON (images / annotations / categories). Elements are
/// grouped per image in file order and tagged with `source`.
Dataset parse_coco(std::string_view text, Source source = Source::GroundTruth);
Dataset load_coco(const std::filesystem::path& path, Source source = Source::GroundTruth);

json to_coco_json(const Dataset& ds);
void save_coco(const Dataset& ds, const std::filesystem::path& path);

/// Single-document dataset sharing the category table of `categories`.
json to_coco_json(const DocumentLayout& doc, std::span<const Category> categories);

json to_json(const ErrorAnnotation& ann);
ErrorAnnotation error_annotation_from_json(const json& j);
ErrorAnnotation load_error_annotation(const std::filesystem::path& path);
void save_error_annotation(const ErrorAnnotation& ann, const std::filesystem::path& path);

/// Parses JSON text, reporting the failing byte offset as a ValidationError.
json parse_json(std::string_view text, const std::string& what);

/// Stable text form: sorted keys, two-space indent, trailing newline.
std::string dump_json(const json& j);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace led
