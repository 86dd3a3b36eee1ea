#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "led/config.hpp"
#include "led/layout.hpp"

namespace led {

struct CorpusFiles {
    std::string gt;
    std::string pred;
    std::string error;
    std::string gt_svg;
    std::string pred_svg;
};

struct SkippedAction {
    ErrorType type = ErrorType::Missing;
    std::string reason;
};

struct CorpusEntry {
    std::string doc_id;
    CorpusFiles files;
    ErrorSet error_types;
    std::vector<SkippedAction> skipped;
    std::size_t n_gt_elements = 0;
    std::size_t n_pred_elements = 0;
};

/// Index of a built corpus. Paths are relative to the corpus directory.
struct CorpusManifest {
    std::string corpus_id;
    std::uint64_t global_seed = 0;
    nlohmann::json config = nlohmann::json::object();
    std::vector<CorpusEntry> documents;
    /// Number of documents containing each type, indexed like kAllErrorTypes.
    std::array<std::size_t, kErrorTypeCount> type_counts{};
    std::size_t total_elements = 0;
    std::size_t total_pred_elements = 0;
};

CorpusFiles corpus_files(const std::string& doc_id);

/// Injects one plan per document and writes the per-document files plus
/// manifest.json into `out_dir`. Output depends only on the input, the
/// config and the seed, never on `jobs`.
CorpusManifest build_corpus(const Dataset& input, const ResolvedConfig& cfg, const std::filesystem::path& out_dir,
                            int jobs = 0);

nlohmann::json to_json(const CorpusManifest& m);
CorpusManifest manifest_from_json(const nlohmann::json& j);
CorpusManifest load_manifest(const std::filesystem::path& corpus_dir);

/// Element and type counts recomputed from the files on disk.
struct CorpusRecount {
    std::size_t total_elements = 0;
    std::size_t total_pred_elements = 0;
    std::array<std::size_t, kErrorTypeCount> type_counts{};
    std::vector<std::string> mismatched_docs;
};

CorpusRecount recount_corpus(const std::filesystem::path& corpus_dir, const CorpusManifest& m);

/// Documents whose detector diagnosis does not contain every injected type.
std::vector<std::string> verify_corpus(const std::filesystem::path& corpus_dir, const CorpusManifest& m,
                                       const DetectorConfig& cfg = {}, int jobs = 0);

/// Human-readable type distribution table.
std::string corpus_stats(const CorpusManifest& m);

}  // namespace led
