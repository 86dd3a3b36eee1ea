#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "led/layout.hpp"
#include "led/rng.hpp"

namespace led {

/// Document-like random pages: one or two columns of stacked, mutually
/// disjoint blocks (titles, headers, paragraphs, lists, figures, tables...)
/// with whitespace in the margins and below the content.
struct SynthOptions {
    int min_elements = 3;
    int max_elements = 30;
    /// Vertical whitespace between consecutive blocks, in px.
    double min_gap = 2.0;
    double max_gap = 10.0;
};

/// The eleven DocLayNet-style categories used by the generator.
std::vector<Category> synth_categories();

/// One page. Element ids start at `first_id` and increase by one.
DocumentLayout synth_layout(Rng& rng, const std::string& doc_id, std::int64_t image_id, ElementId first_id,
                            const SynthOptions& opts = {});

/// `n_docs` pages with dataset-wide unique element ids, reproducible from `seed`.
Dataset synth_dataset(std::size_t n_docs, std::uint64_t seed, const SynthOptions& opts = {});

}  // namespace led
