#include "led/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "led/errors.hpp"

namespace led {

namespace {

enum Kind { Caption = 1, Footnote, Formula, ListItem, PageFooter, PageHeader, Picture, SectionHeader, Table, Text, Title };

struct KindSpec {
    Kind kind;
    double weight;
    double h_lo, h_hi;  // nominal height range in px, sampled log-uniformly
    double w_lo, w_hi;  // width as a fraction of the column
};

// Page headers and footers are not generated: they sit in the margins that
// keep whitespace free on every page.
const KindSpec kSpecs[] = {
    {Text, 0.42, 14, 220, 1.0, 1.0},       {SectionHeader, 0.14, 12, 28, 0.3, 0.9},
    {ListItem, 0.12, 14, 60, 0.85, 0.97},  {Picture, 0.06, 80, 260, 0.6, 1.0},
    {Table, 0.06, 80, 260, 0.7, 1.0},      {Caption, 0.08, 12, 40, 0.6, 1.0},
    {Formula, 0.05, 20, 60, 0.4, 0.8},     {Footnote, 0.04, 10, 40, 1.0, 1.0},
    {Title, 0.03, 20, 50, 0.5, 0.9},
};

double round2(double v) { return std::round(v * 100.0) / 100.0; }

double log_uniform(Rng& rng, double lo, double hi) { return std::exp(rng.uniform(std::log(lo), std::log(hi))); }

const KindSpec& draw_kind(Rng& rng) {
    std::vector<double> w;
    for (const auto& s : kSpecs) w.push_back(s.weight);
    return kSpecs[rng.categorical(w)];
}

}  // namespace

std::vector<Category> synth_categories() {
    return {{Caption, "Caption"},       {Footnote, "Footnote"},    {Formula, "Formula"},
            {ListItem, "List-item"},    {PageFooter, "Page-footer"}, {PageHeader, "Page-header"},
            {Picture, "Picture"},       {SectionHeader, "Section-header"}, {Table, "Table"},
            {Text, "Text"},             {Title, "Title"}};
}

DocumentLayout synth_layout(Rng& rng, const std::string& doc_id, std::int64_t image_id, ElementId first_id,
                            const SynthOptions& opts) {
    if (opts.min_elements < 1 || opts.max_elements < opts.min_elements) {
        throw ValidationError("synth: invalid element count range");
    }
    if (!(opts.min_gap >= 0.0) || !(opts.max_gap >= opts.min_gap)) throw ValidationError("synth: invalid gap range");
    DocumentLayout doc;
    doc.doc_id = doc_id;
    doc.image_id = image_id;
    doc.page_width = std::round(rng.uniform(600.0, 1000.0));
    doc.page_height = std::round(doc.page_width * rng.uniform(1.25, 1.45));
    const double mx = doc.page_width * rng.uniform(0.07, 0.12);
    const double my = doc.page_height * rng.uniform(0.06, 0.10);
    const int n = static_cast<int>(rng.between(opts.min_elements, opts.max_elements));
    int columns = 1;
    if (n > 16) {
        columns = 2;
    } else if (n >= 6 && rng.bernoulli(0.4)) {
        columns = 2;
    }
    const double gutter = doc.page_width * rng.uniform(0.02, 0.04);
    const double col_w = (doc.page_width - 2.0 * mx - (columns - 1) * gutter) / columns;
    const double avail_h = doc.page_height - 2.0 * my;

    ElementId next_id = first_id;
    for (int c = 0; c < columns; ++c) {
        const int count = n / columns + (c < n % columns ? 1 : 0);
        struct Block {
            Kind kind;
            double h, w_frac;
            bool centered;
        };
        std::vector<Block> blocks;
        std::vector<double> gaps;
        double sum_h = 0.0, sum_gap = 0.0;
        auto push = [&](Kind kind, double h, double w_frac, bool centered, double gap_lo, double gap_hi) {
            if (!blocks.empty()) {
                gaps.push_back(rng.uniform(gap_lo, gap_hi));
                sum_gap += gaps.back();
            }
            blocks.push_back(Block{kind, h, w_frac, centered});
            sum_h += h;
        };
        while (static_cast<int>(blocks.size()) < count) {
            const KindSpec* shape = &draw_kind(rng);
            if (c == 0 && blocks.empty() && rng.bernoulli(0.3)) shape = &kSpecs[8];  // title
            const double w_frac = rng.uniform(shape->w_lo, shape->w_hi);
            const bool centered = shape->kind == Picture || shape->kind == Table || shape->kind == Formula ||
                                  shape->kind == Title;
            const int left = count - static_cast<int>(blocks.size());
            if (shape->kind == ListItem) {
                // lists come in runs of similar, tightly spaced items
                const int run = std::min(left, static_cast<int>(rng.between(2, 5)));
                for (int k = 0; k < run; ++k) {
                    push(ListItem, log_uniform(rng, shape->h_lo, shape->h_hi), w_frac, false, k ? 1.0 : opts.min_gap,
                         k ? 4.0 : opts.max_gap);
                }
                continue;
            }
            push(shape->kind, log_uniform(rng, shape->h_lo, shape->h_hi), w_frac, centered, opts.min_gap, opts.max_gap);
            if ((shape->kind == Picture || shape->kind == Table) && left >= 2 && rng.bernoulli(0.7)) {
                const KindSpec& cap = kSpecs[5];
                push(Caption, log_uniform(rng, cap.h_lo, cap.h_hi), w_frac, true, 2.0, 6.0);
            }
        }
        const double fill = rng.uniform(0.55, 0.95) * avail_h;
        double h_scale = 1.0;
        if (sum_h + sum_gap > fill) h_scale = std::max(0.05, (fill - sum_gap) / sum_h);

        double y = my;
        const double col_x = mx + c * (col_w + gutter);
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            const Block& b = blocks[i];
            const double h = round2(std::max(4.0, b.h * h_scale));
            const double w = round2(col_w * b.w_frac);
            double x = col_x;
            if (b.centered) x += (col_w - w) / 2.0;
            else if (b.kind == ListItem) x += col_w - w;
            const double y0 = round2(y);
            doc.elements.push_back(LayoutElement{next_id++, BBox(round2(x), y0, w, h), b.kind, Source::GroundTruth});
            y = y0 + h + (i < gaps.size() ? gaps[i] : 0.0);
        }
    }
    return doc;
}

Dataset synth_dataset(std::size_t n_docs, std::uint64_t seed, const SynthOptions& opts) {
    Dataset ds;
    ds.categories = synth_categories();
    ElementId next_id = 1;
    for (std::size_t i = 0; i < n_docs; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "synth-%06zu", i + 1);
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        ds.documents.push_back(synth_layout(rng, name, static_cast<std::int64_t>(i + 1), next_id, opts));
        next_id += static_cast<ElementId>(ds.documents.back().elements.size());
    }
    return ds;
}

}  // namespace led
