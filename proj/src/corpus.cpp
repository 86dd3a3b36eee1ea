#include "led/corpus.hpp"

#include <cstdio>
#include <sstream>

#include "led/detector.hpp"
#include "led/errors.hpp"
#include "led/injector.hpp"
#include "led/layout_io.hpp"
#include "led/parallel.hpp"
#include "led/rng.hpp"
#include "led/svg.hpp"

namespace led {

namespace fs = std::filesystem;

namespace {

constexpr int kManifestVersion = 1;

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void remove_files(const fs::path& dir, const CorpusFiles& f) {
    std::error_code ec;
    for (const auto* name : {&f.gt, &f.pred, &f.error, &f.gt_svg, &f.pred_svg}) fs::remove(dir / *name, ec);
}

DocumentLayout single_doc(const fs::path& path, Source source) {
    Dataset ds = load_coco(path, source);
    if (ds.documents.size() != 1) throw ValidationError(path.string() + ": expected exactly one document");
    return std::move(ds.documents.front());
}

}  // namespace

CorpusFiles corpus_files(const std::string& doc_id) {
    return {doc_id + ".gt.json", doc_id + ".pred.json", doc_id + ".error.json", doc_id + ".gt.svg",
            doc_id + ".pred.svg"};
}

CorpusManifest build_corpus(const Dataset& input, const ResolvedConfig& cfg, const fs::path& out_dir, int jobs) {
    validate(input);
    cfg.injection.validate();

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    CorpusManifest m;
    m.global_seed = cfg.injection.seed;
    m.config = to_json(cfg);
    m.config.erase("seed");
    m.documents.resize(input.documents.size());

    const std::span<const Category> cats(input.categories);
    parallel_for(input.documents.size(), jobs, [&](std::size_t i) {
        const DocumentLayout& gt = input.documents[i];
        const std::uint64_t seed = derive_seed(cfg.injection.seed, gt.doc_id);
        InjectionPlan plan = sample_plan(gt, cats, cfg.injection, seed, cfg.detector);
        InjectionResult res = inject(gt, cats, plan, cfg.injection, cfg.detector);

        CorpusEntry& e = m.documents[i];
        e.doc_id = gt.doc_id;
        e.files = corpus_files(gt.doc_id);
        e.error_types = res.annotation.error_types;
        for (const auto& o : res.log) {
            if (!o.applied) e.skipped.push_back({o.type, o.skip_reason});
        }
        e.n_gt_elements = gt.elements.size();
        e.n_pred_elements = res.prediction.elements.size();

        try {
            write_text_file(out_dir / e.files.gt, dump_json(to_coco_json(gt, cats)));
            write_text_file(out_dir / e.files.pred, dump_json(to_coco_json(res.prediction, cats)));
            write_text_file(out_dir / e.files.error, dump_json(to_json(res.annotation)));
            write_text_file(out_dir / e.files.gt_svg, render_svg(gt, cats));
            write_text_file(out_dir / e.files.pred_svg, render_svg(res.prediction, cats, &res.annotation));
        } catch (...) {
            remove_files(out_dir, e.files);
            throw;
        }
    });

    std::uint64_t id = derive_seed(cfg.injection.seed, dump_json(m.config));
    for (const auto& e : m.documents) {
        id = derive_seed(id, e.doc_id);
        for (ErrorType t : e.error_types.to_vector()) ++m.type_counts[index_of(t)];
        m.total_elements += e.n_gt_elements;
        m.total_pred_elements += e.n_pred_elements;
    }
    m.corpus_id = hex64(id);

    write_text_file(out_dir / "manifest.json", dump_json(to_json(m)));
    return m;
}

nlohmann::json to_json(const CorpusManifest& m) {
    json docs = json::array();
    for (const auto& e : m.documents) {
        json skipped = json::array();
        for (const auto& s : e.skipped) skipped.push_back({{"type", std::string(to_string(s.type))}, {"reason", s.reason}});
        docs.push_back({{"doc_id", e.doc_id},
                        {"files",
                         {{"gt", e.files.gt},
                          {"pred", e.files.pred},
                          {"error", e.files.error},
                          {"gt_svg", e.files.gt_svg},
                          {"pred_svg", e.files.pred_svg}}},
                        {"error_types", e.error_types.names()},
                        {"skipped", skipped},
                        {"n_gt_elements", e.n_gt_elements},
                        {"n_pred_elements", e.n_pred_elements}});
    }
    json summary = json::object();
    for (ErrorType t : kAllErrorTypes) summary[std::string(to_string(t))] = m.type_counts[index_of(t)];
    return {{"format_version", kManifestVersion},
            {"corpus_id", m.corpus_id},
            {"global_seed", m.global_seed},
            {"config", m.config},
            {"documents", docs},
            {"summary", summary},
            {"total_docs", m.documents.size()},
            {"total_elements", m.total_elements},
            {"total_pred_elements", m.total_pred_elements}};
}

CorpusManifest manifest_from_json(const nlohmann::json& j) {
    try {
        CorpusManifest m;
        if (j.at("format_version").get<int>() != kManifestVersion) {
            throw ValidationError("unsupported manifest format_version");
        }
        m.corpus_id = j.at("corpus_id").get<std::string>();
        m.global_seed = j.at("global_seed").get<std::uint64_t>();
        m.config = j.at("config");
        for (const auto& d : j.at("documents")) {
            CorpusEntry e;
            e.doc_id = d.at("doc_id").get<std::string>();
            const auto& f = d.at("files");
            e.files = {f.at("gt").get<std::string>(), f.at("pred").get<std::string>(),
                       f.at("error").get<std::string>(), f.at("gt_svg").get<std::string>(),
                       f.at("pred_svg").get<std::string>()};
            for (const auto& t : d.at("error_types")) {
                auto et = parse_error_type(t.get<std::string>());
                if (!et) throw ValidationError("unknown error type in manifest: " + t.get<std::string>());
                e.error_types.insert(*et);
            }
            for (const auto& s : d.at("skipped")) {
                auto et = parse_error_type(s.at("type").get<std::string>());
                if (!et) throw ValidationError("unknown error type in manifest");
                e.skipped.push_back({*et, s.at("reason").get<std::string>()});
            }
            e.n_gt_elements = d.at("n_gt_elements").get<std::size_t>();
            e.n_pred_elements = d.at("n_pred_elements").get<std::size_t>();
            m.documents.push_back(std::move(e));
        }
        for (ErrorType t : kAllErrorTypes) {
            m.type_counts[index_of(t)] = j.at("summary").at(std::string(to_string(t))).get<std::size_t>();
        }
        m.total_elements = j.at("total_elements").get<std::size_t>();
        m.total_pred_elements = j.at("total_pred_elements").get<std::size_t>();
        return m;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid manifest: ") + e.what());
    }
}

CorpusManifest load_manifest(const fs::path& corpus_dir) {
    return manifest_from_json(parse_json(read_text_file(corpus_dir / "manifest.json"), "manifest.json"));
}

CorpusRecount recount_corpus(const fs::path& corpus_dir, const CorpusManifest& m) {
    CorpusRecount r;
    for (const auto& e : m.documents) {
        DocumentLayout gt = single_doc(corpus_dir / e.files.gt, Source::GroundTruth);
        DocumentLayout pred = single_doc(corpus_dir / e.files.pred, Source::Prediction);
        ErrorAnnotation ann = load_error_annotation(corpus_dir / e.files.error);
        r.total_elements += gt.elements.size();
        r.total_pred_elements += pred.elements.size();
        for (ErrorType t : ann.error_types.to_vector()) ++r.type_counts[index_of(t)];
        if (gt.elements.size() != e.n_gt_elements || pred.elements.size() != e.n_pred_elements ||
            !(ann.error_types == e.error_types)) {
            r.mismatched_docs.push_back(e.doc_id);
        }
    }
    return r;
}

std::vector<std::string> verify_corpus(const fs::path& corpus_dir, const CorpusManifest& m, const DetectorConfig& cfg,
                                       int jobs) {
    std::vector<char> bad(m.documents.size(), 0);
    parallel_for(m.documents.size(), jobs, [&](std::size_t i) {
        const auto& e = m.documents[i];
        DocumentLayout gt = single_doc(corpus_dir / e.files.gt, Source::GroundTruth);
        DocumentLayout pred = single_doc(corpus_dir / e.files.pred, Source::Prediction);
        ErrorAnnotation ann = load_error_annotation(corpus_dir / e.files.error);
        DiagnosisReport rep = diagnose(gt, pred, cfg);
        bad[i] = !((rep.doc_error_types & ann.error_types) == ann.error_types);
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < bad.size(); ++i) {
        if (bad[i]) out.push_back(m.documents[i].doc_id);
    }
    return out;
}

std::string corpus_stats(const CorpusManifest& m) {
    std::size_t with_errors = 0, skipped = 0, occurrences = 0;
    for (const auto& e : m.documents) {
        with_errors += !e.error_types.empty();
        skipped += e.skipped.size();
    }
    for (auto c : m.type_counts) occurrences += c;

    std::ostringstream os;
    char line[128];
    std::snprintf(line, sizeof line, "%-18s %8s %8s\n", "type", "docs", "share");
    os << line;
    for (ErrorType t : kAllErrorTypes) {
        const std::size_t c = m.type_counts[index_of(t)];
        const double share = occurrences ? 100.0 * static_cast<double>(c) / static_cast<double>(occurrences) : 0.0;
        std::snprintf(line, sizeof line, "%-18s %8zu %7.1f%%\n", std::string(to_string(t)).c_str(), c, share);
        os << line;
    }
    os << "documents: " << m.documents.size() << " (with errors: " << with_errors << ", skipped actions: " << skipped
       << ")\n";
    os << "gt elements: " << m.total_elements << ", pred elements: " << m.total_pred_elements << "\n";
    return os.str();
}

}  // namespace led
