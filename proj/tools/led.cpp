// led: command-line front end for the layout error detection toolkit.
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "led/config.hpp"
#include "led/corpus.hpp"
#include "led/detector.hpp"
#include "led/errors.hpp"
#include "led/injector.hpp"
#include "led/layout_io.hpp"
#include "led/parallel.hpp"
#include "led/rng.hpp"
#include "led/svg.hpp"
#include "led/synth.hpp"
#include "led/tasks.hpp"

namespace fs = std::filesystem;
using namespace led;

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    int jobs = 0;
};

void add_config(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "JSON config file (keys named after config fields)")
        ->default_str("none");
}

void add_seed(CLI::App* cmd, Common& c) {
    cmd->add_option("--seed", c.seed, "Global seed (overrides config file and LED_SEED)")->default_str("0");
}

void add_jobs(CLI::App* cmd, Common& c) {
    cmd->add_option("--jobs", c.jobs, "Worker threads, 0 = all cores")->capture_default_str();
}

ResolvedConfig resolve(const Common& c) {
    ResolvedConfig cfg;
    if (const char* env = std::getenv("LED_SEED"); env && *env) {
        try {
            std::size_t used = 0;
            cfg.injection.seed = std::stoull(env, &used);
            if (used != std::string(env).size()) throw std::invalid_argument(env);
        } catch (const std::exception&) {
            throw UsageError(std::string("LED_SEED is not an unsigned integer: ") + env);
        }
    }
    if (!c.config.empty()) cfg = load_config(c.config, cfg);
    if (c.seed) cfg.injection.seed = *c.seed;
    return cfg;
}

void emit_json(const json& j, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << dump_json(j);
    } else {
        write_text_file(out, dump_json(j));
    }
}

Task task_arg(const std::string& s) {
    auto t = parse_task(s);
    if (!t) throw UsageError("unknown task '" + s + "' (expected t1, t2 or t3)");
    return *t;
}

Prompting prompting_arg(const std::string& s) {
    auto p = parse_prompting(s);
    if (!p) throw UsageError("unknown prompting '" + s + "' (expected p1, p2 or p3)");
    return *p;
}

int run_detect(const std::string& gt_path, const std::string& pred_path, const std::string& out, const Common& c) {
    const ResolvedConfig cfg = resolve(c);
    Dataset gt = load_coco(gt_path, Source::GroundTruth);
    Dataset pred = load_coco(pred_path, Source::Prediction);
    std::map<std::string, const DocumentLayout*> by_id;
    for (const auto& d : pred.documents) by_id[d.doc_id] = &d;
    if (pred.documents.size() > gt.documents.size()) {
        throw ValidationError("prediction file has documents that are not in the ground truth");
    }
    std::vector<DocumentPair> pairs;
    for (const auto& d : gt.documents) {
        auto it = by_id.find(d.doc_id);
        if (it == by_id.end()) {
            if (gt.documents.size() == 1 && pred.documents.size() == 1) {
                throw ValidationError("doc_id mismatch: gt '" + d.doc_id + "' vs pred '" +
                                      pred.documents.front().doc_id + "'");
            }
            throw ValidationError("no prediction for document '" + d.doc_id + "'");
        }
        pairs.push_back({&d, it->second});
    }
    std::vector<DiagnosisReport> reports = diagnose_batch(pairs, cfg.detector, c.jobs);
    std::size_t flagged = 0;
    json out_json = json::array();
    for (const auto& r : reports) {
        flagged += r.has_error;
        out_json.push_back(to_json(r.to_annotation()));
    }
    emit_json(reports.size() == 1 ? out_json.front() : out_json, out);
    std::cerr << "detect: " << reports.size() << " document(s), " << flagged << " with errors\n";
    return 0;
}

int run_inject(const std::string& in, const std::string& out_dir, const std::string& type_name, const Common& c) {
    const ResolvedConfig cfg = resolve(c);
    Dataset ds = load_coco(in, Source::GroundTruth);
    validate(ds);
    std::optional<ErrorType> forced;
    if (!type_name.empty()) {
        forced = parse_error_type(type_name);
        if (!forced) throw UsageError("unknown error type '" + type_name + "'");
    }
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());

    std::vector<std::size_t> skipped(ds.documents.size(), 0);
    parallel_for(ds.documents.size(), c.jobs, [&](std::size_t i) {
        const DocumentLayout& gt = ds.documents[i];
        const std::uint64_t seed = derive_seed(cfg.injection.seed, gt.doc_id);
        InjectionPlan plan = forced ? plan_single(gt, ds.categories, cfg.injection, *forced, seed, cfg.detector)
                                    : sample_plan(gt, ds.categories, cfg.injection, seed, cfg.detector);
        InjectionResult res = inject(gt, ds.categories, plan, cfg.injection, cfg.detector);
        json log = json::array();
        for (const auto& o : res.log) {
            log.push_back(to_json(o));
            skipped[i] += !o.applied;
        }
        json plan_json = to_json(plan);
        plan_json["outcomes"] = log;
        const fs::path dir(out_dir);
        write_text_file(dir / (gt.doc_id + ".pred.json"), dump_json(to_coco_json(res.prediction, ds.categories)));
        write_text_file(dir / (gt.doc_id + ".error.json"), dump_json(to_json(res.annotation)));
        write_text_file(dir / (gt.doc_id + ".plan.json"), dump_json(plan_json));
    });
    std::size_t total_skipped = 0;
    for (auto s : skipped) total_skipped += s;
    std::cerr << "inject: " << ds.documents.size() << " document(s), " << total_skipped << " skipped action(s)\n";
    return 0;
}

int run_build(const std::string& in, const std::string& out, bool verify, const Common& c) {
    const ResolvedConfig cfg = resolve(c);
    Dataset ds = load_coco(in, Source::GroundTruth);
    CorpusManifest m = build_corpus(ds, cfg, out, c.jobs);
    std::cerr << corpus_stats(m);
    if (verify) {
        auto bad = verify_corpus(out, m, cfg.detector, c.jobs);
        std::cerr << "verify: " << bad.size() << " document(s) where the detector misses an injected type\n";
        for (const auto& id : bad) std::cerr << "  " << id << "\n";
        if (!bad.empty()) throw ValidationError("corpus verification failed");
    }
    return 0;
}

int run_emit(const std::string& corpus, const std::string& task, const std::string& prompting,
             const std::string& out, const Common& c) {
    auto bundles = emit_bundles(corpus, task_arg(task), prompting_arg(prompting), out, c.jobs);
    std::cerr << "emit: " << bundles.size() << " bundle(s)\n";
    return 0;
}

int run_score(const std::string& task, const std::string& gold, const std::string& responses,
              const std::string& report, const std::string& prompting, const Common& c) {
    const Task t = task_arg(task);
    std::vector<TaskRecord> records = load_records(t, gold, responses, c.jobs);
    ScoreReport r = score(t, records);
    if (!prompting.empty()) r.prompting = prompting_arg(prompting);
    json j = to_json(r);
    emit_json(j, report);
    if (t == Task::T1) {
        std::cerr << "score: accuracy " << *r.accuracy;
    } else {
        std::cerr << "score: micro-F1 " << *r.micro_f1 << " (headline), macro-F1 " << *r.macro_f1;
    }
    std::cerr << ", parse failures " << r.n_malformed + r.n_empty << "/" << r.n_docs << "\n";
    return 0;
}

int run_render(const std::string& doc_path, const std::string& out, const std::string& errors,
               const std::string& doc_id) {
    Dataset ds = load_coco(doc_path);
    const DocumentLayout* doc = nullptr;
    if (doc_id.empty()) {
        if (ds.documents.size() != 1) throw UsageError("file holds several documents; pass --doc-id");
        doc = &ds.documents.front();
    } else {
        for (const auto& d : ds.documents) {
            if (d.doc_id == doc_id) doc = &d;
        }
        if (!doc) throw ValidationError("no document '" + doc_id + "' in " + doc_path);
    }
    std::optional<ErrorAnnotation> ann;
    if (!errors.empty()) ann = load_error_annotation(errors);
    const std::string svg = render_svg(*doc, ds.categories, ann ? &*ann : nullptr);
    if (out.empty() || out == "-") {
        std::cout << svg;
    } else {
        write_text_file(out, svg);
    }
    return 0;
}

int run_synth(std::size_t docs, const std::string& out, const SynthOptions& opts, const Common& c) {
    const ResolvedConfig cfg = resolve(c);
    Dataset ds = synth_dataset(docs, cfg.injection.seed, opts);
    emit_json(to_coco_json(ds), out);
    return 0;
}

int category_exit(ErrorCategory cat) { return static_cast<int>(cat); }

void report_error(ErrorCategory cat, const std::string& msg) {
    std::string line = msg;
    for (char& ch : line) {
        if (ch == '\n') ch = ' ';
    }
    std::cerr << "led: error[" << category_name(cat) << "]: " << line << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"led: inject, detect and score layout detection errors"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "led 0.1.0");

    Common common;
    std::string gt, pred, out, in, corpus, task, prompting, gold, responses, report, doc, errors, doc_id, type_name;
    bool verify = false;
    std::size_t n_docs = 100;
    SynthOptions synth_opts;

    auto* detect = app.add_subcommand("detect", "Diagnose predicted layouts against ground truth");
    detect->add_option("--gt", gt, "Ground-truth COCO JSON")->required()->check(CLI::ExistingFile);
    detect->add_option("--pred", pred, "Predicted COCO JSON")->required()->check(CLI::ExistingFile);
    detect->add_option("--out", out, "Error JSON output file ('-' = stdout)")->default_str("-");
    add_config(detect, common);
    add_jobs(detect, common);

    auto* inject_cmd = app.add_subcommand("inject", "Inject errors into every document of a COCO file");
    inject_cmd->add_option("--in", in, "Clean ground-truth COCO JSON")->required()->check(CLI::ExistingFile);
    inject_cmd->add_option("--out-dir", out, "Directory for <doc>.pred/.error/.plan.json")->required();
    inject_cmd->add_option("--type", type_name, "Inject exactly this error type instead of sampling")
        ->default_str("sampled");
    add_seed(inject_cmd, common);
    add_config(inject_cmd, common);
    add_jobs(inject_cmd, common);

    auto* build = app.add_subcommand("build", "Build an error corpus with manifest");
    build->add_option("--in", in, "Clean ground-truth COCO JSON")->required()->check(CLI::ExistingFile);
    build->add_option("--out", out, "Corpus output directory")->required();
    build->add_flag("--verify", verify, "Re-run the detector over the written corpus")->capture_default_str();
    add_seed(build, common);
    add_config(build, common);
    add_jobs(build, common);

    auto* emit = app.add_subcommand("emit", "Write prompt bundles for a corpus");
    emit->add_option("--corpus", corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);
    emit->add_option("--task", task, "t1, t2 or t3")->required();
    emit->add_option("--prompting", prompting, "p1, p2 or p3")->required();
    emit->add_option("--out", out, "Bundle root directory")->required();
    add_jobs(emit, common);

    auto* score_cmd = app.add_subcommand("score", "Score model responses against corpus gold labels");
    score_cmd->add_option("--task", task, "t1, t2 or t3")->required();
    score_cmd->add_option("--gold", gold, "Corpus directory with <doc>.error.json")
        ->required()
        ->check(CLI::ExistingDirectory);
    score_cmd->add_option("--responses", responses, "Directory of <doc>.txt responses")->required();
    score_cmd->add_option("--report", report, "Report JSON output file ('-' = stdout)")->default_str("-");
    score_cmd->add_option("--prompting", prompting, "Prompting method recorded in the report")->default_str("none");
    add_jobs(score_cmd, common);

    auto* render = app.add_subcommand("render", "Render a layout as SVG");
    render->add_option("--doc", doc, "COCO JSON")->required()->check(CLI::ExistingFile);
    render->add_option("--out", out, "SVG output file ('-' = stdout)")->default_str("-");
    render->add_option("--errors", errors, "Error JSON whose labels are drawn")->default_str("none");
    render->add_option("--doc-id", doc_id, "Document to render when the file holds several")->default_str("only");

    auto* synth = app.add_subcommand("synth", "Generate random clean layouts as COCO JSON");
    synth->add_option("--docs", n_docs, "Number of documents")->capture_default_str();
    synth->add_option("--min-elements", synth_opts.min_elements, "Fewest elements per page")->capture_default_str();
    synth->add_option("--max-elements", synth_opts.max_elements, "Most elements per page")->capture_default_str();
    synth->add_option("--out", out, "COCO output file ('-' = stdout)")->default_str("-");
    add_seed(synth, common);
    add_config(synth, common);

    auto* stats = app.add_subcommand("stats", "Print the error-type table of a corpus");
    stats->add_option("--corpus", corpus, "Corpus directory")->required()->check(CLI::ExistingDirectory);

    auto* config_cmd = app.add_subcommand("config", "Print the resolved configuration as JSON");
    add_seed(config_cmd, common);
    add_config(config_cmd, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error(ErrorCategory::Usage, e.what());
        return category_exit(ErrorCategory::Usage);
    }

    try {
        if (*detect) return run_detect(gt, pred, out, common);
        if (*inject_cmd) return run_inject(in, out, type_name, common);
        if (*build) return run_build(in, out, verify, common);
        if (*emit) return run_emit(corpus, task, prompting, out, common);
        if (*score_cmd) return run_score(task, gold, responses, report, prompting, common);
        if (*render) return run_render(doc, out, errors, doc_id);
        if (*synth) return run_synth(n_docs, out, synth_opts, common);
        if (*stats) {
            std::cout << corpus_stats(load_manifest(corpus));
            return 0;
        }
        if (*config_cmd) {
            std::cout << dump_json(to_json(resolve(common)));
            return 0;
        }
    } catch (const Error& e) {
        report_error(e.category(), e.what());
        return category_exit(e.category());
    } catch (const std::exception& e) {
        report_error(ErrorCategory::Internal, e.what());
        return category_exit(ErrorCategory::Internal);
    }
    return 0;
}
