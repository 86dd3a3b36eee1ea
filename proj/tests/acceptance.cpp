// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "led/corpus.hpp"
#include "led/detector.hpp"
#include "led/injector.hpp"
#include "led/layout_io.hpp"
#include "led/rng.hpp"
#include "led/synth.hpp"
#include "led/tasks.hpp"
#include "oracle/raster_iou.hpp"
#include "support.hpp"

using namespace led;
using testing_support::TempDir;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& name, const std::string& detail) {
    std::printf("%s [%d] %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    failures += !pass;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// Results shared between criteria 1 and 9.
struct RoundTrip {
    std::size_t structural_conflicts = 0;
    std::size_t co_injected = 0;
};

RoundTrip criterion_round_trip() {
    constexpr std::size_t kLayouts = 200;
    const Dataset ds = synth_dataset(kLayouts, 20241015, {3, 30});
    InjectionConfig cfg;
    cfg.misclassification_co_rate = 0.25;
    RoundTrip rt;
    bool all_pass = true;
    std::string detail;
    for (ErrorType t : kAllErrorTypes) {
        std::size_t skipped = 0, sound = 0, applied = 0;
        for (const auto& gt : ds.documents) {
            const std::uint64_t seed = derive_seed(derive_seed(7, std::string(to_string(t))), gt.doc_id);
            InjectionPlan plan = plan_single(gt, ds.categories, cfg, t, seed);
            InjectionResult res = inject(gt, ds.categories, plan, cfg);
            bool primary = false, co = false;
            for (const auto& o : res.log) {
                if (o.type == t && !o.co_injected) primary = o.applied;
                if (o.co_injected && o.applied) co = true;
            }
            if (!primary) {
                ++skipped;
                continue;
            }
            ++applied;
            rt.co_injected += co;
            ErrorSet expected;
            expected.insert(t);
            if (co) expected.insert(ErrorType::Misclassification);
            DiagnosisReport rep = diagnose(gt, res.prediction);
            sound += rep.doc_error_types == expected && res.annotation.error_types == expected;
            for (const auto& [id, s] : rep.per_pred) rt.structural_conflicts += s.structural().size() > 1;
            for (const auto& [id, s] : res.annotation.element_errors) rt.structural_conflicts += s.structural().size() > 1;
        }
        const double skip_rate = static_cast<double>(skipped) / kLayouts;
        const double sound_rate = applied ? static_cast<double>(sound) / static_cast<double>(applied) : 0.0;
        const bool pass = applied > 0 && sound_rate >= 0.99 && skip_rate < 0.10;
        all_pass = all_pass && pass;
        detail += std::string(to_string(t)) + fmt(" %.1f%% sound / %.1f%% skipped; ", 100 * sound_rate, 100 * skip_rate);
    }
    report(1, all_pass, "round-trip soundness per type", detail);
    return rt;
}

void criterion_clean_fixed_point() {
    const Dataset ds = synth_dataset(1000, 99, {3, 30});
    std::size_t clean = 0;
    for (const auto& d : ds.documents) clean += !diagnose(d, d).has_error;
    report(2, clean == ds.documents.size(), "clean fixed point",
           fmt("%.0f/%.0f layouts clean", static_cast<double>(clean), static_cast<double>(ds.documents.size())));
}

void criterion_iou_oracle() {
    Rng rng(314159);
    auto interval = [&] {
        const auto a = rng.between(0, 99), b = rng.between(0, 99);
        const auto lo = std::min(a, b), hi = std::max(a, b) + 1;
        return std::pair<double, double>(static_cast<double>(lo), static_cast<double>(hi - lo));
    };
    double worst = 0.0;
    std::size_t ok = 0;
    for (int i = 0; i < 1000; ++i) {
        auto [ax, aw] = interval();
        auto [ay, ah] = interval();
        auto [bx, bw] = interval();
        auto [by, bh] = interval();
        const double got = iou(BBox(ax, ay, aw, ah), BBox(bx, by, bw, bh));
        const double want = oracle::raster_iou({ax, ay, aw, ah}, {bx, by, bw, bh});
        const double err = std::abs(got - want);
        worst = std::max(worst, err);
        ok += err <= 1e-3;
    }
    report(3, ok == 1000, "IoU vs rasterization oracle", fmt("%.0f/1000 within 1e-3, max error %.3g", ok, worst));
}

void criterion_distribution() {
    constexpr std::size_t kPlans = 10000;
    const Dataset ds = synth_dataset(kPlans, 4242, {3, 30});
    InjectionConfig cfg;
    std::array<std::size_t, kErrorTypeCount> drawn{};
    for (std::size_t i = 0; i < kPlans; ++i) {
        InjectionPlan plan = sample_plan(ds.documents[i], ds.categories, cfg, derive_seed(17, i));
        for (const auto& a : plan.actions) {
            if (!a.co_injected) ++drawn[index_of(a.type)];
        }
    }
    const auto target = default_error_distribution();
    double worst = 0.0;
    std::string detail;
    for (ErrorType t : kAllErrorTypes) {
        const double p = static_cast<double>(drawn[index_of(t)]) / kPlans;
        worst = std::max(worst, std::abs(p - target[index_of(t)]));
        detail += std::string(to_string(t)) + fmt(" %.2f%% ", 100 * p);
    }
    report(4, worst <= 0.02, "plan type distribution", detail + fmt("(max deviation %.2fpp)", 100 * worst));
}

void criterion_corpus_and_scoring(const fs::path& work) {
    const fs::path corpus = work / "corpus";
    const Dataset input = synth_dataset(500, 5, {3, 30});
    const auto t0 = std::chrono::steady_clock::now();
    CorpusManifest m = build_corpus(input, ResolvedConfig{}, corpus);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CorpusRecount rc = recount_corpus(corpus, load_manifest(corpus));
    const bool counts_ok = rc.total_elements == m.total_elements && rc.total_pred_elements == m.total_pred_elements &&
                           rc.type_counts == m.type_counts && rc.mismatched_docs.empty();
    report(5, secs < 60.0 && counts_ok && m.documents.size() == 500, "500-document corpus build",
           fmt("%.2fs, %.0f gt elements, recount ", secs, static_cast<double>(m.total_elements)) +
               (counts_ok ? "matches manifest" : "DIFFERS from manifest"));

    // Gold annotations fed back as model responses.
    const fs::path responses = work / "responses";
    fs::create_directories(responses);
    for (const auto& e : m.documents) fs::copy_file(corpus / e.files.error, responses / (e.doc_id + ".txt"));
    bool perfect = true;
    std::string detail;
    for (Task t : {Task::T1, Task::T2, Task::T3}) {
        ScoreReport r = score(t, load_records(t, corpus, responses));
        if (t == Task::T1) {
            perfect = perfect && r.accuracy == 1.0;
            detail += fmt("t1 acc %.6f; ", *r.accuracy);
        } else {
            perfect = perfect && r.micro_f1 == 1.0 && r.macro_f1 == 1.0;
            detail += std::string(to_string(t)) + fmt(" micro %.6f macro %.6f; ", *r.micro_f1, *r.macro_f1);
        }
        perfect = perfect && r.n_malformed == 0 && r.n_empty == 0;
    }
    report(6, perfect, "scorer self-test on gold", detail);
}

void criterion_hand_examples() {
    TaskRecord a, b;
    a.doc_id = "a";
    b.doc_id = "b";
    a.task = b.task = Task::T2;
    a.gold.error_types.insert(ErrorType::Missing);
    b.gold.error_types.insert(ErrorType::SizeError);
    a.predicted.error_types.insert(ErrorType::Missing);
    a.predicted.error_types.insert(ErrorType::SizeError);
    b.predicted.error_types.insert(ErrorType::SizeError);
    const std::vector<TaskRecord> t2{a, b};
    const double f2 = *score_t2(t2).micro_f1;

    TaskRecord c;
    c.doc_id = "c";
    c.task = Task::T3;
    c.gold.element_errors[1].insert(ErrorType::Split);
    c.gold.missing_gt_ids = {7};
    c.gold.finalize();
    c.predicted.element_errors[1].insert(ErrorType::Split);
    const std::vector<TaskRecord> t3{c};
    const double f3 = *score_t3(t3).micro_f1;
    const bool pass = std::abs(f2 - 0.8) <= 1e-9 && std::abs(f3 - 2.0 / 3.0) <= 1e-9;
    report(7, pass, "scorer hand-checked examples", fmt("T2 F1 %.12f (want 0.8), T3 F1 %.12f (want 2/3)", f2, f3));
}

void criterion_cli_determinism(const fs::path& work) {
    const std::string led = LED_BINARY;
    const fs::path in = work / "synth.json";
    int rc = testing_support::run(led + " synth --docs 60 --seed 11 --out " + in.string());
    rc |= testing_support::run(led + " build --in " + in.string() + " --out " + (work / "b1").string() +
                               " --seed 42 --jobs 1 2>/dev/null");
    rc |= testing_support::run(led + " build --in " + in.string() + " --out " + (work / "b2").string() +
                               " --seed 42 --jobs 1 2>/dev/null");
    rc |= testing_support::run(led + " build --in " + in.string() + " --out " + (work / "b3").string() +
                               " --seed 42 --jobs 4 2>/dev/null");
    std::string why;
    const bool same = rc == 0 && testing_support::same_tree(work / "b1", work / "b2", &why) &&
                      testing_support::same_tree(work / "b1", work / "b3", &why);
    report(8, same, "led build determinism", same ? "3 builds (jobs 1, 1, 4) byte-identical" : "differs: " + why);
}

}  // namespace

int main() {
    TempDir work("acceptance");
    RoundTrip rt = criterion_round_trip();
    criterion_clean_fixed_point();
    criterion_iou_oracle();
    criterion_distribution();
    criterion_corpus_and_scoring(work.path());
    criterion_hand_examples();
    criterion_cli_determinism(work.path());
    report(9, rt.structural_conflicts == 0 && rt.co_injected >= 50, "structural exclusivity and co-injection",
           fmt("%.0f elements with two structural labels, %.0f co-injected misclassifications",
               static_cast<double>(rt.structural_conflicts), static_cast<double>(rt.co_injected)));
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
