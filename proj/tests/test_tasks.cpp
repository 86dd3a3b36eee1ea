#include <gtest/gtest.h>

#include <algorithm>

#include "led/corpus.hpp"
#include "led/layout_io.hpp"
#include "led/rng.hpp"
#include "led/synth.hpp"
#include "led/tasks.hpp"
#include "oracle/confusion.hpp"
#include "support.hpp"

using namespace led;

namespace {

TaskRecord record(Task task, const std::string& doc, ErrorAnnotation gold, std::string_view response) {
    TaskRecord r;
    r.doc_id = doc;
    r.task = task;
    gold.doc_id = doc;
    if (!gold.element_errors.empty() || !gold.missing_gt_ids.empty()) gold.finalize();
    r.gold = std::move(gold);
    ParseResult p = parse_response(task, response);
    r.predicted = p.answer;
    r.parse_status = p.status;
    return r;
}

ErrorAnnotation gold_types(std::initializer_list<ErrorType> types) {
    ErrorAnnotation g;
    for (ErrorType t : types) g.error_types.insert(t);
    g.has_error = !g.error_types.empty();
    return g;
}

const ErrorType kTypes[] = {ErrorType::Missing,  ErrorType::Hallucination, ErrorType::SizeError,
                            ErrorType::Split,    ErrorType::Merge,         ErrorType::Overlap,
                            ErrorType::Duplicate, ErrorType::Misclassification};

ErrorSet random_set(Rng& rng) {
    ErrorSet s;
    for (ErrorType t : kTypes) {
        if (rng.uniform() < 0.3) s.insert(t);
    }
    return s;
}

}  // namespace

TEST(Tasks, NamesParseCaseInsensitively) {
    EXPECT_EQ(parse_task("T2"), Task::T2);
    EXPECT_EQ(parse_task("t3"), Task::T3);
    EXPECT_FALSE(parse_task("t4"));
    EXPECT_EQ(parse_prompting("P1"), Prompting::P1);
    EXPECT_FALSE(parse_prompting(""));
    EXPECT_EQ(to_string(AttachmentRole::PageImage), "page_image");
}

TEST(ParseResponse, ExtractsFirstObjectFromProse) {
    const auto r = parse_response(Task::T1, "Sure. Here it is:\n```json\n{\"has_error\": true}\n```\nDone {x}");
    EXPECT_EQ(r.status, ParseStatus::Ok);
    EXPECT_TRUE(r.answer.has_error);
    EXPECT_FALSE(extract_json_object("no braces here"));
    EXPECT_EQ(extract_json_object("a {\"k\": \"}\"} b")->at("k"), "}");
}

TEST(ParseResponse, StatusClassification) {
    EXPECT_EQ(parse_response(Task::T1, "  \n").status, ParseStatus::Empty);
    EXPECT_EQ(parse_response(Task::T1, "yes, there is an error").status, ParseStatus::Malformed);
    EXPECT_EQ(parse_response(Task::T1, "{\"has_error\": \"yes\"}").status, ParseStatus::Malformed);
    EXPECT_EQ(parse_response(Task::T2, "{\"error_types\": \"missing\"}").status, ParseStatus::Malformed);
    EXPECT_EQ(parse_response(Task::T3, "{\"element_errors\": []}").status, ParseStatus::Malformed);
    const auto bad = parse_response(Task::T2, "{\"error_types\": 3}");
    EXPECT_FALSE(bad.answer.has_error);
    EXPECT_TRUE(bad.answer.error_types.empty());
}

TEST(ParseResponse, T2LabelsAndUnknowns) {
    const auto r = parse_response(Task::T2, R"({"error_types": ["Missing", "size", "wobble"]})");
    ASSERT_EQ(r.status, ParseStatus::Ok);
    EXPECT_TRUE(r.answer.error_types.contains(ErrorType::Missing));
    EXPECT_TRUE(r.answer.error_types.contains(ErrorType::SizeError));
    EXPECT_EQ(r.answer.error_types.size(), 2u);
    EXPECT_EQ(r.answer.unknown_labels, std::vector<std::string>{"wobble"});
}

TEST(ParseResponse, T3ElementsAndMissing) {
    const auto r = parse_response(
        Task::T3, R"({"element_errors": {"4": ["split"], "x": ["merge"]}, "missing_gt_ids": [9, 9, 2]})");
    ASSERT_EQ(r.status, ParseStatus::Ok);
    ASSERT_TRUE(r.answer.element_errors.count(4));
    EXPECT_TRUE(r.answer.element_errors.at(4).contains(ErrorType::Split));
    EXPECT_EQ(r.answer.missing_gt_ids, (std::vector<ElementId>{2, 9}));
    EXPECT_TRUE(r.answer.error_types.contains(ErrorType::Missing));
    EXPECT_EQ(r.answer.unknown_labels.size(), 1u);
}

TEST(Score, F1Definition) {
    EXPECT_DOUBLE_EQ(f1_score(0, 0, 0), 1.0);
    EXPECT_DOUBLE_EQ(f1_score(0, 1, 0), 0.0);
    EXPECT_DOUBLE_EQ(f1_score(2, 1, 1), 4.0 / 6.0);
}

TEST(Score, T1Accuracy) {
    std::vector<TaskRecord> recs{
        record(Task::T1, "a", gold_types({ErrorType::Missing}), R"({"has_error": true})"),
        record(Task::T1, "b", gold_types({}), R"({"has_error": false})"),
        record(Task::T1, "c", gold_types({ErrorType::Merge}), R"({"has_error": true})"),
        record(Task::T1, "d", gold_types({}), R"({"has_error": true})"),
    };
    EXPECT_DOUBLE_EQ(*score_t1(recs).accuracy, 0.75);

    // Unusable answers count as "no error".
    for (auto& r : recs) r = record(Task::T1, r.doc_id, r.gold, "garbage");
    const ScoreReport rep = score_t1(recs);
    EXPECT_DOUBLE_EQ(*rep.accuracy, 0.5);
    EXPECT_EQ(rep.n_malformed, 4u);
    EXPECT_DOUBLE_EQ(rep.parse_failure_rate, 1.0);
}

TEST(Score, T1AllMalformedOnErrorDocsIsZero) {
    std::vector<TaskRecord> recs;
    for (int i = 0; i < 5; ++i) recs.push_back(record(Task::T1, std::to_string(i), gold_types({ErrorType::Split}), "?"));
    EXPECT_DOUBLE_EQ(*score_t1(recs).accuracy, 0.0);
}

TEST(Score, T2Example) {
    // gold {Missing} / {Size}; predicted {Missing, Size} / {Size}: TP 2, FP 1
    const std::vector<TaskRecord> recs{
        record(Task::T2, "a", gold_types({ErrorType::Missing}), R"({"error_types": ["missing", "size"]})"),
        record(Task::T2, "b", gold_types({ErrorType::SizeError}), R"({"error_types": ["size"]})"),
    };
    const ScoreReport r = score_t2(recs);
    EXPECT_EQ(r.tp, 2u);
    EXPECT_EQ(r.fp, 1u);
    EXPECT_EQ(r.fn, 0u);
    EXPECT_NEAR(*r.micro_f1, 0.8, 1e-12);
    const TypeScore& size = r.per_type[index_of(ErrorType::SizeError)];
    EXPECT_TRUE(size.included);
    EXPECT_NEAR(size.f1, 2.0 / 3.0, 1e-12);
    EXPECT_FALSE(r.per_type[index_of(ErrorType::Merge)].included);
    EXPECT_NEAR(*r.macro_f1, (1.0 + 2.0 / 3.0) / 2.0, 1e-12);
}

TEST(Score, T3Example) {
    ErrorAnnotation g;
    g.element_errors[1].insert(ErrorType::Split);
    g.missing_gt_ids = {7};
    const std::vector<TaskRecord> recs{record(Task::T3, "c", g, R"({"element_errors": {"1": ["split"]}})")};
    const ScoreReport r = score_t3(recs);
    EXPECT_EQ(r.tp, 1u);
    EXPECT_EQ(r.fn, 1u);
    EXPECT_NEAR(*r.micro_f1, 2.0 / 3.0, 1e-12);
}

TEST(Score, EmptyGoldAndSilentAnswerIsPerfect) {
    const std::vector<TaskRecord> recs{record(Task::T2, "a", gold_types({}), R"({"error_types": []})")};
    const ScoreReport r = score_t2(recs);
    EXPECT_DOUBLE_EQ(*r.micro_f1, 1.0);
    EXPECT_DOUBLE_EQ(*r.macro_f1, 1.0);
}

TEST(Score, GoldAsAnswerIsPerfect) {
    Rng rng(4);
    for (Task t : {Task::T1, Task::T2, Task::T3}) {
        std::vector<TaskRecord> recs;
        for (int i = 0; i < 30; ++i) {
            TaskRecord r;
            r.doc_id = std::to_string(i);
            r.task = t;
            r.gold.doc_id = r.doc_id;
            r.gold.element_errors[i + 1] = random_set(rng);
            r.gold.element_errors[i + 1].erase(ErrorType::Missing);
            if (r.gold.element_errors[i + 1].empty()) r.gold.element_errors.clear();
            if (i % 4 == 0) r.gold.missing_gt_ids = {100 + i};
            r.gold.finalize();
            r.predicted = answer_from_gold(r.gold);
            recs.push_back(r);
        }
        const ScoreReport rep = score(t, recs);
        if (t == Task::T1) {
            EXPECT_DOUBLE_EQ(*rep.accuracy, 1.0);
        } else {
            EXPECT_DOUBLE_EQ(*rep.micro_f1, 1.0);
            EXPECT_DOUBLE_EQ(*rep.macro_f1, 1.0);
        }
    }
}

// Random gold/answer pairs checked against brute-force key-set counting, then
// shuffled to confirm the record order does not matter.
TEST(Score, MatchesConfusionOracleAndIgnoresOrder) {
    Rng rng(8);
    for (int round = 0; round < 50; ++round) {
        std::vector<TaskRecord> t2, t3;
        const int n = 1 + static_cast<int>(rng.below(20));
        for (int i = 0; i < n; ++i) {
            const std::string doc = "d" + std::to_string(i);
            TaskRecord r2;
            r2.doc_id = doc;
            r2.task = Task::T2;
            r2.gold.error_types = random_set(rng);
            r2.predicted.error_types = random_set(rng);
            if (rng.uniform() < 0.1) {
                r2.parse_status = ParseStatus::Malformed;
                r2.predicted = {};
            }
            t2.push_back(r2);

            TaskRecord r3;
            r3.doc_id = doc;
            r3.task = Task::T3;
            for (ElementId id = 1; id <= 4; ++id) {
                ErrorSet g = random_set(rng), p = random_set(rng);
                g.erase(ErrorType::Missing);
                p.erase(ErrorType::Missing);
                if (!g.empty()) r3.gold.element_errors[id] = g;
                if (!p.empty()) r3.predicted.element_errors[id] = p;
            }
            for (ElementId id = 10; id < 13; ++id) {
                if (rng.uniform() < 0.4) r3.gold.missing_gt_ids.push_back(id);
                if (rng.uniform() < 0.4) r3.predicted.missing_gt_ids.push_back(id);
            }
            r3.gold.finalize();
            t3.push_back(r3);
        }
        const auto o2 = oracle::t2_counts(t2), o3 = oracle::t3_counts(t3);
        const ScoreReport s2 = score_t2(t2), s3 = score_t3(t3);
        EXPECT_EQ(s2.tp, static_cast<std::size_t>(o2.tp));
        EXPECT_EQ(s2.fp, static_cast<std::size_t>(o2.fp));
        EXPECT_EQ(s2.fn, static_cast<std::size_t>(o2.fn));
        EXPECT_NEAR(*s2.micro_f1, o2.f1(), 1e-12);
        EXPECT_EQ(s3.tp, static_cast<std::size_t>(o3.tp));
        EXPECT_EQ(s3.fp, static_cast<std::size_t>(o3.fp));
        EXPECT_EQ(s3.fn, static_cast<std::size_t>(o3.fn));
        EXPECT_NEAR(*s3.micro_f1, o3.f1(), 1e-12);

        rng.shuffle(t2);
        rng.shuffle(t3);
        EXPECT_EQ(to_json(score_t2(t2)), to_json(s2));
        EXPECT_EQ(to_json(score_t3(t3)), to_json(s3));
    }
}

class Bundles : public ::testing::Test {
protected:
    void SetUp() override {
        ResolvedConfig cfg;
        cfg.injection.seed = 5;
        build_corpus(synth_dataset(4, 6), cfg, corpus_.path(), 1);
    }
    testing_support::TempDir corpus_{"bundle-corpus"};
    testing_support::TempDir out_{"bundle-out"};
};

TEST_F(Bundles, P2CarriesVisualizationOnly) {
    const auto bundles = emit_bundles(corpus_.path(), Task::T1, Prompting::P2, out_.path(), 1);
    ASSERT_EQ(bundles.size(), 4u);
    for (const auto& b : bundles) {
        ASSERT_EQ(b.attachments.size(), 1u);
        EXPECT_EQ(b.attachments[0].role, AttachmentRole::VizImage);
        const fs::path dir = out_.path() / "t1" / "p2";
        EXPECT_TRUE(fs::exists(dir / (b.doc_id + ".bundle.json")));
        EXPECT_TRUE(fs::exists(dir / b.attachments[0].path));
        EXPECT_NE(b.instruction_text.find("has_error"), std::string::npos);
    }
}

TEST_F(Bundles, P3CarriesAllRolesAndReemitIsIdempotent) {
    const auto bundles = emit_bundles(corpus_.path(), Task::T2, Prompting::P3, out_.path(), 1);
    const std::vector<AttachmentRole> want{AttachmentRole::PageImage, AttachmentRole::VizImage,
                                           AttachmentRole::PredictionJson};
    EXPECT_EQ(attachment_roles(Prompting::P3), want);
    for (const auto& b : bundles) {
        ASSERT_EQ(b.attachments.size(), 3u);
        for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(b.attachments[i].role, want[i]);
        EXPECT_EQ(b.attachments[0].path, "");  // synthetic pages have no image
        EXPECT_NE(b.instruction_text.find("error_types"), std::string::npos);
        const auto j = parse_json(testing_support::slurp(out_.path() / "t2" / "p3" / (b.doc_id + ".bundle.json")), "bundle");
        EXPECT_EQ(j, to_json(b));
    }
    testing_support::TempDir again("bundle-again");
    emit_bundles(corpus_.path(), Task::T2, Prompting::P3, again.path(), 2);
    emit_bundles(corpus_.path(), Task::T2, Prompting::P3, out_.path(), 2);
    std::string why;
    EXPECT_TRUE(testing_support::same_tree(out_.path(), again.path(), &why)) << why;
}

TEST_F(Bundles, GoldResponsesScorePerfectly) {
    const CorpusManifest m = load_manifest(corpus_.path());
    testing_support::TempDir responses("responses");
    for (const auto& e : m.documents) {
        const ErrorAnnotation g = load_error_annotation(corpus_.path() / e.files.error);
        nlohmann::json a = to_json(g);
        write_text_file(responses / (e.doc_id + ".txt"), "Answer:\n" + a.dump());
    }
    for (Task t : {Task::T1, Task::T2, Task::T3}) {
        const auto recs = load_records(t, corpus_.path(), responses.path(), 1);
        ASSERT_EQ(recs.size(), 4u);
        const ScoreReport r = score(t, recs);
        EXPECT_EQ(r.n_malformed + r.n_empty, 0u);
        if (t == Task::T1) EXPECT_DOUBLE_EQ(*r.accuracy, 1.0);
        else EXPECT_DOUBLE_EQ(*r.micro_f1, 1.0);
    }
    fs::remove(responses / (m.documents[0].doc_id + ".txt"));
    EXPECT_EQ(score(Task::T2, load_records(Task::T2, corpus_.path(), responses.path(), 1)).n_empty, 1u);
}
