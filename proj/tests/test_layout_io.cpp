#include <gtest/gtest.h>

#include "led/errors.hpp"
#include "led/layout_io.hpp"
#include "led/synth.hpp"
#include "support.hpp"

using namespace led;

namespace {

const char* kMinimal = R"({
  "images": [{"id": 7, "file_name": "pages/report_p1.png", "width": 200, "height": 300}],
  "annotations": [
    {"id": 1, "image_id": 7, "category_id": 1, "bbox": [10, 10, 50, 20]},
    {"id": 2, "image_id": 7, "category_id": 2, "bbox": [10, 40, 100.5, 60.25]}
  ],
  "categories": [{"id": 1, "name": "Title"}, {"id": 2, "name": "Text"}]
})";

}  // namespace

TEST(LayoutIo, MinimalFile) {
    Dataset ds = parse_coco(kMinimal);
    ASSERT_EQ(ds.documents.size(), 1u);
    const DocumentLayout& d = ds.documents[0];
    EXPECT_EQ(d.doc_id, "report_p1");
    EXPECT_EQ(d.image_id, 7);
    EXPECT_EQ(d.page_width, 200.0);
    EXPECT_EQ(d.image_path, "pages/report_p1.png");
    ASSERT_EQ(d.elements.size(), 2u);
    EXPECT_EQ(d.elements[1].bbox, BBox(10, 40, 100.5, 60.25));
    EXPECT_EQ(ds.category_name(2), "Text");
}

TEST(LayoutIo, UnknownCategoryNamesTheId) {
    const std::string bad = R"({"images":[{"id":1,"width":10,"height":10}],
        "annotations":[{"id":5,"image_id":1,"category_id":99,"bbox":[0,0,1,1]}],
        "categories":[{"id":1,"name":"Text"}]})";
    try {
        parse_coco(bad);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("99"), std::string::npos);
    }
}

TEST(LayoutIo, UnknownImageNamesTheId) {
    const std::string bad = R"({"images":[{"id":1,"width":10,"height":10}],
        "annotations":[{"id":5,"image_id":42,"category_id":1,"bbox":[0,0,1,1]}],
        "categories":[{"id":1,"name":"Text"}]})";
    try {
        parse_coco(bad);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("42"), std::string::npos);
    }
}

TEST(LayoutIo, NonPositiveSizeRejected) {
    const std::string bad = R"({"images":[{"id":1,"width":10,"height":10}],
        "annotations":[{"id":5,"image_id":1,"category_id":1,"bbox":[0,0,0,1]}],
        "categories":[{"id":1,"name":"Text"}]})";
    EXPECT_THROW(parse_coco(bad), ValidationError);
}

TEST(LayoutIo, MalformedJsonReportsOffset) {
    try {
        parse_coco(R"({"images": [}")");
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos) << e.what();
    }
}

TEST(LayoutIo, MissingArraysRejected) {
    EXPECT_THROW(parse_coco(R"({"images": []})"), ValidationError);
}

TEST(LayoutIo, PageSizeFallsBackToPaddedUnion) {
    const std::string text = R"({"images":[{"id":1,"file_name":"a.png"}],
        "annotations":[{"id":1,"image_id":1,"category_id":1,"bbox":[0,0,100,200]}],
        "categories":[{"id":1,"name":"Text"}]})";
    Dataset ds = parse_coco(text);
    EXPECT_DOUBLE_EQ(ds.documents[0].page_width, 105.0);
    EXPECT_DOUBLE_EQ(ds.documents[0].page_height, 210.0);
}

TEST(LayoutIo, RoundTripIsIdentity) {
    Dataset ds = synth_dataset(25, 8);
    ds.documents[3].image_path = "img/3.png";
    const std::string once = dump_json(to_coco_json(ds));
    Dataset back = parse_coco(once);
    EXPECT_EQ(back, ds);
    EXPECT_EQ(dump_json(to_coco_json(back)), once);
}

TEST(LayoutIo, SaveLoadThroughFile) {
    testing_support::TempDir dir("io");
    Dataset ds = synth_dataset(3, 9);
    save_coco(ds, dir / "ds.json");
    EXPECT_EQ(load_coco(dir / "ds.json"), ds);
    EXPECT_THROW(load_coco(dir / "missing.json"), IoError);
}

TEST(ErrorAnnotationIo, CleanRoundTrips) {
    ErrorAnnotation a;
    a.doc_id = "d";
    const ErrorAnnotation back = error_annotation_from_json(to_json(a));
    EXPECT_EQ(back, a);
    EXPECT_FALSE(back.has_error);
}

TEST(ErrorAnnotationIo, TypeSetRoundTrips) {
    ErrorAnnotation a;
    a.doc_id = "d";
    a.missing_gt_ids = {4, 9};
    a.element_errors[3].insert(ErrorType::Misclassification);
    a.element_errors[12].insert(ErrorType::Split);
    a.element_errors[12].insert(ErrorType::Misclassification);
    a.finalize();
    ASSERT_TRUE(a.error_types.contains(ErrorType::Missing));
    const json j = to_json(a);
    EXPECT_TRUE(j["element_errors"]["3"].is_string());
    EXPECT_TRUE(j["element_errors"]["12"].is_array());
    EXPECT_EQ(error_annotation_from_json(j), a);

    testing_support::TempDir dir("err");
    save_error_annotation(a, dir / "d.error.json");
    EXPECT_EQ(load_error_annotation(dir / "d.error.json"), a);
}

TEST(ErrorAnnotationIo, InconsistentFlagsRejected) {
    const json j = json::parse(
        R"({"doc_id":"d","has_error":true,"error_types":[],"element_errors":{},"missing_gt_ids":[]})");
    EXPECT_THROW(error_annotation_from_json(j), ValidationError);
    const json k = json::parse(
        R"({"doc_id":"d","has_error":true,"error_types":["size"],"element_errors":{"1":"split"},"missing_gt_ids":[]})");
    EXPECT_THROW(error_annotation_from_json(k), ValidationError);
    const json u = json::parse(
        R"({"doc_id":"d","has_error":true,"error_types":["wobble"],"element_errors":{"1":"wobble"},"missing_gt_ids":[]})");
    EXPECT_THROW(error_annotation_from_json(u), ValidationError);
}

TEST(ErrorAnnotationIo, StableText) {
    ErrorAnnotation a;
    a.doc_id = "x";
    a.element_errors[2].insert(ErrorType::SizeError);
    a.finalize();
    EXPECT_EQ(dump_json(to_json(a)),
              "{\n  \"doc_id\": \"x\",\n  \"element_errors\": {\n    \"2\": \"size\"\n  },\n  \"error_types\": [\n"
              "    \"size\"\n  ],\n  \"has_error\": true,\n  \"missing_gt_ids\": []\n}\n");
}

TEST(ErrorTypes, NamesRoundTrip) {
    for (ErrorType t : kAllErrorTypes) EXPECT_EQ(parse_error_type(to_string(t)), t);
    EXPECT_EQ(parse_error_type("nope"), std::nullopt);
    EXPECT_FALSE(is_structural(ErrorType::Misclassification));
    EXPECT_TRUE(is_structural(ErrorType::Overlap));
}
