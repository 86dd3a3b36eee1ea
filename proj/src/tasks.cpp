#include "led/tasks.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <tuple>

#include "led/errors.hpp"
#include "led/layout_io.hpp"
#include "led/parallel.hpp"

namespace led {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

const char* const kTypeGlossary =
    "Error types:\n"
    "- missing: a true layout region has no predicted box overlapping it with IoU >= 0.1.\n"
    "- hallucination: a predicted box overlaps no true region with IoU >= 0.1.\n"
    "- size: a predicted box is centered on its region but its area is below 0.6x or above 1.4x the region's "
    "area.\n"
    "- split: one region is covered by two or more predicted boxes, each with IoU < 0.5, together reaching 0.5.\n"
    "- merge: one predicted box spans two or more distinct regions, each with IoU >= 0.1.\n"
    "- overlap: two predicted boxes overlap each other with IoU >= 0.1.\n"
    "- duplicate: more than one predicted box matches the same region with IoU >= 0.9.\n"
    "- misclassification: a predicted box matches a region with IoU >= 0.9 but carries the wrong category.\n";

std::string inputs_text(Prompting p) {
    switch (p) {
        case Prompting::P1:
            return "You are given the page image and the predicted layout as COCO-style JSON "
                   "(boxes are [x, y, width, height] in page pixels, each with an element id and category).\n";
        case Prompting::P2:
            return "You are given an image of the page with the predicted boxes drawn on it; each box is labeled "
                   "\"id:category\".\n";
        case Prompting::P3:
            return "You are given the page image, an image with the predicted boxes drawn on it (each labeled "
                   "\"id:category\"), and the predicted layout as COCO-style JSON.\n";
    }
    return {};
}

std::string task_text(Task t) {
    switch (t) {
        case Task::T1:
            return "Decide whether the predicted layout contains any error.\n"
                   "Answer with a single JSON object: {\"has_error\": true} or {\"has_error\": false}\n";
        case Task::T2:
            return "List every error type present in the predicted layout.\n"
                   "Answer with a single JSON object: {\"error_types\": [\"<type>\", ...]} using the type names "
                   "above; use an empty list when there is no error.\n";
        case Task::T3:
            return "Label each erroneous predicted box with its error type(s), and list the ids of true regions "
                   "that no box detects.\n"
                   "Answer with a single JSON object: {\"element_errors\": {\"<element id>\": \"<type>\", ...}, "
                   "\"missing_gt_ids\": [<id>, ...]}. A box with several errors may map to a list of types. Omit "
                   "correct boxes.\n";
    }
    return {};
}

const char* attachment_suffix(AttachmentRole r) {
    switch (r) {
        case AttachmentRole::VizImage: return ".pred.svg";
        case AttachmentRole::PredictionJson: return ".pred.json";
        case AttachmentRole::PageImage: return "";
    }
    return "";
}

std::vector<std::string> gold_doc_ids(const fs::path& dir) {
    std::vector<std::string> ids;
    const fs::path manifest = dir / "manifest.json";
    if (fs::exists(manifest)) {
        json m = parse_json(read_text_file(manifest), manifest.string());
        try {
            for (const auto& d : m.at("documents")) ids.push_back(d.at("doc_id").get<std::string>());
        } catch (const json::exception& e) {
            throw ValidationError(manifest.string() + ": " + e.what());
        }
        return ids;
    }
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        const std::string name = entry.path().filename().string();
        const std::string suffix = ".error.json";
        if (name.size() > suffix.size() && name.ends_with(suffix)) {
            ids.push_back(name.substr(0, name.size() - suffix.size()));
        }
    }
    if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
    std::sort(ids.begin(), ids.end());
    return ids;
}

void copy_into(const fs::path& from, const fs::path& to) {
    std::error_code ec;
    fs::copy_file(from, to, fs::copy_options::overwrite_existing, ec);
    if (ec) throw IoError("cannot copy " + from.string() + " to " + to.string() + ": " + ec.message());
}

ErrorSet parse_type_list(const json& v, std::vector<std::string>& unknown) {
    ErrorSet out;
    auto one = [&](const json& s) {
        if (!s.is_string()) {
            unknown.push_back(s.dump());
            return;
        }
        if (auto t = parse_error_type(lower(s.get<std::string>()))) {
            out.insert(*t);
        } else {
            unknown.push_back(s.get<std::string>());
        }
    };
    if (v.is_array()) {
        for (const auto& s : v) one(s);
    } else {
        one(v);
    }
    return out;
}

void finish(TypeScore& s) {
    s.included = s.tp + s.fp + s.fn > 0;
    s.precision = s.tp + s.fp ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp) : 0.0;
    s.recall = s.tp + s.fn ? static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fn) : 0.0;
    s.f1 = s.included ? f1_score(s.tp, s.fp, s.fn) : 0.0;
}

void parse_stats(ScoreReport& r, std::span<const TaskRecord> records) {
    r.n_docs = records.size();
    for (const auto& rec : records) {
        r.n_malformed += rec.parse_status == ParseStatus::Malformed;
        r.n_empty += rec.parse_status == ParseStatus::Empty;
        r.n_unknown_labels += rec.predicted.unknown_labels.size();
    }
    r.parse_failure_rate =
        r.n_docs ? static_cast<double>(r.n_malformed + r.n_empty) / static_cast<double>(r.n_docs) : 0.0;
}

void aggregate(ScoreReport& r) {
    double sum = 0.0;
    std::size_t n = 0;
    for (auto& s : r.per_type) {
        finish(s);
        r.tp += s.tp;
        r.fp += s.fp;
        r.fn += s.fn;
        if (s.included) {
            sum += s.f1;
            ++n;
        }
    }
    r.micro_f1 = f1_score(r.tp, r.fp, r.fn);
    r.macro_f1 = n ? sum / static_cast<double>(n) : 1.0;
}

// Parsed answers are all-negative unless the parse succeeded.
const ParsedAnswer& effective(const TaskRecord& rec) {
    static const ParsedAnswer kNegative{};
    return rec.parse_status == ParseStatus::Ok ? rec.predicted : kNegative;
}

}  // namespace

std::string_view to_string(Task t) {
    switch (t) {
        case Task::T1: return "t1";
        case Task::T2: return "t2";
        case Task::T3: return "t3";
    }
    return "?";
}

std::string_view to_string(Prompting p) {
    switch (p) {
        case Prompting::P1: return "p1";
        case Prompting::P2: return "p2";
        case Prompting::P3: return "p3";
    }
    return "?";
}

std::string_view to_string(AttachmentRole r) {
    switch (r) {
        case AttachmentRole::PageImage: return "page_image";
        case AttachmentRole::VizImage: return "viz_image";
        case AttachmentRole::PredictionJson: return "prediction_json";
    }
    return "?";
}

std::string_view to_string(ParseStatus s) {
    switch (s) {
        case ParseStatus::Ok: return "ok";
        case ParseStatus::Malformed: return "malformed";
        case ParseStatus::Empty: return "empty";
    }
    return "?";
}

std::optional<Task> parse_task(std::string_view s) {
    const std::string l = lower(s);
    for (Task t : {Task::T1, Task::T2, Task::T3}) {
        if (l == to_string(t)) return t;
    }
    return std::nullopt;
}

std::optional<Prompting> parse_prompting(std::string_view s) {
    const std::string l = lower(s);
    for (Prompting p : {Prompting::P1, Prompting::P2, Prompting::P3}) {
        if (l == to_string(p)) return p;
    }
    return std::nullopt;
}

std::vector<AttachmentRole> attachment_roles(Prompting p) {
    switch (p) {
        case Prompting::P1: return {AttachmentRole::PageImage, AttachmentRole::PredictionJson};
        case Prompting::P2: return {AttachmentRole::VizImage};
        case Prompting::P3:
            return {AttachmentRole::PageImage, AttachmentRole::VizImage, AttachmentRole::PredictionJson};
    }
    return {};
}

std::string instruction_text(Task task, Prompting prompting) {
    return "You are checking the output of a document layout detector.\n" + inputs_text(prompting) +
           kTypeGlossary + task_text(task);
}

nlohmann::json to_json(const PromptBundle& b) {
    json atts = json::array();
    for (const auto& a : b.attachments) atts.push_back({{"role", std::string(to_string(a.role))}, {"path", a.path}});
    return {{"doc_id", b.doc_id},
            {"task", std::string(to_string(b.task))},
            {"prompting", std::string(to_string(b.prompting))},
            {"instruction", b.instruction_text},
            {"attachments", atts}};
}

std::vector<PromptBundle> emit_bundles(const fs::path& corpus_dir, Task task, Prompting prompting, const fs::path& out,
                                       int jobs) {
    const std::vector<std::string> ids = gold_doc_ids(corpus_dir);
    const fs::path dir = out / std::string(to_string(task)) / std::string(to_string(prompting));
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    const std::string instruction = instruction_text(task, prompting);
    std::vector<PromptBundle> bundles(ids.size());
    parallel_for(ids.size(), jobs, [&](std::size_t i) {
        PromptBundle& b = bundles[i];
        b.doc_id = ids[i];
        b.task = task;
        b.prompting = prompting;
        b.instruction_text = instruction;
        for (AttachmentRole role : attachment_roles(prompting)) {
            Attachment a{role, {}};
            if (role == AttachmentRole::PageImage) {
                Dataset gt = load_coco(corpus_dir / (b.doc_id + ".gt.json"));
                if (gt.documents.size() == 1 && gt.documents.front().image_path) {
                    a.path = *gt.documents.front().image_path;
                }
            } else {
                a.path = b.doc_id + attachment_suffix(role);
                copy_into(corpus_dir / a.path, dir / a.path);
            }
            b.attachments.push_back(std::move(a));
        }
        write_text_file(dir / (b.doc_id + ".bundle.json"), dump_json(to_json(b)));
    });
    return bundles;
}

std::optional<nlohmann::json> extract_json_object(std::string_view text) {
    for (std::size_t start = text.find('{'); start != std::string_view::npos; start = text.find('{', start + 1)) {
        int depth = 0;
        bool in_string = false, escaped = false;
        for (std::size_t i = start; i < text.size(); ++i) {
            const char c = text[i];
            if (in_string) {
                if (escaped) {
                    escaped = false;
                } else if (c == '\\') {
                    escaped = true;
                } else if (c == '"') {
                    in_string = false;
                }
                continue;
            }
            if (c == '"') {
                in_string = true;
            } else if (c == '{') {
                ++depth;
            } else if (c == '}' && --depth == 0) {
                json j = json::parse(text.substr(start, i - start + 1), nullptr, false);
                if (!j.is_discarded() && j.is_object()) return j;
                break;
            }
        }
    }
    return std::nullopt;
}

ParseResult parse_response(Task task, std::string_view raw) {
    ParseResult r;
    if (std::all_of(raw.begin(), raw.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
        r.status = ParseStatus::Empty;
        return r;
    }
    auto malformed = [&](std::string why) {
        r.answer = {};
        r.status = ParseStatus::Malformed;
        r.detail = std::move(why);
        return r;
    };
    const std::optional<json> j = extract_json_object(raw);
    if (!j) return malformed("no JSON object found");

    ParsedAnswer& a = r.answer;
    switch (task) {
        case Task::T1: {
            auto it = j->find("has_error");
            if (it == j->end() || !it->is_boolean()) return malformed("expected boolean \"has_error\"");
            a.has_error = it->get<bool>();
            break;
        }
        case Task::T2: {
            auto it = j->find("error_types");
            if (it == j->end() || !it->is_array()) return malformed("expected array \"error_types\"");
            a.error_types = parse_type_list(*it, a.unknown_labels);
            a.has_error = !a.error_types.empty();
            break;
        }
        case Task::T3: {
            auto it = j->find("element_errors");
            if (it == j->end() || !it->is_object()) return malformed("expected object \"element_errors\"");
            for (const auto& [key, value] : it->items()) {
                ElementId id = 0;
                try {
                    std::size_t used = 0;
                    id = std::stoll(key, &used);
                    if (used != key.size()) throw std::invalid_argument(key);
                } catch (const std::exception&) {
                    a.unknown_labels.push_back(key);
                    continue;
                }
                ErrorSet s = parse_type_list(value, a.unknown_labels);
                if (!s.empty()) a.element_errors[id] |= s;
            }
            if (auto m = j->find("missing_gt_ids"); m != j->end()) {
                if (!m->is_array()) return malformed("expected array \"missing_gt_ids\"");
                for (const auto& v : *m) {
                    if (v.is_number_integer()) {
                        a.missing_gt_ids.push_back(v.get<ElementId>());
                    } else {
                        a.unknown_labels.push_back(v.dump());
                    }
                }
                std::sort(a.missing_gt_ids.begin(), a.missing_gt_ids.end());
                a.missing_gt_ids.erase(std::unique(a.missing_gt_ids.begin(), a.missing_gt_ids.end()),
                                       a.missing_gt_ids.end());
            }
            for (const auto& [id, s] : a.element_errors) a.error_types |= s;
            if (!a.missing_gt_ids.empty()) a.error_types.insert(ErrorType::Missing);
            a.has_error = !a.error_types.empty();
            break;
        }
    }
    return r;
}

ParsedAnswer answer_from_gold(const ErrorAnnotation& gold) {
    ParsedAnswer a;
    a.has_error = gold.has_error;
    a.error_types = gold.error_types;
    a.element_errors = gold.element_errors;
    a.missing_gt_ids = gold.missing_gt_ids;
    return a;
}

double f1_score(std::size_t tp, std::size_t fp, std::size_t fn) {
    const std::size_t denom = 2 * tp + fp + fn;
    return denom ? static_cast<double>(2 * tp) / static_cast<double>(denom) : 1.0;
}

ScoreReport score_t1(std::span<const TaskRecord> records) {
    ScoreReport r;
    r.task = Task::T1;
    parse_stats(r, records);
    std::size_t correct = 0;
    for (const auto& rec : records) {
        const bool pred = effective(rec).has_error, gold = rec.gold.has_error;
        correct += pred == gold;
        r.tp += pred && gold;
        r.fp += pred && !gold;
        r.fn += !pred && gold;
    }
    r.accuracy = records.empty() ? 1.0 : static_cast<double>(correct) / static_cast<double>(records.size());
    return r;
}

ScoreReport score_t2(std::span<const TaskRecord> records) {
    ScoreReport r;
    r.task = Task::T2;
    parse_stats(r, records);
    for (const auto& rec : records) {
        const ErrorSet pred = effective(rec).error_types, gold = rec.gold.error_types;
        for (ErrorType t : kAllErrorTypes) {
            TypeScore& s = r.per_type[index_of(t)];
            s.tp += pred.contains(t) && gold.contains(t);
            s.fp += pred.contains(t) && !gold.contains(t);
            s.fn += !pred.contains(t) && gold.contains(t);
        }
    }
    aggregate(r);
    return r;
}

ScoreReport score_t3(std::span<const TaskRecord> records) {
    ScoreReport r;
    r.task = Task::T3;
    parse_stats(r, records);
    // (element id, type) decisions per document; missing GT ids count as Missing.
    auto decisions = [](const std::map<ElementId, ErrorSet>& elems, std::span<const ElementId> missing) {
        std::set<std::tuple<int, ElementId, int>> out;
        for (const auto& [id, s] : elems) {
            for (ErrorType t : s.to_vector()) out.emplace(0, id, static_cast<int>(index_of(t)));
        }
        for (ElementId id : missing) out.emplace(1, id, static_cast<int>(index_of(ErrorType::Missing)));
        return out;
    };
    for (const auto& rec : records) {
        const ParsedAnswer& a = effective(rec);
        const auto pred = decisions(a.element_errors, a.missing_gt_ids);
        const auto gold = decisions(rec.gold.element_errors, rec.gold.missing_gt_ids);
        for (const auto& d : pred) {
            TypeScore& s = r.per_type[static_cast<std::size_t>(std::get<2>(d))];
            if (gold.count(d)) {
                ++s.tp;
            } else {
                ++s.fp;
            }
        }
        for (const auto& d : gold) {
            if (!pred.count(d)) ++r.per_type[static_cast<std::size_t>(std::get<2>(d))].fn;
        }
    }
    aggregate(r);
    return r;
}

ScoreReport score(Task task, std::span<const TaskRecord> records) {
    switch (task) {
        case Task::T1: return score_t1(records);
        case Task::T2: return score_t2(records);
        case Task::T3: return score_t3(records);
    }
    throw InternalError("unknown task");
}

nlohmann::json to_json(const ScoreReport& r) {
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json j = {{"task", std::string(to_string(r.task))},
              {"prompting", r.prompting ? json(std::string(to_string(*r.prompting))) : json(nullptr)},
              {"n_docs", r.n_docs},
              {"accuracy", opt(r.accuracy)},
              {"micro_f1", opt(r.micro_f1)},
              {"macro_f1", opt(r.macro_f1)},
              {"tp", r.tp},
              {"fp", r.fp},
              {"fn", r.fn},
              {"n_malformed", r.n_malformed},
              {"n_empty", r.n_empty},
              {"n_unknown_labels", r.n_unknown_labels},
              {"parse_failure_rate", r.parse_failure_rate}};
    if (r.task == Task::T1) {
        j["headline"] = "accuracy";
    } else {
        j["headline"] = "micro_f1";
        json per = json::object();
        for (ErrorType t : kAllErrorTypes) {
            const TypeScore& s = r.per_type[index_of(t)];
            per[std::string(to_string(t))] = {
                {"tp", s.tp},
                {"fp", s.fp},
                {"fn", s.fn},
                {"precision", s.included ? json(s.precision) : json(nullptr)},
                {"recall", s.included ? json(s.recall) : json(nullptr)},
                {"f1", s.included ? json(s.f1) : json(nullptr)},
            };
        }
        j["per_type"] = per;
    }
    return j;
}

std::vector<TaskRecord> load_records(Task task, const fs::path& gold_dir, const fs::path& responses_dir, int jobs) {
    const std::vector<std::string> ids = gold_doc_ids(gold_dir);
    std::vector<TaskRecord> records(ids.size());
    parallel_for(ids.size(), jobs, [&](std::size_t i) {
        TaskRecord& rec = records[i];
        rec.doc_id = ids[i];
        rec.task = task;
        rec.gold = load_error_annotation(gold_dir / (ids[i] + ".error.json"));
        const fs::path resp = responses_dir / (ids[i] + ".txt");
        std::string text;
        if (fs::exists(resp)) text = read_text_file(resp);
        ParseResult p = parse_response(task, text);
        rec.predicted = std::move(p.answer);
        rec.parse_status = p.status;
    });
    return records;
}

}  // namespace led
