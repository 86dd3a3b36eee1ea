#include "led/svg.hpp"

#include <array>
#include <charconv>
#include <sstream>

namespace led {

namespace {

constexpr std::array<const char*, 12> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#637939",
};

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

const char* color_for(CategoryId id, std::span<const Category> categories) {
    for (std::size_t i = 0; i < categories.size(); ++i) {
        if (categories[i].id == id) return kPalette[i % kPalette.size()];
    }
    return kPalette[static_cast<std::size_t>(id < 0 ? -id : id) % kPalette.size()];
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) return "0";
    return std::string(buf, end);
}

std::string render_svg(const DocumentLayout& doc, std::span<const Category> categories,
                       const ErrorAnnotation* annotation) {
    const std::string w = format_number(doc.page_width);
    const std::string h = format_number(doc.page_height);
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" xmlns:xlink=\"http://www.w3.org/1999/xlink\" width=\"" << w
       << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << " " << h << "\">\n";
    os << "  <title>" << xml_escape(doc.doc_id) << "</title>\n";
    if (doc.image_path) {
        os << "  <image xlink:href=\"" << xml_escape(*doc.image_path) << "\" x=\"0\" y=\"0\" width=\"" << w
           << "\" height=\"" << h << "\"/>\n";
    }
    os << "  <path class=\"page\" d=\"M0 0H" << w << "V" << h << "H0Z\" fill=\"none\" stroke=\"#000000\"/>\n";

    for (const auto& e : doc.elements) {
        const BBox& b = e.bbox;
        const char* color = color_for(e.category_id, categories);
        ErrorSet errors;
        if (annotation) {
            if (auto it = annotation->element_errors.find(e.element_id); it != annotation->element_errors.end()) {
                errors = it->second;
            }
        }
        std::string name = std::to_string(e.category_id);
        for (const auto& c : categories) {
            if (c.id == e.category_id) name = c.name;
        }
        os << "  <rect x=\"" << format_number(b.x()) << "\" y=\"" << format_number(b.y()) << "\" width=\""
           << format_number(b.w()) << "\" height=\"" << format_number(b.h()) << "\" fill=\"none\" stroke=\""
           << color << "\" stroke-width=\"2\"";
        if (!errors.empty()) os << " stroke-dasharray=\"6 4\"";
        os << "/>\n";
        std::string label = std::to_string(e.element_id) + ":" + name;
        for (const auto& tag : errors.names()) label += " [" + tag + "]";
        os << "  <text x=\"" << format_number(b.x() + 2.0) << "\" y=\"" << format_number(b.y() + 12.0)
           << "\" font-family=\"monospace\" font-size=\"11\" fill=\"" << color << "\">" << xml_escape(label)
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace led
