#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wallcross/decomposition.hpp"
#include "wallcross/kgeom.hpp"
#include "wallcross/rank0_direct.hpp"

namespace wallcross {

using Json = nlohmann::ordered_json;

inline Json q_json(const Rational& q) { return to_string(q); }

inline Json class_json(const ChernData& v) { return Json::array({q_json(v.r), q_json(v.c), q_json(v.s), q_json(v.d)}); }

inline ChernData parse_class(const std::string& text) {
    std::vector<Rational> parts;
    std::stringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) parts.push_back(parse_rational(tok));
    if (parts.size() != 4) fail(ErrorKind::ParseError, "class needs four comma-separated rationals r,c,s,d: '" + text + "'");
    return ChernData(parts[0], parts[1], parts[2], parts[3]);
}

// Write to a sibling temp file, then rename over the target.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorKind::InvalidArgument, "cannot write " + tmp.string());
        out << content;
        if (!out.flush()) fail(ErrorKind::InvalidArgument, "short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

namespace svg {

// Fixed-precision coordinates keep the output byte-stable; exact values ride in data-* attributes.
inline std::string num(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    std::string s(buf);
    if (s == "-0.000000") s = "0.000000";
    return s;
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Frame {
    double b_lo, b_hi, w_lo, w_hi;
    double width = 640, height = 480, margin = 40;

    double x(double b) const { return margin + (b - b_lo) / (b_hi - b_lo) * (width - 2 * margin); }
    double y(double w) const { return height - margin - (w - w_lo) / (w_hi - w_lo) * (height - 2 * margin); }
};

struct LabelledPoint {
    PointBW p;
    std::string label;
};

struct LabelledLine {
    LineBW line;
    std::string css_class, label;
};

inline std::string line_element(const Frame& f, const LabelledLine& l) {
    std::ostringstream o;
    const double b0 = f.b_lo, b1 = f.b_hi;
    const double g = l.line.g.get_d(), c = l.line.c0.get_d();
    o << "<line class=\"" << l.css_class << "\" data-gradient=\"" << to_string(l.line.g) << "\" data-intercept=\""
      << to_string(l.line.c0) << "\" x1=\"" << num(f.x(b0)) << "\" y1=\"" << num(f.y(g * b0 + c)) << "\" x2=\"" << num(f.x(b1))
      << "\" y2=\"" << num(f.y(g * b1 + c)) << "\"";
    if (!l.label.empty()) o << " data-label=\"" << escape(l.label) << "\"";
    o << "/>\n";
    return o.str();
}

inline std::string render(const std::string& title, const std::vector<LabelledLine>& lines, const std::vector<LabelledPoint>& points) {
    double b_lo = -1, b_hi = 1, w_lo = -1, w_hi = 1;
    for (const auto& p : points) {
        b_lo = std::min(b_lo, p.p.b.get_d());
        b_hi = std::max(b_hi, p.p.b.get_d());
        w_lo = std::min(w_lo, p.p.w.get_d());
        w_hi = std::max(w_hi, p.p.w.get_d());
    }
    const double pad_b = 0.15 * (b_hi - b_lo), pad_w = 0.15 * (w_hi - w_lo);
    Frame f{b_lo - pad_b, b_hi + pad_b, w_lo - pad_w, w_hi + pad_w};
    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(f.width) << "\" height=\"" << num(f.height)
      << "\" viewBox=\"0 0 " << num(f.width) << ' ' << num(f.height) << "\">\n";
    o << "<title>" << escape(title) << "</title>\n";
    o << "<defs><clipPath id=\"plot\"><rect x=\"" << num(f.margin) << "\" y=\"" << num(f.margin) << "\" width=\""
      << num(f.width - 2 * f.margin) << "\" height=\"" << num(f.height - 2 * f.margin) << "\"/></clipPath></defs>\n";
    o << "<g clip-path=\"url(#plot)\" fill=\"none\" stroke-width=\"1.5\">\n";
    // boundary of U: w = b^2 / 2
    o << "<polyline class=\"boundary\" stroke=\"#888888\" points=\"";
    constexpr int kSteps = 200;
    for (int i = 0; i <= kSteps; ++i) {
        const double b = f.b_lo + (f.b_hi - f.b_lo) * i / kSteps;
        o << (i ? " " : "") << num(f.x(b)) << ',' << num(f.y(b * b / 2));
    }
    o << "\"/>\n";
    o << "<line class=\"axis\" stroke=\"#cccccc\" x1=\"" << num(f.x(f.b_lo)) << "\" y1=\"" << num(f.y(0)) << "\" x2=\"" << num(f.x(f.b_hi))
      << "\" y2=\"" << num(f.y(0)) << "\"/>\n";
    for (const auto& l : lines) {
        std::string e = line_element(f, l);
        const char* color = l.css_class == "wall" ? "#c0392b" : (l.css_class == "lf" ? "#2c3e50" : "#2980b9");
        e.insert(e.size() - 3, std::string(" stroke=\"") + color + "\"");
        o << e;
    }
    o << "</g>\n<g class=\"points\" fill=\"#000000\">\n";
    for (const auto& p : points) {
        o << "<circle class=\"pi\" data-b=\"" << to_string(p.p.b) << "\" data-w=\"" << to_string(p.p.w) << "\" cx=\"" << num(f.x(p.p.b.get_d()))
          << "\" cy=\"" << num(f.y(p.p.w.get_d())) << "\" r=\"3\"/>\n";
        o << "<text x=\"" << num(f.x(p.p.b.get_d()) + 5) << "\" y=\"" << num(f.y(p.p.w.get_d()) - 5) << "\" font-size=\"10\">"
          << escape(p.label) << "</text>\n";
    }
    o << "</g>\n</svg>\n";
    return o.str();
}

}  // namespace svg

// Wall diagram of a rank-0 class: l_f, l_v, one line per wall with its splittings, and Pi of every factor.
inline std::string walls_svg(const WallsReport& rep, const GeometryParams& g) {
    std::vector<svg::LabelledLine> lines{{rep.lf, "lf", "l_f"}, {rep.lv, "lv", "l_v"}};
    std::vector<svg::LabelledPoint> points;
    for (const auto& w : rep.walls) {
        std::string label;
        for (const auto& sp : w.splittings) {
            if (!label.empty()) label += "; ";
            label += "k1=" + std::to_string(sp.k1) + " b1=" + to_string(sp.beta1) + " m1=" + to_string(sp.m1) + " b2=" + to_string(sp.beta2) +
                     " m2=" + to_string(sp.m2);
            points.push_back({pi(sp.v1(g), g), "v1 " + sp.v1(g).str()});
            points.push_back({pi(sp.v2(g), g), "v2 " + sp.v2(g).str()});
        }
        lines.push_back({w.line, "wall", label});
    }
    return svg::render("walls for " + rep.v.str(), lines, points);
}

struct SvgLine {
    std::string css_class;
    Rational gradient, intercept;
};

// Reads back the exact data layer of the line elements.
inline std::vector<SvgLine> parse_svg_lines(const std::string& text) {
    std::vector<SvgLine> out;
    auto attr = [](const std::string& el, const std::string& name) -> std::string {
        const std::string key = " " + name + "=\"";
        const auto p = el.find(key);
        if (p == std::string::npos) return {};
        const auto s = p + key.size();
        return el.substr(s, el.find('"', s) - s);
    };
    std::size_t pos = 0;
    while ((pos = text.find("<line ", pos)) != std::string::npos) {
        const auto end = text.find("/>", pos);
        const std::string el = text.substr(pos, end - pos);
        pos = end;
        const std::string grad = attr(el, "data-gradient");
        if (grad.empty()) continue;
        out.push_back({attr(el, "class"), parse_rational(grad), parse_rational(attr(el, "data-intercept"))});
    }
    return out;
}

inline Json method1_json(const ChernData& v, const Method1Result& r, const GeometryParams& g) {
    Json j;
    j["class"] = class_json(v);
    j["J"] = q_json(r.value);
    j["vanishing"] = r.vanishing;
    Json terms = Json::array();
    for (const auto& sp : r.terms) {
        terms.push_back({{"k1", sp.k1},
                         {"k2", sp.k2},
                         {"beta1", q_json(sp.beta1)},
                         {"beta2", q_json(sp.beta2)},
                         {"m1", q_json(sp.m1)},
                         {"m2", q_json(sp.m2)},
                         {"v1", class_json(sp.v1(g))},
                         {"v2", class_json(sp.v2(g))},
                         {"chi", q_json(sp.chi)},
                         {"wall", sp.wall.str()},
                         {"lookup", {key_name(TableKind::PT, -sp.m1, sp.beta1), key_name(TableKind::DT1, sp.m2, sp.beta2)}},
                         {"term", q_json(sp.term)}});
    }
    j["terms"] = terms;
    j["diagnostics"] = r.diagnostics;
    return j;
}

inline Json decomposition_json(const Decomposition& d) {
    Json parts = Json::array();
    for (std::size_t i = 0; i < d.parts.size(); ++i)
        parts.push_back({{"class", class_json(d.parts[i].cls)},
                         {"q", d.parts[i].q},
                         {"J", q_json(d.parts[i].j)},
                         {"chi", q_json(i < d.chis.size() ? d.chis[i] : Rational(0))}});
    return {{"head", class_json(d.head)},
            {"lookup", key_name(d.lookup.kind, d.lookup.m, d.lookup.deg)},
            {"head_value", q_json(d.head_value)},
            {"parts", parts},
            {"term", q_json(d.term)}};
}

}  // namespace wallcross
