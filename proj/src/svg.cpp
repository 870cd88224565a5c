#include "bezitrace/svg.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bezitrace {

namespace {

std::string get_attr(const std::string& tag, const std::string& name) {
    size_t pos = 0;
    while ((pos = tag.find(name, pos)) != std::string::npos) {
        // must be a whole attribute name
        bool start_ok = pos == 0 || std::isspace(
                                        static_cast<unsigned char>(
                                            tag[pos - 1]));
        size_t after = pos + name.size();
        if (!start_ok || after >= tag.size()) {
            ++pos;
            continue;
        }
        size_t eq = tag.find_first_not_of(" \t\r\n", after);
        if (eq == std::string::npos || tag[eq] != '=') {
            ++pos;
            continue;
        }
        size_t q = tag.find_first_not_of(" \t\r\n", eq + 1);
        if (q == std::string::npos || (tag[q] != '"' && tag[q] != '\'')) {
            ++pos;
            continue;
        }
        size_t end = tag.find(tag[q], q + 1);
        if (end == std::string::npos) return {};
        return tag.substr(q + 1, end - q - 1);
    }
    return {};
}

double parse_length(const std::string& s, double fallback) {
    if (s.empty()) return fallback;
    try {
        return std::stod(s);
    } catch (...) {
        return fallback;
    }
}

std::array<double, 3> parse_fill(std::string s) {
    if (s.empty()) return {0.0, 0.0, 0.0};  // SVG default fill is black
    if (s[0] == '#') {
        auto hex = [&](size_t i, size_t len) {
            return std::stoi(s.substr(i, len), nullptr, 16);
        };
        if (s.size() == 4)
            return {hex(1, 1) * 17 / 255.0, hex(2, 1) * 17 / 255.0,
                    hex(3, 1) * 17 / 255.0};
        if (s.size() == 7)
            return {hex(1, 2) / 255.0, hex(3, 2) / 255.0, hex(5, 2) / 255.0};
    }
    throw SvgParseError("unsupported fill value '" + s + "'");
}

struct PathLexer {
    const std::string& s;
    size_t i = 0;

    void skip_separators() {
        while (i < s.size() &&
               (std::isspace(static_cast<unsigned char>(s[i])) || s[i] == ','))
            ++i;
    }
    bool done() {
        skip_separators();
        return i >= s.size();
    }
    bool peek_command(char& cmd) {
        skip_separators();
        if (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i]))) {
            cmd = s[i];
            return true;
        }
        return false;
    }
    double number() {
        skip_separators();
        size_t end;
        double v;
        try {
            v = std::stod(s.substr(i), &end);
        } catch (...) {
            throw SvgParseError("malformed number in path data");
        }
        i += end;
        return v;
    }
};

class PathBuilder {
  public:
    explicit PathBuilder(std::array<double, 3> fill) : fill_(fill) {}

    void move_to(Point p) {
        finish_open();
        start_ = cur_ = p;
        started_ = true;
    }
    void line_to(Point p) {
        if (distance(cur_, p) < 1e-12) return;
        Point d = p - cur_;
        segments_.push_back(
            {cur_, cur_ + (1.0 / 3.0) * d, cur_ + (2.0 / 3.0) * d, p});
        cur_ = p;
    }
    void curve_to(Point c1, Point c2, Point p) {
        segments_.push_back({cur_, c1, c2, p});
        cur_ = p;
    }
    void close() {
        if (!started_) return;
        if (distance(cur_, start_) > 1e-9) line_to(start_);
        if (!segments_.empty()) {
            segments_.back().p3 = start_;  // weld exactly
            if (segments_.size() == 1) {
                auto [a, b] = segments_[0].split(0.5);
                segments_ = {a, b};
            }
            shapes_.push_back(VectorShape{
                Bezigon::from_segments(segments_).normalized_orientation(),
                fill_});
        }
        segments_.clear();
        started_ = false;
        cur_ = start_;
    }
    std::vector<VectorShape> take() {
        finish_open();
        return std::move(shapes_);
    }
    Point current() const { return cur_; }

  private:
    void finish_open() {
        if (!segments_.empty())
            throw SvgParseError("subpath is not closed (missing Z)");
    }
    std::array<double, 3> fill_;
    std::vector<BezierSegment> segments_;
    std::vector<VectorShape> shapes_;
    Point start_, cur_;
    bool started_ = false;
};

std::vector<VectorShape> parse_path_data(const std::string& d,
                                         std::array<double, 3> fill) {
    PathLexer lex{d};
    PathBuilder builder(fill);
    char cmd = 0;
    while (!lex.done()) {
        char c;
        if (lex.peek_command(c)) {
            cmd = c;
            ++lex.i;
        } else if (cmd == 'M') {
            cmd = 'L';  // implicit line-to after an absolute move
        } else if (cmd == 'm') {
            cmd = 'l';
        }
        bool relative = std::islower(static_cast<unsigned char>(cmd));
        Point base = relative ? builder.current() : Point{0, 0};
        switch (std::toupper(static_cast<unsigned char>(cmd))) {
            case 'M': {
                double x = lex.number(), y = lex.number();
                builder.move_to(base + Point{x, y});
                break;
            }
            case 'L': {
                double x = lex.number(), y = lex.number();
                builder.line_to(base + Point{x, y});
                break;
            }
            case 'C': {
                double x1 = lex.number(), y1 = lex.number();
                double x2 = lex.number(), y2 = lex.number();
                double x = lex.number(), y = lex.number();
                builder.curve_to(base + Point{x1, y1}, base + Point{x2, y2},
                                 base + Point{x, y});
                break;
            }
            case 'Z':
                builder.close();
                break;
            default:
                throw SvgParseError(std::string("unsupported path command '") +
                                    cmd + "'");
        }
    }
    return builder.take();
}

}  // namespace

VectorDocument parse_svg(const std::string& text) {
    VectorDocument doc;
    size_t svg_pos = text.find("<svg");
    if (svg_pos == std::string::npos)
        throw SvgParseError("no <svg> element found");
    size_t svg_end = text.find('>', svg_pos);
    std::string svg_tag = text.substr(svg_pos, svg_end - svg_pos);

    double vb_w = 0, vb_h = 0, vb_x = 0, vb_y = 0;
    std::string vb = get_attr(svg_tag, "viewBox");
    if (!vb.empty()) {
        std::istringstream in(vb);
        in >> vb_x >> vb_y >> vb_w >> vb_h;
    }
    doc.width = parse_length(get_attr(svg_tag, "width"), vb_w);
    doc.height = parse_length(get_attr(svg_tag, "height"), vb_h);
    if (doc.width <= 0 || doc.height <= 0)
        throw SvgParseError("svg has no usable width/height or viewBox");

    size_t pos = 0;
    while ((pos = text.find("<path", pos)) != std::string::npos) {
        size_t end = text.find('>', pos);
        if (end == std::string::npos)
            throw SvgParseError("unterminated <path> element");
        std::string tag = text.substr(pos, end - pos);
        pos = end;

        std::string d = get_attr(tag, "d");
        if (d.empty()) throw SvgParseError("<path> without d attribute");
        std::string fill = get_attr(tag, "fill");
        if (fill.empty()) {
            std::string style = get_attr(tag, "style");
            size_t f = style.find("fill:");
            if (f != std::string::npos) {
                size_t stop = style.find(';', f);
                fill = style.substr(f + 5, stop == std::string::npos
                                               ? std::string::npos
                                               : stop - f - 5);
                while (!fill.empty() && fill.front() == ' ')
                    fill.erase(fill.begin());
            }
        }
        auto shapes = parse_path_data(d, parse_fill(fill));
        if (vb_x != 0 || vb_y != 0)
            for (auto& sh : shapes) {
                auto params = sh.bezigon.to_params();
                for (size_t i = 0; i < params.size(); i += 2) {
                    params[i] -= vb_x;
                    params[i + 1] -= vb_y;
                }
                sh.bezigon.set_params(params);
            }
        for (auto& sh : shapes) doc.shapes.push_back(std::move(sh));
    }
    return doc;
}

VectorDocument load_svg(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SvgParseError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_svg(buf.str());
}

std::string write_svg(const VectorDocument& doc) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line),
                  "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" "
                  "height=\"%g\" viewBox=\"0 0 %g %g\">\n",
                  doc.width, doc.height, doc.width, doc.height);
    out += line;
    for (const VectorShape& shape : doc.shapes) {
        const Bezigon& bz = shape.bezigon;
        Point a0 = bz.anchor(0);
        std::snprintf(line, sizeof(line), "  <path d=\"M%.6f,%.6f", a0.x,
                      a0.y);
        out += line;
        for (int j = 0; j < bz.segment_count(); ++j) {
            BezierSegment s = bz.segment(j);
            std::snprintf(line, sizeof(line),
                          " C%.6f,%.6f %.6f,%.6f %.6f,%.6f", s.p1.x, s.p1.y,
                          s.p2.x, s.p2.y, s.p3.x, s.p3.y);
            out += line;
        }
        int r = static_cast<int>(std::lround(
            std::clamp(shape.color[0], 0.0, 1.0) * 255.0));
        int g = static_cast<int>(std::lround(
            std::clamp(shape.color[1], 0.0, 1.0) * 255.0));
        int b = static_cast<int>(std::lround(
            std::clamp(shape.color[2], 0.0, 1.0) * 255.0));
        std::snprintf(line, sizeof(line), " Z\" fill=\"#%02x%02x%02x\"/>\n", r,
                      g, b);
        out += line;
    }
    out += "</svg>\n";
    return out;
}

void save_svg(const VectorDocument& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << write_svg(doc);
}

}  // namespace bezitrace
