#include "pegdyn/geometry.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "pegdyn/errors.hpp"

namespace pegdyn::geometry {

const std::vector<ShapeKind>& training_kinds() {
    static const std::vector<ShapeKind> kinds = {
        ShapeKind::Square,  ShapeKind::Round,    ShapeKind::Semicircle, ShapeKind::Triangle,
        ShapeKind::Diamond, ShapeKind::Pentagon, ShapeKind::Trapezium,
    };
    return kinds;
}

const std::vector<ShapeKind>& testing_kinds() {
    static const std::vector<ShapeKind> kinds = {
        ShapeKind::Ellipse, ShapeKind::Hexagon, ShapeKind::LShape, ShapeKind::XShape,
    };
    return kinds;
}

std::string to_string(ShapeKind kind) {
    switch (kind) {
        case ShapeKind::Square: return "square";
        case ShapeKind::Round: return "round";
        case ShapeKind::Semicircle: return "semicircle";
        case ShapeKind::Triangle: return "triangle";
        case ShapeKind::Diamond: return "diamond";
        case ShapeKind::Pentagon: return "pentagon";
        case ShapeKind::Trapezium: return "trapezium";
        case ShapeKind::Ellipse: return "ellipse";
        case ShapeKind::Hexagon: return "hexagon";
        case ShapeKind::LShape: return "lshape";
        case ShapeKind::XShape: return "xshape";
    }
    throw std::invalid_argument("unknown ShapeKind");
}

ShapeKind shape_kind_from_string(const std::string& name) {
    for (ShapeKind k :
         {ShapeKind::Square, ShapeKind::Round, ShapeKind::Semicircle, ShapeKind::Triangle,
          ShapeKind::Diamond, ShapeKind::Pentagon, ShapeKind::Trapezium, ShapeKind::Ellipse,
          ShapeKind::Hexagon, ShapeKind::LShape, ShapeKind::XShape}) {
        if (to_string(k) == name) return k;
    }
    throw std::invalid_argument("unknown shape kind: " + name);
}

void HoleSpec::validate() const {
    if (!(size > 0.0)) throw std::invalid_argument("HoleSpec: size must be > 0");
    if (!(clearance > 0.0)) throw std::invalid_argument("HoleSpec: clearance must be > 0");
    if (!(elasticity > 0.0)) throw std::invalid_argument("HoleSpec: elasticity must be > 0");
    if (!(plate_thickness > 0.0)) throw std::invalid_argument("HoleSpec: plate_thickness must be > 0");
    if (!(floor_depth > plate_thickness))
        throw std::invalid_argument("HoleSpec: floor_depth must exceed plate_thickness");
}

std::string HoleSpec::id() const {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%g", to_string(kind).c_str(), size);
    return buf;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<Vec2> regular_polygon(int n, double circumradius, double start_angle_deg) {
    std::vector<Vec2> v;
    v.reserve(n);
    for (int i = 0; i < n; ++i) {
        double a = (start_angle_deg + 360.0 * i / n) * kPi / 180.0;
        v.push_back({circumradius * std::cos(a), circumradius * std::sin(a)});
    }
    return v;
}

// Vertex list for the polygonal kinds; Round/Ellipse/Semicircle are analytic.
std::vector<Vec2> polygon_vertices(const HoleSpec& spec) {
    const double s = spec.size;
    const double h = s / 2.0;
    switch (spec.kind) {
        case ShapeKind::Square:
            return {{-h, -h}, {h, -h}, {h, h}, {-h, h}};
        case ShapeKind::Triangle:
            return regular_polygon(3, s / std::sqrt(3.0), 90.0);
        case ShapeKind::Diamond: {
            double r = s / std::sqrt(2.0);
            return {{r, 0}, {0, r}, {-r, 0}, {0, -r}};
        }
        case ShapeKind::Pentagon:
            return regular_polygon(5, s / (2.0 * std::sin(kPi / 5.0)), 90.0);
        case ShapeKind::Trapezium:
            // Isosceles: base s, top s/2, height s/2.
            return {{-h, -s / 4}, {h, -s / 4}, {s / 4, s / 4}, {-s / 4, s / 4}};
        case ShapeKind::Hexagon: {
            // Opposite corners are built as exact negations so that
            // sdf(p) == sdf(-p) holds bitwise.
            std::vector<Vec2> v;
            for (int i = 0; i < 3; ++i) {
                double a = 60.0 * i * kPi / 180.0;
                v.push_back({s * std::cos(a), s * std::sin(a)});
            }
            for (int i = 0; i < 3; ++i) v.push_back({-v[i].x, -v[i].y});
            return v;
        }
        case ShapeKind::LShape:
            // Outer square of edge s with the top-right quadrant removed.
            return {{-h, -h}, {h, -h}, {h, 0}, {0, 0}, {0, h}, {-h, h}};
        case ShapeKind::XShape: {
            // Cross of overall extent s, arm width s/2.
            double w = s / 4.0;
            return {{w, w},   {h, w},   {h, -w},  {w, -w},  {w, -h},  {-w, -h},
                    {-w, -w}, {-h, -w}, {-h, w},  {-w, w},  {-w, h},  {w, h}};
        }
        default:
            throw std::invalid_argument("polygon_vertices: analytic kind");
    }
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    Vec2 ab = b - a;
    double len2 = ab.dot(ab);
    double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    Vec2 proj = a + ab * t;
    return (p - proj).norm();
}

bool point_in_polygon(Vec2 p, const std::vector<Vec2>& v) {
    // Even-odd crossing rule.
    bool inside = false;
    size_t n = v.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        bool crosses = (v[i].y > p.y) != (v[j].y > p.y);
        if (crosses) {
            double x_at = v[j].x + (v[i].x - v[j].x) * (p.y - v[j].y) / (v[i].y - v[j].y);
            if (p.x < x_at) inside = !inside;
        }
    }
    return inside;
}

double polygon_sdf(Vec2 p, const std::vector<Vec2>& v) {
    double d = std::numeric_limits<double>::infinity();
    size_t n = v.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        d = std::min(d, point_segment_distance(p, v[j], v[i]));
    }
    return point_in_polygon(p, v) ? -d : d;
}

// Distance from q (first quadrant) to the ellipse x^2/a^2 + y^2/b^2 = 1 by
// golden-section search on the boundary parameter; unimodal on [0, pi/2].
double ellipse_boundary_distance(double a, double b, double qx, double qy) {
    auto dist2 = [&](double t) {
        double dx = a * std::cos(t) - qx;
        double dy = b * std::sin(t) - qy;
        return dx * dx + dy * dy;
    };
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0, hi = kPi / 2.0;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = dist2(x1), f2 = dist2(x2);
    for (int it = 0; it < 90; ++it) {
        if (f1 < f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = dist2(x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = dist2(x2);
        }
    }
    return std::sqrt(dist2((lo + hi) / 2.0));
}

}  // namespace

double sdf(const HoleSpec& spec, Vec2 p) {
    const double r = spec.size / 2.0;
    switch (spec.kind) {
        case ShapeKind::Round:
            return p.norm() - r;
        case ShapeKind::Semicircle:
            // Half-disk {|p| <= r, y <= 0}; max() composite never exceeds the
            // true distance outside the corner regions.
            return std::max(p.norm() - r, p.y);
        case ShapeKind::Ellipse: {
            double a = r, b = 0.6 * r;
            double d = ellipse_boundary_distance(a, b, std::abs(p.x), std::abs(p.y));
            double q = (p.x * p.x) / (a * a) + (p.y * p.y) / (b * b);
            return q < 1.0 ? -d : d;
        }
        default:
            return polygon_sdf(p, polygon_vertices(spec));
    }
}

Vec2 sdf_gradient(const HoleSpec& spec, Vec2 p) {
    const double h = 1e-4;
    double gx = (sdf(spec, {p.x + h, p.y}) - sdf(spec, {p.x - h, p.y})) / (2 * h);
    double gy = (sdf(spec, {p.x, p.y + h}) - sdf(spec, {p.x, p.y - h})) / (2 * h);
    double n = std::hypot(gx, gy);
    if (n < 1e-9) return {0.0, 0.0};
    return {gx / n, gy / n};
}

PegFootprint make_footprint(const HoleSpec& spec, double resolution) {
    spec.validate();
    if (!(resolution > 0.0)) throw std::invalid_argument("make_footprint: resolution must be > 0");

    const double reach = spec.size;  // bounding half-extent for every kind
    for (int refine = 0; refine <= 6; ++refine) {
        double res = resolution * (1 << refine);
        double step = 1.0 / res;
        long half = static_cast<long>(std::ceil(reach / step));
        PegFootprint fp;
        fp.point_area = step * step;
        double sx = 0.0, sy = 0.0;
        for (long i = -half; i <= half; ++i) {
            for (long j = -half; j <= half; ++j) {
                Vec2 p{i * step, j * step};
                if (sdf(spec, p) < -spec.clearance) {
                    fp.points.push_back(p);
                    sx += p.x;
                    sy += p.y;
                }
            }
        }
        if (fp.points.size() >= 64) {
            fp.centroid = {sx / fp.points.size(), sy / fp.points.size()};
            return fp;
        }
    }
    throw EmptyFootprintError("make_footprint: clearance " + std::to_string(spec.clearance) +
                              " annihilates shape " + spec.id());
}

std::vector<HoleSpec> catalog(CatalogRole role) {
    std::vector<HoleSpec> specs;
    if (role == CatalogRole::Training) {
        for (ShapeKind kind : training_kinds()) {
            for (double size : {10.0, 20.0, 30.0}) {
                specs.push_back({kind, size, 5.0});
            }
        }
    } else {
        // Unseen sizes of seen shapes plus unseen shapes, all rigid.
        for (ShapeKind kind : {ShapeKind::Round, ShapeKind::Square, ShapeKind::Triangle,
                               ShapeKind::Ellipse, ShapeKind::Hexagon, ShapeKind::LShape,
                               ShapeKind::XShape}) {
            specs.push_back({kind, 15.0, 50.0});
        }
    }
    return specs;
}

std::string serialize_catalog(const std::vector<HoleSpec>& specs) {
    std::ostringstream out;
    for (const auto& s : specs) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g,%.17g\n", to_string(s.kind).c_str(),
                      s.size, s.elasticity, s.clearance);
        out << buf;
    }
    return out.str();
}

std::vector<HoleSpec> parse_catalog(const std::string& text) {
    std::vector<HoleSpec> specs;
    std::istringstream in(text);
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string kind_str, size_str, k_str, c_str;
        if (!std::getline(ls, kind_str, ',') || !std::getline(ls, size_str, ',') ||
            !std::getline(ls, k_str, ',') || !std::getline(ls, c_str)) {
            throw FormatError("catalog: expected kind,size,elasticity,clearance", line_no);
        }
        try {
            HoleSpec s;
            s.kind = shape_kind_from_string(kind_str);
            s.size = std::stod(size_str);
            s.elasticity = std::stod(k_str);
            s.clearance = std::stod(c_str);
            s.validate();
            specs.push_back(s);
        } catch (const std::invalid_argument& e) {
            throw FormatError(std::string("catalog: ") + e.what(), line_no);
        }
    }
    return specs;
}

}  // namespace pegdyn::geometry
