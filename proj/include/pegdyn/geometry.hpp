#pragma once

#include <cmath>
#include <string>
#include <vector>

namespace pegdyn::geometry {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::hypot(x, y); }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
};

enum class ShapeKind {
    Square,
    Round,
    Semicircle,
    Triangle,
    Diamond,
    Pentagon,
    Trapezium,
    Ellipse,
    Hexagon,
    LShape,
    XShape,
};

const std::vector<ShapeKind>& training_kinds();
const std::vector<ShapeKind>& testing_kinds();

std::string to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(const std::string& name);

// A hole in a plate. size is the edge length or diameter in mm; elasticity is
// the contact stiffness k in N/mm^2 per mm of penetration (N/mm^3).
struct HoleSpec {
    ShapeKind kind = ShapeKind::Round;
    double size = 20.0;
    double elasticity = 5.0;
    double clearance = 1.0;
    double plate_thickness = 3.0;
    double floor_depth = 15.0;

    void validate() const;  // throws std::invalid_argument
    std::string id() const; // e.g. "round_20"
};

// Peg cross-section sampled on a regular lattice, in hole-frame coordinates.
// Every point satisfies sdf(point) <= -clearance, so a centered peg clears the
// rim. centroid is the tilt pivot (TCP reference) used for torque levers.
struct PegFootprint {
    std::vector<Vec2> points;
    double point_area = 0.0;  // mm^2 per sample point
    Vec2 centroid;
};

// Signed distance to the hole boundary: negative over the aperture, positive
// over plate material. Exact for polygons; |sdf| never exceeds the true
// distance (composite shapes use a max() lower bound outside corners).
double sdf(const HoleSpec& spec, Vec2 p);

// Unit outward gradient of sdf via central differences. Zero vector when the
// gradient is degenerate (e.g. at the center of symmetry).
Vec2 sdf_gradient(const HoleSpec& spec, Vec2 p);

// resolution is in sample points per mm. The lattice is refined (doubled) as
// needed so that at least 64 points survive the erosion; throws
// EmptyFootprintError when the clearance annihilates the shape.
PegFootprint make_footprint(const HoleSpec& spec, double resolution);

enum class CatalogRole { Training, Testing };

// Training: 7 shapes x sizes {10,20,30} mm, deformable (k=5).
// Testing: unseen shapes/size at 15 mm, rigid (k=50).
std::vector<HoleSpec> catalog(CatalogRole role);

// Line format: kind,size_mm,elasticity,clearance_mm
std::string serialize_catalog(const std::vector<HoleSpec>& specs);
std::vector<HoleSpec> parse_catalog(const std::string& text);

}  // namespace pegdyn::geometry
