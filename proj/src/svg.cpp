#include "inphys/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>

namespace inphys {

std::array<double, 4> trajectory_bounds(const std::vector<const Trajectory*>& trajectories,
                                        double margin) {
    bool any = false;
    double xmin = 0, ymin = 0, xmax = 0, ymax = 0;
    for (const Trajectory* traj : trajectories) {
        for (const auto& snap : traj->snapshots) {
            for (const Trajectory::State& s : snap) {
                if (!any) {
                    xmin = xmax = s.pos.x;
                    ymin = ymax = s.pos.y;
                    any = true;
                } else {
                    xmin = std::min(xmin, s.pos.x);
                    xmax = std::max(xmax, s.pos.x);
                    ymin = std::min(ymin, s.pos.y);
                    ymax = std::max(ymax, s.pos.y);
                }
            }
        }
    }
    if (!any) throw data_error("trajectory_bounds: no snapshots");
    double w = std::max(xmax - xmin, 1e-6);
    double h = std::max(ymax - ymin, 1e-6);
    double pad = margin * std::max(w, h);
    return {xmin - pad, ymin - pad, xmax + pad, ymax + pad};
}

namespace {

struct Mapper {
    std::array<double, 4> bounds;
    double scale;
    double height_px;

    double sx(double x) const { return (x - bounds[0]) * scale; }
    double sy(double y) const { return height_px - (y - bounds[1]) * scale; }
};

void appendf(std::string& out, const char* fmt, ...) {
    char buf[256];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    out += buf;
}

void draw_entity(std::string& out, const Entity& e, Vec2 pos, const Mapper& map,
                 const char* fill, const char* stroke, double opacity) {
    switch (e.shape.kind) {
        case ShapeKind::point:
            appendf(out,
                    "  <circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"%s\" "
                    "fill-opacity=\"%.2f\"/>\n",
                    map.sx(pos.x), map.sy(pos.y), fill, opacity);
            break;
        case ShapeKind::circle:
            appendf(out,
                    "  <circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"%s\" "
                    "fill-opacity=\"%.2f\" stroke=\"%s\" stroke-width=\"1\"/>\n",
                    map.sx(pos.x), map.sy(pos.y), std::max(e.shape.a * map.scale, 1.5),
                    fill, opacity, stroke);
            break;
        case ShapeKind::rectangle:
            appendf(out,
                    "  <rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
                    "fill=\"%s\" fill-opacity=\"%.2f\" stroke=\"%s\" stroke-width=\"1\"/>\n",
                    map.sx(pos.x - e.shape.a), map.sy(pos.y + e.shape.b),
                    2.0 * e.shape.a * map.scale, 2.0 * e.shape.b * map.scale, fill,
                    opacity, stroke);
            break;
    }
}

void draw_springs(std::string& out, const Scene& scene,
                  const std::vector<Trajectory::State>& snap, const Mapper& map,
                  const char* stroke, double opacity) {
    for (const RelationSpec& rel : scene.relations) {
        if (rel.kind != RelationKind::spring || rel.sender < rel.receiver) continue;
        Vec2 a = snap[static_cast<std::size_t>(rel.sender)].pos;
        Vec2 b = snap[static_cast<std::size_t>(rel.receiver)].pos;
        appendf(out,
                "  <line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" "
                "stroke=\"%s\" stroke-opacity=\"%.2f\" stroke-width=\"1\"/>\n",
                map.sx(a.x), map.sy(a.y), map.sx(b.x), map.sy(b.y), stroke, opacity);
    }
}

} // namespace

std::string render_frame(const Scene& scene, const std::vector<Trajectory::State>& truth,
                         const std::vector<Trajectory::State>* model,
                         const std::array<double, 4>& bounds, int pixels) {
    if (static_cast<int>(truth.size()) != scene.n())
        throw data_error("render_frame: snapshot does not match the scene");
    if (model && model->size() != truth.size())
        throw data_error("render_frame: model snapshot size mismatch");
    if (pixels < 16) throw config_error("render_frame: frame too small");
    if (!(bounds[2] > bounds[0]) || !(bounds[3] > bounds[1]))
        throw config_error("render_frame: empty bounds");

    double w = bounds[2] - bounds[0];
    double h = bounds[3] - bounds[1];
    Mapper map;
    map.bounds = bounds;
    map.scale = static_cast<double>(pixels) / std::max(w, h);
    double width_px = w * map.scale;
    map.height_px = h * map.scale;

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    appendf(out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
            "viewBox=\"0 0 %.2f %.2f\">\n",
            width_px, map.height_px, width_px, map.height_px);
    appendf(out, "  <rect x=\"0\" y=\"0\" width=\"%.2f\" height=\"%.2f\" fill=\"#ffffff\"/>\n",
            width_px, map.height_px);

    draw_springs(out, scene, truth, map, "#2b6cb0", 0.9);
    for (int j = 0; j < scene.n(); ++j) {
        const Entity& e = scene.entities[static_cast<std::size_t>(j)];
        const char* fill = e.is_static() ? "#4a5568" : "#2b6cb0";
        draw_entity(out, e, truth[static_cast<std::size_t>(j)].pos, map, fill, "#1a202c",
                    0.9);
    }
    if (model) {
        draw_springs(out, scene, *model, map, "#dd6b20", 0.6);
        for (int j = 0; j < scene.n(); ++j) {
            const Entity& e = scene.entities[static_cast<std::size_t>(j)];
            if (e.is_static()) continue;
            draw_entity(out, e, (*model)[static_cast<std::size_t>(j)].pos, map, "#dd6b20",
                        "#7b341e", 0.6);
        }
    }
    out += "</svg>\n";
    return out;
}

} // namespace inphys
