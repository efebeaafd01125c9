#include "inphys/samplers.hpp"

#include <cmath>
#include <string>

namespace inphys {

namespace {
constexpr double kTau = 6.283185307179586;
constexpr double kWallThickness = 0.5;
constexpr int kPlacementAttempts = 10000;
} // namespace

Scene sample_nbody_scene(Rng& rng, int n, bool orbit, double g_grav, double min_dist) {
    if (n < 2) throw config_error("sample_nbody_scene: need at least 2 bodies");
    Scene scene;
    scene.domain = Domain::nbody;
    scene.g_grav = g_grav;
    scene.min_dist = min_dist;

    if (orbit) {
        Entity star;
        star.inverse_mass = 1.0 / 100.0;
        scene.entities.push_back(star);
    }
    int to_draw = orbit ? n - 1 : n;
    for (int i = 0; i < to_draw; ++i) {
        Entity body;
        double mass = rng.uniform(0.02, 9.0);
        body.inverse_mass = 1.0 / mass;
        double angle = rng.uniform(0.0, kTau);
        double radius = rng.uniform(10.0, 100.0);
        body.pos = {radius * std::cos(angle), radius * std::sin(angle)};
        if (orbit) {
            double speed = std::sqrt(g_grav * 100.0 / radius);
            Vec2 tangent{-std::sin(angle), std::cos(angle)};
            body.vel = tangent * (rng.coin() ? speed : -speed);
        } else {
            body.vel.x = rng.uniform(-3.0, 3.0);
            body.vel.y = rng.uniform(-3.0, 3.0);
        }
        scene.entities.push_back(body);
    }

    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) {
                RelationSpec rel;
                rel.sender = i;
                rel.receiver = j;
                rel.kind = RelationKind::gravity;
                scene.relations.push_back(rel);
            }
    return scene;
}

Scene sample_balls_scene(Rng& rng, int n) {
    if (n < 1) throw config_error("sample_balls_scene: need at least 1 ball");
    Scene scene;
    scene.domain = Domain::balls;

    double w = rng.uniform(1.0, 3.0);
    double h = rng.uniform(1.0, 3.0);

    for (int i = 0; i < n; ++i) {
        Entity ball;
        double radius = rng.uniform(0.1, 0.3);
        double mass = rng.uniform(0.75, 1.25);
        ball.inverse_mass = 1.0 / mass;
        ball.shape = {ShapeKind::circle, radius, 0.0};

        bool placed = false;
        for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
            Vec2 pos{rng.uniform(radius, w - radius), rng.uniform(radius, h - radius)};
            bool clear = true;
            for (const Entity& other : scene.entities) {
                if (norm(pos - other.pos) <= radius + other.shape.a) {
                    clear = false;
                    break;
                }
            }
            if (clear) {
                ball.pos = pos;
                placed = true;
                break;
            }
        }
        if (!placed)
            throw sampler_error("sample_balls_scene: box too crowded for ball " +
                                std::to_string(i));
        ball.vel.x = rng.uniform(-5.0, 5.0);
        ball.vel.y = rng.uniform(-5.0, 5.0);
        scene.entities.push_back(ball);
    }

    const double t = kWallThickness;
    auto wall = [](Vec2 center, double hx, double hy) {
        Entity e;
        e.pos = center;
        e.inverse_mass = 0.0;
        e.shape = {ShapeKind::rectangle, hx, hy};
        return e;
    };
    scene.entities.push_back(wall({-t / 2, h / 2}, t / 2, h / 2 + t));     // left
    scene.entities.push_back(wall({w + t / 2, h / 2}, t / 2, h / 2 + t));  // right
    scene.entities.push_back(wall({w / 2, -t / 2}, w / 2, t / 2));         // bottom
    scene.entities.push_back(wall({w / 2, h + t / 2}, w / 2, t / 2));      // top

    int total = n + 4;
    std::vector<double> restitution;
    for (int i = 0; i < total; ++i)
        for (int j = i + 1; j < total; ++j) restitution.push_back(rng.uniform(0.4, 1.0));
    auto pair_rest = [&](int i, int j) {
        int lo = std::min(i, j), hi = std::max(i, j);
        // Index into the lexicographic i<j enumeration.
        int idx = lo * total - lo * (lo + 1) / 2 + (hi - lo - 1);
        return restitution[static_cast<std::size_t>(idx)];
    };
    for (int i = 0; i < total; ++i)
        for (int j = 0; j < total; ++j)
            if (i != j) {
                RelationSpec rel;
                rel.sender = i;
                rel.receiver = j;
                rel.kind = RelationKind::collision;
                rel.restitution = pair_rest(i, j);
                scene.relations.push_back(rel);
            }
    return scene;
}

Scene sample_string_scene(Rng& rng, int n_masses, int pinned) {
    if (n_masses < 2) throw config_error("sample_string_scene: need at least 2 masses");
    if (pinned < 0 || pinned > 2)
        throw config_error("sample_string_scene: pinned must be 0, 1 or 2");
    Scene scene;
    scene.domain = Domain::string;
    scene.pinned = pinned;

    const double rest = 0.2;
    double x0 = -0.5 * rest * (n_masses - 1);
    for (int i = 0; i < n_masses; ++i) {
        Entity m;
        m.inverse_mass = 1.0 / rng.uniform(0.05, 0.15);
        m.pos = {x0 + rest * i, 0.0};
        scene.entities.push_back(m);
    }

    Entity circle;
    circle.pos = {rng.uniform(-0.5, 0.5), rng.uniform(-1.0, -0.5)};
    circle.inverse_mass = 0.0;
    circle.shape = {ShapeKind::circle, rng.uniform(0.2, 0.4), 0.0};
    scene.entities.push_back(circle);
    int circle_idx = n_masses;

    double restitution = rng.uniform(0.0, 1.0);
    scene.gravity = {0.0, rng.uniform(-30.0, -5.0)};

    if (pinned == 2) {
        scene.entities[0].inverse_mass = 0.0;
        scene.entities[static_cast<std::size_t>(n_masses - 1)].inverse_mass = 0.0;
    } else if (pinned == 1) {
        int end = rng.coin() ? n_masses - 1 : 0;
        scene.entities[static_cast<std::size_t>(end)].inverse_mass = 0.0;
    }

    auto spring = [&](int i, int j) {
        RelationSpec rel;
        rel.sender = i;
        rel.receiver = j;
        rel.kind = RelationKind::spring;
        rel.spring_constant = 100.0;
        rel.rest_length = rest;
        rel.damping = 0.001;
        return rel;
    };
    for (int i = 0; i + 1 < n_masses; ++i) {
        scene.relations.push_back(spring(i, i + 1));
        scene.relations.push_back(spring(i + 1, i));
    }
    for (int i = 0; i < n_masses; ++i) {
        RelationSpec a;
        a.sender = i;
        a.receiver = circle_idx;
        a.kind = RelationKind::collision;
        a.restitution = restitution;
        scene.relations.push_back(a);
        RelationSpec b = a;
        b.sender = circle_idx;
        b.receiver = i;
        scene.relations.push_back(b);
    }
    return scene;
}

} // namespace inphys
