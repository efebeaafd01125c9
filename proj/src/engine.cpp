#include "inphys/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

namespace inphys {

namespace {

// Guards the 1/d in the Hooke term against exact overlap. Deliberately
// tiny: string geometry lives at the 0.1 m scale, so the n-body clip
// distance would wipe out real spring forces.
constexpr double kSpringDistFloor = 1e-9;

double radius_of(const Entity& e) {
    switch (e.shape.kind) {
        case ShapeKind::point: return 0.0;
        case ShapeKind::circle: return e.shape.a;
        case ShapeKind::rectangle:
            throw geometry_error("radius_of: entity is a rectangle");
    }
    return 0.0;
}

void require_finite_state(const std::vector<Entity>& entities, const char* who) {
    for (const Entity& e : entities)
        if (!e.pos.finite() || !e.vel.finite())
            throw data_error(std::string(who) + ": non-finite entity state");
}

std::uint64_t pair_key(int a, int b) {
    int lo = std::min(a, b), hi = std::max(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(lo)) << 32) |
           static_cast<std::uint32_t>(hi);
}

} // namespace

std::vector<Vec2> gravity_forces(const std::vector<Entity>& entities,
                                 const std::vector<std::pair<int, int>>& pairs,
                                 double g_grav, double min_dist) {
    require_finite_state(entities, "gravity_forces");
    if (min_dist <= 0.0) throw config_error("gravity_forces: min_dist must be positive");
    std::vector<Vec2> f(entities.size());
    int n = static_cast<int>(entities.size());
    for (auto [i, j] : pairs) {
        if (i < 0 || i >= n || j < 0 || j >= n || i == j)
            throw shape_error("gravity_forces: bad pair (" + std::to_string(i) + ", " +
                              std::to_string(j) + ")");
        const Entity& sender = entities[static_cast<std::size_t>(i)];
        const Entity& receiver = entities[static_cast<std::size_t>(j)];
        if (sender.is_static() || receiver.is_static()) continue;
        // The coefficient is evaluated in canonical index order so that
        // the (j, i) pair produces the bitwise negation of this force.
        const Entity& lo = entities[static_cast<std::size_t>(std::min(i, j))];
        const Entity& hi = entities[static_cast<std::size_t>(std::max(i, j))];
        Vec2 delta = sender.pos - receiver.pos;
        double d = std::max(norm(delta), min_dist);
        double coef = g_grav * lo.mass() * hi.mass() / (d * d * d);
        f[static_cast<std::size_t>(j)] += coef * delta;
    }
    return f;
}

std::vector<Vec2> spring_forces(const std::vector<Entity>& entities,
                                const std::vector<RelationSpec>& relations) {
    require_finite_state(entities, "spring_forces");
    std::vector<Vec2> f(entities.size());
    int n = static_cast<int>(entities.size());
    for (const RelationSpec& rel : relations) {
        if (rel.kind != RelationKind::spring) continue;
        int i = rel.sender, j = rel.receiver;
        if (i < 0 || i >= n || j < 0 || j >= n || i == j)
            throw shape_error("spring_forces: bad relation (" + std::to_string(i) +
                              ", " + std::to_string(j) + ")");
        const Entity& sender = entities[static_cast<std::size_t>(i)];
        const Entity& receiver = entities[static_cast<std::size_t>(j)];
        Vec2 delta = sender.pos - receiver.pos;
        double d = std::max(norm(delta), kSpringDistFloor);
        double c = rel.spring_constant * (1.0 - rel.rest_length / d);
        f[static_cast<std::size_t>(j)] += c * delta;
        f[static_cast<std::size_t>(j)] += rel.damping * (sender.vel - receiver.vel);
    }
    return f;
}

namespace {

// Circle (or point, radius zero) against an axis-aligned rectangle.
// On contact fills `normal_rc` pointing from the rectangle toward the
// circle and the penetration depth.
bool circle_vs_rect(const Entity& circle, const Entity& rect, Vec2& normal_rc,
                    double& depth) {
    double rc = radius_of(circle);
    Vec2 lo = rect.pos - Vec2{rect.shape.a, rect.shape.b};
    Vec2 hi = rect.pos + Vec2{rect.shape.a, rect.shape.b};
    Vec2 closest{std::clamp(circle.pos.x, lo.x, hi.x),
                 std::clamp(circle.pos.y, lo.y, hi.y)};
    Vec2 d = circle.pos - closest;
    double dist = norm(d);
    if (dist > 0.0) {
        if (dist >= rc) return false;
        normal_rc = d * (1.0 / dist);
        depth = rc - dist;
        return true;
    }
    // Center inside the rectangle: exit through the nearest face.
    double left = circle.pos.x - lo.x;
    double right = hi.x - circle.pos.x;
    double bottom = circle.pos.y - lo.y;
    double top = hi.y - circle.pos.y;
    double least = std::min({left, right, bottom, top});
    if (least == left) normal_rc = {-1.0, 0.0};
    else if (least == right) normal_rc = {1.0, 0.0};
    else if (least == bottom) normal_rc = {0.0, -1.0};
    else normal_rc = {0.0, 1.0};
    depth = rc + least;
    return true;
}

} // namespace

std::vector<Contact> detect_collisions(const std::vector<Entity>& entities) {
    require_finite_state(entities, "detect_collisions");
    std::vector<Contact> contacts;
    int n = static_cast<int>(entities.size());
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            const Entity& ea = entities[static_cast<std::size_t>(a)];
            const Entity& eb = entities[static_cast<std::size_t>(b)];
            if (ea.is_static() && eb.is_static()) continue;

            bool a_rect = ea.shape.kind == ShapeKind::rectangle;
            bool b_rect = eb.shape.kind == ShapeKind::rectangle;
            Vec2 normal; // from a toward b
            double depth = 0.0;
            if (!a_rect && !b_rect) {
                double rsum = radius_of(ea) + radius_of(eb);
                if (rsum == 0.0) continue; // two points never collide
                Vec2 d = eb.pos - ea.pos;
                double dist = norm(d);
                if (dist >= rsum || dist == 0.0) continue;
                normal = d * (1.0 / dist);
                depth = rsum - dist;
            } else if (a_rect != b_rect) {
                const Entity& circle = a_rect ? eb : ea;
                const Entity& rect = a_rect ? ea : eb;
                Vec2 normal_rc;
                if (!circle_vs_rect(circle, rect, normal_rc, depth)) continue;
                normal = a_rect ? normal_rc : -normal_rc;
            } else {
                throw geometry_error("detect_collisions: rectangle-rectangle contact");
            }

            // Only approaching pairs produce impulses.
            if (dot(eb.vel - ea.vel, normal) >= 0.0) continue;
            contacts.push_back({a, b, normal, depth});
        }
    }
    return contacts;
}

std::vector<Vec2> resolve_collisions(const std::vector<Entity>& entities,
                                     const std::vector<Contact>& contacts,
                                     const std::function<double(int, int)>& restitution,
                                     double dt) {
    if (dt <= 0.0) throw config_error("resolve_collisions: dt must be positive");
    std::vector<Vec2> f(entities.size());
    for (const Contact& c : contacts) {
        const Entity& ea = entities[static_cast<std::size_t>(c.a)];
        const Entity& eb = entities[static_cast<std::size_t>(c.b)];
        double inv_sum = ea.inverse_mass + eb.inverse_mass;
        if (inv_sum == 0.0) continue;
        double e = restitution(c.a, c.b);
        if (!(e >= 0.0))
            throw config_error("resolve_collisions: negative restitution");
        double vn = dot(eb.vel - ea.vel, c.normal);
        if (vn >= 0.0) continue;
        double jn = -(1.0 + e) * vn / inv_sum;
        Vec2 fimp = (jn * c.normal) * (1.0 / dt);
        f[static_cast<std::size_t>(c.b)] += fimp;
        f[static_cast<std::size_t>(c.a)] -= fimp;
    }
    return f;
}

void euler_step(Scene& scene, double dt,
                std::vector<std::pair<int, int>>* contacts_out) {
    if (dt <= 0.0) throw config_error("euler_step: dt must be positive");
    require_finite_state(scene.entities, "euler_step");
    std::size_t n = scene.entities.size();
    std::vector<Vec2> force(n);

    std::vector<std::pair<int, int>> gravity_pairs;
    bool any_collision = false;
    for (const RelationSpec& rel : scene.relations) {
        if (rel.kind == RelationKind::gravity)
            gravity_pairs.emplace_back(rel.sender, rel.receiver);
        else if (rel.kind == RelationKind::collision)
            any_collision = true;
    }

    if (!gravity_pairs.empty()) {
        std::vector<Vec2> fg =
            gravity_forces(scene.entities, gravity_pairs, scene.g_grav, scene.min_dist);
        for (std::size_t i = 0; i < n; ++i) force[i] += fg[i];
    }

    std::vector<Vec2> fs = spring_forces(scene.entities, scene.relations);
    for (std::size_t i = 0; i < n; ++i) force[i] += fs[i];

    if (any_collision) {
        std::unordered_map<std::uint64_t, double> rest;
        for (const RelationSpec& rel : scene.relations)
            if (rel.kind == RelationKind::collision)
                rest.emplace(pair_key(rel.sender, rel.receiver), rel.restitution);
        std::vector<Contact> contacts = detect_collisions(scene.entities);
        // Contacts between entities with no collision relation are inert.
        std::vector<Contact> active;
        for (const Contact& c : contacts)
            if (rest.count(pair_key(c.a, c.b))) active.push_back(c);
        std::vector<Vec2> fc = resolve_collisions(
            scene.entities, active,
            [&](int a, int b) { return rest.at(pair_key(a, b)); }, dt);
        for (std::size_t i = 0; i < n; ++i) force[i] += fc[i];
        if (contacts_out)
            for (const Contact& c : active) contacts_out->emplace_back(c.a, c.b);
    }

    for (std::size_t i = 0; i < n; ++i) {
        Entity& e = scene.entities[i];
        if (e.is_static()) continue;
        force[i] += scene.gravity * e.mass();
        e.vel += (force[i] * e.inverse_mass) * dt;
        e.pos += e.vel * dt;
    }

    for (const Entity& e : scene.entities)
        if (!e.pos.finite() || !e.vel.finite())
            throw numeric_error("euler_step: state diverged");
}

Trajectory simulate(const Scene& initial, int steps, double dt,
                    std::vector<std::vector<std::pair<int, int>>>* contacts_out) {
    if (steps < 0) throw config_error("simulate: negative step count");
    Scene scene = initial;
    Trajectory traj;
    traj.dt = dt;
    traj.steps = steps;
    traj.snapshots.reserve(static_cast<std::size_t>(steps) + 1);
    auto snap = [&] {
        std::vector<Trajectory::State> s;
        s.reserve(scene.entities.size());
        for (const Entity& e : scene.entities) s.push_back({e.pos, e.vel});
        traj.snapshots.push_back(std::move(s));
    };
    snap();
    for (int t = 0; t < steps; ++t) {
        std::vector<std::pair<int, int>> contacts;
        try {
            euler_step(scene, dt, contacts_out ? &contacts : nullptr);
        } catch (const numeric_error& err) {
            throw numeric_error("simulate: " + std::string(err.what()) + " at step " +
                                std::to_string(t));
        }
        if (contacts_out) contacts_out->push_back(std::move(contacts));
        snap();
    }
    return traj;
}

double potential_energy(const Scene& scene) {
    require_finite_state(scene.entities, "potential_energy");
    double u = 0.0;
    switch (scene.domain) {
        case Domain::nbody: {
            for (const RelationSpec& rel : scene.relations) {
                if (rel.kind != RelationKind::gravity || rel.sender >= rel.receiver)
                    continue;
                const Entity& a = scene.entities[static_cast<std::size_t>(rel.sender)];
                const Entity& b = scene.entities[static_cast<std::size_t>(rel.receiver)];
                if (a.is_static() || b.is_static()) continue;
                double d = std::max(norm(a.pos - b.pos), scene.min_dist);
                u -= scene.g_grav * a.mass() * b.mass() / d;
            }
            break;
        }
        case Domain::string: {
            for (const RelationSpec& rel : scene.relations) {
                if (rel.kind != RelationKind::spring || rel.sender >= rel.receiver)
                    continue;
                const Entity& a = scene.entities[static_cast<std::size_t>(rel.sender)];
                const Entity& b = scene.entities[static_cast<std::size_t>(rel.receiver)];
                double stretch = norm(a.pos - b.pos) - rel.rest_length;
                u += 0.5 * rel.spring_constant * stretch * stretch;
            }
            for (const Entity& e : scene.entities)
                if (!e.is_static()) u -= e.mass() * dot(scene.gravity, e.pos);
            break;
        }
        case Domain::balls:
            u = 0.0;
            break;
    }
    return u;
}

Vec2 total_momentum(const Scene& scene) {
    Vec2 p;
    for (const Entity& e : scene.entities)
        if (!e.is_static()) p += e.vel * e.mass();
    return p;
}

} // namespace inphys
