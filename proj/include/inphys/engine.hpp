#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "inphys/errors.hpp"

namespace inphys {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::sqrt(a.x * a.x + a.y * a.y); }

enum class ShapeKind { point, circle, rectangle };

// Circles use `a` as the radius; rectangles are axis-aligned with
// half-extents (a, b); points ignore both.
struct EntityShape {
    ShapeKind kind = ShapeKind::point;
    double a = 0.0;
    double b = 0.0;
};

// Static entities carry inverse_mass == 0 and never move.
struct Entity {
    Vec2 pos;
    Vec2 vel;
    double inverse_mass = 0.0;
    EntityShape shape;

    bool is_static() const { return inverse_mass == 0.0; }
    double mass() const { return 1.0 / inverse_mass; }
};

enum class RelationKind { gravity, spring, collision };

// A directed interaction: forces computed from it are applied to the
// receiver only. Scene builders emit both directions of each physical
// link, which keeps action equal to reaction.
struct RelationSpec {
    int sender = 0;
    int receiver = 0;
    RelationKind kind = RelationKind::gravity;
    double spring_constant = 0.0;
    double rest_length = 0.0;
    double damping = 0.0;
    double restitution = 0.0;
};

enum class Domain { nbody, balls, string };

struct Scene {
    std::vector<Entity> entities;
    std::vector<RelationSpec> relations;
    Domain domain = Domain::nbody;
    Vec2 gravity;            // uniform external acceleration (string domain)
    double g_grav = 0.0;     // pairwise gravitational constant (n-body)
    double min_dist = 1.0;   // distance clip for the gravity denominator
    int pinned = -1;         // string bookkeeping, -1 where not applicable

    int n() const { return static_cast<int>(entities.size()); }
};

struct Trajectory {
    struct State {
        Vec2 pos;
        Vec2 vel;
    };
    double dt = 1e-3;
    int steps = 0;
    // steps + 1 snapshots, each with one State per entity.
    std::vector<std::vector<State>> snapshots;
};

// Contact between entities a < b; the normal points from a toward b.
struct Contact {
    int a = 0;
    int b = 0;
    Vec2 normal;
    double depth = 0.0;
};

// Pairwise attraction toward each sender, applied to receivers. `pairs`
// lists (sender, receiver) index pairs. The magnitude coefficient is
// computed in a canonical index order so that swapping a pair negates
// the force bitwise.
std::vector<Vec2> gravity_forces(const std::vector<Entity>& entities,
                                 const std::vector<std::pair<int, int>>& pairs,
                                 double g_grav, double min_dist);

// Hooke springs plus velocity-difference damping, one directed relation
// per entry (only relations of kind spring are consumed).
std::vector<Vec2> spring_forces(const std::vector<Entity>& entities,
                                const std::vector<RelationSpec>& relations);

// Overlapping-and-approaching pairs. Supports circle/point vs circle/point
// and circle/point vs rectangle; anything else raises geometry_error.
std::vector<Contact> detect_collisions(const std::vector<Entity>& entities);

// Restitution impulses converted to forces over one time step.
// `restitution(a, b)` supplies the coefficient for an entity pair.
std::vector<Vec2> resolve_collisions(const std::vector<Entity>& entities,
                                     const std::vector<Contact>& contacts,
                                     const std::function<double(int, int)>& restitution,
                                     double dt);

// Semi-implicit Euler: velocities first, then positions, statics frozen.
// When `contacts_out` is non-null it receives the contact pairs that
// produced impulses during this step.
void euler_step(Scene& scene, double dt,
                std::vector<std::pair<int, int>>* contacts_out = nullptr);

Trajectory simulate(const Scene& initial, int steps, double dt = 1e-3,
                    std::vector<std::vector<std::pair<int, int>>>* contacts_out = nullptr);

// Domain potential: n-body pairwise -G m m / d, string spring + uniform
// gravity terms, balls defined as zero.
double potential_energy(const Scene& scene);

// Total linear momentum of the non-static entities.
Vec2 total_momentum(const Scene& scene);

} // namespace inphys
