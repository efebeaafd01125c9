#pragma once

#include "inphys/engine.hpp"
#include "inphys/rng.hpp"

namespace inphys {

// Scene samplers draw in a fixed, documented order so that a seed pins
// the scene exactly.

// Bodies with mass ~ U[0.02, 9] kg placed at a random angle and distance
// U[10, 100] m from the origin, fully connected by gravity relations.
// Draw order per body: mass, angle, radius, then either vx, vy
// (non-orbit, components U[-3, 3]) or the orbit direction coin.
// The orbit variant prepends a 100 kg star at rest at the origin and
// gives every planet the tangential speed for a circular orbit about it.
Scene sample_nbody_scene(Rng& rng, int n, bool orbit, double g_grav = 2000.0,
                         double min_dist = 1.0);

// n balls inside a box of 4 static walls; interior extents W, H ~ U[1, 3] m.
// Draw order: W, H, then per ball radius U[0.1, 0.3], mass U[0.75, 1.25],
// rejection-sampled position (strictly positive gaps), velocity components
// U[-5, 5]; finally restitution U[0.4, 1] per unordered object pair in
// lexicographic order. Entities are balls 0..n-1 then walls
// (left, right, bottom, top). All ordered object pairs get a collision
// relation.
Scene sample_balls_scene(Rng& rng, int n);

// Chain of point masses U[0.05, 0.15] kg spaced at the 0.2 m rest length
// along the x axis, neighbours joined by springs (C_s=100, L=0.2,
// damping 0.001), plus one static circle every mass may bounce off.
// Draw order: per-mass masses, circle x U[-0.5, 0.5], y U[-1, -0.5],
// radius U[0.2, 0.4], restitution U[0, 1], gravity g_y U[-30, -5], and
// (when pinned == 1) the coin picking which end mass is pinned.
// Entities are masses 0..n-1 then the circle.
Scene sample_string_scene(Rng& rng, int n_masses, int pinned);

} // namespace inphys
