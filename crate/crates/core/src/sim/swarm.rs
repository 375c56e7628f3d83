//! Boids-style waypoint follower used as the comparison controller.

use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwarmParams {
    pub k_alignment: f64,
    pub k_cohesion: f64,
    pub k_separation: f64,
    pub w_cohesion: f64,
    pub w_alignment: f64,
    pub w_separation: f64,
    pub w_goal: f64,
}

impl Default for SwarmParams {
    fn default() -> Self {
        Self {
            k_alignment: 2.0,
            k_cohesion: 2.0,
            k_separation: 0.5,
            w_cohesion: 0.27,
            w_alignment: 1.05,
            w_separation: 1.65,
            w_goal: 1.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwarmRadii {
    pub alignment: f64,
    pub cohesion: f64,
    pub separation: f64,
}

/// `R_x = K_x * CS * BS / n_q`.
pub fn swarm_radii(cell_size: f64, block_size: usize, n_q: usize, p: &SwarmParams) -> SwarmRadii {
    let base = cell_size * block_size as f64 / n_q.max(1) as f64;
    SwarmRadii { alignment: p.k_alignment * base, cohesion: p.k_cohesion * base, separation: p.k_separation * base }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agent {
    pub position: Vec2,
    pub velocity: Vec2,
}

/// Cohesion, alignment and separation over the other agents within the
/// respective radii, plus the pull toward `goal`.
pub fn swarm_force(index: usize, agents: &[Agent], radii: &SwarmRadii, p: &SwarmParams, goal: Vec2) -> Vec2 {
    let me = agents[index];
    let mut cohesion = (Vec2::ZERO, 0usize);
    let mut alignment = (Vec2::ZERO, 0usize);
    let mut separation = Vec2::ZERO;
    for (k, other) in agents.iter().enumerate() {
        if k == index {
            continue;
        }
        let d = other.position - me.position;
        let dist = d.norm();
        if dist <= radii.cohesion {
            cohesion = (cohesion.0 + other.position, cohesion.1 + 1);
        }
        if dist <= radii.alignment {
            alignment = (alignment.0 + other.velocity, alignment.1 + 1);
        }
        if dist <= radii.separation && dist > 0.0 {
            // stronger push the closer the neighbour
            separation -= d / (dist * dist);
        }
    }
    let mut f = (goal - me.position) * p.w_goal;
    if cohesion.1 > 0 {
        f += (cohesion.0 / cohesion.1 as f64 - me.position) * p.w_cohesion;
    }
    if alignment.1 > 0 {
        f += (alignment.0 / alignment.1 as f64 - me.velocity) * p.w_alignment;
    }
    f + separation * p.w_separation
}
