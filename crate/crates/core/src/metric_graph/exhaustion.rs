use serde::Serialize;

use super::distance::dijkstra;
use super::MetricGraph;
use crate::error::{Error, Result};

/// Quintic smoothstep `6u⁵ − 15u⁴ + 10u³`, clamped to [0, 1].
pub fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (u * (6.0 * u - 15.0) + 10.0)
}

/// `∫_0^u smoothstep`, with value 1/2 at `u = 1`.
pub fn smoothstep_integral(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    let u4 = u * u * u * u;
    u4 * (u * (u - 3.0) + 2.5)
}

/// Exhaustion of Γ¹ that is flat near every vertex and 1-Lipschitz along edges.
#[derive(Clone, Debug, Serialize)]
pub struct EdgeExhaustion {
    pub epsilon: f64,
    pub origin: usize,
    /// `ρ_*` at the vertices: path metric with edge weights `l_e − 3ε`.
    pub vertex_values: Vec<f64>,
    /// Per edge: slope factor `c ∈ [0, 1]` of the rescaled cutoff.
    pub slope: Vec<f64>,
    lengths: Vec<f64>,
    tails: Vec<usize>,
    heads: Vec<usize>,
}

impl EdgeExhaustion {
    /// Cutoff `α_e(s)`: 0 within ε of the ends, 1 on `[2ε, l − 2ε]`.
    pub fn cutoff(&self, edge: usize, s: f64) -> f64 {
        let (l, eps) = (self.lengths[edge], self.epsilon);
        smoothstep((s - eps) / eps).min(smoothstep((l - eps - s) / eps))
    }

    fn cutoff_integral(&self, edge: usize, t: f64) -> f64 {
        let (l, eps) = (self.lengths[edge], self.epsilon);
        let w = l - 3.0 * eps;
        if t <= l / 2.0 {
            eps * smoothstep_integral((t - eps) / eps) + (t - 2.0 * eps).max(0.0)
        } else {
            w - self.cutoff_integral(edge, l - t)
        }
    }

    /// `ρ₁` at local coordinate `s` of `edge`.
    pub fn eval(&self, edge: usize, s: f64) -> f64 {
        let (u, v) = (self.tails[edge], self.heads[edge]);
        let (ru, rv) = (self.vertex_values[u], self.vertex_values[v]);
        let c = self.slope[edge];
        if ru <= rv {
            ru + c * self.cutoff_integral(edge, s)
        } else {
            rv + c * self.cutoff_integral(edge, self.lengths[edge] - s)
        }
    }

    /// `∂_s ρ₁`.
    pub fn derivative(&self, edge: usize, s: f64) -> f64 {
        let sign = if self.vertex_values[self.tails[edge]] <= self.vertex_values[self.heads[edge]] { 1.0 } else { -1.0 };
        sign * self.slope[edge] * self.cutoff(edge, s)
    }

    /// Uniform samples `(s_i, ρ₁(s_i))` with `n ≥ 2` points per edge.
    pub fn sample(&self, edge: usize, n: usize) -> Vec<(f64, f64)> {
        let l = self.lengths[edge];
        (0..n)
            .map(|i| {
                let s = l * i as f64 / (n - 1) as f64;
                (s, self.eval(edge, s))
            })
            .collect()
    }
}

/// Builds `ρ₁` from the vertex potential `ρ_*` by integrating a cutoff along
/// each edge; edges that are not tight for `ρ_*` get the cutoff scaled by
/// `|ρ_*(e⁺) − ρ_*(e⁻)| / (l_e − 3ε)`.
pub fn edge_exhaustion(g: &MetricGraph, epsilon: f64, origin: usize) -> Result<EdgeExhaustion> {
    if origin >= g.vertices.len() {
        return Err(Error::Domain(format!("unknown origin vertex {origin}")));
    }
    if !(epsilon > 0.0 && 8.0 * epsilon < g.min_edge_length()) {
        return Err(Error::Parameter(format!(
            "epsilon = {epsilon} must be positive and below min edge length / 8 = {}",
            g.min_edge_length() / 8.0
        )));
    }
    let weight = |e: usize| g.edges[e].length - 3.0 * epsilon;
    let rho = dijkstra(g, &[(origin, 0.0)], weight);
    let slope = g
        .edges
        .iter()
        .map(|e| ((rho[e.head] - rho[e.tail]).abs() / weight(e.id)).min(1.0))
        .collect();
    Ok(EdgeExhaustion {
        epsilon,
        origin,
        vertex_values: rho,
        slope,
        lengths: g.edges.iter().map(|e| e.length).collect(),
        tails: g.edges.iter().map(|e| e.tail).collect(),
        heads: g.edges.iter().map(|e| e.head).collect(),
    })
}
