//! Symmetric Gauss quadrature on the reference triangle (0,0),(1,0),(0,1).
//!
//! Points are stored in reference coordinates, weights are pre-scaled so that
//! they sum to the reference area 1/2: `∫_T̂ f ≈ Σ w_i f(p_i)`. On a physical
//! triangle multiply each weight by |det J| = 2·area.

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub struct QuadRule {
    /// Highest total polynomial degree integrated exactly.
    pub degree: usize,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Applies the rule on the reference triangle.
    pub fn integrate_reference<F: FnMut(f64, f64) -> f64>(&self, mut f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| w * f(p[0], p[1]))
            .sum()
    }
}

/// Barycentric orbit generators for a symmetric rule. The weight is the
/// area-normalized Dunavant weight (orbit weights sum to 1 over the rule).
enum Orbit {
    /// (1/3, 1/3, 1/3)
    Centroid(f64),
    /// permutations of (a, b, b) with a + 2b = 1
    Three(f64, f64),
    /// all six permutations of (a, b, c)
    Six(f64, f64, f64),
}

fn expand(degree: usize, orbits: &[Orbit]) -> QuadRule {
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut push = |w: f64, l: [f64; 3]| {
        // reference coords from barycentric: x = λ1, y = λ2
        points.push([l[1], l[2]]);
        weights.push(0.5 * w);
    };
    for orbit in orbits {
        match *orbit {
            Orbit::Centroid(w) => {
                let t = 1.0 / 3.0;
                push(w, [t, t, t]);
            }
            Orbit::Three(w, a) => {
                let b = 0.5 * (1.0 - a);
                push(w, [a, b, b]);
                push(w, [b, a, b]);
                push(w, [b, b, a]);
            }
            Orbit::Six(w, a, b) => {
                let c = 1.0 - a - b;
                push(w, [a, b, c]);
                push(w, [a, c, b]);
                push(w, [b, a, c]);
                push(w, [b, c, a]);
                push(w, [c, a, b]);
                push(w, [c, b, a]);
            }
        }
    }
    QuadRule {
        degree,
        points,
        weights,
    }
}

fn build_tables() -> Vec<QuadRule> {
    vec![
        expand(1, &[Orbit::Centroid(1.0)]),
        expand(2, &[Orbit::Three(1.0 / 3.0, 2.0 / 3.0)]),
        expand(
            4,
            &[
                Orbit::Three(0.223381589678011, 0.108103018168070),
                Orbit::Three(0.109951743655322, 0.816847572980459),
            ],
        ),
        expand(
            5,
            &[
                Orbit::Centroid(0.225),
                Orbit::Three(0.132394152788506, 0.059715871789770),
                Orbit::Three(0.125939180544827, 0.797426985353087),
            ],
        ),
        expand(
            6,
            &[
                Orbit::Three(0.116786275726379, 0.501426509658179),
                Orbit::Three(0.050844906370207, 0.873821971016996),
                Orbit::Six(0.082851075618374, 0.053145049844816, 0.310352451033785),
            ],
        ),
        expand(
            8,
            &[
                Orbit::Centroid(0.144315607677787),
                Orbit::Three(0.095091634267285, 0.081414823414554),
                Orbit::Three(0.103217370534718, 0.658861384496480),
                Orbit::Three(0.032458497623198, 0.898905543365938),
                Orbit::Six(0.027230314174435, 0.008394777409958, 0.263112829634638),
            ],
        ),
        expand(
            9,
            &[
                Orbit::Centroid(0.097135796282799),
                Orbit::Three(0.031334700227139, 0.020634961602525),
                Orbit::Three(0.077827541004774, 0.125820817014127),
                Orbit::Three(0.079647738927210, 0.623592928761935),
                Orbit::Three(0.025577675658698, 0.910540973211095),
                Orbit::Six(0.043283539377289, 0.036838412054736, 0.221962989160766),
            ],
        ),
        expand(
            10,
            &[
                Orbit::Centroid(0.090817990382754),
                Orbit::Three(0.036725957756467, 0.028844733232685),
                Orbit::Three(0.045321059435528, 0.781036849029926),
                Orbit::Six(0.072757916845420, 0.141707219414880, 0.307939838764121),
                Orbit::Six(0.028327242531057, 0.025003534762686, 0.246672560639903),
                Orbit::Six(0.009421666963733, 0.009540815400299, 0.066803251012200),
            ],
        ),
    ]
}

fn tables() -> &'static [QuadRule] {
    static TABLES: OnceLock<Vec<QuadRule>> = OnceLock::new();
    TABLES.get_or_init(build_tables)
}

/// Smallest tabulated rule exact for polynomials of total degree `degree`.
pub fn rule_for_degree(degree: usize) -> Result<&'static QuadRule> {
    tables()
        .iter()
        .find(|r| r.degree >= degree)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "no quadrature rule of degree {degree}; highest available is {}",
                tables().last().map(|r| r.degree).unwrap_or(0)
            ))
        })
}
