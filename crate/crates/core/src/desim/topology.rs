use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{los_test, Point, Segment};
use crate::model::Scenario;

/// Axis-aligned rectangle `[0, width] × [0, height]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub width: f64,
    pub height: f64,
}

impl Region {
    pub fn square(side: f64) -> Self {
        Self {
            width: side,
            height: side,
        }
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0.0..=self.width).contains(&p.x) && (0.0..=self.height).contains(&p.y)
    }

    fn random_point<R: Rng>(&self, rng: &mut R) -> Point {
        Point::new(
            rng.random::<f64>() * self.width,
            rng.random::<f64>() * self.height,
        )
    }
}

/// A directional link. Transmitter and receiver point their main lobes at
/// each other. Links sharing `rx_node` contend for the same receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub tx: Point,
    pub rx: Point,
    pub rx_node: usize,
    pub beamwidth: f64,
}

impl Link {
    pub fn length(&self) -> f64 {
        self.tx.dist(&self.rx)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanarTopology {
    pub links: Vec<Link>,
    pub obstacles: Vec<Segment>,
    pub region: Region,
    /// Interference range used for the protocol model.
    pub dmax: f64,
}

const MAX_RX_DRAWS: usize = 100_000;

/// Random planar network: Poisson(λ_t·area) transmitters placed uniformly,
/// each with a receiver uniform in a random sector direction at distance
/// `d_max·√U` (redrawn until it falls inside the region), and Poisson(λ_o·area)
/// segment obstacles with uniform centers, orientations in [0, π) and lengths
/// in [0, 1] m.
pub fn build_topology(scenario: &Scenario, region: Region, seed: u64) -> Result<PlanarTopology> {
    scenario.validate()?;
    if !(region.width > 0.0 && region.height > 0.0) {
        return Err(invalid("region", "width and height must be > 0"));
    }
    let dmax = scenario.dmax()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_links = poisson(scenario.tx_density * region.area(), &mut rng);
    let mut links = Vec::with_capacity(n_links);
    for id in 0..n_links {
        let tx = region.random_point(&mut rng);
        let rx = (0..MAX_RX_DRAWS)
            .map(|_| {
                let phi = rng.random::<f64>() * 2.0 * PI;
                let r = dmax * rng.random::<f64>().sqrt();
                Point::new(tx.x + r * phi.cos(), tx.y + r * phi.sin())
            })
            .find(|p| region.contains(p))
            .ok_or_else(|| Error::Config("could not place a receiver inside the region".into()))?;
        links.push(Link {
            tx,
            rx,
            rx_node: id,
            beamwidth: scenario.antenna.beamwidth,
        });
    }
    let n_obstacles = poisson(scenario.obstacle_density * region.area(), &mut rng);
    let obstacles = (0..n_obstacles)
        .map(|_| {
            let c = region.random_point(&mut rng);
            let phi = rng.random::<f64>() * PI;
            let half = 0.5 * rng.random::<f64>();
            let (dx, dy) = (half * phi.cos(), half * phi.sin());
            Segment::new(
                Point::new(c.x - dx, c.y - dy),
                Point::new(c.x + dx, c.y + dy),
            )
        })
        .collect();
    Ok(PlanarTopology {
        links,
        obstacles,
        region,
        dmax,
    })
}

fn poisson<R: Rng>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean)
        .expect("finite positive mean")
        .sample(rng) as usize
}

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

fn in_lobe(axis: f64, bearing: f64, beamwidth: f64) -> bool {
    angle_diff(axis, bearing) <= beamwidth / 2.0 + 1e-12
}

/// Whether the transmitter of link `j` would collide at the receiver of link
/// `i` if both were active: mutual main-lobe coverage, distance within
/// `d_max` and line of sight, or a shared receiver.
pub fn interferes(topo: &PlanarTopology, j: usize, i: usize) -> bool {
    if i == j {
        return false;
    }
    let (li, lj) = (&topo.links[i], &topo.links[j]);
    if li.rx_node == lj.rx_node {
        return true;
    }
    let d = lj.tx.dist(&li.rx);
    d <= topo.dmax
        && in_lobe(
            lj.tx.bearing_to(&lj.rx),
            lj.tx.bearing_to(&li.rx),
            lj.beamwidth,
        )
        && in_lobe(
            li.rx.bearing_to(&li.tx),
            li.rx.bearing_to(&lj.tx),
            li.beamwidth,
        )
        && los_test(lj.tx, li.rx, &topo.obstacles)
}

/// Whether link `receiver` suffers a collision given the set of active
/// transmitters (which may include the link itself).
pub fn collision_check(topo: &PlanarTopology, receiver: usize, active: &[usize]) -> bool {
    active.iter().any(|&j| interferes(topo, j, receiver))
}

/// Precomputed pairwise interference relation and per-link line of sight.
#[derive(Debug, Clone, PartialEq)]
pub struct ConflictGraph {
    /// `interferers_of[i]`: links whose transmission collides at receiver `i`.
    pub interferers_of: Vec<Vec<usize>>,
    /// `victims_of[j]`: receivers that link `j`'s transmission collides at.
    pub victims_of: Vec<Vec<usize>>,
    pub los_ok: Vec<bool>,
}

impl ConflictGraph {
    pub fn new(topo: &PlanarTopology) -> Self {
        let n = topo.links.len();
        let mut interferers_of = vec![Vec::new(); n];
        let mut victims_of = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if interferes(topo, j, i) {
                    interferers_of[i].push(j);
                    victims_of[j].push(i);
                }
            }
        }
        let los_ok = topo
            .links
            .iter()
            .map(|l| los_test(l.tx, l.rx, &topo.obstacles))
            .collect();
        Self {
            interferers_of,
            victims_of,
            los_ok,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DmaxMode;

    fn link(tx: (f64, f64), rx: (f64, f64), id: usize) -> Link {
        Link {
            tx: Point::new(tx.0, tx.1),
            rx: Point::new(rx.0, rx.1),
            rx_node: id,
            beamwidth: 20f64.to_radians(),
        }
    }

    fn topo(links: Vec<Link>, obstacles: Vec<Segment>) -> PlanarTopology {
        PlanarTopology {
            links,
            obstacles,
            region: Region::square(10.0),
            dmax: 15.0,
        }
    }

    #[test]
    fn zero_density_has_no_links() {
        let s = Scenario {
            tx_density: 0.0,
            ..Scenario::default()
        };
        let t = build_topology(&s, Region::square(10.0), 1).unwrap();
        assert!(t.links.is_empty());
    }

    #[test]
    fn mean_link_count() {
        let s = Scenario {
            tx_density: 0.44,
            obstacle_density: 0.0,
            ..Scenario::default()
        };
        let n = 10_000;
        let total: usize = (0..n)
            .map(|k| {
                build_topology(&s, Region::square(10.0), k)
                    .unwrap()
                    .links
                    .len()
            })
            .sum();
        let mean = total as f64 / n as f64;
        assert!(
            (mean - 44.0).abs() <= 3.0 * (44.0f64 / n as f64).sqrt(),
            "{mean}"
        );
    }

    #[test]
    fn link_length_law_in_large_region() {
        // receivers are only redrawn near the border, so a large region leaves
        // the 2ℓ/d² law nearly intact
        let s = Scenario {
            tx_density: 0.05,
            obstacle_density: 0.0,
            ..Scenario::default()
        };
        let mut lens: Vec<f64> = (0..20)
            .flat_map(|k| {
                build_topology(&s, Region::square(1000.0), k)
                    .unwrap()
                    .links
                    .into_iter()
                    .map(|l| l.length())
            })
            .collect();
        lens.sort_by(f64::total_cmp);
        let n = lens.len() as f64;
        let ks = lens
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = x * x / 225.0;
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.02, "KS {ks}");
    }

    #[test]
    fn obstacles_and_receivers_valid() {
        let s = Scenario::default();
        let t = build_topology(&s, Region::square(10.0), 3).unwrap();
        assert!(t.obstacles.iter().all(|o| o.length() <= 1.0 + 1e-12));
        assert!(t
            .links
            .iter()
            .all(|l| t.region.contains(&l.rx) && l.length() <= 15.0));
        let again = build_topology(&s, Region::square(10.0), 3).unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn single_link_never_collides() {
        let t = topo(vec![link((1.0, 1.0), (5.0, 1.0), 0)], vec![]);
        assert!(!collision_check(&t, 0, &[0]));
    }

    #[test]
    fn facing_links_collide() {
        // both links point along +x on one line: each receiver looks back at
        // the other transmitter, which points at it
        let t = topo(
            vec![
                link((4.0, 1.0), (5.0, 1.0), 0),
                link((2.0, 1.0), (8.0, 1.0), 1),
            ],
            vec![],
        );
        assert!(collision_check(&t, 0, &[0, 1]));
        assert!(collision_check(&t, 1, &[0, 1]));
        // a wall between tx 1 and rx 0 blocks the interference and link 1 itself
        let wall = Segment::new(Point::new(3.0, 0.0), Point::new(3.0, 2.0));
        let t = topo(t.links.clone(), vec![wall]);
        assert!(!collision_check(&t, 0, &[0, 1]));
        let g = ConflictGraph::new(&t);
        assert_eq!(g.los_ok, vec![true, false]);
    }

    #[test]
    fn out_of_lobe_or_range_no_collision() {
        // parallel links side by side: neither tx lobe covers the other rx
        let t = topo(
            vec![
                link((1.0, 1.0), (5.0, 1.0), 0),
                link((1.0, 4.0), (5.0, 4.0), 1),
            ],
            vec![],
        );
        assert!(!collision_check(&t, 0, &[0, 1]));
        let mut far = topo(
            vec![
                link((1.0, 1.0), (5.0, 1.0), 0),
                link((30.0, 1.0), (25.0, 1.0), 1),
            ],
            vec![],
        );
        far.region = Region::square(40.0);
        assert!(!collision_check(&far, 0, &[0, 1]));
    }

    #[test]
    fn shared_receiver_collides() {
        let mut b = link((5.0, 9.0), (5.0, 1.0), 0);
        b.rx = Point::new(5.0, 1.0);
        let t = topo(vec![link((1.0, 1.0), (5.0, 1.0), 0), b], vec![]);
        assert!(collision_check(&t, 0, &[0, 1]));
        let g = ConflictGraph::new(&t);
        assert_eq!(g.interferers_of[0], vec![1]);
        assert_eq!(g.victims_of[1], vec![0]);
    }

    #[test]
    fn obstacle_free_collision_rate_matches_poisson_limit() {
        let s = Scenario {
            tx_density: 1.0 / 9.0,
            obstacle_density: 0.0,
            dmax_mode: DmaxMode::Fixed(15.0),
            ..Scenario::default()
        };
        let region = Region::square(120.0);
        let (mut hits, mut total) = (0usize, 0usize);
        for seed in 0..6 {
            let t = build_topology(&s, region, seed).unwrap();
            let all: Vec<usize> = (0..t.links.len()).collect();
            let g = ConflictGraph::new(&t);
            for (i, l) in t.links.iter().enumerate() {
                let interior = l.rx.x > 15.0 && l.rx.x < 105.0 && l.rx.y > 15.0 && l.rx.y < 105.0;
                if interior {
                    total += 1;
                    let c = collision_check(&t, i, &all);
                    assert_eq!(c, !g.interferers_of[i].is_empty());
                    hits += c as usize;
                }
            }
        }
        let d = s.derive().unwrap();
        let expect = 1.0 - (-d.interferer_density * 20f64.to_radians() * 225.0 / 2.0).exp();
        let got = hits as f64 / total as f64;
        assert!(
            (got - expect).abs() < 0.03,
            "{got} vs {expect} over {total}"
        );
    }
}
