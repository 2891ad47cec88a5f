use crate::error::{Error, Result};
use crate::numerics::{SeededRng, UnitSource};
use crate::robot::{GravityConstant, Interval, RobotParams};
use crate::sampling::SampleSet;

use super::cost::{CostFunction, CostId};

#[derive(Debug, Clone, PartialEq)]
pub struct PsoConfig {
    pub population: usize,
    pub iterations: usize,
    /// Cognitive learning rate.
    pub c1: f64,
    /// Social learning rate.
    pub c2: f64,
    pub inertia_start: f64,
    pub inertia_end: f64,
    /// Iterations over which inertia ramps linearly from start to end.
    pub inertia_ramp_iters: usize,
    pub runs_per_estimate: usize,
    /// Draw r1, r2 per coordinate. When false they are drawn once per
    /// particle and iteration.
    pub per_dimension_random: bool,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            population: 20,
            iterations: 300,
            c1: 1.3,
            c2: 1.3,
            inertia_start: 0.9,
            inertia_end: 0.4,
            inertia_ramp_iters: 100,
            runs_per_estimate: 10,
            per_dimension_random: true,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(format!("pso: {m}")));
        if self.population < 2 {
            return fail("population must be at least 2");
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0) {
            return fail("learning rates must be positive");
        }
        if self.inertia_ramp_iters == 0 {
            return fail("inertia ramp needs at least one iteration");
        }
        Ok(())
    }

    /// Inertia weight at 1-based iteration `i`: linear from
    /// `inertia_start` at 1 to `inertia_end` at `inertia_ramp_iters`,
    /// constant afterwards.
    pub fn inertia(&self, i: usize) -> f64 {
        if self.inertia_ramp_iters <= 1 || i >= self.inertia_ramp_iters {
            return self.inertia_end;
        }
        let frac = (i.max(1) - 1) as f64 / (self.inertia_ramp_iters - 1) as f64;
        self.inertia_start - frac * (self.inertia_start - self.inertia_end)
    }
}

/// Axis-aligned box of a search space.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Dimension("bounds need matching non-empty limits".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(Error::Config("every lower bound must be below its upper bound".into()));
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| l <= v && v <= u)
    }
}

/// Search box over `(m2, m3, s3z, I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchBox {
    pub m2: Interval,
    pub m3: Interval,
    pub s3z: Interval,
    pub inertia_i: Interval,
}

impl Default for SearchBox {
    fn default() -> Self {
        let iv = |min, max| Interval { min, max };
        Self { m2: iv(0.1, 20.0), m3: iv(0.1, 20.0), s3z: iv(-1.0, 1.0), inertia_i: iv(0.1, 20.0) }
    }
}

impl SearchBox {
    pub fn bounds(&self) -> Result<Bounds> {
        let all = [self.m2, self.m3, self.s3z, self.inertia_i];
        Bounds::new(all.iter().map(|i| i.min).collect(), all.iter().map(|i| i.max).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub position: Vec<f64>,
    pub velocity: Vec<f64>,
    pub best_position: Vec<f64>,
    pub best_cost: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Swarm {
    pub particles: Vec<Particle>,
    pub best_position: Vec<f64>,
    pub best_cost: f64,
}

impl Swarm {
    /// Positions uniform in the box, velocities zero.
    pub fn initialize<F, R>(population: usize, bounds: &Bounds, cost: &mut F, rng: &mut R) -> Self
    where
        F: FnMut(&[f64]) -> f64,
        R: UnitSource,
    {
        let particles: Vec<Particle> = (0..population)
            .map(|_| {
                let position: Vec<f64> = bounds
                    .lower
                    .iter()
                    .zip(&bounds.upper)
                    .map(|(l, u)| l + (u - l) * rng.next_unit())
                    .collect();
                let c = cost(&position);
                Particle {
                    velocity: vec![0.0; position.len()],
                    best_position: position.clone(),
                    position,
                    best_cost: c,
                }
            })
            .collect();
        let mut swarm = Self { best_position: particles[0].position.clone(), best_cost: f64::INFINITY, particles };
        swarm.update_global_best();
        swarm
    }

    fn update_global_best(&mut self) {
        for p in &self.particles {
            if p.best_cost < self.best_cost {
                self.best_cost = p.best_cost;
                self.best_position = p.best_position.clone();
            }
        }
    }
}

/// One velocity/position update:
/// `v ← w·v + c1·r1·(p_best − x) + c2·r2·(g_best − x)`, `x ← x + v`.
/// Each velocity component is capped at the box width; a coordinate pushed
/// out of the box is clamped onto the boundary and its velocity zeroed.
#[allow(clippy::too_many_arguments)]
pub fn move_particle(
    particle: &mut Particle,
    global_best: &[f64],
    inertia: f64,
    c1: f64,
    c2: f64,
    r1: &[f64],
    r2: &[f64],
    bounds: &Bounds,
) {
    for d in 0..particle.position.len() {
        let x = particle.position[d];
        let width = bounds.upper[d] - bounds.lower[d];
        let v = inertia * particle.velocity[d]
            + c1 * r1[d] * (particle.best_position[d] - x)
            + c2 * r2[d] * (global_best[d] - x);
        let v = v.clamp(-width, width);
        let mut next = x + v;
        let mut v_next = v;
        if next < bounds.lower[d] {
            next = bounds.lower[d];
            v_next = 0.0;
        } else if next > bounds.upper[d] {
            next = bounds.upper[d];
            v_next = 0.0;
        }
        particle.position[d] = next;
        particle.velocity[d] = v_next;
    }
}

/// Advances the swarm by one synchronous iteration (1-based `iteration`).
///
/// Random numbers are drawn in particle order before any cost is
/// evaluated; every particle moves relative to the global best of the
/// previous iteration. Bests are replaced on strict improvement only.
pub fn pso_step<F, R>(swarm: &mut Swarm, iteration: usize, cfg: &PsoConfig, bounds: &Bounds, cost: &mut F, rng: &mut R)
where
    F: FnMut(&[f64]) -> f64,
    R: UnitSource,
{
    let w = cfg.inertia(iteration);
    let dim = bounds.dim();
    let global = swarm.best_position.clone();
    let mut r1 = vec![0.0; dim];
    let mut r2 = vec![0.0; dim];
    for p in &mut swarm.particles {
        if cfg.per_dimension_random {
            r1.iter_mut().for_each(|r| *r = rng.next_unit());
            r2.iter_mut().for_each(|r| *r = rng.next_unit());
        } else {
            r1.fill(rng.next_unit());
            r2.fill(rng.next_unit());
        }
        move_particle(p, &global, w, cfg.c1, cfg.c2, &r1, &r2, bounds);
    }
    for p in &mut swarm.particles {
        let c = cost(&p.position);
        if c < p.best_cost {
            p.best_cost = c;
            p.best_position = p.position.clone();
        }
    }
    swarm.update_global_best();
}

/// Runs `cfg.iterations` steps; returns the final swarm and the global best
/// cost after initialization and after each iteration.
pub fn run_swarm<F>(cfg: &PsoConfig, bounds: &Bounds, cost: &mut F, seed: u64) -> (Swarm, Vec<f64>)
where
    F: FnMut(&[f64]) -> f64,
{
    let mut rng = SeededRng::new(seed);
    let mut swarm = Swarm::initialize(cfg.population, bounds, cost, &mut rng);
    let mut trace = Vec::with_capacity(cfg.iterations + 1);
    trace.push(swarm.best_cost);
    for i in 1..=cfg.iterations {
        pso_step(&mut swarm, i, cfg, bounds, cost, &mut rng);
        trace.push(swarm.best_cost);
    }
    (swarm, trace)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwarmRunResult {
    pub best_position: RobotParams,
    pub best_cost: f64,
    pub trace: Vec<f64>,
    pub seed: u64,
}

pub fn pso_run(
    id: CostId,
    set: &SampleSet,
    g: GravityConstant,
    cfg: &PsoConfig,
    search: &SearchBox,
    seed: u64,
) -> Result<SwarmRunResult> {
    cfg.validate()?;
    let bounds = search.bounds()?;
    let f = CostFunction::new(id, set, g)?;
    let mut eval = |x: &[f64]| f.eval(&RobotParams::from_array([x[0], x[1], x[2], x[3]]));
    let (swarm, trace) = run_swarm(cfg, &bounds, &mut eval, seed);
    let b = &swarm.best_position;
    Ok(SwarmRunResult {
        best_position: RobotParams::from_array([b[0], b[1], b[2], b[3]]),
        best_cost: swarm.best_cost,
        trace,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::collect_samples;

    struct Ones;

    impl UnitSource for Ones {
        fn next_unit(&mut self) -> f64 {
            1.0
        }
    }

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| (v - 0.3) * (v - 0.3)).sum()
    }

    #[test]
    fn inertia_ramp() {
        let cfg = PsoConfig::default();
        assert_eq!(cfg.inertia(1), 0.9);
        assert!((cfg.inertia(100) - 0.4).abs() < 1e-15);
        assert!((cfg.inertia(50) - (0.9 - 49.0 * 0.5 / 99.0)).abs() < 1e-15);
        assert!((cfg.inertia(50) - 0.6525).abs() < 1e-4);
        for i in 101..=300 {
            assert_eq!(cfg.inertia(i), 0.4);
        }
    }

    #[test]
    fn config_validation() {
        assert!(PsoConfig::default().validate().is_ok());
        assert!(PsoConfig { population: 1, ..Default::default() }.validate().is_err());
        assert!(PsoConfig { iterations: 0, ..Default::default() }.validate().is_ok());
        assert!(PsoConfig { c1: 0.0, ..Default::default() }.validate().is_err());
        assert!(Bounds::new(vec![1.0], vec![1.0]).is_err());
    }

    #[test]
    fn hand_update() {
        let bounds = Bounds::new(vec![-100.0], vec![100.0]).unwrap();
        let mut p = Particle { position: vec![0.0], velocity: vec![1.0], best_position: vec![2.0], best_cost: 0.0 };
        move_particle(&mut p, &[3.0], 0.5, 1.3, 1.3, &[1.0], &[1.0], &bounds);
        assert!((p.velocity[0] - 7.0).abs() < 1e-12);
        assert!((p.position[0] - 7.0).abs() < 1e-12);

        let tight = Bounds::new(vec![-5.0], vec![5.0]).unwrap();
        let mut p = Particle { position: vec![0.0], velocity: vec![1.0], best_position: vec![2.0], best_cost: 0.0 };
        move_particle(&mut p, &[3.0], 0.5, 1.3, 1.3, &[1.0], &[1.0], &tight);
        assert_eq!(p.position[0], 5.0);
        assert_eq!(p.velocity[0], 0.0);
    }

    #[test]
    fn fixed_point() {
        let bounds = Bounds::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap();
        let mut swarm = Swarm {
            particles: vec![Particle {
                position: vec![0.2, 0.1],
                velocity: vec![0.0, 0.0],
                best_position: vec![0.2, 0.1],
                best_cost: sphere(&[0.2, 0.1]),
            }],
            best_position: vec![0.2, 0.1],
            best_cost: sphere(&[0.2, 0.1]),
        };
        let mut f = |x: &[f64]| sphere(x);
        pso_step(&mut swarm, 1, &PsoConfig::default(), &bounds, &mut f, &mut Ones);
        assert_eq!(swarm.particles[0].position, vec![0.2, 0.1]);
        assert_eq!(swarm.particles[0].velocity, vec![0.0, 0.0]);
    }

    #[test]
    fn positions_stay_in_box_and_trace_monotone() {
        let bounds = Bounds::new(vec![-1.0, 2.0, -3.0], vec![0.5, 4.0, 3.0]).unwrap();
        let mut outside = 0usize;
        let mut evals = 0usize;
        let cfg = PsoConfig::default();
        let mut f = |x: &[f64]| {
            evals += 1;
            if !bounds.contains(x) {
                outside += 1;
            }
            x.iter().map(|v| v.sin() * 3.0 + v * v).sum::<f64>()
        };
        let (_, trace) = run_swarm(&cfg, &bounds, &mut f, 4);
        assert_eq!(outside, 0);
        assert_eq!(evals, cfg.population * (cfg.iterations + 1));
        assert_eq!(trace.len(), cfg.iterations + 1);
        assert!(trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn zero_iterations_is_best_of_initial_population() {
        let cfg = PsoConfig { iterations: 0, inertia_ramp_iters: 0, ..Default::default() };
        let bounds = Bounds::new(vec![-1.0; 2], vec![1.0; 2]).unwrap();
        let mut f = |x: &[f64]| sphere(x);
        let (swarm, trace) = run_swarm(&cfg, &bounds, &mut f, 2);
        let best = swarm.particles.iter().map(|p| p.best_cost).fold(f64::INFINITY, f64::min);
        assert_eq!(swarm.best_cost, best);
        assert_eq!(trace, vec![best]);
    }

    #[test]
    fn run_is_deterministic_and_improves() {
        let set = collect_samples(&RobotParams::REFERENCE, GravityConstant::STANDARD, 10).unwrap();
        let id = CostId::new(9).unwrap();
        let cfg = PsoConfig::default();
        let a = pso_run(id, &set, GravityConstant::STANDARD, &cfg, &SearchBox::default(), 17).unwrap();
        let b = pso_run(id, &set, GravityConstant::STANDARD, &cfg, &SearchBox::default(), 17).unwrap();
        assert_eq!(a, b);
        assert!(a.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(a.best_cost < 1e-3 * a.trace[0], "{:?}", a.trace.last());
        let f = CostFunction::new(id, &set, GravityConstant::STANDARD).unwrap();
        assert_eq!(f.eval(&a.best_position), a.best_cost);
    }

    #[test]
    fn zero_iteration_run_through_public_entry() {
        let set = collect_samples(&RobotParams::REFERENCE, GravityConstant::STANDARD, 10).unwrap();
        let cfg = PsoConfig { iterations: 0, ..Default::default() };
        let r = pso_run(CostId::new(1).unwrap(), &set, GravityConstant::STANDARD, &cfg, &SearchBox::default(), 3)
            .unwrap();
        assert_eq!(r.trace, vec![r.best_cost]);
        assert!(SearchBox::default().bounds().unwrap().contains(&r.best_position.to_array()));
    }
}
