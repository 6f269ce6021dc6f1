//! Currents of bidegree (1,1) in a disk chart and their transport under
//! the branched cover `y -> y^m`.

use super::pairing::{circle_mean, PairingGrid, Shape};
use super::test_function::TestFunction;
use crate::error::{Error, Result};
use crate::point::Point;
use num_complex::Complex64;
use std::sync::Arc;

pub type FieldFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Atom {
    Point { z: Complex64, mass: f64 },
    /// Mass spread uniformly over `|z| = radius`.
    Circle { radius: f64, mass: f64 },
}

impl Atom {
    pub fn mass(&self) -> f64 {
        match *self {
            Atom::Point { mass, .. } | Atom::Circle { mass, .. } => mass,
        }
    }

    fn radius(&self) -> f64 {
        match *self {
            Atom::Point { z, .. } => z.norm(),
            Atom::Circle { radius, .. } => radius,
        }
    }

    pub fn pair(&self, f: &TestFunction) -> f64 {
        match *self {
            Atom::Point { z, mass } => mass * f.value(z),
            Atom::Circle { radius, mass } => mass * circle_mean(f, radius),
        }
    }
}

/// Potential of a current: `T = dd^c v` on the chart.
#[derive(Clone)]
pub struct ChartPotential {
    pub eval: FieldFn,
    pub shape: Shape,
    pub poles: Vec<Complex64>,
    pub kinks: Vec<f64>,
}

/// A current represented by a density (w.r.t. `dA`) plus atoms, optionally
/// together with a potential. When both are present they must agree.
#[derive(Clone)]
pub struct CurrentSample {
    pub density: Option<FieldFn>,
    /// Circles where the density may jump.
    pub density_kinks: Vec<f64>,
    /// Grading exponent needed by the density near the origin.
    pub density_grading: u32,
    pub atoms: Vec<Atom>,
    pub potential: Option<ChartPotential>,
    /// Radius of a disk containing the support.
    pub support: f64,
}

impl std::fmt::Debug for CurrentSample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CurrentSample")
            .field("has_density", &self.density.is_some())
            .field("atoms", &self.atoms)
            .field("has_potential", &self.potential.is_some())
            .field("support", &self.support)
            .finish()
    }
}

impl CurrentSample {
    pub fn from_density(density: FieldFn, support: f64) -> Self {
        CurrentSample {
            density: Some(density),
            density_kinks: Vec::new(),
            density_grading: 2,
            atoms: Vec::new(),
            potential: None,
            support,
        }
    }

    pub fn from_atoms(atoms: Vec<Atom>) -> Self {
        let support = atoms.iter().map(Atom::radius).fold(0.0, f64::max);
        CurrentSample {
            density: None,
            density_kinks: Vec::new(),
            density_grading: 2,
            atoms,
            potential: None,
            support,
        }
    }

    pub fn with_atoms(mut self, atoms: Vec<Atom>) -> Self {
        self.support = atoms.iter().map(Atom::radius).fold(self.support, f64::max);
        self.atoms.extend(atoms);
        self
    }

    pub fn with_potential(mut self, potential: ChartPotential) -> Self {
        self.potential = Some(potential);
        self
    }

    pub fn atom_mass(&self) -> f64 {
        self.atoms.iter().map(Atom::mass).sum()
    }

    /// `<T, f>` from the density and the atoms.
    pub fn pair(&self, f: &TestFunction) -> Result<f64> {
        let mut s: f64 = self.atoms.iter().map(|a| a.pair(f)).sum();
        if let Some(rho) = &self.density {
            let grid = PairingGrid::graded(f, &self.density_kinks, self.density_grading)?;
            s += grid.integrate_density(&|p| rho(p))?;
        }
        Ok(s)
    }

    /// `<T, f>` through the potential, `int v (1/2pi) Laplacian(f)`.
    pub fn pair_via_potential(&self, f: &TestFunction) -> Result<Option<f64>> {
        let Some(pot) = &self.potential else {
            return Ok(None);
        };
        let eval = |p: &Point| (pot.eval)(p);
        let v = super::pairing::Potential {
            eval: &eval,
            shape: pot.shape,
            poles: pot.poles.clone(),
            kinks: pot.kinks.clone(),
        };
        Ok(Some(super::pairing::ddc_pair(&v, f)?))
    }

    /// Total mass of the density over the support disk.
    pub fn density_mass(&self) -> Result<f64> {
        let Some(rho) = &self.density else {
            return Ok(0.0);
        };
        let cap = TestFunction::cap(self.support * 1.001, self.support * 0.5);
        let grid = PairingGrid::graded(&cap, &self.density_kinks, self.density_grading)?;
        grid.integrate_density(&|p| rho(p))
    }
}

/// The cover `y -> y^m` of the disk `|x| < chart_radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchedCover {
    pub m: u32,
    pub chart_radius: f64,
}

impl BranchedCover {
    pub fn new(m: u32) -> Self {
        BranchedCover {
            m,
            chart_radius: f64::INFINITY,
        }
    }

    pub fn with_chart_radius(mut self, r: f64) -> Self {
        self.chart_radius = r;
        self
    }

    fn upstairs_radius(&self) -> f64 {
        self.chart_radius.powf(1.0 / f64::from(self.m))
    }

    /// `pi^* T`: potentials `v -> v o pi`, densities times `|pi'|^2`, atoms
    /// through their fibers.
    pub fn pullback(&self, t: &CurrentSample) -> Result<CurrentSample> {
        if t.support >= self.chart_radius {
            return Err(Error::UnsupportedSupport {
                support: t.support,
                chart: self.chart_radius,
            });
        }
        let m = self.m;
        let mf = f64::from(m);
        let k = 1.0 / mf;
        let density = t.density.clone().map(|rho| -> FieldFn {
            Arc::new(move |y: &Point| {
                let jac = if m == 1 { 1.0 } else { mf * mf * (2.0 * (mf - 1.0) * y.log_r).exp() };
                rho(&y.power(m)) * jac
            })
        });
        let mut atoms = Vec::new();
        for a in &t.atoms {
            match *a {
                Atom::Point { z, mass } if z == Complex64::new(0.0, 0.0) => {
                    atoms.push(Atom::Point { z, mass: mf * mass })
                }
                Atom::Point { z, mass } => {
                    let x = Point::from_complex(z);
                    for j in 0..m {
                        atoms.push(Atom::Point {
                            z: x.root(m, j).to_complex(),
                            mass,
                        });
                    }
                }
                Atom::Circle { radius, mass } => atoms.push(Atom::Circle {
                    radius: radius.powf(k),
                    mass: mf * mass,
                }),
            }
        }
        let potential = t.potential.clone().map(|pot| {
            let ev = pot.eval.clone();
            let mut poles = Vec::new();
            for w in &pot.poles {
                let x = Point::from_complex(*w);
                if x.is_origin() {
                    poles.push(*w);
                } else {
                    poles.extend((0..m).map(|j| x.root(m, j).to_complex()));
                }
            }
            ChartPotential {
                eval: Arc::new(move |y: &Point| ev(&y.power(m))),
                shape: pot.shape,
                poles,
                kinks: pot.kinks.iter().map(|r| r.powf(k)).collect(),
            }
        });
        Ok(CurrentSample {
            density,
            density_kinks: t.density_kinks.iter().map(|r| r.powf(k)).collect(),
            density_grading: t.density_grading,
            atoms,
            potential,
            support: t.support.powf(k),
        })
    }

    /// `pi_* T~`: fiber sums of potentials and densities (the latter divided
    /// by `|pi'|^2`), atoms mapped pointwise.
    pub fn pushforward(&self, t: &CurrentSample) -> Result<CurrentSample> {
        let up = self.upstairs_radius();
        if t.support >= up {
            return Err(Error::UnsupportedSupport {
                support: t.support,
                chart: up,
            });
        }
        let m = self.m;
        let mf = f64::from(m);
        let density = t.density.clone().map(|rho| -> FieldFn {
            Arc::new(move |x: &Point| {
                (0..m)
                    .map(|j| {
                        let y = x.root(m, j);
                        let jac = if m == 1 { 1.0 } else { mf * mf * (2.0 * (mf - 1.0) * y.log_r).exp() };
                        rho(&y) / jac
                    })
                    .sum()
            })
        });
        let atoms = t
            .atoms
            .iter()
            .map(|a| match *a {
                Atom::Point { z, mass } => Atom::Point { z: z.powu(m), mass },
                Atom::Circle { radius, mass } => Atom::Circle {
                    radius: radius.powi(m as i32),
                    mass,
                },
            })
            .collect();
        let potential = t.potential.clone().map(|pot| {
            let ev = pot.eval.clone();
            ChartPotential {
                eval: Arc::new(move |x: &Point| (0..m).map(|j| ev(&x.root(m, j))).sum()),
                shape: pot.shape,
                poles: pot.poles.iter().map(|w| w.powu(m)).collect(),
                kinks: pot.kinks.iter().map(|r| r.powi(m as i32)).collect(),
            }
        });
        Ok(CurrentSample {
            density,
            density_kinks: t.density_kinks.iter().map(|r| r.powi(m as i32)).collect(),
            density_grading: t.density_grading.max(m),
            atoms,
            potential,
            support: t.support.powi(m as i32),
        })
    }

    /// Orbifold lift `G(T) = pi^* T` of a downstairs current.
    pub fn lift(&self, t: &CurrentSample) -> Result<CurrentSample> {
        self.pullback(t)
    }

    /// Orbifold projection `F(T~) = (1/m) pi_* T~`, inverse of [`Self::lift`].
    pub fn project(&self, t: &CurrentSample) -> Result<CurrentSample> {
        let pushed = self.pushforward(t)?;
        Ok(scale(&pushed, 1.0 / f64::from(self.m)))
    }
}

/// Fixed test current for the transport checks: a modulated Gaussian
/// density with point and circle atoms.
pub fn reference_sample() -> CurrentSample {
    let a = Complex64::new(0.4, 0.3);
    let rho: FieldFn = Arc::new(move |p: &Point| {
        let d2 = (p.to_complex() - a).norm_sqr();
        (-d2 / 0.08).exp() * (1.0 + 0.5 * p.theta.cos())
    });
    CurrentSample::from_density(rho, a.norm() + 8.1 * 0.2).with_atoms(vec![
        Atom::Point {
            z: Complex64::new(0.3, -0.2),
            mass: 0.7,
        },
        Atom::Point {
            z: Complex64::new(0.0, 0.0),
            mass: 0.25,
        },
        Atom::Circle { radius: 0.6, mass: 1.5 },
    ])
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CalculusRow {
    pub m: u32,
    pub function: String,
    /// `|<pi_* pi^* T, f> - m <T, f>|`
    pub push_pull: f64,
    /// `|<F(G(T)), f> - <T, f>|`
    pub replay: f64,
}

pub fn calculus_check(m: u32, t: &CurrentSample, f: &TestFunction) -> Result<CalculusRow> {
    let cov = BranchedCover::new(m);
    let base = t.pair(f)?;
    let back = cov.pushforward(&cov.pullback(t)?)?.pair(f)?;
    let again = cov.project(&cov.lift(t)?)?.pair(f)?;
    Ok(CalculusRow {
        m,
        function: f.label(),
        push_pull: (back - f64::from(m) * base).abs(),
        replay: (again - base).abs(),
    })
}

/// `c T` for a real constant `c`.
pub fn scale(t: &CurrentSample, c: f64) -> CurrentSample {
    let density = t.density.clone().map(|rho| -> FieldFn { Arc::new(move |p: &Point| c * rho(p)) });
    let potential = t.potential.clone().map(|pot| {
        let ev = pot.eval.clone();
        ChartPotential {
            eval: Arc::new(move |p: &Point| c * ev(p)),
            ..pot
        }
    });
    CurrentSample {
        density,
        density_kinks: t.density_kinks.clone(),
        density_grading: t.density_grading,
        atoms: t
            .atoms
            .iter()
            .map(|a| match *a {
                Atom::Point { z, mass } => Atom::Point { z, mass: c * mass },
                Atom::Circle { radius, mass } => Atom::Circle { radius, mass: c * mass },
            })
            .collect(),
        potential,
        support: t.support,
    }
}
