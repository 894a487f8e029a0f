//! Pointwise certificates that the second integral commutes with the Hamiltonian.
//!
//! Moving every position function to the left of the momenta, the commutator
//! takes the form `[C, H] = A_x p_x + A_y p_y + A_0`. The three coefficient
//! functions are evaluated here term by term, so their vanishing is a numerical
//! observation rather than an assumption. The classical Poisson bracket and a
//! truncated Fock-space commutator give two further, independent routes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{ensure, Result};
use crate::fock::{build_c_operator, build_hamiltonian, FockBasis};
use crate::model::{potential_jet, Coupling, PhasePoint};
use crate::scalar::Real;

/// Coefficients of `p_x`, `p_y` and the identity in `[C, H]`.
///
/// `a_x` and `a_y` carry an overall factor `-i` in the operator expansion;
/// the factor is stripped so all three are real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientTriple<T> {
    pub a_x: T,
    pub a_y: T,
    pub a_0: T,
}

impl<T: Real> CoefficientTriple<T> {
    pub fn max_abs(&self) -> T {
        self.a_x.abs().max(self.a_y.abs()).max(self.a_0.abs())
    }
}

pub fn coefficient_triple<T: Real>(x: T, y: T, coupling: Coupling<T>) -> CoefficientTriple<T> {
    let jet = potential_jet(x, y, coupling);
    let (two, three) = (T::lit(2.0), T::lit(3.0));
    let radial = T::one() + x * x + y * y;
    let xy = x * y;

    let a_x = radial * jet.dv_dx + two * xy * jet.dv_dy + two * x * jet.v;
    let a_y = radial * jet.dv_dy + two * xy * jet.dv_dx + two * y * jet.v;
    let a_0 = -two * jet.v - three * x * jet.dv_dx - three * y * jet.dv_dy
        - radial / two * (jet.d2v_dxx + jet.d2v_dyy)
        - two * xy * jet.d2v_dxy;

    CoefficientTriple { a_x, a_y, a_0 }
}

/// Gradient of a phase-space function in `(x, p_x, y, p_y)` order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseGradient<T> {
    pub dx: T,
    pub dpx: T,
    pub dy: T,
    pub dpy: T,
}

pub fn hamiltonian_gradient<T: Real>(point: &PhasePoint<T>, coupling: Coupling<T>) -> PhaseGradient<T> {
    let jet = potential_jet(point.x, point.y, coupling);
    PhaseGradient {
        dx: point.x + jet.dv_dx,
        dpx: point.px,
        dy: -point.y + jet.dv_dy,
        dpy: -point.py,
    }
}

pub fn conserved_gradient<T: Real>(point: &PhasePoint<T>, coupling: Coupling<T>) -> PhaseGradient<T> {
    let PhasePoint { x, px, y, py } = *point;
    let jet = potential_jet(x, y, coupling);
    let two = T::lit(2.0);
    let k = py * x + px * y;
    let shape = x * x - y * y - T::one();
    PhaseGradient {
        dx: two * k * py + two * x - two * x * jet.v - shape * jet.dv_dx,
        dpx: two * k * y + two * px,
        dy: two * k * px + two * y * jet.v - shape * jet.dv_dy,
        dpy: two * k * x,
    }
}

/// `{A, B} = sum_i dA/dq_i dB/dp_i - dA/dp_i dB/dq_i`
pub fn poisson_bracket<T: Real>(a: &PhaseGradient<T>, b: &PhaseGradient<T>) -> T {
    a.dx * b.dpx - a.dpx * b.dx + a.dy * b.dpy - a.dpy * b.dy
}

/// `{C, H}` at one phase point.
pub fn poisson_bracket_ch<T: Real>(point: &PhasePoint<T>, coupling: Coupling<T>) -> T {
    poisson_bracket(&conserved_gradient(point, coupling), &hamiltonian_gradient(point, coupling))
}

/// Largest residuals seen over a random sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSweep<T> {
    pub samples: usize,
    pub max_a_x: T,
    pub max_a_y: T,
    pub max_a_0: T,
    pub worst_point: (T, T),
}

impl<T: Real> CoefficientSweep<T> {
    pub fn max_abs(&self) -> T {
        self.max_a_x.max(self.max_a_y).max(self.max_a_0)
    }
}

const SWEEP_CHUNK: usize = 4096;

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

fn chunk_sizes(samples: usize) -> impl IndexedParallelIterator<Item = (usize, usize)> {
    let chunks = samples.div_ceil(SWEEP_CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(move |c| (c, SWEEP_CHUNK.min(samples - c * SWEEP_CHUNK)))
}

/// Evaluates the coefficient triple at `samples` uniform points in
/// `[-extent, extent]^2`. The result depends only on `seed`, not on the
/// number of worker threads.
pub fn coefficient_sweep<T: Real>(
    samples: usize,
    extent: T,
    coupling: Coupling<T>,
    seed: u64,
) -> Result<CoefficientSweep<T>> {
    ensure(samples > 0, || "sweep needs at least one sample".into())?;
    ensure(extent > T::zero(), || format!("sweep extent must be positive, got {extent}"))?;
    let ext = extent.as_f64();
    let partials: Vec<CoefficientSweep<T>> = chunk_sizes(samples)
        .map(|(chunk, n)| {
            let mut rng = chunk_rng(seed, chunk);
            let mut acc = CoefficientSweep {
                samples: n,
                max_a_x: T::zero(),
                max_a_y: T::zero(),
                max_a_0: T::zero(),
                worst_point: (T::zero(), T::zero()),
            };
            let mut worst = T::neg_infinity();
            for _ in 0..n {
                let x = T::lit(rng.random_range(-ext..ext));
                let y = T::lit(rng.random_range(-ext..ext));
                let t = coefficient_triple(x, y, coupling);
                acc.max_a_x = acc.max_a_x.max(t.a_x.abs());
                acc.max_a_y = acc.max_a_y.max(t.a_y.abs());
                acc.max_a_0 = acc.max_a_0.max(t.a_0.abs());
                if t.max_abs() > worst {
                    worst = t.max_abs();
                    acc.worst_point = (x, y);
                }
            }
            acc
        })
        .collect();

    let mut total = partials[0];
    total.samples = 0;
    let mut worst = T::neg_infinity();
    for p in &partials {
        total.samples += p.samples;
        total.max_a_x = total.max_a_x.max(p.max_a_x);
        total.max_a_y = total.max_a_y.max(p.max_a_y);
        total.max_a_0 = total.max_a_0.max(p.max_a_0);
        if p.max_abs() > worst {
            worst = p.max_abs();
            total.worst_point = p.worst_point;
        }
    }
    Ok(total)
}

/// Largest `|{C, H}|` over a random sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketSweep<T> {
    pub samples: usize,
    pub max_abs: T,
    pub worst_point: PhasePoint<T>,
}

/// Evaluates `{C, H}` at `samples` uniform points of `[-extent, extent]^4`.
pub fn poisson_sweep<T: Real>(
    samples: usize,
    extent: T,
    coupling: Coupling<T>,
    seed: u64,
) -> Result<BracketSweep<T>> {
    ensure(samples > 0, || "sweep needs at least one sample".into())?;
    ensure(extent > T::zero(), || format!("sweep extent must be positive, got {extent}"))?;
    let ext = extent.as_f64();
    let partials: Vec<BracketSweep<T>> = chunk_sizes(samples)
        .map(|(chunk, n)| {
            let mut rng = chunk_rng(seed, chunk);
            let mut best = BracketSweep {
                samples: n,
                max_abs: T::zero(),
                worst_point: PhasePoint::origin(),
            };
            for _ in 0..n {
                let mut draw = || T::lit(rng.random_range(-ext..ext));
                let p = PhasePoint::new(draw(), draw(), draw(), draw());
                let r = poisson_bracket_ch(&p, coupling).abs();
                if r > best.max_abs {
                    best.max_abs = r;
                    best.worst_point = p;
                }
            }
            best
        })
        .collect();

    let samples_total = partials.iter().map(|p| p.samples).sum();
    let mut out = partials
        .into_iter()
        .fold(None::<BracketSweep<T>>, |acc, p| match acc {
            Some(a) if a.max_abs >= p.max_abs => Some(a),
            _ => Some(p),
        })
        .expect("at least one chunk");
    out.samples = samples_total;
    Ok(out)
}

/// Interior residual of `CH - HC` in the truncated Fock basis.
///
/// Both operators are assembled in the product Hermite basis with
/// `n_x, n_y <= n_max`; the returned value is the largest entry of the
/// commutator restricted to `n_x, n_y <= n_max - interior_margin`.
pub fn fock_commutator_residual<T: Real>(
    n_max: usize,
    coupling: Coupling<T>,
    interior_margin: usize,
    quad_order: usize,
) -> Result<T> {
    ensure(n_max >= interior_margin + 2, || {
        format!("interior margin {interior_margin} leaves no interior states for n_max = {n_max}")
    })?;
    let basis = FockBasis::new(n_max);
    let h = build_hamiltonian(&basis, coupling, quad_order)?;
    let c = build_c_operator(&basis, coupling, quad_order)?;
    let ch = c.entries().dot(h.entries());
    let hc = h.entries().dot(c.entries());

    let cutoff = n_max - interior_margin;
    let interior: Vec<usize> = (0..basis.size())
        .filter(|&k| {
            let (nx, ny) = basis.quantum_numbers(k);
            nx <= cutoff && ny <= cutoff
        })
        .collect();
    let residual = interior
        .par_iter()
        .map(|&i| {
            interior
                .iter()
                .map(|&j| (ch[[i, j]] - hc[[i, j]]).abs())
                .fold(T::zero(), T::max)
        })
        .reduce(T::zero, T::max);
    Ok(residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lam(v: f64) -> Coupling<f64> {
        Coupling::new(v).unwrap()
    }

    #[test]
    fn triple_vanishes_at_reference_point() {
        let c = lam(1.0 / 3.0);
        let t = coefficient_triple(0.3, 0.7, c);
        assert!(t.max_abs() < 1e-12 * c.magnitude(), "{t:?}");
    }

    #[test]
    fn momentum_coefficients_exact_zero_at_origin() {
        for l in [1.0 / 3.0, -0.8, 2.5] {
            let t = coefficient_triple(0.0, 0.0, lam(l));
            assert_eq!(t.a_x, 0.0);
            assert_eq!(t.a_y, 0.0);
        }
    }

    #[test]
    fn sweep_over_all_couplings() {
        for l in [1.0 / 3.0, -1.0 / 3.0, 0.8, -0.8] {
            let c = lam(l);
            let s = coefficient_sweep(100_000, 10.0, c, 7).unwrap();
            assert_eq!(s.samples, 100_000);
            assert!(s.max_abs() < 1e-10 * c.magnitude(), "lambda {l}: {s:?}");
        }
    }

    #[test]
    fn sweep_is_deterministic() {
        let a = coefficient_sweep(10_000, 10.0, lam(0.8), 3).unwrap();
        let b = coefficient_sweep(10_000, 10.0, lam(0.8), 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn residuals_scale_linearly_with_coupling() {
        // The terms are linear in V and its derivatives, so the floating-point
        // residual doubles exactly when lambda doubles (a power-of-two scale).
        for &(x, y) in &[(0.3, 0.7), (-2.2, 1.9), (5.0, -0.1)] {
            let a = coefficient_triple(x, y, lam(1.0 / 3.0));
            let b = coefficient_triple(x, y, lam(2.0 / 3.0));
            for (u, v) in [(a.a_x, b.a_x), (a.a_y, b.a_y), (a.a_0, b.a_0)] {
                assert!((2.0 * u - v).abs() <= 1e-12 * v.abs().max(f64::MIN_POSITIVE));
            }
        }
    }

    #[test]
    fn bracket_at_origin_and_reference() {
        assert_eq!(poisson_bracket_ch(&PhasePoint::origin(), lam(1.0 / 3.0)), 0.0);
        let p = PhasePoint::new(1.2, -0.5, 0.8, 0.3);
        assert!(poisson_bracket_ch(&p, lam(1.0 / 3.0)).abs() < 1e-11);
    }

    #[test]
    fn bracket_sweep_and_antisymmetry() {
        let c = lam(-0.8);
        let s = poisson_sweep(10_000, 5.0, c, 1).unwrap();
        assert!(s.max_abs < 1e-10, "{s:?}");
        let p = s.worst_point;
        let ch = poisson_bracket(&conserved_gradient(&p, c), &hamiltonian_gradient(&p, c));
        let hc = poisson_bracket(&hamiltonian_gradient(&p, c), &conserved_gradient(&p, c));
        assert_eq!(ch, -hc);
        assert!(hc.abs() < 1e-10);
    }

    #[test]
    fn gradients_match_finite_differences() {
        use crate::model::classical_observables;
        let c = lam(1.0 / 3.0);
        let p = PhasePoint::new(0.4, -0.9, 1.3, 0.25);
        let h = 1e-6;
        let fd = |f: &dyn Fn(&PhasePoint<f64>) -> f64| {
            let bump = |i: usize, s: f64| {
                let mut q = p;
                match i {
                    0 => q.x += s,
                    1 => q.px += s,
                    2 => q.y += s,
                    _ => q.py += s,
                }
                f(&q)
            };
            [0, 1, 2, 3].map(|i| (bump(i, h) - bump(i, -h)) / (2.0 * h))
        };
        let gh = hamiltonian_gradient(&p, c);
        let gc = conserved_gradient(&p, c);
        let fh = fd(&|q| classical_observables(q, c).h);
        let fc = fd(&|q| classical_observables(q, c).c);
        for (a, b) in [gh.dx, gh.dpx, gh.dy, gh.dpy].iter().zip(fh) {
            assert!((a - b).abs() < 1e-8);
        }
        for (a, b) in [gc.dx, gc.dpx, gc.dy, gc.dpy].iter().zip(fc) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn fock_residual_rejects_oversized_margin() {
        assert!(fock_commutator_residual(5, lam(0.3), 4, 40).is_err());
    }

    #[test]
    fn fock_residual_free_theory_is_exact() {
        let r = fock_commutator_residual(21, Coupling::<f64>::free(), 4, 96).unwrap();
        assert_eq!(r, 0.0);
    }
}
