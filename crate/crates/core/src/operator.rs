//! Discrete nonlocal operator on a uniform grid.
//!
//! Row `i` of the operator reads
//! `(Lu)_i = Σ_j a(t,x_i,x_j) w_{j-i} (u_j − u_i) + ∫_{far} a (g − u_i) μ(x_i, dy)`,
//! where `w_k = μ(0, cell(k))` is the exact mass of the grid cell at offset
//! `k`, `far` is everything outside the union of the box cells and `g` is the
//! exterior data. The diagonal cell is represented by a correction of the
//! nearest neighbours along each axis which makes the scheme exact on
//! quadratics restricted to the stencil.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Coefficient, Field};
use crate::grid::Grid;
use crate::linalg::CsrMatrix;
use crate::measure::{MeasureSpec, Point, SetDescriptor};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct DiscreteOperator<T: Scalar> {
    spec: MeasureSpec<T>,
    grid: Grid<T>,
    coefficient: Coefficient<T>,
    reach: i64,
    /// Corrected weights over the dense offset window `[-reach, reach]^d`.
    weights: Vec<T>,
    /// Exact cell masses over the same window.
    raw: Vec<T>,
    /// Nonzero offsets, both signs, with their weights.
    stencil: Vec<([i64; 2], T)>,
    ring: [T; 2],
    /// `μ(x_i, far)` per interior node.
    tail_mass: Vec<T>,
    far: SetDescriptor<T>,
    quadrature_error: T,
}

struct CellData<T> {
    mass: T,
    moment: [T; 2],
    error: T,
}

fn cell<T: Scalar>(k: [i64; 2], h: T) -> SetDescriptor<T> {
    let half = T::lit(0.5);
    let c = [T::lit(k[0] as f64), T::lit(k[1] as f64)];
    SetDescriptor::Cell {
        lo: [(c[0] - half) * h, (c[1] - half) * h],
        hi: [(c[0] + half) * h, (c[1] + half) * h],
    }
}

impl<T: Scalar> DiscreteOperator<T> {
    pub fn assemble(spec: &MeasureSpec<T>, grid: &Grid<T>) -> Result<Self> {
        if spec.dim() != grid.dim() {
            return Err(Error::RejectedInput(format!(
                "measure dimension {} differs from grid dimension {}",
                spec.dim(),
                grid.dim()
            )));
        }
        let d = grid.dim();
        let h = grid.h();
        let reach = 2 * grid.half_width() as i64;
        let origin = [T::zero(), T::zero()];

        // canonical offsets: p ≥ q ≥ 0 (reflections and the coordinate swap are symmetries of every kind)
        let canon: Vec<[i64; 2]> = if d == 1 {
            (1..=reach).map(|p| [p, 0]).collect()
        } else {
            (1..=reach)
                .flat_map(|p| (0..=p).map(move |q| [p, q]))
                .collect()
        };
        let data: Vec<CellData<T>> = canon
            .par_iter()
            .map(|&k| {
                let set = cell(k, h);
                let wrap = |e: Error| Error::Assembly {
                    offset: k[..d].to_vec(),
                    source: Box::new(e),
                };
                let m = spec.measure_of_set(&origin[..d], &set).map_err(wrap)?;
                let mut moment = [T::zero(); 2];
                let mut error = m.error;
                for (a, slot) in moment.iter_mut().enumerate().take(d) {
                    let e = spec
                        .axis_second_moment(&origin[..d], &set, a)
                        .map_err(wrap)?;
                    *slot = e.value;
                    error = error + e.error;
                }
                Ok(CellData {
                    mass: m.value,
                    moment,
                    error,
                })
            })
            .collect::<Result<_>>()?;

        let width = (2 * reach + 1) as usize;
        let size = width.pow(d as u32);
        let mut raw = vec![T::zero(); size];
        let mut weights = vec![T::zero(); size];
        let index = |k: [i64; 2]| -> usize {
            let i0 = (k[0] + reach) as usize;
            if d == 1 {
                i0
            } else {
                i0 + width * (k[1] + reach) as usize
            }
        };
        let mut quadrature_error = T::zero();
        let mut mismatch = [T::zero(); 2];
        let signs: &[(i64, i64)] = if d == 1 {
            &[(1, 1), (-1, 1)]
        } else {
            &[(1, 1), (-1, 1), (1, -1), (-1, -1)]
        };
        for (c, cd) in canon.iter().zip(&data) {
            let mut seen: Vec<[i64; 2]> = Vec::with_capacity(8);
            let swaps: &[bool] = if d == 2 { &[false, true] } else { &[false] };
            for &swap in swaps {
                let (base, mom) = if swap {
                    ([c[1], c[0]], [cd.moment[1], cd.moment[0]])
                } else {
                    (*c, cd.moment)
                };
                for &(s0, s1) in signs {
                    let k = [base[0] * s0, base[1] * s1];
                    if seen.contains(&k) {
                        continue;
                    }
                    seen.push(k);
                    let idx = index(k);
                    raw[idx] = cd.mass;
                    weights[idx] = cd.mass;
                    quadrature_error = quadrature_error + cd.error;
                    for a in 0..d {
                        let z = T::lit(k[a] as f64) * h;
                        mismatch[a] = mismatch[a] + (mom[a] - cd.mass * z * z);
                    }
                }
            }
        }

        // diagonal cell through the nearest-neighbour second difference
        let mut ring = [T::zero(); 2];
        let diag = cell([0, 0], h);
        for a in 0..d {
            let m = spec
                .axis_second_moment(&origin[..d], &diag, a)
                .map_err(|e| Error::Assembly {
                    offset: vec![0; d],
                    source: Box::new(e),
                })?;
            quadrature_error = quadrature_error + m.error;
            ring[a] = (m.value + mismatch[a]) / (T::lit(2.0) * h * h);
            for s in [-1i64, 1] {
                let mut k = [0i64; 2];
                k[a] = s;
                let idx = index(k);
                weights[idx] = weights[idx] + ring[a];
                if !(weights[idx] > T::zero()) {
                    // the scheme would lose its sign structure
                    return Err(Error::Degenerate(format!(
                        "nearest-neighbour weight {} on axis {a} is not positive",
                        weights[idx]
                    )));
                }
            }
        }

        let mut stencil = Vec::new();
        let r1 = if d == 2 { reach } else { 0 };
        for k1 in -r1..=r1 {
            for k0 in -reach..=reach {
                let w = weights[index([k0, k1])];
                if w > T::zero() {
                    stencil.push(([k0, k1], w));
                }
            }
        }

        let edge = grid.box_radius() + h * T::lit(0.5);
        let far = SetDescriptor::BoxComplement {
            lo: [-edge, -edge],
            hi: [edge, edge],
        };
        let tails: Vec<(T, T)> = grid
            .interior()
            .par_iter()
            .map(|&i| {
                let x = grid.coord(i);
                spec.measure_of_set(&x[..d], &far)
                    .map(|e| (e.value, e.error))
                    .map_err(|e| Error::Assembly {
                        offset: grid.multi(i)[..d].to_vec(),
                        source: Box::new(e),
                    })
            })
            .collect::<Result<_>>()?;
        let tail_mass = tails.iter().map(|t| t.0).collect();
        quadrature_error = quadrature_error + tails.iter().map(|t| t.1).sum::<T>();

        Ok(Self {
            spec: spec.clone(),
            grid: grid.clone(),
            coefficient: Coefficient::default(),
            reach,
            weights,
            raw,
            stencil,
            ring,
            tail_mass,
            far,
            quadrature_error,
        })
    }

    pub fn with_coefficient(mut self, a: Coefficient<T>) -> Self {
        self.coefficient = a;
        self
    }

    pub fn spec(&self) -> &MeasureSpec<T> {
        &self.spec
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn coefficient(&self) -> &Coefficient<T> {
        &self.coefficient
    }

    /// Accumulated quadrature error bound over all cells and tails.
    pub fn quadrature_error(&self) -> T {
        self.quadrature_error
    }

    fn offset_index(&self, k: [i64; 2]) -> Option<usize> {
        let r = self.reach;
        if k[0].abs() > r || k[1].abs() > r {
            return None;
        }
        let width = (2 * r + 1) as usize;
        let i0 = (k[0] + r) as usize;
        Some(if self.grid.dim() == 1 {
            if k[1] != 0 {
                return None;
            }
            i0
        } else {
            i0 + width * (k[1] + r) as usize
        })
    }

    /// Weight of the offset `k` including the nearest-neighbour correction.
    pub fn weight(&self, k: [i64; 2]) -> T {
        self.offset_index(k).map_or(T::zero(), |i| self.weights[i])
    }

    /// Exact cell mass `μ(0, cell(k))`.
    pub fn cell_mass(&self, k: [i64; 2]) -> T {
        self.offset_index(k).map_or(T::zero(), |i| self.raw[i])
    }

    pub fn ring_correction(&self) -> [T; 2] {
        self.ring
    }

    /// Offsets with nonzero weight (both signs).
    pub fn stencil(&self) -> &[([i64; 2], T)] {
        &self.stencil
    }

    /// Mass of the region outside the box seen from interior node `slot`.
    pub fn tail_mass(&self, slot: usize) -> T {
        self.tail_mass[slot]
    }

    /// The region outside the union of all box cells.
    pub fn far_field(&self) -> &SetDescriptor<T> {
        &self.far
    }

    /// Neighbours `(j, w_{j-i})` of node `i` inside the box.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let base = self.grid.multi(i);
        self.stencil.iter().filter_map(move |&(k, w)| {
            self.grid
                .index_of([base[0] + k[0], base[1] + k[1]])
                .map(|j| (j, w))
        })
    }

    #[inline]
    fn coef(&self, t: T, x: Point<T>, y: Point<T>) -> T {
        self.coefficient.value(t, x, y)
    }

    /// `(∫_far a μ, ∫_far a g μ)` for interior node `slot` at time `t`.
    pub fn tail_terms(&self, slot: usize, t: T, g: &Field<T>) -> Result<(T, T)> {
        let i = self.grid.interior()[slot];
        let x = self.grid.coord(i);
        let d = self.grid.dim();
        let edge = self.grid.box_radius() + self.grid.h() * T::lit(0.5);
        let mass = self.tail_mass[slot];
        match self.coefficient.as_constant() {
            Some(c) => {
                let gpart = if g.reach().is_some_and(|r| r <= edge) {
                    T::zero()
                } else if let Some(v) = g.as_constant() {
                    v * mass
                } else {
                    self.spec
                        .integrate_against(&x[..d], &self.far, |y| g.value(t, y), g.reach())?
                        .value
                };
                Ok((c * mass, c * gpart))
            }
            None => {
                let a = &self.coefficient;
                let ma = self
                    .spec
                    .integrate_against(&x[..d], &self.far, |y| a.value(t, x, y), None)?
                    .value;
                let ga = if g.reach().is_some_and(|r| r <= edge) {
                    T::zero()
                } else {
                    self.spec
                        .integrate_against(
                            &x[..d],
                            &self.far,
                            |y| a.value(t, x, y) * g.value(t, y),
                            g.reach(),
                        )?
                        .value
                };
                Ok((ma, ga))
            }
        }
    }

    /// Tail terms for every interior node.
    pub fn tails(&self, t: T, g: &Field<T>) -> Result<Vec<(T, T)>> {
        (0..self.grid.interior().len())
            .into_par_iter()
            .map(|s| self.tail_terms(s, t, g))
            .collect()
    }

    /// `(Lu)_i` on interior nodes; `u` holds values on every box node.
    pub fn apply(&self, u: &[T], g: &Field<T>, t: T) -> Result<Vec<T>> {
        self.check_len(u)?;
        let tails = self.tails(t, g)?;
        Ok(self.apply_with_tails(u, &tails, t))
    }

    pub(crate) fn apply_with_tails(&self, u: &[T], tails: &[(T, T)], t: T) -> Vec<T> {
        let grid = &self.grid;
        grid.interior()
            .par_iter()
            .zip(tails.par_iter())
            .map(|(&i, &(mass, gpart))| {
                let x = grid.coord(i);
                let ui = u[i];
                let mut acc = T::zero();
                for (j, w) in self.neighbors(i) {
                    acc = acc + self.coef(t, x, grid.coord(j)) * w * (u[j] - ui);
                }
                acc + gpart - ui * mass
            })
            .collect()
    }

    fn check_len(&self, u: &[T]) -> Result<()> {
        if u.len() != self.grid.len() {
            return Err(Error::RejectedInput(format!(
                "grid function has {} values, grid has {} nodes",
                u.len(),
                self.grid.len()
            )));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::RejectedInput(
                "grid function has non-finite values".into(),
            ));
        }
        Ok(())
    }

    /// Matrix `K` of `-L` on the interior unknowns at time `t`.
    pub fn system(&self, t: T) -> Result<CsrMatrix<T>> {
        let grid = &self.grid;
        let tails = self.tails(t, &Field::zero())?;
        let rows: Vec<Vec<(usize, T)>> = grid
            .interior()
            .par_iter()
            .zip(tails.par_iter())
            .enumerate()
            .map(|(s, (&i, &(mass, _)))| {
                let x = grid.coord(i);
                let mut row = vec![(s, T::zero())];
                let mut diag = mass;
                for (j, w) in self.neighbors(i) {
                    let v = self.coef(t, x, grid.coord(j)) * w;
                    diag = diag + v;
                    if let Some(sj) = grid.interior_slot(j) {
                        row.push((sj, -v));
                    }
                }
                row[0].1 = diag;
                row
            })
            .collect();
        Ok(CsrMatrix::from_rows(rows))
    }

    /// Exterior forcing `e` with `Lu = -K u_int + e`, where box nodes outside
    /// the domain take the values of `g`.
    pub fn forcing(&self, t: T, g: &Field<T>) -> Result<Vec<T>> {
        let tails = self.tails(t, g)?;
        Ok(self.forcing_with_tails(t, g, &tails))
    }

    pub(crate) fn forcing_with_tails(&self, t: T, g: &Field<T>, tails: &[(T, T)]) -> Vec<T> {
        let grid = &self.grid;
        grid.interior()
            .par_iter()
            .zip(tails.par_iter())
            .map(|(&i, &(_, gpart))| {
                let x = grid.coord(i);
                let mut acc = gpart;
                for (j, w) in self.neighbors(i) {
                    if !grid.is_interior(j) {
                        let y = grid.coord(j);
                        acc = acc + self.coef(t, x, y) * w * g.value(t, y);
                    }
                }
                acc
            })
            .collect()
    }

    /// `E_t(u, v)`: pairs with at least one interior node counted once, plus
    /// the far field, all times `h^d`. Outside the box `u = gu`, `v = gv`.
    pub fn bilinear_form(&self, u: &[T], v: &[T], t: T, gu: &Field<T>, gv: &Field<T>) -> Result<T> {
        self.check_len(u)?;
        self.check_len(v)?;
        let grid = &self.grid;
        let d = grid.dim();
        let edge = grid.box_radius() + grid.h() * T::lit(0.5);
        let vanishes = |g: &Field<T>| g.reach().is_some_and(|r| r <= edge);
        let support: Vec<usize> = (0..v.len()).filter(|&i| v[i] != T::zero()).collect();
        if vanishes(gv) && support.iter().all(|&i| grid.is_interior(i)) {
            return self.bilinear_form_local(u, v, &support, t, gu);
        }
        let per_node: Vec<T> = grid
            .interior()
            .par_iter()
            .enumerate()
            .map(|(s, &i)| -> Result<T> {
                let x = grid.coord(i);
                let mut acc = T::zero();
                for (j, w) in self.neighbors(i) {
                    if grid.is_interior(j) && j < i {
                        continue;
                    }
                    acc = acc + self.coef(t, x, grid.coord(j)) * w * (u[j] - u[i]) * (v[j] - v[i]);
                }
                let (ui, vi) = (u[i], v[i]);
                let tail = if vanishes(gv) {
                    let (mass, gpart) = self.tail_terms(s, t, gu)?;
                    vi * (ui * mass - gpart)
                } else if vanishes(gu) {
                    let (mass, gpart) = self.tail_terms(s, t, gv)?;
                    ui * (vi * mass - gpart)
                } else {
                    self.spec
                        .integrate_against(
                            &x[..d],
                            &self.far,
                            |y| self.coef(t, x, y) * (ui - gu.value(t, y)) * (vi - gv.value(t, y)),
                            None,
                        )?
                        .value
                };
                Ok(acc + tail)
            })
            .collect::<Result<_>>()?;
        Ok(per_node.into_iter().sum::<T>() * grid.cell_volume())
    }

    /// `E_t(u, v)` for `v` vanishing outside the interior nodes `support`:
    /// only pairs touching the support contribute.
    fn bilinear_form_local(
        &self,
        u: &[T],
        v: &[T],
        support: &[usize],
        t: T,
        gu: &Field<T>,
    ) -> Result<T> {
        let grid = &self.grid;
        let per_node: Vec<T> = support
            .par_iter()
            .map(|&i| -> Result<T> {
                let x = grid.coord(i);
                let mut acc = T::zero();
                for (j, w) in self.neighbors(i) {
                    if v[j] != T::zero() && j < i {
                        continue;
                    }
                    acc = acc + self.coef(t, x, grid.coord(j)) * w * (u[j] - u[i]) * (v[j] - v[i]);
                }
                let slot = grid.interior_slot(i).expect("support lies in the interior");
                let (mass, gpart) = self.tail_terms(slot, t, gu)?;
                Ok(acc + v[i] * (u[i] * mass - gpart))
            })
            .collect::<Result<_>>()?;
        Ok(per_node.into_iter().sum::<T>() * grid.cell_volume())
    }

    /// `⟨u, v⟩ = Σ_i u_i v_i h^d` over interior nodes, `u`, `v` given on the box.
    pub fn inner(&self, u: &[T], v: &[T]) -> T {
        self.grid.interior().iter().map(|&i| u[i] * v[i]).sum::<T>() * self.grid.cell_volume()
    }
}
