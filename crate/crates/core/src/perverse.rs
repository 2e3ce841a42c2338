//! Analysis of a full package: the perverse filtration computed from the
//! weight filtration of `L`, hard Lefschetz for the graded pieces, the
//! (eta, L)-decomposition with its forms and positivity, the subspace
//! Lambda, the defect of semismallness, and the fiber-level checks
//! (refined intersection form, contractibility, signature, splitting).
//!
//! The perverse filtration is defined here, not supplied: degree by degree,
//! `H^{n+j}_{<=b} = W^L_{b-j} meet H^{n+j}`. All graded objects carry
//! explicit section bases so every check is a finite matrix computation.

use std::collections::BTreeMap;

use crate::double::{relative_weight_check, DoubleSystem};
use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::graded::{
    check_infinitesimal_automorphism, commutator_check, twisted_form, GradedOperator,
    GradedSpace, PoincarePairing, TwistedForm,
};
use crate::matrix::Matrix;
use crate::report::Report;
use crate::scalar::Scalar;
use crate::subspace::{image, kernel, QuotientMap, Subspace};
use crate::weight::{nilpotency_index, weight_filtration, WeightFiltration};
use crate::weil::{polarization_check, restrict_endomorphism, WeilOperator};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefectEntry {
    /// Fiber dimension `i` of the stratum `Y^i`.
    pub fiber_dim: usize,
    /// Dimension of `Y^i`.
    pub dim_yi: usize,
}

/// Class-map, restriction-map and homology-filtration data for one fiber.
#[derive(Clone, Debug)]
pub struct FiberRecord<T> {
    pub label: String,
    /// Half-codimension of the stratum, for the semismall signature rule.
    pub codim_h: Option<usize>,
    /// `b -> cl_b`, an `dims[n+b] x hdim_b` matrix.
    pub class_maps: BTreeMap<i64, Matrix<T>>,
    /// `b -> res_b`, an `fdim_b x dims[n+b]` matrix.
    pub restriction_maps: BTreeMap<i64, Matrix<T>>,
    /// `b ->` increasing chain on the fiber homology coordinates.
    pub homology_filtration: BTreeMap<i64, Filtration<T>>,
}

impl<T: Scalar> FiberRecord<T> {
    pub fn levels(&self) -> impl Iterator<Item = i64> + '_ {
        self.class_maps.keys().copied()
    }
}

/// `(class map, restriction map, homology chain, degree)` for one level.
type FiberData<'f, T> = (&'f Matrix<T>, &'f Matrix<T>, &'f Filtration<T>, usize);

#[derive(Clone, Debug)]
pub struct PerversePackage<T> {
    pub name: String,
    pub space: GradedSpace,
    pub eta: GradedOperator<T>,
    pub l_op: GradedOperator<T>,
    pub pairing: PoincarePairing<T>,
    pub form: TwistedForm<T>,
    pub weil: Option<WeilOperator<T>>,
    pub defect_table: Option<Vec<DefectEntry>>,
    pub fibers: Vec<FiberRecord<T>>,
}

impl<T: Scalar> PerversePackage<T> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        space: GradedSpace,
        eta: GradedOperator<T>,
        l_op: GradedOperator<T>,
        pairing: PoincarePairing<T>,
        weil: Option<WeilOperator<T>>,
        defect_table: Option<Vec<DefectEntry>>,
        fibers: Vec<FiberRecord<T>>,
    ) -> Result<Self> {
        let form = twisted_form(&pairing)?;
        Ok(PerversePackage {
            name: name.into(),
            space,
            eta,
            l_op,
            pairing,
            form,
            weil,
            defect_table,
            fibers,
        })
    }

    pub fn half_dim(&self) -> usize {
        self.space.half_dim()
    }

    pub fn betti(&self) -> Vec<usize> {
        self.space.dims().to_vec()
    }

    /// Structural and hypothesis-level validation: nilpotency, commutation,
    /// both operators infinitesimal automorphisms of the twisted form, Weil
    /// block conditions, and the relative weight hypothesis.
    pub fn validate(&self) -> Report {
        let mut report = Report::new("package");
        let n = self.half_dim();
        let eta = self.eta.total();
        let l = self.l_op.total();

        match nilpotency_index(&eta) {
            Ok(k) if k <= n + 1 => report.pass(format!("eta nilpotent (index {k})")),
            Ok(k) => report.fail(
                "eta nilpotency bound",
                format!("eta^{k} = 0 but eta^{} != 0", n + 1),
            ),
            Err(_) => report.fail("eta nilpotent", "eta is not nilpotent"),
        }
        match nilpotency_index(&l) {
            Ok(k) if k <= n + 1 => report.pass(format!("L nilpotent (index {k})")),
            Ok(k) => report.fail(
                "L nilpotency bound",
                format!("L^{k} = 0 but L^{} != 0", n + 1),
            ),
            Err(_) => report.fail("L nilpotent", "L is not nilpotent"),
        }
        report.outcome("eta L commute", commutator_check(&eta, &l));
        report.outcome(
            "eta infinitesimal automorphism of S",
            check_infinitesimal_automorphism(&self.form, &eta),
        );
        report.outcome(
            "L infinitesimal automorphism of S",
            check_infinitesimal_automorphism(&self.form, &l),
        );
        if let Some(weil) = &self.weil {
            report.outcome(
                "Weil operator blocks",
                weil.check(&[("eta", eta.clone()), ("L", l.clone())]),
            );
        }
        if report.passed() {
            match relative_weight_check(&eta, &l) {
                Ok(outcome) => report.outcome("relative weight filtration hypothesis", outcome),
                Err(e) => report.fail("relative weight filtration hypothesis", e.to_string()),
            }
        }
        report
    }
}

/// Biprimitive dimension table keyed by the pair `(i, j)`.
pub type BiprimitiveDims = BTreeMap<(i64, i64), usize>;

/// The perverse filtration, stored per degree in degree-local coordinates.
#[derive(Clone, Debug)]
pub struct PerverseFiltration<T> {
    pub space: GradedSpace,
    chains: Vec<Filtration<T>>,
}

impl<T: Scalar> PerverseFiltration<T> {
    pub fn chain(&self, degree: usize) -> &Filtration<T> {
        &self.chains[degree]
    }

    /// Graded dimensions, keyed by `(degree, perversity)`.
    pub fn graded_dims(&self) -> BTreeMap<(usize, i64), usize> {
        let mut out = BTreeMap::new();
        for l in self.space.degrees() {
            if self.space.dim(l) == 0 {
                continue;
            }
            let chain = &self.chains[l];
            for b in chain.support() {
                let d = chain.graded_dim(b);
                if d > 0 {
                    out.insert((l, b), d);
                }
            }
        }
        out
    }

    /// Section/projection of the graded piece `H^l_b` in degree-local
    /// coordinates.
    pub fn piece(&self, degree: usize, b: i64) -> Result<QuotientMap<T>> {
        let chain = &self.chains[degree];
        chain.step(b).quotient_map(&chain.step(b - 1))
    }
}

/// Everything the individual checks share: the weight filtration of `L`,
/// the perverse filtration, and the double system for `(eta, L)`.
pub struct Analysis<T> {
    pub package: PerversePackage<T>,
    pub eta_total: Matrix<T>,
    pub l_total: Matrix<T>,
    pub wl: WeightFiltration<T>,
    pub perverse: PerverseFiltration<T>,
    pub sys: DoubleSystem<T>,
}

impl<T: Scalar> Analysis<T> {
    pub fn new(package: PerversePackage<T>) -> Result<Self> {
        let eta_total = package.eta.total();
        let l_total = package.l_op.total();
        let wl = weight_filtration(&l_total).map_err(|e| match e {
            Error::NotNilpotent => Error::InvalidPackage("L is not nilpotent".into()),
            other => other,
        })?;
        let perverse = compute_perverse_filtration(&package.space, &wl)?;
        let sys = DoubleSystem::new(
            eta_total.clone(),
            l_total.clone(),
            package.form.gram.clone(),
        )?;
        Ok(Analysis {
            package,
            eta_total,
            l_total,
            wl,
            perverse,
            sys,
        })
    }

    fn n(&self) -> i64 {
        self.package.half_dim() as i64
    }

    /// Block of `op` mapping the degree-`from` coordinates to degree-`to`.
    fn degree_block(&self, op: &Matrix<T>, from: usize, to: usize) -> Matrix<T> {
        let space = &self.package.space;
        space
            .projection::<T>(to)
            .checked_mul(op)
            .and_then(|m| m.checked_mul(&space.inclusion::<T>(from)))
            .expect("degree blocks have consistent shapes")
    }

    /// Lifts a degree-local subspace into the ambient total space.
    fn lift_local(&self, degree: usize, local: &Subspace<T>) -> Subspace<T> {
        let incl = self.package.space.inclusion::<T>(degree);
        Subspace::span(&(&incl * local.basis()))
    }

    // ------------------------------------------------------------------
    // filtration
    // ------------------------------------------------------------------

    /// Perverse filtration report: graded dimensions, the consistency of
    /// the degree decomposition of `W^L`, the dimension symmetry and the
    /// kernel bound `Ker L^k meet H^{n+j} <= H^{n+j}_{<= k-1+j}`.
    pub fn filtration_report(&self) -> Report {
        let mut report = Report::new("filtration");
        let space = &self.package.space;
        let n = self.n();

        // W^L_i = (+)_l (W^L_i meet H^l): dimensions must add up
        let mut decomposes = true;
        for i in self.wl.filtration.support() {
            let total = self.wl.filtration.step(i).dim();
            let sum: usize = space
                .degrees()
                .map(|l| self.perverse.chain(l).step(i + l as i64 - n).dim())
                .sum();
            if sum != total {
                report.fail(
                    "W^L decomposes by degree",
                    format!("at level {i}: degree pieces sum to {sum}, W^L has dimension {total}"),
                );
                decomposes = false;
                break;
            }
        }
        if decomposes {
            report.pass("W^L decomposes by degree");
        }

        let dims = self.perverse.graded_dims();
        let mut symmetric = true;
        for (&(l, b), &d) in &dims {
            let dual_deg = 2 * n - l as i64;
            let dual_dim = if dual_deg < 0 {
                0
            } else {
                dims.get(&(dual_deg as usize, -b)).copied().unwrap_or(0)
            };
            if dual_dim != d {
                report.fail(
                    "graded dimension symmetry",
                    format!("dim H^{l}_{b} = {d} but dim H^{dual_deg}_{} = {dual_dim}", -b),
                );
                symmetric = false;
                break;
            }
        }
        if symmetric {
            report.pass("graded dimension symmetry dim H^(n+j)_b = dim H^(n-j)_(-b)");
        }

        // Ker L^k meet H^{n+j} <= H^{n+j}_{<= k-1+j}
        let mut kernel_bound = true;
        'outer: for k in 1..=(self.package.half_dim() + 1) {
            let ker = kernel(&self.l_total.pow(k));
            for l in space.degrees() {
                if space.dim(l) == 0 {
                    continue;
                }
                let local = match ker.meet(&space.degree_subspace(l)) {
                    Ok(m) => m,
                    Err(_) => continue,
                };
                if local.is_zero() {
                    continue;
                }
                let j = l as i64 - n;
                let bound = self.lift_local(l, &self.perverse.chain(l).step(k as i64 - 1 + j));
                if !bound.contains(&local) {
                    report.fail(
                        "kernel perversity bound",
                        format!(
                            "Ker L^{k} meet H^{l} exceeds H^{l}_(<= {})",
                            k as i64 - 1 + j
                        ),
                    );
                    kernel_bound = false;
                    break 'outer;
                }
            }
        }
        if kernel_bound {
            report.pass("kernel perversity bound Ker L^k meet H^(n+j) <= H^(n+j)_(<= k-1+j)");
        }

        let table: Vec<String> = dims
            .iter()
            .map(|(&(l, b), &d)| format!("H^{l}_{b}: {d}"))
            .collect();
        report.info("perverse graded dimensions", table.join(", "));
        report
    }

    // ------------------------------------------------------------------
    // filtered cup products
    // ------------------------------------------------------------------

    pub fn filtered_cup_report(&self) -> Report {
        let mut report = Report::new("filtered-cup");
        let space = &self.package.space;
        let mut eta_ok = true;
        let mut l_ok = true;
        let mut strict_ok = true;
        for l in space.degrees() {
            if l + 2 > space.top_degree() || space.dim(l) == 0 {
                continue;
            }
            let chain = self.perverse.chain(l);
            let target = self.perverse.chain(l + 2);
            let eta_block = self.degree_block(&self.eta_total, l, l + 2);
            let l_block = self.degree_block(&self.l_total, l, l + 2);
            let full_image = image(&l_block.checked_mul(chain.top().basis()).unwrap());
            for a in chain.support() {
                let step = chain.step(a);
                let eta_image = Subspace::span(&(&eta_block * step.basis()));
                if !target.step(a + 2).contains(&eta_image) {
                    report.fail(
                        "eta filtered",
                        format!("eta H^{l}_(<={a}) exceeds H^{}_(<={})", l + 2, a + 2),
                    );
                    eta_ok = false;
                }
                let l_image = Subspace::span(&(&l_block * step.basis()));
                if !target.step(a).contains(&l_image) {
                    report.fail(
                        "L filtered",
                        format!("L H^{l}_(<={a}) exceeds H^{}_(<={a})", l + 2),
                    );
                    l_ok = false;
                }
                // strictness: L(H^l_{<=a}) = L(H^l) meet H^{l+2}_{<=a}
                let expected = match full_image.meet(&target.step(a)) {
                    Ok(m) => m,
                    Err(_) => continue,
                };
                if l_image != expected {
                    report.fail(
                        "L strict",
                        format!(
                            "L H^{l}_(<={a}) has dimension {}, L(H^{l}) meet H^{}_(<={a}) has dimension {}",
                            l_image.dim(),
                            l + 2,
                            expected.dim()
                        ),
                    );
                    strict_ok = false;
                }
            }
        }
        if eta_ok {
            report.pass("eta H^l_(<=a) <= H^(l+2)_(<=a+2)");
        }
        if l_ok {
            report.pass("L H^l_(<=a) <= H^(l+2)_(<=a)");
        }
        if strict_ok {
            report.pass("L is strict for the perverse filtration");
        }
        report
    }

    // ------------------------------------------------------------------
    // hard Lefschetz for the graded pieces
    // ------------------------------------------------------------------

    pub fn hard_lefschetz_report(&self) -> Report {
        let mut report = Report::new("hard-lefschetz");
        let space = &self.package.space;
        let n = self.n();
        let dims = self.perverse.graded_dims();
        let mut eta_count = 0usize;
        let mut l_count = 0usize;
        let mut failed = false;

        let check_map = |label: String,
                         op: &Matrix<T>,
                         k: usize,
                         from: (usize, i64),
                         to: (usize, i64),
                         report: &mut Report|
         -> bool {
            let source = self.perverse.piece(from.0, from.1);
            let target = self.perverse.piece(to.0, to.1);
            let (source, target) = match (source, target) {
                (Ok(s), Ok(t)) => (s, t),
                _ => return false,
            };
            let block = self.degree_block(&op.pow(k), from.0, to.0);
            let induced = &(&target.projection * &block) * &source.section;
            let ok = induced.rows() == induced.cols() && induced.rank() == induced.rows();
            if !ok {
                report.fail(
                    label,
                    format!(
                        "induced map is {}x{} of rank {}",
                        induced.rows(),
                        induced.cols(),
                        induced.rank()
                    ),
                );
            }
            ok
        };

        for k in 0..=(self.package.half_dim() + 1) {
            // eta^k : H^j_{-k} ~ H^{j+2k}_k
            for l in space.degrees() {
                let from = (l, -(k as i64));
                let to_deg = l + 2 * k;
                let d_from = dims.get(&from).copied().unwrap_or(0);
                if to_deg > space.top_degree() {
                    if d_from > 0 {
                        report.fail(
                            format!("eta^{k}: H^{l}_{} target out of range", -(k as i64)),
                            "source is nonzero but the target degree does not exist",
                        );
                        failed = true;
                    }
                    continue;
                }
                let to = (to_deg, k as i64);
                let d_to = dims.get(&to).copied().unwrap_or(0);
                if d_from == 0 && d_to == 0 {
                    continue;
                }
                let label = format!("eta^{k}: H^{}_{} ~ H^{}_{}", from.0, from.1, to.0, to.1);
                if check_map(label, &self.eta_total, k, from, to, &mut report) {
                    eta_count += 1;
                } else {
                    failed = true;
                }
            }
            // L^k : H^{n+b-k}_b ~ H^{n+b+k}_b, sources enumerated over all
            // occupied (degree, b) with degree = n + b - k
            for l in space.degrees() {
                let to_deg = l + 2 * k;
                if to_deg > space.top_degree() {
                    continue;
                }
                let b = l as i64 + k as i64 - n;
                let d_from = dims.get(&(l, b)).copied().unwrap_or(0);
                let d_to = dims.get(&(to_deg, b)).copied().unwrap_or(0);
                if d_from == 0 && d_to == 0 {
                    continue;
                }
                let label = format!("L^{k}: H^{l}_{b} ~ H^{to_deg}_{b}");
                if check_map(label, &self.l_total, k, (l, b), (to_deg, b), &mut report) {
                    l_count += 1;
                } else {
                    failed = true;
                }
            }
        }
        if !failed {
            report.pass(format!(
                "all graded maps are isomorphisms ({eta_count} eta-family, {l_count} L-family)"
            ));
        }
        report
    }

    // ------------------------------------------------------------------
    // (eta, L)-decomposition
    // ------------------------------------------------------------------

    /// Whether the weight filtration of eta is the filtration by degree;
    /// this is what justifies labelling the double graded pieces by
    /// cohomological degree and perversity.
    pub fn eta_weights_are_degrees(&self) -> bool {
        let space = &self.package.space;
        let n = self.n();
        let dim = space.total_dim();
        let mut steps = Vec::new();
        for i in -n..=n {
            let mut cols = Matrix::zeros(dim, 0);
            for l in space.degrees() {
                if l as i64 >= n - i {
                    cols = cols.hstack(&space.inclusion::<T>(l));
                }
            }
            steps.push(Subspace::span(&cols));
        }
        match Filtration::new(dim, -n, steps) {
            Ok(by_degree) => self.sys.wm.filtration.same_filtration(&by_degree),
            Err(_) => false,
        }
    }

    /// Biprimitive dimension table keyed by `(i, j)`, plus the report on
    /// directness and labelling. The piece at `(i, j)` is `H^{n-i-j}_{-i}`
    /// when the degree labelling applies.
    pub fn decomposition_report(&self) -> Result<(Report, BiprimitiveDims)> {
        let mut report = Report::new("eta-L-decomposition");
        let biprims = self.sys.biprimitive_table()?;
        let dims: BiprimitiveDims = biprims.iter().map(|(&k, v)| (k, v.dim())).collect();

        let mut direct = true;
        let mut total = 0usize;
        for (i, j) in self.sys.piece_keys().collect::<Vec<_>>() {
            match self.sys.summands(&biprims, i, j) {
                Ok(list) => {
                    total += list.iter().map(|s| s.subspace.dim()).sum::<usize>();
                }
                Err(e) => {
                    report.fail(format!("decomposition of piece ({i},{j})"), e.to_string());
                    direct = false;
                }
            }
        }
        if direct {
            report.pass("double Lefschetz decomposition is direct on every piece");
            if total != self.package.space.total_dim() {
                report.fail(
                    "summand dimensions",
                    format!(
                        "summands cover {total} of {} dimensions",
                        self.package.space.total_dim()
                    ),
                );
            } else {
                report.pass("summand dimensions add up to the Betti numbers");
            }
        }

        report.outcome("relative graded isomorphisms", self.sys.morwf_check());

        if self.eta_weights_are_degrees() {
            let perverse_dims = self.perverse.graded_dims();
            let n = self.n();
            let mut consistent = true;
            for (i, j) in self.sys.piece_keys().collect::<Vec<_>>() {
                let degree = n - i - j;
                let b = -i;
                let expected = if degree < 0 {
                    0
                } else {
                    perverse_dims
                        .get(&(degree as usize, b))
                        .copied()
                        .unwrap_or(0)
                };
                if self.sys.piece_dim(i, j) != expected {
                    report.fail(
                        "degree labels",
                        format!(
                            "piece ({i},{j}) has dimension {} but H^{degree}_{b} has dimension {expected}",
                            self.sys.piece_dim(i, j)
                        ),
                    );
                    consistent = false;
                }
            }
            if consistent {
                report.pass(
                    "pieces match the perverse graded dimensions under (i,j) -> H^(n-i-j)_(-i)",
                );
            }
        } else {
            report.info(
                "degree labels",
                "eta weight filtration differs from the degree filtration; (i,j) pieces are not labelled by cohomological degree",
            );
        }

        let table: Vec<String> = dims
            .iter()
            .map(|(&(i, j), &d)| format!("P^{}_{}: {d}", -j, -i))
            .collect();
        report.info("biprimitive dimensions", table.join(", "));
        Ok((report, dims))
    }

    // ------------------------------------------------------------------
    // forms and positivity
    // ------------------------------------------------------------------

    /// Gram matrix of `S^{eta L}_{ij}` on the piece at `(i, j)`.
    pub fn s_eta_l_form(&self, i: i64, j: i64) -> Result<Matrix<T>> {
        self.sys.double_form(i, j)
    }

    /// Orthogonality of the decomposition plus polarization (or, without
    /// Weil data, nondegeneracy) of every summand.
    pub fn hrr_report(&self) -> Result<Report> {
        let mut report = Report::new("hodge-riemann");
        let biprims = self.sys.biprimitive_table()?;
        report.outcome(
            "decomposition orthogonality and form nondegeneracy",
            self.sys.orthogonality_check(&biprims)?,
        );

        let weil = self.package.weil.as_ref().map(WeilOperator::total);
        if weil.is_none() {
            report.info(
                "polarization",
                "no Weil operator supplied; positivity degraded to nondegeneracy of every restricted form",
            );
        }
        let n = self.n();
        let mut all_ok = true;
        let mut count = 0usize;
        for (i, j) in self.sys.piece_keys().collect::<Vec<_>>() {
            let form = self.sys.double_form(i, j)?;
            let piece = self.sys.piece(i, j);
            for summand in self.sys.summands(&biprims, i, j)? {
                let basis = summand.subspace.basis();
                let restricted = &(&basis.transpose() * &form) * basis;
                match &weil {
                    Some(c_total) => {
                        let c_piece = &(&piece.projection * c_total) * &piece.section;
                        let c_restricted =
                            match restrict_endomorphism(&c_piece, &summand.subspace) {
                                Ok(c) => c,
                                Err(_) => {
                                    report.fail(
                                        format!(
                                            "Weil stability of summand eta^{} L^{} P^{}_{} in ({i},{j})",
                                            summand.m_power,
                                            summand.n_power,
                                            -summand.prim_n,
                                            -summand.prim_rel
                                        ),
                                        "summand is not stable under the induced Weil operator",
                                    );
                                    all_ok = false;
                                    continue;
                                }
                            };
                        let sign = summand.polarization_sign(n);
                        match polarization_check(&restricted, &c_restricted, sign)? {
                            crate::graded::CheckOutcome::Pass => count += 1,
                            crate::graded::CheckOutcome::Fail { witness } => {
                                report.fail(
                                    format!(
                                        "polarization of eta^{} L^{} P^{}_{} in piece ({i},{j}) with sign {sign}",
                                        summand.m_power,
                                        summand.n_power,
                                        -summand.prim_n,
                                        -summand.prim_rel
                                    ),
                                    witness,
                                );
                                all_ok = false;
                            }
                        }
                    }
                    None => {
                        if restricted.rank() != summand.subspace.dim() {
                            report.fail(
                                format!(
                                    "nondegeneracy of S on summand eta^{} L^{} P^{}_{} in ({i},{j})",
                                    summand.m_power,
                                    summand.n_power,
                                    -summand.prim_n,
                                    -summand.prim_rel
                                ),
                                "restricted form is degenerate",
                            );
                            all_ok = false;
                        } else {
                            count += 1;
                        }
                    }
                }
            }
        }
        if all_ok {
            let what = if weil.is_some() {
                "polarized up to sign"
            } else {
                "nondegenerate"
            };
            report.pass(format!("all {count} summand forms {what}"));
        }
        Ok(report)
    }

    // ------------------------------------------------------------------
    // Lambda
    // ------------------------------------------------------------------

    /// Computes `Lambda = Ker L_0 meet (meet_i (eta^i Ker L^i_{2i})^perp)`
    /// and verifies its identities.
    pub fn lambda(&self) -> Result<(Subspace<T>, Report)> {
        let mut report = Report::new("lambda");
        let space = &self.package.space;
        let n = self.package.half_dim();
        let gram = &self.package.form.gram;

        let middle = space.degree_subspace::<T>(n);
        let ker_l = kernel(&self.l_total);
        let ker_l0 = ker_l.meet(&middle)?;

        let mut lambda = ker_l0.clone();
        for i in 1..=n {
            if 2 * i > n {
                break;
            }
            let source = space.degree_subspace::<T>(n - 2 * i);
            let ker_li = kernel(&self.l_total.pow(i)).meet(&source)?;
            let pushed = ker_li.map_through(&self.eta_total.pow(i))?;
            if pushed.is_zero() {
                continue;
            }
            lambda = lambda.meet(&pushed.perp(gram)?)?;
        }

        let betti = self.package.betti();
        let b_n = betti[n];
        let b_n2 = if n >= 2 { betti[n - 2] } else { 0 };
        if lambda.dim() == b_n.saturating_sub(b_n2) && b_n >= b_n2 {
            report.pass(format!("dim Lambda = b_n - b_(n-2) = {}", lambda.dim()));
        } else {
            report.fail(
                "dim Lambda = b_n - b_(n-2)",
                format!(
                    "dim Lambda = {}, b_n = {b_n}, b_(n-2) = {b_n2}",
                    lambda.dim()
                ),
            );
        }

        // Ker L_0 = Lambda (+) eta Ker L_2, orthogonally
        let eta_ker_l2 = if n >= 2 {
            let source = space.degree_subspace::<T>(n - 2);
            kernel(&self.l_total)
                .meet(&source)?
                .map_through(&self.eta_total)?
        } else {
            Subspace::zero(space.total_dim())
        };
        let join = lambda.join(&eta_ker_l2)?;
        let meet = lambda.meet(&eta_ker_l2)?;
        if join == ker_l0 && meet.is_zero() {
            report.pass("Ker L_0 = Lambda (+) eta Ker L_2");
        } else {
            report.fail(
                "Ker L_0 = Lambda (+) eta Ker L_2",
                format!(
                    "dim Lambda = {}, dim eta Ker L_2 = {}, dim join = {}, dim meet = {}, dim Ker L_0 = {}",
                    lambda.dim(),
                    eta_ker_l2.dim(),
                    join.dim(),
                    meet.dim(),
                    ker_l0.dim()
                ),
            );
        }
        let cross = &(&lambda.basis().transpose() * gram) * eta_ker_l2.basis();
        if cross.is_zero() {
            report.pass("Lambda and eta Ker L_2 are S-orthogonal");
        } else {
            report.fail(
                "Lambda and eta Ker L_2 are S-orthogonal",
                "cross Gram block is nonzero",
            );
        }

        // Lambda <= H^n_{<= 0}
        let bound = self.lift_local(n, &self.perverse.chain(n).step(0));
        if bound.contains(&lambda) {
            report.pass("Lambda <= H^n_(<=0)");
        } else {
            report.fail(
                "Lambda <= H^n_(<=0)",
                "Lambda has classes of positive perversity",
            );
        }

        if let Some(weil) = &self.package.weil {
            if lambda.is_zero() || restrict_endomorphism(&weil.total(), &lambda).is_ok() {
                report.pass("Lambda stable under the Weil operator");
            } else {
                report.fail("Lambda stable under the Weil operator", "C Lambda != Lambda");
            }
        }

        self.lambda_polarization(&lambda, &mut report)?;
        Ok((lambda, report))
    }

    fn lambda_polarization(&self, lambda: &Subspace<T>, report: &mut Report) -> Result<()> {
        if lambda.is_zero() {
            report.pass("Lambda_0 polarization (vacuous: Lambda = 0)");
            return Ok(());
        }
        // Lambda must lie in W^eta_0 meet W^L_0 for the graded restriction
        // to make sense; guard instead of assuming
        let cut = self
            .sys
            .wm
            .filtration
            .step(0)
            .meet(&self.sys.wn.filtration.step(0))?;
        if !cut.contains(lambda) {
            report.info(
                "Lambda_0 polarization",
                "Lambda does not lie in W^eta_0 meet W^L_0; graded positivity not applicable",
            );
            return Ok(());
        }
        let piece = self.sys.piece(0, 0);
        let projected = Subspace::span(&piece.projection.checked_mul(lambda.basis())?);
        if projected.is_zero() {
            report.pass("Lambda_0 polarization (vacuous: Lambda_0 = 0)");
            return Ok(());
        }
        let form = self.sys.double_form(0, 0)?;
        let basis = projected.basis();
        let restricted = &(&basis.transpose() * &form) * basis;
        let sign = if self.package.half_dim().is_multiple_of(2) { 1 } else { -1 };
        match &self.package.weil {
            Some(weil) => {
                let c_piece = &(&piece.projection * &weil.total()) * &piece.section;
                match restrict_endomorphism(&c_piece, &projected) {
                    Ok(c_restricted) => match polarization_check(&restricted, &c_restricted, sign)? {
                        crate::graded::CheckOutcome::Pass => {
                            report.pass(format!(
                                "Lambda_0 polarized by (-1)^n S^(eta L)_00 (dim {})",
                                projected.dim()
                            ));
                        }
                        crate::graded::CheckOutcome::Fail { witness } => {
                            report.fail("Lambda_0 polarization", witness);
                        }
                    },
                    Err(_) => {
                        report.fail(
                            "Lambda_0 polarization",
                            "Lambda_0 is not stable under the induced Weil operator",
                        );
                    }
                }
            }
            None => {
                if restricted.rank() == projected.dim() {
                    report.pass("Lambda_0 form nondegenerate (no Weil data: positivity skipped)");
                } else {
                    report.fail(
                        "Lambda_0 form nondegenerate",
                        "restricted S^(eta L)_00 is degenerate on Lambda_0",
                    );
                }
            }
        }
        Ok(())
    }

    // ------------------------------------------------------------------
    // fibers
    // ------------------------------------------------------------------

    fn fiber_data<'f>(&self, fiber: &'f FiberRecord<T>, b: i64) -> Result<FiberData<'f, T>> {
        let n = self.n();
        let degree = n + b;
        if degree < 0 || degree > self.package.space.top_degree() as i64 {
            return Err(Error::InvalidInput(format!(
                "fiber {}: degree n+b = {degree} out of range",
                fiber.label
            )));
        }
        let degree = degree as usize;
        let cl = fiber.class_maps.get(&b).ok_or_else(|| {
            Error::InvalidInput(format!("fiber {} has no class map at b = {b}", fiber.label))
        })?;
        let res = fiber.restriction_maps.get(&b).ok_or_else(|| {
            Error::InvalidInput(format!(
                "fiber {} has no restriction map at b = {b}",
                fiber.label
            ))
        })?;
        let hom = fiber.homology_filtration.get(&b).ok_or_else(|| {
            Error::InvalidInput(format!(
                "fiber {} has no homology filtration at b = {b}",
                fiber.label
            ))
        })?;
        let d = self.package.space.dim(degree);
        if cl.cols() != hom.ambient_dim() || cl.rows() != d {
            return Err(Error::ShapeMismatch {
                context: "fiber class map",
                left: (d, hom.ambient_dim()),
                right: (cl.rows(), cl.cols()),
            });
        }
        if res.cols() != d {
            return Err(Error::ShapeMismatch {
                context: "fiber restriction map",
                left: (res.rows(), d),
                right: (res.rows(), res.cols()),
            });
        }
        Ok((cl, res, hom, degree))
    }

    /// Refined intersection form analysis at one perversity level of one
    /// fiber record.
    pub fn refined_intersection(&self, fiber: &FiberRecord<T>, b: i64) -> Result<Report> {
        let mut report = Report::new(format!("refined-intersection[{} b={b}]", fiber.label));
        let (cl, res, hom, degree) = self.fiber_data(fiber, b)?;
        let chain = self.perverse.chain(degree);
        let cl_image = image(cl);

        if hom.step(b).is_full() {
            report.pass(format!("fiber homology exhausted at level {b}"));
        } else {
            report.fail(
                "fiber homology exhausted",
                format!(
                    "H_(n-b, <= {b}) has dimension {} of {}",
                    hom.step(b).dim(),
                    hom.ambient_dim()
                ),
            );
        }

        let mut strict = true;
        for a in (chain.lo() - 1).min(hom.lo() - 1)..=(chain.hi() + 1).max(hom.hi() + 1) {
            let pushed = hom.step(a).map_through(cl)?;
            let expected = cl_image.meet(&chain.step(a))?;
            if pushed != expected {
                report.fail(
                    "class map strictness",
                    format!(
                        "cl(W_{a}) has dimension {} but Im(cl) meet H_(<= {a}) has dimension {}",
                        pushed.dim(),
                        expected.dim()
                    ),
                );
                strict = false;
                break;
            }
        }
        if strict {
            report.pass("class map strict for the induced filtrations");
        }

        // fiber cohomology filtration = image filtration through res
        let fdim = res.rows();
        let mut coh_steps = Vec::new();
        let coh_lo = chain.lo() - 1;
        for a in coh_lo..=chain.hi() {
            coh_steps.push(image(&res.checked_mul(chain.step(a).basis())?));
        }
        let coh = Filtration::new(fdim, coh_lo, coh_steps)?;
        if coh.step(b - 1).is_zero() {
            report.pass(format!("fiber cohomology vanishes below level {b}"));
        } else {
            report.fail(
                "fiber cohomology vanishing",
                format!(
                    "H^(n+b)_(<= {}) (fiber) has dimension {}",
                    b - 1,
                    coh.step(b - 1).dim()
                ),
            );
        }

        let composite = res.checked_mul(cl)?;
        let mut graded_ok = true;
        for a in hom.lo() - 1..=hom.hi() + 1 {
            let src = hom.step(a).quotient_map(&hom.step(a - 1))?;
            let dst = coh.step(a).quotient_map(&coh.step(a - 1))?;
            if src.dim() == 0 && dst.dim() == 0 {
                continue;
            }
            let induced = &(&dst.projection * &composite) * &src.section;
            if a == b {
                let ok = induced.rows() == induced.cols() && induced.rank() == induced.rows();
                if ok {
                    report.pass(format!(
                        "graded refined form at a = b = {b} is an isomorphism (rank {})",
                        induced.rank()
                    ));
                } else {
                    report.fail(
                        format!("graded refined form at a = b = {b}"),
                        format!(
                            "map is {}x{} of rank {}",
                            induced.rows(),
                            induced.cols(),
                            induced.rank()
                        ),
                    );
                    graded_ok = false;
                }
            } else if !induced.is_zero() {
                report.fail(
                    format!("graded refined form at a = {a} (b = {b})"),
                    "off-diagonal graded block is nonzero",
                );
                graded_ok = false;
            }
        }
        if graded_ok {
            report.pass("off-diagonal graded blocks vanish");
        }
        Ok(report)
    }

    /// Contractibility criterion at one level: graded class map injective,
    /// image inside `Ker L`, restricted `S^{eta L}_{-b,0}` nondegenerate,
    /// and (with Weil data) each summand cut polarized up to sign.
    pub fn grauert(&self, fiber: &FiberRecord<T>, b: i64) -> Result<Report> {
        let mut report = Report::new(format!("grauert[{} b={b}]", fiber.label));
        let (cl, _res, hom, degree) = self.fiber_data(fiber, b)?;

        let hom_piece = hom.step(b).quotient_map(&hom.step(b - 1))?;
        if hom_piece.dim() == 0 {
            report.pass("vacuous (graded fiber homology is zero at a = b)");
            return Ok(report);
        }

        // graded class map into the (i, j) = (-b, 0) piece
        let piece = self.sys.piece(-b, 0);
        let ambient_cl = self
            .package
            .space
            .inclusion::<T>(degree)
            .checked_mul(cl)?
            .checked_mul(&hom_piece.section)?;
        let graded_cl = piece.projection.checked_mul(&ambient_cl)?;
        if graded_cl.rank() == hom_piece.dim() {
            report.pass(format!(
                "graded class map injective (rank {})",
                graded_cl.rank()
            ));
        } else {
            report.fail(
                "graded class map injective",
                format!("rank {} < {}", graded_cl.rank(), hom_piece.dim()),
            );
            return Ok(report);
        }
        let img = image(&graded_cl);

        // image inside Ker L on the graded piece
        let induced_l = self.sys.induced_map(-b, 0, 0, 1);
        if induced_l.checked_mul(img.basis())?.is_zero() {
            report.pass("image contained in Ker L");
        } else {
            report.fail("image contained in Ker L", "graded L does not kill the image");
        }

        let form = self.sys.double_form(-b, 0)?;
        let restricted = &(&img.basis().transpose() * &form) * img.basis();
        if restricted.rank() == img.dim() {
            report.pass("restricted S^(eta L)_(-b,0) nondegenerate");
        } else {
            report.fail(
                "restricted S^(eta L)_(-b,0) nondegenerate",
                format!("rank {} < {}", restricted.rank(), img.dim()),
            );
        }

        if let Some(weil) = &self.package.weil {
            let biprims = self.sys.biprimitive_table()?;
            let summands = self.sys.summands(&biprims, -b, 0)?;
            let c_piece = &(&piece.projection * &weil.total()) * &piece.section;
            let mut covered = Subspace::zero(piece.dim());
            let mut ok = true;
            for summand in &summands {
                let cut = img.meet(&summand.subspace)?;
                if cut.is_zero() {
                    continue;
                }
                covered = covered.join(&cut)?;
                let basis = cut.basis();
                let rest_form = &(&basis.transpose() * &form) * basis;
                let c_restricted = match restrict_endomorphism(&c_piece, &cut) {
                    Ok(c) => c,
                    Err(_) => {
                        report.fail(
                            "Weil stability of image summand",
                            "summand cut is not Weil-stable",
                        );
                        ok = false;
                        continue;
                    }
                };
                let sign = summand.polarization_sign(self.n());
                match polarization_check(&rest_form, &c_restricted, sign)? {
                    crate::graded::CheckOutcome::Pass => {}
                    crate::graded::CheckOutcome::Fail { witness } => {
                        report.fail(
                            format!(
                                "polarization of image cut with eta^{} L^{} P^{}_{}",
                                summand.m_power,
                                summand.n_power,
                                -summand.prim_n,
                                -summand.prim_rel
                            ),
                            witness,
                        );
                        ok = false;
                    }
                }
            }
            if covered != img {
                report.fail(
                    "image compatible with the (eta,L)-decomposition",
                    format!(
                        "summand cuts cover {} of {} dimensions",
                        covered.dim(),
                        img.dim()
                    ),
                );
            } else if ok {
                report.pass("image summands polarized up to sign");
            }
        }
        Ok(report)
    }

    /// Signature rule for semismall packages: `(-1)^h I` positive definite
    /// on the relevant fiber homology, where `2h` is the stratum codimension
    /// and `I` the intersection matrix at `b = n - 2h`.
    pub fn semismall_signature(&self, fiber: &FiberRecord<T>) -> Result<Report> {
        let mut report = Report::new(format!("semismall-signature[{}]", fiber.label));
        let table = self.package.defect_table.as_ref().ok_or_else(|| {
            Error::InvalidInput("semismall signature requires a defect table".into())
        })?;
        let r = defect(table, self.package.half_dim())?;
        if r != 0 {
            return Err(Error::NotSemismall(r));
        }
        let h = fiber.codim_h.ok_or_else(|| {
            Error::InvalidInput(format!(
                "fiber {} carries no codimension datum",
                fiber.label
            ))
        })?;
        let b = self.n() - 2 * h as i64;
        let (cl, res, _hom, _degree) = self.fiber_data(fiber, b)?;
        let intersection = res.checked_mul(cl)?;
        let sign = if h % 2 == 0 { T::one() } else { -T::one() };
        let signed = intersection.scale(&sign);
        match crate::inertia::signature(&signed) {
            Ok(inertia) if inertia.is_positive_definite() => {
                report.pass(format!(
                    "(-1)^{h} I positive definite on {} classes",
                    signed.rows()
                ));
            }
            Ok(inertia) => {
                report.fail(
                    format!("(-1)^{h} I positive definite"),
                    format!(
                        "inertia (+{}, -{}, 0:{})",
                        inertia.positive, inertia.negative, inertia.zero
                    ),
                );
            }
            Err(e) => {
                report.fail(format!("(-1)^{h} I positive definite"), e.to_string());
            }
        }
        Ok(report)
    }

    /// Whether the degree-`b` skyscraper contribution splits off: the graded
    /// refined form at `a = b` must be an isomorphism.
    pub fn splitting(&self, fiber: &FiberRecord<T>, b: i64) -> Result<Report> {
        let mut report = Report::new(format!("splitting[{} b={b}]", fiber.label));
        let (cl, res, hom, degree) = self.fiber_data(fiber, b)?;
        let chain = self.perverse.chain(degree);
        let composite = res.checked_mul(cl)?;

        let src = hom.step(b).quotient_map(&hom.step(b - 1))?;
        let rank = src.dim();
        let coh_b = image(&res.checked_mul(chain.step(b).basis())?);
        let coh_b1 = image(&res.checked_mul(chain.step(b - 1).basis())?);
        let dst = coh_b.quotient_map(&coh_b1)?;
        let induced = &(&dst.projection * &composite) * &src.section;
        let splits = induced.rows() == induced.cols() && induced.rank() == induced.rows();
        if splits {
            report.pass(format!("skyscraper summand of rank {rank} splits at b = {b}"));
        } else {
            report.fail(
                format!("splitting at b = {b}"),
                format!(
                    "graded refined form is {}x{} of rank {}",
                    induced.rows(),
                    induced.cols(),
                    induced.rank()
                ),
            );
        }
        report.info("skyscraper rank", rank.to_string());
        Ok(report)
    }
}

fn compute_perverse_filtration<T: Scalar>(
    space: &GradedSpace,
    wl: &WeightFiltration<T>,
) -> Result<PerverseFiltration<T>> {
    let n = space.half_dim() as i64;
    let mut chains = Vec::new();
    for l in space.degrees() {
        let d = space.dim(l);
        if d == 0 {
            chains.push(Filtration::trivial(0));
            continue;
        }
        let j = l as i64 - n;
        let block = space.degree_subspace::<T>(l);
        let offset = space.offset(l);
        let lo = wl.filtration.lo() - 1 + j;
        let hi = wl.filtration.hi() + 1 + j;
        let mut steps = Vec::new();
        for b in lo..=hi {
            let cut = wl.filtration.step(b - j).meet(&block)?;
            // the cut lives inside the degree block; extract the local rows
            let local = cut.basis().block(offset, 0, d, cut.dim());
            steps.push(Subspace::span(&local));
        }
        chains.push(Filtration::new(d, lo, steps)?.trimmed());
    }
    Ok(PerverseFiltration {
        space: space.clone(),
        chains,
    })
}

/// Defect of semismallness `r = max(2i + dim Y^i - n)` over the nonempty
/// strata of the table.
pub fn defect(table: &[DefectEntry], n: usize) -> Result<i64> {
    if table.is_empty() {
        return Err(Error::InvalidInput("defect table is empty".into()));
    }
    Ok(table
        .iter()
        .map(|e| 2 * e.fiber_dim as i64 + e.dim_yi as i64 - n as i64)
        .max()
        .expect("nonempty"))
}
