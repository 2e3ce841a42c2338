//! Deterministic ground-truth packages with expected-result manifests.
//!
//! Each builder returns a package together with the manifest of values the
//! analyzer must reproduce exactly. The sl2 x sl2 builder produces bimodules
//! `(+) m_ab V_a (x) V_b`: the first operator acts as the diagonal
//! `J (x) I + I (x) J` and the second as `I (x) J`. The diagonal term makes
//! the first weight filtration the total-weight one, which is exactly the
//! centering the relative weight hypothesis demands (the flat `J (x) I`
//! action fails it); the graded action on the pieces is unchanged, so the
//! biprimitive at `(a, b)` still has dimension `m_ab`.
//!
//! Corrupted variants are emitted alongside, each breaking exactly one
//! named check.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::filtration::Filtration;
use crate::graded::{GradedOperator, GradedSpace, PoincarePairing};
use crate::matrix::Matrix;
use crate::perverse::{DefectEntry, FiberRecord, PerversePackage};
use crate::scalar::Scalar;
use crate::subspace::Subspace;
use crate::weil::WeilOperator;

/// Expected analyzer outputs for a built package.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub name: String,
    /// `(degree, perversity) -> dimension`.
    pub perverse_table: BTreeMap<(usize, i64), usize>,
    /// `(i, j) -> dim P^{-j}_{-i}`.
    pub biprimitives: BTreeMap<(i64, i64), usize>,
    pub lambda_dim: usize,
    pub defect: Option<i64>,
    pub fibers: Vec<FiberExpectation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberExpectation {
    pub label: String,
    /// `b -> skyscraper rank`; the splitting verdict is expected true.
    pub splitting_ranks: BTreeMap<i64, usize>,
    /// Whether the semismall signature criterion applies (and must pass).
    pub semismall_signature: bool,
}

/// A multiplicity entry for the sl2 x sl2 builder: `mult` copies of
/// `V_a (x) V_b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PieceSpec {
    pub a: usize,
    pub b: usize,
    pub mult: usize,
}

/// Raw operator triple for engine-level use (no grading attached).
#[derive(Clone, Debug)]
pub struct Sl2Sl2<T> {
    pub m_op: Matrix<T>,
    pub n_op: Matrix<T>,
    pub gram: Matrix<T>,
    /// `(a, b) -> total multiplicity`, the expected biprimitive dimensions.
    pub expected_biprimitives: BTreeMap<(i64, i64), usize>,
}

fn string_pair_sign<T: Scalar>(len: usize, s: usize, s2: usize) -> T {
    if s + s2 != len {
        return T::zero();
    }
    if s.is_multiple_of(2) {
        T::one()
    } else {
        -T::one()
    }
}

/// `(+) m_ab (V_a (x) V_b)` with `M = J (x) I + I (x) J`, `N = I (x) J` and
/// the product of the sl2-invariant string forms.
pub fn build_sl2sl2<T: Scalar>(pieces: &[PieceSpec]) -> Sl2Sl2<T> {
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut expected = BTreeMap::new();
    for p in pieces {
        for _ in 0..p.mult {
            blocks.push((p.a, p.b));
        }
        if p.mult > 0 {
            *expected.entry((p.a as i64, p.b as i64)).or_insert(0) += p.mult;
        }
    }
    let sizes: Vec<usize> = blocks.iter().map(|&(a, b)| (a + 1) * (b + 1)).collect();
    let total: usize = sizes.iter().sum();
    let mut offsets = Vec::with_capacity(blocks.len());
    let mut acc = 0;
    for &s in &sizes {
        offsets.push(acc);
        acc += s;
    }
    let idx = |piece: usize, s: usize, t: usize| -> usize {
        let (_, b) = blocks[piece];
        offsets[piece] + s * (b + 1) + t
    };

    let mut m_op = Matrix::zeros(total, total);
    let mut n_op = Matrix::zeros(total, total);
    let mut gram = Matrix::zeros(total, total);
    for (piece, &(a, b)) in blocks.iter().enumerate() {
        for s in 0..=a {
            for t in 0..=b {
                let from = idx(piece, s, t);
                if s < a {
                    m_op[(idx(piece, s + 1, t), from)] = T::one();
                }
                if t < b {
                    m_op[(idx(piece, s, t + 1), from)] = T::one();
                    n_op[(idx(piece, s, t + 1), from)] = T::one();
                }
                for s2 in 0..=a {
                    for t2 in 0..=b {
                        let left: T = string_pair_sign(a, s, s2);
                        let right: T = string_pair_sign(b, t, t2);
                        if !left.is_zero() && !right.is_zero() {
                            gram[(from, idx(piece, s2, t2))] = left * right;
                        }
                    }
                }
            }
        }
    }
    Sl2Sl2 {
        m_op,
        n_op,
        gram,
        expected_biprimitives: expected,
    }
}

/// Graded package built from an sl2 x sl2 bimodule: class `v_s (x) w_t` in a
/// `V_a (x) V_b` piece is placed in degree `n - (a-2s) - (b-2t)` where `n` is
/// the largest `a + b`. Requires every `a + b` to have the parity of `n`,
/// otherwise the twisted form cannot be `(-1)^n`-symmetric.
pub fn build_sl2sl2_package<T: Scalar>(
    pieces: &[PieceSpec],
) -> Result<(PerversePackage<T>, Manifest)> {
    let active: Vec<PieceSpec> = pieces.iter().copied().filter(|p| p.mult > 0).collect();
    if active.is_empty() {
        return Err(Error::InvalidInput(
            "sl2sl2 package needs at least one piece".into(),
        ));
    }
    let n = active.iter().map(|p| p.a + p.b).max().unwrap();
    for p in &active {
        if (p.a + p.b) % 2 != n % 2 {
            return Err(Error::InvalidInput(format!(
                "piece V_{} (x) V_{} has weight parity incompatible with n = {n}; \
                 the twisted form cannot be (-1)^n-symmetric",
                p.a, p.b
            )));
        }
    }

    // enumerate classes: (piece copy, s, t) with cohomological degree
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    for p in &active {
        for _ in 0..p.mult {
            blocks.push((p.a, p.b));
        }
    }
    let degree_of = |a: usize, b: usize, s: usize, t: usize| -> usize {
        (n as i64 - (a as i64 - 2 * s as i64) - (b as i64 - 2 * t as i64)) as usize
    };
    let mut dims = vec![0usize; 2 * n + 1];
    // local slot of each class within its degree
    let mut slot: BTreeMap<(usize, usize, usize), usize> = BTreeMap::new();
    for (piece, &(a, b)) in blocks.iter().enumerate() {
        for s in 0..=a {
            for t in 0..=b {
                let l = degree_of(a, b, s, t);
                slot.insert((piece, s, t), dims[l]);
                dims[l] += 1;
            }
        }
    }
    let space = GradedSpace::new(n, dims)?;

    let mut eta_blocks: BTreeMap<usize, Matrix<T>> = BTreeMap::new();
    let mut l_blocks: BTreeMap<usize, Matrix<T>> = BTreeMap::new();
    for (piece, &(a, b)) in blocks.iter().enumerate() {
        for s in 0..=a {
            for t in 0..=b {
                let l = degree_of(a, b, s, t);
                let from = slot[&(piece, s, t)];
                if s < a {
                    let block = eta_blocks
                        .entry(l)
                        .or_insert_with(|| Matrix::zeros(space.dim(l + 2), space.dim(l)));
                    block[(slot[&(piece, s + 1, t)], from)] = T::one();
                }
                if t < b {
                    let to = slot[&(piece, s, t + 1)];
                    let block = eta_blocks
                        .entry(l)
                        .or_insert_with(|| Matrix::zeros(space.dim(l + 2), space.dim(l)));
                    block[(to, from)] = block[(to, from)].clone() + T::one();
                    let block = l_blocks
                        .entry(l)
                        .or_insert_with(|| Matrix::zeros(space.dim(l + 2), space.dim(l)));
                    block[(to, from)] = T::one();
                }
            }
        }
    }

    // pairing blocks: the twisted form is the tensor form, so
    // phi_l = (-1)^{l(l-1)/2} S restricted to H^l x H^{2n-l}
    let mut pairing_blocks: BTreeMap<usize, Matrix<T>> = BTreeMap::new();
    for l in 0..=n {
        if space.dim(l) == 0 {
            continue;
        }
        let mut phi = Matrix::zeros(space.dim(l), space.dim(2 * n - l));
        let sign: T = if (l * l.saturating_sub(1) / 2) % 2 == 0 {
            T::one()
        } else {
            -T::one()
        };
        for (piece, &(a, b)) in blocks.iter().enumerate() {
            for s in 0..=a {
                for t in 0..=b {
                    if degree_of(a, b, s, t) != l {
                        continue;
                    }
                    let s2 = a - s;
                    let t2 = b - t;
                    debug_assert_eq!(degree_of(a, b, s2, t2), 2 * n - l);
                    let left: T = string_pair_sign(a, s, s2);
                    let right: T = string_pair_sign(b, t, t2);
                    phi[(slot[&(piece, s, t)], slot[&(piece, s2, t2)])] =
                        sign.clone() * left * right;
                }
            }
        }
        pairing_blocks.insert(l, phi);
    }

    let eta = GradedOperator::new(space.clone(), 2, eta_blocks)?;
    let l_op = GradedOperator::new(space.clone(), 2, l_blocks)?;
    let pairing = PoincarePairing::from_lower_blocks(space.clone(), pairing_blocks)?;
    let weil = WeilOperator::identity(space.clone());
    let name = format!(
        "sl2sl2-{}",
        active
            .iter()
            .map(|p| format!("{}x{}m{}", p.a, p.b, p.mult))
            .collect::<Vec<_>>()
            .join("-")
    );
    let package = PerversePackage::new(
        name.clone(),
        space,
        eta,
        l_op,
        pairing,
        Some(weil),
        None,
        vec![],
    )?;

    let mut perverse_table = BTreeMap::new();
    let mut biprimitives = BTreeMap::new();
    for p in &active {
        *biprimitives.entry((p.a as i64, p.b as i64)).or_insert(0) += p.mult;
        for s in 0..=p.a {
            for t in 0..=p.b {
                let l = degree_of(p.a, p.b, s, t);
                let b_perv = 2 * s as i64 - p.a as i64;
                *perverse_table.entry((l, b_perv)).or_insert(0) += p.mult;
            }
        }
    }
    let betti = package.betti();
    let lambda_dim = betti[n] - if n >= 2 { betti[n - 2] } else { 0 };
    let manifest = Manifest {
        name,
        perverse_table,
        biprimitives,
        lambda_dim,
        defect: None,
        fibers: vec![],
    };
    Ok((package, manifest))
}

/// Projective space of dimension `a`: one class in each even degree, the
/// hyperplane class acting as both operators.
pub fn build_projective_space<T: Scalar>(a: usize) -> (PerversePackage<T>, Manifest) {
    let n = a;
    let mut dims = vec![0usize; 2 * n + 1];
    for l in (0..=2 * n).step_by(2) {
        dims[l] = 1;
    }
    let space = GradedSpace::new(n, dims).expect("consistent dims");

    let mut op_blocks = BTreeMap::new();
    for l in (0..2 * n).step_by(2) {
        op_blocks.insert(l, Matrix::identity(1));
    }
    let eta = GradedOperator::new(space.clone(), 2, op_blocks.clone()).expect("shapes");
    let l_op = GradedOperator::new(space.clone(), 2, op_blocks).expect("shapes");

    let mut pairing_blocks = BTreeMap::new();
    for l in 0..=n {
        if space.dim(l) > 0 {
            pairing_blocks.insert(l, Matrix::identity(1));
        }
    }
    let pairing =
        PoincarePairing::from_lower_blocks(space.clone(), pairing_blocks).expect("pairing");
    let weil = WeilOperator::identity(space.clone());

    // identity map: generic fibers are points over the whole target
    let defect_table = vec![DefectEntry { fiber_dim: 0, dim_yi: n }];
    let fibers = if a == 0 {
        vec![point_fiber_record()]
    } else {
        vec![]
    };

    let name = format!("projective-space-{a}");
    let package = PerversePackage::new(
        name.clone(),
        space,
        eta,
        l_op,
        pairing,
        Some(weil),
        Some(defect_table),
        fibers,
    )
    .expect("valid package");

    let mut perverse_table = BTreeMap::new();
    for l in (0..=2 * n).step_by(2) {
        perverse_table.insert((l, 0i64), 1usize);
    }
    let mut biprimitives = BTreeMap::new();
    biprimitives.insert((0i64, n as i64), 1usize);
    let lambda_dim = usize::from(n == 0);
    let mut fiber_expectations = Vec::new();
    if a == 0 {
        let mut ranks = BTreeMap::new();
        ranks.insert(0i64, 1usize);
        fiber_expectations.push(FiberExpectation {
            label: "point-fiber".into(),
            splitting_ranks: ranks,
            semismall_signature: true,
        });
    }
    let manifest = Manifest {
        name,
        perverse_table,
        biprimitives,
        lambda_dim,
        defect: Some(0),
        fibers: fiber_expectations,
    };
    (package, manifest)
}

fn point_fiber_record<T: Scalar>() -> FiberRecord<T> {
    let mut class_maps = BTreeMap::new();
    class_maps.insert(0i64, Matrix::identity(1));
    let mut restriction_maps = BTreeMap::new();
    restriction_maps.insert(0i64, Matrix::identity(1));
    let mut homology_filtration = BTreeMap::new();
    homology_filtration.insert(
        0i64,
        Filtration::new(1, 0, vec![Subspace::full(1)]).expect("chain"),
    );
    FiberRecord {
        label: "point-fiber".into(),
        codim_h: Some(0),
        class_maps,
        restriction_maps,
        homology_filtration,
    }
}

/// `P^a x P^b` fibered over `P^b`: monomial basis `h1^s h2^t`, `eta` the sum
/// of the two hyperplane classes, `L` the pullback `h2`.
pub fn build_product_family<T: Scalar>(a: usize, b: usize) -> (PerversePackage<T>, Manifest) {
    let n = a + b;
    let mut dims = vec![0usize; 2 * n + 1];
    let mut slot: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for s in 0..=a {
        for t in 0..=b {
            let l = 2 * (s + t);
            slot.insert((s, t), dims[l]);
            dims[l] += 1;
        }
    }
    let space = GradedSpace::new(n, dims).expect("consistent dims");

    let mut eta_blocks: BTreeMap<usize, Matrix<T>> = BTreeMap::new();
    let mut l_blocks: BTreeMap<usize, Matrix<T>> = BTreeMap::new();
    for s in 0..=a {
        for t in 0..=b {
            let l = 2 * (s + t);
            if l + 2 > 2 * n {
                continue;
            }
            let from = slot[&(s, t)];
            let eta_block = eta_blocks
                .entry(l)
                .or_insert_with(|| Matrix::zeros(space.dim(l + 2), space.dim(l)));
            if s < a {
                eta_block[(slot[&(s + 1, t)], from)] = T::one();
            }
            if t < b {
                eta_block[(slot[&(s, t + 1)], from)] = T::one();
                let l_block = l_blocks
                    .entry(l)
                    .or_insert_with(|| Matrix::zeros(space.dim(l + 2), space.dim(l)));
                l_block[(slot[&(s, t + 1)], from)] = T::one();
            }
        }
    }
    let eta = GradedOperator::new(space.clone(), 2, eta_blocks).expect("shapes");
    let l_op = GradedOperator::new(space.clone(), 2, l_blocks).expect("shapes");

    let mut pairing_blocks: BTreeMap<usize, Matrix<T>> = BTreeMap::new();
    for l in 0..=n {
        if space.dim(l) == 0 {
            continue;
        }
        let mut phi = Matrix::zeros(space.dim(l), space.dim(2 * n - l));
        for s in 0..=a {
            for t in 0..=b {
                if 2 * (s + t) != l {
                    continue;
                }
                phi[(slot[&(s, t)], slot[&(a - s, b - t)])] = T::one();
            }
        }
        pairing_blocks.insert(l, phi);
    }
    let pairing =
        PoincarePairing::from_lower_blocks(space.clone(), pairing_blocks).expect("pairing");
    let weil = WeilOperator::identity(space.clone());
    let defect_table = vec![DefectEntry { fiber_dim: a, dim_yi: b }];

    let name = format!("product-family-{a}x{b}");
    let package = PerversePackage::new(
        name.clone(),
        space,
        eta,
        l_op,
        pairing,
        Some(weil),
        Some(defect_table),
        vec![],
    )
    .expect("valid package");

    let mut perverse_table = BTreeMap::new();
    for s in 0..=a {
        for t in 0..=b {
            *perverse_table
                .entry((2 * (s + t), 2 * s as i64 - a as i64))
                .or_insert(0usize) += 1;
        }
    }
    let mut biprimitives = BTreeMap::new();
    biprimitives.insert((a as i64, b as i64), 1usize);
    let betti = package.betti();
    let lambda_dim = betti[n] - if n >= 2 { betti[n - 2] } else { 0 };
    let manifest = Manifest {
        name,
        perverse_table,
        biprimitives,
        lambda_dim,
        defect: Some(a as i64),
        fibers: vec![],
    };
    (package, manifest)
}

/// Blowup of the projective plane at one point: `H^2 = <Ht, E>` with
/// intersection `diag(1, -1)`, `eta = 2 Ht - E`, `L = Ht`, and the fiber
/// record of the exceptional curve over the blown-down point.
pub fn build_blowup_p2<T: Scalar>() -> (PerversePackage<T>, Manifest) {
    let space = GradedSpace::new(2, vec![1, 0, 2, 0, 1]).expect("dims");

    let mut eta_blocks = BTreeMap::new();
    // eta(1) = 2 Ht - E; eta(Ht) = 2 pt; eta(E) = pt
    eta_blocks.insert(0usize, Matrix::from_int_rows(&[&[2], &[-1]]));
    eta_blocks.insert(2usize, Matrix::from_int_rows(&[&[2, 1]]));
    let eta = GradedOperator::new(space.clone(), 2, eta_blocks).expect("shapes");

    let mut l_blocks = BTreeMap::new();
    // L(1) = Ht; L(Ht) = pt; L(E) = 0
    l_blocks.insert(0usize, Matrix::from_int_rows(&[&[1], &[0]]));
    l_blocks.insert(2usize, Matrix::from_int_rows(&[&[1, 0]]));
    let l_op = GradedOperator::new(space.clone(), 2, l_blocks).expect("shapes");

    let mut pairing_blocks = BTreeMap::new();
    pairing_blocks.insert(0usize, Matrix::identity(1));
    pairing_blocks.insert(2usize, Matrix::from_int_rows(&[&[1, 0], &[0, -1]]));
    let pairing =
        PoincarePairing::from_lower_blocks(space.clone(), pairing_blocks).expect("pairing");
    let weil = WeilOperator::identity(space.clone());

    let defect_table = vec![
        DefectEntry { fiber_dim: 0, dim_yi: 2 },
        DefectEntry { fiber_dim: 1, dim_yi: 0 },
    ];

    // fiber over the blown-down point: E, a projective line
    let mut class_maps = BTreeMap::new();
    class_maps.insert(0i64, Matrix::from_int_rows(&[&[0], &[1]]));
    class_maps.insert(2i64, Matrix::identity(1));
    let mut restriction_maps = BTreeMap::new();
    restriction_maps.insert(0i64, Matrix::from_int_rows(&[&[0, -1]]));
    restriction_maps.insert(2i64, Matrix::zeros(0, 1));
    let mut homology_filtration = BTreeMap::new();
    homology_filtration.insert(
        0i64,
        Filtration::new(1, 0, vec![Subspace::full(1)]).expect("chain"),
    );
    homology_filtration.insert(
        2i64,
        Filtration::new(1, 0, vec![Subspace::full(1)]).expect("chain"),
    );
    let fiber = FiberRecord {
        label: "exceptional-curve".into(),
        codim_h: Some(1),
        class_maps,
        restriction_maps,
        homology_filtration,
    };

    let name = "blowup-p2".to_string();
    let package = PerversePackage::new(
        name.clone(),
        space,
        eta,
        l_op,
        pairing,
        Some(weil),
        Some(defect_table),
        vec![fiber],
    )
    .expect("valid package");

    let mut perverse_table = BTreeMap::new();
    perverse_table.insert((0usize, 0i64), 1usize);
    perverse_table.insert((2usize, 0i64), 2usize);
    perverse_table.insert((4usize, 0i64), 1usize);
    let mut biprimitives = BTreeMap::new();
    biprimitives.insert((0i64, 2i64), 1usize);
    biprimitives.insert((0i64, 0i64), 1usize);
    let mut ranks = BTreeMap::new();
    ranks.insert(0i64, 1usize);
    ranks.insert(2i64, 0usize);
    let manifest = Manifest {
        name,
        perverse_table,
        biprimitives,
        lambda_dim: 1,
        defect: Some(0),
        fibers: vec![FiberExpectation {
            label: "exceptional-curve".into(),
            splitting_ranks: ranks,
            semismall_signature: true,
        }],
    };
    (package, manifest)
}

/// Synthetic threefold contraction in the shape of the resolution example:
/// `rank_r` disjoint exceptional surfaces collapsed to one point (giving the
/// perversity -1 and +1 rows), a curve stratum contributing `2 * curve_rank`
/// middle classes in degree three, and a long middle string.
pub fn build_threefold_model<T: Scalar>(
    rank_r: usize,
    curve_rank: usize,
) -> Result<(PerversePackage<T>, Manifest)> {
    if rank_r == 0 {
        return Err(Error::InvalidInput("threefold model needs rank_r >= 1".into()));
    }
    if rank_r >= 8 {
        // eta^3(1) = (8 - r) pt: the chosen ample combination degenerates
        return Err(Error::InvalidInput(
            "threefold model supports at most 7 exceptional surfaces".into(),
        ));
    }
    let r = rank_r;
    let c = curve_rank;
    // degrees: H^0 = <u0>, H^2 = <u2, E_k>, H^3 = <w_1..w_2c>,
    // H^4 = <u4, F_k>, H^6 = <u6>
    let dims = vec![1, 0, 1 + r, 2 * c, 1 + r, 0, 1];
    let space = GradedSpace::new(3, dims)?;

    let int = |v: i64| T::from_int(v);

    // eta = 2 Ht - sum E_k
    let mut eta_blocks: BTreeMap<usize, Matrix<T>> = BTreeMap::new();
    let mut eta0 = Matrix::zeros(1 + r, 1);
    eta0[(0, 0)] = int(2);
    for k in 0..r {
        eta0[(1 + k, 0)] = int(-1);
    }
    eta_blocks.insert(0, eta0);
    let mut eta2 = Matrix::zeros(1 + r, 1 + r);
    eta2[(0, 0)] = int(2); // eta(u2) = 2 u4
    for k in 0..r {
        eta2[(1 + k, 1 + k)] = int(-1); // eta(E_k) = -F_k
    }
    eta_blocks.insert(2, eta2);
    let mut eta4 = Matrix::zeros(1, 1 + r);
    eta4[(0, 0)] = int(2); // eta(u4) = 2 u6
    for k in 0..r {
        eta4[(0, 1 + k)] = int(-1); // eta(F_k) = -u6
    }
    eta_blocks.insert(4, eta4);
    let eta = GradedOperator::new(space.clone(), 2, eta_blocks)?;

    // L = Ht
    let mut l_blocks: BTreeMap<usize, Matrix<T>> = BTreeMap::new();
    let mut l0 = Matrix::zeros(1 + r, 1);
    l0[(0, 0)] = T::one();
    l_blocks.insert(0, l0);
    let mut l2 = Matrix::zeros(1 + r, 1 + r);
    l2[(0, 0)] = T::one();
    l_blocks.insert(2, l2);
    let mut l4 = Matrix::zeros(1, 1 + r);
    l4[(0, 0)] = T::one();
    l_blocks.insert(4, l4);
    let l_op = GradedOperator::new(space.clone(), 2, l_blocks)?;

    let mut pairing_blocks: BTreeMap<usize, Matrix<T>> = BTreeMap::new();
    pairing_blocks.insert(0, Matrix::identity(1));
    pairing_blocks.insert(2, Matrix::identity(1 + r));
    if c > 0 {
        // symplectic pairing on the degree-3 classes
        let mut phi3 = Matrix::zeros(2 * c, 2 * c);
        for k in 0..c {
            phi3[(k, c + k)] = T::one();
            phi3[(c + k, k)] = -T::one();
        }
        pairing_blocks.insert(3, phi3);
    }
    let pairing = PoincarePairing::from_lower_blocks(space.clone(), pairing_blocks)?;

    let mut weil_blocks: BTreeMap<usize, Matrix<T>> = BTreeMap::new();
    for l in [0usize, 2, 4, 6] {
        weil_blocks.insert(l, Matrix::identity(space.dim(l)));
    }
    if c > 0 {
        let mut c3 = Matrix::zeros(2 * c, 2 * c);
        for k in 0..c {
            c3[(k, c + k)] = -T::one();
            c3[(c + k, k)] = T::one();
        }
        weil_blocks.insert(3, c3);
    }
    let weil = WeilOperator::new(space.clone(), weil_blocks)?;

    let mut defect_table = vec![
        DefectEntry { fiber_dim: 0, dim_yi: 3 },
        DefectEntry { fiber_dim: 2, dim_yi: 0 },
    ];
    if c > 0 {
        defect_table.push(DefectEntry { fiber_dim: 1, dim_yi: 1 });
    }

    // fiber over the collapsed point: r disjoint surfaces
    let mut class_maps = BTreeMap::new();
    let mut cl_m1 = Matrix::zeros(1 + r, r);
    for k in 0..r {
        cl_m1[(1 + k, k)] = T::one(); // fundamental class of the k-th surface
    }
    class_maps.insert(-1i64, cl_m1);
    let mut cl_p1 = Matrix::zeros(1 + r, r);
    for k in 0..r {
        cl_p1[(1 + k, k)] = int(-1); // line class inside the k-th surface
    }
    class_maps.insert(1i64, cl_p1);
    let mut restriction_maps = BTreeMap::new();
    let mut res_m1 = Matrix::zeros(r, 1 + r);
    for k in 0..r {
        res_m1[(k, 1 + k)] = int(-1); // E_k restricts to -h on itself
    }
    restriction_maps.insert(-1i64, res_m1);
    let mut res_p1 = Matrix::zeros(r, 1 + r);
    for k in 0..r {
        res_p1[(k, 1 + k)] = T::one(); // F_k restricts to the point class
    }
    restriction_maps.insert(1i64, res_p1);
    let mut homology_filtration = BTreeMap::new();
    homology_filtration.insert(-1i64, Filtration::new(r, -1, vec![Subspace::full(r)])?);
    homology_filtration.insert(1i64, Filtration::new(r, 1, vec![Subspace::full(r)])?);
    let fiber = FiberRecord {
        label: "surface-fiber".into(),
        codim_h: None,
        class_maps,
        restriction_maps,
        homology_filtration,
    };

    let name = format!("threefold-r{r}-c{c}");
    let package = PerversePackage::new(
        name.clone(),
        space,
        eta,
        l_op,
        pairing,
        Some(weil),
        Some(defect_table),
        vec![fiber],
    )?;

    let mut perverse_table = BTreeMap::new();
    perverse_table.insert((0usize, 0i64), 1usize);
    perverse_table.insert((2usize, -1i64), r);
    perverse_table.insert((2usize, 0i64), 1usize);
    if c > 0 {
        perverse_table.insert((3usize, 0i64), 2 * c);
    }
    perverse_table.insert((4usize, 0i64), 1usize);
    perverse_table.insert((4usize, 1i64), r);
    perverse_table.insert((6usize, 0i64), 1usize);
    let mut biprimitives = BTreeMap::new();
    biprimitives.insert((0i64, 3i64), 1usize);
    biprimitives.insert((1i64, 0i64), r);
    if c > 0 {
        biprimitives.insert((0i64, 0i64), 2 * c);
    }
    let mut ranks = BTreeMap::new();
    ranks.insert(-1i64, r);
    ranks.insert(1i64, r);
    let manifest = Manifest {
        name,
        perverse_table,
        biprimitives,
        lambda_dim: 2 * c,
        defect: Some(1),
        fibers: vec![FiberExpectation {
            label: "surface-fiber".into(),
            splitting_ranks: ranks,
            semismall_signature: false,
        }],
    };
    Ok((package, manifest))
}

/// A corrupted variant of a package, breaking exactly one named check.
#[derive(Clone, Debug)]
pub struct CorruptedVariant<T> {
    pub name: String,
    pub package: PerversePackage<T>,
    /// The analyzer check expected to fail (`validate` for construction
    /// invariants).
    pub target_check: &'static str,
}

/// Corrupted corpus variants, one per targeted check.
pub fn corrupted_variants<T: Scalar>() -> Vec<CorruptedVariant<T>> {
    let mut out = Vec::new();

    // flip one pairing block: breaks the infinitesimal automorphism identity
    {
        let (base, _) = build_blowup_p2::<T>();
        let mut pairing_blocks = BTreeMap::new();
        pairing_blocks.insert(0usize, Matrix::from_int_rows(&[&[-1]]));
        pairing_blocks.insert(2usize, Matrix::from_int_rows(&[&[1, 0], &[0, -1]]));
        let pairing = PoincarePairing::from_lower_blocks(base.space.clone(), pairing_blocks)
            .expect("pairing");
        let package = PerversePackage::new(
            "blowup-p2-flip-pairing",
            base.space.clone(),
            base.eta.clone(),
            base.l_op.clone(),
            pairing,
            base.weil.clone(),
            base.defect_table.clone(),
            base.fibers.clone(),
        )
        .expect("construction survives; the automorphism identity breaks");
        out.push(CorruptedVariant {
            name: "flip-pairing".into(),
            package,
            target_check: "validate",
        });
    }

    // non-commuting perturbation of L
    {
        let (base, _) = build_blowup_p2::<T>();
        let mut l_blocks = BTreeMap::new();
        l_blocks.insert(0usize, Matrix::from_int_rows(&[&[1], &[0]]));
        l_blocks.insert(2usize, Matrix::from_int_rows(&[&[1, 1]]));
        let l_op = GradedOperator::new(base.space.clone(), 2, l_blocks).expect("shapes");
        let package = PerversePackage::new(
            "blowup-p2-break-commutation",
            base.space.clone(),
            base.eta.clone(),
            l_op,
            base.pairing.clone(),
            base.weil.clone(),
            base.defect_table.clone(),
            base.fibers.clone(),
        )
        .expect("construction survives");
        out.push(CorruptedVariant {
            name: "break-commutation".into(),
            package,
            target_check: "validate",
        });
    }

    // negate the Weil operator on one summand of a two-summand module:
    // positivity flips there while every filtration-level check, and the
    // vacuous Lambda of this package, stay clean. The commutant of the
    // blowup operators is just the global sign, so this corruption needs a
    // decomposable package to stay localized.
    {
        let (base, _) = build_sl2sl2_package::<T>(&[
            PieceSpec { a: 2, b: 0, mult: 1 },
            PieceSpec { a: 0, b: 2, mult: 1 },
        ])
        .expect("uniform parity");
        // slots: the V_2 (x) V_0 classes occupy local slot 0 in each of the
        // degrees 0, 2, 4; flip the sign of C exactly there
        let mut blocks = BTreeMap::new();
        for l in [0usize, 2, 4] {
            let mut c = Matrix::identity(2);
            c[(0, 0)] = -T::one();
            blocks.insert(l, c);
        }
        let weil = WeilOperator::new(base.space.clone(), blocks).expect("shapes");
        let package = PerversePackage::new(
            "sl2sl2-negate-weil",
            base.space.clone(),
            base.eta.clone(),
            base.l_op.clone(),
            base.pairing.clone(),
            Some(weil),
            None,
            vec![],
        )
        .expect("construction survives");
        out.push(CorruptedVariant {
            name: "negate-weil".into(),
            package,
            target_check: "hrr",
        });
    }

    // negate the class map: the signature criterion sees +1 instead of -1
    {
        let (base, _) = build_blowup_p2::<T>();
        let mut fibers = base.fibers.clone();
        let cl = fibers[0].class_maps.get_mut(&0).expect("class map at 0");
        *cl = -&*cl;
        let package = PerversePackage::new(
            "blowup-p2-negate-class",
            base.space.clone(),
            base.eta.clone(),
            base.l_op.clone(),
            base.pairing.clone(),
            base.weil.clone(),
            base.defect_table.clone(),
            fibers,
        )
        .expect("construction survives");
        out.push(CorruptedVariant {
            name: "negate-class".into(),
            package,
            target_check: "signature",
        });
    }

    // shift the homology filtration of the point-class record: strictness
    // of the class map breaks while the graded pieces at a = b stay empty,
    // so only the refined-intersection check sees it
    {
        let (base, _) = build_blowup_p2::<T>();
        let mut fibers = base.fibers.clone();
        fibers[0].homology_filtration.insert(
            2i64,
            Filtration::new(1, 1, vec![Subspace::full(1)]).expect("chain"),
        );
        let package = PerversePackage::new(
            "blowup-p2-shift-homology",
            base.space.clone(),
            base.eta.clone(),
            base.l_op.clone(),
            base.pairing.clone(),
            base.weil.clone(),
            base.defect_table.clone(),
            fibers,
        )
        .expect("construction survives");
        out.push(CorruptedVariant {
            name: "shift-homology".into(),
            package,
            target_check: "rif",
        });
    }

    out
}
