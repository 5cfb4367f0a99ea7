use crate::numeric::Scalar;
use crate::tensor::*;

/// Symmetric index pairs in storage order.
pub const SYM_PAIRS: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

/// Number of stored reals in one [`Fields`] value.
pub const FIELD_COUNT: usize = 30;

/// Undotted evolved variables at one grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fields<S = f64> {
    pub theta: S,
    /// `D_a theta`.
    pub v: Vec4<S>,
    /// `D_a D_b theta`.
    pub w: Mat4<S>,
    /// Auxiliary scalar curvature.
    pub r: S,
    /// `D_a` of the auxiliary scalar curvature.
    pub vr: Vec4<S>,
    /// Auxiliary traceless Ricci tensor.
    pub rt: Mat4<S>,
}

/// Short labels of the field groups, in storage order.
pub const GROUP_NAMES: [&str; 6] = ["theta", "v", "w", "r", "vr", "rt"];

impl<S: Scalar> Fields<S> {
    pub fn zero() -> Self {
        Self {
            theta: S::zero(),
            v: zero4(),
            w: zero44(),
            r: S::zero(),
            vr: zero4(),
            rt: zero44(),
        }
    }

    pub fn to_flat(&self) -> [S; FIELD_COUNT] {
        let mut out = [S::zero(); FIELD_COUNT];
        out[0] = self.theta;
        out[1..5].copy_from_slice(&self.v);
        for (k, &(a, b)) in SYM_PAIRS.iter().enumerate() {
            out[5 + k] = self.w[a][b];
            out[20 + k] = self.rt[a][b];
        }
        out[15] = self.r;
        out[16..20].copy_from_slice(&self.vr);
        out
    }

    pub fn from_flat(x: &[S]) -> Self {
        let mut f = Self::zero();
        f.theta = x[0];
        f.v.copy_from_slice(&x[1..5]);
        for (k, &(a, b)) in SYM_PAIRS.iter().enumerate() {
            f.w[a][b] = x[5 + k];
            f.w[b][a] = x[5 + k];
            f.rt[a][b] = x[20 + k];
            f.rt[b][a] = x[20 + k];
        }
        f.r = x[15];
        f.vr.copy_from_slice(&x[16..20]);
        f
    }

    /// Group index of each flat slot, matching [`GROUP_NAMES`].
    pub fn group_of(slot: usize) -> usize {
        match slot {
            0 => 0,
            1..=4 => 1,
            5..=14 => 2,
            15 => 3,
            16..=19 => 4,
            _ => 5,
        }
    }

    pub fn zip(&self, other: &Self, f: impl Fn(S, S) -> S) -> Self {
        let (x, y) = (self.to_flat(), other.to_flat());
        let z: [S; FIELD_COUNT] = std::array::from_fn(|i| f(x[i], y[i]));
        Self::from_flat(&z)
    }

    pub fn map(&self, f: impl Fn(S) -> S) -> Self {
        let x = self.to_flat();
        let z: [S; FIELD_COUNT] = std::array::from_fn(|i| f(x[i]));
        Self::from_flat(&z)
    }
}

/// Fields and their time derivatives at one grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointState<S = f64> {
    pub q: Fields<S>,
    pub qdot: Fields<S>,
}

impl<S: Scalar> PointState<S> {
    pub fn zero() -> Self {
        Self {
            q: Fields::zero(),
            qdot: Fields::zero(),
        }
    }

    /// `self + k * other`, componentwise.
    pub fn axpy(&self, k: S, other: &Self) -> Self {
        Self {
            q: self.q.zip(&other.q, |a, b| a + k * b),
            qdot: self.qdot.zip(&other.qdot, |a, b| a + k * b),
        }
    }
}

/// Symmetry reduction of the evolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Reduction {
    /// Fields depend on time only; one grid point.
    Homogeneous,
    /// Fields depend on time and the periodic coordinate `x^1`.
    PlaneSymmetric,
}

impl Reduction {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "homogeneous" => Some(Self::Homogeneous),
            "plane_symmetric" => Some(Self::PlaneSymmetric),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Homogeneous => "homogeneous",
            Self::PlaneSymmetric => "plane_symmetric",
        }
    }
}

/// The full grid state. Grid point `i` sits at `x^1 = origin + i * spacing`;
/// the homogeneous reduction has a single point.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionState<S = f64> {
    pub time: S,
    pub spacing: f64,
    pub origin: f64,
    pub reduction: Reduction,
    pub points: Vec<PointState<S>>,
}

impl<S: Scalar> EvolutionState<S> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn is_finite(&self) -> bool {
        self.time.to_f64().is_finite()
            && self.points.iter().all(|p| {
                p.q.to_flat()
                    .iter()
                    .chain(p.qdot.to_flat().iter())
                    .all(|x| x.to_f64().is_finite())
            })
    }

    /// Sup-norm of each field group over the grid: undotted groups then
    /// dotted groups.
    pub fn group_norms(&self) -> [f64; 12] {
        let mut out = [0.0f64; 12];
        for p in &self.points {
            for (offset, f) in [(0, &p.q), (6, &p.qdot)] {
                for (slot, x) in f.to_flat().iter().enumerate() {
                    let g = offset + Fields::<S>::group_of(slot);
                    out[g] = out[g].max(x.to_f64().abs());
                }
            }
        }
        out
    }

    pub fn to_f64(&self) -> EvolutionState<f64> {
        let conv = |f: &Fields<S>| Fields::from_flat(&f.to_flat().map(|x| x.to_f64()));
        EvolutionState {
            time: self.time.to_f64(),
            spacing: self.spacing,
            origin: self.origin,
            reduction: self.reduction,
            points: self
                .points
                .iter()
                .map(|p| PointState {
                    q: conv(&p.q),
                    qdot: conv(&p.qdot),
                })
                .collect(),
        }
    }
}

/// Periodic first and second `x^1` derivatives of every stored field; zero for
/// the homogeneous reduction.
pub(crate) fn spatial_derivatives<S: Scalar>(
    points: &[PointState<S>],
    spacing: f64,
    reduction: Reduction,
) -> Vec<(PointState<S>, PointState<S>)> {
    let n = points.len();
    if reduction == Reduction::Homogeneous {
        return vec![(PointState::zero(), PointState::zero()); n];
    }
    let flat: Vec<[S; 2 * FIELD_COUNT]> = points
        .iter()
        .map(|p| {
            let mut x = [S::zero(); 2 * FIELD_COUNT];
            x[..FIELD_COUNT].copy_from_slice(&p.q.to_flat());
            x[FIELD_COUNT..].copy_from_slice(&p.qdot.to_flat());
            x
        })
        .collect();
    let mut d1 = vec![[S::zero(); 2 * FIELD_COUNT]; n];
    let mut d2 = vec![[S::zero(); 2 * FIELD_COUNT]; n];
    let mut column = vec![S::zero(); n];
    for slot in 0..2 * FIELD_COUNT {
        for i in 0..n {
            column[i] = flat[i][slot];
        }
        let (first, second) = crate::numeric::fd::periodic_derivatives(&column, spacing);
        for i in 0..n {
            d1[i][slot] = first[i];
            d2[i][slot] = second[i];
        }
    }
    let unpack = |x: &[S; 2 * FIELD_COUNT]| PointState {
        q: Fields::from_flat(&x[..FIELD_COUNT]),
        qdot: Fields::from_flat(&x[FIELD_COUNT..]),
    };
    d1.iter().zip(d2.iter()).map(|(a, b)| (unpack(a), unpack(b))).collect()
}
