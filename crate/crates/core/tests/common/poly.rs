//! Multivariate Laurent polynomials over ℚ in the variables (m, ℓ, c1, c2),
//! used as an independent symbolic oracle for the 4₁ face matrix.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use oneloop_core::scalars::Scalar;

pub const M: usize = 0;
pub const L: usize = 1;
pub const C1: usize = 2;
pub const C2: usize = 3;
const NAMES: [&str; 4] = ["m", "l", "c1", "c2"];

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly(pub BTreeMap<[i32; 4], BigRational>);

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(n: i64, d: i64) -> Self {
        Poly::term(n, d, [0; 4])
    }

    pub fn term(n: i64, d: i64, exp: [i32; 4]) -> Self {
        let mut p = Poly::zero();
        p.push(exp, BigRational::new(BigInt::from(n), BigInt::from(d)));
        p
    }

    pub fn var(v: usize, k: i32) -> Self {
        let mut e = [0; 4];
        e[v] = k;
        Poly::term(1, 1, e)
    }

    fn push(&mut self, exp: [i32; 4], c: BigRational) {
        let slot = self.0.entry(exp).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.0.remove(&exp);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Poly::constant(1, 1), |acc, _| acc * self.clone())
    }

    /// Value at `(m, ℓ, c1, c2)`.
    pub fn eval<S: Scalar>(&self, ctx: &S::Ctx, at: &[S; 4]) -> S {
        self.0.iter().fold(S::zero(ctx), |acc, (exp, c)| {
            let mono = (0..4).fold(S::from_rational(ctx, c), |m, v| m * at[v].powi(exp[v] as i64).expect("unit"));
            acc + mono
        })
    }

    /// Determinant by Leibniz expansion.
    pub fn det(m: &[Vec<Poly>]) -> Poly {
        let n = m.len();
        let mut total = Poly::zero();
        let mut perm: Vec<usize> = (0..n).collect();
        permutations(&mut perm, 0, &mut |p| {
            let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            let prod = (0..n).fold(Poly::constant(1, 1), |acc, i| acc * m[i][p[i]].clone());
            total = if inversions % 2 == 0 { total.clone() + prod } else { total.clone() - prod };
        });
        total
    }

    /// Substitutes a polynomial for variable `v`, which must occur with
    /// non-negative exponents only.
    pub fn substitute(&self, v: usize, value: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in &self.0 {
            assert!(e[v] >= 0, "negative power of the substituted variable");
            let mut rest = *e;
            rest[v] = 0;
            let mut head = Poly::zero();
            head.push(rest, c.clone());
            out = out + head * value.pow(e[v] as u32);
        }
        out
    }

    pub fn min_exp(&self, v: usize) -> i32 {
        self.0.keys().map(|e| e[v]).min().unwrap_or(0)
    }

    pub fn max_exp(&self, v: usize) -> i32 {
        self.0.keys().map(|e| e[v]).max().unwrap_or(0)
    }

    /// Remainder on division by `p` in the variable `v`; the leading
    /// coefficient of `p` in `v` must be a monomial.
    pub fn rem(&self, p: &Poly, v: usize) -> Poly {
        let top = p.max_exp(v);
        let lead: Vec<(&[i32; 4], &BigRational)> = p.0.iter().filter(|(e, _)| e[v] == top).collect();
        assert_eq!(lead.len(), 1, "leading coefficient must be a monomial");
        let (le, lc) = (*lead[0].0, lead[0].1.clone());
        let mut r = self.clone();
        while !r.is_zero() && r.max_exp(v) >= top {
            let d = r.max_exp(v);
            let (e, c) = r.0.iter().find(|(e, _)| e[v] == d).map(|(e, c)| (*e, c.clone())).expect("term");
            let mut q = [0; 4];
            for i in 0..4 {
                q[i] = e[i] - le[i];
            }
            let mut quot = Poly::zero();
            quot.push(q, c / lc.clone());
            r = r - quot * p.clone();
        }
        r
    }
}

fn permutations(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        f(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permutations(p, k + 1, f);
        p.swap(k, i);
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        for (e, c) in rhs.0 {
            self.push(e, c);
        }
        self
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly(self.0.into_iter().map(|(e, c)| (e, -c)).collect())
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        self + (-rhs)
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        let mut out = Poly::zero();
        for (e1, c1) in &self.0 {
            for (e2, c2) in &rhs.0 {
                out.push(std::array::from_fn(|i| e1[i] + e2[i]), c1.clone() * c2.clone());
            }
        }
        out
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (e, c)) in self.0.iter().enumerate() {
            let sign = if c < &BigRational::zero() { "-" } else if i > 0 { "+" } else { "" };
            let a = c.abs();
            let vars: Vec<String> = (0..4)
                .filter(|&v| e[v] != 0)
                .map(|v| if e[v] == 1 { NAMES[v].to_string() } else { format!("{}^{}", NAMES[v], e[v]) })
                .collect();
            let sep = if i > 0 { " " } else { "" };
            if vars.is_empty() {
                write!(f, "{sep}{sign}{a}")?;
            } else if a.is_one() {
                write!(f, "{sep}{sign}{}", vars.join("*"))?;
            } else {
                write!(f, "{sep}{sign}{a}*{}", vars.join("*"))?;
            }
        }
        Ok(())
    }
}

/// The reference 4₁ face matrix, columns θ1..θ4.
pub fn reference_face_matrix() -> Vec<Vec<Poly>> {
    let v = Poly::var;
    let z = Poly::zero;
    vec![
        vec![v(M, -2) * v(C2, 1), v(C1, 1), z(), -(v(M, -1) * v(C2, 1))],
        vec![v(C1, 1), v(L, -1) * v(M, -2) * v(C2, 1), -(v(M, -1) * v(C2, 1)), z()],
        vec![-v(C2, 1), v(C1, 1), v(C2, 1), z()],
        vec![v(L, 1) * v(C1, 1), -v(C2, 1), z(), v(C2, 1)],
    ]
}

/// `2·c1·c2³·m⁻²·(m + m⁻¹ − 1)`.
pub fn expected_det() -> Poly {
    let v = Poly::var;
    Poly::constant(2, 1) * v(C1, 1) * v(C2, 3) * v(M, -2) * (v(M, 1) + v(M, -1) - Poly::constant(1, 1))
}

/// Reduces `p` modulo the θ-free relations
/// `c2² − ℓm⁴c1² + ℓm²c1c2 = 0` and `c1² − ℓ⁻¹c2² + ℓ⁻¹c1c2 = 0`.
///
/// The second relation gives `ℓ = (c2² − c1c2)/c1²`; substituting turns the
/// first into `(c2/c1)·P` with `P = m⁴c1² + (1 − m² − m⁴)c1c2 + m²c2²`, whose
/// leading coefficient in c2 is the unit m².  The result is the remainder
/// modulo P after clearing negative powers of ℓ and c2, which are units.
pub fn reduce_mod_relations(p: &Poly) -> Poly {
    let v = Poly::var;
    let shift_l = (-p.min_exp(L)).max(0);
    let lp = p.clone() * v(L, shift_l);
    let l_value = (v(C2, 2) - v(C1, 1) * v(C2, 1)) * v(C1, -2);
    let mut q = lp.substitute(L, &l_value);
    let shift_c2 = (-q.min_exp(C2)).max(0);
    q = q * v(C2, shift_c2);
    let rel = v(M, 4) * v(C1, 2)
        + (Poly::constant(1, 1) - v(M, 2) - v(M, 4)) * v(C1, 1) * v(C2, 1)
        + v(M, 2) * v(C2, 2);
    q.rem(&rel, C2)
}
