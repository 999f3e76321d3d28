//! Explicit straight-line evaluation of a geometric matrix polynomial.
//!
//! A [`PolyDag`] computes products of linear combinations of previously
//! computed powers of `Y`, then applies the final combination to `X`. Each
//! product costs one `mmm`; the final application costs one more. The
//! polynomial a DAG computes is checked symbolically at construction, so a
//! DAG can only be built if it really evaluates `Σ_{j<order} Yʲ X`.

use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::{mul, Matrix, MulCounter};

/// `c·I + Σ cᵢ·Rᵢ`, where register 0 holds `Y` and register `k ≥ 1` holds
/// the result of product `k − 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinComb {
    identity: i32,
    terms: Vec<(usize, i32)>,
}

impl LinComb {
    pub fn new(identity: i32, terms: &[(usize, i32)]) -> Self {
        Self {
            identity,
            terms: terms.to_vec(),
        }
    }

    /// Single register with unit coefficient.
    pub fn reg(r: usize) -> Self {
        Self::new(0, &[(r, 1)])
    }

    fn max_register(&self) -> Option<usize> {
        self.terms.iter().map(|&(r, _)| r).max()
    }

    fn eval(&self, regs: &[Matrix]) -> Matrix {
        let dim = regs[0].dim();
        let mut acc = Matrix::zeros(dim).add_identity(self.identity as f64);
        for &(r, c) in &self.terms {
            acc = &acc + &regs[r].scale(c as f64);
        }
        acc
    }

    fn symbolic(&self, regs: &[Vec<i64>]) -> Vec<i64> {
        let mut acc = vec![self.identity as i64];
        for &(r, c) in &self.terms {
            add_scaled(&mut acc, &regs[r], c as i64);
        }
        acc
    }
}

fn add_scaled(acc: &mut Vec<i64>, p: &[i64], c: i64) {
    if acc.len() < p.len() {
        acc.resize(p.len(), 0);
    }
    for (a, b) in acc.iter_mut().zip(p) {
        *a += c * b;
    }
}

fn poly_mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn trim(mut p: Vec<i64>) -> Vec<i64> {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyDag {
    name: String,
    order: usize,
    products: Vec<(LinComb, LinComb)>,
    output: LinComb,
}

impl PolyDag {
    /// Builds a DAG and checks that it evaluates `Σ_{j<order} Yʲ X`.
    pub fn new(
        name: impl Into<String>,
        order: usize,
        products: Vec<(LinComb, LinComb)>,
        output: LinComb,
    ) -> Result<Self> {
        let name = name.into();
        let mut regs: Vec<Vec<i64>> = vec![vec![0, 1]];
        for (k, (l, r)) in products.iter().enumerate() {
            let limit = k + 1;
            if l.max_register().is_some_and(|m| m >= limit)
                || r.max_register().is_some_and(|m| m >= limit)
            {
                return Err(Error::MalformedPlan(format!(
                    "{name}: product {k} reads a register that is not yet computed"
                )));
            }
            regs.push(trim(poly_mul(&l.symbolic(&regs), &r.symbolic(&regs))));
        }
        if output.max_register().is_some_and(|m| m > products.len()) {
            return Err(Error::MalformedPlan(format!(
                "{name}: output reads an unknown register"
            )));
        }
        let got = trim(output.symbolic(&regs));
        if order == 0 || got != vec![1; order] {
            return Err(Error::MalformedPlan(format!(
                "{name}: evaluates coefficients {got:?}, not a geometric sum of order {order}"
            )));
        }
        Ok(Self {
            name,
            order,
            products,
            output,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Products with `Y` supplied.
    pub fn poly_cost(&self) -> u64 {
        self.products.len() as u64 + 1
    }

    pub(crate) fn eval(&self, y: &Matrix, x: &Matrix, ctr: &mut MulCounter) -> Matrix {
        let mut regs = vec![y.clone()];
        for (l, r) in &self.products {
            let p = mul(&l.eval(&regs), &r.eval(&regs), ctr);
            regs.push(p);
        }
        mul(&self.output.eval(&regs), x, ctr)
    }
}

impl fmt::Display for PolyDag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

const Y: usize = 0;

/// `(I + (Y + Y²)(I + Y²)) X`: order 5 with two products.
pub fn quartic() -> PolyDag {
    PolyDag::new(
        "quartic",
        5,
        vec![
            (LinComb::reg(Y), LinComb::reg(Y)),
            (LinComb::new(0, &[(Y, 1), (1, 1)]), LinComb::new(1, &[(1, 1)])),
        ],
        LinComb::new(1, &[(2, 1)]),
    )
    .expect("quartic DAG is well formed")
}

/// `(I + Y + Y² + Y²(Y + Y²)) X`.
pub fn order5_chain() -> PolyDag {
    PolyDag::new(
        "t5",
        5,
        vec![
            (LinComb::reg(Y), LinComb::reg(Y)),
            (LinComb::reg(1), LinComb::new(0, &[(Y, 1), (1, 1)])),
        ],
        LinComb::new(1, &[(Y, 1), (1, 1), (2, 1)]),
    )
    .expect("t5 DAG is well formed")
}

/// `(I + (Y + Y⁴)(I + Y + Y²)) X`.
pub fn order7() -> PolyDag {
    PolyDag::new(
        "t7",
        7,
        vec![
            (LinComb::reg(Y), LinComb::reg(Y)),
            (LinComb::reg(1), LinComb::reg(1)),
            (
                LinComb::new(0, &[(Y, 1), (2, 1)]),
                LinComb::new(1, &[(Y, 1), (1, 1)]),
            ),
        ],
        LinComb::new(1, &[(3, 1)]),
    )
    .expect("t7 DAG is well formed")
}

/// `(I + Y⁴)(I + Y²)(I + Y) X`, reusing `Y²` to form `Y⁴`.
pub fn order8() -> PolyDag {
    PolyDag::new(
        "t8",
        8,
        vec![
            (LinComb::reg(Y), LinComb::reg(Y)),
            (LinComb::reg(1), LinComb::reg(1)),
            (LinComb::new(1, &[(1, 1)]), LinComb::new(1, &[(Y, 1)])),
            (LinComb::new(1, &[(2, 1)]), LinComb::reg(3)),
        ],
        LinComb::reg(4),
    )
    .expect("t8 DAG is well formed")
}

/// `(I + (I + Y⁴)(I + Y²)(Y + Y²)) X`.
pub fn order9() -> PolyDag {
    PolyDag::new(
        "t9",
        9,
        vec![
            (LinComb::reg(Y), LinComb::reg(Y)),
            (LinComb::reg(1), LinComb::reg(1)),
            (LinComb::new(1, &[(1, 1)]), LinComb::new(0, &[(Y, 1), (1, 1)])),
            (LinComb::new(1, &[(2, 1)]), LinComb::reg(3)),
        ],
        LinComb::new(1, &[(4, 1)]),
    )
    .expect("t9 DAG is well formed")
}

/// `(I + Y(I + (Y² + Y⁴)(I + Y⁴))(I + Y)) X` with `Y(I + Y)` folded into `Y + Y²`.
pub fn order11() -> PolyDag {
    PolyDag::new(
        "t11",
        11,
        vec![
            (LinComb::reg(Y), LinComb::reg(Y)),
            (LinComb::reg(1), LinComb::reg(1)),
            (LinComb::new(0, &[(1, 1), (2, 1)]), LinComb::new(1, &[(2, 1)])),
            (LinComb::new(1, &[(3, 1)]), LinComb::new(0, &[(Y, 1), (1, 1)])),
        ],
        LinComb::new(1, &[(4, 1)]),
    )
    .expect("t11 DAG is well formed")
}

/// `(I + (Y + Y²)(I + Y² + Y⁴)(I + Y⁶ + Y¹²)) X`.
pub fn order19() -> PolyDag {
    PolyDag::new(
        "t19",
        19,
        vec![
            (LinComb::reg(Y), LinComb::reg(Y)),         // r1 = Y²
            (LinComb::reg(1), LinComb::reg(1)),         // r2 = Y⁴
            (LinComb::reg(1), LinComb::reg(2)),         // r3 = Y⁶
            (LinComb::reg(3), LinComb::reg(3)),         // r4 = Y¹²
            (
                LinComb::new(0, &[(Y, 1), (1, 1)]),
                LinComb::new(1, &[(1, 1), (2, 1)]),
            ),
            (LinComb::reg(5), LinComb::new(1, &[(3, 1), (4, 1)])),
        ],
        LinComb::new(1, &[(6, 1)]),
    )
    .expect("t19 DAG is well formed")
}

/// Explicit DAGs available as leaves to the plan search.
pub fn library() -> Vec<PolyDag> {
    vec![
        quartic(),
        order5_chain(),
        order7(),
        order8(),
        order9(),
        order11(),
        order19(),
    ]
}
