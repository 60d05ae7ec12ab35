//! The 2x2 block with orthogonal rows used to split a row's residual mass
//! across two adjacent rows.
//!
//! A block for upper-row mass `x` and squared column norms `l`, `r` has
//! lower-row mass `y = l + r - x`. Its squared entries are
//!
//! ```text
//! [ x(x - r)/(x - y)   x(x - l)/(x - y) ]
//! [ y(x - l)/(x - y)   y(x - r)/(x - y) ]
//! ```
//!
//! with the single negative sign on the lower-right entry. `l - y` is
//! written as `x - r` so that the boundary case `r == x` yields exact zeros.

use crate::error::Error;
use crate::types::Tolerances;

const MASS_CONDITION: &str = "mass condition violated: left + right must be at least x";
const SIGN_CONDITION: &str =
    "sign condition violated: both squared norms must lie on the same side of x";
const EQUAL_MASS_CONDITION: &str =
    "equal row masses require both squared norms to equal x";
const NONPOSITIVE_X: &str = "upper-row mass x must be positive";

/// Inputs of a block: upper-row mass and the two squared column norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockSpec {
    pub x: f64,
    pub left_sq: f64,
    pub right_sq: f64,
}

impl BlockSpec {
    pub fn new(x: f64, left_sq: f64, right_sq: f64) -> Self {
        BlockSpec {
            x,
            left_sq,
            right_sq,
        }
    }

    /// Lower-row mass.
    pub fn y(&self) -> f64 {
        self.left_sq + self.right_sq - self.x
    }
}

/// Two columns over two adjacent rows: `(upper, lower)` entries each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block2x2 {
    pub left: (f64, f64),
    pub right: (f64, f64),
}

impl Block2x2 {
    pub fn upper_mass(&self) -> f64 {
        self.left.0 * self.left.0 + self.right.0 * self.right.0
    }

    pub fn lower_mass(&self) -> f64 {
        self.left.1 * self.left.1 + self.right.1 * self.right.1
    }

    /// Inner product of the two rows.
    pub fn row_inner(&self) -> f64 {
        self.left.0 * self.left.1 + self.right.0 * self.right.1
    }
}

enum Shape {
    EqualMass,
    General { dl: f64, dr: f64 },
}

fn classify(spec: &BlockSpec, tol: &Tolerances) -> Result<Shape, &'static str> {
    let BlockSpec {
        x,
        left_sq: l,
        right_sq: r,
    } = *spec;
    if !(x > 0.0) {
        return Err(NONPOSITIVE_X);
    }
    if tol.eq(2.0 * x, l + r) {
        return if tol.eq(l, x) && tol.eq(r, x) {
            Ok(Shape::EqualMass)
        } else {
            Err(EQUAL_MASS_CONDITION)
        };
    }
    if !tol.le(x, l + r) {
        return Err(MASS_CONDITION);
    }
    let snap = |d: f64, v: f64| if tol.eq(v, x) { 0.0 } else { d };
    let dl = snap(l - x, l);
    let dr = snap(r - x, r);
    if dl * dr < 0.0 {
        return Err(SIGN_CONDITION);
    }
    Ok(Shape::General { dl, dr })
}

/// Whether a block with orthogonal rows, upper-row mass `x` and squared
/// column norms `left_sq`, `right_sq` exists.
///
/// Boundary equality (`left_sq == x` or `right_sq == x`) is admitted: the
/// block then degenerates into two permuted singletons.
pub fn block_admissible(x: f64, left_sq: f64, right_sq: f64, tol: &Tolerances) -> bool {
    classify(&BlockSpec::new(x, left_sq, right_sq), tol).is_ok()
}

pub fn make_block(x: f64, left_sq: f64, right_sq: f64, tol: &Tolerances) -> Result<Block2x2, Error> {
    let spec = BlockSpec::new(x, left_sq, right_sq);
    let shape = classify(&spec, tol).map_err(|reason| Error::Inadmissible {
        x,
        left: left_sq,
        right: right_sq,
        reason,
    })?;
    Ok(match shape {
        Shape::EqualMass => {
            let s = (x / 2.0).sqrt();
            Block2x2 {
                left: (s, s),
                right: (s, -s),
            }
        }
        Shape::General { dl, dr } => {
            let y = spec.y();
            // x - y = (x - l) + (x - r), nonzero because the equal-mass case is excluded
            let denom = -(dl + dr);
            let root = |num: f64| (num / denom).max(0.0).sqrt();
            Block2x2 {
                left: (root(x * -dr), root(y * -dl)),
                right: (root(x * -dl), -root(y * -dr)),
            }
        }
    })
}
