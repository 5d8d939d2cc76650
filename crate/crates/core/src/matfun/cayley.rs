use super::{identity, solve_right, RealMatrix};
use crate::error::{Error, Result};

fn require_square(x: &RealMatrix, what: &str) -> Result<()> {
    if x.is_square() {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "{what} needs a square matrix, got {}x{}",
            x.nrows(),
            x.ncols()
        )))
    }
}

/// Cayley transform `(I + X)(I − X)⁻¹`.
///
/// `I + X` and `(I − X)⁻¹` commute, so this is the same as `(I − X)⁻¹(I + X)`;
/// it is computed with a single right-division.
pub fn cay(x: &RealMatrix) -> Result<RealMatrix> {
    require_square(x, "cay")?;
    let eye = identity(x.nrows());
    solve_right(&(&eye + x), &(&eye - x), "I - X in Cayley transform")
}

/// Inverse Cayley transform `(M − I)(I + M)⁻¹`.
pub fn cay_inv(m: &RealMatrix) -> Result<RealMatrix> {
    require_square(m, "cay_inv")?;
    let eye = identity(m.nrows());
    solve_right(
        &(m - &eye),
        &(&eye + m),
        "I + M in inverse Cayley transform",
    )
}
