//! Non-negative solvability of `a0 + sum n_k a_k = b0 + sum m_k b_k`.

use crate::error::{Error, Result};
use crate::summary_mwdg::ConeTuple;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SolvabilityInstance {
    pub lhs: ConeTuple,
    pub rhs: ConeTuple,
}

/// Which of the five exhaustive situations an instance falls into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Case {
    /// Both sides fixed.
    BothFixed,
    /// Left side fixed, right side free, `c > 0`.
    LeftFixed,
    /// One side fixed and `c` of the wrong sign, or `c == 0`.
    Degenerate,
    /// Right side fixed, left side free, `c < 0`.
    RightFixed,
    /// Both sides free.
    BothFree,
}

impl Case {
    /// Cases decided by arithmetic alone, without a search.
    pub fn is_cheap(self) -> bool {
        !matches!(self, Case::LeftFixed | Case::RightFixed)
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn gcd_all(xs: &[u64]) -> u64 {
    xs.iter().fold(0, |g, &x| gcd(g, x))
}

impl SolvabilityInstance {
    pub fn new(lhs: ConeTuple, rhs: ConeTuple) -> Self {
        Self { lhs, rhs }
    }

    /// `a0 - b0`, checked.
    pub fn c(&self) -> Result<i64> {
        let a = i64::try_from(self.lhs.a0).map_err(|_| Error::Overflow)?;
        let b = i64::try_from(self.rhs.a0).map_err(|_| Error::Overflow)?;
        a.checked_sub(b).ok_or(Error::Overflow)
    }

    pub fn g_a(&self) -> Option<u64> {
        (!self.lhs.coeffs.is_empty()).then(|| gcd_all(&self.lhs.coeffs))
    }

    pub fn g_b(&self) -> Option<u64> {
        (!self.rhs.coeffs.is_empty()).then(|| gcd_all(&self.rhs.coeffs))
    }

    pub fn case(&self) -> Result<Case> {
        let c = self.c()?;
        let (mu, nu) = (self.lhs.coeffs.len(), self.rhs.coeffs.len());
        Ok(match (mu, nu) {
            (0, 0) => Case::BothFixed,
            (0, _) if c > 0 => Case::LeftFixed,
            (_, 0) if c < 0 => Case::RightFixed,
            (0, _) | (_, 0) => Case::Degenerate,
            _ => Case::BothFree,
        })
    }
}

pub fn has_nonneg_solution(inst: &SolvabilityInstance) -> Result<bool> {
    if inst.lhs.coeffs.contains(&0) || inst.rhs.coeffs.contains(&0) {
        let drop = |t: &ConeTuple| ConeTuple::new(t.a0, t.coeffs.iter().copied().filter(|&a| a > 0).collect());
        return has_nonneg_solution(&SolvabilityInstance::new(drop(&inst.lhs), drop(&inst.rhs)));
    }
    let c = inst.c()?;
    Ok(match inst.case()? {
        Case::BothFixed | Case::Degenerate => c == 0,
        Case::LeftFixed => one_sided(c.unsigned_abs(), &inst.rhs.coeffs)?,
        Case::RightFixed => one_sided(c.unsigned_abs(), &inst.lhs.coeffs)?,
        Case::BothFree => {
            let g = gcd(inst.g_a().unwrap(), inst.g_b().unwrap());
            c.unsigned_abs() % g == 0
        }
    })
}

/// Whether `c > 0` is a non-negative combination of `coeffs`, trying the
/// Frobenius-bound shortcut before the table.
fn one_sided(c: u64, coeffs: &[u64]) -> Result<bool> {
    if let Some(answer) = shortcut(c, coeffs)? {
        return Ok(answer);
    }
    bounded_representable(c, coeffs)
}

/// `Some(answer)` when the gcd test or the Frobenius bound decides alone.
pub fn shortcut(c: u64, coeffs: &[u64]) -> Result<Option<bool>> {
    let g = gcd_all(coeffs);
    if g == 0 {
        return Err(Error::EmptyList);
    }
    if !c.is_multiple_of(g) {
        return Ok(Some(false));
    }
    let reduced: Vec<u64> = coeffs.iter().map(|a| a / g).collect();
    let bound = g.checked_mul(frobenius_upper_bound(&reduced)?).ok_or(Error::Overflow)?;
    Ok((c >= bound).then_some(true))
}

/// `(min - 1) * (max - 1)`.
pub fn frobenius_upper_bound(ds: &[u64]) -> Result<u64> {
    let min = *ds.iter().min().ok_or(Error::EmptyList)?;
    let max = *ds.iter().max().unwrap();
    if min == 0 {
        return Err(Error::Invalid("zero coefficient".into()));
    }
    (min - 1).checked_mul(max - 1).ok_or(Error::Overflow)
}

/// Reachable-sums table over `0..=c`.
pub fn bounded_representable(c: u64, coeffs: &[u64]) -> Result<bool> {
    if coeffs.is_empty() {
        return Err(Error::EmptyList);
    }
    let n = usize::try_from(c).map_err(|_| Error::Overflow)?;
    let mut reach = vec![false; n + 1];
    reach[0] = true;
    for x in 1..=n {
        reach[x] = coeffs.iter().any(|&a| {
            let a = a as usize;
            a >= 1 && a <= x && reach[x - a]
        });
    }
    Ok(reach[n])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(a0: u64, a: &[u64], b0: u64, b: &[u64]) -> SolvabilityInstance {
        SolvabilityInstance::new(ConeTuple::new(a0, a.to_vec()), ConeTuple::new(b0, b.to_vec()))
    }

    #[test]
    fn worked_instances() {
        let i = inst(0, &[2, 3], 1, &[2, 3]);
        assert_eq!(i.case().unwrap(), Case::BothFree);
        assert!(has_nonneg_solution(&i).unwrap());
        assert!(has_nonneg_solution(&inst(5, &[], 5, &[])).unwrap());
        assert!(!has_nonneg_solution(&inst(5, &[], 6, &[])).unwrap());
        assert!(!has_nonneg_solution(&inst(7, &[], 0, &[2, 4])).unwrap());
        assert!(has_nonneg_solution(&inst(8, &[], 0, &[2, 4])).unwrap());
    }

    #[test]
    fn degenerate_and_mirrored() {
        // fixed left below the right cone's apex
        assert_eq!(inst(1, &[], 4, &[3]).case().unwrap(), Case::Degenerate);
        assert!(!has_nonneg_solution(&inst(1, &[], 4, &[3])).unwrap());
        assert!(has_nonneg_solution(&inst(4, &[], 4, &[3])).unwrap());
        assert_eq!(inst(0, &[3, 5], 11, &[]).case().unwrap(), Case::RightFixed);
        assert!(has_nonneg_solution(&inst(0, &[3, 5], 11, &[])).unwrap());
        assert!(!has_nonneg_solution(&inst(0, &[3, 5], 7, &[])).unwrap());
        assert!(!has_nonneg_solution(&inst(1, &[4, 6], 0, &[2])).unwrap());
    }

    #[test]
    fn frobenius_bounds() {
        assert_eq!(frobenius_upper_bound(&[2, 3]).unwrap(), 2);
        assert_eq!(frobenius_upper_bound(&[1, 9]).unwrap(), 0);
        assert_eq!(frobenius_upper_bound(&[3, 5, 7]).unwrap(), 12);
        assert!(matches!(frobenius_upper_bound(&[]), Err(Error::EmptyList)));
    }

    #[test]
    fn table_search() {
        assert!(!bounded_representable(7, &[2, 4]).unwrap());
        assert!(bounded_representable(3, &[3, 7]).unwrap());
        assert!(bounded_representable(11, &[3, 5]).unwrap());
        assert!(!bounded_representable(7, &[3, 5]).unwrap());
    }

    #[test]
    fn overflow_is_reported() {
        let i = inst(u64::MAX, &[], 0, &[]);
        assert!(matches!(has_nonneg_solution(&i), Err(Error::Overflow)));
    }
}
