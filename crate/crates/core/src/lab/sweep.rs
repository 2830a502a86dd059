//! Seeded random sampling of admissible parameter tuples.

use crate::error::Result;
use crate::exponents::{
    check_admissibility, sharp_exponents, EquationClass, EquationParams, HomogeneousExponent, RegularityReport,
    SourceIntegrability,
};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tuple {
    pub params: EquationParams,
    pub integ: SourceIntegrability,
}

/// Every admissibility condition holds with at least this slack, so finite
/// differences of the exponents are not drowned by roundoff next to the borderline.
pub const SLACK: f64 = 1e-3;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn draw_reciprocal(rng: &mut ChaCha8Rng) -> f64 {
    // 1/q and 1/r; a tenth of the draws are the endpoint ∞
    if rng.gen_bool(0.1) {
        0.0
    } else {
        rng.gen_range(0.0..1.0)
    }
}

fn with_slack(verdict_lhs: &[(f64, f64, bool)]) -> bool {
    verdict_lhs.iter().all(|&(lhs, threshold, less)| {
        if less {
            lhs < threshold - SLACK
        } else {
            lhs > threshold + SLACK
        }
    })
}

/// Draw one admissible tuple of the class. `dims` restricts the dimension.
pub fn sample_tuple(class: EquationClass, dims: &[usize], rng: &mut ChaCha8Rng) -> Tuple {
    loop {
        let n = dims[rng.gen_range(0..dims.len())];
        let p = match class {
            EquationClass::PParabolic | EquationClass::DoublyNonlinear => rng.gen_range(2.05..8.0),
            _ => 2.0,
        };
        let m = match class {
            EquationClass::Pme | EquationClass::DoublyNonlinear => rng.gen_range(1.05..5.0),
            _ => 1.0,
        };
        let (iq, ir) = (draw_reciprocal(rng), draw_reciprocal(rng));
        if iq == 0.0 && ir == 0.0 && class != EquationClass::Pme {
            continue;
        }
        let q = if iq == 0.0 { f64::INFINITY } else { 1.0 / iq };
        let r = if ir == 0.0 { f64::INFINITY } else { 1.0 / ir };
        if !(q > 1.0 && r > 1.0) {
            continue;
        }
        let Ok(params) = EquationParams::new(class, p, m, n) else {
            continue;
        };
        let integ = SourceIntegrability { q, r };
        let verdict = check_admissibility(&params, &integ);
        let conditions: Vec<(f64, f64, bool)> = verdict
            .evaluated
            .iter()
            .map(|c| (c.lhs, c.threshold, c.relation == crate::exponents::Relation::LessThan))
            .collect();
        if verdict.admissible && with_slack(&conditions) {
            return Tuple { params, integ };
        }
    }
}

pub fn sample_tuples(class: EquationClass, dims: &[usize], count: usize, seed: u64) -> Vec<Tuple> {
    let mut r = rng(seed);
    (0..count).map(|_| sample_tuple(class, dims, &mut r)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tuple: Tuple,
    pub report: RegularityReport,
}

/// Exponents for `count` seeded admissible tuples. Without `homogeneous`, porous medium
/// tuples stay one-dimensional and doubly nonlinear ones fail for lack of `α_*`.
pub fn exponent_sweep(class: EquationClass, count: usize, seed: u64, homogeneous: Option<f64>) -> Result<Vec<SweepRow>> {
    let dims: &[usize] = match (class, homogeneous) {
        (EquationClass::Pme | EquationClass::DoublyNonlinear, None) => &[1],
        _ => &[1, 2, 3],
    };
    let hom = homogeneous.map(HomogeneousExponent::assumed).transpose()?;
    sample_tuples(class, dims, count, seed)
        .into_iter()
        .map(|tuple| {
            let report = sharp_exponents(&tuple.params, &tuple.integ, hom)?;
            Ok(SweepRow { tuple, report })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_admissible() {
        let a = sample_tuples(EquationClass::PParabolic, &[1, 2, 3], 200, 7);
        let b = sample_tuples(EquationClass::PParabolic, &[1, 2, 3], 200, 7);
        assert_eq!(a, b);
        assert!(a.iter().all(|t| check_admissibility(&t.params, &t.integ).admissible));
        assert!(a.iter().any(|t| t.integ.r.is_infinite()));
    }

    #[test]
    fn sweeps_every_class() {
        for class in [
            EquationClass::Heat,
            EquationClass::PParabolic,
            EquationClass::Pme,
            EquationClass::DoublyNonlinear,
        ] {
            let hom = (class == EquationClass::DoublyNonlinear).then_some(0.8);
            let rows = exponent_sweep(class, 50, 3, hom).unwrap();
            assert_eq!(rows.len(), 50);
        }
        assert!(matches!(
            exponent_sweep(EquationClass::DoublyNonlinear, 5, 3, None),
            Err(crate::Error::MissingHomogeneousExponent { .. })
        ));
    }
}
