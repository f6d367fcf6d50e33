use serde::{Deserialize, Serialize};

use super::domain::Domain;
use super::path::PathPolyline;
use crate::error::{Error, Result};

/// Closed polylines, one per independent homology class of a planar domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomologyBasis {
    cycles: Vec<PathPolyline>,
}

impl HomologyBasis {
    /// Validates closure, containment, cycle count against the first Betti
    /// number, and independence through the winding matrix about the holes.
    pub fn new(domain: &Domain, cycles: Vec<PathPolyline>) -> Result<Self> {
        let holes = domain.holes();
        if cycles.len() != domain.betti_number() {
            return Err(Error::InvalidInput(format!(
                "expected {} cycles for this domain, got {}",
                domain.betti_number(),
                cycles.len()
            )));
        }
        for c in &cycles {
            if !c.is_closed() {
                return Err(Error::InvalidInput("homology cycles must be closed".into()));
            }
            c.check_in(domain)?;
        }
        let windings: Vec<Vec<i64>> = cycles.iter().map(|c| holes.iter().map(|&h| c.winding_about(h)).collect()).collect();
        if !full_rank(&windings) {
            return Err(Error::InvalidInput("cycles are homologous or null-homologous".into()));
        }
        Ok(HomologyBasis { cycles })
    }

    /// The default basis of the domain (see [`Domain::default_cycles`]).
    pub fn standard(domain: &Domain) -> Result<Self> {
        Self::new(domain, domain.default_cycles(512))
    }

    pub fn cycles(&self) -> &[PathPolyline] {
        &self.cycles
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }
}

fn full_rank(rows: &[Vec<i64>]) -> bool {
    if rows.is_empty() {
        return true;
    }
    let m = nalgebra::DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j] as f64);
    m.rank(1e-9) == rows.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn annulus_basis_validates() {
        let d = Domain::annulus(0.5, 2.0).unwrap();
        assert_eq!(HomologyBasis::standard(&d).unwrap().len(), 1);
        let small = PathPolyline::circle(Complex64::new(1.0, 0.0), 0.2, 64);
        assert!(HomologyBasis::new(&d, vec![small]).is_err());
        assert!(HomologyBasis::new(&d, vec![]).is_err());
    }

    #[test]
    fn disc_basis_is_empty() {
        let d = Domain::disc(1.0).unwrap();
        assert!(HomologyBasis::standard(&d).unwrap().is_empty());
    }
}
