use serde::Serialize;

use crate::error::{Error, Result};

/// A named set of mode indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Party {
    pub name: String,
    /// Sorted, deduplicated 0-based mode indices.
    pub modes: Vec<usize>,
}

/// Disjoint named parties over the modes of a state.
///
/// Parties need not cover every mode; modes belonging to no party are traced
/// out by whichever criterion uses the partition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ModePartition {
    n_modes: usize,
    parties: Vec<Party>,
}

impl ModePartition {
    pub fn new<S, I>(n_modes: usize, parties: I) -> Result<Self>
    where
        S: Into<String>,
        I: IntoIterator<Item = (S, Vec<usize>)>,
    {
        let mut owner: Vec<Option<usize>> = vec![None; n_modes];
        let mut out: Vec<Party> = Vec::new();
        for (idx, (name, mut modes)) in parties.into_iter().enumerate() {
            let name = name.into();
            if out.iter().any(|p| p.name == name) {
                return Err(Error::InvalidPartition(format!(
                    "party name {name:?} repeated"
                )));
            }
            if modes.is_empty() {
                return Err(Error::InvalidPartition(format!(
                    "party {name:?} has no modes"
                )));
            }
            modes.sort_unstable();
            if modes.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidPartition(format!(
                    "party {name:?} lists a mode twice"
                )));
            }
            for &m in &modes {
                if m >= n_modes {
                    return Err(Error::InvalidPartition(format!(
                        "mode {m} of party {name:?} out of range for {n_modes} modes"
                    )));
                }
                if let Some(prev) = owner[m] {
                    return Err(Error::InvalidPartition(format!(
                        "mode {m} shared by parties {:?} and {name:?}",
                        out[prev].name
                    )));
                }
                owner[m] = Some(idx);
            }
            out.push(Party { name, modes });
        }
        if out.is_empty() {
            return Err(Error::InvalidPartition("no parties".into()));
        }
        Ok(ModePartition {
            n_modes,
            parties: out,
        })
    }

    /// Two parties named `A` and `B`.
    pub fn bipartite(n_modes: usize, a: &[usize], b: &[usize]) -> Result<Self> {
        Self::new(n_modes, [("A", a.to_vec()), ("B", b.to_vec())])
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn parties(&self) -> &[Party] {
        &self.parties
    }

    pub fn party(&self, name: &str) -> Result<&Party> {
        self.parties
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::InvalidPartition(format!("no party named {name:?}")))
    }

    /// The two parties of a bipartition, in declaration order.
    pub fn as_bipartite(&self) -> Result<(&Party, &Party)> {
        match self.parties.as_slice() {
            [a, b] => Ok((a, b)),
            _ => Err(Error::InvalidPartition(format!(
                "expected two parties, found {}",
                self.parties.len()
            ))),
        }
    }
}

/// Quadrature indices (x, p interleaved) for a list of modes.
pub fn quadratures(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_party_modes() {
        let p = ModePartition::new(4, [("A", vec![2, 0]), ("B", vec![3])]).unwrap();
        assert_eq!(p.party("A").unwrap().modes, vec![0, 2]);
        assert!(p.party("C").is_err());
    }

    #[test]
    fn rejects_overlap_and_range() {
        assert!(ModePartition::bipartite(3, &[0, 1], &[1]).is_err());
        assert!(ModePartition::bipartite(2, &[0], &[2]).is_err());
        assert!(ModePartition::bipartite(2, &[], &[1]).is_err());
        assert!(ModePartition::new(2, [("A", vec![0]), ("A", vec![1])]).is_err());
        assert!(ModePartition::new(2, [("A", vec![0, 0])]).is_err());
    }

    #[test]
    fn bipartite_view() {
        let p = ModePartition::bipartite(3, &[0], &[1, 2]).unwrap();
        let (a, b) = p.as_bipartite().unwrap();
        assert_eq!((a.name.as_str(), b.modes.len()), ("A", 2));
        let t = ModePartition::new(3, [("A", vec![0]), ("B", vec![1]), ("E", vec![2])]).unwrap();
        assert!(t.as_bipartite().is_err());
    }

    #[test]
    fn quadrature_layout() {
        assert_eq!(quadratures(&[0, 2]), vec![0, 1, 4, 5]);
    }
}
