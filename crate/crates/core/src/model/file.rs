use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LatticeModel, Potential1D, Segment};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ContinuumSpec {
    segments: Vec<[f64; 3]>,
}

fn unit_hopping() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeSpec {
    onsite: Vec<f64>,
    #[serde(default)]
    intra_hopping: Vec<f64>,
    #[serde(rename = "J", default = "unit_hopping")]
    j: f64,
    #[serde(rename = "gL")]
    g_left: f64,
    #[serde(rename = "gR")]
    g_right: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Document {
    Continuum(ContinuumSpec),
    Lattice(LatticeSpec),
}

/// A model loaded from a JSON model file.
///
/// ```json
/// {"continuum": {"segments": [[-1.0, 1.0, -1.0]]}}
/// {"lattice": {"onsite": [1.0], "intra_hopping": [], "J": 1.0, "gL": 1.0, "gR": 1.0}}
/// ```
#[derive(Debug, Clone, PartialEq)]
pub enum ModelFile {
    Continuum(Potential1D),
    Lattice(LatticeModel),
}

impl ModelFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Document = serde_json::from_str(text)?;
        match doc {
            Document::Continuum(c) => {
                let segments = c
                    .segments
                    .into_iter()
                    .map(|[xl, xr, v]| Segment::new(xl, xr, v))
                    .collect();
                Ok(ModelFile::Continuum(Potential1D::new(segments)?))
            }
            Document::Lattice(l) => Ok(ModelFile::Lattice(LatticeModel::new(
                l.onsite,
                l.intra_hopping,
                l.j,
                (l.g_left, l.g_right),
            )?)),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Canonical JSON form, stable across runs (used for hashing).
    pub fn to_canonical_json(&self) -> String {
        let doc = match self {
            ModelFile::Continuum(p) => Document::Continuum(ContinuumSpec {
                segments: p.segments().iter().map(|s| [s.x_left, s.x_right, s.v]).collect(),
            }),
            ModelFile::Lattice(m) => Document::Lattice(LatticeSpec {
                onsite: m.onsite().to_vec(),
                intra_hopping: m.intra_hopping().to_vec(),
                j: m.lead_hopping(),
                g_left: m.coupling().0,
                g_right: m.coupling().1,
            }),
        };
        serde_json::to_string(&doc).expect("model documents always serialize")
    }

    pub fn continuum(&self) -> Result<&Potential1D> {
        match self {
            ModelFile::Continuum(p) => Ok(p),
            ModelFile::Lattice(_) => Err(Error::InvalidModel("expected a continuum model".into())),
        }
    }

    pub fn lattice(&self) -> Result<&LatticeModel> {
        match self {
            ModelFile::Lattice(m) => Ok(m),
            ModelFile::Continuum(_) => Err(Error::InvalidModel("expected a lattice model".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_kinds() {
        let c = ModelFile::from_json(r#"{"continuum": {"segments": [[-1, 1, -1]]}}"#).unwrap();
        assert_eq!(c.continuum().unwrap().potential_at(0.0), -1.0);
        let l = ModelFile::from_json(
            r#"{"lattice": {"onsite": [1.0], "intra_hopping": [], "J": 1.0, "gL": 1.0, "gR": 0.5}}"#,
        )
        .unwrap();
        assert_eq!(l.lattice().unwrap().coupling(), (1.0, 0.5));
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(ModelFile::from_json(r#"{"continuum": {"segments": [], "extra": 1}}"#).is_err());
        assert!(ModelFile::from_json(r#"{"spheres": {}}"#).is_err());
        assert!(ModelFile::from_json(
            r#"{"continuum": {"segments": []}, "lattice": {"onsite": [0], "gL": 1, "gR": 1}}"#
        )
        .is_err());
        assert!(ModelFile::from_json(
            r#"{"lattice": {"onsite": [0], "gL": 1, "gR": 1, "t": 2}}"#
        )
        .is_err());
    }

    #[test]
    fn canonical_round_trip() {
        let text = r#"{"lattice": {"onsite": [0.0, 0.0], "intra_hopping": [1.0], "gL": 0.3, "gR": 0.3}}"#;
        let m = ModelFile::from_json(text).unwrap();
        let again = ModelFile::from_json(&m.to_canonical_json()).unwrap();
        assert_eq!(m, again);
        assert_eq!(m.to_canonical_json(), again.to_canonical_json());
    }
}
