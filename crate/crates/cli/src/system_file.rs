use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use stab_core::canonical::{Domain, LtiSystem};
use stab_core::regions::{GainSubspace, Instance, InstanceId};
use stab_core::{Error, RealMatrix, Result};

/// On-disk description of a plant and, optionally, a structured gain family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemFile {
    #[serde(rename = "A")]
    pub a: RealMatrix,
    #[serde(rename = "B")]
    pub b: RealMatrix,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<RealMatrix>,
    pub domain: Domain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspace: Option<GainSubspace>,
    /// Known boundary values on the first parameter axis, drawn in SVG output.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ticks: Vec<f64>,
}

impl SystemFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let file: SystemFile = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        file.system()?;
        Ok(file)
    }

    pub fn system(&self) -> Result<LtiSystem> {
        LtiSystem::new(self.a.clone(), self.b.clone(), self.c.clone(), self.domain)
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let ticks = match &inst.id {
            InstanceId::Hurwitz2x2Rotation | InstanceId::Hurwitz2kBlocks { .. } => vec![1.0],
            InstanceId::Schur2x2 { a } => stab_core::regions::schur_2x2_endpoints(*a).map(Vec::from).unwrap_or_default(),
            InstanceId::Schur2kBlocks { a, .. } => {
                stab_core::regions::schur_2x2_endpoints(a[0]).map(Vec::from).unwrap_or_default()
            }
            _ => Vec::new(),
        };
        Self {
            a: inst.system.a.clone(),
            b: inst.system.b.clone(),
            c: inst.system.c.clone(),
            domain: inst.system.domain,
            subspace: Some(inst.subspace.clone()),
            ticks,
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum GainJson {
    Bare(RealMatrix),
    Wrapped {
        #[serde(alias = "gain")]
        #[serde(rename = "K")]
        k: RealMatrix,
    },
}

/// Reads a gain as a nested array or as `{"K": [[...]]}`.
pub fn load_gain(path: &Path) -> Result<RealMatrix> {
    let text = fs::read_to_string(path)?;
    let g: GainJson = serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok(match g {
        GainJson::Bare(k) | GainJson::Wrapped { k } => k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use stab_core::regions::gen_instance;

    #[test]
    fn parses_minimal_file() {
        let f: SystemFile = serde_json::from_str(r#"{"A": [[1]], "B": [[1]], "domain": "continuous"}"#).unwrap();
        assert!(f.c.is_none() && f.subspace.is_none());
        assert_eq!(f.system().unwrap().n(), 1);
    }

    #[test]
    fn instance_files_roundtrip() {
        let inst = gen_instance(&InstanceId::Schur2x2 { a: 3.0 }).unwrap();
        let f = SystemFile::from_instance(&inst);
        assert_eq!(f.ticks.len(), 4);
        let back: SystemFile = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn dimension_errors_surface() {
        let f: SystemFile = serde_json::from_str(r#"{"A": [[1, 0]], "B": [[1]], "domain": "discrete"}"#).unwrap();
        assert!(f.system().is_err());
    }
}
