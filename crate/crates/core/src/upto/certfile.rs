use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{Dist, Rational, StateId};

use super::{Certificate, TechniqueConfig, UptoError};

/// On-disk certificate layout (JSON).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateFile {
    pub technique: TechniqueConfig,
    pub pairs: Vec<PairFile>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairFile {
    pub left: BTreeMap<String, Rational>,
    pub right: BTreeMap<String, Rational>,
}

fn to_dist(which: &str, idx: usize, m: &BTreeMap<String, Rational>) -> Result<Dist, UptoError> {
    let entries = m
        .iter()
        .map(|(s, w)| StateId::new(s).map(|s| (s, w.clone())))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| UptoError::Format(format!("pair {idx} {which}: {e}")))?;
    Dist::new(entries).map_err(|e| UptoError::Format(format!("pair {idx} {which}: {e}")))
}

fn from_dist(d: &Dist) -> BTreeMap<String, Rational> {
    d.iter().map(|(s, w)| (s.to_string(), w.clone())).collect()
}

impl CertificateFile {
    pub fn into_certificate(self) -> Result<Certificate, UptoError> {
        let pairs = self
            .pairs
            .iter()
            .enumerate()
            .map(|(i, p)| Ok((to_dist("left", i, &p.left)?, to_dist("right", i, &p.right)?)))
            .collect::<Result<Vec<_>, UptoError>>()?;
        Ok(Certificate::new(pairs, self.technique))
    }

    pub fn from_certificate(cert: &Certificate) -> Self {
        CertificateFile {
            technique: cert.config,
            pairs: cert
                .pairs
                .iter()
                .map(|(l, r)| PairFile {
                    left: from_dist(l),
                    right: from_dist(r),
                })
                .collect(),
        }
    }
}

pub fn certificate_from_json(text: &str) -> Result<Certificate, UptoError> {
    let file: CertificateFile = serde_json::from_str(text).map_err(|e| UptoError::Format(e.to_string()))?;
    file.into_certificate()
}

pub fn certificate_to_json(cert: &Certificate) -> String {
    serde_json::to_string_pretty(&CertificateFile::from_certificate(cert)).expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::upto::Base;

    #[test]
    fn reads_reference_certificate() {
        let cert = certificate_from_json(include_str!("../../../../figures/fig1_cert.json")).unwrap();
        assert_eq!(cert.config, TechniqueConfig::new(Base::Cvx, false));
        assert_eq!(cert.pairs.len(), 4);
        assert_eq!(cert.pairs[2].1, Dist::parse_literal("y1:1/2,y2:1/2").unwrap());
        assert_eq!(certificate_from_json(&certificate_to_json(&cert)).unwrap(), cert);
    }

    #[test]
    fn rejects_bad_files() {
        let bad_base = r#"{"technique":{"base":"cgr","identity_slack":false},"pairs":[]}"#;
        assert!(matches!(certificate_from_json(bad_base), Err(UptoError::Format(_))));
        let bad_mass = r#"{"technique":{"base":"cvx","identity_slack":false},
            "pairs":[{"left":{"x":"1/2"},"right":{"y":"1"}}]}"#;
        assert!(matches!(certificate_from_json(bad_mass), Err(UptoError::Format(_))));
        let bad_rat = r#"{"technique":{"base":"cvx","identity_slack":false},
            "pairs":[{"left":{"x":"0.5"},"right":{"y":"1"}}]}"#;
        assert!(matches!(certificate_from_json(bad_rat), Err(UptoError::Format(_))));
    }
}
