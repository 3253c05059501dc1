//! Seeded Gaussian score generator for multi-demographic verification systems.
//!
//! Every (enroll, probe, kind) cell draws from its own ChaCha8 stream whose
//! seed is derived from the run seed and the cell's labels, so adding or
//! removing a demographic leaves the other cells untouched.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::score::{ComparisonRecord, DemographicLabel, ScoreKind, ScoreSet, SplitDataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemographicScoreParams {
    pub impostor_mean: f64,
    pub impostor_std: f64,
    pub genuine_mean: f64,
    pub genuine_std: f64,
    pub n_impostor: usize,
    pub n_genuine: usize,
}

impl DemographicScoreParams {
    pub fn new(
        (impostor_mean, impostor_std): (f64, f64),
        (genuine_mean, genuine_std): (f64, f64),
        n_impostor: usize,
        n_genuine: usize,
    ) -> Self {
        Self {
            impostor_mean,
            impostor_std,
            genuine_mean,
            genuine_std,
            n_impostor,
            n_genuine,
        }
    }

    fn validate(&self, demo: &str) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidSpec(format!("demographic {demo}: {what}")));
        for (name, v) in [
            ("impostor_mean", self.impostor_mean),
            ("genuine_mean", self.genuine_mean),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite, got {v}"));
            }
        }
        for (name, v) in [
            ("impostor_std", self.impostor_std),
            ("genuine_std", self.genuine_std),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.n_impostor == 0 || self.n_genuine == 0 {
            return bad("n_impostor and n_genuine must be positive".into());
        }
        if self.genuine_mean <= self.impostor_mean {
            return bad(format!(
                "genuine_mean {} must exceed impostor_mean {}",
                self.genuine_mean, self.impostor_mean
            ));
        }
        Ok(())
    }
}

fn default_dev_fraction() -> f64 {
    0.5
}

fn default_cross_fraction() -> f64 {
    0.1
}

fn default_cross_shift() -> f64 {
    0.5
}

/// A complete generator configuration. Serializable as JSON for spec files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub per_demo: BTreeMap<String, DemographicScoreParams>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_dev_fraction")]
    pub dev_fraction: f64,
    /// Size of each cross-demographic impostor cell relative to the enroll
    /// demographic's `n_impostor`.
    #[serde(default = "default_cross_fraction")]
    pub cross_fraction: f64,
    /// Cross-demographic impostor mean sits this many enroll-side impostor
    /// standard deviations below the homogeneous impostor mean.
    #[serde(default = "default_cross_shift")]
    pub cross_shift_stds: f64,
}

impl SyntheticSpec {
    pub fn new(per_demo: BTreeMap<String, DemographicScoreParams>, seed: u64) -> Self {
        Self {
            per_demo,
            seed,
            dev_fraction: default_dev_fraction(),
            cross_fraction: default_cross_fraction(),
            cross_shift_stds: default_cross_shift(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.per_demo.is_empty() {
            return Err(Error::InvalidSpec("at least one demographic is required".into()));
        }
        for (demo, params) in &self.per_demo {
            if demo.is_empty() {
                return Err(Error::InvalidSpec("demographic labels must be non-empty".into()));
            }
            params.validate(demo)?;
        }
        if !(self.dev_fraction > 0.0 && self.dev_fraction < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "dev_fraction must lie in (0, 1), got {}",
                self.dev_fraction
            )));
        }
        if !(self.cross_fraction.is_finite() && self.cross_fraction > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "cross_fraction must be positive, got {}",
                self.cross_fraction
            )));
        }
        if !self.cross_shift_stds.is_finite() {
            return Err(Error::InvalidSpec("cross_shift_stds must be finite".into()));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self =
            serde_json::from_str(text).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

pub const PRESETS: [&str; 2] = ["fair3", "unfair3"];

const PRESET_IMPOSTORS: usize = 1_000_000;
const PRESET_GENUINES: usize = 100_000;

/// Built-in systems over demographics "0", "1" and "2".
///
/// `fair3` gives every demographic the same distributions. `unfair3` keeps
/// demographic 0 and degrades the genuine distributions of 1 and 2, with 2
/// also drawing a wider, higher impostor distribution.
pub fn preset(name: &str) -> Result<SyntheticSpec> {
    let fair = DemographicScoreParams::new((0.0, 1.0), (6.0, 1.0), PRESET_IMPOSTORS, PRESET_GENUINES);
    let per_demo: BTreeMap<String, DemographicScoreParams> = match name {
        "fair3" => ["0", "1", "2"]
            .into_iter()
            .map(|d| (d.to_owned(), fair.clone()))
            .collect(),
        "unfair3" => [
            ("0", fair.clone()),
            (
                "1",
                DemographicScoreParams::new((0.0, 1.0), (5.6, 1.05), PRESET_IMPOSTORS, PRESET_GENUINES),
            ),
            (
                "2",
                DemographicScoreParams::new((0.3, 1.1), (5.1, 1.1), PRESET_IMPOSTORS, PRESET_GENUINES),
            ),
        ]
        .into_iter()
        .map(|(d, p)| (d.to_owned(), p))
        .collect(),
        other => return Err(Error::UnknownPreset(other.to_owned())),
    };
    Ok(SyntheticSpec::new(per_demo, 42))
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream seed for one cell. Labels are length-prefixed so ("ab", "c") and
/// ("a", "bc") differ.
pub fn cell_seed(seed: u64, enroll: &str, probe: &str, kind: ScoreKind) -> u64 {
    let mut h = splitmix64(seed);
    let kind_tag: &[u8] = match kind {
        ScoreKind::Genuine => b"g",
        ScoreKind::Impostor => b"i",
    };
    for part in [enroll.as_bytes(), probe.as_bytes(), kind_tag] {
        h = splitmix64(h ^ part.len() as u64);
        for chunk in part.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            h = splitmix64(h ^ u64::from_le_bytes(buf));
        }
    }
    h
}

struct Cell {
    enroll: DemographicLabel,
    probe: DemographicLabel,
    kind: ScoreKind,
    mean: f64,
    std: f64,
    n: usize,
}

fn cells(spec: &SyntheticSpec) -> Result<Vec<Cell>> {
    let labels = spec
        .per_demo
        .keys()
        .map(|k| DemographicLabel::new(k))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for (e, enroll) in labels.iter().enumerate() {
        let p_e = &spec.per_demo[enroll.as_str()];
        for (p, probe) in labels.iter().enumerate() {
            if e == p {
                out.push(Cell {
                    enroll: enroll.clone(),
                    probe: probe.clone(),
                    kind: ScoreKind::Genuine,
                    mean: p_e.genuine_mean,
                    std: p_e.genuine_std,
                    n: p_e.n_genuine,
                });
                out.push(Cell {
                    enroll: enroll.clone(),
                    probe: probe.clone(),
                    kind: ScoreKind::Impostor,
                    mean: p_e.impostor_mean,
                    std: p_e.impostor_std,
                    n: p_e.n_impostor,
                });
            } else {
                let n = ((p_e.n_impostor as f64) * spec.cross_fraction).round().max(1.0) as usize;
                out.push(Cell {
                    enroll: enroll.clone(),
                    probe: probe.clone(),
                    kind: ScoreKind::Impostor,
                    mean: p_e.impostor_mean - spec.cross_shift_stds * p_e.impostor_std,
                    std: p_e.impostor_std,
                    n,
                });
            }
        }
    }
    Ok(out)
}

fn draw(cell: &Cell, seed: u64, dev_fraction: f64) -> Result<(Vec<ComparisonRecord>, Vec<ComparisonRecord>)> {
    let normal = Normal::new(cell.mean, cell.std)
        .map_err(|e| Error::InvalidSpec(format!("{}-{}: {e}", cell.enroll, cell.probe)))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cell_seed(
        seed,
        cell.enroll.as_str(),
        cell.probe.as_str(),
        cell.kind,
    ));
    let n_dev = (dev_fraction * cell.n as f64).floor() as usize;
    let mut dev = Vec::with_capacity(n_dev);
    let mut test = Vec::with_capacity(cell.n - n_dev);
    for i in 0..cell.n {
        let score: f64 = rng.sample(normal);
        let rec = ComparisonRecord::new(cell.enroll.clone(), cell.probe.clone(), score, cell.kind)?;
        if i < n_dev {
            dev.push(rec);
        } else {
            test.push(rec);
        }
    }
    Ok((dev, test))
}

/// Draws every cell and splits each one into dev (the first
/// `floor(dev_fraction * n)` draws) and test (the rest).
pub fn generate(spec: &SyntheticSpec) -> Result<SplitDataset> {
    spec.validate()?;
    let cells = cells(spec)?;
    let drawn = cells
        .par_iter()
        .map(|c| draw(c, spec.seed, spec.dev_fraction))
        .collect::<Result<Vec<_>>>()?;
    let total_dev = drawn.iter().map(|(d, _)| d.len()).sum();
    let total_test = drawn.iter().map(|(_, t)| t.len()).sum();
    let mut dev = Vec::with_capacity(total_dev);
    let mut test = Vec::with_capacity(total_test);
    for (d, t) in drawn {
        dev.extend(d);
        test.extend(t);
    }
    SplitDataset::new(ScoreSet::new(dev), ScoreSet::new(test)).map_err(|e| match e {
        Error::NoImpostorsInDev => Error::InvalidSpec(
            "dev_fraction leaves the dev split without impostors".into(),
        ),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> SyntheticSpec {
        let mut spec = preset("unfair3").unwrap().with_seed(seed);
        for p in spec.per_demo.values_mut() {
            p.n_impostor = 400;
            p.n_genuine = 50;
        }
        spec
    }

    #[test]
    fn unknown_preset() {
        assert!(matches!(preset("nope"), Err(Error::UnknownPreset(_))));
        for name in PRESETS {
            preset(name).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn inverted_system_is_rejected() {
        let mut spec = small(1);
        let p = spec.per_demo.get_mut("1").unwrap();
        p.genuine_mean = p.impostor_mean - 1.0;
        assert!(matches!(generate(&spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn bad_fractions_are_rejected() {
        for f in [0.0, 1.0, -0.2, f64::NAN] {
            let mut spec = small(1);
            spec.dev_fraction = f;
            assert!(spec.validate().is_err(), "{f}");
        }
        let mut spec = small(1);
        spec.cross_fraction = 0.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn counts_and_layout() {
        let data = generate(&small(3)).unwrap();
        // 3 homogeneous cells of 400, 6 cross cells of 40, half to dev.
        assert_eq!(data.dev().impostors().count(), (3 * 400 + 6 * 40) / 2);
        assert_eq!(data.test().genuines().count(), 3 * 25);
        assert!(data.dev().genuines().all(|r| r.is_homogeneous()));
        assert_eq!(data.test().labels().len(), 3);
    }

    #[test]
    fn same_seed_same_records() {
        assert_eq!(generate(&small(9)).unwrap(), generate(&small(9)).unwrap());
        assert_ne!(generate(&small(9)).unwrap(), generate(&small(10)).unwrap());
    }

    #[test]
    fn adding_a_demographic_keeps_other_streams() {
        let base = small(5);
        let mut grown = base.clone();
        grown
            .per_demo
            .insert("3".into(), base.per_demo["0"].clone());
        let a = generate(&base).unwrap();
        let b = generate(&grown).unwrap();
        let zero = DemographicLabel::new("0").unwrap();
        let pick = |s: &ScoreSet| -> Vec<f64> {
            s.records()
                .iter()
                .filter(|r| r.enroll_demo() == &zero && r.is_homogeneous())
                .map(|r| r.score())
                .collect()
        };
        assert_eq!(pick(a.test()), pick(b.test()));
    }

    #[test]
    fn cell_seeds_are_distinct() {
        let a = cell_seed(1, "ab", "c", ScoreKind::Impostor);
        let b = cell_seed(1, "a", "bc", ScoreKind::Impostor);
        let c = cell_seed(1, "ab", "c", ScoreKind::Genuine);
        assert!(a != b && a != c && b != c);
    }

    #[test]
    fn json_round_trip_with_defaults() {
        let text = r#"{"per_demo": {"x": {"impostor_mean": 0, "impostor_std": 1,
            "genuine_mean": 3, "genuine_std": 1, "n_impostor": 10, "n_genuine": 5}}}"#;
        let spec = SyntheticSpec::from_json(text).unwrap();
        assert_eq!(spec.dev_fraction, 0.5);
        assert_eq!(spec.seed, 0);
        assert_eq!(SyntheticSpec::from_json(&spec.to_json()).unwrap(), spec);
        let bad = text.replace("\"genuine_mean\": 3", "\"genuine_mean\": -3");
        assert!(matches!(SyntheticSpec::from_json(&bad), Err(Error::InvalidSpec(_))));
    }
}
